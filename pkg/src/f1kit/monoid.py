"""Pointed commutative monoids.

Two concrete backends are provided.

``TableMonoid`` stores a full multiplication table on ``0..n-1``.

``AffineMonoid`` is ``N^a x Z^b x Z/d_1 x ... x Z/d_t`` with an adjoined
zero, optionally divided by a monomial ideal ``I0``.  Elements are plain
tuples of length ``a+b+t`` or the sentinel ``ZERO``; every stored tuple is
kept in canonical form (torsion reduced, not divisible by ``I0``).

Raw element values are what the algorithms pass around.  ``MonoidElement``
wraps a raw value with its monoid for user-facing arithmetic.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Hashable, Iterable, Sequence

from . import abgroup

log = logging.getLogger(__name__)


class MonoidError(ValueError):
    """Invalid monoid data or a mixed-monoid operation."""


class UnsupportedError(MonoidError):
    """The requested construction is outside what the backends support."""


class _Zero:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "ZERO"

    def __reduce__(self):
        return (_Zero, ())


ZERO = _Zero()


def _sort_key(x: Any) -> tuple:
    if x is ZERO:
        return (0, ())
    if isinstance(x, tuple):
        return (1, x)
    return (1, (x,))


# --------------------------------------------------------------------------
# elements and the common interface


@dataclass(frozen=True)
class MonoidElement:
    monoid: "Monoid"
    value: Hashable

    def __mul__(self, other: "MonoidElement") -> "MonoidElement":
        if not isinstance(other, MonoidElement):
            return NotImplemented
        if other.monoid is not self.monoid:
            raise MonoidError("cannot multiply elements of different monoids")
        return MonoidElement(self.monoid, self.monoid.mul(self.value, other.value))

    def __pow__(self, k: int) -> "MonoidElement":
        return MonoidElement(self.monoid, self.monoid.power(self.value, k))

    def is_zero(self) -> bool:
        return self.monoid.is_zero(self.value)

    def __repr__(self) -> str:
        return self.monoid.format(self.value)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, MonoidElement):
            return self.monoid is other.monoid and self.value == other.value
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.value)


def raw(x: Any) -> Hashable:
    return x.value if isinstance(x, MonoidElement) else x


@dataclass(frozen=True)
class RingPresentation:
    """``Z[vars] / (lhs - rhs, zeros)`` with monomials as exponent vectors."""

    vars: tuple[str, ...]
    relations: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]
    zeros: tuple[tuple[int, ...], ...]

    def to_dict(self) -> dict:
        return {
            "vars": list(self.vars),
            "relations": [{"lhs": list(l), "rhs": list(r)} for l, r in self.relations],
            "zeros": [list(z) for z in self.zeros],
        }

    def format(self) -> str:
        def mono(e: Sequence[int]) -> str:
            parts = [v if k == 1 else f"{v}^{k}" for v, k in zip(self.vars, e) if k]
            return "*".join(parts) if parts else "1"

        gens = ",".join(self.vars)
        rels = [f"{mono(l)} - {mono(r)}" for l, r in self.relations] + [mono(z) for z in self.zeros]
        return f"Z[{gens}]" + (f"/({', '.join(rels)})" if rels else "")


class Monoid:
    """Common behaviour of the two backends."""

    generators: tuple[Hashable, ...]
    generator_names: tuple[str, ...]

    # backend hooks ----------------------------------------------------------
    def mul(self, x, y):
        raise NotImplementedError

    @property
    def one(self):
        raise NotImplementedError

    @property
    def zero(self):
        raise NotImplementedError

    def is_zero(self, x) -> bool:
        return x == self.zero

    def divides(self, g, m) -> bool:
        raise NotImplementedError

    def word(self, x) -> tuple[int, ...] | None:
        """Exponent vector over the declared generators, None for zero."""
        raise NotImplementedError

    @property
    def is_finite(self) -> bool:
        raise NotImplementedError

    def elements(self) -> list:
        raise NotImplementedError

    def format(self, x) -> str:
        return repr(x)

    # shared -----------------------------------------------------------------
    def element(self, x) -> MonoidElement:
        return MonoidElement(self, self.canonical(raw(x)))

    def canonical(self, x):
        return x

    def gen(self, name: str) -> MonoidElement:
        return MonoidElement(self, self.generators[self.generator_names.index(name)])

    def power(self, x, k: int):
        out = self.one
        base = x
        while k:
            if k & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            k >>= 1
        return out

    def from_word(self, exps: Sequence[int]):
        out = self.one
        for g, k in zip(self.generators, exps):
            if k:
                out = self.mul(out, self.power(g, k))
        return out

    def prod(self, xs: Iterable):
        out = self.one
        for x in xs:
            out = self.mul(out, x)
        return out

    @property
    def is_zero_monoid(self) -> bool:
        return self.one == self.zero

    def check_same(self, other: "Monoid") -> None:
        if other is not self:
            raise MonoidError("operands belong to different monoids")

    def saturation(self, S: Iterable, limit: int = 100000) -> list:
        """Submonoid generated by ``S`` (finite monoids only)."""
        S = [raw(s) for s in S]
        seen = {self.one: None}
        order = [self.one]
        frontier = [self.one]
        while frontier:
            nxt = []
            for x in frontier:
                for s in S:
                    y = self.mul(x, s)
                    if y not in seen:
                        seen[y] = None
                        order.append(y)
                        nxt.append(y)
                        if len(order) > limit:
                            raise UnsupportedError("saturation is too large to enumerate")
            frontier = nxt
        return order

    def zero_in_saturation(self, S: Iterable) -> bool:
        raise NotImplementedError


# --------------------------------------------------------------------------
# table backend


class TableMonoid(Monoid):
    """A finite pointed monoid given by its multiplication table."""

    def __init__(
        self,
        table: Sequence[Sequence[int]],
        zero: int,
        one: int,
        generators: Sequence[int],
        names: Sequence[str] | None = None,
        labels: Sequence[str] | None = None,
        check: bool = True,
    ):
        self.n = len(table)
        self.table = tuple(tuple(int(v) for v in row) for row in table)
        self._zero = int(zero)
        self._one = int(one)
        self.generators = tuple(int(g) for g in generators)
        self.generator_names = tuple(names) if names else tuple(f"g{i}" for i in range(len(self.generators)))
        self.labels = tuple(labels) if labels else None
        if len(self.generator_names) != len(self.generators):
            raise MonoidError("one name per generator is required")
        if check:
            self._validate()

    def _validate(self) -> None:
        n, t = self.n, self.table
        if n == 0:
            raise MonoidError("a pointed monoid has at least one element")
        if any(len(row) != n for row in t):
            raise MonoidError("multiplication table must be square")
        if any(not 0 <= v < n for row in t for v in row):
            raise MonoidError("table entry out of range")
        for name, idx in (("zero", self._zero), ("one", self._one)):
            if not 0 <= idx < n:
                raise MonoidError(f"{name} index out of range")
        for x in range(n):
            if t[x][self._one] != x:
                raise MonoidError(f"one is not neutral on {x}")
            if t[x][self._zero] != self._zero:
                raise MonoidError(f"zero does not absorb {x}")
            for y in range(x + 1, n):
                if t[x][y] != t[y][x]:
                    raise MonoidError(f"not commutative at ({x}, {y})")
        for x in range(n):
            for y in range(n):
                xy = t[x][y]
                for z in range(n):
                    if t[xy][z] != t[x][t[y][z]]:
                        raise MonoidError(f"not associative at ({x}, {y}, {z})")
        reach = set(self.saturation(self.generators)) | {self._zero}
        if len(reach) != n:
            missing = sorted(set(range(n)) - reach)
            raise MonoidError(f"declared generators do not generate; missing {missing}")

    def mul(self, x, y):
        return self.table[x][y]

    @property
    def one(self):
        return self._one

    @property
    def zero(self):
        return self._zero

    @property
    def is_finite(self) -> bool:
        return True

    def elements(self) -> list:
        return list(range(self.n))

    def format(self, x) -> str:
        if self.labels:
            return self.labels[x]
        if x == self._zero:
            return "0"
        if x == self._one:
            return "1"
        w = self.word(x)
        parts = [nm if k == 1 else f"{nm}^{k}" for nm, k in zip(self.generator_names, w) if k]
        return "*".join(parts) if parts else f"#{x}"

    @cached_property
    def _divisors(self) -> tuple[frozenset, ...]:
        return tuple(frozenset(self.table[g]) for g in range(self.n))

    def divides(self, g, m) -> bool:
        return m in self._divisors[g]

    @cached_property
    def _words(self) -> dict:
        # BFS from one; the first word found is the normal form
        k = len(self.generators)
        words = {self._one: (0,) * k}
        frontier = [self._one]
        while frontier:
            nxt = []
            for x in frontier:
                for i, g in enumerate(self.generators):
                    y = self.table[x][g]
                    if y == self._zero or y in words:
                        continue
                    w = list(words[x])
                    w[i] += 1
                    words[y] = tuple(w)
                    nxt.append(y)
            frontier = nxt
        return words

    def word(self, x):
        if x == self._zero and not self.is_zero_monoid:
            return None
        if self.is_zero_monoid:
            return None
        return self._words.get(x)

    def zero_in_saturation(self, S) -> bool:
        return self._zero in self.saturation(S)

    def __repr__(self) -> str:
        return f"TableMonoid(n={self.n}, generators={list(self.generator_names)})"


# --------------------------------------------------------------------------
# affine backend


class AffineMonoid(Monoid):
    """``(N^a x Z^b x prod Z/d_i) u {0}`` modulo a monomial ideal."""

    def __init__(
        self,
        free: int = 0,
        lattice: int = 0,
        torsion: Sequence[int] = (),
        ideal: Iterable[Sequence[int]] = (),
        coord_names: Sequence[str] | None = None,
    ):
        if free < 0 or lattice < 0:
            raise MonoidError("free and lattice ranks must be non-negative")
        self.a = int(free)
        self.b = int(lattice)
        self.torsion = tuple(int(d) for d in torsion)
        if any(d < 1 for d in self.torsion):
            raise MonoidError("torsion orders must be positive")
        self.dim = self.a + self.b + len(self.torsion)
        if coord_names is None:
            coord_names = (
                [f"T{i + 1}" for i in range(self.a)]
                + [f"U{i + 1}" for i in range(self.b)]
                + [f"G{i + 1}" for i in range(len(self.torsion))]
            )
        self.coord_names = tuple(coord_names)
        if len(self.coord_names) != self.dim:
            raise MonoidError("one coordinate name per coordinate is required")
        gens, names = [], []
        for i in range(self.dim):
            e = [0] * self.dim
            e[i] = 1
            if i >= self.a + self.b:
                e[i] %= self.torsion[i - self.a - self.b]
            gens.append(tuple(e))
            names.append(self.coord_names[i])
            if self.a <= i < self.a + self.b:
                e = [0] * self.dim
                e[i] = -1
                gens.append(tuple(e))
                names.append(self.coord_names[i] + "^-1")
        self.generators = tuple(gens)
        self.generator_names = tuple(names)
        raw_ideal = []
        for g in ideal:
            g = self._reduce_torsion(tuple(int(x) for x in g))
            if len(g) != self.dim:
                raise MonoidError(f"ideal generator {g} has wrong length")
            if any(x < 0 for x in g[: self.a]):
                raise MonoidError(f"ideal generator {g} has negative free exponent")
            raw_ideal.append(g)
        self.ideal = self._minimize(raw_ideal)

    # arithmetic -------------------------------------------------------------
    def _reduce_torsion(self, v: tuple) -> tuple:
        if not self.torsion:
            return v
        off = self.a + self.b
        return v[:off] + tuple(x % d for x, d in zip(v[off:], self.torsion))

    def _raw_divides(self, g: tuple, m: tuple) -> bool:
        return all(m[i] >= g[i] for i in range(self.a))

    def _minimize(self, gens: list) -> tuple:
        gens = sorted(set(gens), key=lambda v: (sum(v[: self.a]), v))
        out: list = []
        for g in gens:
            if not any(self._raw_divides(h, g) for h in out):
                out.append(g)
        return tuple(out)

    def canonical(self, x):
        if x is ZERO:
            return ZERO
        x = self._reduce_torsion(tuple(int(v) for v in x))
        if len(x) != self.dim:
            raise MonoidError(f"element {x} has wrong length")
        if any(v < 0 for v in x[: self.a]):
            raise MonoidError(f"element {x} has negative free exponent")
        for g in self.ideal:
            if self._raw_divides(g, x):
                return ZERO
        return x

    def mul(self, x, y):
        if x is ZERO or y is ZERO:
            return ZERO
        return self.canonical(tuple(p + q for p, q in zip(x, y)))

    @property
    def one(self):
        return self.canonical((0,) * self.dim)

    @property
    def zero(self):
        return ZERO

    def is_zero(self, x) -> bool:
        return x is ZERO

    def divides(self, g, m) -> bool:
        if m is ZERO:
            return True
        if g is ZERO:
            return False
        return self._raw_divides(g, m)

    def word(self, x):
        if x is ZERO:
            return None
        w = []
        for i in range(self.dim):
            if self.a <= i < self.a + self.b:
                w.append(max(x[i], 0))
                w.append(max(-x[i], 0))
            else:
                w.append(x[i])
        return tuple(w)

    def format(self, x) -> str:
        if x is ZERO:
            return "0"
        parts = [nm if k == 1 else f"{nm}^{k}" for nm, k in zip(self.coord_names, x) if k]
        return "*".join(parts) if parts else "1"

    # finiteness -------------------------------------------------------------
    @cached_property
    def _free_bounds(self) -> tuple[int, ...] | None:
        if self.b:
            return None
        bounds = []
        for i in range(self.a):
            pure = [g[i] for g in self.ideal if all(g[j] == 0 for j in range(self.a) if j != i)]
            if not pure:
                return None
            bounds.append(min(pure))
        return tuple(bounds)

    @property
    def is_finite(self) -> bool:
        return self.is_zero_monoid or self._free_bounds is not None

    def elements(self) -> list:
        if self.is_zero_monoid:
            return [ZERO]
        bounds = self._free_bounds
        if bounds is None:
            raise UnsupportedError("monoid is infinite")
        out = [ZERO]
        ranges = [range(k) for k in bounds] + [range(d) for d in self.torsion]
        for v in itertools.product(*ranges):
            c = self.canonical(v)
            if c is not ZERO:
                out.append(c)
        return out

    def zero_in_saturation(self, S) -> bool:
        S = [raw(s) for s in S]
        if any(s is ZERO for s in S):
            return True
        support = {i for s in S for i in range(self.a) if s[i] > 0}
        return any(all(g[i] == 0 for i in range(self.a) if i not in support) for g in self.ideal)

    def to_table(self) -> tuple[TableMonoid, list]:
        """Materialize a finite affine monoid; returns the table and element list."""
        elems = self.elements()
        index = {e: i for i, e in enumerate(elems)}
        n = len(elems)
        table = [[index[self.mul(x, y)] for y in elems] for x in elems]
        gens, names = [], []
        for g, nm in zip(self.generators, self.generator_names):
            gens.append(index[self.canonical(g)])
            names.append(nm)
        labels = [self.format(e) for e in elems]
        return TableMonoid(table, index[ZERO], index[self.one], gens, names, labels), elems

    def __repr__(self) -> str:
        return (
            f"AffineMonoid(free={self.a}, lattice={self.b}, torsion={list(self.torsion)}, "
            f"ideal={[list(g) for g in self.ideal]})"
        )

    def describe(self) -> dict:
        return {
            "backend": "affine",
            "free": self.a,
            "lattice": self.b,
            "torsion": list(self.torsion),
            "ideal": [list(g) for g in self.ideal],
        }


# --------------------------------------------------------------------------
# builders


def F1() -> AffineMonoid:
    return AffineMonoid()


def polynomial(n: int = 1, names: Sequence[str] | None = None) -> AffineMonoid:
    """``F1[T_1, ..., T_n]``."""
    if names is None:
        names = ["T"] if n == 1 else [f"T{i + 1}" for i in range(n)]
    return AffineMonoid(free=n, coord_names=names)


def laurent(n: int = 1, names: Sequence[str] | None = None) -> AffineMonoid:
    """``F1[T_1^{+-1}, ..., T_n^{+-1}]``."""
    if names is None:
        names = ["T"] if n == 1 else [f"T{i + 1}" for i in range(n)]
    return AffineMonoid(lattice=n, coord_names=names)


def group_monoid(orders: Sequence[int]) -> AffineMonoid:
    """``F1[G]`` for the finite abelian group ``G = prod Z/d``."""
    names = ["g"] if len(orders) == 1 else [f"g{i + 1}" for i in range(len(orders))]
    return AffineMonoid(torsion=orders, coord_names=names)


def truncated_polynomial(k: int) -> AffineMonoid:
    """``F1[T]/(T^k)``."""
    return AffineMonoid(free=1, ideal=[[k]], coord_names=["T"])


def zero_monoid() -> AffineMonoid:
    return AffineMonoid(ideal=[[]])


def idempotent_monoid() -> TableMonoid:
    """The three-element monoid ``{0, 1, e}`` with ``e^2 = e``."""
    return TableMonoid([[0, 0, 0], [0, 1, 2], [0, 2, 2]], 0, 1, [2], ["e"], ["0", "1", "e"])


def table_monoid(size: int, mul: Sequence[int], zero: int, one: int, generators: Sequence[int], names=None) -> TableMonoid:
    """Build from a row-major multiplication table."""
    if len(mul) != size * size:
        raise MonoidError(f"expected {size * size} table entries, got {len(mul)}")
    rows = [list(mul[i * size : (i + 1) * size]) for i in range(size)]
    return TableMonoid(rows, zero, one, generators, names)


def from_dict(doc: dict) -> Monoid:
    backend = doc.get("backend")
    if backend == "affine":
        return AffineMonoid(
            free=int(doc.get("free", 0)),
            lattice=int(doc.get("lattice", 0)),
            torsion=doc.get("torsion", []),
            ideal=doc.get("ideal", []),
            coord_names=doc.get("names"),
        )
    if backend == "table":
        return table_monoid(
            int(doc["size"]), doc["mul"], int(doc["zero"]), int(doc["one"]), doc.get("generators", []), doc.get("names")
        )
    raise MonoidError(f"unknown monoid backend {backend!r}")


# --------------------------------------------------------------------------
# ideals and primes


@dataclass(frozen=True, eq=False)
class Ideal:
    monoid: Monoid
    generators: tuple

    def contains(self, m) -> bool:
        m = raw(m)
        return self.monoid.is_zero(m) or any(self.monoid.divides(g, m) for g in self.generators)

    __contains__ = contains

    def is_unit_ideal(self) -> bool:
        return self.contains(self.monoid.one)

    def members(self) -> frozenset:
        return frozenset(x for x in self.monoid.elements() if self.contains(x))

    def format(self) -> str:
        if not self.generators:
            return "(0)"
        return "(" + ", ".join(self.monoid.format(g) for g in self.generators) + ")"

    def __repr__(self) -> str:
        return f"Ideal{self.format()}"


@dataclass(frozen=True, eq=False)
class PrimeIdeal(Ideal):
    """A prime; ``J`` is the set of free coordinates for affine monoids."""

    J: tuple[int, ...] | None = None
    _members: frozenset | None = field(default=None, repr=False)

    def contains(self, m) -> bool:
        m = raw(m)
        if self.J is not None:
            return m is ZERO or any(m[j] > 0 for j in self.J)
        if self._members is not None:
            return m in self._members
        return Ideal.contains(self, m)

    __contains__ = contains

    @property
    def key(self) -> tuple:
        if self.J is not None:
            return self.J
        return tuple(sorted(self._members))

    def __le__(self, other: "PrimeIdeal") -> bool:
        if self.J is not None and other.J is not None:
            return set(self.J) <= set(other.J)
        return self._members <= other._members

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PrimeIdeal):
            return NotImplemented
        return self.monoid is other.monoid and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return f"Prime{self.format()}"


def _minimal_generators(A: Monoid, members: Iterable) -> tuple:
    chosen: list = []
    members = sorted(members, key=lambda x: (sum(A.word(x) or ()), _sort_key(x)))
    for x in members:
        if A.is_zero(x):
            continue
        if not any(A.divides(g, x) for g in chosen):
            chosen.append(x)
    return tuple(chosen)


def ideal(A: Monoid, generators: Iterable) -> Ideal:
    gens = tuple(A.canonical(raw(g)) for g in generators)
    return Ideal(A, tuple(g for g in gens if not A.is_zero(g)))


def is_prime(I: Ideal) -> bool:
    A = I.monoid
    if I.contains(A.one):
        return False
    if not A.is_finite:
        raise UnsupportedError("primality test needs a finite monoid; use enumerate_primes")
    comp = [x for x in A.elements() if not I.contains(x)]
    return all(not I.contains(A.mul(x, y)) for x in comp for y in comp)


def enumerate_primes(A: Monoid) -> list[PrimeIdeal]:
    """All prime ideals, ordered by size and then canonically."""
    cached = getattr(A, "_primes_cache", None)
    if cached is not None:
        return list(cached)
    if isinstance(A, AffineMonoid):
        out = []
        if not A.is_zero_monoid:
            for k in range(A.a + 1):
                for J in itertools.combinations(range(A.a), k):
                    if all(any(g[j] > 0 for j in J) for g in A.ideal):
                        gens = []
                        for j in J:
                            e = [0] * A.dim
                            e[j] = 1
                            c = A.canonical(tuple(e))
                            if c is not ZERO:
                                gens.append(c)
                        out.append(PrimeIdeal(A, tuple(gens), J=J))
    else:
        out = []
        seen = set()
        elems = A.elements()
        k = len(A.generators)
        for r in range(k + 1):
            for subset in itertools.combinations(range(k), r):
                gens = [A.generators[i] for i in subset]
                members = frozenset(x for x in elems if A.is_zero(x) or any(A.divides(g, x) for g in gens))
                if members in seen or A.one in members:
                    continue
                comp = [x for x in elems if x not in members]
                if all(A.mul(x, y) not in members for x in comp for y in comp):
                    seen.add(members)
                    out.append(PrimeIdeal(A, _minimal_generators(A, members), _members=members))
        out.sort(key=lambda p: (len(p._members), sorted(p._members)))
    A._primes_cache = tuple(out)
    return out


def minimal_primes(A: Monoid) -> list[PrimeIdeal]:
    ps = enumerate_primes(A)
    return [p for p in ps if not any(q is not p and q <= p and not p <= q for q in ps)]


def nilradical(A: Monoid) -> Ideal:
    """Intersection of all primes, with a finite generating set."""
    mins = minimal_primes(A)
    if not mins:
        return Ideal(A, (A.one,))
    if isinstance(A, AffineMonoid):
        Js = [set(p.J) for p in mins]
        universe = sorted(set().union(*Js))
        hitting = []
        for k in range(len(universe) + 1):
            for H in itertools.combinations(universe, k):
                Hs = set(H)
                if all(Hs & J for J in Js) and not any(h <= Hs for h in hitting):
                    hitting.append(Hs)
        gens = []
        for H in hitting:
            e = [0] * A.dim
            for h in H:
                e[h] = 1
            c = A.canonical(tuple(e))
            if c is not ZERO:
                gens.append(c)
        return Ideal(A, tuple(gens))
    members = frozenset.intersection(*[p._members for p in mins])
    return Ideal(A, _minimal_generators(A, members))


# --------------------------------------------------------------------------
# units and idempotents


@dataclass(frozen=True)
class UnitGroup:
    monoid: Monoid
    group: abgroup.FpAbelianGroup
    members: tuple | None  # explicit list when finite

    def contains(self, x) -> bool:
        x = raw(x)
        A = self.monoid
        if isinstance(A, AffineMonoid):
            return x is not ZERO and all(v == 0 for v in x[: A.a])
        return x in self.members


def is_unit(A: Monoid, x) -> bool:
    x = raw(x)
    if A.is_zero(x):
        return A.is_zero_monoid
    if isinstance(A, AffineMonoid):
        return all(v == 0 for v in x[: A.a])
    return any(A.mul(x, y) == A.one for y in A.elements())


def units(A: Monoid) -> UnitGroup:
    if isinstance(A, AffineMonoid):
        if A.is_zero_monoid:
            return UnitGroup(A, abgroup.present([], []), (ZERO,))
        names = list(A.coord_names[A.a :])
        rels = []
        for i, d in enumerate(A.torsion):
            r = [0] * len(names)
            r[A.b + i] = d
            rels.append(r)
        grp = abgroup.present(names, rels)
        members = None
        if A.b == 0:
            members = tuple(
                (0,) * A.a + t for t in itertools.product(*[range(d) for d in A.torsion])
            )
        return UnitGroup(A, grp, members)
    elems = [x for x in A.elements() if is_unit(A, x)]
    index = {x: i for i, x in enumerate(elems)}
    rels = []
    for x in elems:
        for y in elems:
            r = [0] * len(elems)
            r[index[x]] += 1
            r[index[y]] += 1
            r[index[A.mul(x, y)]] -= 1
            if any(r):
                rels.append(r)
    r = [0] * len(elems)
    r[index[A.one]] = 1
    rels.append(r)
    grp = abgroup.present([A.format(x) for x in elems], rels)
    return UnitGroup(A, grp, tuple(elems))


def idempotents(A: Monoid) -> list:
    if isinstance(A, AffineMonoid):
        # e^2 = e forces a zero exponent vector, so only 0 and 1 qualify
        return [ZERO] if A.is_zero_monoid else [ZERO, A.one]
    return [x for x in A.elements() if A.mul(x, x) == x]


def product(m1: MonoidElement, m2: MonoidElement) -> MonoidElement:
    return m1 * m2


# --------------------------------------------------------------------------
# localization


@dataclass(frozen=True, eq=False)
class Localization:
    """``S^{-1} A`` together with the canonical map from ``A``.

    ``fractions[k] = (a, s)`` records generator ``k`` of the localized
    monoid as the fraction ``a/s`` of elements of ``A``.
    """

    source: Monoid
    monoid: Monoid
    S: tuple
    to_local: Callable[[Hashable], Hashable]
    fractions: tuple
    order: tuple | None = None  # affine only: local coordinate k is source coordinate order[k]

    def from_local(self, x) -> Hashable:
        """Source-coordinate vector of a local element (affine only)."""
        if x is ZERO:
            return ZERO
        v = [0] * len(self.order)
        for pos, i in enumerate(self.order):
            v[i] = x[pos]
        return tuple(v)

    def __call__(self, x) -> Hashable:
        return self.to_local(raw(x))


def localize(A: Monoid, S: Iterable) -> Localization:
    S = tuple(A.canonical(raw(s)) for s in S)
    if isinstance(A, AffineMonoid):
        return _localize_affine(A, S)
    return _localize_table(A, S)


def _localize_affine(A: AffineMonoid, S: tuple) -> Localization:
    if A.zero_in_saturation(S):
        Z = zero_monoid()
        return Localization(A, Z, S, lambda x: ZERO, (), None)
    support = sorted({i for s in S for i in range(A.a) if s[i] > 0})
    keep = [i for i in range(A.a) if i not in support]
    order = keep + list(range(A.a, A.a + A.b)) + support + list(range(A.a + A.b, A.dim))
    names = [A.coord_names[i] for i in order]
    ideal_new = [tuple(g[i] for i in order) for g in A.ideal]
    B = AffineMonoid(len(keep), A.b + len(support), A.torsion, ideal_new, names)

    def to_local(x):
        if x is ZERO:
            return ZERO
        return B.canonical(tuple(x[i] for i in order))

    f = A.prod(S)
    fractions = []
    for g in B.generators:
        # pull back along the coordinate permutation
        v = [0] * A.dim
        for pos, i in enumerate(order):
            v[i] = g[pos]
        if all(x >= 0 for x in v[: A.a]):
            fractions.append((A.canonical(tuple(v)), A.one))
        else:
            num = tuple(fv + gv for fv, gv in zip(f, v))
            fractions.append((A.canonical(num), f))
    return Localization(A, B, S, to_local, tuple(fractions), tuple(order))


def _localize_table(A: TableMonoid, S: tuple) -> Localization:
    sat = A.saturation(S)
    if A.zero in sat:
        Z = TableMonoid([[0]], 0, 0, [], [], ["0"])
        return Localization(A, Z, S, lambda x: 0, ())
    elems = A.elements()
    pairs = [(a, s) for s in sat for a in elems]
    # (a,s) ~ (a',s') iff t*s'*a == t*s*a' for some t in sat
    classes: dict = {}
    reps: list = []
    cls_of: dict = {}
    for a, s in pairs:
        found = None
        for ci, (ra, rs) in enumerate(reps):
            if any(A.mul(t, A.mul(rs, a)) == A.mul(t, A.mul(s, ra)) for t in sat):
                found = ci
                break
        if found is None:
            found = len(reps)
            reps.append((a, s))
        cls_of[(a, s)] = found
        classes.setdefault(found, []).append((a, s))
    n = len(reps)
    # products of saturation elements stay in the saturation
    table = [[cls_of[(A.mul(a1, a2), A.mul(s1, s2))] for (a2, s2) in reps] for (a1, s1) in reps]
    gens, names, fractions = [], [], []
    for g, nm in zip(A.generators, A.generator_names):
        c = cls_of[(g, A.one)]
        if c not in gens:
            gens.append(c)
            names.append(nm)
            fractions.append((g, A.one))
    for s in S:
        c = cls_of[(A.one, s)]
        if c not in gens and c != cls_of[(A.one, A.one)]:
            gens.append(c)
            names.append(f"1/{A.format(s)}")
            fractions.append((A.one, s))
    labels = []
    for a, s in reps:
        labels.append(A.format(a) if s == A.one else f"{A.format(a)}/{A.format(s)}")
    B = TableMonoid(table, cls_of[(A.zero, A.one)], cls_of[(A.one, A.one)], gens, names, labels)
    return Localization(A, B, S, lambda x: cls_of[(x, A.one)], tuple(fractions))


def principal_locus(A: Monoid, f) -> list[PrimeIdeal]:
    """``D_f``: the primes not containing ``f``."""
    f = raw(f)
    return [p for p in enumerate_primes(A) if not p.contains(f)]


def locus(A: Monoid, S: Iterable) -> list[PrimeIdeal]:
    """``U_S``: the primes disjoint from the multiplicative set generated by ``S``."""
    S = [raw(s) for s in S]
    return [p for p in enumerate_primes(A) if not any(p.contains(s) for s in S)]


def u_s_as_d_f(A: Monoid, S: Iterable) -> MonoidElement:
    """An element ``f`` with ``D_f = U_S``."""
    S = [A.canonical(raw(s)) for s in S]
    U = locus(A, S)
    if A.zero_in_saturation(S) or not U:
        log.info("empty locus")
        return MonoidElement(A, A.zero)
    # the largest prime disjoint from S is the union of all of them
    f = A.prod(g for g in A.generators if not any(p.contains(g) for p in U))
    result = [p.key for p in principal_locus(A, f)]
    if result != [p.key for p in U]:
        raise AssertionError("D_f does not match U_S")
    return MonoidElement(A, f)


# --------------------------------------------------------------------------
# products and smash coproducts


def _as_table(A: Monoid) -> tuple[TableMonoid, list]:
    if isinstance(A, TableMonoid):
        return A, A.elements()
    if A.is_finite:
        return A.to_table()
    raise UnsupportedError("infinite affine monoid cannot be materialized")


def product_monoid(A: Monoid, B: Monoid) -> TableMonoid:
    """Cartesian product; elements are indexed as ``i * |B| + j``."""
    TA, _ = _as_table(A)
    TB, _ = _as_table(B)
    nb = TB.n
    n = TA.n * nb
    table = [[0] * n for _ in range(n)]
    for x in range(n):
        a1, b1 = divmod(x, nb)
        for y in range(n):
            a2, b2 = divmod(y, nb)
            table[x][y] = TA.mul(a1, a2) * nb + TB.mul(b1, b2)
    gens, names = [], []
    for g, nm in zip(TA.generators + (TA.zero,), TA.generator_names + ("0",)):
        gens.append(g * nb + TB.one)
        names.append(f"({nm},1)")
    for g, nm in zip(TB.generators + (TB.zero,), TB.generator_names + ("0",)):
        gens.append(TA.one * nb + g)
        names.append(f"(1,{nm})")
    labels = [f"({TA.format(a)},{TB.format(b)})" for a in range(TA.n) for b in range(nb)]
    uniq_g, uniq_n = [], []
    for g, nm in zip(gens, names):
        if g not in uniq_g:
            uniq_g.append(g)
            uniq_n.append(nm)
    return TableMonoid(table, TA.zero * nb + TB.zero, TA.one * nb + TB.one, uniq_g, uniq_n, labels)


@dataclass(frozen=True, eq=False)
class SmashCoproduct:
    monoid: Monoid
    left: Callable[[Hashable], Hashable]
    right: Callable[[Hashable], Hashable]


def smash_coproduct(A: Monoid, B: Monoid) -> SmashCoproduct:
    """``A ^ B`` with the inclusions ``a -> a^1`` and ``b -> 1^b``."""
    if isinstance(A, AffineMonoid) and isinstance(B, AffineMonoid):
        return _smash_affine(A, B)
    if isinstance(A, AffineMonoid) != isinstance(B, AffineMonoid):
        if not (A.is_finite and B.is_finite):
            raise MonoidError("smash coproduct needs monoids of the same backend")
    TA, ea = _as_table(A)
    TB, eb = _as_table(B)
    pairs = [(TA.zero, TB.zero)] + [(a, b) for a in range(TA.n) for b in range(TB.n) if a != TA.zero and b != TB.zero]
    index = {p: i for i, p in enumerate(pairs)}

    def idx(a, b):
        if a == TA.zero or b == TB.zero:
            return 0
        return index[(a, b)]

    table = [[idx(TA.mul(a1, a2), TB.mul(b1, b2)) for (a2, b2) in pairs] for (a1, b1) in pairs]
    gens, names = [], []
    for g, nm in zip(TA.generators, TA.generator_names):
        c = idx(g, TB.one)
        if c not in gens:
            gens.append(c)
            names.append(nm)
    for g, nm in zip(TB.generators, TB.generator_names):
        c = idx(TA.one, g)
        if c not in gens:
            gens.append(c)
            names.append(nm)
    labels = ["0"] + [f"{TA.format(a)}^{TB.format(b)}" for a, b in pairs[1:]]
    M = TableMonoid(table, 0, idx(TA.one, TB.one), gens, names, labels)
    ia = {e: i for i, e in enumerate(ea)}
    ib = {e: i for i, e in enumerate(eb)}
    return SmashCoproduct(M, lambda a: idx(ia[a], TB.one), lambda b: idx(TA.one, ib[b]))


def _smash_affine(A: AffineMonoid, B: AffineMonoid) -> SmashCoproduct:
    def split(x, M):
        return x[: M.a], x[M.a : M.a + M.b], x[M.a + M.b :]

    def join(x, y, xm, ym):
        xf, xl, xt = split(x, xm)
        yf, yl, yt = split(y, ym)
        return xf + yf + xl + yl + xt + yt

    names = join(A.coord_names, B.coord_names, A, B)
    ideal = [join(g, (0,) * B.dim, A, B) for g in A.ideal] + [join((0,) * A.dim, g, A, B) for g in B.ideal]
    M = AffineMonoid(A.a + B.a, A.b + B.b, A.torsion + B.torsion, ideal, names)
    return SmashCoproduct(
        M,
        lambda x: ZERO if x is ZERO else M.canonical(join(x, (0,) * B.dim, A, B)),
        lambda y: ZERO if y is ZERO else M.canonical(join((0,) * A.dim, y, A, B)),
    )


# --------------------------------------------------------------------------
# base extension


def emit_zring_presentation(A: Monoid) -> RingPresentation:
    """``Z[A] / (0_A)`` as a commutative ring presentation."""
    k = len(A.generators)
    names = tuple(A.generator_names)

    def unit(i, c=1):
        v = [0] * k
        v[i] = c
        return tuple(v)

    if A.is_zero_monoid:
        return RingPresentation(names, (), ((0,) * k,))
    relations, zeros = [], []
    if isinstance(A, AffineMonoid):
        pos = 0
        for i in range(A.dim):
            if A.a <= i < A.a + A.b:
                v = [0] * k
                v[pos] = v[pos + 1] = 1
                relations.append((tuple(v), (0,) * k))
                pos += 2
            else:
                if i >= A.a + A.b:
                    d = A.torsion[i - A.a - A.b]
                    relations.append((unit(pos, d), (0,) * k))
                pos += 1
        for g in A.ideal:
            zeros.append(A.word(g))
        return RingPresentation(names, tuple(relations), tuple(zeros))
    words = A._words
    for x in sorted(words, key=lambda y: (sum(words[y]), words[y])):
        w = words[x]
        for i, g in enumerate(A.generators):
            y = A.mul(x, g)
            lhs = tuple(c + (j == i) for j, c in enumerate(w))
            if A.is_zero(y):
                if not any(all(l >= z for l, z in zip(lhs, zz)) for zz in zeros):
                    zeros.append(lhs)
            elif words[y] != lhs:
                relations.append((lhs, words[y]))
    return RingPresentation(names, tuple(relations), tuple(zeros))


def word_relations(A: Monoid) -> RingPresentation:
    """The presentation used to validate generator actions."""
    return emit_zring_presentation(A)
