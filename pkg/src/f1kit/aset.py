"""Finite pointed sets with a monoid action.

An ``ASet`` has carrier ``0..n-1`` with ``0`` as the base point and one
action map per declared generator of its monoid.  Arbitrary monoid
elements act through their generator words.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Sequence

from scipy.cluster.hierarchy import DisjointSet

from . import abgroup
from .monoid import AffineMonoid, Localization, Monoid, ZERO, emit_zring_presentation, idempotents, localize, raw


class ASetError(ValueError):
    """Invalid A-set or morphism data."""


class EquivarianceError(ASetError):
    def __init__(self, generator: str, element: int):
        super().__init__(f"map is not equivariant: generator {generator} at element {element}")
        self.generator = generator
        self.element = element


class NotProjectiveError(ASetError):
    def __init__(self, component: Sequence[int]):
        super().__init__(f"summand on elements {list(component)} is not of the form eA")
        self.component = tuple(component)


def _relations(A: Monoid):
    pres = getattr(A, "_aset_relations", None)
    if pres is None:
        pres = emit_zring_presentation(A)
        A._aset_relations = pres
    return pres


class ASet:
    """A finite pointed A-set."""

    def __init__(
        self,
        monoid: Monoid,
        actions: Sequence[Sequence[int]],
        labels: Sequence[str] | None = None,
        check: bool = True,
    ):
        self.monoid = monoid
        self.actions = tuple(tuple(int(v) for v in a) for a in actions)
        if len(self.actions) != len(monoid.generators):
            raise ASetError(f"expected {len(monoid.generators)} action maps, got {len(self.actions)}")
        if self.actions:
            self.size = len(self.actions[0])
        else:
            self.size = len(labels) if labels is not None else 1
        self.labels = tuple(labels) if labels is not None else None
        if check:
            self._validate()

    @classmethod
    def trivial_action(cls, monoid: Monoid, size: int, labels=None) -> "ASet":
        """Carrier of ``size`` elements, valid only when there are no generators."""
        if monoid.generators:
            raise ASetError("this monoid has generators; give their actions")
        obj = cls(monoid, [], labels if labels is not None else [str(i) for i in range(size)])
        obj.size = size
        return obj

    def _validate(self) -> None:
        n = self.size
        if n < 1:
            raise ASetError("carrier must contain the base point")
        for name, a in zip(self.monoid.generator_names, self.actions):
            if len(a) != n:
                raise ASetError(f"action of {name} has length {len(a)}, expected {n}")
            if a[0] != 0:
                raise ASetError(f"generator {name} moves the base point")
            if any(not 0 <= v < n for v in a):
                raise ASetError(f"action of {name} leaves the carrier")
        acts = self.actions
        for i, j in itertools.combinations(range(len(acts)), 2):
            for m in range(n):
                if acts[i][acts[j][m]] != acts[j][acts[i][m]]:
                    raise ASetError(
                        f"generators {self.monoid.generator_names[i]} and {self.monoid.generator_names[j]} "
                        f"do not commute at {m}"
                    )
        pres = _relations(self.monoid)
        for lhs, rhs in pres.relations:
            l, r = self.word_map(lhs), self.word_map(rhs)
            if l != r:
                raise ASetError(f"action violates relation {lhs} = {rhs}")
        for z in pres.zeros:
            if any(self.word_map(z)):
                raise ASetError(f"monomial {z} is zero in the monoid but acts nontrivially")

    # action -----------------------------------------------------------------
    def word_map(self, exps: Sequence[int]) -> tuple[int, ...]:
        cur = list(range(self.size))
        for a, k in zip(self.actions, exps):
            for _ in range(k):
                cur = [a[x] for x in cur]
        return tuple(cur)

    def element_map(self, x) -> tuple[int, ...]:
        x = raw(x)
        w = self.monoid.word(x)
        if w is None:
            return (0,) * self.size
        return self.word_map(w)

    def act(self, x, m: int) -> int:
        return self.element_map(x)[m]

    def gen_act(self, i: int, m: int) -> int:
        return self.actions[i][m]

    def label(self, m: int) -> str:
        return self.labels[m] if self.labels else ("*" if m == 0 else str(m))

    # structure --------------------------------------------------------------
    @cached_property
    def orbit_closure(self) -> tuple[frozenset, ...]:
        """``A.m`` for each element ``m`` (always contains the base point)."""
        out = []
        for m in range(self.size):
            seen = {0, m}
            stack = [m]
            while stack:
                x = stack.pop()
                for a in self.actions:
                    y = a[x]
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            out.append(frozenset(seen))
        return tuple(out)

    def is_closed(self, subset: Iterable[int]) -> bool:
        s = set(subset)
        return 0 in s and all(a[x] in s for a in self.actions for x in s)

    def generators(self) -> list[int]:
        """A minimal generating set: one element per top strongly connected class."""
        out = []
        covered: set = set()
        # visit elements with the largest orbits first
        order = sorted(range(1, self.size), key=lambda m: (-len(self.orbit_closure[m]), m))
        for m in order:
            if m in covered:
                continue
            out.append(m)
            covered |= self.orbit_closure[m]
        return sorted(out)

    def is_finitely_generated(self) -> bool:
        return True

    def encoding(self) -> tuple:
        return (self.size, self.actions)

    def to_dict(self, monoid_ref: str | None = None) -> dict:
        doc = {
            "size": self.size,
            "actions": {nm: list(a) for nm, a in zip(self.monoid.generator_names, self.actions)},
        }
        if monoid_ref is not None:
            doc = {"monoid": monoid_ref, **doc}
        return doc

    def __repr__(self) -> str:
        return f"ASet(size={self.size}, monoid={self.monoid!r})"


def from_dict(A: Monoid, doc: dict) -> ASet:
    size = int(doc["size"])
    acts = doc.get("actions", {})
    unknown = set(acts) - set(A.generator_names)
    if unknown:
        raise ASetError(f"unknown generators {sorted(unknown)}")
    maps = []
    for nm in A.generator_names:
        if nm in acts:
            maps.append([int(v) for v in acts[nm]])
        elif nm.endswith("^-1") and nm[:-3] in acts:
            maps.append(_invert_map(acts[nm[:-3]], nm))
        else:
            # inverses of a missing action are filled in below if possible
            maps.append(None)
    for k, nm in enumerate(A.generator_names):
        if maps[k] is None:
            partner = nm + "^-1"
            if partner in acts:
                maps[k] = _invert_map(acts[partner], nm)
            else:
                raise ASetError(f"no action given for generator {nm}")
    if size < 1:
        raise ASetError("carrier must contain the base point")
    if not maps:
        return ASet.trivial_action(A, size)
    return ASet(A, maps)


def _invert_map(m: Sequence[int], name: str) -> list[int]:
    inv = [None] * len(m)
    for i, v in enumerate(m):
        if inv[v] is not None:
            raise ASetError(f"cannot invert a non-bijective action to obtain {name}")
        inv[v] = i
    return inv


# --------------------------------------------------------------------------
# basic constructions


def base_point(A: Monoid) -> ASet:
    return ASet(A, [[0] for _ in A.generators], ["*"]) if A.generators else ASet.trivial_action(A, 1, ["*"])


def regular(A: Monoid, e=None) -> ASet:
    """The A-set ``eA`` (``A`` itself when ``e`` is None); needs a finite monoid."""
    if not A.is_finite:
        raise ASetError("the regular A-set of an infinite monoid has no finite carrier")
    e = A.one if e is None else raw(e)
    elems = [A.zero] + [x for x in A.elements() if not A.is_zero(x) and A.mul(e, x) == x]
    index = {x: i for i, x in enumerate(elems)}
    acts = [[index[A.mul(g, x)] for x in elems] for g in A.generators]
    labels = [A.format(x) if i else "*" for i, x in enumerate(elems)]
    if not acts:
        return ASet.trivial_action(A, len(elems), labels)
    return ASet(A, acts, labels)


def cyclic(A: AffineMonoid, ideal_gens: Iterable[Sequence[int]]) -> ASet:
    """``A / I`` for an affine monoid and a monomial ideal making it finite."""
    Q = AffineMonoid(A.a, A.b, A.torsion, list(A.ideal) + [tuple(g) for g in ideal_gens], A.coord_names)
    if not Q.is_finite:
        raise ASetError("quotient is infinite")
    elems = Q.elements()
    index = {x: i for i, x in enumerate(elems)}
    acts = [[index[Q.mul(Q.canonical(g), x)] if x is not ZERO else 0 for x in elems] for g in A.generators]
    labels = ["*"] + [Q.format(x) for x in elems[1:]]
    if not acts:
        return ASet.trivial_action(A, len(elems), labels)
    return ASet(A, acts, labels)


def pointed_set(A: Monoid, n: int) -> ASet:
    """``n`` non-base points on which every generator acts as the identity."""
    acts = [list(range(n + 1)) for _ in A.generators]
    if not acts:
        return ASet.trivial_action(A, n + 1)
    return ASet(A, acts)


def _rebuild(A: Monoid, acts: list[list[int]], size: int, labels=None) -> ASet:
    if not A.generators:
        return ASet.trivial_action(A, size, labels)
    return ASet(A, acts, labels, check=False)


# --------------------------------------------------------------------------
# morphisms


@dataclass(frozen=True, eq=False)
class ASetMorphism:
    source: ASet
    target: ASet
    map: tuple[int, ...]

    @property
    def injective(self) -> bool:
        return len(set(self.map)) == len(self.map)

    @property
    def surjective(self) -> bool:
        return len(set(self.map)) == self.target.size

    @property
    def bijective(self) -> bool:
        return self.injective and self.surjective

    is_mono = injective
    is_epi = surjective
    is_iso = bijective

    def __call__(self, m: int) -> int:
        return self.map[m]

    def then(self, g: "ASetMorphism") -> "ASetMorphism":
        return ASetMorphism(self.source, g.target, tuple(g.map[x] for x in self.map))

    def to_dict(self) -> dict:
        return {"map": list(self.map)}


def check_morphism(M: ASet, N: ASet, mapping: Sequence[int]) -> ASetMorphism:
    if M.monoid is not N.monoid:
        raise ASetError("source and target are over different monoids")
    f = tuple(int(v) for v in mapping)
    if len(f) != M.size:
        raise ASetError(f"map has length {len(f)}, expected {M.size}")
    if any(not 0 <= v < N.size for v in f):
        raise ASetError("map leaves the target carrier")
    if f[0] != 0:
        raise ASetError("map does not preserve the base point")
    for name, am, an in zip(M.monoid.generator_names, M.actions, N.actions):
        for m in range(M.size):
            if f[am[m]] != an[f[m]]:
                raise EquivarianceError(name, m)
    return ASetMorphism(M, N, f)


def identity(M: ASet) -> ASetMorphism:
    return ASetMorphism(M, M, tuple(range(M.size)))


def zero_morphism(M: ASet, N: ASet) -> ASetMorphism:
    return ASetMorphism(M, N, (0,) * M.size)


@dataclass(frozen=True)
class SubASet:
    aset: ASet
    inclusion: ASetMorphism
    elements: tuple[int, ...]


def sub_aset(M: ASet, subset: Iterable[int]) -> SubASet:
    elems = sorted(set(subset) | {0})
    if not M.is_closed(elems):
        raise ASetError("subset is not closed under the action")
    index = {x: i for i, x in enumerate(elems)}
    acts = [[index[a[x]] for x in elems] for a in M.actions]
    labels = [M.label(x) for x in elems]
    S = _rebuild(M.monoid, acts, len(elems), labels)
    return SubASet(S, ASetMorphism(S, M, tuple(elems)), tuple(elems))


def kernel(f: ASetMorphism) -> SubASet:
    return sub_aset(f.source, [m for m in range(f.source.size) if f.map[m] == 0])


def image(f: ASetMorphism) -> SubASet:
    return sub_aset(f.target, set(f.map))


@dataclass(frozen=True)
class Quotient:
    aset: ASet
    projection: ASetMorphism


def quotient(M: ASet, pairs: Iterable[tuple[int, int]]) -> Quotient:
    """Quotient by the smallest congruence containing ``pairs``."""
    ds = DisjointSet(range(M.size))
    stack = list(pairs)
    while stack:
        x, y = stack.pop()
        if ds.connected(x, y):
            continue
        ds.merge(x, y)
        for a in M.actions:
            stack.append((a[x], a[y]))
    classes = sorted((sorted(c) for c in ds.subsets()), key=lambda c: c[0])
    cls_index = {}
    for i, c in enumerate(classes):
        for x in c:
            cls_index[x] = i
    acts = [[cls_index[a[c[0]]] for c in classes] for a in M.actions]
    labels = ["*" if c[0] == 0 else "/".join(M.label(x) for x in c) for c in classes]
    Q = _rebuild(M.monoid, acts, len(classes), labels)
    return Quotient(Q, ASetMorphism(M, Q, tuple(cls_index[x] for x in range(M.size))))


def collapse(M: ASet, sub: Iterable[int]) -> Quotient:
    """``M / K`` for a sub-A-set ``K``: every element of ``K`` goes to the base point."""
    sub = sorted(set(sub) | {0})
    if not M.is_closed(sub):
        raise ASetError("subset is not closed under the action")
    return quotient(M, [(0, x) for x in sub])


def cokernel(f: ASetMorphism) -> Quotient:
    return collapse(f.target, set(f.map))


def coequalizer(f: ASetMorphism, g: ASetMorphism) -> Quotient:
    if f.source is not g.source or f.target is not g.target:
        raise ASetError("coequalizer needs parallel morphisms")
    return quotient(f.target, [(f.map[m], g.map[m]) for m in range(f.source.size)])


def equalizer(f: ASetMorphism, g: ASetMorphism) -> SubASet:
    return sub_aset(f.source, [m for m in range(f.source.size) if f.map[m] == g.map[m]])


# --------------------------------------------------------------------------
# normality and base extension


@dataclass(frozen=True)
class NormalityResult:
    normal: bool
    witness: tuple[int, int] | None = None

    def __bool__(self) -> bool:
        return self.normal


def is_normal(f: ASetMorphism) -> NormalityResult:
    seen: dict = {}
    for m, v in enumerate(f.map):
        if v == 0:
            continue
        if v in seen:
            return NormalityResult(False, (seen[v], m))
        seen[v] = m
    return NormalityResult(True)


def is_admissible_mono(f: ASetMorphism) -> bool:
    return f.injective


def is_admissible_epi(f: ASetMorphism) -> bool:
    return f.surjective and bool(is_normal(f))


@dataclass(frozen=True)
class IntMatrixMap:
    """``f_Z`` in the bases ``M - {*}`` (columns) and ``N - {*}`` (rows)."""

    matrix: tuple[tuple[int, ...], ...]
    rows: int
    cols: int

    def kernel_rank(self) -> int:
        if self.cols == 0:
            return 0
        if self.rows == 0:
            return self.cols
        transposed = [list(r) for r in zip(*self.matrix)]
        return self.cols - abgroup.matrix_rank(transposed)


def base_extend(f: ASetMorphism) -> IntMatrixMap:
    rows, cols = f.target.size - 1, f.source.size - 1
    mat = [[0] * cols for _ in range(rows)]
    for m in range(1, f.source.size):
        v = f.map[m]
        if v:
            mat[v - 1][m - 1] = 1
    return IntMatrixMap(tuple(tuple(r) for r in mat), rows, cols)


def z_kernel_rank_check(f: ASetMorphism) -> bool:
    """Whether ``ker(f_Z)`` has the rank of ``(ker f)_Z``."""
    kernel_size = sum(1 for v in f.map if v == 0)
    return base_extend(f).kernel_rank() == kernel_size - 1


# --------------------------------------------------------------------------
# wedges, products, smash and tensor


@dataclass(frozen=True)
class Wedge:
    aset: ASet
    injections: tuple[ASetMorphism, ...]
    projections: tuple[ASetMorphism, ...]


def wedge(*parts: ASet) -> Wedge:
    if not parts:
        raise ASetError("wedge of nothing")
    A = parts[0].monoid
    if any(p.monoid is not A for p in parts):
        raise ASetError("wedge needs A-sets over one monoid")
    offsets = []
    size = 1
    for p in parts:
        offsets.append(size - 1)
        size += p.size - 1
    acts = [[0] * size for _ in A.generators]
    labels = ["*"]
    for k, p in enumerate(parts):
        off = offsets[k]
        for m in range(1, p.size):
            labels.append(p.label(m) if len(parts) == 1 else f"{p.label(m)}.{k}")
            for gi, a in enumerate(p.actions):
                v = a[m]
                acts[gi][off + m] = off + v if v else 0
    W = _rebuild(A, acts, size, labels)
    injections, projections = [], []
    for k, p in enumerate(parts):
        off = offsets[k]
        injections.append(ASetMorphism(p, W, tuple(off + m if m else 0 for m in range(p.size))))
        proj = [0] * size
        for m in range(1, p.size):
            proj[off + m] = m
        projections.append(ASetMorphism(W, p, tuple(proj)))
    return Wedge(W, tuple(injections), tuple(projections))


@dataclass(frozen=True)
class Product:
    aset: ASet
    pairs: tuple[tuple[int, int], ...]
    projections: tuple[ASetMorphism, ASetMorphism]


def product(M: ASet, N: ASet) -> Product:
    A = M.monoid
    if N.monoid is not A:
        raise ASetError("product needs A-sets over one monoid")
    pairs = [(m, n) for m in range(M.size) for n in range(N.size)]
    index = {p: i for i, p in enumerate(pairs)}
    acts = [[index[(am[m], an[n])] for m, n in pairs] for am, an in zip(M.actions, N.actions)]
    labels = [f"({M.label(m)},{N.label(n)})" for m, n in pairs]
    P = _rebuild(A, acts, len(pairs), labels)
    p1 = ASetMorphism(P, M, tuple(m for m, _ in pairs))
    p2 = ASetMorphism(P, N, tuple(n for _, n in pairs))
    return Product(P, tuple(pairs), (p1, p2))


def smash(M: ASet, N: ASet) -> Product:
    A = M.monoid
    if N.monoid is not A:
        raise ASetError("smash needs A-sets over one monoid")
    pairs = [(0, 0)] + [(m, n) for m in range(1, M.size) for n in range(1, N.size)]
    index = {p: i for i, p in enumerate(pairs)}

    def idx(m, n):
        return 0 if m == 0 or n == 0 else index[(m, n)]

    acts = [[idx(am[m], an[n]) for m, n in pairs] for am, an in zip(M.actions, N.actions)]
    labels = ["*"] + [f"{M.label(m)}^{N.label(n)}" for m, n in pairs[1:]]
    P = _rebuild(A, acts, len(pairs), labels)
    p1 = ASetMorphism(P, M, tuple(m for m, _ in pairs))
    p2 = ASetMorphism(P, N, tuple(n for _, n in pairs))
    return Product(P, tuple(pairs), (p1, p2))


@dataclass(frozen=True)
class Tensor:
    aset: ASet
    classes: tuple[tuple[tuple[int, int], ...], ...]
    bilinear: dict = field(repr=False)

    def __call__(self, m: int, n: int) -> int:
        return self.bilinear[(m, n)]


def tensor(M: ASet, N: ASet) -> Tensor:
    """``M (x)_A N`` by union-find on ``M x N``."""
    A = M.monoid
    if N.monoid is not A:
        raise ASetError("tensor needs A-sets over one monoid")
    pairs = [(m, n) for m in range(M.size) for n in range(N.size)]
    ds = DisjointSet(pairs)
    for m in range(M.size):
        ds.merge((m, 0), (0, 0))
    for n in range(N.size):
        ds.merge((0, n), (0, 0))
    for am, an in zip(M.actions, N.actions):
        for m, n in pairs:
            ds.merge((am[m], n), (m, an[n]))
    classes = sorted((tuple(sorted(c)) for c in ds.subsets()), key=lambda c: c[0])
    cls = {}
    for i, c in enumerate(classes):
        for p in c:
            cls[p] = i
    acts = []
    for am in M.actions:
        row = []
        for c in classes:
            targets = {cls[(am[m], n)] for m, n in c}
            if len(targets) != 1:
                raise AssertionError("tensor action is not well defined")
            row.append(targets.pop())
        acts.append(row)
    labels = ["*" if i == 0 else f"{M.label(c[0][0])}(x){N.label(c[0][1])}" for i, c in enumerate(classes)]
    T = ASet(A, acts, labels) if acts else ASet.trivial_action(A, len(classes), labels)
    return Tensor(T, tuple(classes), cls)


# --------------------------------------------------------------------------
# isomorphism search


def _refine_colours(M: ASet) -> list[int]:
    # iterated colour refinement on the functional graph of the generators;
    # colours are hashes of int tuples, so they are comparable across A-sets
    indeg = [[0] * M.size for _ in M.actions]
    for gi, a in enumerate(M.actions):
        for m in range(M.size):
            indeg[gi][a[m]] += 1
    colour = [hash((m == 0, len(M.orbit_closure[m]), tuple(d[m] for d in indeg))) for m in range(M.size)]
    classes = len(set(colour))
    while True:
        new = [hash((colour[m], tuple(colour[a[m]] for a in M.actions))) for m in range(M.size)]
        k = len(set(new))
        colour = new
        if k == classes:
            return colour
        classes = k


def _colour_signature(M: ASet) -> tuple[list, tuple]:
    col = _refine_colours(M)
    return col, tuple(sorted(col))


def find_isomorphism(M: ASet, N: ASet) -> ASetMorphism | None:
    if M.monoid is not N.monoid or M.size != N.size:
        return None
    if M.actions == N.actions:
        return ASetMorphism(M, N, tuple(range(M.size)))
    cm, sm = _colour_signature(M)
    cn, sn = _colour_signature(N)
    if sm != sn:
        return None
    by_colour: dict = {}
    for y in range(N.size):
        by_colour.setdefault(cn[y], []).append(y)
    fwd = [-1] * M.size
    bwd = [-1] * N.size

    def assign(x: int, y: int, trail: list) -> bool:
        stack = [(x, y)]
        while stack:
            x, y = stack.pop()
            if fwd[x] == y:
                continue
            if fwd[x] != -1 or bwd[y] != -1 or cm[x] != cn[y]:
                return False
            fwd[x] = y
            bwd[y] = x
            trail.append(x)
            for am, an in zip(M.actions, N.actions):
                stack.append((am[x], an[y]))
        return True

    def undo(trail: list) -> None:
        for x in trail:
            bwd[fwd[x]] = -1
            fwd[x] = -1

    trail0: list = []
    if not assign(0, 0, trail0):
        return None
    # choose elements with large orbits first; each assignment fixes their orbit
    order = sorted(range(1, M.size), key=lambda m: (-len(M.orbit_closure[m]), len(by_colour[cm[m]]), m))

    def search(k: int) -> bool:
        while k < len(order) and fwd[order[k]] != -1:
            k += 1
        if k == len(order):
            return True
        x = order[k]
        for y in by_colour[cm[x]]:
            if bwd[y] != -1:
                continue
            trail: list = []
            if assign(x, y, trail) and search(k + 1):
                return True
            undo(trail)
        return False

    if search(0):
        return ASetMorphism(M, N, tuple(fwd))
    return None


def is_isomorphic(M: ASet, N: ASet) -> bool:
    return find_isomorphism(M, N) is not None


def invariant_key(M: ASet) -> tuple:
    """A cheap iso-invariant used to bucket A-sets before iso search."""
    return (M.size, _colour_signature(M)[1])


def automorphisms(M: ASet, limit: int = 10**6) -> list[tuple[int, ...]]:
    """All automorphisms as permutation tuples."""
    col = _refine_colours(M)
    by_colour: dict = {}
    for y in range(M.size):
        by_colour.setdefault(col[y], []).append(y)
    fwd = [-1] * M.size
    bwd = [-1] * M.size
    out: list = []

    def assign(x, y, trail):
        stack = [(x, y)]
        while stack:
            x, y = stack.pop()
            if fwd[x] == y:
                continue
            if fwd[x] != -1 or bwd[y] != -1 or col[x] != col[y]:
                return False
            fwd[x] = y
            bwd[y] = x
            trail.append(x)
            for a in M.actions:
                stack.append((a[x], a[y]))
        return True

    def undo(trail):
        for x in trail:
            bwd[fwd[x]] = -1
            fwd[x] = -1

    assign(0, 0, [])
    order = sorted(range(1, M.size), key=lambda m: (-len(M.orbit_closure[m]), m))

    def search(k):
        while k < len(order) and fwd[order[k]] != -1:
            k += 1
        if k == len(order):
            out.append(tuple(fwd))
            if len(out) > limit:
                raise OverflowError("automorphism group too large")
            return
        x = order[k]
        for y in by_colour[col[x]]:
            if bwd[y] != -1:
                continue
            trail: list = []
            if assign(x, y, trail):
                search(k + 1)
            undo(trail)

    search(0)
    return out


# --------------------------------------------------------------------------
# components and projectivity


def wedge_components(M: ASet) -> list[tuple[int, ...]]:
    """Non-base elements grouped into wedge-indecomposable summands."""
    ds = DisjointSet(range(1, M.size))
    for a in M.actions:
        for m in range(1, M.size):
            if a[m]:
                ds.merge(m, a[m])
    comps = [tuple(sorted(c)) for c in ds.subsets()] if M.size > 1 else []
    return sorted(comps, key=lambda c: c[0])


@dataclass(frozen=True)
class ProjectiveSummand:
    idempotent: Hashable
    generator: int
    elements: tuple[int, ...]


def _principal_match(M: ASet, comp: Sequence[int], e) -> int | None:
    """An element ``x`` of ``comp`` with ``eA -> comp u {*}``, ``a -> a.x`` bijective."""
    A = M.monoid
    eA = [a for a in A.elements() if not A.is_zero(a) and A.mul(e, a) == a]
    if len(eA) != len(comp):
        return None
    target = set(comp)
    maps = {a: M.element_map(a) for a in eA}
    for x in comp:
        if maps[e][x] != x:
            continue
        img = {maps[a][x] for a in eA}
        if img == target:
            return x
    return None


def decompose_projective(M: ASet) -> list[ProjectiveSummand]:
    """Write ``M`` as a wedge of A-sets ``eA``; raise NotProjectiveError otherwise."""
    A = M.monoid
    comps = wedge_components(M)
    if not comps:
        return []
    if not A.is_finite:
        raise NotProjectiveError(comps[0])
    ids = [e for e in idempotents(A) if not A.is_zero(e)]
    # larger eA first so that 1 is preferred for free summands
    ids.sort(key=lambda e: -sum(1 for a in A.elements() if A.mul(e, a) == a))
    out = []
    for comp in comps:
        for e in ids:
            x = _principal_match(M, comp, e)
            if x is not None:
                out.append(ProjectiveSummand(e, x, comp))
                break
        else:
            raise NotProjectiveError(comp)
    return out


def is_projective(M: ASet) -> bool:
    try:
        decompose_projective(M)
    except NotProjectiveError:
        return False
    return True


# --------------------------------------------------------------------------
# exact sequences


@dataclass(frozen=True)
class ExactSequence:
    i: ASetMorphism
    j: ASetMorphism
    is_exact: bool
    is_admissible: bool


def check_ses(i: ASetMorphism, j: ASetMorphism) -> ExactSequence:
    if i.target is not j.source:
        raise ASetError("morphisms are not composable")
    exact = (
        i.injective
        and j.surjective
        and set(i.map) == {m for m in range(j.source.size) if j.map[m] == 0}
    )
    admissible = exact and bool(is_normal(i)) and bool(is_normal(j))
    return ExactSequence(i, j, exact, admissible)


@dataclass(frozen=True)
class Splitting:
    section: ASetMorphism
    iso: ASetMorphism  # from M1 v M3 onto M2


def split_ses(seq: ExactSequence) -> Splitting | None:
    """Find a section making ``M2 = M1 v M3``; None if the sequence does not split."""
    if not seq.is_exact:
        raise ASetError("split_ses needs an exact sequence")
    i, j = seq.i, seq.j
    M1, M2, M3 = i.source, i.target, j.target
    fibres: list[list[int]] = [[] for _ in range(M3.size)]
    for m in range(1, M2.size):
        if j.map[m]:
            fibres[j.map[m]].append(m)
    image_i = set(i.map)
    for choice in itertools.product(*fibres[1:]):
        s = (0,) + choice
        if any(s[am[p]] != a2[s[p]] for am, a2 in zip(M3.actions, M2.actions) for p in range(M3.size)):
            continue
        if image_i & set(choice):
            continue
        W = wedge(M1, M3)
        iso = [0] * W.aset.size
        for m in range(1, M1.size):
            iso[W.injections[0].map[m]] = i.map[m]
        for p in range(1, M3.size):
            iso[W.injections[1].map[p]] = s[p]
        phi = ASetMorphism(W.aset, M2, tuple(iso))
        if phi.bijective:
            return Splitting(ASetMorphism(M3, M2, s), phi)
    return None


# --------------------------------------------------------------------------
# pullbacks and pushouts


@dataclass(frozen=True)
class Pullback:
    aset: ASet
    to_mono_source: ASetMorphism  # K -> P, admissible mono
    to_epi_source: ASetMorphism  # K -> M, admissible epi
    pairs: tuple[tuple[int, int], ...]


def pullback_admissible(i: ASetMorphism, j: ASetMorphism) -> Pullback:
    """Pull back an admissible mono ``i: M -> N`` along an admissible epi ``j: P -> N``."""
    if i.target is not j.target:
        raise ASetError("morphisms need a common target")
    if not is_admissible_mono(i) or not is_admissible_epi(j):
        raise ASetError("need an admissible mono and an admissible epi")
    M, P = i.source, j.source
    pairs = [(m, p) for m in range(M.size) for p in range(P.size) if i.map[m] == j.map[p]]
    pairs.sort(key=lambda mp: (mp != (0, 0), mp))
    index = {mp: k for k, mp in enumerate(pairs)}
    acts = [[index[(am[m], ap[p])] for m, p in pairs] for am, ap in zip(M.actions, P.actions)]
    labels = [f"({M.label(m)},{P.label(p)})" for m, p in pairs]
    K = _rebuild(M.monoid, acts, len(pairs), labels)
    to_p = ASetMorphism(K, P, tuple(p for _, p in pairs))
    to_m = ASetMorphism(K, M, tuple(m for m, _ in pairs))
    if not is_admissible_mono(to_p) or not is_admissible_epi(to_m):
        raise AssertionError("pullback legs are not admissible")
    return Pullback(K, to_p, to_m, tuple(pairs))


@dataclass(frozen=True)
class Pushout:
    aset: ASet
    from_target: ASetMorphism  # N -> Q
    from_other: ASetMorphism  # P -> Q, admissible mono


def pushout_along_mono(i: ASetMorphism, f: ASetMorphism) -> Pushout:
    """``N u_M P`` for an admissible mono ``i: M -> N`` and any ``f: M -> P``."""
    if i.source is not f.source:
        raise ASetError("morphisms need a common source")
    if not is_admissible_mono(i):
        raise ASetError("need an admissible mono")
    N, P = i.target, f.target
    W = wedge(N, P)
    inN, inP = W.injections
    q = quotient(W.aset, [(inN.map[i.map[m]], inP.map[f.map[m]]) for m in range(i.source.size)])
    to_q_n = inN.then(q.projection)
    to_q_p = inP.then(q.projection)
    to_q_n = ASetMorphism(N, q.aset, to_q_n.map)
    to_q_p = ASetMorphism(P, q.aset, to_q_p.map)
    if not is_admissible_mono(to_q_p):
        raise AssertionError("pushout leg is not an admissible mono")
    return Pushout(q.aset, to_q_n, to_q_p)


# --------------------------------------------------------------------------
# localization


@dataclass(frozen=True)
class LocalizedASet:
    """``S^{-1} M`` realized as the stable image of ``s = prod S`` in ``M``.

    ``elements`` lists the carrier of ``M`` that survives, ``canonical``
    sends each element of ``M`` to its class ``m/1``.
    """

    aset: ASet
    localization: Localization
    elements: tuple[int, ...]
    canonical: tuple[int, ...]


def _stable_image(M: ASet, s_map: tuple[int, ...]) -> tuple[list[int], int]:
    cur = set(range(M.size))
    steps = 0
    while True:
        nxt = {s_map[x] for x in cur}
        if nxt == cur:
            return sorted(cur), steps
        cur = nxt
        steps += 1


def localize_aset(M: ASet, S: Iterable, loc: Localization | None = None) -> LocalizedASet:
    A = M.monoid
    S = tuple(A.canonical(raw(s)) for s in S)
    if loc is None:
        loc = localize(A, S)
    B = loc.monoid
    s_total = A.prod(S)
    s_map = M.element_map(s_total)
    stable, steps = _stable_image(M, s_map)
    index = {x: k for k, x in enumerate(stable)}
    # s acts bijectively on the stable image
    inv = {s_map[x]: x for x in stable}

    def divide(x: int, s) -> int:
        # the unique y in the stable image with s.y == x
        sm = M.element_map(s)
        for y in stable:
            if sm[y] == x:
                return y
        raise AssertionError("S does not act bijectively on the stable image")

    acts = []
    for a, s in loc.fractions:
        am = M.element_map(a)
        row = []
        for x in stable:
            y = am[x]
            if s != A.one:
                y = divide(y, s)
            row.append(index[y])
        acts.append(row)
    labels = [M.label(x) for x in stable]
    L = ASet(B, acts, labels) if acts else ASet.trivial_action(B, len(stable), labels)

    canonical = []
    for m in range(M.size):
        x = m
        for _ in range(steps):
            x = s_map[x]
        for _ in range(steps):
            x = inv[x]
        canonical.append(index[x])
    return LocalizedASet(L, loc, tuple(stable), tuple(canonical))


def localize_morphism(f: ASetMorphism, LM: LocalizedASet, LN: LocalizedASet) -> ASetMorphism:
    """``S^{-1} f`` between localizations taken with the same ``Localization``."""
    index = {x: k for k, x in enumerate(LN.elements)}
    return check_morphism(LM.aset, LN.aset, [index[f.map[x]] for x in LM.elements])


# --------------------------------------------------------------------------
# enumeration helpers


def sub_asets(M: ASet) -> list[tuple[int, ...]]:
    """All sub-A-sets as sorted element tuples (including ``{*}`` and ``M``)."""
    out = []
    rest = list(range(1, M.size))
    for r in range(len(rest) + 1):
        for combo in itertools.combinations(rest, r):
            s = (0,) + combo
            if M.is_closed(s):
                out.append(s)
    return out
