"""Exact integer linear algebra and finitely presented abelian groups.

Everything here works over Python ints, so intermediate entries of the
Smith normal form never overflow.  Matrices are lists of row lists.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

Matrix = list[list[int]]


class InconsistentComplexError(ValueError):
    """Raised when a cochain complex does not square to zero."""


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> Matrix:
    if not a:
        return []
    inner = len(b)
    cols = len(b[0]) if b else 0
    return [[sum(row[k] * b[k][j] for k in range(inner)) for j in range(cols)] for row in a]


def vecmat(v: Sequence[int], m: Sequence[Sequence[int]], cols: int | None = None) -> list[int]:
    if cols is None:
        cols = len(m[0]) if m else 0
    out = [0] * cols
    for coeff, row in zip(v, m):
        if coeff:
            for j, x in enumerate(row):
                out[j] += coeff * x
    return out


def determinant(m: Sequence[Sequence[int]]) -> int:
    """Exact determinant by fraction-free Bareiss elimination."""
    n = len(m)
    if n == 0:
        return 1
    a = [list(row) for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


@dataclass(frozen=True)
class SmithForm:
    """``D = U * M * V`` with ``U``, ``V`` unimodular and ``D`` diagonal.

    ``U_inv`` and ``V_inv`` are carried along so that ``M == U_inv * D * V_inv``
    can be checked without a separate inversion.
    """

    U: Matrix
    D: Matrix
    V: Matrix
    U_inv: Matrix
    V_inv: Matrix

    @property
    def diagonal(self) -> list[int]:
        return [self.D[i][i] for i in range(min(len(self.D), len(self.D[0]) if self.D else 0))]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)


def smith_normal_form(m: Sequence[Sequence[int]], ncols: int | None = None) -> SmithForm:
    """Smith normal form with the minimal-absolute-value pivot rule.

    Ties between candidate pivots go to the lowest row, then the lowest
    column, which makes the transforms reproducible.  ``ncols`` is needed
    only when ``m`` has no rows.
    """
    rows = len(m)
    cols = len(m[0]) if rows else (ncols or 0)
    a = [list(map(int, r)) for r in m]
    U, Ui = identity(rows), identity(rows)
    V, Vi = identity(cols), identity(cols)

    def row_add(dst: int, src: int, q: int) -> None:
        # row_dst += q * row_src
        if q == 0:
            return
        a[dst] = [x + q * y for x, y in zip(a[dst], a[src])]
        U[dst] = [x + q * y for x, y in zip(U[dst], U[src])]
        for r in Ui:
            r[src] -= q * r[dst]

    def row_swap(i: int, j: int) -> None:
        if i == j:
            return
        a[i], a[j] = a[j], a[i]
        U[i], U[j] = U[j], U[i]
        for r in Ui:
            r[i], r[j] = r[j], r[i]

    def row_neg(i: int) -> None:
        a[i] = [-x for x in a[i]]
        U[i] = [-x for x in U[i]]
        for r in Ui:
            r[i] = -r[i]

    def col_add(dst: int, src: int, q: int) -> None:
        # col_dst += q * col_src
        if q == 0:
            return
        for r in a:
            r[dst] += q * r[src]
        for r in V:
            r[dst] += q * r[src]
        Vi[src] = [x - q * y for x, y in zip(Vi[src], Vi[dst])]

    def col_swap(i: int, j: int) -> None:
        if i == j:
            return
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]
        Vi[i], Vi[j] = Vi[j], Vi[i]

    def find_pivot(t: int) -> tuple[int, int] | None:
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                x = a[i][j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
        return None if best is None else (best[1], best[2])

    for t in range(min(rows, cols)):
        piv = find_pivot(t)
        if piv is None:
            break
        while True:
            i, j = piv
            row_swap(t, i)
            col_swap(t, j)
            p = a[t][t]
            done = True
            for i in range(t + 1, rows):
                if a[i][t]:
                    row_add(i, t, -(a[i][t] // p))
                    if a[i][t]:
                        done = False
            for j in range(t + 1, cols):
                if a[t][j]:
                    col_add(j, t, -(a[t][j] // p))
                    if a[t][j]:
                        done = False
            if not done:
                piv = _min_in_cross(a, t, rows, cols)
                continue
            bad = next(
                (i for i in range(t + 1, rows) for j in range(t + 1, cols) if a[i][j] % p),
                None,
            )
            if bad is None:
                break
            row_add(t, bad, 1)
            piv = _min_in_cross(a, t, rows, cols)
        if a[t][t] < 0:
            row_neg(t)
    return SmithForm(U, a, V, Ui, Vi)


def _min_in_cross(a: Matrix, t: int, rows: int, cols: int) -> tuple[int, int]:
    best = (abs(a[t][t]), t, t)
    for i in range(t, rows):
        if a[i][t] and abs(a[i][t]) < best[0]:
            best = (abs(a[i][t]), i, t)
    for j in range(t, cols):
        if a[t][j] and abs(a[t][j]) < best[0]:
            best = (abs(a[t][j]), t, j)
    return best[1], best[2]


def integer_kernel(m: Sequence[Sequence[int]], nrows: int | None = None) -> Matrix:
    """Basis (as rows) of the left kernel ``{x : x * m == 0}`` over Z."""
    n = len(m) if m else (nrows or 0)
    if n == 0:
        return []
    cols = len(m[0]) if m else 0
    if cols == 0:
        return identity(n)
    snf = smith_normal_form(m)
    return [list(row) for row in snf.U[snf.rank:]]


def matrix_rank(m: Sequence[Sequence[int]]) -> int:
    if not m or not m[0]:
        return 0
    return smith_normal_form(m).rank


def solve_left(m: Sequence[Sequence[int]], v: Sequence[int]) -> list[int] | None:
    """Integer ``x`` with ``x * m == v``, or None if there is none."""
    n = len(m)
    cols = len(v)
    if n == 0:
        return [] if not any(v) else None
    snf = smith_normal_form(m)
    w = vecmat(v, snf.V, cols)
    y = [0] * n
    for i in range(min(n, cols)):
        d = snf.D[i][i]
        if d == 0:
            if w[i]:
                return None
            continue
        if w[i] % d:
            return None
        y[i] = w[i] // d
    if any(w[i] for i in range(min(n, cols), cols)):
        return None
    return vecmat(y, snf.U, n)


@dataclass(frozen=True)
class GroupElement:
    group: "FpAbelianGroup"
    coords: tuple[int, ...]

    def __add__(self, other: "GroupElement") -> "GroupElement":
        self._check(other)
        return self.group.reduce([x + y for x, y in zip(self.coords, other.coords)])

    def __neg__(self) -> "GroupElement":
        return self.group.reduce([-x for x in self.coords])

    def __sub__(self, other: "GroupElement") -> "GroupElement":
        return self + (-other)

    def __rmul__(self, k: int) -> "GroupElement":
        return self.group.reduce([k * x for x in self.coords])

    def is_zero(self) -> bool:
        return not any(self.coords)

    def _check(self, other: "GroupElement") -> None:
        if other.group is not self.group:
            raise ValueError("elements belong to different groups")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self.group is other.group and self.coords == other.coords

    def __hash__(self) -> int:
        return hash(self.coords)


@dataclass(frozen=True, eq=False)
class FpAbelianGroup:
    """``Z^n / rowspace(relations)`` in Smith canonical coordinates.

    Canonical coordinates list the free part first, then one residue per
    invariant factor ``d > 1``.
    """

    generators: tuple[str, ...]
    relations: tuple[tuple[int, ...], ...]
    free_rank: int
    torsion: tuple[int, ...]
    # columns of V that survive (invariant factor != 1), torsion ones first
    _basis_change: tuple[tuple[int, ...], ...] = field(repr=False)
    _kept: tuple[int, ...] = field(repr=False)
    _moduli: tuple[int, ...] = field(repr=False)
    _V_inv: tuple[tuple[int, ...], ...] = field(repr=False)

    @property
    def ngens(self) -> int:
        return len(self.generators)

    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def order(self) -> int | None:
        if self.free_rank:
            return None
        out = 1
        for d in self.torsion:
            out *= d
        return out

    def zero(self) -> GroupElement:
        return GroupElement(self, (0,) * (self.free_rank + len(self.torsion)))

    def reduce(self, coords: Sequence[int]) -> GroupElement:
        out = []
        for x, mod in zip(coords, self._moduli):
            out.append(x % mod if mod else x)
        return GroupElement(self, tuple(out))

    def element(self, vector: Sequence[int]) -> GroupElement:
        """Image of an integer combination of the named generators."""
        if len(vector) != self.ngens:
            raise ValueError("vector length must equal the number of generators")
        full = vecmat(vector, self._basis_change, self.ngens)
        return self.reduce([full[j] for j in self._kept])

    def class_of(self, name: str) -> GroupElement:
        idx = self.generators.index(name)
        return self.element([int(i == idx) for i in range(self.ngens)])

    def lift(self, element: GroupElement) -> list[int]:
        """A generator combination whose image is ``element``."""
        full = [0] * self.ngens
        for c, j in zip(element.coords, self._kept):
            full[j] = c
        return vecmat(full, self._V_inv, self.ngens)

    def basis_lifts(self) -> list[list[int]]:
        out = []
        for k in range(self.free_rank + len(self.torsion)):
            coords = [int(i == k) for i in range(self.free_rank + len(self.torsion))]
            out.append(self.lift(GroupElement(self, tuple(coords))))
        return out

    def relation_kernel(self, elements: Sequence[GroupElement]) -> Matrix:
        """Basis of ``{c : sum c_i * elements_i == 0}``."""
        k = len(elements)
        if k == 0:
            return []
        width = self.free_rank + len(self.torsion)
        rows = [list(e.coords) for e in elements]
        for idx, d in enumerate(self.torsion):
            row = [0] * width
            row[self.free_rank + idx] = d
            rows.append(row)
        if width == 0:
            return identity(k)
        ker = integer_kernel(rows)
        return [r[:k] for r in ker]

    def subgroup(self, elements: Sequence[GroupElement], names: Sequence[str] | None = None) -> "FpAbelianGroup":
        """Presentation of the subgroup generated by ``elements``."""
        names = list(names) if names is not None else [f"s{i}" for i in range(len(elements))]
        return present(names, self.relation_kernel(elements))

    def solve(self, basis: Sequence[GroupElement], target: GroupElement) -> list[int] | None:
        """Integer coefficients expressing ``target`` in terms of ``basis``."""
        width = self.free_rank + len(self.torsion)
        rows = [list(e.coords) for e in basis]
        for idx, d in enumerate(self.torsion):
            row = [0] * width
            row[self.free_rank + idx] = d
            rows.append(row)
        sol = solve_left(rows, list(target.coords)) if rows else (None if any(target.coords) else [])
        if sol is None:
            return None
        return sol[: len(basis)]

    def describe(self) -> str:
        parts = ["Z"] * min(self.free_rank, 1)
        if self.free_rank > 1:
            parts = [f"Z^{self.free_rank}"]
        parts += [f"Z/{d}" for d in self.torsion]
        return " + ".join(parts) if parts else "0"

    def to_dict(self) -> dict:
        return {
            "free_rank": self.free_rank,
            "torsion": list(self.torsion),
            "generators": {g: list(self.class_of(g).coords) for g in self.generators},
        }


def present(generators: Sequence[str], relations: Sequence[Sequence[int]]) -> FpAbelianGroup:
    """The group generated by ``generators`` subject to ``relations``.

    Each relation is an integer vector of length ``len(generators)``
    that is declared to be zero.
    """
    gens = tuple(generators)
    n = len(gens)
    rels = tuple(tuple(int(x) for x in r) for r in relations)
    for r in rels:
        if len(r) != n:
            raise ValueError(f"relation {r} has length {len(r)}, expected {n}")
    if n == 0:
        return FpAbelianGroup(gens, rels, 0, (), (), (), (), ())
    snf = smith_normal_form([list(r) for r in rels], ncols=n)
    diag = [0] * n
    for i, d in enumerate(snf.diagonal):
        diag[i] = d
    torsion_idx = [j for j in range(n) if diag[j] > 1]
    free_idx = [j for j in range(n) if diag[j] == 0]
    kept = tuple(free_idx + torsion_idx)
    moduli = tuple([0] * len(free_idx) + [diag[j] for j in torsion_idx])
    return FpAbelianGroup(
        generators=gens,
        relations=rels,
        free_rank=len(free_idx),
        torsion=tuple(diag[j] for j in torsion_idx),
        _basis_change=tuple(tuple(r) for r in snf.V),
        _kept=kept,
        _moduli=moduli,
        _V_inv=tuple(tuple(r) for r in snf.V_inv),
    )


@dataclass(frozen=True)
class CechH1:
    """First Čech cohomology with the data needed to classify cocycles."""

    group: FpAbelianGroup
    cocycle_basis: Matrix  # rows span ker d1 (lifted to the free cochains)
    representatives: Matrix  # one cocycle per canonical generator
    _c1_relations: Matrix

    def class_of(self, cocycle: Sequence[int]) -> GroupElement:
        """Cohomology class of a 1-cocycle given in lifted coordinates."""
        rows = [list(r) for r in self.cocycle_basis] + [list(r) for r in self._c1_relations]
        if not rows:
            if any(cocycle):
                raise ValueError("not a cocycle")
            return self.group.zero()
        coeffs = solve_left(rows, list(cocycle))
        if coeffs is None:
            raise ValueError("not a cocycle")
        return self.group.element(coeffs[: len(self.cocycle_basis)])


def cech_h1(
    c0: FpAbelianGroup,
    c1: FpAbelianGroup,
    c2: FpAbelianGroup,
    d0: Sequence[Sequence[int]],
    d1: Sequence[Sequence[int]],
) -> CechH1:
    """``ker d1 / im d0`` for a three-term complex of f.g. abelian groups.

    Each ``c_k`` is a presentation ``Z^{n_k} / R_k``; ``d0`` is an
    ``n0 x n1`` matrix acting on row vectors and ``d1`` is ``n1 x n2``.
    """
    n0, n1, n2 = c0.ngens, c1.ngens, c2.ngens
    d0 = [list(r) for r in d0] if n0 else []
    d1 = [list(r) for r in d1] if n1 else []
    r1 = [list(r) for r in c1.relations]
    r2 = [list(r) for r in c2.relations]

    def in_c2_relations(v: list[int]) -> bool:
        if not any(v):
            return True
        return bool(r2) and solve_left(r2, v) is not None

    for row in d0:
        image = vecmat(row, d1, n2) if n1 else [0] * n2
        if not in_c2_relations(image):
            raise InconsistentComplexError(f"d1 o d0 is nonzero on {row}")
    # relations of C1 must map into relations of C2 for d1 to be well defined
    for row in r1:
        if n2 and not in_c2_relations(vecmat(row, d1, n2)):
            raise InconsistentComplexError("d1 is not well defined on the presentation of C1")

    if n1 == 0:
        grp = present([], [])
        return CechH1(grp, [], [], [])
    if n2 == 0:
        cocycles = identity(n1)
    else:
        stacked = d1 + r2
        ker = integer_kernel(stacked, nrows=len(stacked))
        cocycles = [r[:n1] for r in ker]
        cocycles = _row_basis(cocycles, n1)
    boundaries = d0 + r1
    rels = []
    for b in boundaries:
        coeffs = solve_left(cocycles, b) if cocycles else None
        if coeffs is None:
            if any(b):
                raise InconsistentComplexError("a coboundary is not a cocycle")
            continue
        rels.append(coeffs)
    names = [f"z{i}" for i in range(len(cocycles))]
    grp = present(names, rels)
    reps = [vecmat(lift, cocycles, n1) for lift in grp.basis_lifts()]
    return CechH1(grp, cocycles, reps, r1)


def _row_basis(rows: Matrix, width: int) -> Matrix:
    """A basis of the row lattice spanned by ``rows``."""
    if not rows:
        return []
    snf = smith_normal_form(rows)
    # rowspace(rows) = rowspace(D * V_inv); keep the nonzero rows
    out = []
    for i in range(snf.rank):
        d = snf.D[i][i]
        out.append([d * x for x in snf.V_inv[i]])
    return out


@dataclass(frozen=True)
class SparsePresentation:
    """A presentation reduced by eliminating generators with unit pivots.

    ``group`` is presented on the surviving generators; ``element`` maps a
    combination of the original generators into it.
    """

    generators: tuple[str, ...]
    group: FpAbelianGroup
    _expr: dict = field(repr=False)
    _survivors: dict = field(repr=False)

    def reduce(self, combo: dict[int, int]) -> dict[int, int]:
        return _substitute(dict(combo), self._expr)

    def element(self, vector: Sequence[int] | dict) -> GroupElement:
        combo = vector if isinstance(vector, dict) else {i: c for i, c in enumerate(vector) if c}
        red = self.reduce(combo)
        v = [0] * self.group.ngens
        for g, c in red.items():
            v[self._survivors[g]] += c
        return self.group.element(v)

    def class_of(self, name: str) -> GroupElement:
        return self.element({self.generators.index(name): 1})


def _substitute(row: dict[int, int], expr: dict) -> dict[int, int]:
    stack = [g for g in row if g in expr]
    while stack:
        g = stack.pop()
        c = row.pop(g, 0)
        if not c:
            continue
        for h, d in _resolve(g, expr).items():
            v = row.get(h, 0) + c * d
            if v:
                row[h] = v
            else:
                row.pop(h, None)
    return row


def _resolve(g: int, expr: dict) -> dict[int, int]:
    e = expr[g]
    if any(h in expr for h in e):
        e = _substitute(dict(e), expr)
        expr[g] = e
    return e


def present_sparse(generators: Sequence[str], relations: Iterable[dict[int, int] | Sequence[int]]) -> SparsePresentation:
    """Like ``present`` but for many sparse relations.

    Relations are dicts ``{generator index: coefficient}`` (dense vectors
    are accepted too).  Generators whose coefficient is a unit in some
    relation are eliminated first; the rest goes through ``present``.
    """
    gens = tuple(generators)
    expr: dict[int, dict[int, int]] = {}
    leftover: list[dict[int, int]] = []
    for rel in relations:
        row = dict(rel) if isinstance(rel, dict) else {i: c for i, c in enumerate(rel) if c}
        row = {g: c for g, c in row.items() if c}
        row = _substitute(row, expr)
        if not row:
            continue
        pivot = max((g for g, c in row.items() if abs(c) == 1), default=None)
        if pivot is None:
            leftover.append(row)
            continue
        sign = row.pop(pivot)
        # pivot = -sign * (rest of the row)
        expr[pivot] = {h: -sign * c for h, c in row.items()}
    survivors = [i for i in range(len(gens)) if i not in expr]
    index = {g: k for k, g in enumerate(survivors)}
    dense = []
    for row in leftover:
        row = _substitute(row, expr)
        if row:
            v = [0] * len(survivors)
            for g, c in row.items():
                v[index[g]] += c
            dense.append(v)
    grp = present([gens[i] for i in survivors], dense)
    return SparsePresentation(gens, grp, expr, index)
