"""Grothendieck groups from generators and exact-sequence relations."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .. import abgroup
from .. import aset as asets
from .. import scheme as sch
from ..monoid import AffineMonoid, Monoid, UnsupportedError, idempotents, raw


class RelationError(ValueError):
    """A relation refers to a label that is not a generator."""


@dataclass
class K0Report:
    """A Grothendieck group with named classes and an optional product.

    ``labels`` are all generators of the presentation; ``basis`` names the
    classes the product table is written in.  ``product[i][j]`` is the
    coefficient vector of ``basis[i] * basis[j]`` over ``basis``.
    """

    labels: tuple[str, ...]
    presentation: abgroup.SparsePresentation
    basis: tuple[str, ...]
    product: list[list[list[int]]] | None = None
    provenance: list[dict] = field(default_factory=list)
    truncated: bool = False
    ring: str | None = None
    extra: dict = field(default_factory=dict)

    @property
    def group(self) -> abgroup.FpAbelianGroup:
        return self.presentation.group

    def class_of(self, label: str) -> abgroup.GroupElement:
        if label not in self.labels:
            raise RelationError(f"unknown class {label!r}")
        return self.presentation.class_of(label)

    def combination(self, coeffs: Sequence[int]) -> abgroup.GroupElement:
        """``sum coeffs[i] * basis[i]`` as a group element."""
        out = self.group.zero()
        for c, b in zip(coeffs, self.basis):
            if c:
                out = out + c * self.class_of(b)
        return out

    def multiply(self, x: Sequence[int], y: Sequence[int]) -> list[int]:
        if self.product is None:
            raise UnsupportedError("this report carries no product")
        n = len(self.basis)
        out = [0] * n
        for i, a in enumerate(x):
            if not a:
                continue
            for j, b in enumerate(y):
                if b:
                    for k, c in enumerate(self.product[i][j]):
                        out[k] += a * b * c
        return out

    def check_ring(self) -> bool:
        """Table entries are group elements; commutative, associative, distributive on the basis."""
        if self.product is None:
            return True
        n = len(self.basis)
        unit = [[int(i == j) for j in range(n)] for i in range(n)]
        for i in range(n):
            for j in range(n):
                if len(self.product[i][j]) != n:
                    return False
                if self.combination(self.product[i][j]) != self.combination(self.product[j][i]):
                    return False
        for i, j, k in itertools.product(range(n), repeat=3):
            lhs = self.multiply(self.multiply(unit[i], unit[j]), unit[k])
            rhs = self.multiply(unit[i], self.multiply(unit[j], unit[k]))
            if self.combination(lhs) != self.combination(rhs):
                return False
            # (b_i + b_j) b_k = b_i b_k + b_j b_k
            s = [a + b for a, b in zip(unit[i], unit[j])]
            lhs = self.multiply(s, unit[k])
            rhs = [a + b for a, b in zip(self.multiply(unit[i], unit[k]), self.multiply(unit[j], unit[k]))]
            if self.combination(lhs) != self.combination(rhs):
                return False
        return True

    def to_dict(self) -> dict:
        doc = {
            "group": self.group.to_dict(),
            "basis": list(self.basis),
            "classes": {lab: list(self.class_of(lab).coords) for lab in self.labels},
            "product": self.product,
            "provenance": self.provenance,
            "truncated": self.truncated,
        }
        if self.ring is not None:
            doc["ring"] = self.ring
        doc.update(self.extra)
        return doc


def grothendieck_group(
    generators: Sequence[str],
    relations: Iterable[Sequence[str]],
    provenance: Iterable[dict] | None = None,
) -> K0Report:
    """Free abelian group on ``generators`` modulo ``[b] = [a] + [c]``.

    Each relation is a triple ``(b, a, c)``; ``a`` or ``c`` may be None for
    the zero object.
    """
    labels = tuple(generators)
    if len(set(labels)) != len(labels):
        raise RelationError("generator labels must be distinct")
    index = {lab: i for i, lab in enumerate(labels)}
    rows = []
    for rel in relations:
        b, a, c = rel
        row: dict[int, int] = {}
        for lab, sign in ((b, 1), (a, -1), (c, -1)):
            if lab is None:
                continue
            if lab not in index:
                raise RelationError(f"relation refers to unknown class {lab!r}")
            k = index[lab]
            row[k] = row.get(k, 0) + sign
        rows.append({k: v for k, v in row.items() if v})
    pres = abgroup.present_sparse(labels, rows)
    basis = tuple(pres.group.generators)
    return K0Report(labels, pres, basis, provenance=list(provenance or []))


# --------------------------------------------------------------------------
# affine monoids


def _ring_name(report: K0Report, one: int) -> str:
    n = len(report.basis)
    if n == 0:
        return "0"
    if n == 1:
        return "Z"
    if n == 2:
        x = 1 - one
        sq = report.product[x][x]
        a, b = sq[one], sq[x]
        terms = "x^2"
        if b:
            terms += f" - {b}*x" if b > 0 else f" + {-b}*x"
            terms = terms.replace(" 1*x", " x")
        if a:
            terms += f" - {a}" if a > 0 else f" + {-a}"
        return f"Z[x]/({terms})"
    return f"Z^{n} with the recorded product"


def _is_split(i: asets.ASetMorphism, j: asets.ASetMorphism) -> bool:
    seq = asets.check_ses(i, j)
    return seq.is_admissible and asets.split_ses(seq) is not None


def k0_affine(A: Monoid) -> K0Report:
    """K0 of Spec A: free on the projectives eA, product from tensor."""
    if A.is_zero_monoid:
        rep = grothendieck_group([], [])
        rep.product, rep.ring = [], "0"
        return rep
    if not A.is_finite:
        # 1 is the only nonzero idempotent of an infinite affine monoid
        rep = grothendieck_group(["A"], [])
        rep.product = [[[1]]]
        rep.ring = "Z"
        rep.provenance.append({"note": "only nonzero idempotent is 1; basis [A]"})
        return rep
    ids = [e for e in idempotents(A) if not A.is_zero(e)]
    ids.sort(key=lambda e: (-sum(1 for a in A.elements() if A.mul(e, a) == a), A.format(e)))
    reps: list[tuple[object, asets.ASet]] = []
    for e in ids:
        P = asets.regular(A, e)
        if not any(asets.is_isomorphic(P, Q) for _, Q in reps):
            reps.append((e, P))
    names = ["A" if raw(e) == raw(A.one) else f"{A.format(e)}A" for e, _ in reps]

    # family: wedges of at most two indecomposables
    family: list[tuple[str, asets.ASet]] = [(n, P) for n, (_, P) in zip(names, reps)]
    for a, b in itertools.combinations_with_replacement(range(len(reps)), 2):
        family.append((f"{names[a]} v {names[b]}", asets.wedge(reps[a][1], reps[b][1]).aset))

    def find(M: asets.ASet) -> str | None:
        if M.size == 1:
            return None
        for lab, P in family:
            if P.size == M.size and asets.is_isomorphic(P, M):
                return lab
        raise AssertionError("projective outside the harvested family")

    relations, log = [], []
    for lab, P in family:
        for sub in asets.sub_asets(P):
            if len(sub) in (1, P.size):
                continue
            S = asets.sub_aset(P, sub)
            Q = asets.collapse(P, sub)
            if not (asets.is_projective(S.aset) and asets.is_projective(Q.aset)):
                continue
            if not _is_split(S.inclusion, Q.projection):
                raise AssertionError(f"non-split admissible sequence inside {lab}")
            a, c = find(S.aset), find(Q.aset)
            relations.append((lab, a, c))
            log.append({"middle": lab, "sub": a, "quotient": c, "split": True})
    rep = grothendieck_group([lab for lab, _ in family], relations, log)
    rep.basis = tuple(names)

    table = []
    for (e, P) in reps:
        row = []
        for (f, Q) in reps:
            T = asets.tensor(P, Q).aset
            ef = A.mul(raw(e), raw(f))
            R = asets.base_point(A) if A.is_zero(ef) else asets.regular(A, ef)
            if not asets.is_isomorphic(T, R):
                raise AssertionError("eA (x) fA is not efA")
            vec = [0] * len(reps)
            if T.size > 1:
                vec[[k for k, (_, P2) in enumerate(reps) if asets.is_isomorphic(P2, T)][0]] = 1
            row.append(vec)
        table.append(row)
    rep.product = table
    rep.ring = _ring_name(rep, 0)
    return rep


# --------------------------------------------------------------------------
# integral schemes: the group ring over Pic


@dataclass
class GroupRingReport:
    """K0 of an integral scheme as the group ring Z[Pic X].

    Elements are dicts from Pic coordinate tuples to coefficients.
    """

    atlas: sch.SchemeAtlas
    pic: abgroup.FpAbelianGroup
    projective: bool

    def key(self, c: abgroup.GroupElement) -> tuple[int, ...]:
        """Twist ``(l,)`` on a projective space, Pic coordinates otherwise."""
        if self.projective:
            return (c.coords[0] * self._o1_sign,)
        return tuple(c.coords)

    @cached_property
    def _o1_sign(self) -> int:
        o1 = sch.line_bundle_class(self.atlas, sch.twisted(self.atlas, 1))
        return o1.coords[0]

    def _combine(self, a: tuple, b: tuple) -> tuple:
        if self.projective:
            return (a[0] + b[0],)
        return tuple((self.pic.reduce(a) + self.pic.reduce(b)).coords)

    def label(self, key: tuple[int, ...]) -> str:
        if self.projective:
            return f"O({key[0]})"
        return "[" + ",".join(map(str, key)) + "]"

    def line(self, l: int) -> dict:
        """``[O(l)]`` on a projective space."""
        return {(l,): 1}

    def class_of_sheaf(self, M: sch.QCSheaf) -> dict:
        out: dict = {}
        for c in sch.decompose_into_line_bundles(self.atlas, M):
            k = self.key(c)
            out[k] = out.get(k, 0) + 1
        return out

    def multiply(self, x: dict, y: dict) -> dict:
        out: dict = {}
        for a, s in x.items():
            for b, t in y.items():
                k = self._combine(a, b)
                out[k] = out.get(k, 0) + s * t
        return {k: v for k, v in out.items() if v}

    def add(self, x: dict, y: dict) -> dict:
        out = dict(x)
        for k, v in y.items():
            out[k] = out.get(k, 0) + v
        return {k: v for k, v in out.items() if v}

    def format(self, x: dict) -> str:
        if not x:
            return "0"
        parts = []
        for k in sorted(x):
            c = x[k]
            if self.projective:
                m = k[0]
                mono = "1" if m == 0 else ("t" if m == 1 else f"t^{m}")
            else:
                mono = "[" + ",".join(map(str, k)) + "]"
            if mono == "1":
                parts.append(str(c))
            else:
                parts.append(mono if c == 1 else f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def to_dict(self, window: int = 2) -> dict:
        doc = {"ring": "Z[Pic X]", "pic": self.pic.to_dict()}
        if self.projective:
            doc["basis"] = "O(m), m in Z"
            ls = list(range(-window, window + 1))
            doc["product_window"] = {
                f"O({a})*O({b})": self.format(self.multiply(self.line(a), self.line(b))) for a in ls for b in ls
            }
        return doc


def k0_integral_scheme(X: sch.SchemeAtlas) -> K0Report | GroupRingReport:
    """Z[Pic X]; finite Pic gives an explicit K0Report."""
    if not X.is_integral:
        raise UnsupportedError("scheme is not integral with a unique generic point")
    pic = sch.picard_group(X).group
    if pic.free_rank:
        return GroupRingReport(X, pic, X.projective_dim is not None)
    elems = [tuple(v) for v in itertools.product(*(range(d) for d in pic.torsion))]
    labels = ["O"] if len(elems) == 1 else ["L[" + ",".join(map(str, v)) + "]" for v in elems]
    rep = grothendieck_group(labels, [])
    rep.basis = tuple(labels)
    pos = {v: i for i, v in enumerate(elems)}
    table = []
    for u in elems:
        row = []
        for v in elems:
            w = tuple((a + b) % d for a, b, d in zip(u, v, pic.torsion))
            vec = [0] * len(elems)
            vec[pos[w]] = 1
            row.append(vec)
        table.append(row)
    rep.product = table
    rep.ring = "Z" if len(elems) == 1 else f"Z[{pic.describe()}]"
    rep.provenance.append({"note": "Pic is finite; basis indexed by its elements"})
    return rep
