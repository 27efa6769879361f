"""Monoid schemes presented by glued affine charts, and sheaves on them.

An atlas stores, for each ordered pair of charts ``(i, j)``, an element
``f_ij`` of chart ``i`` and a linear map ``phi_ij`` taking coordinate
vectors of chart ``i`` to coordinate vectors of chart ``j``.  Row ``k`` of
``phi_ij`` is the image of the ``k``-th unit vector.  Coordinate vectors
may have negative entries on the support of ``f_ij``; they name elements
of the localization ``(A_i)_{f_ij}``.

Sheaves come in two flavours.  A *free* sheaf has a free A-set of rank
``r`` on each chart and gluings ``m_k -> u_k * m_sigma(k)`` with units
``u_k`` written in the coordinates of the target chart.  A *concrete*
sheaf has a finite A-set on each chart and gluings given as bijections
between stable images (see ``aset.localize_aset``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from scipy.cluster.hierarchy import DisjointSet

from . import abgroup
from . import aset as asets
from .monoid import (
    AffineMonoid,
    Localization,
    Monoid,
    MonoidError,
    PrimeIdeal,
    RingPresentation,
    UnsupportedError,
    ZERO,
    emit_zring_presentation,
    enumerate_primes,
    localize,
    polynomial,
    raw,
)


class SchemeError(ValueError):
    """Inconsistent atlas or sheaf data."""


class GluingError(SchemeError):
    def __init__(self, i: int, j: int, reason: str):
        super().__init__(f"gluing ({i}, {j}): {reason}")
        self.pair = (i, j)


# --------------------------------------------------------------------------
# atlases


@dataclass(frozen=True, eq=False)
class Overlap:
    i: int
    j: int
    f: object  # element of chart i
    loc: Localization  # chart i localized at f
    phi: tuple[tuple[int, ...], ...]

    @property
    def support(self) -> frozenset:
        A = self.loc.source
        if self.f is ZERO:
            return frozenset(range(A.a))
        return frozenset(k for k in range(A.a) if self.f[k] > 0)


def _vecmat(v: Sequence[int], m: Sequence[Sequence[int]], width: int) -> list[int]:
    out = [0] * width
    for c, row in zip(v, m):
        if c:
            for k, x in enumerate(row):
                out[k] += c * x
    return out


class SchemeAtlas:
    """A scheme glued from affine charts along principal opens."""

    def __init__(self, charts: Sequence[Monoid], overlaps: dict, names: Sequence[str] | None = None, check: bool = True):
        self.charts = tuple(charts)
        self.names = tuple(names) if names else tuple(f"U{i}" for i in range(len(self.charts)))
        if len(self.charts) > 1 and not all(isinstance(A, AffineMonoid) for A in self.charts):
            raise UnsupportedError("multi-chart atlases need affine charts")
        self.overlaps: dict[tuple[int, int], Overlap] = {}
        for (i, j), (f, phi) in overlaps.items():
            A = self.charts[i]
            f = A.canonical(raw(f))
            self.overlaps[(i, j)] = Overlap(i, j, f, localize(A, [f]), tuple(tuple(int(x) for x in r) for r in phi))
        self.projective_dim: int | None = None
        if check:
            self._validate()

    @property
    def n_charts(self) -> int:
        return len(self.charts)

    def pairs(self) -> list[tuple[int, int]]:
        return sorted((i, j) for (i, j) in self.overlaps if i < j)

    def triples(self) -> list[tuple[int, int, int]]:
        out = []
        for i, j, k in itertools.combinations(range(self.n_charts), 3):
            if (i, j) in self.overlaps and (i, k) in self.overlaps and (j, k) in self.overlaps:
                out.append((i, j, k))
        return out

    # coordinate transport -------------------------------------------------
    def transport(self, i: int, j: int, v) -> tuple | object:
        """Image under ``phi_ij`` of a chart-``i`` coordinate vector."""
        if v is ZERO:
            return ZERO
        if i == j:
            return tuple(v)
        ov = self.overlaps[(i, j)]
        B = self.charts[j]
        return B._reduce_torsion(tuple(_vecmat(v, ov.phi, B.dim)))

    def local(self, i: int, j: int, v):
        """Canonical element of ``(A_i)_{f_ij}`` named by a chart vector."""
        return self.overlaps[(i, j)].loc.to_local(v if v is ZERO else tuple(v))

    def is_local_unit(self, i: int, j: int, v) -> bool:
        x = self.local(i, j, v)
        if x is ZERO:
            return False
        L = self.overlaps[(i, j)].loc.monoid
        return all(c == 0 for c in x[: L.a])

    def _validate(self) -> None:
        for (i, j), ov in self.overlaps.items():
            if (j, i) not in self.overlaps:
                raise GluingError(i, j, "missing reverse overlap")
            A, B = self.charts[i], self.charts[j]
            if ov.f is ZERO:
                raise GluingError(i, j, "overlap element is zero")
            if len(ov.phi) != A.dim or any(len(r) != B.dim for r in ov.phi):
                raise GluingError(i, j, "phi has the wrong shape")
            for k in range(A.dim):
                e = [0] * A.dim
                e[k] = 1
                img = self.transport(i, j, e)
                try:
                    self.local(j, i, img)
                except MonoidError as exc:
                    raise GluingError(i, j, f"image of coordinate {k} is not in the localization") from exc
                there_and_back = self.transport(j, i, img)
                if A._reduce_torsion(tuple(there_and_back)) != A._reduce_torsion(tuple(e)):
                    raise GluingError(i, j, "phi_ji is not inverse to phi_ij")
            if not self.is_local_unit(j, i, self.transport(i, j, ov.f)):
                raise GluingError(i, j, "phi_ij(f_ij) is not a unit")
            for g in A.ideal:
                zi = self.local(i, j, g) is ZERO
                zj = self.local(j, i, self.transport(i, j, g)) is ZERO
                if zi != zj:
                    raise GluingError(i, j, "phi_ij does not respect the quotient ideal")
        for i, j, k in self.triples():
            A = self.charts[i]
            for c in range(A.dim):
                e = [0] * A.dim
                e[c] = 1
                if self.transport(j, k, self.transport(i, j, e)) != self.transport(i, k, e):
                    raise SchemeError(f"cocycle condition fails on charts ({i}, {j}, {k})")

    # points ----------------------------------------------------------------
    def _chart_primes(self, i: int) -> list[PrimeIdeal]:
        return enumerate_primes(self.charts[i])

    def _identify(self, i: int, j: int, p: PrimeIdeal) -> tuple | None:
        """Key of the prime of chart ``j`` matching ``p`` on the overlap."""
        ov = self.overlaps[(i, j)]
        if set(p.J) & ov.support:
            return None
        B = self.charts[j]
        back = self.overlaps[(j, i)]
        Jp = []
        for k in range(B.a):
            if k in back.support:
                continue
            e = [0] * B.dim
            e[k] = 1
            img = self.transport(j, i, e)
            if any(img[c] > 0 for c in p.J):
                Jp.append(k)
        return tuple(Jp)

    def _point_classes(self):
        cached = getattr(self, "_points_cache", None)
        if cached is not None:
            return cached
        nodes = [(i, p.key) for i in range(self.n_charts) for p in self._chart_primes(i)]
        ds = DisjointSet(nodes)
        for (i, j) in self.overlaps:
            for p in self._chart_primes(i):
                key = self._identify(i, j, p)
                if key is not None:
                    if (j, key) not in ds:
                        raise SchemeError(f"prime {p} of chart {i} has no partner on chart {j}")
                    ds.merge((i, p.key), (j, key))
        classes = sorted((sorted(c, key=_node_key) for c in ds.subsets()), key=lambda c: _node_key(c[0]))
        self._points_cache = classes
        return classes

    def points(self) -> list["SchemePoint"]:
        out = []
        for idx, cls in enumerate(self._point_classes()):
            i, key = cls[0]
            prime = next(p for p in self._chart_primes(i) if p.key == key)
            out.append(SchemePoint(idx, i, prime, tuple(cls)))
        return out

    def specialization(self) -> set[tuple[int, int]]:
        """Pairs ``(x, y)`` with ``y`` in the closure of ``x``."""
        index = {}
        for idx, cls in enumerate(self._point_classes()):
            for node in cls:
                index[node] = idx
        rel = set()
        for i in range(self.n_charts):
            ps = self._chart_primes(i)
            for p in ps:
                for q in ps:
                    if p <= q:
                        rel.add((index[(i, p.key)], index[(i, q.key)]))
        return rel

    def stalk(self, x: "SchemePoint") -> Localization:
        A = self.charts[x.chart]
        p = x.prime
        S = [g for g in A.generators if not p.contains(g)]
        return localize(A, S)

    def generic_points(self) -> list["SchemePoint"]:
        spec = self.specialization()
        pts = self.points()
        return [x for x in pts if not any(a != x.index and b == x.index for a, b in spec)]

    @property
    def is_integral(self) -> bool:
        for A in self.charts:
            if not isinstance(A, AffineMonoid) or A.ideal:
                return False
        return len(self.generic_points()) == 1

    # output -------------------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "charts": [getattr(A, "describe", lambda: repr(A))() for A in self.charts],
            "overlaps": [
                {"i": i, "j": j, "f_i": _vec_or_zero(self.overlaps[(i, j)].f), "phi": [list(r) for r in self.overlaps[(i, j)].phi]}
                for (i, j) in sorted(self.overlaps)
            ],
        }


def _node_key(node):
    i, key = node
    return (i, len(key), key)


def _vec_or_zero(x):
    return None if x is ZERO else list(x)


@dataclass(frozen=True)
class SchemePoint:
    index: int
    chart: int
    prime: PrimeIdeal
    members: tuple  # all (chart, prime key) pairs naming this point

    def __repr__(self) -> str:
        return f"Point#{self.index}(U{self.chart}, {self.prime.format()})"


def spec(A: Monoid, name: str | None = None) -> SchemeAtlas:
    return SchemeAtlas([A], {}, [name] if name else None)


def projective_space(n: int) -> SchemeAtlas:
    """``P^n`` from ``n+1`` copies of ``F1[x_k : k != i]``."""
    if n < 0:
        raise ValueError("dimension must be non-negative")
    charts = []
    coords = []
    for i in range(n + 1):
        ks = [k for k in range(n + 1) if k != i]
        coords.append(ks)
        if n == 1:
            names = [f"T{i + 1}"]
        else:
            names = [f"X{k}/X{i}" for k in ks]
        charts.append(polynomial(n, names) if n else polynomial(0, []))
    overlaps = {}
    for i in range(n + 1):
        for j in range(n + 1):
            if i == j:
                continue
            pos_i = {k: c for c, k in enumerate(coords[i])}
            pos_j = {k: c for c, k in enumerate(coords[j])}
            f = [0] * n
            f[pos_i[j]] = 1
            phi = []
            for k in coords[i]:
                row = [0] * n
                row[pos_j[i]] -= 1
                if k != j:
                    row[pos_j[k]] += 1
                phi.append(row)
            overlaps[(i, j)] = (tuple(f), phi)
    X = SchemeAtlas(charts, overlaps, [f"U{i}" for i in range(n + 1)])
    X.projective_dim = n
    X._proj_coords = coords
    return X


# --------------------------------------------------------------------------
# Picard group


@dataclass(frozen=True)
class _UnitSpace:
    chart: int
    coords: tuple[int, ...]


def _unit_coords(A: AffineMonoid, support: frozenset) -> tuple[int, ...]:
    return tuple(sorted(set(support) | set(range(A.a, A.dim))))


def _unit_group(A: AffineMonoid, coords: Sequence[int], name: str) -> abgroup.FpAbelianGroup:
    rels = []
    for pos, c in enumerate(coords):
        if c >= A.a + A.b:
            r = [0] * len(coords)
            r[pos] = A.torsion[c - A.a - A.b]
            rels.append(r)
    return abgroup.present([f"{name}.{A.coord_names[c]}" for c in coords], rels)


@dataclass(frozen=True)
class PicardGroup:
    atlas: SchemeAtlas
    h1: abgroup.CechH1
    c1_layout: tuple  # per pair (i, j): coordinate tuple in chart i

    @property
    def group(self) -> abgroup.FpAbelianGroup:
        return self.h1.group

    def class_of_cocycle(self, cocycle: dict) -> abgroup.GroupElement:
        """Class of ``{(i, j): chart-i vector}`` for ``i < j``."""
        flat = []
        for (i, j), coords in self.c1_layout:
            v = cocycle.get((i, j), [0] * self.atlas.charts[i].dim)
            flat.extend(v[c] for c in coords)
        return self.h1.class_of(flat)


def picard_group(X: SchemeAtlas) -> PicardGroup:
    """``H^1`` of the unit sheaf on the chart nerve (cached on the atlas)."""
    cached = getattr(X, "_pic_cache", None)
    if cached is None:
        cached = X._pic_cache = _picard_group(X)
    return cached


def _picard_group(X: SchemeAtlas) -> PicardGroup:
    if X.n_charts == 1:
        trivial = abgroup.present([], [])
        return PicardGroup(X, abgroup.CechH1(trivial, [], [], []), ())
    charts = X.charts
    c0 = [(i, _unit_coords(charts[i], frozenset())) for i in range(X.n_charts)]
    pairs = X.pairs()
    c1 = [((i, j), _unit_coords(charts[i], X.overlaps[(i, j)].support)) for (i, j) in pairs]
    triples = X.triples()
    c2 = [
        ((i, j, k), _unit_coords(charts[i], X.overlaps[(i, j)].support | X.overlaps[(i, k)].support))
        for (i, j, k) in triples
    ]

    def block(src_chart: int, src_coords, dst_chart: int, dst_coords, sign: int) -> list[list[int]]:
        A = charts[src_chart]
        pos = {c: p for p, c in enumerate(dst_coords)}
        rows = []
        for c in src_coords:
            e = [0] * A.dim
            e[c] = 1
            img = _vecmat(e, X.overlaps[(src_chart, dst_chart)].phi, charts[dst_chart].dim) if src_chart != dst_chart else e
            row = [0] * len(dst_coords)
            for k, x in enumerate(img):
                if x:
                    if k not in pos:
                        raise SchemeError("unit does not restrict to a unit")
                    row[pos[k]] = sign * x
            rows.append(row)
        return rows

    def assemble(src, dst, entries):
        # entries: (src index, dst index) -> block
        offs_s, offs_d = [0], [0]
        for _, c in src:
            offs_s.append(offs_s[-1] + len(c))
        for _, c in dst:
            offs_d.append(offs_d[-1] + len(c))
        mat = [[0] * offs_d[-1] for _ in range(offs_s[-1])]
        for (a, b), blk in entries.items():
            for r, row in enumerate(blk):
                for c, x in enumerate(row):
                    mat[offs_s[a] + r][offs_d[b] + c] += x
        return mat

    d0_entries = {}
    for b, ((i, j), coords) in enumerate(c1):
        # (d0 u)_ij = u_j - u_i, expressed in chart i
        d0_entries[(j, b)] = block(j, c0[j][1], i, coords, 1)
        d0_entries[(i, b)] = block(i, c0[i][1], i, coords, -1)
    d1_entries = {}
    index1 = {p: b for b, (p, _) in enumerate(c1)}
    for t, ((i, j, k), coords) in enumerate(c2):
        # (d1 c)_ijk = c_jk - c_ik + c_ij, expressed in chart i
        d1_entries[(index1[(j, k)], t)] = block(j, c1[index1[(j, k)]][1], i, coords, 1)
        d1_entries[(index1[(i, k)], t)] = block(i, c1[index1[(i, k)]][1], i, coords, -1)
        d1_entries[(index1[(i, j)], t)] = block(i, c1[index1[(i, j)]][1], i, coords, 1)
    d0 = assemble(c0, c1, d0_entries)
    d1 = assemble(c1, c2, d1_entries)
    g0 = _direct_sum([_unit_group(charts[i], c, f"U{i}") for i, c in c0])
    g1 = _direct_sum([_unit_group(charts[i], c, f"U{i}{j}") for (i, j), c in c1])
    g2 = _direct_sum([_unit_group(charts[i], c, f"U{i}{j}{k}") for (i, j, k), c in c2])
    h1 = abgroup.cech_h1(g0, g1, g2, d0, d1)
    return PicardGroup(X, h1, tuple(c1))


def _direct_sum(groups: Sequence[abgroup.FpAbelianGroup]) -> abgroup.FpAbelianGroup:
    names, rels = [], []
    total = sum(g.ngens for g in groups)
    off = 0
    for g in groups:
        names.extend(g.generators)
        for r in g.relations:
            row = [0] * total
            row[off : off + g.ngens] = r
            rels.append(row)
        off += g.ngens
    return abgroup.present(names, rels)


# --------------------------------------------------------------------------
# sheaves


@dataclass(frozen=True)
class FreeGluing:
    perm: tuple[int, ...]
    units: tuple[tuple[int, ...], ...]  # chart-j coordinate vectors


@dataclass(frozen=True)
class ConcreteGluing:
    source: asets.LocalizedASet
    target: asets.LocalizedASet
    map: dict  # element of M_i (stable image) -> element of M_j (stable image)


class QCSheaf:
    """Quasi-coherent sheaf given by chart data and gluing isomorphisms."""

    def __init__(self, atlas: SchemeAtlas, kind: str, charts: Sequence, gluing: dict, check: bool = True):
        if kind not in ("free", "concrete"):
            raise SchemeError(f"unknown sheaf kind {kind!r}")
        self.atlas = atlas
        self.kind = kind
        self.charts = tuple(charts)
        self.gluing = dict(gluing)
        if len(self.charts) != atlas.n_charts:
            raise SchemeError("one chart datum per chart is required")
        if check:
            self._validate()

    @property
    def rank(self) -> int | None:
        return self.charts[0] if self.kind == "free" else None

    # gluing in both directions --------------------------------------------
    def glue(self, i: int, j: int):
        if (i, j) in self.gluing:
            return self.gluing[(i, j)]
        if self.kind == "free":
            g = self.gluing[(j, i)]
            r = len(g.perm)
            perm = [0] * r
            units = [None] * r
            for k in range(r):
                perm[g.perm[k]] = k
                # m_k -> u m'_s  gives  m'_s -> (phi_ji u)^{-1} m_k
                back = self.atlas.transport(j, i, g.units[k])
                units[g.perm[k]] = self.atlas.charts[i]._reduce_torsion(tuple(-x for x in back))
            return FreeGluing(tuple(perm), tuple(units))
        g = self.gluing[(j, i)]
        return ConcreteGluing(g.target, g.source, {v: k for k, v in g.map.items()})

    def _validate(self) -> None:
        X = self.atlas
        if self.kind == "free":
            r = self.charts[0]
            if any(c != r for c in self.charts):
                raise SchemeError("a free sheaf has one rank on every chart")
            for (i, j) in X.pairs():
                if (i, j) not in self.gluing:
                    raise GluingError(i, j, "missing gluing")
                g = self.gluing[(i, j)]
                if sorted(g.perm) != list(range(r)) or len(g.units) != r:
                    raise GluingError(i, j, "gluing must permute the basis")
                for u in g.units:
                    if not X.is_local_unit(j, i, u):
                        raise GluingError(i, j, f"coefficient {list(u)} is not a unit on the overlap")
            for i, j, k in X.triples():
                gij, gjk, gik = self.glue(i, j), self.glue(j, k), self.glue(i, k)
                B = X.charts[k]
                for b in range(r):
                    if gjk.perm[gij.perm[b]] != gik.perm[b]:
                        raise SchemeError(f"cocycle fails on ({i}, {j}, {k}) for basis element {b}")
                    lhs = B._reduce_torsion(
                        tuple(x + y for x, y in zip(X.transport(j, k, gij.units[b]), gjk.units[gij.perm[b]]))
                    )
                    if lhs != B._reduce_torsion(tuple(gik.units[b])):
                        raise SchemeError(f"cocycle fails on ({i}, {j}, {k}) for basis element {b}")
            return
        for i, M in enumerate(self.charts):
            if M.monoid is not X.charts[i]:
                raise SchemeError(f"chart {i} data is over the wrong monoid")
        for (i, j) in X.pairs():
            if (i, j) not in self.gluing:
                raise GluingError(i, j, "missing gluing")
            self._check_concrete_gluing(i, j, self.gluing[(i, j)])
        for i, j, k in X.triples():
            gij, gjk, gik = self.glue(i, j), self.glue(j, k), self.glue(i, k)
            fij, fik = X.overlaps[(i, j)].f, X.overlaps[(i, k)].f
            M = self.charts[i]
            stable, _ = asets._stable_image(M, M.element_map(X.charts[i].mul(fij, fik)))
            for x in stable:
                if gjk.map[gij.map[x]] != gik.map[x]:
                    raise SchemeError(f"cocycle fails on ({i}, {j}, {k}) at element {x}")

    def _check_concrete_gluing(self, i: int, j: int, g: ConcreteGluing) -> None:
        X = self.atlas
        src, dst = g.source, g.target
        if sorted(g.map) != list(src.elements):
            raise GluingError(i, j, "gluing must be defined on the whole localization")
        if sorted(g.map.values()) != list(dst.elements):
            raise GluingError(i, j, "gluing is not a bijection of localizations")
        Li = X.overlaps[(i, j)].loc
        Lj = X.overlaps[(j, i)].loc
        for gen, act in zip(Li.monoid.generators, src.aset.actions):
            v = Li.from_local(gen)
            image = Lj.to_local(X.transport(i, j, v))
            dst_map = dst.aset.element_map(image)
            for pos, x in enumerate(src.elements):
                y = src.elements[act[pos]]
                lhs = g.map[y]
                rhs = dst.elements[dst_map[dst.elements.index(g.map[x])]]
                if lhs != rhs:
                    raise GluingError(i, j, f"gluing is not compatible with phi at element {x}")

    # properties ----------------------------------------------------------
    def is_coherent(self) -> bool:
        return True

    def is_locally_projective(self) -> bool:
        if self.kind == "free":
            return True
        return all(asets.is_projective(M) for M in self.charts)

    def is_locally_free(self) -> bool:
        return self.kind == "free"

    def to_dict(self) -> dict:
        X = self.atlas
        if self.kind == "free":
            return {
                "chart_data": [{"free": r} for r in self.charts],
                "gluing": [
                    {"i": i, "j": j, "psi": [{"to": g.perm[k], "unit": list(g.units[k])} for k in range(len(g.perm))]}
                    for (i, j), g in sorted(self.gluing.items())
                ],
            }
        return {
            "chart_data": [M.to_dict() for M in self.charts],
            "gluing": [{"i": i, "j": j, "psi": {str(k): v for k, v in sorted(g.map.items())}} for (i, j), g in sorted(self.gluing.items())],
        }


def free_sheaf(X: SchemeAtlas, rank: int, gluing: dict) -> QCSheaf:
    """``gluing[(i, j)]`` is a list of ``(target index, unit vector)`` pairs."""
    data = {}
    for (i, j), entries in gluing.items():
        perm = tuple(int(t) for t, _ in entries)
        units = tuple(tuple(int(x) for x in u) for _, u in entries)
        data[(i, j)] = FreeGluing(perm, units)
    return QCSheaf(X, "free", [rank] * X.n_charts, data)


def concrete_sheaf(X: SchemeAtlas, charts: Sequence[asets.ASet], gluing: dict) -> QCSheaf:
    """``gluing[(i, j)]`` maps stable-image elements of chart ``i`` to chart ``j``."""
    data = {}
    for (i, j), mapping in gluing.items():
        src = asets.localize_aset(charts[i], [X.overlaps[(i, j)].f], X.overlaps[(i, j)].loc)
        dst = asets.localize_aset(charts[j], [X.overlaps[(j, i)].f], X.overlaps[(j, i)].loc)
        if isinstance(mapping, dict):
            m = {int(k): int(v) for k, v in mapping.items()}
        else:
            m = {x: int(v) for x, v in zip(src.elements, mapping)}
        data[(i, j)] = ConcreteGluing(src, dst, m)
    return QCSheaf(X, "concrete", charts, data)


def structure_sheaf(X: SchemeAtlas) -> QCSheaf:
    return twisted(X, 0) if X.projective_dim is not None else free_sheaf(
        X, 1, {(i, j): [(0, (0,) * X.charts[j].dim)] for (i, j) in X.pairs()}
    )


def _twist_unit(X: SchemeAtlas, i: int, j: int, l: int) -> tuple:
    # O(l): m_i = (X_i / X_j)^l m_j, and X_i/X_j is a coordinate of chart j
    pos = X._proj_coords[j].index(i)
    u = [0] * X.charts[j].dim
    u[pos] = l
    return tuple(u)


def twisted(X: SchemeAtlas, l: int) -> QCSheaf:
    """``O(l)`` on a projective space."""
    if X.projective_dim is None:
        raise UnsupportedError("twisting sheaves are defined on projective spaces")
    return free_sheaf(X, 1, {(i, j): [(0, _twist_unit(X, i, j, l))] for (i, j) in X.pairs()})


def wedge_sheaves(*parts: QCSheaf) -> QCSheaf:
    X = parts[0].atlas
    kinds = {p.kind for p in parts}
    if len(kinds) != 1:
        raise UnsupportedError("wedge of free and concrete sheaves")
    if parts[0].kind == "free":
        gluing = {}
        for (i, j) in X.pairs():
            perm, units, off = [], [], 0
            for p in parts:
                g = p.glue(i, j)
                perm.extend(off + t for t in g.perm)
                units.extend(g.units)
                off += p.rank
            gluing[(i, j)] = FreeGluing(tuple(perm), tuple(units))
        return QCSheaf(X, "free", [sum(p.rank for p in parts)] * X.n_charts, gluing)
    charts, injections = [], []
    for c in range(X.n_charts):
        W = asets.wedge(*[p.charts[c] for p in parts])
        charts.append(W.aset)
        injections.append(W.injections)
    gluing = {}
    for (i, j) in X.pairs():
        mapping = {0: 0}
        for k, p in enumerate(parts):
            g = p.glue(i, j)
            for x, y in g.map.items():
                mapping[injections[i][k].map[x]] = injections[j][k].map[y]
        gluing[(i, j)] = mapping
    return concrete_sheaf(X, charts, gluing)


def tensor_free(F: QCSheaf, G: QCSheaf) -> QCSheaf:
    """Chartwise tensor of free sheaves: basis pairs, units add."""
    if F.kind != "free" or G.kind != "free":
        raise UnsupportedError("tensor is implemented for free sheaves")
    X = F.atlas
    gluing = {}
    for (i, j) in X.pairs():
        f, g = F.glue(i, j), G.glue(i, j)
        perm, units = [], []
        for a in range(F.rank):
            for b in range(G.rank):
                perm.append(f.perm[a] * G.rank + g.perm[b])
                units.append(X.charts[j]._reduce_torsion(tuple(x + y for x, y in zip(f.units[a], g.units[b]))))
        gluing[(i, j)] = FreeGluing(tuple(perm), tuple(units))
    return QCSheaf(X, "free", [F.rank * G.rank] * X.n_charts, gluing)


# --------------------------------------------------------------------------
# sheaf morphisms


@dataclass(frozen=True, eq=False)
class SheafMorphism:
    source: QCSheaf
    target: QCSheaf
    charts: tuple  # free: per chart tuple of (target index or None, coefficient); concrete: ASetMorphism


def _free_apply(X: SchemeAtlas, i: int, j: int, G: QCSheaf, target: int | None, coeff) -> tuple | None:
    # transport coeff * n_target from chart i to chart j through G's gluing
    if target is None:
        return None
    g = G.glue(i, j)
    B = X.charts[j]
    v = B._reduce_torsion(tuple(x + y for x, y in zip(X.transport(i, j, coeff), g.units[target])))
    return (g.perm[target], v)


def check_sheaf_morphism(F: QCSheaf, G: QCSheaf, chart_maps: Sequence) -> SheafMorphism:
    X = F.atlas
    if G.atlas is not X or F.kind != G.kind:
        raise SchemeError("sheaves live on different atlases or have different kinds")
    if len(chart_maps) != X.n_charts:
        raise SchemeError("one chart map per chart is required")
    if F.kind == "free":
        maps = []
        for i, cm in enumerate(chart_maps):
            A = X.charts[i]
            entries = []
            for t, c in cm:
                if t is None or c is None:
                    entries.append((None, None))
                    continue
                c = A.canonical(tuple(c))
                entries.append((None, None) if c is ZERO else (int(t), c))
            if len(entries) != F.rank:
                raise SchemeError(f"chart {i}: one image per basis element is required")
            maps.append(tuple(entries))
        for (i, j) in X.pairs():
            fg = F.glue(i, j)
            Lj = X.overlaps[(j, i)].loc
            for k in range(F.rank):
                lhs = _free_apply(X, i, j, G, *maps[i][k])
                t, c = maps[j][fg.perm[k]]
                rhs = None
                if t is not None:
                    v = X.charts[j]._reduce_torsion(tuple(x + y for x, y in zip(fg.units[k], c)))
                    rhs = (t, v)
                norm = lambda e: None if e is None else (e[0], Lj.to_local(e[1]))
                if norm(lhs) != norm(rhs):
                    raise GluingError(i, j, f"morphism does not commute with gluing at basis element {k}")
        return SheafMorphism(F, G, tuple(maps))
    maps = []
    for i, cm in enumerate(chart_maps):
        if isinstance(cm, asets.ASetMorphism):
            cm = cm.map
        maps.append(asets.check_morphism(F.charts[i], G.charts[i], cm))
    for (i, j) in X.pairs():
        fg, gg = F.glue(i, j), G.glue(i, j)
        for x in fg.source.elements:
            if gg.map[maps[i].map[x]] != maps[j].map[fg.map[x]]:
                raise GluingError(i, j, f"morphism does not commute with gluing at element {x}")
    return SheafMorphism(F, G, tuple(maps))


@dataclass(frozen=True)
class SheafNormality:
    normal: bool
    chart: int | None = None
    witness: tuple | None = None

    def __bool__(self) -> bool:
        return self.normal


def sheaf_morphism_is_normal(phi: SheafMorphism) -> SheafNormality:
    """Chartwise normality."""
    if phi.source.kind == "free":
        for i, entries in enumerate(phi.charts):
            seen = {}
            for k, (t, _) in enumerate(entries):
                if t is None:
                    continue
                if t in seen:
                    # a = c_k' and a' = c_k give a*c_k == a'*c_k' in the same fibre
                    return SheafNormality(False, i, (seen[t], k))
                seen[t] = k
        return SheafNormality(True)
    for i, f in enumerate(phi.charts):
        res = asets.is_normal(f)
        if not res:
            return SheafNormality(False, i, res.witness)
    return SheafNormality(True)


def sheaf_kernel(phi: SheafMorphism) -> QCSheaf:
    """Chartwise kernel of a morphism of concrete sheaves, glued by restriction."""
    if phi.source.kind != "concrete":
        raise UnsupportedError("chartwise kernels are implemented for concrete sheaves")
    F = phi.source
    X = F.atlas
    subs = [asets.kernel(f) for f in phi.charts]
    gluing = {}
    for (i, j) in X.pairs():
        g = F.glue(i, j)
        pos_i = {x: k for k, x in enumerate(subs[i].elements)}
        pos_j = {x: k for k, x in enumerate(subs[j].elements)}
        mapping = {}
        for x, y in g.map.items():
            if x in pos_i:
                if y not in pos_j:
                    raise SchemeError("kernel does not glue")
                mapping[pos_i[x]] = pos_j[y]
        gluing[(i, j)] = mapping
    return concrete_sheaf(X, [s.aset for s in subs], gluing)


# --------------------------------------------------------------------------
# isomorphism and splitting of free sheaves


def _charts_have_trivial_units(X: SchemeAtlas) -> bool:
    return all(A.b == 0 and not A.torsion for A in X.charts)


def find_free_isomorphism(F: QCSheaf, G: QCSheaf) -> tuple[tuple[int, ...], ...] | None:
    """Chart permutations ``pi_i`` with ``G``'s gluing equal to ``F``'s transported."""
    X = F.atlas
    if F.kind != "free" or G.kind != "free" or F.rank != G.rank:
        return None
    r = F.rank
    if X.n_charts == 1:
        return (tuple(range(r)),)
    if not _charts_have_trivial_units(X):
        raise UnsupportedError("isomorphism search needs charts without units")
    for pi0 in itertools.permutations(range(r)):
        pis = [None] * X.n_charts
        pis[0] = pi0
        ok = True
        for j in range(1, X.n_charts):
            if (0, j) not in X.overlaps:
                ok = False
                break
            fg, gg = F.glue(0, j), G.glue(0, j)
            pj = [None] * r
            for k in range(r):
                if fg.units[k] != gg.units[pi0[k]]:
                    ok = False
                    break
                pj[fg.perm[k]] = gg.perm[pi0[k]]
            if not ok:
                break
            pis[j] = tuple(pj)
        if not ok:
            continue
        if all(_free_compatible(F, G, pis, i, j) for (i, j) in X.pairs()):
            return tuple(pis)
    return None


def _free_compatible(F, G, pis, i, j) -> bool:
    fg, gg = F.glue(i, j), G.glue(i, j)
    for k in range(F.rank):
        if pis[j][fg.perm[k]] != gg.perm[pis[i][k]] or fg.units[k] != gg.units[pis[i][k]]:
            return False
    return True


def split_line_bundles_p1(M: QCSheaf) -> list[int]:
    """Twists ``l_1 >= ... >= l_r`` with ``M = O(l_1) v ... v O(l_r)``."""
    X = M.atlas
    if X.projective_dim != 1:
        raise UnsupportedError("splitting is implemented on the projective line")
    if M.kind != "free":
        raise SchemeError("sheaf is not locally free")
    g = M.glue(0, 1)
    twists = sorted((u[0] for u in g.units), reverse=True)
    W = wedge_sheaves(*[twisted(X, l) for l in twists])
    if find_free_isomorphism(M, W) is None:
        raise AssertionError("reassembled wedge is not isomorphic to the input")
    return twists


def decompose_into_line_bundles(X: SchemeAtlas, M: QCSheaf) -> list[abgroup.GroupElement]:
    """Pic classes of the line bundles traced through the generic stalk."""
    if not X.is_integral:
        raise UnsupportedError("scheme is not integral with a unique generic point")
    if M.kind != "free":
        raise SchemeError("sheaf is not locally free")
    pic = picard_group(X)
    out = []
    for b in range(M.rank):
        # the basis element b of chart 0 spans a line through the generic stalk
        idx = [None] * X.n_charts
        idx[0] = b
        for j in range(1, X.n_charts):
            if (0, j) not in X.overlaps:
                raise UnsupportedError("chart 0 must meet every other chart")
            idx[j] = M.glue(0, j).perm[b]
        cocycle = {}
        for (i, j) in X.pairs():
            g = M.glue(i, j)
            if g.perm[idx[i]] != idx[j]:
                raise AssertionError("generic-stalk lines do not glue")
            cocycle[(i, j)] = X.transport(j, i, g.units[idx[i]])
        out.append(pic.class_of_cocycle(cocycle))
    return out


def line_bundle_class(X: SchemeAtlas, L: QCSheaf) -> abgroup.GroupElement:
    if L.kind != "free" or L.rank != 1:
        raise SchemeError("not a line bundle")
    return decompose_into_line_bundles(X, L)[0]


def twist_of_class(X: SchemeAtlas, c: abgroup.GroupElement) -> int:
    """Integer ``l`` with ``c = [O(l)]`` on a projective space."""
    o1 = line_bundle_class(X, twisted(X, 1))
    sol = c.group.solve([o1], c)
    if sol is None:
        raise SchemeError("class is not a multiple of O(1)")
    return sol[0]


# --------------------------------------------------------------------------
# base extension


@dataclass(frozen=True)
class SchemeZPresentation:
    charts: tuple[RingPresentation, ...]
    gluings: tuple[dict, ...]

    def to_dict(self) -> dict:
        return {"charts": [c.to_dict() for c in self.charts], "gluings": list(self.gluings)}


def emit_scheme_zpresentation(X: SchemeAtlas) -> SchemeZPresentation:
    pres = tuple(emit_zring_presentation(A) for A in X.charts)
    glue = []
    for (i, j) in sorted(X.overlaps):
        A, B = X.charts[i], X.charts[j]
        ov = X.overlaps[(i, j)]
        images = {}
        for k, nm in enumerate(A.coord_names):
            e = [0] * A.dim
            e[k] = 1
            img = X.transport(i, j, e)
            images[nm] = {B.coord_names[c]: x for c, x in enumerate(img) if x}
        glue.append({"i": i, "j": j, "invert": {A.coord_names[c]: x for c, x in enumerate(ov.f) if x}, "images": images})
    return SchemeZPresentation(pres, tuple(glue))
