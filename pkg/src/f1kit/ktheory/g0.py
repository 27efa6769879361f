"""Truncated G0 of the projective line and the image of K0 of projective spaces.

A finite coherent sheaf on P^1 is stored as the action of ``T1`` on the
chart-0 carrier, the action of ``T2`` on the chart-1 carrier and the
gluing bijection between their stable images.  Carriers are ``0..n`` with
``0`` the base point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .. import abgroup
from .. import aset as asets
from .. import scheme as sch
from ..monoid import UnsupportedError
from .grothendieck import K0Report, grothendieck_group


@dataclass(frozen=True, order=True)
class FiniteSheaf:
    t0: tuple[int, ...]
    t1: tuple[int, ...]
    psi: tuple[tuple[int, int], ...]

    @property
    def size(self) -> int:
        return len(self.t0) + len(self.t1) - 2

    def label(self) -> str:
        if self == SKY_INF:
            return "K"
        if self == SKY_ZERO:
            return "K0"
        cyc = _cycle_length(self)
        if cyc:
            return f"C{cyc}"
        a = "".join(map(str, self.t0))
        b = "".join(map(str, self.t1))
        p = "".join(f"{x}{y}" for x, y in self.psi)
        return f"F[{a}|{b}|{p}]"


def _stable(t: tuple[int, ...]) -> frozenset[int]:
    cur = set(range(len(t)))
    while True:
        nxt = {t[x] for x in cur}
        if nxt == cur:
            return frozenset(cur)
        cur = nxt


@lru_cache(maxsize=None)
def _canon_action(t: tuple[int, ...]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Lexicographically least relabelling of a pointed self-map, and the relabelling used."""
    n = len(t)
    best = None
    for perm in itertools.permutations(range(1, n)):
        p = (0,) + perm  # old -> new
        inv = [0] * n
        for old, new in enumerate(p):
            inv[new] = old
        enc = tuple(p[t[inv[x]]] for x in range(n))
        if best is None or enc < best[0]:
            best = (enc, p)
    return best


@lru_cache(maxsize=None)
def _automorphisms(t: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
    n = len(t)
    out = []
    for perm in itertools.permutations(range(1, n)):
        p = (0,) + perm
        if all(p[t[x]] == t[p[x]] for x in range(n)):
            out.append(p)
    return tuple(out)


def _canon_sheaf(t0, t1, psi: dict) -> FiniteSheaf:
    c0, p0 = _canon_action(tuple(t0))
    c1, p1 = _canon_action(tuple(t1))
    moved = {p0[x]: p1[y] for x, y in psi.items()}
    best = None
    for a in _automorphisms(c0):
        for b in _automorphisms(c1):
            enc = tuple(sorted((a[x], b[y]) for x, y in moved.items()))
            if best is None or enc < best:
                best = enc
    return FiniteSheaf(c0, c1, best)


def _gluings(t0, t1):
    s0 = sorted(_stable(t0) - {0})
    s1 = sorted(_stable(t1) - {0})
    if len(s0) != len(s1):
        return
    for perm in itertools.permutations(s1):
        psi = dict(zip(s0, perm))
        if all(t1[psi[t0[x]]] == psi[x] for x in s0):
            yield psi


def _pointed_maps(n: int):
    seen = set()
    for tail in itertools.product(range(n + 1), repeat=n):
        c, _ = _canon_action((0,) + tail)
        if c not in seen:
            seen.add(c)
            yield c


def _cycle_length(F: FiniteSheaf) -> int:
    """n if F is the single n-cycle glued to itself, else 0."""
    n = len(F.t0) - 1
    if n == 0 or len(F.t1) != n + 1 or _stable(F.t0) != frozenset(range(n + 1)):
        return 0
    x, seen = 1, set()
    while x not in seen:
        seen.add(x)
        x = F.t0[x]
    return n if len(seen) == n and x == 1 else 0


def _torsion(a: int, b: int) -> FiniteSheaf:
    """O / O(-a-b): chart data F1[T1]/(T1^a) and F1[T2]/(T2^b)."""
    # carrier 1..a stands for 1, T1, ..., T1^{a-1}
    t0 = tuple([0] + [k + 1 if k + 1 <= a else 0 for k in range(1, a + 1)])
    t1 = tuple([0] + [k + 1 if k + 1 <= b else 0 for k in range(1, b + 1)])
    return _canon_sheaf(t0, t1, {})


SKY_INF = None  # set below
SKY_ZERO = None


def finite_sheaves(bound: int) -> list[FiniteSheaf]:
    """Iso classes of nonzero finite coherent sheaves with chart carriers of at most ``bound`` non-base points."""
    out = set()
    for n0 in range(bound + 1):
        maps0 = list(_pointed_maps(n0))
        for n1 in range(bound + 1):
            if n0 == n1 == 0:
                continue
            for c0 in maps0:
                for c1 in _pointed_maps(n1):
                    for psi in _gluings(c0, c1):
                        out.add(_canon_sheaf(c0, c1, psi))
    return sorted(out, key=lambda F: (F.size, F))


def _restrict(t, elems):
    index = {x: i for i, x in enumerate(elems)}
    return tuple(index[t[x]] for x in elems), index


def _subsets(t):
    n = len(t)
    out = []
    for r in range(n):
        for combo in itertools.combinations(range(1, n), r):
            s = (0,) + combo
            if all(t[x] in s for x in s):
                out.append(s)
    return out


def _collapse(t, sub):
    sub = set(sub)
    rest = [0] + [x for x in range(1, len(t)) if x not in sub]
    index = {x: i for i, x in enumerate(rest)}
    return tuple(0 if t[x] in sub else index[t[x]] for x in rest), index


def subsheaf_sequences(F: FiniteSheaf):
    """All ``(K, Q)`` with ``0 -> K -> F -> Q -> 0`` admissible and K, Q nonzero."""
    psi = dict(F.psi)
    s0, s1 = _stable(F.t0), _stable(F.t1)
    for k0 in _subsets(F.t0):
        for k1 in _subsets(F.t1):
            if {psi[x] for x in k0 if x in s0 and x} != {y for y in k1 if y in s1 and y}:
                continue
            if len(k0) + len(k1) == 2 or (len(k0) == len(F.t0) and len(k1) == len(F.t1)):
                continue
            r0, i0 = _restrict(F.t0, k0)
            r1, i1 = _restrict(F.t1, k1)
            K = _canon_sheaf(r0, r1, {i0[x]: i1[psi[x]] for x in k0 if x in s0 and x})
            q0, j0 = _collapse(F.t0, k0)
            q1, j1 = _collapse(F.t1, k1)
            Q = _canon_sheaf(q0, q1, {j0[x]: j1[psi[x]] for x in s0 if x and x not in k0})
            yield K, Q


def as_qcsheaf(X: sch.SchemeAtlas, F: FiniteSheaf) -> sch.QCSheaf:
    """The finite sheaf as a validated concrete sheaf on ``X = P^1``."""
    M0 = asets.ASet(X.charts[0], [list(F.t0)])
    M1 = asets.ASet(X.charts[1], [list(F.t1)])
    psi = dict(F.psi)
    psi[0] = 0
    return sch.concrete_sheaf(X, [M0, M1], {(0, 1): psi})


SKY_INF = _torsion(0, 1)
SKY_ZERO = _torsion(1, 0)


def _line(l: int) -> str:
    return f"O({l})"


@dataclass
class G0Certificate:
    predicted_rank: int
    rank: int
    free: bool
    twist_relations: tuple[int, ...]
    total_rank: int
    predicted_total_rank: int

    @property
    def ok(self) -> bool:
        return self.free and self.rank == self.predicted_rank and self.total_rank == self.predicted_total_rank

    def to_dict(self) -> dict:
        return {
            "predicted_rank": self.predicted_rank,
            "rank": self.rank,
            "free": self.free,
            "twist_relations": list(self.twist_relations),
            "total_rank": self.total_rank,
            "predicted_total_rank": self.predicted_total_rank,
            "ok": self.ok,
        }


def g0_p1_truncated(bound: int) -> tuple[K0Report, G0Certificate]:
    """G0(P^1) on the family of twists ``|l| <= bound`` and finite sheaves with carriers ``<= bound``."""
    if bound < 2:
        raise ValueError("bound must be at least 2")
    finite = finite_sheaves(bound)
    known = set(finite)
    lines = [_line(l) for l in range(-bound, bound + 1)]
    labels = lines + [F.label() for F in finite]
    relations, log = [], []
    for F in finite:
        for K, Q in subsheaf_sequences(F):
            if K not in known or Q not in known:
                raise AssertionError("sub or quotient left the family")
            relations.append((F.label(), K.label(), Q.label()))
            log.append({"middle": F.label(), "sub": K.label(), "quotient": Q.label()})
    for l in range(-bound, bound + 1):
        for a in range(bound + 1):
            for b in range(bound + 1):
                if a + b == 0 or abs(l - a - b) > bound:
                    continue
                T = _torsion(a, b)
                rec = {"middle": _line(l), "sub": _line(l - a - b), "quotient": T.label()}
                if (a, b) == (0, 1):
                    rec["twist"] = l
                relations.append((_line(l), _line(l - a - b), T.label()))
                log.append(rec)
    rep = grothendieck_group(labels, relations, log)
    rep.truncated = True
    rep.basis = ("O(0)", "O(1)", "K") + tuple(f"C{n}" for n in range(1, bound + 1))
    rep.extra["bound"] = bound
    rep.extra["family_size"] = len(labels)

    G = rep.group
    twists = tuple(sorted(r["twist"] for r in log if "twist" in r and abs(r["twist"]) <= bound - 1))
    gens = [rep.class_of("O(0)"), rep.class_of("O(1)")] + [rep.class_of("K") for _ in twists]
    sub = G.subgroup(gens)
    # every K(m) is the skyscraper at the point at infinity of chart 1
    cert = G0Certificate(
        predicted_rank=2,
        rank=sub.free_rank,
        free=not sub.torsion,
        twist_relations=twists,
        total_rank=G.free_rank if not G.torsion else -1,
        predicted_total_rank=2 + bound,
    )
    rep.extra["certificate"] = cert.to_dict()
    return rep, cert


# --------------------------------------------------------------------------
# projective spaces


def _pn_label(k: int, m: int) -> str:
    return f"O_P{k}({m})"


@dataclass
class ImageCertificate:
    n: int
    bound: int
    rank: int
    coefficients: dict[int, tuple[int, ...]]
    residual_zero: bool
    report: K0Report

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "bound": self.bound,
            "rank": self.rank,
            "basis": [f"O({k})" for k in range(self.n + 1)],
            "coefficients": {f"O({l})": list(c) for l, c in sorted(self.coefficients.items())},
            "residual_zero": self.residual_zero,
        }


def k0_image_in_g0_pn(n: int, bound: int) -> ImageCertificate:
    """Reduce every ``O(l)``, ``|l| <= bound``, to ``O, ..., O(n)``.

    Relations: ``O(m) = O(m-1) + K(m)`` on each linear subspace ``P^k``,
    where ``K(m)`` is the twist of a hyperplane ``P^{k-1}``; on ``P^0``
    all twists agree.
    """
    if n < 1 or bound < n + 1:
        raise ValueError("need n >= 1 and bound >= n + 1")
    ms = range(-bound, bound + 1)
    labels = [_pn_label(k, m) for k in range(n + 1) for m in ms]
    rels, log = [], []
    for m in ms:
        if m:
            rels.append((_pn_label(0, m), _pn_label(0, 0), None))
            log.append({"middle": _pn_label(0, m), "sub": _pn_label(0, 0), "quotient": None})
    for k in range(1, n + 1):
        for m in ms:
            if m - 1 < -bound:
                continue
            rels.append((_pn_label(k, m), _pn_label(k, m - 1), _pn_label(k - 1, m)))
            log.append({"middle": _pn_label(k, m), "sub": _pn_label(k, m - 1), "quotient": _pn_label(k - 1, m)})
    rep = grothendieck_group(labels, rels, log)
    rep.truncated = True
    rep.basis = tuple(_pn_label(n, k) for k in range(n + 1))
    G = rep.group
    basis = [rep.class_of(b) for b in rep.basis]
    image = G.subgroup([rep.class_of(_pn_label(n, l)) for l in ms])
    coeffs, residual = {}, True
    for l in ms:
        target = rep.class_of(_pn_label(n, l))
        sol = G.solve(basis, target)
        if sol is None:
            residual = False
            continue
        coeffs[l] = tuple(sol)
        back = G.zero()
        for c, b in zip(sol, basis):
            back = back + c * b
        residual = residual and (back - target).is_zero()
    rank = image.free_rank if not image.torsion else -1
    return ImageCertificate(n, bound, rank, coeffs, residual and len(coeffs) == len(ms), rep)


# --------------------------------------------------------------------------
# finite A-sets over a single monoid


def finite_asets(A, bound: int, limit: int = 10**6) -> list[asets.ASet]:
    """Iso classes of A-sets with at most ``bound`` non-base points."""
    gens = len(A.generators)
    if sum((n + 1) ** (n * gens) for n in range(bound + 1)) > limit:
        raise UnsupportedError("too many candidate actions at this bound")
    found: list[asets.ASet] = []
    buckets: dict = {}
    for n in range(bound + 1):
        maps = [(0,) + tail for tail in itertools.product(range(n + 1), repeat=n)]
        for acts in itertools.product(maps, repeat=gens):
            try:
                M = asets.ASet(A, acts) if gens else asets.ASet.trivial_action(A, n + 1)
            except asets.ASetError:
                continue
            key = asets.invariant_key(M)
            if any(asets.is_isomorphic(M, N) for N in buckets.get(key, [])):
                continue
            buckets.setdefault(key, []).append(M)
            found.append(M)
    return found


def g0_affine_truncated(A, bound: int) -> K0Report:
    """G0 of finite A-sets with at most ``bound`` non-base points."""
    family = [M for M in finite_asets(A, bound) if M.size > 1]
    labels = [f"M{i}[" + ";".join(",".join(map(str, a)) for a in M.actions) + "]" for i, M in enumerate(family)]
    buckets: dict = {}
    for i, M in enumerate(family):
        buckets.setdefault(asets.invariant_key(M), []).append(i)

    def find(M):
        if M.size == 1:
            return None
        for i in buckets.get(asets.invariant_key(M), []):
            if asets.is_isomorphic(family[i], M):
                return labels[i]
        raise AssertionError("sub-A-set left the family")

    rels, log = [], []
    for lab, M in zip(labels, family):
        for s in asets.sub_asets(M):
            if len(s) in (1, M.size):
                continue
            a = find(asets.sub_aset(M, s).aset)
            c = find(asets.collapse(M, s).aset)
            rels.append((lab, a, c))
            log.append({"middle": lab, "sub": a, "quotient": c})
    rep = grothendieck_group(labels, rels, log)
    rep.truncated = True
    rep.extra["bound"] = bound
    return rep
