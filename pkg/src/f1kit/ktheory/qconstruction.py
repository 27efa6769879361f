"""A finite piece of the Q-construction and the fundamental group of its nerve.

Objects are A-sets from a family closed under admissible subobjects and
quotients.  A morphism ``M -> N`` is a span ``M <<- S >-> N`` up to
isomorphism; it is recorded as the sub-A-set ``S`` of ``N`` together with
the admissible epi ``q: S -> M``.
"""

from __future__ import annotations

import itertools
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .. import abgroup
from .. import aset as asets
from ..monoid import F1, Monoid, UnsupportedError, idempotents
from .grothendieck import K0Report, grothendieck_group

log = logging.getLogger(__name__)


class QuasiExactError(ValueError):
    """The family is not closed under the operations the Q-construction needs."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True, order=True)
class Span:
    source: int
    target: int
    sub: tuple[int, ...]
    q: tuple[int, ...]  # q[k] is the image in the source object of sub[k]

    @property
    def is_identity_like(self) -> bool:
        return self.source == self.target and self.q == self.sub


@dataclass
class QNerve:
    objects: list[asets.ASet]
    labels: list[str]
    morphisms: list[Span]
    identities: list[int]
    triangles: list[tuple[int, int, int]]  # (f, g, g o f)
    tree: list[int] = field(default_factory=list)
    associative: bool = True
    triples_checked: int = 0

    def to_dict(self) -> dict:
        return {
            "vertices": self.labels,
            "edges": [[m.source, m.target, _span_label(m)] for m in self.morphisms],
            "triangles": [list(t) for t in self.triangles],
            "spanning_tree": self.tree,
        }


def _span_label(m: Span) -> str:
    return "S=" + ",".join(map(str, m.sub)) + ";q=" + ",".join(map(str, m.q))


class _Family:
    """Iso-class lookup among the objects."""

    def __init__(self, objects: Sequence[asets.ASet]):
        self.objects = list(objects)
        self._buckets: dict = {}
        self._cache: dict = {}
        for i, M in enumerate(self.objects):
            self._buckets.setdefault(asets.invariant_key(M), []).append(i)
        for bucket in self._buckets.values():
            for a, b in itertools.combinations(bucket, 2):
                if asets.is_isomorphic(self.objects[a], self.objects[b]):
                    raise QuasiExactError("family contains isomorphic objects", (a, b))

    def find(self, M: asets.ASet) -> int | None:
        key = M.encoding
        if key in self._cache:
            return self._cache[key]
        out = None
        for i in self._buckets.get(asets.invariant_key(M), []):
            if asets.is_isomorphic(self.objects[i], M):
                out = i
                break
        self._cache[key] = out
        return out


def build_q_category(objects: Sequence[asets.ASet], labels: Sequence[str] | None = None, check: bool = True) -> QNerve:
    """Enumerate all spans between the objects and all composable pairs."""
    if not objects:
        raise ValueError("empty family")
    A = objects[0].monoid
    if any(M.monoid is not A for M in objects):
        raise ValueError("objects must share a monoid")
    fam = _Family(objects)
    labels = list(labels) if labels is not None else [f"M{i}" for i in range(len(objects))]
    auts = [asets.automorphisms(M) for M in objects]

    # admissible subobjects of every object: S and N/S both in the family
    subs: list[list[tuple[tuple[int, ...], asets.ASet]]] = []
    for N in objects:
        row = []
        for s in asets.sub_asets(N):
            S = asets.sub_aset(N, s).aset
            if fam.find(S) is None or fam.find(asets.collapse(N, s).aset) is None:
                continue
            row.append((s, S))
        subs.append(row)

    spans = []
    for ni, N in enumerate(objects):
        for s, S in subs[ni]:
            for k in asets.sub_asets(S):
                if fam.find(asets.sub_aset(S, k).aset) is None:
                    continue
                Q = asets.collapse(S, k)
                mi = fam.find(Q.aset)
                if mi is None:
                    continue
                M = objects[mi]
                phi0 = asets.find_isomorphism(Q.aset, M)
                for alpha in auts[mi]:
                    q = tuple(alpha[phi0.map[Q.projection.map[x]]] for x in range(len(s)))
                    spans.append(Span(mi, ni, s, q))
    spans.sort(key=lambda m: (m.source, m.target, len(m.sub), m.sub, m.q))
    index = {m: i for i, m in enumerate(spans)}
    identities = []
    for i, M in enumerate(objects):
        ident = Span(i, i, tuple(range(M.size)), tuple(range(M.size)))
        if ident not in index:
            raise QuasiExactError("identity span missing", i)
        identities.append(index[ident])

    out_of: dict[int, list[int]] = {i: [] for i in range(len(objects))}
    into: dict[int, list[int]] = {i: [] for i in range(len(objects))}
    for k, m in enumerate(spans):
        out_of[m.source].append(k)
        into[m.target].append(k)

    def compose(f: Span, g: Span) -> Span:
        fq = dict(zip(f.sub, f.q))
        pairs = [(x, fq[y]) for x, y in zip(g.sub, g.q) if y in fq]
        return Span(f.source, g.target, tuple(x for x, _ in pairs), tuple(v for _, v in pairs))

    comp: dict[tuple[int, int], int] = {}
    triangles = []
    for n in range(len(objects)):
        for fi in into[n]:
            for gi in out_of[n]:
                h = compose(spans[fi], spans[gi])
                hi = index.get(h)
                if hi is None:
                    raise QuasiExactError("composite span leaves the family", (fi, gi))
                comp[(fi, gi)] = hi
                triangles.append((fi, gi, hi))
    nerve = QNerve(list(objects), labels, spans, identities, triangles)
    if check:
        _check_pullbacks(nerve)
        _check_category(nerve, comp, out_of)
    return nerve


def _check_pullbacks(nerve: QNerve, limit: int = 200) -> None:
    # composition is a fibre product; compare with the generic pullback on a sample
    objs = nerve.objects
    checked = 0
    for fi, gi, hi in nerve.triangles:
        f, g = nerve.morphisms[fi], nerve.morphisms[gi]
        N = objs[f.target]
        i = asets.sub_aset(N, f.sub).inclusion
        S2 = asets.sub_aset(objs[g.target], g.sub).aset
        j = asets.ASetMorphism(S2, N, g.q)
        pb = asets.pullback_admissible(i, j)
        if pb.aset.size != len(nerve.morphisms[hi].sub):
            raise QuasiExactError("span composite disagrees with the pullback", (fi, gi))
        checked += 1
        if checked >= limit:
            return


def _check_category(nerve: QNerve, comp: dict, out_of: dict) -> None:
    for i, e in enumerate(nerve.identities):
        for fi in out_of[i]:
            if comp[(e, fi)] != fi:
                raise QuasiExactError("identity span is not neutral", (e, fi))
    count = 0
    for (fi, gi), fg in comp.items():
        target = nerve.morphisms[gi].target
        for hi in out_of[target]:
            count += 1
            if comp[(fg, hi)] != comp[(fi, comp[(gi, hi)])]:
                nerve.associative = False
                raise QuasiExactError("span composition is not associative", (fi, gi, hi))
    nerve.triples_checked = count


# --------------------------------------------------------------------------
# fundamental group of the nerve


@dataclass
class EdgePathGroup:
    objects: list[int]
    generators: list[int]  # edge indices outside the spanning tree
    relations: list[list[tuple[int, int]]]  # words of (generator position, +-1)
    abelianization: abgroup.FpAbelianGroup

    def to_dict(self) -> dict:
        return {
            "objects": self.objects,
            "generators": self.generators,
            "relations": [[[g, e] for g, e in w] for w in self.relations],
            "abelianization": self.abelianization.describe(),
            "abelian": self.abelianization.to_dict(),
        }


def pi1_of_classifying_space(nerve: QNerve) -> list[EdgePathGroup]:
    """Edge-path group of the 2-skeleton, one entry per connected component."""
    n = len(nerve.objects)
    adj: dict[int, list[tuple[int, int]]] = {i: [] for i in range(n)}
    ident = set(nerve.identities)
    for k, m in enumerate(nerve.morphisms):
        if k in ident:
            continue
        adj[m.source].append((m.target, k))
        adj[m.target].append((m.source, k))
    comp_of = [-1] * n
    tree: list[int] = []
    comps: list[list[int]] = []
    for root in range(n):
        if comp_of[root] != -1:
            continue
        c = len(comps)
        comp_of[root] = c
        members = [root]
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for w, k in adj[v]:
                if comp_of[w] == -1:
                    comp_of[w] = c
                    tree.append(k)
                    members.append(w)
                    queue.append(w)
        comps.append(sorted(members))
    nerve.tree = sorted(tree)
    in_tree = set(tree)
    out = []
    for c, members in enumerate(comps):
        edges = [k for k, m in enumerate(nerve.morphisms) if comp_of[m.source] == c and k not in in_tree]
        pos = {k: i for i, k in enumerate(edges)}
        words = []
        for k in edges:
            if k in ident:
                words.append([(pos[k], 1)])
        for f, g, h in nerve.triangles:
            if comp_of[nerve.morphisms[f].source] != c:
                continue
            w = [(pos[e], s) for e, s in ((f, 1), (g, 1), (h, -1)) if e in pos]
            if w:
                words.append(w)
        rows = []
        for w in words:
            row: dict[int, int] = {}
            for g, s in w:
                row[g] = row.get(g, 0) + s
            rows.append(row)
        pres = abgroup.present_sparse([f"e{k}" for k in edges], rows)
        out.append(EdgePathGroup(members, edges, words, pres.group))
    return out


# --------------------------------------------------------------------------
# families and the Grothendieck-group side of the cross-check


def pointed_sets_family(max_card: int, A: Monoid | None = None) -> tuple[list[asets.ASet], list[str]]:
    """Pointed sets of cardinality ``1..max_card`` (base point included)."""
    A = A if A is not None else F1()
    objs = [asets.pointed_set(A, k) for k in range(max_card)]
    return objs, [f"P{k}" for k in range(max_card)]


def free_family(A: Monoid, max_rank: int) -> tuple[list[asets.ASet], list[str]]:
    """Wedges of ``r`` copies of ``A`` for ``r = 0..max_rank``."""
    R = asets.regular(A)
    objs = [asets.base_point(A)] + [asets.wedge(*([R] * r)).aset for r in range(1, max_rank + 1)]
    return objs, [f"A^{r}" for r in range(max_rank + 1)]


def family_grothendieck(objects: Sequence[asets.ASet], labels: Sequence[str]) -> K0Report:
    """Grothendieck group of the family from its admissible sequences."""
    fam = _Family(objects)
    zero = fam.find(asets.base_point(objects[0].monoid))
    rels, log_ = [], []

    def lab(i):
        return None if i is None or i == zero else labels[i]

    for ni, N in enumerate(objects):
        for s in asets.sub_asets(N):
            S = asets.sub_aset(N, s)
            Q = asets.collapse(N, s)
            a, c = fam.find(S.aset), fam.find(Q.aset)
            if a is None or c is None:
                continue
            rels.append((labels[ni], lab(a), lab(c)))
            log_.append({"middle": labels[ni], "sub": lab(a), "quotient": lab(c)})
    if zero is not None:
        rels.append((labels[zero], None, None))
    return grothendieck_group(list(labels), rels, log_)


# --------------------------------------------------------------------------
# automorphisms of free A-sets


def _compose(p, q):
    return tuple(p[x] for x in q)  # p after q


def _inverse(p):
    out = [0] * len(p)
    for i, x in enumerate(p):
        out[x] = i
    return tuple(out)


def _generate(gens, ident):
    seen = {ident}
    frontier = [ident]
    while frontier:
        x = frontier.pop()
        for g in gens:
            y = _compose(g, x)
            if y not in seen:
                seen.add(y)
                frontier.append(y)
    return seen


def abelianization(elements: Sequence[tuple[int, ...]]) -> abgroup.FpAbelianGroup:
    """G/[G,G] for a permutation group given by all its elements."""
    elems = sorted(elements)
    ident = tuple(range(len(elems[0])))
    gens: list = []
    span = {ident}
    for g in elems:
        if g not in span:
            gens.append(g)
            span = _generate(gens, ident)
    comms = {_compose(_compose(a, b), _compose(_inverse(a), _inverse(b))) for a in gens for b in gens}
    normal = {_compose(_compose(h, c), _inverse(h)) for c in comms for h in elems}
    derived = _generate(list(normal), ident)

    def coset(x):
        return min(_compose(x, d) for d in derived)

    # Cayley graph of the quotient on the chosen generators
    word = {coset(ident): [0] * len(gens)}
    queue = deque([ident])
    rows = []
    while queue:
        x = queue.popleft()
        cx = coset(x)
        for k, g in enumerate(gens):
            y = _compose(g, x)
            cy = coset(y)
            step = list(word[cx])
            step[k] += 1
            if cy not in word:
                word[cy] = step
                queue.append(y)
            else:
                rows.append([a - b for a, b in zip(step, word[cy])])
    return abgroup.present([f"s{k}" for k in range(len(gens))], rows)


@dataclass
class StableAutReport:
    groups: list[abgroup.FpAbelianGroup]
    orders: list[int]
    stable: str

    def to_dict(self) -> dict:
        return {
            "abelianizations": [g.describe() for g in self.groups],
            "orders": self.orders,
            "stable_value": self.stable,
        }


def stable_aut_abelianization(A: Monoid, n_max: int, limit: int = 10**6) -> StableAutReport:
    """Aut(A v ... v A)^ab for n = 1..n_max by brute force."""
    if not A.is_finite:
        raise UnsupportedError("free A-sets of an infinite monoid are infinite")
    R = asets.regular(A)
    groups, orders = [], []
    for n in range(1, n_max + 1):
        W = asets.wedge(*([R] * n)).aset
        try:
            auts = asets.automorphisms(W, limit)
        except OverflowError:
            raise OverflowError(f"Aut of the rank {n} free A-set has more than {limit} elements") from None
        orders.append(len(auts))
        groups.append(abelianization(auts))
    stable = groups[-1].describe()
    return StableAutReport(groups, orders, stable)
