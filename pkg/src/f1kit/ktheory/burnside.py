"""Burnside rings of finite abelian groups as G0 of F1[H]."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .. import aset as asets
from ..monoid import UnsupportedError, group_monoid
from .grothendieck import K0Report, grothendieck_group


def _add(x, y, orders):
    return tuple((a + b) % d for a, b, d in zip(x, y, orders))


def _closure(gens, orders) -> frozenset:
    zero = tuple(0 for _ in orders)
    out = {zero}
    frontier = [zero]
    while frontier:
        x = frontier.pop()
        for g in gens:
            y = _add(x, g, orders)
            if y not in out:
                out.add(y)
                frontier.append(y)
    return frozenset(out)


def subgroups(orders: Sequence[int]) -> list[tuple[tuple[int, ...], ...]]:
    """All subgroups, sorted by order and then by elements."""
    elems = list(itertools.product(*(range(d) for d in orders)))
    found = {_closure([], orders)}
    frontier = list(found)
    while frontier:
        K = frontier.pop()
        for h in elems:
            if h in K:
                continue
            L = _closure(list(K) + [h], orders)
            if L not in found:
                found.add(L)
                frontier.append(L)
    return sorted((tuple(sorted(K)) for K in found), key=lambda K: (len(K), K))


def _name(K, orders) -> str:
    if len(K) == 1:
        return "H/e"
    n = 1
    for d in orders:
        n *= d
    if len(K) == n:
        return "H/H"
    gens, span = [], _closure([], orders)
    for h in K:
        if h not in span:
            gens.append(h)
            span = _closure(gens, orders)
    fmt = [str(g[0]) if len(orders) == 1 else "(" + ",".join(map(str, g)) + ")" for g in gens]
    return "H/<" + ",".join(fmt) + ">"


def coset_space(A, orders, K) -> asets.ASet:
    """``H/K`` with a base point added, as an A-set over ``F1[H]``."""
    elems = list(itertools.product(*(range(d) for d in orders)))
    Kset = set(K)
    cosets, seen = [], set()
    for h in elems:
        if h in seen:
            continue
        c = frozenset(_add(h, k, orders) for k in Kset)
        seen |= c
        cosets.append(c)
    index = {}
    for i, c in enumerate(cosets):
        for h in c:
            index[h] = i + 1
    acts = []
    for gi in range(len(orders)):
        e = tuple(int(j == gi) for j in range(len(orders)))
        acts.append([0] + [index[_add(min(c), e, orders)] for c in cosets])
    labels = ["*"] + ["+".join(map(str, min(c))) for c in cosets]
    if not acts:
        return asets.ASet.trivial_action(A, len(cosets) + 1, labels)
    return asets.ASet(A, acts, labels)


def fixed_points(M: asets.ASet, L, A) -> int:
    maps = [M.element_map(A.canonical(l)) for l in L]
    return sum(1 for x in range(1, M.size) if all(m[x] == x for m in maps))


@dataclass
class BurnsideReport:
    orders: tuple[int, ...]
    subgroups: list[tuple[tuple[int, ...], ...]]
    labels: list[str]
    marks: list[list[int]]
    k0: K0Report
    burnside_product: list[list[list[int]]]
    tensor_product: list[list[list[int]]]

    def to_dict(self) -> dict:
        return {
            "H": list(self.orders),
            "subgroups": [[list(h) for h in K] for K in self.subgroups],
            "basis": self.labels,
            "marks": self.marks,
            "group": self.k0.group.to_dict(),
            "burnside_product": self.burnside_product,
            "tensor_product": self.tensor_product,
            "provenance": self.k0.provenance,
        }


def burnside(orders: Sequence[int]) -> BurnsideReport:
    if not all(isinstance(d, int) and d >= 1 for d in orders):
        raise UnsupportedError("H must be a list of cyclic orders")
    orders = tuple(d for d in orders if d > 1)
    A = group_monoid(list(orders))
    subs = subgroups(orders)
    trans = [coset_space(A, orders, K) for K in subs]
    labels = [_name(K, orders) for K in subs]
    marks = [[fixed_points(X, L, A) for L in subs] for X in trans]

    def stabilizer(M, x):
        return tuple(sorted(h for h in itertools.product(*(range(d) for d in orders))
                            if M.element_map(A.canonical(h))[x] == x))

    def decompose(M) -> list[int]:
        vec = [0] * len(subs)
        for comp in asets.wedge_components(M):
            vec[subs.index(stabilizer(M, comp[0]))] += 1
        return vec

    # additive structure: every admissible sequence among wedges of two orbits splits
    family = list(zip(labels, trans))
    for a, b in itertools.combinations_with_replacement(range(len(subs)), 2):
        family.append((f"{labels[a]} v {labels[b]}", asets.wedge(trans[a], trans[b]).aset))

    def find(M):
        v = decompose(M)
        if sum(v) == 0:
            return None
        if sum(v) == 1:
            return labels[v.index(1)]
        idx = [i for i, c in enumerate(v) for _ in range(c)]
        return f"{labels[idx[0]]} v {labels[idx[1]]}"

    relations, log = [], []
    for lab, M in family:
        for sub in asets.sub_asets(M):
            if len(sub) in (1, M.size):
                continue
            S = asets.sub_aset(M, sub)
            Q = asets.collapse(M, sub)
            seq = asets.check_ses(S.inclusion, Q.projection)
            if not seq.is_admissible or asets.split_ses(seq) is None:
                raise AssertionError(f"non-split admissible sequence inside {lab}")
            relations.append((lab, find(S.aset), find(Q.aset)))
            log.append({"middle": lab, "sub": find(S.aset), "quotient": find(Q.aset), "split": True})
    k0 = grothendieck_group([lab for lab, _ in family], relations, log)
    k0.basis = tuple(labels)

    prod = [[decompose(asets.smash(X, Y).aset) for Y in trans] for X in trans]
    tens = [[decompose(asets.tensor(X, Y).aset) for Y in trans] for X in trans]
    k0.product = prod
    return BurnsideReport(orders, subs, labels, marks, k0, prod, tens)
