"""Acceptance criteria, one check per criterion.

Each check prints ``criterion N: PASS|FAIL  detail``.  Run directly with
``python tests/test_acceptance.py`` or through pytest, where the lines
are repeated in the terminal summary.
"""

import itertools
import random
import sys
import time
from collections import Counter
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import asetgen  # noqa: E402
from f1kit import aset as S  # noqa: E402
from f1kit import ktheory as K  # noqa: E402
from f1kit import monoid as M  # noqa: E402
from f1kit import scheme as sch  # noqa: E402

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # pragma: no cover
    ACCEPTANCE_LINES = {}


def report(n, ok, detail):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[n] = line
    print(line)
    return ok


# ---------------------------------------------------------------- 1

def check_1():
    t = time.perf_counter()
    bad = []
    for n in range(1, 7):
        X = sch.spec(M.polynomial(n))
        pts = X.points()
        rel = X.specialization()
        order_ok = all(
            ((x.index, y.index) in rel) == (set(x.prime.J) <= set(y.prime.J)) for x in pts for y in pts
        )
        if len(pts) != 2**n or not order_ok:
            bad.append(n)
    for orders in ([2], [3], [2, 2], [2, 3]):
        if len(sch.spec(M.group_monoid(orders)).points()) != 1:
            bad.append(tuple(orders))
    dt = time.perf_counter() - t
    return report(1, not bad and dt < 1.0, f"2^n points for n<=6, 1 point for F1[G]; {dt:.3f}s; failures {bad}")


# ---------------------------------------------------------------- 2

def check_2():
    got = []
    for n in range(1, 5):
        g = sch.picard_group(sch.projective_space(n)).group
        got.append((g.free_rank, g.torsion, g.describe()))
    ok = all(x == (1, (), "Z") for x in got)
    return report(2, ok, f"Pic(P^n), n=1..4: {[x[2] for x in got]}")


# ---------------------------------------------------------------- 3

def check_3():
    f1 = K.k0_affine(M.F1())
    e = K.k0_affine(M.idempotent_monoid())
    a1 = K.k0_affine(M.polynomial(1))
    ok = f1.group.describe() == "Z" and a1.group.describe() == "Z"
    ok = ok and e.group.describe() == "Z^2" and e.ring == "Z[x]/(x^2 - x)" and e.check_ring()
    a1_scheme = K.k0_integral_scheme(sch.spec(M.polynomial(1)))
    ok = ok and a1_scheme.group.describe() == "Z"
    ring_ok = True
    for n in (1, 2, 3, 4):
        R = K.k0_integral_scheme(sch.projective_space(n))
        ok = ok and isinstance(R, K.GroupRingReport) and R.pic.describe() == "Z"
        for a in range(-5, 6):
            for b in range(-5, 6):
                if R.multiply(R.line(a), R.line(b)) != R.line(a + b):
                    ring_ok = False
    ok = ok and ring_ok
    return report(
        3,
        ok,
        f"K0(F1)={f1.group.describe()}, K0({{0,1,e}})={e.group.describe()} ring {e.ring}, "
        f"K0(A1)={a1.group.describe()}, O(a)O(b)=O(a+b) for |a|,|b|<=5: {ring_ok}",
    )


# ---------------------------------------------------------------- 4

def check_4():
    rng = random.Random(404)
    X = sch.projective_space(1)
    t = time.perf_counter()
    failures = 0
    count = 0
    for rank in (2, 3):
        for _ in range(50):
            perm = list(range(rank))
            rng.shuffle(perm)
            twists = [rng.randint(-6, 6) for _ in range(rank)]
            F = sch.free_sheaf(X, rank, {(0, 1): [(perm[k], (twists[k],)) for k in range(rank)]})
            split = sch.split_line_bundles_p1(F)
            W = sch.wedge_sheaves(*[sch.twisted(X, l) for l in split])
            dec = sorted(sch.twist_of_class(X, c) for c in sch.decompose_into_line_bundles(X, F))
            count += 1
            if sch.find_free_isomorphism(F, W) is None or dec != sorted(split) or Counter(split) != Counter(twists):
                failures += 1
    dt = time.perf_counter() - t
    return report(4, failures == 0 and dt < 10, f"{count} random gluings, {failures} failures, {dt:.2f}s")


# ---------------------------------------------------------------- 5

def check_5():
    out = []
    ok = True
    for n in (1, 2, 3):
        B = n + 3
        c = K.k0_image_in_g0_pn(n, B)
        full = set(c.coefficients) == set(range(-B, B + 1))
        ok = ok and c.rank == n + 1 and c.residual_zero and full
        out.append(f"n={n} rank {c.rank}")
    return report(5, ok, "; ".join(out) + ", all O(l) reduced with zero residual" if ok else "; ".join(out))


# ---------------------------------------------------------------- 6

def check_6():
    rep, cert = K.g0_p1_truncated(4)
    harvested = {(r["middle"], r["sub"], r["quotient"]) for r in rep.provenance}
    missing = [m for m in range(-3, 4) if (f"O({m})", f"O({m - 1})", "K") not in harvested]
    ok = cert.ok and not missing
    return report(
        6,
        ok,
        f"span of O, O(1), K(m): rank {cert.rank} (predicted {cert.predicted_rank}), free {cert.free}; "
        f"total {rep.group.describe()}; missing K(m) relations {missing}",
    )


# ---------------------------------------------------------------- 7

def _brute_subgroups(orders):
    elems = list(itertools.product(*[range(d) for d in orders]))
    out = set()
    for r in range(len(elems) + 1):
        for subset in itertools.combinations(elems, r):
            s = set(subset)
            zero = tuple(0 for _ in orders)
            if zero in s and all(tuple((a + b) % d for a, b, d in zip(x, y, orders)) in s for x in s for y in s):
                out.add(frozenset(s))
    return out


def _brute_marks(orders, subs):
    elems = list(itertools.product(*[range(d) for d in orders]))
    add = lambda x, y: tuple((a + b) % d for a, b, d in zip(x, y, orders))
    marks = []
    for Kk in subs:
        cosets = {frozenset(add(h, k) for k in Kk) for h in elems}
        row = []
        for L in subs:
            row.append(sum(1 for c in cosets if all(frozenset(add(l, x) for x in c) == c for l in L)))
        marks.append(row)
    return marks


def check_7():
    ok = True
    parts = []
    for orders in ([2], [3], [4], [2, 2]):
        rep = K.burnside(orders)
        subs = [frozenset(k) for k in rep.subgroups]
        rank_ok = set(subs) == _brute_subgroups(orders) and rep.k0.group.free_rank == len(subs) and not rep.k0.group.torsion
        marks_ok = rep.marks == _brute_marks(orders, subs)
        closes = True
        for i in range(len(subs)):
            for j in range(len(subs)):
                c = rep.burnside_product[i][j]
                if any(x < 0 for x in c):
                    closes = False
                for col in range(len(subs)):
                    if sum(ck * rep.marks[k][col] for k, ck in enumerate(c)) != rep.marks[i][col] * rep.marks[j][col]:
                        closes = False
        ok = ok and rank_ok and marks_ok and closes
        name = "x".join(f"Z/{d}" for d in orders)
        parts.append(f"{name}: Z^{len(subs)} marks {'ok' if marks_ok else 'BAD'} product {'ok' if closes else 'BAD'}")
    return report(7, ok, "; ".join(parts))


# ---------------------------------------------------------------- 8

def check_8():
    ok = True
    parts = []
    t5 = None
    for N in (3, 4, 5):
        t = time.perf_counter()
        objs, labels = K.pointed_sets_family(N)
        nerve = K.build_q_category(objs, labels)
        pi = [c.abelianization.describe() for c in K.pi1_of_classifying_space(nerve)]
        gg = K.family_grothendieck(objs, labels).group.describe()
        dt = time.perf_counter() - t
        if N == 5:
            t5 = dt
        ok = ok and pi == ["Z"] and gg == "Z"
        parts.append(f"N={N}: pi1^ab {pi[0] if len(pi) == 1 else pi}, K0 {gg}")
    A = M.group_monoid([2])
    objs, labels = K.free_family(A, 3)
    nerve = K.build_q_category(objs, labels)
    pi = [c.abelianization.describe() for c in K.pi1_of_classifying_space(nerve)]
    gg = K.family_grothendieck(objs, labels).group.describe()
    ok = ok and pi == ["Z"] and gg == "Z" and t5 < 60
    parts.append(f"free F1[Z/2] rank<=3: {pi[0] if len(pi) == 1 else pi}/{gg}; N=5 in {t5:.2f}s")
    return report(8, ok, "; ".join(parts))


# ---------------------------------------------------------------- 9

def check_9():
    rng = random.Random(909)
    pool = list(asetgen.pool().values())
    mismatches = 0
    normal = 0
    for _ in range(500):
        f = asetgen.random_morphism(rng.choice(pool), rng, 6)
        a = bool(S.is_normal(f))
        normal += a
        if a != S.z_kernel_rank_check(f):
            mismatches += 1
    return report(9, mismatches == 0, f"500 morphisms ({normal} normal), {mismatches} mismatches")


# ---------------------------------------------------------------- 10

LOCALIZING = {
    "F1[T]": [(1,)],
    "F1[T]/(T^2)": [(1,)],
    "F1[T]/(T^3)": [(1,)],
    "F1[Z/2]": [(1,)],
    "F1[T1,T2]": [(1, 0)],
    "{0,1,e}": [2],
    "F1": [()],
}


def check_10():
    rng = random.Random(1010)
    pool = asetgen.pool()
    names = sorted(pool)
    failures = Counter()
    instances = 0
    while instances < 200:
        name = rng.choice(names)
        A = pool[name]
        Sset = LOCALIZING[name]
        loc = M.localize(A, Sset)
        X = asetgen.random_aset(A, rng, 5)
        Y = asetgen.random_aset(A, rng, 5)
        ms = asetgen.all_morphisms(X, Y)
        if not ms:
            continue
        f, g = rng.choice(ms), rng.choice(ms)
        instances += 1
        LX = S.localize_aset(X, Sset, loc)
        LY = S.localize_aset(Y, Sset, loc)
        Lf = S.localize_morphism(f, LX, LY)
        Lg = S.localize_morphism(g, LX, LY)

        def L(Z):
            return S.localize_aset(Z, Sset, loc).aset

        if not S.is_isomorphic(L(S.kernel(f).aset), S.kernel(Lf).aset):
            failures["kernel"] += 1
        if not S.is_isomorphic(L(S.wedge(X, Y).aset), S.wedge(LX.aset, LY.aset).aset):
            failures["wedge"] += 1
        if not S.is_isomorphic(L(S.product(X, Y).aset), S.product(LX.aset, LY.aset).aset):
            failures["product"] += 1
        if not S.is_isomorphic(L(S.coequalizer(f, g).aset), S.coequalizer(Lf, Lg).aset):
            failures["coequalizer"] += 1
        if S.is_normal(f) and not S.is_normal(Lf):
            failures["normal"] += 1
    return report(10, not failures, f"{instances} instances; failures {dict(failures) or 'none'}")


# ---------------------------------------------------------------- 11

def check_11():
    rng = random.Random(1111)
    pool = list(asetgen.pool().values())
    failures = Counter()
    n = 0
    while n < 200:
        A = rng.choice(pool)
        P = asetgen.random_aset(A, rng, 6)
        ker = asetgen.random_closed_subset(P, rng)
        q = S.collapse(P, ker)
        j = q.projection
        N = q.aset
        sub = S.sub_aset(N, asetgen.random_closed_subset(N, rng))
        i = sub.inclusion
        if not (S.is_admissible_mono(i) and S.is_admissible_epi(j)):
            failures["generator"] += 1
            continue
        n += 1
        pb = S.pullback_admissible(i, j)
        brute = sum(1 for m in range(i.source.size) for p in range(P.size) if i.map[m] == j.map[p])
        if pb.aset.size != brute:
            failures["pullback size"] += 1
        if not S.is_admissible_mono(pb.to_mono_source) or not S.is_admissible_epi(pb.to_epi_source):
            failures["pullback legs"] += 1
        # the square commutes
        if any(i.map[pb.to_epi_source.map[k]] != j.map[pb.to_mono_source.map[k]] for k in range(pb.aset.size)):
            failures["pullback square"] += 1
        Z = asetgen.random_aset(A, rng, 5)
        fs = asetgen.all_morphisms(i.source, Z)
        f = rng.choice(fs)
        po = S.pushout_along_mono(i, f)
        if not S.is_admissible_mono(po.from_other):
            failures["pushout leg"] += 1
        if any(po.from_target.map[i.map[m]] != po.from_other.map[f.map[m]] for m in range(i.source.size)):
            failures["pushout square"] += 1
    return report(11, not failures, f"{n} pairs; failures {dict(failures) or 'none'}")


# ---------------------------------------------------------------- 12

def check_12():
    rep = K.stable_aut_abelianization(M.F1(), 6)
    got = [g.describe() for g in rep.groups]
    ok = got[1:] == ["Z/2"] * 5
    return report(12, ok, f"Aut(v^n F1)^ab for n=1..6: {got}")


CHECKS = [check_1, check_2, check_3, check_4, check_5, check_6, check_7, check_8, check_9, check_10, check_11, check_12]


@pytest.mark.parametrize("check", CHECKS, ids=[f"criterion_{k + 1:02d}" for k in range(len(CHECKS))])
def test_criterion(check):
    assert check()


if __name__ == "__main__":
    results = [c() for c in CHECKS]
    sys.exit(0 if all(results) else 1)
