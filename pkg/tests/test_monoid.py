import itertools
import time

import pytest

from f1kit import monoid as M


def brute_primes(T):
    """Prime ideals of a finite table monoid by exhaustive subset search."""
    elems = T.elements()
    nonzero = [x for x in elems if x != T.zero]
    found = set()
    for k in range(len(nonzero) + 1):
        for sub in itertools.combinations(nonzero, k):
            P = set(sub) | {T.zero}
            if T.one in P:
                continue
            if any(T.mul(a, x) not in P for x in P for a in elems):
                continue
            if any(x not in P and y not in P and T.mul(x, y) in P for x in elems for y in elems):
                continue
            found.add(frozenset(P))
    return found


def test_multiplication_examples():
    A = M.polynomial(1)
    assert A.element((1,)) * A.element((2,)) == A.element((3,))
    B = M.truncated_polynomial(2)
    assert (B.gen("T") * B.gen("T")).is_zero()
    E = M.idempotent_monoid()
    e = E.element(2)
    assert e * e == e
    with pytest.raises(M.MonoidError):
        A.element((1,)) * B.gen("T")


def test_units():
    assert M.units(M.polynomial(1)).group.describe() == "0"
    assert M.units(M.laurent(1)).group.describe() == "Z"
    U = M.units(M.group_monoid([2]))
    assert U.group.describe() == "Z/2" and len(U.members) == 2
    assert M.units(M.idempotent_monoid()).group.describe() == "0"


def test_idempotents():
    E = M.idempotent_monoid()
    assert sorted(M.idempotents(E)) == [0, 1, 2]
    A = M.polynomial(1)
    assert len(M.idempotents(A)) == 2
    G = M.group_monoid([2])
    T, elems = G.to_table()
    brute = [x for x in T.elements() if T.mul(x, x) == x]
    assert len(M.idempotents(G)) == len(brute) == 2


def test_primes_of_polynomial_monoids():
    A = M.polynomial(1)
    assert [p.format() for p in M.enumerate_primes(A)] == ["(0)", "(T)"]
    for n in range(1, 7):
        ps = M.enumerate_primes(M.polynomial(n))
        assert len(ps) == 2**n
        assert {p.J for p in ps} == {J for k in range(n + 1) for J in itertools.combinations(range(n), k)}


def test_group_monoid_has_one_prime():
    for orders in ([2], [3], [2, 3], [4, 2]):
        assert [p.format() for p in M.enumerate_primes(M.group_monoid(orders))] == ["(0)"]


@pytest.mark.parametrize(
    "A",
    [M.idempotent_monoid(), M.truncated_polynomial(3), M.group_monoid([2])]
    + [M.AffineMonoid(free=2, ideal=[[2, 0], [1, 1], [0, 3]])],
    ids=["e", "T3", "Z2", "two-var"],
)
def test_primes_match_exhaustive_search(A):
    if isinstance(A, M.TableMonoid):
        T, elems = A, A.elements()
    else:
        T, elems = A.to_table()
    # table index i stands for elems[i]
    got = {frozenset(i for i, x in enumerate(elems) if p.contains(x)) for p in M.enumerate_primes(A)}
    want = brute_primes(T)
    assert got == want


def test_nilradical():
    assert M.nilradical(M.polynomial(1)).format() == "(0)"
    assert M.nilradical(M.truncated_polynomial(2)).format() == "(T)"
    assert M.nilradical(M.idempotent_monoid()).format() == "(0)"


def test_localization_examples():
    A = M.polynomial(1)
    L = M.localize(A, [(1,)])
    assert (L.monoid.a, L.monoid.b) == (0, 1)
    assert L((3,)) == (3,)
    G = M.group_monoid([2])
    Lg = M.localize(G, [(1,)])
    assert Lg.monoid.describe() == G.describe()
    assert M.localize(M.truncated_polynomial(2), [(1,)]).monoid.is_zero_monoid


def test_localization_of_table_monoid_at_idempotent():
    E = M.idempotent_monoid()
    L = M.localize(E, [2])
    # e becomes 1, so e^{-1}A = {0, 1}
    assert len(L.monoid.elements()) == 2
    assert L(2) == L(1)


def test_u_s_as_d_f():
    A2 = M.polynomial(2)
    assert A2.format(M.u_s_as_d_f(A2, [(1, 0)]).value) == "T1"
    A = M.polynomial(1)
    f = M.u_s_as_d_f(A, [(0,)])
    assert f.value == A.one
    assert len(M.principal_locus(A, f)) == 2
    f = M.u_s_as_d_f(A2, [(1, 0), (1, 1)])
    assert [p.format() for p in M.principal_locus(A2, f)] == ["(0)"]
    assert M.u_s_as_d_f(M.truncated_polynomial(2), [(1,)]).is_zero()


def test_products_and_smash():
    F = M.F1()
    P = M.product_monoid(F, F)
    assert P.n == 4
    assert len(M.idempotents(P)) == 4
    S = M.smash_coproduct(M.polynomial(1, ["T1"]), M.polynomial(1, ["T2"]))
    assert S.monoid.describe() == M.polynomial(2, ["T1", "T2"]).describe()
    assert S.monoid.mul(S.left((1,)), S.right((1,))) == (1, 1)
    E = M.idempotent_monoid()
    assert len(M.smash_coproduct(F, E).monoid.elements()) == 3


def test_zring_presentations():
    assert M.emit_zring_presentation(M.polynomial(1)).format() == "Z[T]"
    assert M.emit_zring_presentation(M.laurent(1)).format() == "Z[T,T^-1]/(T*T^-1 - 1)"
    assert M.emit_zring_presentation(M.truncated_polynomial(3)).format() == "Z[T]/(T^3)"
    assert M.emit_zring_presentation(M.F1()).format() == "Z[]"


def test_from_dict_round_trip():
    doc = {"backend": "affine", "free": 1, "lattice": 0, "torsion": [], "ideal": [[2]], "names": ["T"]}
    A = M.from_dict(doc)
    assert A.describe()["ideal"] == [[2]]
    with pytest.raises(M.MonoidError):
        M.from_dict({"backend": "nope"})
    with pytest.raises(M.MonoidError):
        M.table_monoid(2, [0, 0, 0], 0, 1, [])


def test_prime_enumeration_is_fast():
    t = time.perf_counter()
    M.enumerate_primes(M.polynomial(6))
    assert time.perf_counter() - t < 1.0
