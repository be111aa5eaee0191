import random

import pytest
from hypothesis import given, settings, strategies as st

from wittdisp.errors import ArgumentError, ValidationError
from wittdisp.rings import finite_field, field_embedding, truncated_polynomial
from wittdisp.witt import witt_ring
from wittdisp.linmod import WittMatrix, RankOneTwist, chain_ring_normal_form
from wittdisp.displays import (NormalPair, PairMorphism, pair_make, morphism_compose, tilde,
                               incl_and_multp, display_make, display_frobenius, display_dual,
                               display_twist, base_change_truncate, isomorphism_search,
                               dieudonne_roundtrip, display_from_dieudonne, DieudonneModule,
                               random_frobenius, TruncatedDisplay, swap_matrix, canonical_psi)

F2 = finite_field(2)
F4 = finite_field(4)


def W_(F, m):
    return witt_ring(F, F.p, m)


def M(W, rows):
    return WittMatrix.from_entries(W, [[W.from_int(x) if isinstance(x, int) else x for x in r]
                                       for r in rows], len(rows[0]))


def test_pair_make():
    P = pair_make(F2, 2, 3, 1, 2)
    assert (P.h, P.d) == (3, 1)
    # with L or T empty no entry is forced into I
    P0 = pair_make(F2, 2, 2, 0, 2)
    assert P0.c_exponents() == [[0, 0], [0, 0]]
    Ph = pair_make(F2, 2, 2, 2, 0)
    assert Ph.c_exponents() == [[0, 0], [0, 0]]
    P11 = pair_make(F2, 2, 2, 1, 1)
    assert P11.c_exponents() == [[0, 0], [1, 0]]
    with pytest.raises(ArgumentError):
        pair_make(F2, 2, 2, -1, 1)


def test_compose_identity_and_c_block():
    rng = random.Random(2)
    P = pair_make(F2, 2, 2, 1, 2)
    f = PairMorphism.random(P, P, rng)
    assert morphism_compose(PairMorphism.identity(P), f) == f
    W = P.W
    bad = WittMatrix(W, [[W.one] * 3 for _ in range(3)], 3)
    with pytest.raises(ValidationError):
        PairMorphism(P, P, bad)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_compose_is_matrix_product_and_associative(seed):
    rng = random.Random(seed)
    W = W_(F2, 2)
    A, B, C = NormalPair(W, 1, 1), NormalPair(W, 2, 1), NormalPair(W, 1, 2)
    f, g, h = PairMorphism.random(A, B, rng), PairMorphism.random(B, C, rng), PairMorphism.random(C, A, rng)
    assert morphism_compose(g, f).matrix == g.matrix @ f.matrix
    assert morphism_compose(h, morphism_compose(g, f)) == morphism_compose(morphism_compose(h, g), f)


def test_tilde_example():
    W = W_(F2, 2)
    P = NormalPair(W, 1, 1)
    f = PairMorphism(P, P, WittMatrix(W, [[W.zero, W.one], [W.V((1,)), W.zero]], 2))
    W1 = W_(F2, 1)
    # p = 0 in W_1(F_2), so (0, p; 1, 0) is (0, 0; 1, 0) here
    assert tilde(f) == WittMatrix(W1, [[W1.zero, W1.from_int(2)], [W1.one, W1.zero]], 2)
    assert tilde(f) == M(W1, [[0, 0], [1, 0]])
    # one level up p survives
    W3 = W_(F2, 3)
    f3 = PairMorphism(NormalPair(W3, 1, 1), NormalPair(W3, 1, 1),
                      WittMatrix(W3, [[W3.zero, W3.one], [W3.V((1, 0)), W3.zero]], 2))
    W2 = W_(F2, 2)
    assert tilde(f3) == WittMatrix(W2, [[W2.zero, W2.from_int(2)], [W2.one, W2.zero]], 2)


def test_tilde_identity():
    for F, m, dL, dT in [(F2, 2, 1, 1), (F4, 3, 2, 1), (finite_field(3), 2, 0, 2)]:
        P = pair_make(F, F.p, m, dL, dT)
        assert tilde(PairMorphism.identity(P)) == WittMatrix.identity(W_(F, m - 1), P.h)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([(2, 3), (4, 2), (3, 2)]))
def test_tilde_functorial_and_iota(seed, qm):
    q, m = qm
    F = finite_field(q)
    rng = random.Random(seed)
    W = W_(F, m)
    A, B, C = NormalPair(W, 1, 2), NormalPair(W, 2, 1), NormalPair(W, 1, 1)
    f, g = PairMorphism.random(A, B, rng), PairMorphism.random(B, C, rng)
    assert tilde(g @ f) == tilde(g) @ tilde(f)
    iota_A, pi_A = incl_and_multp(A)
    iota_B, _ = incl_and_multp(B)
    assert iota_B @ tilde(f) == f.matrix.frobenius_twist() @ iota_A


def test_incl_multp():
    for dL, dT in [(1, 1), (2, 1), (0, 3), (3, 0)]:
        P = pair_make(F4, 2, 3, dL, dT)
        iota, pi = incl_and_multp(P)
        pid = WittMatrix.identity(iota.W, P.h).scale(iota.W.from_int(2))
        assert iota @ pi == pid and pi @ iota == pid


def test_display_make():
    P = pair_make(F2, 2, 2, 1, 1)
    D = display_make(P, [[0, 1], [1, 0]])
    assert D.h == 2 and D.n == 1
    with pytest.raises(ValidationError):
        display_make(P, [[1, 1], [1, 1]])
    Ph = pair_make(F2, 2, 2, 2, 0)
    assert display_make(Ph, [[1, 1], [0, 1]]).d == 2


def test_frobenius_examples():
    P = pair_make(F2, 2, 2, 1, 1)
    W1 = W_(F2, 1)
    F, nil = display_frobenius(display_make(P, [[0, 1], [1, 0]]))
    assert [list(r) for r in F.residue("mod-p").rows] == [[0, 1], [0, 0]]
    assert nil
    F, nil = display_frobenius(display_make(P, [[1, 0], [0, 1]]))
    assert [list(r) for r in F.residue("mod-p").rows] == [[0, 0], [0, 1]]
    assert not nil
    for h in (1, 2, 3):
        ident = [[1 if i == j else 0 for j in range(h)] for i in range(h)]
        # T = M: F = Psi is invertible mod p
        assert not display_frobenius(display_make(pair_make(F4, 2, 2, 0, h), ident))[1]
        # L = M: F = p Psi vanishes mod p
        assert display_frobenius(display_make(pair_make(F4, 2, 2, h, 0), ident))[1]
    assert display_frobenius(TruncatedDisplay(pair_make(F2, 2, 2, 0, 0), WittMatrix(W1, [], 0)))[1]


def test_dual_examples():
    P = pair_make(F2, 2, 2, 1, 2)
    D = display_make(P, [[0, 1, 0], [0, 0, 1], [1, 0, 0]])
    Dd = display_dual(D)
    assert (Dd.pair.dL, Dd.pair.dT) == (2, 1)
    assert display_dual(Dd) == D
    P11 = pair_make(F2, 2, 2, 1, 1)
    E = display_make(P11, [[0, 1], [1, 0]])
    assert isomorphism_search(E, display_dual(E)) == "isomorphic"


def test_twist_examples():
    rng = random.Random(4)
    W = W_(F4, 3)
    Wn = W_(F4, 2)
    P = NormalPair(W, 1, 1)
    g = PairMorphism.random(P, P, rng)
    while not g.is_invertible():
        g = PairMorphism.random(P, P, rng)
    D = TruncatedDisplay(P, g.matrix.truncate(2))
    assert display_twist(RankOneTwist.trivial(W, Wn), D) == D
    T1 = RankOneTwist(W, Wn, W.teich(2), Wn.teich(3))
    T2 = RankOneTwist(W, Wn, W.one, Wn.add(Wn.one, Wn.V((1,))))
    assert display_twist(T2, display_twist(T1, D)) == display_twist(T1.compose(T2), D)
    assert display_dual(display_twist(T1, D)) == display_twist(T1.dual(), display_dual(D))


def test_base_change_truncate():
    rng = random.Random(9)
    W = W_(F2, 3)
    P = NormalPair(W, 1, 1)
    while True:
        psi = WittMatrix(W_(F2, 2), [[W_(F2, 2).random(rng) for _ in range(2)] for _ in range(2)], 2)
        if psi.is_invertible():
            break
    D = TruncatedDisplay(P, psi)
    assert base_change_truncate(D) == D
    two = base_change_truncate(D, m=2, n=1)
    assert base_change_truncate(base_change_truncate(D, m=3, n=1), m=2, n=1) == two
    with pytest.raises(ArgumentError):
        base_change_truncate(D, m=2, n=2)
    hom = field_embedding(F2, F4)
    for psi in ([[0, 1], [1, 0]], [[1, 0], [0, 1]], [[1, 1], [1, 0]]):
        E = display_make(pair_make(F2, 2, 2, 1, 1), psi)
        assert display_frobenius(base_change_truncate(E, hom))[1] == display_frobenius(E)[1]


def test_dieudonne_example():
    W = W_(F2, 3)
    p = W.from_int(2)
    F = WittMatrix(W, [[W.zero, p], [W.one, W.zero]], 2)
    res = display_from_dieudonne(DieudonneModule(F))
    assert (res.display.h, res.display.d) == (2, 1)
    # M_1 = <p e_1, e_2>: all generators have first coordinate in pW and index p in M
    gens = WittMatrix(W, [list(r) for r in zip(*res.M1)], 2)
    assert all(x[0] == 0 for x in gens.rows[0])
    assert chain_ring_normal_form(gens).length == 1
    assert dieudonne_roundtrip("F", F).ok
    for h in (1, 2, 3):
        Fp = WittMatrix.identity(W, h).scale(p)
        r = dieudonne_roundtrip("F", Fp)
        assert r.ok and (r.h, r.d) == (h, h)


def test_dieudonne_rejects_bad_F():
    W = W_(F2, 3)
    F = WittMatrix.diagonal(W, [W.from_int(4), W.one])
    with pytest.raises(ValidationError):
        display_from_dieudonne(DieudonneModule(F))


@pytest.mark.parametrize("q", [2, 4])
def test_dieudonne_roundtrip_random(q):
    F = finite_field(q)
    W = W_(F, 3)
    rng = random.Random(q)
    for h in (1, 2, 3, 4):
        for d in range(h + 1):
            Fm = random_frobenius(W, h, d, rng)
            a = dieudonne_roundtrip("F", Fm)
            assert a.ok and (a.h, a.d) == (h, d)
            b = dieudonne_roundtrip("display", display_from_dieudonne(DieudonneModule(Fm)).display)
            assert b.ok


def test_nilpotence_invariant_under_isomorphism():
    rng = random.Random(11)
    P = pair_make(F2, 2, 2, 1, 1)
    for psi in ([[0, 1], [1, 0]], [[1, 0], [0, 1]]):
        D = display_make(P, psi)
        for _ in range(10):
            k = PairMorphism.random(P, P, rng)
            if not k.is_invertible():
                continue
            from wittdisp.displays import act_on_psi
            E = TruncatedDisplay(P, act_on_psi(k, D.psi))
            assert display_frobenius(E)[1] == display_frobenius(D)[1]
            assert isomorphism_search(D, E) == "isomorphic"
            assert canonical_psi(D) == canonical_psi(E)


def test_display_json_shape():
    D = display_make(pair_make(F2, 2, 2, 1, 1), [[0, 1], [1, 0]])
    js = D.to_json()
    assert js["pair"] == {"dL": 1, "dT": 1} and js["m"] == 2 and js["n"] == 1


def test_swap_matrix():
    W = W_(F2, 1)
    S = swap_matrix(W, 1, 2)
    assert S.shape == (3, 3)
    assert S @ swap_matrix(W, 2, 1) == WittMatrix.identity(W, 3)


def test_quotient_ring_tilde():
    R = truncated_polynomial(2, "x", 3)
    W = witt_ring(R, 2, 2)
    rng = random.Random(1)
    P = NormalPair(W, 1, 1)
    for _ in range(10):
        f, g = PairMorphism.random(P, P, rng), PairMorphism.random(P, P, rng)
        assert tilde(g @ f) == tilde(g) @ tilde(f)
