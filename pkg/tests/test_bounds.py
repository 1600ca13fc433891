import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from anticomm import bounds as bd
from anticomm.errors import FormulaDomainError, MissingStructureError
from anticomm.hamiltonian import parse_hamiltonian
from anticomm.oracle import expm, pf1_product, spectral_norm

LN2 = math.log(2.0)


def test_original_delta_at_ln2():
    # (ln 2)^11 / 11! * e^(ln 2)
    assert math.isclose(bd.original_taylor_delta(1.0, LN2, 10), 8.8910765437416229952e-10, rel_tol=1e-14)
    assert math.isclose(bd.original_taylor_delta(4.0, LN2 / 4, 10), 2 * LN2 ** 11 / math.factorial(11),
                        rel_tol=1e-14)


# frozen from the mpmath series in tests/oracles.py
@pytest.mark.parametrize("alpha, alpha_m, m, K, expected", [
    (3.0, 5.0, 2, 10, 3.6205236273340751574e-11),
    (3.0, 5.0, 2, 11, 1.4048992769370946377e-12),
    (2.5, 9.0, 3, 7, 6.8981800289589171141e-7),
    (4.0, 100.0, 4, 12, 1.5990163853421359612e-13),
])
def test_refined_delta_frozen(alpha, alpha_m, m, K, expected):
    assert math.isclose(bd.refined_delta(alpha, alpha_m, m, LN2 / alpha, K), expected, rel_tol=1e-13)


def test_refined2_closed_form():
    a, ac, t = 3.0, 5.0, 0.4
    c = math.sqrt(ac)
    q, x = a / c, t * c
    for K in range(1, 15):
        ref = x ** (K + 1) / math.factorial(K + 1) * ((q + 1) * math.exp(x) + (-1) ** K * (q - 1) * math.exp(-x)) / 2
        assert math.isclose(bd.refined_delta_order2(a, ac, t, K), ref, rel_tol=1e-13)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_q_equal_one_recovers_original(m):
    for a in (0.3, 1.0, 7.5):
        for K in (1, 4, 9, 20):
            t = LN2 / a
            assert math.isclose(bd.refined_delta(a, a ** m, m, t, K), bd.original_taylor_delta(a, t, K),
                                rel_tol=1e-13)


@settings(max_examples=60, deadline=None)
@given(a=st.floats(0.1, 50.0), frac=st.floats(0.01, 1.0), m=st.sampled_from([2, 3, 4]),
       K=st.integers(1, 30), tscale=st.floats(0.05, 3.0))
def test_refined_matches_series_oracle(a, frac, m, K, tscale):
    am = frac * a ** m
    t = tscale * LN2 / a
    got = bd.refined_delta(a, am, m, t, K)
    assert math.isclose(got, float(oracles.refined_series(a, am, m, t, K)), rel_tol=1e-11)


@settings(max_examples=100, deadline=None)
@given(a=st.floats(0.1, 100.0), frac=st.floats(0.0001, 1.0), K=st.integers(0, 60), tscale=st.floats(0.0, 5.0))
def test_refined2_never_exceeds_original(a, frac, K, tscale):
    t = tscale * LN2 / a
    assert bd.refined_delta_order2(a, frac * a * a, t, K) <= bd.original_taylor_delta(a, t, K) * (1 + 1e-13)


def test_refined_bounds_the_true_tail():
    # sum_{k>K} t^k ||H^k|| / k! never exceeds the bound
    h = parse_hamiltonian("0.7 X0\n0.4 Z0\n0.9 Z0 Z1\n0.3 Y1")
    H = h.dense()
    from anticomm.structure import analyze
    s = analyze(h)
    t = LN2 / h.alpha
    for K in (2, 4, 7):
        tail, P = 0.0, np.linalg.matrix_power(H, K + 1)
        for k in range(K + 1, K + 40):
            tail += t ** k * spectral_norm(P) / math.factorial(k)
            P = P @ H
        assert tail <= bd.refined_delta_order2(h.alpha, s.alpha_comm, t, K)


def test_residue_sums():
    for x in (0.0, 0.3, 5.0, 80.0):
        for m in (1, 2, 3, 4):
            assert math.isclose(math.fsum(bd.residue_sums(x, m, scaled=True)), 1.0, rel_tol=1e-13)
    s = bd.residue_sums(1.2, 2)
    assert math.isclose(s[0], math.cosh(1.2), rel_tol=1e-14) and math.isclose(s[1], math.sinh(1.2), rel_tol=1e-14)
    with pytest.raises(FormulaDomainError):
        bd.residue_sums(-1.0, 2)


def test_large_argument_stays_finite():
    d = bd.refined_delta_order2(600.0, 1000.0, 1.0, 200)
    assert math.isfinite(d) and d > 0
    assert bd.original_taylor_delta(1000.0, 1.0, 5) == math.inf


@pytest.mark.parametrize("K", [8, 9])
def test_modified_delta_frozen(K):
    expected = {8: 1.4204756292934238707e-9, 9: 5.4616521192615202659e-11}[K]
    b = bd.BoundInputs(3.0, 5.0, alpha3_r=0.4, alpha3_star=0.2, e_epsilon=0.7)
    assert math.isclose(bd.modified_delta(b, LN2 / 3, K), expected, rel_tol=1e-13)


def test_modified_without_remainders_is_refined_two_orders_later():
    b = bd.BoundInputs(2.0, 3.0, alpha3_r=0.0, e_epsilon=0.0)
    t = LN2 / 2
    assert bd.modified_delta(b, t, 7) == bd.refined_delta_order2(2.0, 3.0, t, 9)


def test_missing_structure():
    b = bd.BoundInputs(2.0)
    with pytest.raises(MissingStructureError):
        bd.modified_delta(b, 0.1, 5)
    with pytest.raises(MissingStructureError):
        bd.scheme_delta("refined3", b, 0.1, 5)
    with pytest.raises(ValueError):
        bd.scheme_delta("nope", b, 0.1, 5)


def test_domain_errors():
    with pytest.raises(FormulaDomainError):
        bd.BoundInputs(0.0)
    with pytest.raises(FormulaDomainError):
        bd.original_taylor_delta(1.0, -0.1, 3)
    with pytest.raises(FormulaDomainError):
        bd.refined_delta(1.0, 2.0, 2, 0.1, 3)        # alpha_comm > alpha^2
    with pytest.raises(FormulaDomainError):
        bd.envelope(-1e-3)


def test_envelope():
    assert bd.envelope(0.0) == 0.0
    assert bd.envelope(1.0) == 4.0
    d = 1e-9
    assert math.isclose(bd.envelope(d), 2 * d, rel_tol=1e-8)


def test_power_norm_bound():
    assert bd.power_norm_bound(3.0, 5.0, 0) == 1.0
    assert bd.power_norm_bound(3.0, 5.0, 5) == 75.0
    assert bd.power_norm_bound(3.0, 5.0, 6) == 125.0


def test_segment_count():
    assert bd.segment_count(1.0, LN2) == 1
    assert bd.segment_count(3.0, 11 * LN2 / 3) == 11
    assert bd.segment_count(1.0, LN2 * 1.5) == 2
    assert bd.segment_count(1.0, 1e-9) == 1


@pytest.mark.parametrize("scheme", ["original", "refined2", "modified"])
def test_min_K_matches_brute_force(scheme):
    b = bd.BoundInputs(3.0, 5.0, alpha3_r=0.4, alpha3_star=0.2, e_epsilon=0.7)
    fn = {
        "original": lambda tau, K: oracles.original_series(3.0, tau, K),
        "refined2": lambda tau, K: oracles.refined_series(3.0, 5.0, 2, tau, K),
        "modified": lambda tau, K: oracles.modified_series(3.0, 5.0, 0.7, 0.6, tau, K),
    }[scheme]
    for eps in (1e-4, 1e-8, 1e-13):
        for t in (0.2, 2.0, 11.0):
            assert bd.min_K(scheme, b, t, eps) == oracles.min_K(fn, 3.0, t, eps)


def test_min_K_monotone_and_ordered():
    b = bd.BoundInputs(3.0, 5.0, alpha3_r=0.4, e_epsilon=0.7)
    prev = 0
    for k in range(4, 21):
        eps = 10.0 ** -k
        ko, k2 = bd.min_K("original", b, 5.0, eps), bd.min_K("refined2", b, 5.0, eps)
        assert k2 <= ko and ko >= prev
        prev = ko


def test_min_K_unreachable():
    with pytest.raises(FormulaDomainError):
        bd.min_K("original", bd.BoundInputs(1.0), 1.0, 1e-300, k_max=10)


def test_ratio_table():
    b = bd.BoundInputs(3.0, 5.0, label="demo")
    rows = bd.ratio_table(b, [2, 10], ("original", "refined2"))
    assert [r.scheme for r in rows] == ["original", "original", "refined2", "refined2"]
    assert all(r.ratio_vs_original == 1.0 for r in rows[:2])
    assert all(r.ratio_vs_original > 1.0 and r.molecule_label == "demo" for r in rows[2:])
    r = rows[3]
    assert r.ratio_vs_original == bd.envelope(bd.original_taylor_delta(3.0, LN2 / 3, 10)) / r.epsilon


def test_evaluate_segments():
    b = bd.BoundInputs(2.0, 3.0)
    res = bd.evaluate("refined2", b, 4.0, 6, r=5)
    assert res.per_segment_delta == bd.refined_delta_order2(2.0, 3.0, 0.8, 6)
    assert res.total_epsilon == 5 * bd.envelope(res.per_segment_delta)


def test_pf1_two_terms():
    h = parse_hamiltonian("1 X0\n1 Z0")
    assert math.isclose(bd.pf1_bound(h, 0.1, 1), 0.01, rel_tol=1e-14)
    assert math.isclose(bd.pf1_bound(h, 0.1, 1, mode="exact"), 0.01, rel_tol=1e-12)
    assert math.isclose(bd.pf1_bound(h, 0.1, 4), 0.0025, rel_tol=1e-14)


def test_pf1_exact_below_analytic_and_valid(rng):
    from anticomm.cli import random_hamiltonian
    for _ in range(10):
        h = random_hamiltonian(rng, 3, 6)
        t = 0.7
        exact = bd.pf1_bound(h, t, 3, mode="exact")
        assert exact <= bd.pf1_bound(h, t, 3) * (1 + 1e-12)
        assert spectral_norm(pf1_product(h, t, 3) - expm(h, t)) <= exact * (1 + 1e-10) + 1e-14
