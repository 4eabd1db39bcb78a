import math

import pottsglass as pg


def test_zero_mixture_value_is_zero():
    out = pg.evaluate(2, {}, [0.0, 1.0], [1.0])
    assert abs(out["value"]) <= 1e-12


def test_pure_two_spin_anchor_value():
    # D = 2, beta_2 = 1, alpha = 1: value is exactly -1/8.
    out = pg.evaluate(2, {2: 1.0}, [0.0, 1.0], [1.0])
    assert abs(out["value"] - (-0.125)) <= 1e-6
    assert out["grid_points"] == 4097


def test_lemma_discrepancy_small():
    out = pg.evaluate(2, {2: 1.0}, [0.0, 0.4, 1.0], [0.3, 0.8], check_lemma=True)
    assert out["discrepancy"] <= 5e-4


def test_xi_eval_matches_hand_value():
    # beta_2 = 1: xi(a) = sum a_kl^2.
    a = [[1.0, 0.5], [0.5, 2.0]]
    assert math.isclose(pg.xi_eval(2, {2: 1.0}, a), 1.0 + 0.25 + 0.25 + 4.0)


def test_minimize_deterministic_and_monotone():
    out1 = pg.minimize(2, {2: 0.5}, k=4, seed=3)
    out2 = pg.minimize(2, {2: 0.5}, k=4, seed=3)
    assert out1["value"] == out2["value"]
    assert out1["alpha_star"] == out2["alpha_star"]
    m = out1["alpha_star"]["m"]
    assert all(x <= y + 1e-14 for x, y in zip(m, m[1:]))
    anchor = pg.evaluate(2, {2: 0.5}, [0.0, 1.0], [1.0])["value"]
    assert out1["value"] <= anchor + 1e-9


def test_finite_size_estimate_reproducible():
    a = pg.estimate_free_energy(2, {2: 0.3}, N=3, samples=25, seed=9)
    b = pg.estimate_free_energy(2, {2: 0.3}, N=3, samples=25, seed=9)
    assert a == b
    assert a["se"] >= 0.0


def test_condition1_pure_two_spin_fails():
    rep = pg.check_condition1(2, {2: 1.0})
    assert not rep["holds"]
    rep2 = pg.check_condition1(2, {2: 1.0, 3: 0.5})
    assert rep2["holds"]


def test_invalid_heights_raise_value_error():
    try:
        pg.evaluate(2, {2: 1.0}, [0.0, 0.5, 1.0], [0.9, 0.2])
    except ValueError as e:
        assert "non-monotone heights" in str(e)
    else:
        raise AssertionError("expected ValueError")
