import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from repdiff import potential as pot
from repdiff.config import KeyValueConfig


MORSE_REP = dict(C_A=0.0, l_A=1.0, C_R=1.0, l_R=1.0)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_newtonian_flux_is_minus_one(d):
    W = pot.newtonian(d)
    for R in (0.01, 0.7, 2.0, 50.0):
        flux = pot.radial_avg_grad(W, R) * pot.unit_sphere_area(d) * R ** (d - 1)
        assert flux == pytest.approx(-1.0, abs=1e-12)


def test_radial_gradient_examples():
    assert pot.radial_avg_grad(pot.newtonian(3), 2.0) == pytest.approx(-1 / (16 * math.pi))
    assert pot.radial_avg_grad(pot.zero(2), 3.0) == 0.0
    W = pot.morse(**MORSE_REP, d=2)
    assert pot.radial_avg_grad(W, 1.0) == pytest.approx(-math.exp(-1))


def test_laplacian_examples():
    for d in (1, 2, 3):
        assert pot.laplacian(pot.newtonian(d), 0.3) == pytest.approx(0.0, abs=1e-12)
    assert pot.laplacian(pot.power_law(2.0, 1, simulation_only=True), 1.0) == pytest.approx(-1.0)
    assert pot.laplacian(pot.morse(**MORSE_REP, d=3), 1.0) == pytest.approx(-math.exp(-1))


def test_pointwise_rejects_origin_and_negative_radius():
    W = pot.newtonian(2)
    with pytest.raises(ValueError):
        pot.radial_avg_grad(W, 0.0)
    with pytest.raises(ValueError):
        pot.radial_avg_grad(W, -1.0)
    with pytest.raises(ValueError):
        pot.laplacian(W, 0.0)


def test_derivatives_match_finite_differences():
    W = pot.morse(0.5, 2.0, 1.5, 0.7, 2)
    r, e = 1.3, 1e-5
    assert W.w1(r) == pytest.approx((W.w(r + e) - W.w(r - e)) / (2 * e), rel=1e-7)
    assert W.w2(r) == pytest.approx((W.w1(r + e) - W.w1(r - e)) / (2 * e), rel=1e-7)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_newtonian_indices(d):
    idx = pot.compute_indices(pot.newtonian(d))
    for name in ("eta", "alpha", "c_w"):
        assert getattr(idx, name) == pytest.approx(1.0, abs=1e-3)
    assert idx.lap_plus == pytest.approx(0.0, abs=1e-9)
    assert idx.lap_minus == pytest.approx(0.0, abs=1e-9)


def test_zero_potential_indices():
    idx = pot.compute_indices(pot.zero(2))
    assert (idx.eta, idx.alpha, idx.c_w, idx.lap_plus, idx.lap_minus) == (0, 0, 0, 0, 0)


def _quad_lap_parts(W):
    """Independent signed integrals of Lap W over R^d by plain scipy quadrature."""
    d = W.dimension
    c_d = pot.unit_sphere_area(d)
    breaks = [1e-12, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0]
    plus = minus = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        plus += integrate.quad(lambda r: max(W.lap(r), 0.0) * r ** (d - 1), a, b, limit=200)[0]
        minus += integrate.quad(lambda r: max(-W.lap(r), 0.0) * r ** (d - 1), a, b, limit=200)[0]
    return c_d * plus, c_d * minus


def test_morse_d2_indices_match_direct_quadrature():
    W = pot.morse(**MORSE_REP, d=2)
    idx = pot.compute_indices(W)
    plus, minus = _quad_lap_parts(W)
    assert idx.lap_plus == pytest.approx(plus, abs=1e-6)
    assert idx.lap_minus == pytest.approx(minus, abs=1e-6)
    assert idx.eta == pytest.approx(0.0, abs=1e-6)
    assert idx.alpha == pytest.approx(0.0, abs=1e-6)
    assert idx.c_w == pytest.approx(-plus, abs=1e-6)
    assert idx.c_w < 0
    # by hand: both signed parts equal 2 pi / e, so c_W = -(1/2) int |Lap W|
    assert idx.c_w == pytest.approx(-0.5 * (plus + minus), abs=1e-6)


def test_morse_d1_short_range_flux():
    # in d=1 the repulsive exponential has a kink at 0 carrying flux 2 C_R / l_R,
    # and its second derivative is positive everywhere
    idx = pot.compute_indices(pot.morse(**MORSE_REP, d=1))
    assert idx.eta == pytest.approx(2.0, abs=1e-6)
    assert idx.lap_plus == pytest.approx(2.0, abs=1e-6)
    assert idx.c_w == pytest.approx(0.0, abs=1e-6)


def test_attractive_power_law_divergence():
    # sign(amplitude) < 0 makes W eventually increasing: int (Lap W)_+ diverges
    W = pot.power_law(1.0, 3, amplitude=-1.0)
    with pytest.raises(pot.AssumptionViolation):
        pot.compute_indices(W)


def test_power_law_tail_gives_infinite_alpha():
    W = pot.power_law(0.5, 2)
    idx = pot.compute_indices(W)
    assert math.isinf(idx.alpha)
    assert idx.c_w == pytest.approx(0.0, abs=1e-3)


@pytest.mark.parametrize("a", [0.5, 2.0, 10.0])
def test_scaling_linearity(a):
    for W in (pot.newtonian(2), pot.morse(**MORSE_REP, d=2),
              pot.mixture([(1.0, pot.newtonian(3)), (0.3, pot.morse(**MORSE_REP, d=3))])):
        c = pot.compute_indices(W).c_w
        assert pot.compute_indices(W.scaled(a)).c_w == pytest.approx(a * c, abs=1e-3 * max(1, a))


def test_check_linearity_reports():
    rep = pot.check_linearity(pot.newtonian(2), pot.morse(**MORSE_REP, d=2), 3.0)
    assert rep.passed
    assert rep.c_scaled == pytest.approx(3.0, abs=1e-3)
    assert rep.c_sum >= 1.0 + rep.c_second - 1e-9
    zero = pot.check_linearity(pot.zero(1), pot.zero(1), 1.0)
    assert zero.c_sum == zero.c_first + zero.c_second == 0.0


def test_newtonian_plus_morse_threshold():
    c_m = pot.compute_indices(pot.morse(**MORSE_REP, d=2)).c_w
    eps_star = 1.0 / abs(c_m)
    assert eps_star == pytest.approx(math.e / (2 * math.pi), rel=1e-6)
    for eps, positive in ((0.9 * eps_star, True), (1.1 * eps_star, False)):
        W = pot.mixture([(1.0, pot.newtonian(2)), (eps, pot.morse(**MORSE_REP, d=2))])
        assert (pot.compute_indices(W).c_w > 0) is positive


@pytest.mark.parametrize("d", [2, 3])
def test_mixture_consistency(d):
    W = pot.mixture([(1.0, pot.newtonian(d)), (0.4, pot.morse(0.2, 3.0, 1.0, 1.0, d))])
    idx = pot.compute_indices(W)
    assert idx.alpha_finite
    assert idx.consistency_residual <= 1e-3
    assert idx.c_w_symmetric == pytest.approx(idx.c_w, abs=1e-3)


def test_closed_forms_agree_with_computation():
    for W in (pot.newtonian(1), pot.newtonian(3), pot.zero(3), pot.power_law(0.0, 2),
              pot.mixture([(2.0, pot.newtonian(2)), (0.5, pot.power_law(0.0, 2))])):
        known = W.known_indices()
        idx = pot.compute_indices(W)
        for key in ("eta", "alpha", "c_w"):
            assert getattr(idx, key) == pytest.approx(known[key], abs=1e-3)


def test_text_round_trip():
    W = pot.mixture([(1.0, pot.newtonian(2)), (0.25, pot.morse(0.1, 2.0, 1.0, 0.5, 2))])
    back = pot.from_text(W.to_text())
    r = np.linspace(0.1, 5, 17)
    np.testing.assert_allclose(back.w1(r), W.w1(r), rtol=1e-14)
    np.testing.assert_allclose(back.lap(r), W.lap(r), rtol=1e-14, atol=1e-15)


def test_config_errors_carry_line_numbers():
    with pytest.raises(pot.ConfigError, match=":2:"):
        pot.from_text("kind = morse\nC_A = lots\ndimension = 2\n")
    with pytest.raises(pot.ConfigError):
        pot.from_text("kind = unknown\ndimension = 2\n")


def test_tabulated_matches_analytic(tmp_path):
    r = np.geomspace(1e-3, 50.0, 400)
    W = pot.morse(**MORSE_REP, d=3)
    table = pot.tabulated(r, W.w(r), 3)
    x = np.geomspace(0.01, 20, 9)
    np.testing.assert_allclose(table.w1(x), W.w1(x), rtol=2e-3, atol=1e-6)
    path = tmp_path / "w.txt"
    np.savetxt(path, np.column_stack([r, W.w(r)]))
    cfg = KeyValueConfig.parse("kind = tabulated\ndimension = 3\ntable = w.txt\n")
    loaded = pot.from_config(cfg, base=tmp_path)
    np.testing.assert_allclose(loaded.w(x), table.w(x))


def test_tabulated_validation():
    with pytest.raises(ValueError):
        pot.tabulated([1, 2, 2, 3], [0, 0, 0, 0], 1)
    with pytest.raises(ValueError):
        pot.tabulated([1, 2, 3], [0, 0, 0], 1)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(0.05, 20.0), st.integers(1, 3))
def test_scaled_gradient_is_linear(a, r, d):
    W = pot.morse(0.3, 2.0, 1.0, 0.8, d)
    assert W.scaled(a).w1(r) == pytest.approx(a * W.w1(r), rel=1e-12)
    assert (W + W).lap(r) == pytest.approx(2 * W.lap(r), rel=1e-12, abs=1e-300)
