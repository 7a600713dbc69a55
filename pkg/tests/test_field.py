import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from repdiff import field as F
from repdiff import potential as P


def second_moment(rho: F.Field, axis=0):
    x = rho.grid.coords()[axis]
    return float(np.sum(x * x * rho.values) / np.sum(rho.values))


def test_grid_layout():
    g = F.Grid(2, 4.0, 16)
    assert g.h == 0.5
    assert g.shape == (16, 16)
    np.testing.assert_allclose(g.position(g.origin_index), [0.0, 0.0])
    assert g.axis[0] == -4.0
    assert g.displacements()[g.n // 2] == -4.0
    with pytest.raises(ValueError):
        F.Grid(4, 1.0, 16)
    with pytest.raises(ValueError):
        F.Grid(1, 1.0, 24)
    with pytest.raises(ValueError):
        F.Grid(1, -1.0, 16)


def test_gaussian_mass_matches_analytic():
    for d, n in ((1, 256), (2, 256), (3, 64)):
        g = F.Grid(d, 16.0, n)
        rho = F.gaussian(g, 1.0, 1.0)
        assert rho.l1 == pytest.approx((2 * math.pi) ** (d / 2), rel=1e-8)


def test_norms_examples():
    g = F.Grid(2, 2.0, 16)
    u = F.uniform(g, 3.0)
    nu = F.norms(u)
    assert nu.l1 == pytest.approx(3.0 * 16.0)
    assert nu.sup == 3.0
    assert nu.argmax == (0, 0)
    spike = F.zeros(g)
    spike.values[5, 7] = 2.5
    ns = F.norms(spike)
    assert ns.l1 == pytest.approx(2.5 * g.h ** 2)
    assert (ns.sup, ns.argmax) == (2.5, (5, 7))


def test_heat_step_gaussian_variance_adds():
    g = F.Grid(1, 16.0, 256)
    rho = F.gaussian(g, 1.0, 0.8)
    out = F.heat_step(rho, 1.5)
    expected = F.gaussian(g, 0.8 / math.sqrt(0.64 + 1.5), math.sqrt(0.64 + 1.5))
    np.testing.assert_allclose(out.values, expected.values, atol=1e-12)


def test_heat_step_peak_scaling():
    g = F.Grid(3, 12.0, 64)
    w = 0.4
    rho = F.gaussian(g, 1.0, w)
    s = 2.0
    peak = F.heat_step(rho, s).sup
    assert peak == pytest.approx(rho.l1 * (2 * math.pi * (w * w + s)) ** -1.5, rel=1e-8)


def test_heat_step_constants_and_semigroup():
    g = F.Grid(2, 5.0, 32)
    u = F.uniform(g, 1.7)
    np.testing.assert_allclose(F.heat_step(u, 3.0).values, 1.7, rtol=1e-14)
    rng = np.random.default_rng(1)
    rho = F.Field(g, rng.random(g.shape))
    a = F.heat_step(F.heat_step(rho, 0.3), 0.4)
    b = F.heat_step(rho, 0.7)
    np.testing.assert_allclose(a.values, b.values, atol=1e-13)
    assert F.heat_step(rho, 0.7).l1 == pytest.approx(rho.l1, rel=1e-13)
    with pytest.raises(ValueError):
        F.heat_step(rho, 0.0)


def test_lattice_step_variance_mass_positivity():
    g = F.Grid(1, 16.0, 512)
    rho = F.zeros(g)
    rho.values[g.n // 2] = 1.0
    s = 0.9
    out = F.lattice_heat_step(rho, s)
    assert out.l1 == pytest.approx(rho.l1, rel=1e-13)
    assert second_moment(out) == pytest.approx(s, rel=1e-10)
    assert out.values.min() >= -1e-16
    # same semigroup law as the continuum flow
    a = F.lattice_heat_step(F.lattice_heat_step(rho, 0.2), 0.7)
    np.testing.assert_allclose(a.values, out.values, atol=1e-15)


def test_lattice_symbol_approaches_continuum():
    g = F.Grid(1, 8.0, 1024)
    k2 = g.k_squared()
    low = k2 < 4.0
    np.testing.assert_allclose(F.lattice_symbol(g)[low], 0.5 * k2[low], rtol=1e-4)


def test_newtonian_d1_velocity_is_half_sign_mass():
    g = F.Grid(1, 16.0, 256)
    rho = F.bump(g, 1.0, 1.0)
    v = F.interaction_velocity(rho, F.default_kernel(P.newtonian(1)))[0]
    x = g.axis
    far = (np.abs(x) > 1.5) & (np.abs(x) < 8.0)
    np.testing.assert_allclose(v[far], 0.5 * np.sign(x[far]) * rho.l1, rtol=1e-12)


def test_zero_density_and_zero_kernel():
    g = F.Grid(2, 4.0, 32)
    k = F.default_kernel(P.newtonian(2))
    assert np.all(F.interaction_velocity(F.zeros(g), k) == 0)
    rho = F.gaussian(g)
    for rep in ("grid", "symbol"):
        kz = F.KernelSpec(P.zero(2), rep, None)
        assert np.all(F.interaction_velocity(rho, kz) == 0)
        assert np.all(F.divergence_of_grad_conv(rho, kz).values == 0)


def test_newtonian_d2_gauss_law():
    g = F.Grid(2, 16.0, 128)
    w = 0.5
    rho = F.gaussian(g, 1.0, w)
    m = rho.l1
    v = F.interaction_velocity(rho, F.default_kernel(P.newtonian(2)))
    i0 = g.n // 2
    background = m / (2 * g.L) ** 2  # the symbol drops the mean mode
    for R in (1.0, 2.0, 4.0):
        j = i0 + int(round(R / g.h))
        enclosed = m * (1 - math.exp(-R ** 2 / (2 * w * w))) - background * math.pi * R * R
        assert 2 * math.pi * R * v[0][j, i0] == pytest.approx(enclosed, rel=1e-3)
        assert v[1][j, i0] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("rep", ["symbol", "grid"])
def test_newtonian_identity_d1(rep):
    g = F.Grid(1, 16.0, 256)
    bump = F.bump(g, 1.0, 2.0)
    out = F.divergence_of_grad_conv(bump, F.KernelSpec(P.newtonian(1), rep))
    inner = np.abs(g.axis) < g.L / 2
    assert np.max(np.abs(out.values + bump.values)[inner]) <= 1e-6


def test_morse_d2_divergence_matches_polar_quadrature():
    W = P.morse(0.0, 1.0, 1.0, 1.0, 2)
    s = 0.7
    ref_centre = 2 * math.pi * integrate.quad(
        lambda r: W.lap(r) * math.exp(-r * r / (2 * s * s)) * r, 0, 30, limit=200, points=[1])[0]
    x0 = 1.0
    ref_off = integrate.dblquad(
        lambda th, r: W.lap(r) * math.exp(-((x0 - r * math.cos(th)) ** 2
                                            + (r * math.sin(th)) ** 2) / (2 * s * s)) * r,
        1e-14, 30, 0, 2 * math.pi, epsabs=1e-11)[0]
    errs = []
    for n in (128, 256):
        g = F.Grid(2, 8.0, n)
        out = F.divergence_of_grad_conv(F.gaussian(g, 1.0, s), F.KernelSpec(W, "grid"))
        i0, j = n // 2, n // 2 + n // 16
        errs.append(abs(out.values[i0, i0] - ref_centre))
        assert out.values[i0, i0] == pytest.approx(ref_centre, rel=2e-3)
        assert out.values[j, i0] == pytest.approx(ref_off, rel=2e-3)
    assert errs[1] < errs[0]


def test_kernel_spec_validation():
    with pytest.raises(F.KernelConfigurationError):
        F.KernelSpec(P.morse(0, 1, 1, 1, 2), "symbol")
    k = F.KernelSpec(P.newtonian(2), "grid", None)
    with pytest.raises(F.KernelConfigurationError):
        k.check(F.Grid(2, 4.0, 16))
    with pytest.raises(F.KernelConfigurationError):
        F.default_kernel(P.newtonian(3)).check(F.Grid(2, 4.0, 16))
    assert F.default_kernel(P.newtonian(1)).representation is F.Representation.GRID_SAMPLED
    assert F.default_kernel(P.newtonian(2)).representation is F.Representation.ANALYTIC_SYMBOL


def test_radial_fields_are_symmetric():
    for d in (1, 2, 3):
        g = F.Grid(d, 4.0, 16)
        assert F.asymmetry(F.gaussian(g, 1.0, 0.8)) < 1e-15
    g = F.Grid(2, 4.0, 16)
    off = F.gaussian(g, 1.0, 0.8, center=[0.5, 0.0])
    assert F.asymmetry(off) > 0.1
    v = np.arange(16.0)
    r = F.reflect(v, 0)
    assert r[g.n // 2] == v[g.n // 2]
    np.testing.assert_array_equal(F.reflect(r, 0), v)


def test_boundary_ratio():
    g = F.Grid(1, 16.0, 256)
    assert F.boundary_ratio(F.zeros(g)) == 0.0
    assert F.boundary_ratio(F.uniform(g, 2.0)) == 1.0
    assert F.boundary_ratio(F.gaussian(g)) < 1e-40


def test_plateau_bump_has_flat_centre():
    g = F.Grid(1, 8.0, 256)
    b = F.plateau_bump(g, 2.0, 1.0, plateau=g.h)
    i = g.n // 2
    assert b.values[i - 1] == b.values[i] == b.values[i + 1] == 2.0
    assert np.all(b.values[np.abs(g.axis) >= 1.0] == 0)
    with pytest.raises(ValueError):
        F.plateau_bump(g, 1.0, 1.0, plateau=1.0)


def test_field_arithmetic():
    g = F.Grid(1, 2.0, 8)
    a = F.uniform(g, 1.0)
    b = 2 * a + a - F.uniform(g, 0.5)
    np.testing.assert_allclose(b.values, 2.5)
    with pytest.raises(ValueError):
        F.Field(g, np.zeros(4))


@settings(max_examples=20, deadline=None)
@given(st.floats(0.01, 3.0), st.integers(0, 2 ** 16))
def test_lattice_step_keeps_random_data_nonnegative(s, seed):
    g = F.Grid(2, 3.0, 16)
    rng = np.random.default_rng(seed)
    rho = F.Field(g, rng.random(g.shape) * (rng.random(g.shape) < 0.2))
    out = F.lattice_heat_step(rho, s)
    assert out.values.min() >= -1e-14 * max(rho.sup, 1e-300)
    assert out.l1 == pytest.approx(rho.l1, rel=1e-12, abs=1e-300)


def test_free_space_identity_d1_whole_box():
    g = F.Grid(1, 16.0, 256)
    bump = F.bump(g, 1.0, 2.0)
    k = F.KernelSpec(P.newtonian(1), "grid")
    periodic = F.divergence_of_grad_conv(bump, k)
    # the torus puts a positive image of the bump half a box away
    np.testing.assert_allclose(periodic.values, -bump.values + np.roll(bump.values, g.n // 2),
                               atol=1e-12)
    free = F.divergence_of_grad_conv(bump, k, free_space=True)
    assert np.max(np.abs(free.values + bump.values)) <= 1e-12


def test_zero_pad_round_trip():
    g = F.Grid(2, 3.0, 16)
    rho = F.gaussian(g, 1.0, 0.5)
    big = F.zero_pad(rho)
    assert big.grid == F.Grid(2, 6.0, 32)
    assert big.l1 == pytest.approx(rho.l1)
    np.testing.assert_array_equal(F.crop(big, g).values, rho.values)
