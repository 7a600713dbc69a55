import math

import numpy as np
import pytest

from repdiff import field as F
from repdiff import potential as P
from repdiff import solver as S


def grid1(n=256, L=16.0):
    return F.Grid(1, L, n)


def newton1():
    return F.default_kernel(P.newtonian(1))


def zero_kernel(d=1):
    return F.KernelSpec(P.zero(d), "grid", None)


def moment2(rho):
    x = rho.grid.coords()[0]
    return float(np.sum(x * x * rho.values) / np.sum(rho.values))


def duhamel_source(f: F.Field, t: float) -> np.ndarray:
    """Exact int_0^t G_s * f ds for the spectral heat flow."""
    lam = 0.5 * f.grid.k_squared()
    with np.errstate(invalid="ignore", divide="ignore"):
        w = np.where(lam > 0, -np.expm1(-lam * t) / np.where(lam > 0, lam, 1.0), t)
    return F.ifft(f.grid, F.fft(f) * w)


def test_pure_heat_variance_grows_by_t():
    g = grid1()
    rho0 = F.gaussian(g, 1.0, 0.7)
    for diffusion in ("lattice", "spectral"):
        cfg = S.SimConfig(zero_kernel(), rho0, dt=0.05, t_end=1.0, diffusion=diffusion)
        final = S.run(cfg).final
        assert moment2(final) == pytest.approx(moment2(rho0) + 1.0, rel=1e-10)
    exact = F.gaussian(g, 0.7 / math.sqrt(1.49), math.sqrt(1.49))
    np.testing.assert_allclose(final.values, exact.values, atol=1e-12)


def test_pure_immigration_matches_duhamel_integral():
    g = grid1()
    f = F.gaussian(g, 1.0, 0.5)
    ref = duhamel_source(f, 1.0)
    errs = []
    for dt in (0.02, 0.01):
        cfg = S.SimConfig(zero_kernel(), F.zeros(g), f, dt=dt, t_end=1.0, diffusion="spectral")
        errs.append(float(np.max(np.abs(S.run(cfg).final.values - ref))))
    assert errs[1] < 1e-4
    # midpoint source placement is second order in dt
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)


def test_zero_data_gives_zero_diagnostics():
    cfg = S.SimConfig(newton1(), F.zeros(grid1()), dt=0.1, t_end=1.0)
    diag = S.run(cfg)
    assert len(diag) == 11
    assert set(diag.sup) == {0.0} and set(diag.l1) == {0.0}
    assert set(diag.mass_residual) == {0.0}


def test_newtonian_bump_conserves_mass_and_spreads():
    g = grid1()
    cfg = S.SimConfig(newton1(), F.gaussian(g, 1.0, 0.5), dt=0.01, t_end=1.0)
    diag = S.run(cfg)
    l1 = diag.array("l1")
    np.testing.assert_allclose(l1, l1[0], rtol=1e-13)
    assert np.all(np.diff(diag.array("sup")) < 0)


def test_mass_series_is_affine():
    g = grid1()
    f = F.gaussian(g, 0.8, 1.0)
    cfg = S.SimConfig(newton1(), F.gaussian(g, 1.0, 0.5), f, dt=0.02, t_end=2.0)
    diag = S.run(cfg)
    t = diag.array("times")
    np.testing.assert_allclose(diag.array("l1"), cfg.rho0.l1 + t * f.l1, rtol=1e-12)
    assert max(diag.mass_residual) <= 1e-12 * diag.l1[-1]


def test_time_dependent_immigration_mass_law():
    g = grid1()
    f = F.gaussian(g, 1.0, 1.0)
    cfg = S.SimConfig(newton1(), F.zeros(g), lambda t: f * (1 + 0.5 * math.sin(t)), dt=0.01,
                      t_end=2.0)
    diag = S.run(cfg)
    # midpoint sampling integrates the modulation to second order
    exact = f.l1 * (2.0 + 0.5 * (1 - math.cos(2.0)))
    assert diag.l1[-1] == pytest.approx(exact, rel=1e-5)
    assert max(diag.mass_residual) <= 1e-12 * diag.l1[-1]


@pytest.mark.parametrize("d,W", [(2, P.newtonian(2)), (2, P.morse(0, 1, 1, 1, 2)),
                                 (3, P.newtonian(3))])
def test_radial_symmetry_is_preserved(d, W):
    g = F.Grid(d, 6.0, 64 if d == 2 else 32)
    cfg = S.SimConfig(F.default_kernel(W), F.gaussian(g, 1.0, 0.8), F.gaussian(g, 0.5, 0.6),
                      dt=0.02, t_end=0.4, track_symmetry=True)
    diag = S.run(cfg)
    assert max(diag.asymmetry) <= 1e-8
    assert all(np.allclose(p, 0.0) for p in diag.argmax)


def test_picard_zero_kernel_is_one_step():
    g = grid1(128, 8.0)
    rho0 = F.gaussian(g, 1.0, 0.6)
    f = F.gaussian(g, 0.3, 1.0)
    cfg = S.SimConfig(zero_kernel(), rho0, f, dt=0.01, t_end=0.5)
    res = S.picard_solve(cfg, 0.5)
    assert res.converged and res.iterations == 2
    assert res.distances[1] <= 1e-14
    expected = F.heat_step(rho0, 0.5).values + duhamel_source(f, 0.5)
    np.testing.assert_allclose(res.rho.values, expected, atol=1e-13)


def test_picard_agrees_with_splitting():
    g = grid1()
    cfg = S.SimConfig(newton1(), F.gaussian(g, 1.0, 1.0), dt=0.05 / 16, t_end=0.1)
    res = S.picard_solve(cfg, 0.1)
    assert res.converged and res.geometric
    split = S.run(cfg).final
    assert float(np.max(np.abs(split.values - res.rho.values))) <= 1e-3


def test_picard_contraction_shrinks_with_horizon():
    g = grid1()
    k = newton1()
    rho0 = F.gaussian(g, 1.0, 1.0)
    q = {}
    for T in (0.2, 0.05):
        q[T] = S.picard_solve(S.SimConfig(k, rho0, dt=T / 4, t_end=T), T).ratios[0]
    assert q[0.05] <= q[0.2] * math.sqrt(0.05 / 0.2)


def test_picard_divergence_raises():
    g = grid1()
    k = F.KernelSpec(P.newtonian(1).scaled(20.0), "grid")
    cfg = S.SimConfig(k, F.gaussian(g, 1.0, 1.0), dt=0.01, t_end=1.0)
    with pytest.raises(S.ContractionError) as info:
        S.picard_solve(cfg, 1.0)
    assert all(r > 1 for r in info.value.ratios[-2:])


def test_picard_argument_checks():
    cfg = S.SimConfig(newton1(), F.gaussian(grid1()))
    with pytest.raises(ValueError):
        S.picard_solve(cfg, 0.1, nodes=16)
    with pytest.raises(ValueError):
        S.picard_solve(cfg, 0.1, iterations=0)


def test_stiffness_limit():
    g = grid1()
    cfg = S.SimConfig(newton1(), F.gaussian(g, 50.0, 0.3), dt=0.1, t_end=0.1, max_substeps=1)
    with pytest.raises(S.StiffnessError) as info:
        S.run(cfg)
    assert info.value.diagnostics is not None
    assert len(info.value.diagnostics) == 1


def test_positivity_violation_is_reported():
    # the spectral multiplier rings around a single-node spike; the lattice step does not
    g = grid1()
    spike = F.zeros(g)
    spike.values[g.n // 2] = 1.0
    strict = dict(dt=1e-3, t_end=1e-3, positivity_tolerance=1e-16)
    with pytest.raises(S.PositivityViolation):
        S.run(S.SimConfig(zero_kernel(), spike, diffusion="spectral", **strict))
    assert S.run(S.SimConfig(zero_kernel(), spike, **strict)).final.values.min() >= -1e-16


def test_blowup_threshold_halts_run():
    g = grid1()
    cfg = S.SimConfig(zero_kernel(), F.zeros(g), F.gaussian(g), dt=0.1, t_end=1.0,
                      blowup_factor=0.05)
    diag = S.run(cfg)
    assert diag.blowup and diag.halted
    assert len(diag) < 11


def test_config_validation():
    g = grid1()
    k = newton1()
    rho = F.gaussian(g)
    for kwargs in (dict(dt=0.0), dict(dt=1.0, t_end=0.5), dict(scheme="rk4"), dict(cfl=0.9),
                   dict(record_every=0), dict(diffusion="implicit")):
        with pytest.raises(ValueError):
            S.SimConfig(k, rho, **kwargs)
    with pytest.raises(ValueError):
        S.SimConfig(k, rho * -1.0)
    with pytest.raises(ValueError):
        S.SimConfig(k, rho, F.gaussian(grid1(128)))


def test_diagnostics_csv(tmp_path):
    g = grid1(64, 8.0)
    cfg = S.SimConfig(newton1(), F.gaussian(g), dt=0.1, t_end=0.5, record_every=2)
    diag = S.run(cfg)
    assert diag.times == pytest.approx([0.0, 0.2, 0.4, 0.5])
    path = tmp_path / "d.csv"
    diag.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,sup,l1,argmax_x1,envelope,mass_residual"
    assert len(lines) == 5


def test_runs_are_deterministic():
    g = grid1()
    cfg = S.SimConfig(newton1(), F.gaussian(g, 2.0, 0.5), F.gaussian(g), dt=0.02, t_end=0.5)
    a, b = S.run(cfg), S.run(cfg)
    np.testing.assert_array_equal(a.final.values, b.final.values)
