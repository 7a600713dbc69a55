"""Checks on computed solutions and the probes that construct worst cases.

Envelopes and the maximum principle compare recorded sup-norm series with
closed-form bounds.  The dichotomy and clumping experiments reduce to time
quadratures of heat-kernel averages and classify their growth per dimension.
The sharpness construction builds initial data that violates the sup-norm
differential inequality whenever the rate constant exceeds ``c_W``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from enum import Enum

import numpy as np
from scipy import integrate

from . import potential as pot
from .field import (Field, Grid, KernelSpec, divergence_of_grad_conv, heat_step, ifft, norms,
                    plateau_bump)
from .potential import unit_sphere_area


class NoEnvelopeError(ValueError):
    """Raised when no sup-norm envelope exists (non-positive index)."""


class ConstructionError(RuntimeError):
    def __init__(self, message, best_margin):
        super().__init__(message)
        self.best_margin = best_margin


# -- envelope --------------------------------------------------------------------------


class Branch(str, Enum):
    COTH = "coth"
    TANH = "tanh"
    CONSTANT = "constant"


@dataclass(frozen=True)
class Envelope:
    """Solution of ``G' = f_sup - c G^2`` with ``G(0) = rho0_sup``."""

    M: float
    branch: Branch
    t0: float
    c_w: float
    rho0_sup: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        c, M = self.c_w, self.M
        if self.branch is Branch.CONSTANT:
            out = np.full_like(t, M)
        elif M == 0.0:
            # f = 0: G = 1/(c (t + t0)), the M -> 0 limit of the coth branch
            out = 1.0 / (c * (t + self.t0))
        elif self.branch is Branch.TANH:
            out = M * np.tanh(c * M * (t + self.t0))
        else:
            out = M / np.tanh(c * M * (t + self.t0))
        return float(out) if out.ndim == 0 else out


def make_envelope(c_w: float, f_sup: float, rho0_sup: float) -> Envelope:
    if not c_w > 0:
        raise NoEnvelopeError(f"no envelope for c_W = {c_w} <= 0")
    if f_sup < 0 or rho0_sup < 0:
        raise ValueError("sup norms must be non-negative")
    M = math.sqrt(f_sup / c_w)
    if rho0_sup == M or math.isclose(rho0_sup, M, rel_tol=1e-12, abs_tol=0.0):
        return Envelope(M, Branch.CONSTANT, 0.0, c_w, rho0_sup)
    if M == 0.0:
        return Envelope(0.0, Branch.COTH, 1.0 / (c_w * rho0_sup), c_w, rho0_sup)
    if rho0_sup > M:
        return Envelope(M, Branch.COTH, math.atanh(M / rho0_sup) / (c_w * M), c_w, rho0_sup)
    return Envelope(M, Branch.TANH, math.atanh(rho0_sup / M) / (c_w * M), c_w, rho0_sup)


@dataclass
class EnvelopeReport:
    passed: bool
    max_ratio: float
    worst_time: float
    slack: float
    records: int


def verify_envelope(diag, env: Envelope, slack: float = 0.05) -> EnvelopeReport:
    """Check ``sup(t) <= env(t) (1 + slack)`` at every record."""
    t = diag.array("times")
    sup = diag.array("sup")
    bound = np.asarray(env(t), dtype=float)
    diag.envelope = list(bound)
    atol = 1e-12 * max(float(np.max(np.abs(sup))), 1e-300)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(bound > 0, sup / np.where(bound > 0, bound, 1.0),
                         np.where(sup <= atol, 0.0, np.inf))
    k = int(np.argmax(ratio))
    ok = bool(np.all(sup <= bound * (1 + slack) + atol))
    return EnvelopeReport(ok, float(ratio[k]), float(t[k]), slack, len(t))


@dataclass
class MaximumPrincipleReport:
    applicable: bool
    passed: bool
    sup0: float
    max_sup: float
    argmax_record: int
    tolerance: float


def maximum_principle_check(diag, M: float, tolerance: float = 1e-9) -> MaximumPrincipleReport:
    """Starting at or above ``M``, the sup-norm never exceeds its initial value.

    When ``sup(0) < M`` the hypothesis fails and the check passes vacuously.
    """
    sup = diag.array("sup")
    sup0, top = float(sup[0]), float(np.max(sup))
    applicable = sup0 >= M
    ok = top <= sup0 * (1 + tolerance) if applicable else True
    return MaximumPrincipleReport(applicable, bool(ok), sup0, top, int(np.argmax(sup)), tolerance)


@dataclass
class BoundednessReport:
    applicable: bool
    passed: bool
    max_sup: float
    bound: float
    slack: float


def global_boundedness_check(diag, M: float, slack: float = 0.02) -> BoundednessReport:
    sup = diag.array("sup")
    applicable = float(sup[0]) <= M * (1 + 1e-12)
    top = float(np.max(sup))
    ok = top <= M * (1 + slack) if applicable else True
    return BoundednessReport(applicable, bool(ok), top, M, slack)


@dataclass
class InequalityReport:
    passed: bool
    worst_excess: float
    worst_time: float
    slack: float


def differential_inequality_check(diag, c_w: float, f_sup: float, slack: float = 0.05):
    """Forward differences of the sup-norm against ``f_sup - c_w sup^2`` (plus ``slack * f_sup``)."""
    t = diag.array("times")
    sup = diag.array("sup")
    if len(t) < 2:
        return InequalityReport(True, -math.inf, math.nan, slack)
    fd = np.diff(sup) / np.diff(t)
    rhs = f_sup - c_w * sup[:-1] ** 2 + slack * f_sup
    excess = fd - rhs
    k = int(np.argmax(excess))
    return InequalityReport(bool(np.all(excess <= 1e-12)), float(excess[k]), float(t[k]), slack)


def envelopes_ordered(c_w, f_sup, a, b, times) -> bool:
    """Envelopes started from ``a < b`` stay ordered at the given times."""
    lo, hi = make_envelope(c_w, f_sup, a), make_envelope(c_w, f_sup, b)
    return bool(np.all(np.asarray(lo(times)) <= np.asarray(hi(times)) * (1 + 1e-12)))


# -- growth fits -----------------------------------------------------------------------


class Verdict(str, Enum):
    UNBOUNDED = "unbounded"
    CONVERGES = "converges"
    INCONCLUSIVE = "inconclusive"


@dataclass
class GrowthFit:
    window: tuple
    power_exponent: float
    log_slope: float
    log_intercept: float
    log_residual: float
    limit_fit: float
    limit_residual: float
    increment_ratio: float


def fit_growth(times, values, octaves: int = 3) -> GrowthFit:
    """Least-squares fits over the last ``octaves`` doublings of the ladder.

    Three models: ``v ~ t^p`` (log-log slope), ``v ~ a log t + b`` and
    ``v ~ L - a t^{-1/2}``.  Residuals are maximal relative misfits.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    sel = t >= t[-1] / 2.0 ** octaves * (1 - 1e-12)
    if sel.sum() < 3:
        raise ValueError("ladder too short for a stable fit")
    ts, vs = t[sel], v[sel]
    scale = np.maximum(np.abs(vs), 1e-300)
    p = float(np.polyfit(np.log(ts), np.log(np.maximum(vs, 1e-300)), 1)[0])
    a, b = np.polyfit(np.log(ts), vs, 1)
    log_res = float(np.max(np.abs(vs - (a * np.log(ts) + b)) / scale))
    A = np.column_stack([np.ones_like(ts), -ts ** -0.5])
    (lim, amp), *_ = np.linalg.lstsq(A, vs, rcond=None)
    lim_res = float(np.max(np.abs(vs - A @ np.array([lim, amp])) / scale))
    inc = np.diff(vs)
    ratio = float(inc[-1] / inc[-2]) if len(inc) >= 2 and inc[-2] != 0 else math.nan
    return GrowthFit((float(ts[0]), float(ts[-1])), p, float(a), float(b), log_res,
                     float(lim), lim_res, ratio)


def _verdict(values, fit: GrowthFit, converge_ratio=0.85) -> Verdict:
    if np.all(np.asarray(values) == 0):
        return Verdict.CONVERGES
    if math.isnan(fit.increment_ratio):
        return Verdict.INCONCLUSIVE
    return Verdict.CONVERGES if fit.increment_ratio < converge_ratio else Verdict.UNBOUNDED


def doubling_ladder(t_max=2.0 ** 20, t_min=1.0):
    k = int(round(math.log2(t_max / t_min)))
    return t_min * 2.0 ** np.arange(k + 1)


def _cumulative_integral(fn, ladder, epsrel=1e-10):
    """``int_0^t fn`` at every ladder time; one adaptive quadrature per octave."""
    out, total, lo = [], 0.0, 0.0
    for t in ladder:
        val, _ = integrate.quad(fn, lo, t, epsabs=0.0, epsrel=epsrel, limit=200)
        total += val
        out.append(total)
        lo = t
    return np.asarray(out)


# -- dichotomy for W = 0 ---------------------------------------------------------------


class HeatAverage:
    """``(G_s * f)(x0)`` for ``s >= 0``.

    Short times use the spectral heat multiplier on the periodic grid; once
    the kernel width exceeds a sixth of the box the periodic images matter,
    and the whole-space kernel is summed directly against the samples of f.
    """

    def __init__(self, f: Field, point=None, switch=None):
        self.f = f
        grid = f.grid
        self.point = np.zeros(grid.dimension) if point is None else np.asarray(point, float)
        self.switch = (grid.L / 6.0) ** 2 if switch is None else switch
        coords = grid.coords()
        self.r2 = sum((c - p) ** 2 for c, p in zip(coords, self.point))
        self.k2 = grid.k_squared()
        self.hat = np.fft.rfftn(f.values)
        self.index = tuple(int(round(i)) for i in (self.point + grid.L) / grid.h)
        self.mass = f.l1

    def __call__(self, s: float) -> float:
        grid = self.f.grid
        if s <= 0:
            return float(self.f.values[self.index])
        if s <= self.switch:
            vals = ifft(grid, self.hat * np.exp(-0.5 * s * self.k2))
            return float(vals[self.index])
        d = grid.dimension
        g = (2 * np.pi * s) ** (-d / 2) * np.exp(-self.r2 / (2 * s))
        return float(np.sum(g * self.f.values) * grid.cell_volume)


def green_constant(d: int) -> float:
    """``G(x) = int_0^inf G_s(x) ds = green_constant(d) |x|^{2-d}`` for ``d >= 3``."""
    if d < 3:
        raise ValueError("the heat kernel is not integrable in time for d < 3")
    return math.gamma(d / 2 - 1) / (2 * math.pi ** (d / 2))


def green_convolution_at(f: Field, point=None) -> float:
    """``(G * f)(point)`` in d = 3 by direct summation with singularity subtraction.

    ``f - f(point) phi`` with ``phi = exp(-|x - point|^2 / 2)`` vanishes at the
    singular node; ``G * phi`` at the centre equals 2 in closed form.
    """
    grid = f.grid
    if grid.dimension != 3:
        raise ValueError("closed-form Green's function used here is three-dimensional")
    point = np.zeros(3) if point is None else np.asarray(point, float)
    r = np.sqrt(sum((c - p) ** 2 for c, p in zip(grid.coords(), point)))
    index = tuple(int(round(i)) for i in (point + grid.L) / grid.h)
    f0 = float(f.values[index])
    phi = np.exp(-0.5 * r * r)
    rem = f.values - f0 * phi
    safe = np.where(r > 0, r, 1.0)
    kern = np.where(r > 0, 1.0 / (2 * np.pi * safe), 0.0)
    return float(np.sum(kern * rem) * grid.cell_volume) + 2.0 * f0


@dataclass
class DichotomyReport:
    dimension: int
    times: np.ndarray
    values: np.ndarray
    fit: GrowthFit | None
    growth_exponent_fit: float
    verdict: Verdict
    fitted_limit: float | None
    reference_limit: float | None = None
    notes: list = dc_field(default_factory=list)


def dichotomy_experiment(f: Field, t_ladder=None, point=None) -> DichotomyReport:
    """``rho_t(x0) = int_0^t (G_s * f)(x0) ds`` for ``W = 0``, ``rho_0 = 0``."""
    d = f.grid.dimension
    ladder = doubling_ladder() if t_ladder is None else np.asarray(t_ladder, dtype=float)
    if np.all(f.values == 0):
        zeros = np.zeros_like(ladder)
        return DichotomyReport(d, ladder, zeros, None, math.nan, Verdict.CONVERGES, 0.0, 0.0,
                               ["zero immigration"])
    avg = HeatAverage(f, point)
    values = _cumulative_integral(avg, ladder)
    reference = green_convolution_at(f, point) if d >= 3 else None
    return _classify(d, ladder, values, reference)


def _classify(d, ladder, values, reference=None):
    notes = []
    try:
        fit = fit_growth(ladder, values)
    except ValueError as err:
        return DichotomyReport(d, ladder, values, None, math.nan, Verdict.INCONCLUSIVE, None,
                               reference, [str(err)])
    verdict = _verdict(values, fit)
    limit = fit.limit_fit if verdict is Verdict.CONVERGES else None
    return DichotomyReport(d, ladder, values, fit, fit.power_exponent, verdict, limit, reference,
                           notes)


# -- clumping --------------------------------------------------------------------------


def ball_heat_mass(d: int, u: float) -> float:
    """``int_{B(0,1)} G_{2u}(x) dx`` by radial quadrature."""
    if u <= 0:
        return 1.0
    cd = unit_sphere_area(d)
    var = 2.0 * u

    def integrand(r):
        return cd * (2 * np.pi * var) ** (-d / 2) * np.exp(-r * r / (2 * var)) * r ** (d - 1)

    # for tiny u the mass sits within a few widths of the origin
    width = math.sqrt(var)
    if width < 0.05:
        val, _ = integrate.quad(integrand, 0.0, min(1.0, 12 * width), epsabs=0.0, epsrel=1e-12)
        return val
    val, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=0.0, epsrel=1e-12)
    return val


@dataclass
class ClumpingReport:
    dimension: int
    gamma: float
    times: np.ndarray
    values: np.ndarray
    fit: GrowthFit | None
    exponent: float
    verdict: Verdict
    tail_increments: np.ndarray


def clumping_exponent(d: int, gamma: float = 1.0, t_ladder=None) -> ClumpingReport:
    """``E(t) = gamma int_0^t int_{B(0,1)} G_{2(t-s)}(x) dx ds`` and its growth class."""
    if d not in (1, 2, 3):
        raise ValueError(f"dimension must be 1, 2 or 3, got {d}")
    if gamma < 0:
        raise ValueError("rate must be non-negative")
    ladder = doubling_ladder() if t_ladder is None else np.asarray(t_ladder, dtype=float)
    if gamma == 0:
        z = np.zeros_like(ladder)
        return ClumpingReport(d, gamma, ladder, z, None, math.nan, Verdict.CONVERGES, np.zeros(0))
    values = gamma * _cumulative_integral(lambda u: ball_heat_mass(d, u), ladder)
    try:
        fit = fit_growth(ladder, values)
    except ValueError:
        return ClumpingReport(d, gamma, ladder, values, None, math.nan, Verdict.INCONCLUSIVE,
                              np.diff(values))
    return ClumpingReport(d, gamma, ladder, values, fit, fit.power_exponent,
                          _verdict(values, fit), np.diff(values))


# -- sharpness -------------------------------------------------------------------------


@dataclass
class SharpnessResult:
    field: Field
    epsilon: float
    margin: float
    divergence_at_x0: float
    c: float
    c_w: float
    x0_index: tuple
    history: list


def _min_image_radius(grid: Grid, center):
    diffs = []
    for c, x0 in zip(grid.coords(), center):
        dx = c - x0
        dx = dx - 2 * grid.L * np.floor(dx / (2 * grid.L) + 0.5)
        diffs.append(dx)
    return np.sqrt(sum(dx * dx for dx in diffs))


def sharpness_counterexample(kernel: KernelSpec, grid: Grid, c: float, height: float = 1.0,
                             x0=None, c_w: float | None = None, rungs: int = 8,
                             quad=None) -> SharpnessResult:
    """Initial data whose divergence term at ``x0`` beats ``-c rho(x0)``.

    A bump of the requested height with a one-cell plateau sits at ``x0``;
    mass of the same height fills the shell where ``Lap W > 0`` out to
    radius ``1/eps``, smoothed at scale ``eps``.  ``eps`` runs over ``2^-k``
    box widths.
    """
    W = kernel.potential
    if c_w is None:
        c_w = pot.compute_indices(W, quad).c_w
    if not c > c_w:
        raise ValueError(f"rate {c} must exceed c_W = {c_w}")
    kernel.check(grid)
    x0 = np.zeros(grid.dimension) if x0 is None else np.asarray(x0, float)
    idx = tuple(int(round(i)) % grid.n for i in (x0 + grid.L) / grid.h)
    x0 = grid.position(idx)
    r = _min_image_radius(grid, x0)
    safe = np.where(r > 0, r, 1.0)
    lap = np.where(r > 0, W.lap(safe), 0.0)
    history, best = [], -math.inf
    for k in range(1, rungs + 1):
        eps = 2.0 ** -k * 2 * grid.L
        plateau = grid.h * (1 + 1e-9)
        radius = min(max(eps, plateau + 3 * grid.h), grid.L / 2)
        width = max(eps / 4, grid.h)
        outer = min(1.0 / eps, grid.L - 3 * width)
        shell = (lap > 0) & (r >= radius + 2 * width) & (r <= outer)
        rho = plateau_bump(grid, height, radius, plateau, x0).values
        if np.any(shell):
            ind = Field(grid, height * shell.astype(float))
            smooth = np.clip(heat_step(ind, width * width).values, 0.0, height)
            rho = np.maximum(rho, smooth)
        field = Field(grid, rho)
        div = float(divergence_of_grad_conv(field, kernel).values[idx])
        margin = div + c * float(rho[idx])
        history.append((eps, margin))
        best = max(best, margin)
        if margin > 0:
            return SharpnessResult(field, eps, margin, div, c, c_w, idx, history)
    raise ConstructionError(f"no counterexample on {rungs} rungs; best margin {best:.4g}", best)


@dataclass
class ForwardDifference:
    value: float
    threshold: float
    margin: float
    sup0: float
    sup1: float
    min_value: float
    dt: float


def forward_difference_probe(rho0: Field, kernel: KernelSpec, c: float, immigration=None,
                             dt: float | None = None) -> ForwardDifference:
    """One splitting step from ``rho0``; compares ``(sup(dt) - sup(0))/dt`` with
    ``f_sup - c sup(0)^2``.  The default step ``1e-4 h^2`` keeps the O(dt h^-4)
    diffusion correction at the plateau negligible."""
    from .solver import SimConfig, step_splitting

    if dt is None:
        dt = 1e-4 * rho0.grid.h ** 2
    cfg = SimConfig(kernel, rho0, immigration, dt=dt, t_end=dt, positivity_tolerance=math.inf)
    out, _ = step_splitting(rho0, cfg, 0.0, dt)
    s0, s1 = norms(rho0).sup, norms(out).sup
    f_sup = cfg.source_sup(0.0)
    value = (s1 - s0) / dt
    threshold = f_sup - c * s0 * s0
    return ForwardDifference(value, threshold, value - threshold, s0, s1,
                             float(np.min(out.values)), dt)
