"""Time integration of the repulsion-diffusion equation with immigration.

``step_splitting`` advances by Strang splitting: exact half-step diffusion,
conservative limited upwind advection, the immigration source, and another
half-step of diffusion.  ``picard_solve`` iterates the integral (mild) form
of the equation on a uniform time mesh and serves as an independent oracle
over short horizons.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from . import kernels
from .field import (Field, Grid, KernelSpec, boundary_ratio, face_velocity, fft, heat_step,
                    ifft, interaction_velocity, lattice_heat_step, norms)


class SolverError(RuntimeError):
    """Base class for numerical halts; ``diagnostics`` holds the partial record."""

    diagnostics = None


class PositivityViolation(SolverError):
    pass


class StiffnessError(SolverError):
    pass


class ContractionError(SolverError):
    def __init__(self, message, ratios=()):
        super().__init__(message)
        self.ratios = list(ratios)


Immigration = Field | Callable[[float], Field] | None


@dataclass
class SimConfig:
    kernel: KernelSpec
    rho0: Field
    immigration: Immigration = None
    dt: float = 0.01
    t_end: float = 1.0
    scheme: str = "splitting"
    positivity_tolerance: float = 1e-10
    record_every: int = 1
    blowup_factor: float = 1e6
    cfl: float = 0.45
    max_substeps: int = 10_000
    keep_snapshots: bool = False
    track_symmetry: bool = False
    diffusion: str = "lattice"

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_end >= self.dt:
            raise ValueError(f"t_end ({self.t_end}) must be at least dt ({self.dt})")
        if self.scheme not in ("splitting", "picard"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.diffusion not in ("lattice", "spectral"):
            raise ValueError(f"unknown diffusion step {self.diffusion!r}")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if not 0 < self.cfl <= 0.5:
            raise ValueError("cfl must lie in (0, 0.5] for the limited upwind scheme")
        self.kernel.check(self.grid)
        if np.min(self.rho0.values) < 0:
            raise ValueError("initial density must be non-negative")
        if isinstance(self.immigration, Field):
            if self.immigration.grid != self.grid:
                raise ValueError("immigration field lives on a different grid")
            if np.min(self.immigration.values) < 0:
                raise ValueError("immigration must be non-negative")

    @property
    def grid(self) -> Grid:
        return self.rho0.grid

    def diffuse(self, rho: Field, s: float) -> Field:
        return lattice_heat_step(rho, s) if self.diffusion == "lattice" else heat_step(rho, s)

    @property
    def constant_source(self) -> bool:
        return self.immigration is None or isinstance(self.immigration, Field)

    def source(self, t: float) -> Field | None:
        if self.immigration is None or isinstance(self.immigration, Field):
            return self.immigration
        f = self.immigration(t)
        if np.min(f.values) < 0:
            raise ValueError(f"immigration is negative at t={t}")
        return f

    def source_sup(self, t: float = 0.0) -> float:
        f = self.source(t)
        return 0.0 if f is None else f.sup


@dataclass
class Diagnostics:
    dimension: int
    times: list = dc_field(default_factory=list)
    sup: list = dc_field(default_factory=list)
    l1: list = dc_field(default_factory=list)
    argmax: list = dc_field(default_factory=list)
    envelope: list = dc_field(default_factory=list)
    mass_residual: list = dc_field(default_factory=list)
    boundary_ratio: list = dc_field(default_factory=list)
    asymmetry: list = dc_field(default_factory=list)
    snapshots: list = dc_field(default_factory=list)
    blowup: bool = False
    halted: str | None = None
    max_substeps: int = 0
    final: Field | None = None

    def record(self, t, rho: Field, expected_mass, track_symmetry=False):
        nm = norms(rho)
        self.times.append(float(t))
        self.sup.append(nm.sup)
        self.l1.append(nm.l1)
        self.argmax.append(tuple(rho.grid.position(nm.argmax)))
        self.envelope.append(math.nan)
        self.mass_residual.append(abs(nm.l1 - expected_mass))
        self.boundary_ratio.append(boundary_ratio(rho))
        if track_symmetry:
            from .field import asymmetry
            self.asymmetry.append(asymmetry(rho))

    def __len__(self):
        return len(self.times)

    def array(self, name) -> np.ndarray:
        return np.asarray(getattr(self, name), dtype=float)

    def fill_envelope(self, env):
        self.envelope = [float(env(t)) for t in self.times]

    def write_csv(self, path):
        cols = ["t", "sup", "l1"] + [f"argmax_x{i + 1}" for i in range(self.dimension)]
        cols += ["envelope", "mass_residual"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for k in range(len(self.times)):
                w.writerow([repr(self.times[k]), repr(self.sup[k]), repr(self.l1[k]),
                            *(repr(float(x)) for x in self.argmax[k]),
                            repr(self.envelope[k]), repr(self.mass_residual[k])])


# -- splitting -------------------------------------------------------------------------


def _flux_difference_axis(rho: np.ndarray, vface: np.ndarray, axis: int) -> np.ndarray:
    r = np.ascontiguousarray(np.moveaxis(rho, axis, -1))
    v = np.ascontiguousarray(np.moveaxis(vface, axis, -1))
    shape = r.shape
    out = kernels.upwind_flux_difference(r.reshape(-1, shape[-1]), v.reshape(-1, shape[-1]))
    return np.moveaxis(np.asarray(out).reshape(shape), -1, axis)


def advection_rate(rho: np.ndarray, vface: np.ndarray, h: float) -> np.ndarray:
    """``-div(rho v)`` by limited upwind fluxes on the faces."""
    total = np.zeros_like(rho)
    for a in range(rho.ndim):
        total -= _flux_difference_axis(rho, vface[a], a)
    return total / h


def advect(rho: Field, kernel: KernelSpec, dt: float, cfl=0.45, max_substeps=10_000):
    """Advance ``d_t rho + div(rho v) = 0`` with ``v = -grad W * rho`` frozen over ``dt``.

    Two-stage Heun sub-steps keep each forward-Euler stage within the
    positivity bound ``tau * sum_a max|v_a| / h <= 1/2``.
    Returns the new field and the number of sub-steps used.
    """
    grid = rho.grid
    vf = face_velocity(rho, kernel)
    speed = sum(float(np.max(np.abs(vf[a]))) for a in range(grid.dimension)) / grid.h
    nsub = max(1, math.ceil(dt * speed / cfl - 1e-12))
    if nsub > max_substeps:
        raise StiffnessError(f"advection needs {nsub} sub-steps (limit {max_substeps}); "
                             f"max speed {speed * grid.h:.3g}")
    tau = dt / nsub
    r = rho.values
    for _ in range(nsub):
        r1 = r + tau * advection_rate(r, vf, grid.h)
        r = 0.5 * (r + r1 + tau * advection_rate(r1, vf, grid.h))
    return Field(grid, r), nsub


def step_splitting(rho: Field, cfg: SimConfig, t: float = 0.0, dt: float | None = None):
    """One Strang step from time ``t``; returns ``(rho_new, substeps)``."""
    dt = cfg.dt if dt is None else dt
    half = cfg.diffuse(rho, 0.5 * dt)
    adv, nsub = advect(half, cfg.kernel, dt, cfg.cfl, cfg.max_substeps)
    f = cfg.source(t + 0.5 * dt)
    if f is not None:
        adv = adv + dt * f.values
    out = cfg.diffuse(adv, 0.5 * dt)
    sup = float(np.max(out.values))
    floor = -cfg.positivity_tolerance * max(sup, np.finfo(float).tiny)
    low = float(np.min(out.values))
    if low < floor:
        raise PositivityViolation(f"density {low:.3e} below tolerance {floor:.3e} at t={t + dt:.6g}")
    return out, nsub


def run(cfg: SimConfig, envelope=None) -> Diagnostics:
    """Integrate to ``cfg.t_end`` with the splitting scheme and record diagnostics."""
    grid = cfg.grid
    diag = Diagnostics(grid.dimension)
    rho = cfg.rho0.copy()
    m0 = rho.l1
    added = 0.0
    scale = max(rho.sup, cfg.source_sup(0.0) * cfg.t_end, np.finfo(float).tiny)
    threshold = cfg.blowup_factor * scale
    nsteps = max(1, int(round(cfg.t_end / cfg.dt)))
    dt = cfg.t_end / nsteps
    diag.record(0.0, rho, m0, cfg.track_symmetry)
    if cfg.keep_snapshots:
        diag.snapshots.append((0.0, rho.copy()))
    t = 0.0
    try:
        for k in range(1, nsteps + 1):
            f = cfg.source(t + 0.5 * dt)
            rho, nsub = step_splitting(rho, cfg, t, dt)
            diag.max_substeps = max(diag.max_substeps, nsub)
            if f is not None:
                added += dt * f.l1
            t = k * dt
            blown = rho.sup > threshold or not np.isfinite(rho.sup)
            if k % cfg.record_every == 0 or k == nsteps or blown:
                diag.record(t, rho, m0 + added, cfg.track_symmetry)
                if cfg.keep_snapshots:
                    diag.snapshots.append((t, rho.copy()))
            if blown:
                diag.blowup = True
                diag.halted = f"sup-norm {rho.sup:.3e} exceeded blowup threshold {threshold:.3e}"
                break
    except SolverError as err:
        diag.halted = str(err)
        diag.final = rho
        err.diagnostics = diag
        raise
    diag.final = rho
    if envelope is not None:
        diag.fill_envelope(envelope)
    return diag


# -- Picard oracle ---------------------------------------------------------------------


def _phi(z):
    """``phi1(z) = (1 - e^-z)/z`` and ``phi2(z) = (1 - (1 + z) e^-z)/z^2``, stable at small z."""
    z = np.asarray(z, dtype=float)
    small = z < 1e-4
    zs = np.where(small, 1.0, z)
    em = -np.expm1(-zs)
    phi1 = np.where(small, 1 - z / 2 + z * z / 6, em / zs)
    phi2 = np.where(small, 0.5 - z / 3 + z * z / 8, (em - zs * np.exp(-zs)) / (zs * zs))
    return phi1, phi2


@dataclass
class PicardResult:
    rho: Field
    times: np.ndarray
    distances: list
    ratios: list
    a_posteriori_error: float
    contraction_estimate: float
    iterations: int
    converged: bool
    trajectory: list

    @property
    def geometric(self) -> bool:
        """True when every measured ratio is below one (monotone geometric decay)."""
        return all(q < 1.0 for q in self.ratios)


def picard_solve(cfg: SimConfig, T: float, iterations: int = 30, nodes: int = 64,
                 tol: float = 1e-14) -> PicardResult:
    """Fixed-point iteration of the mild formulation on ``nodes + 1`` uniform times.

    Time integrals use the product trapezoid rule: the integrand is
    interpolated linearly between nodes and integrated exactly against the
    heat multiplier, so each mode stays stable for any wavenumber.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if nodes < 32:
        raise ValueError("the time mesh needs at least 32 intervals")
    if not T > 0:
        raise ValueError("horizon must be positive")
    grid = cfg.grid
    tau = T / nodes
    times = tau * np.arange(nodes + 1)
    lam = 0.5 * grid.k_squared()
    decay = np.exp(-lam * tau)
    phi1, phi2 = _phi(lam * tau)
    w_new = tau * (phi1 - phi2)
    w_old = tau * phi2
    ks = grid.wavenumbers_odd()
    rho0_hat = fft(cfg.rho0)

    def integrand_hat(values, t):
        rho = Field(grid, values)
        v = interaction_velocity(rho, cfg.kernel)
        # div(rho grad W * rho) = -div(rho v)
        s = -sum(1j * k * np.fft.rfftn(values * v[a]) for a, k in enumerate(ks))
        f = cfg.source(t)
        if f is not None:
            s = s + fft(f)
        return s

    def apply_map(traj):
        out = [cfg.rho0.values.copy()]
        acc = np.zeros_like(rho0_hat)
        prev = integrand_hat(traj[0], times[0])
        free = rho0_hat.copy()
        for k in range(1, nodes + 1):
            cur = integrand_hat(traj[k], times[k])
            acc = decay * acc + w_new * cur + w_old * prev
            free = free * decay
            out.append(ifft(grid, free + acc))
            prev = cur
        return out

    traj = [cfg.rho0.values.copy() for _ in times]
    distances, ratios = [], []
    converged = False
    m = 0
    for m in range(1, iterations + 1):
        new = apply_map(traj)
        dist = max(float(np.max(np.abs(a - b))) for a, b in zip(new, traj))
        traj = new
        distances.append(dist)
        if len(distances) > 1 and distances[-2] > 0:
            ratios.append(dist / distances[-2])
        if dist <= tol * max(1.0, float(np.max(np.abs(traj[-1])))):
            converged = True
            break
        if len(ratios) >= 2 and ratios[-1] > 1 and ratios[-2] > 1:
            raise ContractionError(
                f"Picard iterates diverge on [0, {T}]: ratio {ratios[-1]:.3g}", ratios)
    q = max(ratios) if ratios else 0.0
    return PicardResult(rho=Field(grid, traj[-1]), times=times, distances=distances,
                        ratios=ratios, a_posteriori_error=distances[-1], contraction_estimate=q,
                        iterations=m, converged=converged, trajectory=traj)
