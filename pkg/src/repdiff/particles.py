"""Branching Brownian particles with immigration and mass-weighted pair repulsion.

Each particle carries mass ``1/N0``.  Over a step of length ``dt`` a
particle diffuses with covariance ``dt I``, drifts by ``-weight * sum_j
grad W(x_i - x_j) dt``, and branches with probability ``rate * dt`` into a
mean-one number of offspring; immigrants arrive as a Poisson stream of
intensity ``N0 * |f|_1`` placed according to ``f``.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from . import kernels
from .field import Field, Grid, KernelSpec, fft, heat_step, ifft
from .potential import RadialPotential


class PopulationExplosion(RuntimeError):
    pass


@dataclass(frozen=True)
class OffspringLaw:
    counts: tuple = (0, 2)
    probs: tuple = (0.5, 0.5)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if len(self.counts) != len(p) or np.any(p < 0) or not math.isclose(p.sum(), 1.0):
            raise ValueError("offspring probabilities must be non-negative and sum to one")
        if any(c < 0 for c in self.counts):
            raise ValueError("offspring counts must be non-negative")
        mean = float(np.dot(self.counts, p))
        if not math.isclose(mean, 1.0, rel_tol=1e-12):
            raise ValueError(f"offspring law must have mean one (critical branching), got {mean}")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.choice(np.asarray(self.counts), size=size, p=np.asarray(self.probs))


@dataclass
class BpsConfig:
    grid: Grid
    branch_rate: float = 1.0
    offspring: OffspringLaw = dc_field(default_factory=OffspringLaw)
    immigration: Field | None = None
    interaction: RadialPotential | KernelSpec | None = None
    dt: float = 0.01
    n0: float = 1000.0
    seed: int = 0
    cap: int = 20_000
    mollify: float | None = None

    def __post_init__(self):
        if self.branch_rate < 0:
            raise ValueError("branching rate must be non-negative")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.branch_rate * self.dt > 0.1:
            raise ValueError(f"branch_rate * dt = {self.branch_rate * self.dt:.3g} exceeds 0.1")
        if not self.n0 > 0:
            raise ValueError("N0 must be positive")
        if isinstance(self.interaction, KernelSpec):
            self.interaction = self.interaction.potential
        if self.interaction is not None and self.interaction.dimension != self.grid.dimension:
            raise ValueError("interaction dimension does not match the box")
        if self.immigration is not None and np.min(self.immigration.values) < 0:
            raise ValueError("immigration must be non-negative")

    @property
    def weight(self) -> float:
        return 1.0 / self.n0

    @property
    def mollify_radius(self) -> float:
        return self.grid.h if self.mollify is None else self.mollify


@dataclass
class ParticleEnsemble:
    positions: np.ndarray
    weight: float
    rng: np.random.Generator
    time: float = 0.0

    @property
    def count(self) -> int:
        return int(self.positions.shape[0])

    @property
    def mass(self) -> float:
        return self.weight * self.count

    def copy(self) -> "ParticleEnsemble":
        rng = np.random.default_rng()
        rng.bit_generator.state = self.rng.bit_generator.state
        return ParticleEnsemble(self.positions.copy(), self.weight, rng, self.time)

    def write_csv(self, path, append=False):
        d = self.positions.shape[1]
        with open(path, "a" if append else "w", newline="") as fh:
            w = csv.writer(fh)
            if not append:
                w.writerow(["t"] + [f"x{i + 1}" for i in range(d)])
            for p in self.positions:
                w.writerow([repr(self.time)] + [repr(float(x)) for x in p])


def _wrap(x, L):
    return (x + L) % (2 * L) - L


def sample_field(f: Field, k: int, rng: np.random.Generator) -> np.ndarray:
    """``k`` points drawn from the density ``f`` (cell choice, then uniform in the cell)."""
    grid = f.grid
    if k == 0:
        return np.zeros((0, grid.dimension))
    p = np.clip(f.values.reshape(-1), 0.0, None)
    total = p.sum()
    if total <= 0:
        raise ValueError("cannot sample from a zero density")
    cells = rng.choice(p.size, size=k, p=p / total)
    idx = np.stack(np.unravel_index(cells, grid.shape), axis=-1).astype(float)
    pos = -grid.L + grid.h * (idx + rng.random(idx.shape) - 0.5)
    return _wrap(pos, grid.L)


def initial_ensemble(cfg: BpsConfig, rho0: Field | None = None, rng=None) -> ParticleEnsemble:
    """Poisson(N0 * mass) particles sampled from ``rho0``."""
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    d = cfg.grid.dimension
    if rho0 is None or rho0.l1 <= 0:
        return ParticleEnsemble(np.zeros((0, d)), cfg.weight, rng)
    k = int(rng.poisson(cfg.n0 * rho0.l1))
    return ParticleEnsemble(sample_field(rho0, k, rng), cfg.weight, rng)


def drift_table(W: RadialPotential, grid: Grid, mollify: float):
    """``g(r) = W'(r)/r`` on a uniform radius table; constant inside the mollification radius."""
    dr = mollify / 8.0
    rmax = grid.L * math.sqrt(grid.dimension) + 2 * dr
    r = np.arange(int(math.ceil(rmax / dr)) + 2) * dr
    rr = np.maximum(r, mollify)
    return W.w1(rr) / rr, dr


_table_cache: dict = {}


def _drift(ens: ParticleEnsemble, cfg: BpsConfig) -> np.ndarray:
    key = (id(cfg.interaction), cfg.grid, cfg.mollify_radius)
    if key not in _table_cache:
        _table_cache.clear()
        _table_cache[key] = drift_table(cfg.interaction, cfg.grid, cfg.mollify_radius)
    table, dr = _table_cache[key]
    return -ens.weight * np.asarray(
        kernels.pair_drift(np.ascontiguousarray(ens.positions), 2 * cfg.grid.L, table, dr))


def bps_step(ens: ParticleEnsemble, cfg: BpsConfig) -> ParticleEnsemble:
    """Advance the ensemble by one step of length ``cfg.dt`` (in place; also returned)."""
    rng, dt, L = ens.rng, cfg.dt, cfg.grid.L
    x = ens.positions
    if ens.count:
        if cfg.interaction is not None and ens.count > 1:
            x = x + dt * _drift(ens, cfg)
        x = x + math.sqrt(dt) * rng.standard_normal(x.shape)
        if cfg.branch_rate > 0:
            events = rng.random(ens.count) < cfg.branch_rate * dt
            if np.any(events):
                kids = np.ones(ens.count, dtype=np.int64)
                kids[events] = cfg.offspring.sample(rng, int(events.sum()))
                x = np.repeat(x, kids, axis=0)
    if cfg.immigration is not None:
        k = int(rng.poisson(cfg.n0 * cfg.immigration.l1 * dt))
        if k:
            x = np.concatenate([x, sample_field(cfg.immigration, k, rng)])
    ens.positions = _wrap(x, L)
    ens.time += dt
    if ens.count > cfg.cap:
        raise PopulationExplosion(f"{ens.count} particles exceed the cap {cfg.cap} at t={ens.time:.4g}")
    return ens


def deposit(ens: ParticleEnsemble, grid: Grid) -> Field:
    """Cloud-in-cell deposit of the particle masses onto the grid nodes (density units)."""
    d, n, h = grid.dimension, grid.n, grid.h
    out = np.zeros(grid.shape)
    if ens.count == 0:
        return Field(grid, out)
    u = (ens.positions + grid.L) / h
    base = np.floor(u).astype(np.int64)
    frac = u - base
    for corner in range(2 ** d):
        bits = [(corner >> a) & 1 for a in range(d)]
        w = np.ones(ens.count)
        idx = []
        for a, b in enumerate(bits):
            w = w * (frac[:, a] if b else 1.0 - frac[:, a])
            idx.append((base[:, a] + b) % n)
        np.add.at(out, tuple(idx), w)
    return Field(grid, out * ens.weight / grid.cell_volume)


def empirical_density(ens: ParticleEnsemble, grid: Grid, bandwidth: float) -> Field:
    """Gaussian kernel density estimate with standard deviation ``bandwidth``; mass equals ``weight * count``."""
    if bandwidth < grid.h * (1 - 1e-12):
        raise ValueError(f"bandwidth {bandwidth} is below the grid spacing {grid.h}")
    return heat_step(deposit(ens, grid), bandwidth ** 2)


def kde_expectation(rho: Field, bandwidth: float) -> Field:
    """Expected value of :func:`empirical_density` for particles distributed as ``rho``:
    the cloud-in-cell hat followed by the Gaussian kernel."""
    grid = rho.grid
    mult = np.exp(-0.5 * bandwidth ** 2 * grid.k_squared())
    for k in grid.wavenumbers():
        mult = mult * np.sinc(k * grid.h / (2 * np.pi)) ** 2
    return Field(grid, ifft(grid, fft(rho) * mult))


def max_cell_density(ens: ParticleEnsemble, grid: Grid) -> float:
    """Largest nearest-cell histogram density."""
    if ens.count == 0:
        return 0.0
    idx = np.floor((ens.positions + grid.L) / grid.h + 0.5).astype(np.int64) % grid.n
    flat = np.ravel_multi_index(tuple(idx.T), grid.shape)
    return float(np.bincount(flat).max() * ens.weight / grid.cell_volume)


@dataclass
class ParticleRun:
    times: list = dc_field(default_factory=list)
    counts: list = dc_field(default_factory=list)
    masses: list = dc_field(default_factory=list)
    max_density: list = dc_field(default_factory=list)
    final: ParticleEnsemble | None = None

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "count", "mass", "max_cell_density"])
            for row in zip(self.times, self.counts, self.masses, self.max_density):
                w.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])


def run_particles(cfg: BpsConfig, t_end: float, rho0: Field | None = None, record_every: int = 1,
                  density_grid: Grid | None = None, rng=None) -> ParticleRun:
    ens = initial_ensemble(cfg, rho0, rng)
    grid = cfg.grid if density_grid is None else density_grid
    out = ParticleRun()

    def rec():
        out.times.append(ens.time)
        out.counts.append(ens.count)
        out.masses.append(ens.mass)
        out.max_density.append(max_cell_density(ens, grid))

    rec()
    steps = int(round(t_end / cfg.dt))
    for k in range(1, steps + 1):
        bps_step(ens, cfg)
        if k % record_every == 0 or k == steps:
            rec()
    out.final = ens
    return out


@dataclass
class MeanfieldReport:
    n0: list
    distances: list
    replica_distance_mean: list
    replica_distance_se: list
    monotone: bool
    slope: float
    bandwidth: float
    t: float
    replicas: int
    pde_mass: float
    particle_mass: list


def meanfield_compare(cfg: BpsConfig, sim, t: float, replicas: int = 16,
                      n0_ladder=(1e2, 1e3, 1e4), bandwidth: float | None = None,
                      rho0: Field | None = None, threads: int = 1) -> MeanfieldReport:
    """L1 distance between replica-averaged density estimates and the PDE at time ``t``.

    The PDE field is passed through the same estimator in expectation
    (:func:`kde_expectation`), so the remaining distance is Monte Carlo
    error plus the finite-N interaction defect.
    """
    from .solver import run

    grid = cfg.grid
    bw = 2 * grid.h if bandwidth is None else bandwidth
    rho0 = sim.rho0 if rho0 is None else rho0
    pde = run(replace(sim, t_end=t)).final
    target = kde_expectation(pde, bw).values
    dv = grid.cell_volume
    seeds = np.random.SeedSequence(cfg.seed)
    distances, means, ses, masses = [], [], [], []
    for n0 in n0_ladder:
        local = replace(cfg, n0=float(n0))
        children = seeds.spawn(replicas)
        def replica(child, local=local):
            rng = np.random.default_rng(child)
            final = run_particles(local, t, rho0, record_every=10 ** 9, rng=rng).final
            return empirical_density(final, grid, bw).values, final.mass

        if threads > 1:
            with ThreadPoolExecutor(threads) as pool:
                results = list(pool.map(replica, children))
        else:
            results = [replica(c) for c in children]
        acc = np.zeros(grid.shape)
        per, mass = [], []
        for est, m in results:
            acc += est
            per.append(float(np.sum(np.abs(est - target)) * dv))
            mass.append(m)
        mean_est = acc / replicas
        distances.append(float(np.sum(np.abs(mean_est - target)) * dv))
        means.append(float(np.mean(per)))
        ses.append(float(np.std(per, ddof=1) / math.sqrt(replicas)) if replicas > 1 else math.nan)
        masses.append(float(np.mean(mass)))
    monotone = all(distances[i + 1] <= distances[i] for i in range(len(distances) - 1))
    slope = float(np.polyfit(np.log(n0_ladder), np.log(distances), 1)[0]) if len(distances) > 1 else math.nan
    return MeanfieldReport(list(map(float, n0_ladder)), distances, means, ses, monotone, slope, bw,
                           t, replicas, pde.l1, masses)
