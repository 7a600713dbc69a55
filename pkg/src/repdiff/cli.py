"""Command-line experiment harness.

Every command reads a flat ``key = value`` config, writes raw CSV series, a
``summary.txt`` with verdicts, margins and every tolerance used, and a
``resolved_config.txt`` holding each value the run consumed (defaults
included).  Exit status: 0 all checks pass, 1 a check failed, 2 bad
configuration, 3 numerical halt.
"""
from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analysis as an
from . import field as fld
from . import particles as bps
from . import potential as pot
from . import solver as sol
from .config import ConfigError, KeyValueConfig, format_kv

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_HALT = 0, 1, 2, 3
DEFAULT_N = {1: 256, 2: 128, 3: 64}


class Summary:
    """Ordered verdicts, metrics and tolerances of one experiment."""

    def __init__(self, command, strict=False):
        self.command = command
        self.strict = strict
        self.checks = []
        self.metrics = []
        self.tolerances = []
        self.notes = []

    def tol(self, name, value):
        """Register a tolerance; ``--strict`` halves it."""
        value = value / 2 if self.strict else value
        self.tolerances.append((name, value))
        return value

    def check(self, name, passed, value=None, bound=None):
        self.checks.append((name, bool(passed), value, bound))
        return passed

    def metric(self, name, value):
        self.metrics.append((name, value))

    @property
    def passed(self):
        return all(ok for _, ok, _, _ in self.checks)

    def text(self, status):
        lines = [f"experiment = {self.command}", f"status = {status}",
                 f"strict = {str(self.strict).lower()}"]
        for name, ok, value, bound in self.checks:
            extra = ""
            if value is not None:
                extra += f"  value={_fmt(value)}"
            if bound is not None:
                extra += f"  bound={_fmt(bound)}"
            lines.append(f"check.{name} = {'pass' if ok else 'FAIL'}{extra}")
        lines += [f"metric.{k} = {_fmt(v)}" for k, v in self.metrics]
        lines += [f"tolerance.{k} = {_fmt(v)}" for k, v in self.tolerances]
        lines += [f"note = {n}" for n in self.notes]
        return "\n".join(lines) + "\n"


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (list, tuple)):
        return ", ".join(_fmt(x) for x in v)
    return str(v)


# -- config readers --------------------------------------------------------------------


def read_potential(cfg: KeyValueConfig, base: Path | None, dimension=None):
    """``potential.*`` entries; a missing ``kind`` means Newtonian, a missing dimension d=1."""
    sub = cfg.subset("potential")
    sub.values.setdefault("kind", "newtonian")
    return pot.from_config(sub, base, dimension or 1)


def read_grid(cfg: KeyValueConfig, d: int, L: float = 16.0, n: int | None = None) -> fld.Grid:
    sub = cfg.subset("grid")
    return fld.Grid(d, sub.get_float("L", L), sub.get_int("n", n or DEFAULT_N[d]))


def read_kernel(cfg: KeyValueConfig, W) -> fld.KernelSpec:
    sub = cfg.subset("kernel")
    rep = sub.get_choice("representation", ["auto", "grid", "symbol"], "auto")
    if rep == "auto":
        k = fld.default_kernel(W)
        sub._note("representation", k.representation.value)
        if k.origin_rule is not None:
            sub._note("origin_rule", k.origin_rule.value)
        return k
    rule = sub.get_choice("origin_rule", ["cell_average", "zero", "none"], "cell_average")
    return fld.KernelSpec(W, rep, None if rule == "none" else rule)


def read_profile(cfg: KeyValueConfig, name: str, grid: fld.Grid, default="zero") -> fld.Field:
    """``name.profile`` in {zero, uniform, gaussian, bump} with height/width/radius/center."""
    sub = cfg.subset(name)
    kind = sub.get_choice("profile", ["zero", "uniform", "gaussian", "bump"], default)
    if kind == "zero":
        return fld.zeros(grid)
    height = sub.get_float("height", 1.0)
    if kind == "uniform":
        return fld.uniform(grid, height)
    center = sub.get_floats("center", [0.0] * grid.dimension)
    if len(center) != grid.dimension:
        raise ConfigError(f"{cfg.source}: {name}.center needs {grid.dimension} coordinates")
    if kind == "gaussian":
        return fld.gaussian(grid, height, sub.get_float("width", 1.0), center)
    return fld.bump(grid, height, sub.get_float("radius", 1.0), center)


def read_immigration(cfg: KeyValueConfig, grid: fld.Grid, default="zero"):
    """Immigration field, optionally modulated as ``f (1 + a sin(2 pi t / period))``."""
    f = read_profile(cfg, "immigration", grid, default)
    sub = cfg.subset("immigration")
    amp = sub.get_float("modulation_amplitude", 0.0)
    if amp == 0.0 or f.sup == 0.0:
        return (None if f.sup == 0.0 else f), f
    if not 0 < amp <= 1:
        raise ConfigError(f"{cfg.source}: immigration.modulation_amplitude must lie in (0, 1]")
    period = sub.get_float("modulation_period", 1.0)

    def family(t, f=f):
        return f * (1.0 + amp * math.sin(2 * math.pi * t / period))

    return family, f * (1.0 + amp)


def read_sim(cfg: KeyValueConfig, kernel, grid, rho0=None, source="zero", t_end=1.0):
    immigration, f_peak = read_immigration(cfg, grid, source)
    rho0 = read_profile(cfg, "rho0", grid) if rho0 is None else rho0
    sub = cfg.subset("solver")
    sim = sol.SimConfig(
        kernel=kernel, rho0=rho0, immigration=immigration,
        dt=sub.get_float("dt", 0.01), t_end=sub.get_float("t_end", t_end),
        positivity_tolerance=sub.get_float("positivity_tolerance", 1e-10),
        record_every=sub.get_int("record_every", 1),
        blowup_factor=sub.get_float("blowup_factor", 1e6),
        cfl=sub.get_float("cfl", 0.45), max_substeps=sub.get_int("max_substeps", 10_000),
        diffusion=sub.get_choice("diffusion", ["lattice", "spectral"], "lattice"),
        track_symmetry=sub.get_bool("track_symmetry", False))
    return sim, f_peak


def read_quad(cfg: KeyValueConfig) -> pot.QuadratureConfig:
    sub = cfg.subset("quad")
    d = pot.QuadratureConfig()
    return pot.QuadratureConfig(
        r0=sub.get_float("r0", d.r0), R0=sub.get_float("R0", d.R0),
        rungs=sub.get_int("rungs", d.rungs),
        divergence_threshold=sub.get_float("divergence_threshold", d.divergence_threshold),
        epsabs=sub.get_float("epsabs", d.epsabs), epsrel=sub.get_float("epsrel", d.epsrel))


def index_of(W, cfg: KeyValueConfig, summary: Summary):
    """``c_W`` from the config override ``c_w`` or by computing the indices."""
    if "c_w" in cfg:
        c = cfg.get_float("c_w")
        summary.notes.append("c_W taken from the config override")
        return c
    idx = pot.compute_indices(W, read_quad(cfg))
    summary.metric("c_w", idx.c_w)
    summary.metric("c_w_error", idx.error_estimates["c_w"])
    return idx.c_w


def _boundary_check(summary, diag, name="boundary"):
    tol = summary.tol(f"{name}_ratio", 1e-6)
    worst = max(diag.boundary_ratio) if diag.boundary_ratio else 0.0
    summary.check(f"{name}_density", worst <= tol, worst, tol)


def _mass_check(summary, diag, name="mass_law"):
    tol = summary.tol(name, 1e-6)
    final = max(diag.l1[-1], abs(diag.l1[0]), np.finfo(float).tiny)
    worst = max(diag.mass_residual) / final if final > 0 else 0.0
    summary.check(name, worst <= tol, worst, tol)


# -- commands ---------------------------------------------------------------------------


def cmd_analyze_potential(cfg, out, args, summary):
    W = read_potential(cfg, args.base)
    idx = pot.compute_indices(W, read_quad(cfg))
    rows = [("eta", idx.eta), ("alpha", idx.alpha), ("c_w", idx.c_w),
            ("lap_plus", idx.lap_plus), ("lap_minus", idx.lap_minus)]
    with open(out / "indices.csv", "w") as fh:
        fh.write("quantity,value,error\n")
        for name, value in rows:
            fh.write(f"{name},{value!r},{idx.error_estimates.get(name, 0.0)!r}\n")
    for name, value in rows:
        summary.metric(name, value)
        summary.metric(f"{name}_error", idx.error_estimates.get(name, 0.0))
    tol = summary.tol("consistency", 1e-3)
    if idx.alpha_finite:
        summary.check("c_w_consistency", abs(idx.consistency_residual) <= tol,
                      abs(idx.consistency_residual), tol)
    known = W.known_indices()
    if known is not None:
        ctol = summary.tol("closed_form", 1e-3)
        for name in ("eta", "alpha", "c_w"):
            ref = known[name]
            got = getattr(idx, name)
            ok = got == ref if math.isinf(ref) else abs(got - ref) <= ctol
            summary.check(f"closed_form_{name}", ok, got, ref)
    summary.notes.extend(idx.notes)


def cmd_simulate(cfg, out, args, summary):
    W = read_potential(cfg, args.base)
    grid = read_grid(cfg, W.dimension)
    kernel = read_kernel(cfg, W)
    sim, _ = read_sim(cfg, kernel, grid)
    diag = _run_logged(sim, out / "diagnostics.csv")
    _mass_check(summary, diag)
    _boundary_check(summary, diag)
    if sim.track_symmetry:
        tol = summary.tol("asymmetry", 1e-8)
        summary.check("radial_symmetry", max(diag.asymmetry) <= tol, max(diag.asymmetry), tol)
    summary.metric("records", len(diag))
    summary.metric("final_sup", diag.sup[-1])
    summary.metric("final_l1", diag.l1[-1])
    summary.metric("max_substeps", diag.max_substeps)
    if cfg.get_bool("output.snapshot", False):
        from .snapshot import write_binary
        write_binary(out / "final.bin", diag.final)
    return diag


def _run_logged(sim, path, envelope=None):
    try:
        diag = sol.run(sim, envelope)
    except sol.SolverError as err:
        if err.diagnostics is not None:
            err.diagnostics.write_csv(path)
        raise
    diag.write_csv(path)
    if diag.blowup:
        raise sol.SolverError(diag.halted)
    return diag


def cmd_envelope_check(cfg, out, args, summary):
    W = read_potential(cfg, args.base)
    grid = read_grid(cfg, W.dimension, 32.0, 512 if W.dimension == 1 else None)
    kernel = read_kernel(cfg, W)
    c_w = index_of(W, cfg, summary)
    _, f_peak = read_immigration(cfg, grid, "gaussian")
    f_sup = f_peak.sup
    M = math.sqrt(f_sup / c_w) if c_w > 0 else math.nan
    summary.metric("M", M)
    scales = cfg.get_floats("rho0.scales", [0.0, 1.0, 2.0])
    width = cfg.get_float("rho0.width", 1.0)
    env_slack = summary.tol("envelope_slack", 0.05)
    bound_slack = summary.tol("boundedness_slack", 0.02)
    mp_tol = summary.tol("maximum_principle", 1e-9)
    ineq_slack = summary.tol("inequality_slack", 0.05)
    for i, s in enumerate(scales):
        rho0 = fld.gaussian(grid, s * M, width)
        sim, _ = read_sim(cfg, kernel, grid, rho0, "gaussian", 5.0)
        env = an.make_envelope(c_w, f_sup, rho0.sup)
        diag = _run_logged(sim, out / f"diagnostics_{i}.csv", env)
        rep = an.verify_envelope(diag, env, env_slack)
        tag = f"run{i}[rho0={s:g}M]"
        summary.check(f"{tag}.envelope", rep.passed, rep.max_ratio, 1 + env_slack)
        mp = an.maximum_principle_check(diag, M, mp_tol)
        if mp.applicable:
            summary.check(f"{tag}.maximum_principle", mp.passed and mp.argmax_record == 0,
                          mp.max_sup, mp.sup0)
        gb = an.global_boundedness_check(diag, M, bound_slack)
        if gb.applicable:
            summary.check(f"{tag}.global_bound", gb.passed, gb.max_sup, M * (1 + bound_slack))
        di = an.differential_inequality_check(diag, c_w, f_sup, ineq_slack)
        summary.check(f"{tag}.differential_inequality", di.passed, di.worst_excess, 0.0)
        _mass_check(summary, diag, f"{tag}.mass_law")
        _boundary_check(summary, diag, f"{tag}.boundary")


def cmd_maximum_principle(cfg, out, args, summary):
    W = read_potential(cfg, args.base)
    grid = read_grid(cfg, W.dimension)
    kernel = read_kernel(cfg, W)
    c_w = index_of(W, cfg, summary)
    sim, f_peak = read_sim(cfg, kernel, grid)
    M = math.sqrt(f_peak.sup / c_w) if c_w > 0 else math.nan
    summary.metric("M", M)
    diag = _run_logged(sim, out / "diagnostics.csv")
    tol = summary.tol("maximum_principle", 1e-9)
    rep = an.maximum_principle_check(diag, M if c_w > 0 else 0.0, tol)
    summary.metric("sup0", rep.sup0)
    summary.metric("max_sup", rep.max_sup)
    summary.metric("argmax_record", rep.argmax_record)
    expect = cfg.get_choice("expect", ["hold", "fail"], "hold")
    holds = rep.passed and rep.argmax_record == 0
    if not rep.applicable:
        summary.notes.append("initial sup-norm below M: hypothesis not met, vacuous pass")
    summary.check("maximum_principle" if expect == "hold" else "maximum_principle_violated",
                  holds if expect == "hold" else not holds, rep.max_sup, rep.sup0)


def _ladder(cfg, summary):
    t_max = cfg.get_float("ladder.t_max", 2.0 ** 20)
    t_min = cfg.get_float("ladder.t_min", 1.0)
    return an.doubling_ladder(t_max, t_min)


def _write_series(path, header, *cols):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*cols):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def cmd_dichotomy(cfg, out, args, summary):
    d = cfg.get_int("dimension")
    grid = read_grid(cfg, d)
    f = read_profile(cfg, "immigration", grid, "gaussian")
    rep = an.dichotomy_experiment(f, _ladder(cfg, summary))
    _write_series(out / "dichotomy.csv", ["t", "rho_at_origin"], rep.times, rep.values)
    summary.metric("verdict", rep.verdict.value)
    summary.metric("growth_exponent_fit", rep.growth_exponent_fit)
    _growth_checks(summary, d, rep.verdict, rep.fit, rep.values, rep.reference_limit,
                   zero=np.all(f.values == 0))


def _growth_checks(summary, d, verdict, fit, values, reference=None, zero=False):
    if zero:
        summary.check("zero_source", np.all(np.asarray(values) == 0), 0.0, 0.0)
        return
    if fit is None:
        summary.check("fit", False, "ladder too short")
        return
    summary.metric("log_fit_residual", fit.log_residual)
    summary.metric("limit_fit", fit.limit_fit)
    summary.metric("increment_ratio", fit.increment_ratio)
    if d == 1:
        tol = summary.tol("exponent", 0.05)
        summary.check("sqrt_growth", abs(fit.power_exponent - 0.5) <= tol, fit.power_exponent, 0.5)
        summary.check("unbounded", verdict is an.Verdict.UNBOUNDED, verdict.value)
    elif d == 2:
        tol = summary.tol("log_residual", 0.05)
        summary.check("log_growth", fit.log_residual < tol, fit.log_residual, tol)
        summary.check("unbounded", verdict is an.Verdict.UNBOUNDED, verdict.value)
    else:
        summary.check("converges", verdict is an.Verdict.CONVERGES, verdict.value)
        if reference is not None:
            tol = summary.tol("limit_relative", 0.02)
            rel = abs(fit.limit_fit - reference) / abs(reference)
            summary.metric("reference_limit", reference)
            summary.check("limit_matches_green", rel <= tol, rel, tol)
        else:
            inc = np.diff(values)
            tol = summary.tol("tail_increment_relative", 0.01)
            rel = inc[-1] / values[-1]
            summary.check("tail_increments_decreasing", bool(np.all(np.diff(inc[-4:]) < 0)))
            summary.check("tail_increment_small", rel <= tol, rel, tol)


def cmd_clumping(cfg, out, args, summary):
    d = cfg.get_int("dimension")
    gamma = cfg.get_float("gamma", 1.0)
    rep = an.clumping_exponent(d, gamma, _ladder(cfg, summary))
    _write_series(out / "clumping.csv", ["t", "mass_near_source"], rep.times, rep.values)
    summary.metric("verdict", rep.verdict.value)
    summary.metric("exponent", rep.exponent)
    _growth_checks(summary, d, rep.verdict, rep.fit, rep.values, None, zero=gamma == 0)


def cmd_sharpness(cfg, out, args, summary):
    W = read_potential(cfg, args.base)
    c_w = index_of(W, cfg, summary)
    offsets = cfg.get_floats("c_offsets", [1.0])
    height = cfg.get_float("height", 1.0)
    resolutions = [int(n) for n in cfg.get_floats("grid.resolutions", [DEFAULT_N[W.dimension]])]
    L = cfg.get_float("grid.L", 16.0)
    rows = []
    for n in resolutions:
        grid = fld.Grid(W.dimension, L, n)
        kernel = read_kernel(cfg, W)
        f, _ = read_immigration(cfg, grid)
        for off in offsets:
            c = c_w + off
            tag = f"n{n}.c{off:+g}"
            try:
                res = an.sharpness_counterexample(kernel, grid, c, height, c_w=c_w)
            except an.ConstructionError as err:
                summary.check(f"{tag}.construction", False, err.best_margin, 0.0)
                rows.append((n, c, math.nan, err.best_margin, math.nan, math.nan, math.nan))
                continue
            fd = an.forward_difference_probe(res.field, kernel, c, f)
            summary.check(f"{tag}.forward_difference", fd.margin > 0, fd.margin, 0.0)
            rows.append((n, c, res.epsilon, res.margin, fd.value, fd.threshold, fd.margin))
    _write_series(out / "sharpness.csv",
                  ["n", "c", "epsilon", "construction_margin", "forward_difference", "threshold",
                   "margin"], *zip(*rows))


def _bps_config(cfg, grid, W, seed):
    sub = cfg.subset("particles")
    f, _ = read_immigration(cfg, grid)
    if callable(f):
        raise ConfigError(f"{cfg.source}: particle immigration must be time-independent")
    interaction = W if sub.get_bool("interaction", W.kind is not pot.Kind.ZERO) else None
    mollify = sub.get_float("mollify", grid.h)
    return bps.BpsConfig(grid, branch_rate=sub.get_float("branch_rate", 1.0), immigration=f,
                         interaction=interaction, dt=sub.get_float("dt", 0.01),
                         n0=sub.get_float("n0", 1000.0), seed=seed,
                         cap=sub.get_int("cap", 20_000), mollify=mollify)


def _note_mollification(summary, pcfg):
    if pcfg.interaction is not None:
        summary.metric("mollify_radius", pcfg.mollify_radius)
        summary.notes.append(f"pair drift mollified: W'(r)/r held constant for r < "
                             f"{pcfg.mollify_radius:g}")


def cmd_particles(cfg, out, args, summary):
    W = read_potential(cfg, args.base)
    grid = read_grid(cfg, W.dimension)
    seed = args.seed if args.seed is not None else cfg.get_int("seed", 0)
    pcfg = _bps_config(cfg, grid, W, seed)
    _note_mollification(summary, pcfg)
    rho0 = read_profile(cfg, "rho0", grid)
    t_end = cfg.get_float("particles.t_end", 1.0)
    cells = cfg.get_int("particles.histogram_n", grid.n)
    run = bps.run_particles(pcfg, t_end, rho0, cfg.get_int("particles.record_every", 10),
                            fld.Grid(grid.dimension, grid.L, cells))
    run.write_csv(out / "particles.csv")
    if cfg.get_bool("output.ensemble", False):
        run.final.write_csv(out / "ensemble.csv")
    summary.metric("final_count", run.counts[-1])
    summary.metric("final_mass", run.masses[-1])
    summary.metric("max_cell_density", max(run.max_density))
    if pcfg.interaction is not None:
        c_w = index_of(W, cfg, summary)
        if c_w > 0 and pcfg.immigration is not None:
            M = math.sqrt(pcfg.immigration.sup / c_w)
            slack = summary.tol("particle_envelope_slack", 0.2)
            summary.metric("M", M)
            summary.check("max_cell_below_envelope", max(run.max_density) <= M * (1 + slack),
                          max(run.max_density), M * (1 + slack))


def cmd_meanfield(cfg, out, args, summary):
    W = read_potential(cfg, args.base)
    grid = read_grid(cfg, W.dimension)
    seed = args.seed if args.seed is not None else cfg.get_int("seed", 0)
    pcfg = _bps_config(cfg, grid, W, seed)
    _note_mollification(summary, pcfg)
    kernel = read_kernel(cfg, W)
    sim, _ = read_sim(cfg, kernel, grid)
    if sim.dt != pcfg.dt:
        sim = replace(sim, dt=pcfg.dt)
    t = cfg.get_float("particles.t_end", 1.0)
    ladder = cfg.get_floats("particles.n0_ladder", [1e2, 1e3, 1e4])
    replicas = cfg.get_int("particles.replicas", 16)
    bw = cfg.get_float("particles.bandwidth", 2 * grid.h)
    rep = bps.meanfield_compare(pcfg, sim, t, replicas, ladder, bw, threads=args.threads)
    _write_series(out / "meanfield.csv", ["n0", "l1_distance", "replica_mean", "replica_se",
                                          "particle_mass"],
                  rep.n0, rep.distances, rep.replica_distance_mean, rep.replica_distance_se,
                  rep.particle_mass)
    summary.metric("slope", rep.slope)
    summary.metric("pde_mass", rep.pde_mass)
    summary.check("distance_decreasing", rep.monotone, rep.distances)


COMMANDS = {
    "analyze-potential": cmd_analyze_potential,
    "simulate": cmd_simulate,
    "envelope-check": cmd_envelope_check,
    "maximum-principle": cmd_maximum_principle,
    "dichotomy": cmd_dichotomy,
    "clumping": cmd_clumping,
    "sharpness": cmd_sharpness,
    "particles": cmd_particles,
    "meanfield": cmd_meanfield,
}


def build_parser():
    p = argparse.ArgumentParser(prog="repdiff", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", type=Path, help="key = value config file")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--threads", type=int, default=1, help="worker threads for replicas")
    p.add_argument("--strict", action="store_true", help="halve every tolerance")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def run_experiment(args) -> int:
    out = args.out
    summary = Summary(args.command, args.strict)
    status, code = "pass", EXIT_OK
    cfg = None
    try:
        out.mkdir(parents=True, exist_ok=True)
        if args.config is not None:
            cfg = KeyValueConfig.load(args.config)
            args.base = args.config.parent
        else:
            cfg = KeyValueConfig(source="<defaults>")
            args.base = None
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        COMMANDS[args.command](cfg, out, args, summary)
        if not summary.passed:
            status, code = "fail", EXIT_CHECK
    except (ConfigError, fld.KernelConfigurationError, pot.AssumptionViolation,
            an.NoEnvelopeError) as err:
        status, code = f"config-error: {err}", EXIT_CONFIG
    except (sol.SolverError, bps.PopulationExplosion, pot.IndexComputationError) as err:
        status, code = f"numerical-halt: {err}", EXIT_HALT
    except ValueError as err:
        status, code = f"config-error: {err}", EXIT_CONFIG
    if cfg is not None:
        unused = cfg.unused_keys()
        if unused:
            summary.notes.append("unused keys: " + ", ".join(unused))
        (out / "resolved_config.txt").write_text(format_kv(
            [(k, v) for k, v in cfg.used.items()]
            + [("seed", args.seed)] * (args.seed is not None)))
    (out / "summary.txt").write_text(summary.text(status))
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    code = run_experiment(args)
    if args.verbose or code:
        sys.stdout.write((args.out / "summary.txt").read_text())
    sys.stdout.write(f"{args.command}: exit {code} ({time.perf_counter() - start:.2f} s)\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
