"""Radial interaction potentials and their short/long-range indices.

A potential is stored as a radial profile ``W(r)`` together with its first
and second radial derivatives.  For radial ``W`` the average radial part of
``grad W`` over the sphere of radius ``R`` is simply ``W'(R)``, and the
Laplacian away from the origin is ``W'' + (d-1) W'/r``.

The indices compare ``W'`` with the Newtonian reference
``W_N'(r) = -r**(1-d) / c_d``::

    eta   = lim_{r->0}   -c_d r**(d-1) W'(r)
    alpha = lim_{R->oo}  -c_d R**(d-1) W'(R)
    c_W   = eta - int (Lap W)_+  ( = alpha - int (Lap W)_-  when alpha < oo )
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import PchipInterpolator

from .config import ConfigError, KeyValueConfig, format_kv


class IndexComputationError(RuntimeError):
    """Index extraction failed (divergent limit, quadrature trouble, ...)."""


class QuadratureError(IndexComputationError):
    """Adaptive quadrature did not converge on a sub-interval."""

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class AssumptionViolation(IndexComputationError):
    """The potential violates the integrability assumptions on Lap W."""


def unit_sphere_area(d: int) -> float:
    """Surface area ``c_d`` of the unit sphere in R^d (c_1 = 2 counts two points)."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


class Kind(str, Enum):
    NEWTONIAN = "newtonian"
    POWER_LAW = "power_law"
    MORSE = "morse"
    MIXTURE = "mixture"
    ZERO = "zero"
    TABULATED = "tabulated"


def _check_dimension(d):
    if d not in (1, 2, 3):
        raise ValueError(f"dimension must be 1, 2 or 3, got {d}")


def _power_terms(amp, A, d, r):
    """-amp*P_A and its first two radial derivatives plus the Laplacian."""
    r = np.asarray(r, dtype=float)
    if A == 0:
        w = -amp * np.log(r)
    else:
        w = -amp * r ** A / A
    w1 = -amp * r ** (A - 1.0)
    w2 = -amp * (A - 1.0) * r ** (A - 2.0)
    lap = -amp * (A + d - 2.0) * r ** (A - 2.0)
    return w, w1, w2, lap


@dataclass(frozen=True, eq=False)
class RadialPotential:
    """Immutable radial potential ``W(x) = w(|x|)`` in dimension ``d``.

    Build instances with the module-level constructors (:func:`newtonian`,
    :func:`power_law`, :func:`morse`, :func:`mixture`, :func:`zero`,
    :func:`tabulated`) rather than directly.
    """

    kind: Kind
    dimension: int
    params: dict = field(default_factory=dict)
    terms: tuple = ()
    _interp: object = None
    support: tuple = (0.0, math.inf)

    # -- pointwise evaluation -------------------------------------------------
    def _eval(self, r):
        r = np.asarray(r, dtype=float)
        d = self.dimension
        if self.kind is Kind.ZERO:
            z = np.zeros_like(r)
            return z, z, z, z
        if self.kind is Kind.NEWTONIAN:
            return _power_terms(1.0 / unit_sphere_area(d), 2.0 - d, d, r)
        if self.kind is Kind.POWER_LAW:
            return _power_terms(self.params.get("amplitude", 1.0), self.params["A"], d, r)
        if self.kind is Kind.MORSE:
            ca, la = self.params["C_A"], self.params["l_A"]
            cr, lr = self.params["C_R"], self.params["l_R"]
            ea, er = np.exp(-r / la), np.exp(-r / lr)
            w = -ca * ea + cr * er
            w1 = ca / la * ea - cr / lr * er
            w2 = -ca / la ** 2 * ea + cr / lr ** 2 * er
            with np.errstate(divide="ignore", invalid="ignore"):
                lap = w2 + (d - 1) * w1 / r if d > 1 else w2
            return w, w1, w2, lap
        if self.kind is Kind.MIXTURE:
            acc = [np.zeros_like(r) for _ in range(4)]
            for coef, term in self.terms:
                for slot, val in zip(acc, term._eval(r)):
                    slot += coef * val
            return tuple(acc)
        if self.kind is Kind.TABULATED:
            u = np.log(r)
            wu = self._interp(u)
            wu1 = self._interp(u, 1)
            wu2 = self._interp(u, 2)
            w1 = wu1 / r
            w2 = (wu2 - wu1) / r ** 2
            return wu, w1, w2, w2 + (d - 1) * w1 / r
        raise ValueError(f"unknown potential kind {self.kind}")

    def w(self, r):
        return self._eval(r)[0]

    def w1(self, r):
        return self._eval(r)[1]

    def w2(self, r):
        return self._eval(r)[2]

    def lap(self, r):
        return self._eval(r)[3]

    def grad(self, x):
        """``grad W`` at points ``x`` of shape (..., d); zero at the origin."""
        x = np.asarray(x, dtype=float)
        r = np.sqrt(np.sum(x * x, axis=-1))
        safe = np.where(r > 0, r, 1.0)
        g = np.where(r > 0, self.w1(safe) / safe, 0.0)
        return g[..., None] * x

    # -- algebra ----------------------------------------------------------------
    def scaled(self, a: float) -> "RadialPotential":
        return mixture([(a, self)])

    def __add__(self, other: "RadialPotential") -> "RadialPotential":
        return mixture([(1.0, self), (1.0, other)])

    def __rmul__(self, a):
        return self.scaled(float(a))

    @property
    def is_singular(self) -> bool:
        """True when ``grad W`` is unbounded at the origin."""
        if self.kind is Kind.NEWTONIAN:
            return True
        if self.kind is Kind.POWER_LAW:
            return self.params["A"] < 1.0
        if self.kind is Kind.MIXTURE:
            return any(t.is_singular for _, t in self.terms)
        return False

    def known_indices(self):
        """Closed-form indices, or None when no closed form is implemented."""
        d = self.dimension
        if self.kind is Kind.ZERO:
            return dict(eta=0.0, alpha=0.0, c_w=0.0, lap_plus=0.0, lap_minus=0.0)
        if self.kind is Kind.NEWTONIAN:
            return dict(eta=1.0, alpha=1.0, c_w=1.0, lap_plus=0.0, lap_minus=0.0)
        if self.kind is Kind.POWER_LAW:
            a, A = self.params.get("amplitude", 1.0), self.params["A"]
            p = A + d - 2.0
            if a <= 0 or p < 0:
                return None
            if p == 0:
                val = a * unit_sphere_area(d)
                return dict(eta=val, alpha=val, c_w=val, lap_plus=0.0, lap_minus=0.0)
            return dict(eta=0.0, alpha=math.inf, c_w=0.0, lap_plus=0.0, lap_minus=math.inf)
        if self.kind is Kind.MIXTURE:
            parts = []
            for coef, term in self.terms:
                k = term.known_indices()
                if k is None or coef <= 0 or term.kind not in (
                        Kind.NEWTONIAN, Kind.POWER_LAW, Kind.ZERO, Kind.MIXTURE):
                    return None
                if k["lap_plus"] != 0.0:
                    return None
                parts.append((coef, k))
            out = dict(eta=0.0, alpha=0.0, c_w=0.0, lap_plus=0.0, lap_minus=0.0)
            for coef, k in parts:
                for key in out:
                    out[key] += coef * k[key]
            return out
        return None

    # -- serialization ------------------------------------------------------------
    def to_items(self, prefix=""):
        items = [(prefix + "kind", self.kind.value), (prefix + "dimension", self.dimension)]
        if self.kind is Kind.MIXTURE:
            items.append((prefix + "terms", len(self.terms)))
            for i, (coef, term) in enumerate(self.terms, start=1):
                items.append((f"{prefix}term{i}.coef", float(coef)))
                items.extend(term.to_items(f"{prefix}term{i}."))
        elif self.kind is Kind.TABULATED:
            items.append((prefix + "r", list(self.params["r"])))
            items.append((prefix + "w", list(self.params["w"])))
        else:
            items.extend((prefix + k, float(v)) for k, v in self.params.items())
        return items

    def to_text(self) -> str:
        return format_kv(self.to_items())


# -- constructors -------------------------------------------------------------


def newtonian(d: int) -> RadialPotential:
    """Green's function of the Laplacian: ``Lap W_N = -delta_0``."""
    _check_dimension(d)
    return RadialPotential(Kind.NEWTONIAN, d)


def power_law(A: float, d: int, amplitude: float = 1.0, simulation_only=False) -> RadialPotential:
    """Repulsive power law ``W = -amplitude * P_A`` (``P_A = r**A/A``, ``log r`` for A=0)."""
    _check_dimension(d)
    lo = 1.0 - d if simulation_only else 2.0 - d
    if simulation_only:
        ok = A > lo
    else:
        ok = lo <= A <= 1.0
    if not ok:
        raise ValueError(f"power-law exponent A={A} outside the admissible range for d={d}")
    return RadialPotential(Kind.POWER_LAW, d, {"A": float(A), "amplitude": float(amplitude)})


def morse(C_A: float, l_A: float, C_R: float, l_R: float, d: int) -> RadialPotential:
    """``W(r) = -C_A exp(-r/l_A) + C_R exp(-r/l_R)``."""
    _check_dimension(d)
    if l_A <= 0 or l_R <= 0 or C_A < 0 or C_R < 0:
        raise ValueError("Morse parameters need C_A, C_R >= 0 and l_A, l_R > 0")
    return RadialPotential(Kind.MORSE, d, {"C_A": float(C_A), "l_A": float(l_A),
                                           "C_R": float(C_R), "l_R": float(l_R)})


def zero(d: int) -> RadialPotential:
    _check_dimension(d)
    return RadialPotential(Kind.ZERO, d)


def mixture(terms) -> RadialPotential:
    """Linear combination ``sum_i coef_i * W_i`` of potentials of one dimension."""
    terms = tuple((float(c), t) for c, t in terms)
    if not terms:
        raise ValueError("mixture needs at least one term")
    dims = {t.dimension for _, t in terms}
    if len(dims) != 1:
        raise ValueError(f"mixture terms have different dimensions {sorted(dims)}")
    lo = max(t.support[0] for _, t in terms)
    hi = min(t.support[1] for _, t in terms)
    return RadialPotential(Kind.MIXTURE, dims.pop(), terms=terms, support=(lo, hi))


def tabulated(r, w, d: int) -> RadialPotential:
    """Potential from samples ``(r_i, W(r_i))``, interpolated monotonically in log r."""
    _check_dimension(d)
    r = np.asarray(r, dtype=float)
    w = np.asarray(w, dtype=float)
    if r.ndim != 1 or r.shape != w.shape or r.size < 4:
        raise ValueError("tabulated potential needs matching 1-d arrays of >= 4 samples")
    if np.any(r <= 0) or np.any(np.diff(r) <= 0):
        raise ValueError("tabulated radii must be positive and strictly increasing")
    interp = PchipInterpolator(np.log(r), w, extrapolate=True)
    return RadialPotential(Kind.TABULATED, d, {"r": tuple(r), "w": tuple(w)},
                           _interp=interp, support=(float(r[0]), float(r[-1])))


def load_table(path, d: int) -> RadialPotential:
    """Read a two-column ``r W`` text file."""
    data = np.loadtxt(path, ndmin=2)
    if data.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns (r, W), got {data.shape[1]}")
    return tabulated(data[:, 0], data[:, 1], d)


def from_config(cfg: KeyValueConfig, base: Path | None = None,
                dimension: int | None = None) -> RadialPotential:
    """Build a potential from key-value entries (see :meth:`RadialPotential.to_items`).

    ``dimension`` is the fallback when the entries omit it (mixture terms inherit it).
    """
    kind = cfg.get_choice("kind", [k.value for k in Kind])
    d = cfg.get_int("dimension", dimension)
    try:
        if kind == "newtonian":
            return newtonian(d)
        if kind == "zero":
            return zero(d)
        if kind == "power_law":
            return power_law(cfg.get_float("A"), d, cfg.get_float("amplitude", 1.0),
                             simulation_only=cfg.get_bool("simulation_only", False))
        if kind == "morse":
            return morse(cfg.get_float("C_A"), cfg.get_float("l_A", 1.0),
                         cfg.get_float("C_R"), cfg.get_float("l_R"), d)
        if kind == "mixture":
            n = cfg.get_int("terms")
            terms = []
            for i in range(1, n + 1):
                sub = cfg.subset(f"term{i}")
                terms.append((sub.get_float("coef"), from_config(sub, base, d)))
            return mixture(terms)
        if "table" in cfg:
            path = Path(cfg.get_str("table"))
            if base is not None and not path.is_absolute():
                path = base / path
            return load_table(path, d)
        return tabulated(cfg.get_floats("r"), cfg.get_floats("w"), d)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{cfg.source}: invalid {kind} potential: {exc}") from None


def from_text(text: str, source="<string>") -> RadialPotential:
    return from_config(KeyValueConfig.parse(text, source))


def load(path) -> RadialPotential:
    path = Path(path)
    return from_config(KeyValueConfig.load(path), base=path.parent)


# -- pointwise operations -----------------------------------------------------------


def radial_avg_grad(W: RadialPotential, R: float) -> float:
    """Average radial component of ``grad W`` over the sphere of radius ``R``."""
    if not R > 0:
        raise ValueError(f"radius must be positive, got {R}")
    return float(W.w1(R))


def laplacian(W: RadialPotential, r: float) -> float:
    """Classical ``Lap W(r)`` away from the origin."""
    if not r > 0:
        raise ValueError(f"the origin is excluded; got r={r}")
    return float(W.lap(r))


# -- index computation ---------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureConfig:
    """Ladders for the limits and tolerances for the radial integrals."""

    r0: float = 1.0
    R0: float = 1.0
    rungs: int = 20
    divergence_threshold: float = 1e6
    epsabs: float = 1e-13
    epsrel: float = 1e-11
    max_octaves: int = 160
    scan_points: int = 16
    quad_limit: int = 200


@dataclass
class PotentialIndices:
    eta: float
    alpha: float
    c_w: float
    lap_plus: float
    lap_minus: float
    error_estimates: dict
    consistency_residual: float = math.nan
    notes: list = field(default_factory=list)

    @property
    def alpha_finite(self) -> bool:
        return math.isfinite(self.alpha)

    @property
    def c_w_symmetric(self) -> float:
        """``(alpha + eta - int |Lap W|) / 2``; NaN when alpha is infinite."""
        if not self.alpha_finite:
            return math.nan
        return 0.5 * (self.alpha + self.eta - self.lap_plus - self.lap_minus)


def _ratio_sequence(W, radii):
    d = W.dimension
    return -unit_sphere_area(d) * radii ** (d - 1) * W.w1(radii)


def _aitken(seq):
    """Aitken delta-squared transform of a 1-d sequence (length n-2)."""
    a, b, c = seq[:-2], seq[1:-1], seq[2:]
    denom = (c - b) - (b - a)
    out = c.copy()
    scale = np.maximum(np.abs(c), 1.0)
    ok = np.abs(denom) > 1e-14 * scale
    out[ok] = c[ok] - (c[ok] - b[ok]) ** 2 / denom[ok]
    return out


def _extrapolate(seq, threshold=None):
    """Limit of a geometrically converging sequence.

    Returns ``(value, error, diverged)``.  Divergence is declared when the
    terms exceed ``threshold`` and still increase over the last three rungs,
    or when the increments stop shrinking while the terms keep growing.
    """
    seq = np.asarray(seq, dtype=float)
    if not np.all(np.isfinite(seq)):
        return math.inf, math.inf, True
    tail = seq[-3:]
    inc = np.diff(seq)
    increasing = bool(np.all(np.diff(tail) > 0))
    if threshold is not None and increasing and abs(tail[-1]) > threshold:
        return math.inf, 0.0, True
    last_inc = inc[-4:]
    if increasing and np.all(last_inc > 0) and np.all(last_inc[1:] >= last_inc[:-1] * (1 - 1e-9)):
        return math.inf, 0.0, True
    scale = max(1.0, float(np.max(np.abs(seq[-4:]))))
    floor = 64 * np.finfo(float).eps * scale
    if np.all(np.abs(inc[-3:]) <= floor):
        return float(seq[-1]), float(floor + abs(inc[-1])), False
    acc = _aitken(seq)
    value = float(acc[-1])
    err = float(abs(acc[-1] - acc[-2])) + floor
    return value, err, False


def _sign_changes(f, lo, hi, n):
    """Roots of ``f`` in (lo, hi) located on a log scan and refined by Brent's method."""
    grid = np.geomspace(lo, hi, n + 1)
    vals = f(grid)
    roots = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0.0 and a > lo:
            roots.append(a)
        elif fa * fb < 0.0:
            roots.append(optimize.brentq(f, a, b, xtol=1e-15 * b, rtol=4 * np.finfo(float).eps))
    return roots


def _signed_integrals(W, lo, hi, cfg):
    """Integrals of (Lap W)_+ r^{d-1} and (Lap W)_- r^{d-1} over [lo, hi].

    Integration runs in u = log r between consecutive sign changes.
    """
    d = W.dimension

    def lapf(r):
        return W.lap(r)

    def integrand(u):
        r = math.exp(u)
        return float(W.lap(r)) * r ** d

    cuts = [lo] + _sign_changes(lapf, lo, hi, cfg.scan_points) + [hi]
    plus = minus = err_p = err_m = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b <= a:
            continue
        mid = math.sqrt(a * b)
        sign = float(W.lap(mid))
        if sign == 0.0:
            continue
        val, e, *info = integrate.quad(integrand, math.log(a), math.log(b),
                                       epsabs=cfg.epsabs, epsrel=cfg.epsrel,
                                       limit=cfg.quad_limit, full_output=1)
        if len(info) >= 2 and info[0].get("last", 0) >= cfg.quad_limit or (
                e > 1e3 * max(cfg.epsabs, cfg.epsrel * abs(val))):
            raise QuadratureError(f"radial quadrature of Lap W did not converge on "
                                  f"[{a:.6g}, {b:.6g}] (estimate {val:.6g} +- {e:.2g})",
                                  interval=(a, b))
        if sign > 0:
            plus += max(val, 0.0)
            err_p += e
        else:
            minus += max(-val, 0.0)
            err_m += e
    return plus, minus, err_p, err_m


def _octave_sweep(W, start, direction, cfg):
    """Sum signed integrals over octaves moving away from ``start``.

    Returns ``(plus, minus, err_plus, err_minus, plus_diverged, minus_diverged)``.
    """
    lo_lim, hi_lim = W.support
    plus_pieces, minus_pieces = [], []
    plus = minus = err_p = err_m = 0.0
    r = start
    for _ in range(cfg.max_octaves):
        if direction > 0:
            a, b = r, min(2.0 * r, hi_lim)
        else:
            a, b = max(0.5 * r, lo_lim), r
        if b <= a:
            break
        p, m, ep, em = _signed_integrals(W, a, b, cfg)
        plus += p
        minus += m
        err_p += ep
        err_m += em
        plus_pieces.append(p)
        minus_pieces.append(m)
        r = b if direction > 0 else a
        if (direction > 0 and b >= hi_lim) or (direction < 0 and a <= lo_lim):
            return plus, minus, err_p, err_m, False, False
        if len(plus_pieces) >= 8:
            done_p, tail_p, terr_p = _tail_sum(plus_pieces, cfg.epsabs + cfg.epsrel * plus)
            done_m, tail_m, terr_m = _tail_sum(minus_pieces, cfg.epsabs + cfg.epsrel * minus)
            if done_p and done_m:
                return (plus + tail_p, minus + tail_m, err_p + terr_p, err_m + terr_m,
                        False, False)
    div_p = _pieces_diverge(plus_pieces, cfg)
    div_m = _pieces_diverge(minus_pieces, cfg)
    if not (div_p or div_m):
        raise QuadratureError(f"octave sweep from r={start:g} did not converge within "
                              f"{cfg.max_octaves} octaves", interval=(min(start, r), max(start, r)))
    return plus, minus, err_p, err_m, div_p, div_m


def _tail_sum(pieces, tol):
    """Remainder of a series of octave pieces: ``(converged, tail, tail_error)``.

    Negligible pieces end the sum; pieces shrinking by a steady ratio ``q``
    are summed geometrically.
    """
    recent = np.asarray(pieces[-5:])
    if np.max(recent[-4:]) <= tol:
        return True, 0.0, 4 * tol
    if np.any(recent <= 0):
        return False, 0.0, 0.0
    ratios = recent[1:] / recent[:-1]
    q = float(ratios[-1])
    spread = float(np.max(ratios) - np.min(ratios))
    if 0.0 < q < 0.999 and spread <= 1e-7 * q:
        tail = float(recent[-1]) * q / (1.0 - q)
        return True, tail, tail * spread / (1.0 - q) + tol
    return False, 0.0, 0.0


def _pieces_diverge(pieces, cfg):
    tail = np.asarray(pieces[-6:])
    if tail.size < 6 or np.all(tail <= cfg.epsabs):
        return False
    ratios = tail[1:] / np.maximum(tail[:-1], 1e-300)
    return bool(np.all(ratios > 0.97))


def compute_indices(W: RadialPotential, quad: QuadratureConfig | None = None) -> PotentialIndices:
    """Extract eta, alpha, int (Lap W)_+- and assemble c_W."""
    quad = quad or QuadratureConfig()
    d = W.dimension
    c_d = unit_sphere_area(d)
    lo_lim, hi_lim = W.support
    notes = []

    r0 = min(quad.r0, hi_lim)
    small = r0 * 0.5 ** np.arange(quad.rungs + 1)
    small = small[small >= lo_lim]
    big = max(quad.R0, lo_lim) * 2.0 ** np.arange(quad.rungs + 1)
    big = big[big <= hi_lim]
    if small.size < 5 or big.size < 5:
        raise IndexComputationError("tabulated support too narrow for the limit ladders")

    eta, eta_err, eta_div = _extrapolate(_ratio_sequence(W, small))
    if eta_div:
        raise IndexComputationError("eta_W diverges: the singularity at the origin is "
                                    "stronger than Newtonian")
    alpha, alpha_err, alpha_div = _extrapolate(_ratio_sequence(W, big),
                                               threshold=quad.divergence_threshold)
    if alpha_div:
        alpha, alpha_err = math.inf, 0.0

    split = min(max(1.0, lo_lim), hi_lim)
    p_in, m_in, ep_in, em_in, dp_in, dm_in = _octave_sweep(W, split, -1, quad)
    p_out, m_out, ep_out, em_out, dp_out, dm_out = _octave_sweep(W, split, +1, quad)
    plus_div, minus_div = dp_in or dp_out, dm_in or dm_out
    if plus_div and minus_div:
        raise AssumptionViolation("both int (Lap W)_+ and int (Lap W)_- diverge")
    if plus_div:
        raise AssumptionViolation("int (Lap W)_+ diverges; W is not eventually decreasing")
    lap_plus = c_d * (p_in + p_out) + 0.0
    lap_minus = math.inf if minus_div else c_d * (m_in + m_out) + 0.0
    plus_err = c_d * (ep_in + ep_out)
    minus_err = 0.0 if minus_div else c_d * (em_in + em_out)

    if math.isinf(lap_minus) and math.isfinite(alpha):
        notes.append("ladder suggested finite alpha but int (Lap W)_- diverges; alpha set to inf")
        alpha, alpha_err = math.inf, 0.0
    elif math.isinf(alpha) and math.isfinite(lap_minus):
        notes.append("ladder suggested alpha = inf but int (Lap W)_- converges; "
                     "alpha taken from eta - int Lap W")
        alpha = eta - lap_plus + lap_minus
        alpha_err = eta_err + plus_err + minus_err
    eta += 0.0
    alpha = max(alpha, 0.0) + 0.0 if math.isfinite(alpha) else alpha

    c_w = eta - lap_plus + 0.0
    errors = {
        "eta": eta_err,
        "alpha": alpha_err,
        "lap_plus": plus_err,
        "lap_minus": minus_err,
        "c_w": eta_err + plus_err,
    }
    residual = math.nan
    if math.isfinite(alpha):
        residual = abs(c_w - (alpha - lap_minus))
    return PotentialIndices(eta=eta, alpha=alpha, c_w=c_w, lap_plus=lap_plus,
                            lap_minus=lap_minus, error_estimates=errors,
                            consistency_residual=residual, notes=notes)


@dataclass
class LinearityReport:
    a: float
    c_first: float
    c_second: float
    c_scaled: float
    c_sum: float
    tolerance: float
    scaling_ok: bool
    superadditive_ok: bool

    @property
    def passed(self) -> bool:
        return self.scaling_ok and self.superadditive_ok


def check_linearity(W1: RadialPotential, W2: RadialPotential, a: float,
                    quad: QuadratureConfig | None = None, tolerance: float = 1e-3) -> LinearityReport:
    """Check ``c_{aW1} = a c_{W1}`` and ``c_{W1+W2} >= c_{W1} + c_{W2}``."""
    if not a > 0:
        raise ValueError(f"scale factor must be positive, got {a}")
    c1 = compute_indices(W1, quad).c_w
    c2 = compute_indices(W2, quad).c_w
    ca = compute_indices(W1.scaled(a), quad).c_w
    cs = compute_indices(W1 + W2, quad).c_w
    return LinearityReport(a=a, c_first=c1, c_second=c2, c_scaled=ca, c_sum=cs,
                           tolerance=tolerance,
                           scaling_ok=abs(ca - a * c1) <= tolerance * max(1.0, abs(a * c1)),
                           superadditive_ok=cs >= c1 + c2 - tolerance)
