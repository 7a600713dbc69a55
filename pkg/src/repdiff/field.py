"""Periodic grids, density fields and spectral convolution operators.

Grid nodes sit at ``x_j = -L + j*h`` (``h = 2L/n``) along every axis, so the
origin is node ``n//2`` and reflection ``x -> -x`` maps index ``j`` to
``(n - j) % n``.  All convolutions are circular on the box ``[-L, L)^d``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .potential import Kind, RadialPotential


class KernelConfigurationError(ValueError):
    """A kernel representation cannot be used with the given potential or grid."""


@dataclass(frozen=True)
class Grid:
    dimension: int
    L: float
    n: int

    def __post_init__(self):
        if self.dimension not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.dimension}")
        if self.n < 8 or self.n & (self.n - 1):
            raise ValueError(f"points per axis must be a power of two >= 8, got {self.n}")
        if not self.L > 0:
            raise ValueError(f"box half-width must be positive, got {self.L}")

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def cell_volume(self) -> float:
        return self.h ** self.dimension

    @property
    def shape(self):
        return (self.n,) * self.dimension

    @property
    def axis(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.n)

    @property
    def origin_index(self):
        return (self.n // 2,) * self.dimension

    def coords(self):
        """Coordinate arrays (``ij`` indexing), one per dimension."""
        return np.meshgrid(*([self.axis] * self.dimension), indexing="ij")

    def radius(self) -> np.ndarray:
        return np.sqrt(sum(c * c for c in self.coords()))

    def position(self, index) -> np.ndarray:
        return -self.L + self.h * np.asarray(index, dtype=float)

    def displacements(self):
        """Per-axis node displacements in FFT order: ``0, h, ..., (n/2-1)h, -L, ..., -h``."""
        j = np.arange(self.n)
        return np.where(j < self.n // 2, j, j - self.n) * self.h

    def wavenumbers(self):
        """Broadcastable wavenumber arrays in ``rfftn`` layout."""
        d, n, h = self.dimension, self.n, self.h
        ks = []
        for axis in range(d):
            if axis == d - 1:
                k = 2 * np.pi * np.fft.rfftfreq(n, h)
            else:
                k = 2 * np.pi * np.fft.fftfreq(n, h)
            shape = [1] * d
            shape[axis] = k.size
            ks.append(k.reshape(shape))
        return ks

    def wavenumbers_odd(self):
        """Wavenumbers for first derivatives: the Nyquist entry is zeroed."""
        kn = np.pi / self.h
        return [np.where(np.isclose(np.abs(k), kn), 0.0, k) for k in self.wavenumbers()]

    def k_squared(self):
        return sum(k * k for k in self.wavenumbers())


class Field:
    """Density values sampled on the nodes of a periodic :class:`Grid`."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values):
        values = np.asarray(values, dtype=float)
        if values.shape != grid.shape:
            raise ValueError(f"values shape {values.shape} does not match grid {grid.shape}")
        self.grid = grid
        self.values = values

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())

    def like(self, values) -> "Field":
        return Field(self.grid, values)

    def __add__(self, other):
        other = other.values if isinstance(other, Field) else other
        return Field(self.grid, self.values + other)

    __radd__ = __add__

    def __sub__(self, other):
        other = other.values if isinstance(other, Field) else other
        return Field(self.grid, self.values - other)

    def __mul__(self, a):
        return Field(self.grid, self.values * a)

    __rmul__ = __mul__

    @property
    def l1(self) -> float:
        """``sum(values) * h^d`` (the L1 norm for a non-negative field)."""
        return float(np.sum(self.values) * self.grid.cell_volume)

    mass = l1

    @property
    def sup(self) -> float:
        return float(np.max(self.values))

    def __repr__(self):
        return f"Field(d={self.grid.dimension}, n={self.grid.n}, L={self.grid.L}, sup={self.sup:.4g})"


# -- profiles ----------------------------------------------------------------------


def zeros(grid: Grid) -> Field:
    return Field(grid, np.zeros(grid.shape))


def uniform(grid: Grid, value: float) -> Field:
    return Field(grid, np.full(grid.shape, float(value)))


def gaussian(grid: Grid, height=1.0, width=1.0, center=None) -> Field:
    """``height * exp(-|x - center|^2 / (2 width^2))``."""
    center = np.zeros(grid.dimension) if center is None else np.asarray(center, float)
    r2 = sum((c - x0) ** 2 for c, x0 in zip(grid.coords(), center))
    return Field(grid, height * np.exp(-r2 / (2.0 * width ** 2)))


def flat_top_bump(s):
    """Smooth compactly supported bump on |s| < 1 with value 1 and zero
    second derivative at the centre: ``exp(1 - 1/(1 - s**4))``."""
    s = np.abs(np.asarray(s, dtype=float))
    out = np.zeros_like(s)
    inside = s < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 4))
    return out


def bump(grid: Grid, height=1.0, radius=1.0, center=None) -> Field:
    """Flat-topped C-infinity bump of the given height supported in B(center, radius)."""
    center = np.zeros(grid.dimension) if center is None else np.asarray(center, float)
    r = np.sqrt(sum((c - x0) ** 2 for c, x0 in zip(grid.coords(), center)))
    return Field(grid, height * flat_top_bump(r / radius))


def plateau_bump(grid: Grid, height=1.0, radius=1.0, plateau=0.0, center=None) -> Field:
    """Bump equal to ``height`` on ``|x - center| <= plateau``, decaying smoothly to zero at ``radius``.

    A plateau of at least one grid spacing makes the nearest-neighbour
    Laplacian vanish exactly at the centre node.
    """
    if not 0 <= plateau < radius:
        raise ValueError("plateau must lie in [0, radius)")
    center = np.zeros(grid.dimension) if center is None else np.asarray(center, float)
    r = np.sqrt(sum((c - x0) ** 2 for c, x0 in zip(grid.coords(), center)))
    s = np.clip((r - plateau) / (radius - plateau), 0.0, None)
    return Field(grid, height * flat_top_bump(s))


# -- spectral machinery ----------------------------------------------------------------


def fft(field: Field) -> np.ndarray:
    return np.fft.rfftn(field.values)


def ifft(grid: Grid, values_hat) -> np.ndarray:
    return np.fft.irfftn(values_hat, s=grid.shape, axes=tuple(range(grid.dimension)))


def heat_step(rho: Field, s: float) -> Field:
    """``G_s * rho`` for the ``(1/2) Lap`` heat semigroup (multiplier ``exp(-s|k|^2/2)``)."""
    if not s > 0:
        raise ValueError(f"duration must be positive, got {s}")
    mult = np.exp(-0.5 * s * rho.grid.k_squared())
    return Field(rho.grid, ifft(rho.grid, fft(rho) * mult))


def lattice_symbol(grid: Grid) -> np.ndarray:
    """Symbol of ``-(1/2)`` times the nearest-neighbour discrete Laplacian."""
    return sum((1.0 - np.cos(k * grid.h)) for k in grid.wavenumbers()) / grid.h ** 2


def lattice_heat_step(rho: Field, s: float) -> Field:
    """Exact semigroup of the nearest-neighbour discrete Laplacian (generator ``(1/2) Lap_h``).

    Its kernel is a product of positive Bessel weights, so non-negative data
    stay non-negative; mass is conserved and the variance grows by exactly
    ``s`` per axis, as for the continuum heat flow.
    """
    if not s > 0:
        raise ValueError(f"duration must be positive, got {s}")
    mult = np.exp(-s * lattice_symbol(rho.grid))
    return Field(rho.grid, ifft(rho.grid, fft(rho) * mult))


class Representation(str, Enum):
    GRID_SAMPLED = "grid"
    ANALYTIC_SYMBOL = "symbol"


class OriginRule(str, Enum):
    CELL_AVERAGE = "cell_average"
    ZERO = "zero"


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """How ``grad W * rho`` is evaluated on a grid.

    ``ANALYTIC_SYMBOL`` multiplies by the closed-form Fourier symbol and is
    available for the Newtonian and zero potentials.  ``GRID_SAMPLED``
    samples ``grad W`` at node displacements inside the box; the origin
    node of a singular kernel follows ``origin_rule``.
    """

    potential: RadialPotential
    representation: Representation = Representation.GRID_SAMPLED
    origin_rule: OriginRule | None = OriginRule.CELL_AVERAGE

    def __post_init__(self):
        object.__setattr__(self, "representation", Representation(self.representation))
        if self.origin_rule is not None:
            object.__setattr__(self, "origin_rule", OriginRule(self.origin_rule))
        if (self.representation is Representation.ANALYTIC_SYMBOL
                and self.potential.kind not in (Kind.NEWTONIAN, Kind.ZERO)):
            raise KernelConfigurationError(
                f"no closed-form symbol for {self.potential.kind.value} potentials")

    @property
    def dimension(self):
        return self.potential.dimension

    def check(self, grid: Grid):
        if grid.dimension != self.dimension:
            raise KernelConfigurationError(
                f"kernel dimension {self.dimension} does not match grid dimension {grid.dimension}")
        if (self.representation is Representation.GRID_SAMPLED and self.potential.is_singular
                and self.origin_rule is None):
            raise KernelConfigurationError(
                "singular kernel sampled on the grid needs an origin rule")


def default_kernel(W: RadialPotential) -> KernelSpec:
    """Symbol for Newtonian potentials in d >= 2, grid sampling otherwise."""
    if W.kind is Kind.NEWTONIAN and W.dimension >= 2:
        return KernelSpec(W, Representation.ANALYTIC_SYMBOL)
    return KernelSpec(W, Representation.GRID_SAMPLED, OriginRule.CELL_AVERAGE)


def _sampled_gradient(grid: Grid, W: RadialPotential, stagger_axis=None):
    """``grad W`` at node displacements (FFT order), optionally shifted by h/2 along one axis.

    Displacements equal to -L (the Nyquist plane) are dropped so that the
    sampled kernel keeps the reflection symmetries of ``W``.
    """
    d, h = grid.dimension, grid.h
    base = grid.displacements()
    axes, keep = [], np.ones(grid.shape, dtype=bool)
    for a in range(d):
        shape = [1] * d
        shape[a] = grid.n
        if a == stagger_axis:
            disp = base + 0.5 * h
        else:
            disp = base
            keep = keep & (np.abs(disp + grid.L) > 1e-12 * grid.L).reshape(shape)
        axes.append(disp.reshape(shape))
    disp = np.stack(np.broadcast_arrays(*axes), axis=-1)
    g = W.grad(disp)
    g[~keep] = 0.0
    return np.moveaxis(g, -1, 0)


@functools.lru_cache(maxsize=32)
def _kernel_hats(grid: Grid, kernel: KernelSpec, staggered: bool):
    kernel.check(grid)
    W = kernel.potential
    d = grid.dimension
    if kernel.representation is Representation.ANALYTIC_SYMBOL:
        if W.kind is Kind.ZERO:
            return [np.zeros(1)] * d
        k2 = grid.k_squared()
        inv = np.zeros_like(k2)
        np.divide(1.0, k2, out=inv, where=k2 > 0)
        ks = grid.wavenumbers_odd()
        hats = []
        for a in range(d):
            sym = 1j * ks[a] * inv
            if staggered:
                sym = sym * np.exp(1j * ks[a] * 0.5 * grid.h)
            hats.append(sym)
        return hats
    hats = []
    for a in range(d):
        g = _sampled_gradient(grid, W, stagger_axis=a if staggered else None)[a]
        hats.append(np.fft.rfftn(g) * grid.cell_volume)
    return hats


def interaction_velocity(rho: Field, kernel: KernelSpec) -> np.ndarray:
    """``v = -(grad W * rho)`` at the nodes; shape ``(d,) + grid.shape``."""
    grid = rho.grid
    hats = _kernel_hats(grid, kernel, False)
    rho_hat = fft(rho)
    return np.stack([-ifft(grid, kh * rho_hat) for kh in hats])


def face_velocity(rho: Field, kernel: KernelSpec) -> np.ndarray:
    """``v = -(grad W * rho)``; component ``a`` lives on the faces ``x + h/2 e_a``."""
    grid = rho.grid
    hats = _kernel_hats(grid, kernel, True)
    rho_hat = fft(rho)
    return np.stack([-ifft(grid, kh * rho_hat) for kh in hats])


def face_divergence(vface: np.ndarray, grid: Grid) -> np.ndarray:
    """Finite-volume divergence of a face-staggered vector field."""
    return sum((vface[a] - np.roll(vface[a], 1, axis=a)) / grid.h for a in range(grid.dimension))


def zero_pad(g: Field) -> Field:
    """Embed ``g`` in the centre of a box of twice the width."""
    grid = g.grid
    big = Grid(grid.dimension, 2 * grid.L, 2 * grid.n)
    out = np.zeros(big.shape)
    lo = grid.n // 2
    out[(slice(lo, lo + grid.n),) * grid.dimension] = g.values
    return Field(big, out)


def crop(big: Field, grid: Grid) -> Field:
    lo = grid.n // 2
    return Field(grid, big.values[(slice(lo, lo + grid.n),) * grid.dimension].copy())


def divergence_of_grad_conv(g: Field, kernel: KernelSpec, free_space: bool = False) -> Field:
    """``div(grad W * g)`` on the grid.

    With the Newtonian symbol this is ``-g`` (the symbol of ``Lap W_N`` is -1
    at every wavenumber, the mean mode included by continuity).  Grid-sampled
    kernels use the staggered finite-volume divergence of the face
    convolution, i.e. the operator the advection step actually applies.

    On the torus the sampled kernel also sees the periodic image of ``g``
    half a box away.  ``free_space=True`` evaluates the convolution on a
    zero-padded box of twice the width, which moves that image outside the
    original box and gives the whole-space result there.
    """
    grid = g.grid
    kernel.check(grid)
    if kernel.representation is Representation.ANALYTIC_SYMBOL:
        if kernel.potential.kind is Kind.ZERO:
            return zeros(grid)
        return Field(grid, -g.values.copy())
    if free_space:
        return crop(divergence_of_grad_conv(zero_pad(g), kernel), grid)
    return Field(grid, -face_divergence(face_velocity(g, kernel), grid))


@dataclass(frozen=True)
class Norms:
    l1: float
    sup: float
    argmax: tuple


def norms(rho: Field) -> Norms:
    """L1 norm, sup norm and the (lexicographically first) argmax index."""
    flat = int(np.argmax(rho.values))
    idx = tuple(int(i) for i in np.unravel_index(flat, rho.grid.shape))
    return Norms(l1=rho.l1, sup=float(rho.values.reshape(-1)[flat]), argmax=idx)


def boundary_ratio(rho: Field) -> float:
    """Largest density on the box faces relative to the sup norm."""
    sup = float(np.max(np.abs(rho.values)))
    if sup == 0.0:
        return 0.0
    v = rho.values
    edge = 0.0
    for a in range(rho.grid.dimension):
        edge = max(edge, float(np.max(np.abs(np.take(v, [0, -1], axis=a)))))
    return edge / sup


def reflect(values: np.ndarray, axis: int) -> np.ndarray:
    """Reflection ``x_axis -> -x_axis`` about the origin node."""
    return np.roll(np.flip(values, axis=axis), 1, axis=axis)


def asymmetry(rho: Field) -> float:
    """Relative sup-distance between ``rho`` and its images under the grid's
    reflections and axis permutations (zero for a radially symmetric field)."""
    v = rho.values
    scale = float(np.max(np.abs(v)))
    if scale == 0.0:
        return 0.0
    worst = 0.0
    for a in range(v.ndim):
        worst = max(worst, float(np.max(np.abs(v - reflect(v, a)))))
    for a in range(v.ndim):
        for b in range(a + 1, v.ndim):
            worst = max(worst, float(np.max(np.abs(v - np.swapaxes(v, a, b)))))
    return worst / scale


def convolve_whole_space_at(f: Field, weights_fn, point=None) -> float:
    """``sum_j K(point - x_j) f_j h^d`` without periodization."""
    grid = f.grid
    point = np.zeros(grid.dimension) if point is None else np.asarray(point, float)
    r2 = sum((c - p) ** 2 for c, p in zip(grid.coords(), point))
    return float(np.sum(weights_fn(r2) * f.values) * grid.cell_volume)


def radius_of_support(f: Field, tol=0.0) -> float:
    """Largest node radius where ``|f| > tol``."""
    r = f.grid.radius()
    mask = np.abs(f.values) > tol
    return float(np.max(r[mask])) if np.any(mask) else 0.0


def safe_sqrt(x):
    return math.sqrt(max(x, 0.0))
