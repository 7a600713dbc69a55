"""Pure numpy implementations of the hot loops in ``_core.pyx``."""
import numpy as np


def _mc_slope(a, b):
    """Monotonized-central slope: min(2|a|, 2|b|, |a+b|/2) when a and b agree in sign."""
    mag = np.minimum(np.minimum(2.0 * np.abs(a), 2.0 * np.abs(b)), 0.5 * np.abs(a + b))
    return np.where(a * b <= 0.0, 0.0, np.sign(a) * mag)


def upwind_flux_difference(rho, vface):
    """Return F[i+1/2] - F[i-1/2] along the last (periodic) axis.

    ``vface[..., i]`` is the velocity on the face between cells i and i+1.
    Face states use MC-limited linear reconstruction, upwinded by the
    sign of the face velocity.
    """
    rho = np.asarray(rho, dtype=np.float64)
    vface = np.asarray(vface, dtype=np.float64)
    rm = np.roll(rho, 1, axis=-1)
    rp = np.roll(rho, -1, axis=-1)
    slope = _mc_slope(rho - rm, rp - rho)
    left = rho + 0.5 * slope
    right = np.roll(rho - 0.5 * slope, -1, axis=-1)
    flux = np.where(vface > 0.0, vface * left, np.where(vface < 0.0, vface * right, 0.0))
    return flux - np.roll(flux, 1, axis=-1)


def pair_drift(pos, period, table, dr, block=512):
    """Sum over j of g(|x_i - x_j|) (x_i - x_j) with minimum-image displacements."""
    pos = np.ascontiguousarray(pos, dtype=np.float64)
    table = np.asarray(table, dtype=np.float64)
    npart, d = pos.shape
    out = np.zeros((npart, d))
    grid_r = np.arange(table.size) * dr
    for start in range(0, npart, block):
        stop = min(start + block, npart)
        dx = pos[start:stop, None, :] - pos[None, :, :]
        dx -= period * np.floor(dx / period + 0.5)
        r = np.sqrt(np.einsum("ijk,ijk->ij", dx, dx))
        g = np.interp(r, grid_r, table)
        g[r == 0.0] = 0.0
        out[start:stop] = np.einsum("ij,ijk->ik", g, dx)
    return out
