"""Compiled inner loops shared by the filter and the SURE sweep.

One kernel invocation evaluates a whole batch of range scales ("cells")
against a fixed domain scale, so a sweep row reuses every geometric term.
The isotropic and oriented kernels keep identical expression shapes on
purpose: with a trivial steering field (theta = 0, gamma = 1) the oriented
path degenerates to the isotropic one bit for bit.

Mirror (reflect-101) boundaries fold some window taps back onto the center
pixel near the borders. Those aliased taps make the filter output depend
on the center sample through the domain weights as well, so the divergence
accumulates their full weight (the `amass` term) instead of the lone +1 of
an interior pixel; the aliased range factor is exactly 1 and its intensity
derivative contributes nothing since y_q - y_p == 0 there.
"""

from __future__ import annotations

import math

import numba
import numpy as np

# The portable scheduler: keeps import quiet when TBB is stale and makes
# row scheduling deterministic across machines.
numba.config.THREADING_LAYER = "workqueue"

from numba import njit, prange  # noqa: E402


def _reflect_indices(n: int, radius: int) -> np.ndarray:
    """Source index in [0, n) for padded positions -radius .. n+radius-1."""
    pos = np.arange(-radius, n + radius)
    if n == 1:
        return np.zeros(pos.size, dtype=np.int64)
    period = 2 * n - 2
    m = np.mod(pos, period)
    return np.where(m >= n, period - m, m)


def _alias_table(n: int, radius: int) -> np.ndarray:
    """alias[i, t] is True when window tap t of pixel i mirrors back onto i."""
    refl = _reflect_indices(n, radius)
    taps = np.arange(n)[:, None] + np.arange(2 * radius + 1)[None, :]
    return refl[taps] == np.arange(n)[:, None]


def _quadratic_coeffs(theta, gamma1, gamma2):
    """Per-pixel coefficients of the oriented squared distance.

    The rotated anisotropic norm gamma1^2 u^2 + gamma2^2 v^2 expands to
    axx*dx^2 + axy*dx*dy + ayy*dy^2, which the kernel evaluates without
    per-tap trigonometry.
    """
    c = np.cos(theta)
    s = np.sin(theta)
    g1 = gamma1 * gamma1
    g2 = gamma2 * gamma2
    axx = g1 * c * c + g2 * s * s
    axy = 2.0 * c * s * (g1 - g2)
    ayy = g1 * s * s + g2 * c * c
    return axx, axy, ayy


@njit(cache=True, parallel=True, nogil=True)
def _pass_oriented(ypad, axx, axy, ayy, inv_two_d2, inv_two_r2, inv_r2,
                   radius, alias_rows, alias_cols, want_div):
    hgt, wid = axx.shape
    k_cells = inv_two_r2.size
    taps = 2 * radius + 1
    out = np.empty((k_cells, hgt, wid))
    deriv = np.zeros((k_cells, hgt, wid))
    for iy in prange(hgt):
        acc_w = np.empty(k_cells)
        acc_r = np.empty(k_cells)
        acc_ry = np.empty(k_cells)
        for ix in range(wid):
            qxx = axx[iy, ix]
            qxy = axy[iy, ix]
            qyy = ayy[iy, ix]
            yp = ypad[iy + radius, ix + radius]
            for k in range(k_cells):
                acc_w[k] = 0.0
                acc_r[k] = 0.0
                acc_ry[k] = 0.0
            amass = 0.0
            for ty in range(taps):
                dyf = float(ty - radius)
                row_hit = alias_rows[iy, ty]
                for tx in range(taps):
                    dxf = float(tx - radius)
                    dist = qxx * (dxf * dxf) + qxy * (dxf * dyf) + qyy * (dyf * dyf)
                    scaled = dist * inv_two_d2
                    yq = ypad[iy + ty, ix + tx]
                    d = yq - yp
                    dd = d * d
                    if row_hit and alias_cols[ix, tx]:
                        amass += math.exp(-scaled)
                    for k in range(k_cells):
                        w = math.exp(-scaled - dd * inv_two_r2[k])
                        acc_w[k] += w
                        wd = w * d
                        acc_r[k] += wd
                        if want_div:
                            acc_ry[k] += wd * yq
            # Residual form: a constant window leaves the pixel untouched
            # exactly, since every y_q - y_p is literally zero.
            for k in range(k_cells):
                xh = yp + acc_r[k] / acc_w[k]
                out[k, iy, ix] = xh
                if want_div:
                    deriv[k, iy, ix] = (amass + (acc_ry[k] - xh * acc_r[k])
                                        * inv_r2[k]) / acc_w[k]
    return out, deriv


@njit(cache=True, parallel=True, nogil=True)
def _pass_isotropic(ypad, hgt, wid, inv_two_d2, inv_two_r2, inv_r2,
                    radius, alias_rows, alias_cols, want_div):
    k_cells = inv_two_r2.size
    taps = 2 * radius + 1
    out = np.empty((k_cells, hgt, wid))
    deriv = np.zeros((k_cells, hgt, wid))
    for iy in prange(hgt):
        acc_w = np.empty(k_cells)
        acc_r = np.empty(k_cells)
        acc_ry = np.empty(k_cells)
        for ix in range(wid):
            yp = ypad[iy + radius, ix + radius]
            for k in range(k_cells):
                acc_w[k] = 0.0
                acc_r[k] = 0.0
                acc_ry[k] = 0.0
            amass = 0.0
            for ty in range(taps):
                dyf = float(ty - radius)
                row_hit = alias_rows[iy, ty]
                for tx in range(taps):
                    dxf = float(tx - radius)
                    dist = dxf * dxf + dyf * dyf
                    scaled = dist * inv_two_d2
                    yq = ypad[iy + ty, ix + tx]
                    d = yq - yp
                    dd = d * d
                    if row_hit and alias_cols[ix, tx]:
                        amass += math.exp(-scaled)
                    for k in range(k_cells):
                        w = math.exp(-scaled - dd * inv_two_r2[k])
                        acc_w[k] += w
                        wd = w * d
                        acc_r[k] += wd
                        if want_div:
                            acc_ry[k] += wd * yq
            for k in range(k_cells):
                xh = yp + acc_r[k] / acc_w[k]
                out[k, iy, ix] = xh
                if want_div:
                    deriv[k, iy, ix] = (amass + (acc_ry[k] - xh * acc_r[k])
                                        * inv_r2[k]) / acc_w[k]
    return out, deriv


def run_cells(y: np.ndarray, field, variant: str, rho_d: float,
              rho_r_values, radius: int, want_div: bool):
    """Filter y at one domain scale for a batch of range scales.

    field is an OrientationField for 'adf'/'dbf' and ignored for 'gbf'.
    rho_r_values is ignored for 'adf' (its batch has a single cell with
    the range kernel pinned to 1). Returns (out, deriv), each shaped
    (cells, height, width); deriv is zeros unless want_div.
    """
    y = np.ascontiguousarray(y, dtype=np.float64)
    radius = int(radius)
    ypad = np.pad(y, radius, mode="reflect")
    alias_rows = _alias_table(y.shape[0], radius)
    alias_cols = _alias_table(y.shape[1], radius)
    inv_two_d2 = 1.0 / (2.0 * rho_d * rho_d)
    if variant == "adf":
        inv_two_r2 = np.zeros(1)
        inv_r2 = np.zeros(1)
    else:
        rr = np.atleast_1d(np.asarray(rho_r_values, dtype=np.float64))
        inv_two_r2 = 1.0 / (2.0 * rr * rr)
        inv_r2 = 1.0 / (rr * rr)
    if variant == "gbf":
        return _pass_isotropic(ypad, y.shape[0], y.shape[1], inv_two_d2,
                               inv_two_r2, inv_r2, radius, alias_rows,
                               alias_cols, want_div)
    axx, axy, ayy = _quadratic_coeffs(field.theta, field.gamma1, field.gamma2)
    return _pass_oriented(ypad, axx, axy, ayy, inv_two_d2, inv_two_r2,
                          inv_r2, radius, alias_rows, alias_cols, want_div)


def set_threads(n: int) -> None:
    """Cap the engine's worker count (clamped to what numba can offer)."""
    numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))


def warmup() -> None:
    """Force both kernels through compilation on a tiny input."""
    y = np.arange(16.0).reshape(4, 4)
    ones = np.ones((4, 4))
    run_cells(y, None, "gbf", 1.0, [10.0], 1, True)

    class _Field:
        theta = np.zeros((4, 4))
        gamma1 = ones
        gamma2 = ones

    run_cells(y, _Field(), "dbf", 1.0, [10.0, 20.0], 1, True)
