"""Unbiased risk evaluation and grid search for filter parameters.

The risk of a filter output under additive white Gaussian noise is
estimated from the noisy image alone: residual energy plus a divergence
term measuring how much each output pixel follows its own input sample.
Minimizing this estimate over a parameter grid picks scales close to the
(unobservable) MSE optimum.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import _engine
from .filters import FilterParams, VARIANTS, _check_field, default_window_radius
from .image import PRNG_NAME, GrayImage
from .tensor import OrientationField, orientation_field


def filter_with_divergence(img: GrayImage, params: FilterParams,
                           field: OrientationField | None = None):
    """Filter output together with its divergence d(output)/d(input).

    The divergence sums, over pixels, the derivative of each output value
    with respect to the input sample at the same position, holding any
    orientation field fixed (domain weights are treated as precomputed
    constants). Range-kernel sensitivity enters through
    phi' = phi * (y_q - y_p) / rho_r^2, which vanishes at the center tap
    and everywhere for 'adf'. Window taps that mirror back onto the center
    pixel contribute their domain weight to the derivative as well.
    """
    _check_field(img, params, field)
    out, deriv = _engine.run_cells(
        img.data, field, params.variant, params.rho_d,
        None if params.variant == "adf" else [params.rho_r],
        params.window_radius, want_div=True)
    return GrayImage(out[0]), float(deriv[0].sum())


def _sure_value(y: np.ndarray, x_hat: np.ndarray, div: float,
                sigma: float) -> float:
    n = y.size
    resid = float(np.mean((x_hat - y) ** 2))
    return resid + 2.0 * sigma * sigma * div / n - sigma * sigma


def sure(y: GrayImage, x_hat: GrayImage, div: float, sigma: float) -> float:
    """Stein's unbiased risk estimate of the denoiser that produced x_hat."""
    if y.data.shape != x_hat.data.shape:
        raise ValueError("image dimensions differ")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return _sure_value(y.data, x_hat.data, div, sigma)


@dataclass(frozen=True)
class SweepGrid:
    """Strictly ascending positive parameter values, one axis per scale."""

    rho_d_values: np.ndarray
    rho_r_values: np.ndarray

    def __post_init__(self):
        for name in ("rho_d_values", "rho_r_values"):
            vals = np.atleast_1d(np.asarray(getattr(self, name),
                                            dtype=np.float64)).ravel()
            if vals.size == 0:
                raise ValueError(f"{name} must be non-empty")
            if not np.all(vals > 0):
                raise ValueError(f"{name} must be positive")
            if vals.size > 1 and not np.all(np.diff(vals) > 0):
                raise ValueError(f"{name} must be strictly ascending")
            vals.flags.writeable = False
            object.__setattr__(self, name, vals)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rho_d_values.size, self.rho_r_values.size


def default_grid(sigma: float) -> SweepGrid:
    """10 x 10 log-spaced grid: rho_d in [0.5, 5] px, rho_r in [0.5, 5] sigma."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return SweepGrid(np.geomspace(0.5, 5.0, 10),
                     np.geomspace(0.5 * sigma, 5.0 * sigma, 10))


@dataclass(frozen=True)
class SweepReport:
    """Risk surface over a grid with the minimizing cell picked out.

    Ties resolve to the smallest rho_d, then the smallest rho_r, so the
    winner never depends on enumeration order. mse_surface is present only
    when a clean image was supplied.
    """

    grid: SweepGrid
    sure_surface: np.ndarray
    mse_surface: np.ndarray | None
    best_params: tuple[float, float]
    best_index: tuple[int, int]
    sigma: float
    metadata: dict

    @property
    def best_sure(self) -> float:
        return float(self.sure_surface[self.best_index])

    def to_csv_text(self) -> str:
        with_mse = self.mse_surface is not None
        lines = ["rho_d,rho_r,sure" + (",mse" if with_mse else "")]
        for i, rd in enumerate(self.grid.rho_d_values):
            for j, rr in enumerate(self.grid.rho_r_values):
                cells = [repr(float(rd)), repr(float(rr)),
                         repr(float(self.sure_surface[i, j]))]
                if with_mse:
                    cells.append(repr(float(self.mse_surface[i, j])))
                lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def to_json_text(self) -> str:
        payload = dict(self.metadata)
        payload.update({
            "best_rho_d": float(self.best_params[0]),
            "best_rho_r": float(self.best_params[1]),
            "best_sure": self.best_sure,
            "sigma": float(self.sigma),
            "rho_d_values": [float(v) for v in self.grid.rho_d_values],
            "rho_r_values": [float(v) for v in self.grid.rho_r_values],
        })
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def write(self, csv_path) -> None:
        """Write the CSV surface plus a JSON sidecar next to it."""
        from pathlib import Path
        path = Path(csv_path)
        path.write_text(self.to_csv_text(), encoding="ascii")
        path.with_suffix(".json").write_text(self.to_json_text(),
                                             encoding="ascii")


def _base_metadata(variant, sigma_g, rho_tensor, theta_formula,
                   window_radius, extra):
    meta = {
        "variant": variant,
        "sigma_g": float(sigma_g),
        "rho_tensor": float(rho_tensor),
        "theta_formula": theta_formula,
        "window_radius": window_radius,
        "prng": PRNG_NAME,
        "seed": None,
    }
    if extra:
        meta.update(extra)
    return meta


def _sweep_impl(y, sigma, grid, variant, sigma_g, rho_tensor, clean,
                window_radius, theta_formula, field, metadata):
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if variant not in VARIANTS:
        raise ValueError(f"unknown filter variant {variant!r}")
    if clean is not None and clean.data.shape != y.data.shape:
        raise ValueError("clean image dimensions differ")
    if variant != "gbf" and field is None:
        field = orientation_field(y, sigma_g, rho_tensor,
                                  formula=theta_formula)
    nd, nr = grid.shape
    sure_surface = np.empty((nd, nr))
    mse_surface = np.empty((nd, nr)) if clean is not None else None
    best = None  # (sure, i, j, output copy)
    for i, rd in enumerate(grid.rho_d_values):
        radius = (default_window_radius(variant, rd)
                  if window_radius is None else window_radius)
        out, deriv = _engine.run_cells(
            y.data, field, variant, float(rd),
            None if variant == "adf" else grid.rho_r_values,
            radius, want_div=True)
        for j in range(nr):
            # The 'adf' surface is constant along rho_r (no range kernel):
            # one computed cell serves the whole row.
            k = 0 if variant == "adf" else j
            x_hat = out[k]
            div = float(deriv[k].sum())
            value = _sure_value(y.data, x_hat, div, sigma)
            sure_surface[i, j] = value
            if clean is not None:
                mse_surface[i, j] = float(np.mean((x_hat - clean.data) ** 2))
            if best is None or value < best[0]:
                best = (value, i, j, x_hat.copy())
    _, bi, bj, bx = best
    report = SweepReport(
        grid=grid, sure_surface=sure_surface, mse_surface=mse_surface,
        best_params=(float(grid.rho_d_values[bi]),
                     float(grid.rho_r_values[bj])),
        best_index=(bi, bj), sigma=float(sigma),
        metadata=_base_metadata(variant, sigma_g, rho_tensor, theta_formula,
                                window_radius, metadata))
    return report, bx, field


def sweep(y: GrayImage, sigma: float, grid: SweepGrid, variant: str = "dbf",
          sigma_g: float = 1.0, rho_tensor: float = 2.0,
          clean: GrayImage | None = None, window_radius: int | None = None,
          theta_formula: str = "eigen", field: OrientationField | None = None,
          metadata: dict | None = None) -> SweepReport:
    """Risk surface over the grid, one fused filter+divergence pass per cell.

    The orientation field is computed once from the noisy image (or taken
    from the caller) and reused for every cell. Supplying a clean image
    attaches the matching MSE surface for comparison.
    """
    report, _, _ = _sweep_impl(y, sigma, grid, variant, sigma_g, rho_tensor,
                               clean, window_radius, theta_formula, field,
                               metadata)
    return report


def denoise_auto(y: GrayImage, sigma: float, variant: str = "dbf",
                 grid: SweepGrid | None = None, sigma_g: float = 1.0,
                 rho_tensor: float = 2.0, clean: GrayImage | None = None,
                 window_radius: int | None = None,
                 theta_formula: str = "eigen",
                 field: OrientationField | None = None,
                 metadata: dict | None = None):
    """Sweep the grid, then return the output at the risk-minimizing cell.

    Returns (denoised image, report). The image is the sweep's own output
    at best_params; cells are evaluated independently, so it is the same
    array a fresh apply_filter call at those parameters would produce.
    """
    if grid is None:
        grid = default_grid(sigma)
    report, best, _ = _sweep_impl(y, sigma, grid, variant, sigma_g,
                                  rho_tensor, clean, window_radius,
                                  theta_formula, field, metadata)
    return GrayImage(best), report
