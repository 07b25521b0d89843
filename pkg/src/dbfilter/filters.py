"""Filter variants: shared window engine plus per-variant kernel choices.

Three variants share one normalized weighted-average core. 'gbf' pairs an
isotropic Gaussian domain kernel with a Gaussian range kernel, 'adf' uses
the tensor-steered oriented domain kernel alone, and 'dbf' combines the
oriented domain kernel with the range kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import _engine
from .image import GrayImage
from .tensor import OrientationField

VARIANTS = ("gbf", "adf", "dbf")

MAX_DEFAULT_RADIUS = 15


def default_window_radius(variant: str, domain_scale: float) -> int:
    """Window radius covering 3 standard deviations of the domain kernel.

    The oriented kernel's long axis is stretched by up to 2 (gamma1 can
    drop to 1/2), so 'adf'/'dbf' get twice the isotropic support. Capped
    so sweeps over large scales stay affordable.
    """
    if variant == "gbf":
        r = math.ceil(3.0 * domain_scale)
    else:
        r = math.ceil(6.0 * domain_scale)
    return max(1, min(MAX_DEFAULT_RADIUS, int(r)))


@dataclass(frozen=True)
class FilterParams:
    """Variant selector plus kernel scales and window geometry.

    rho_d is the domain scale in pixels, rho_r the range scale in intensity
    units (unused by 'adf'). window_radius None picks the default for the
    variant and scale; 0 is allowed and collapses the window to the center
    pixel, which turns the filter into the identity (the degenerate
    reference case for risk checks).
    """

    variant: str
    rho_d: float
    rho_r: float | None = None
    window_radius: int | None = None
    boundary: str = "mirror"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown filter variant {self.variant!r}")
        if not self.rho_d > 0:
            raise ValueError("rho_d must be positive")
        if self.variant == "adf":
            if self.rho_r is not None and not self.rho_r > 0:
                raise ValueError("rho_r must be positive when given")
        elif self.rho_r is None or not self.rho_r > 0:
            raise ValueError(f"{self.variant} needs a positive rho_r")
        if self.boundary != "mirror":
            raise ValueError("only mirror boundaries are supported")
        if self.window_radius is None:
            object.__setattr__(self, "window_radius",
                               default_window_radius(self.variant, self.rho_d))
        else:
            r = int(self.window_radius)
            if r != self.window_radius or r < 0:
                raise ValueError("window_radius must be an integer >= 0")
            object.__setattr__(self, "window_radius", r)


def domain_weight_gaussian(dx: float, dy: float, sigma_d: float) -> float:
    """Isotropic Gaussian weight for a window offset (dx columns, dy rows)."""
    if not sigma_d > 0:
        raise ValueError("sigma_d must be positive")
    return math.exp(-(dx * dx + dy * dy) / (2.0 * sigma_d * sigma_d))


def domain_weight_oriented(dx: float, dy: float, theta: float, gamma1: float,
                           gamma2: float, rho_d: float) -> float:
    """Oriented Gaussian weight: the offset is rotated into the local frame.

    u lies along theta and is scaled by gamma1, v across it by gamma2;
    gamma1 <= 1 <= gamma2 elongates the kernel along the structure.
    """
    if not rho_d > 0:
        raise ValueError("rho_d must be positive")
    if not (gamma1 > 0 and gamma2 > 0):
        raise ValueError("scalings must be positive")
    u = dx * math.cos(theta) + dy * math.sin(theta)
    v = -dx * math.sin(theta) + dy * math.cos(theta)
    return math.exp(-(gamma1 * gamma1 * u * u + gamma2 * gamma2 * v * v)
                    / (2.0 * rho_d * rho_d))


def range_weight(yp: float, yq: float, sigma_r: float) -> float:
    """Intensity-similarity weight."""
    if not sigma_r > 0:
        raise ValueError("sigma_r must be positive")
    d = yp - yq
    return math.exp(-(d * d) / (2.0 * sigma_r * sigma_r))


def _check_field(img: GrayImage, params: FilterParams,
                 field: OrientationField | None) -> None:
    if params.variant == "gbf":
        if field is not None:
            raise ValueError("gbf takes no orientation field")
    elif field is None:
        raise ValueError(f"{params.variant} needs an orientation field")
    elif field.theta.shape != img.data.shape:
        raise ValueError("orientation field dimensions differ from image")


def apply_filter(img: GrayImage, params: FilterParams,
                 field: OrientationField | None = None) -> GrayImage:
    """Normalized window average of img under the chosen kernels.

    The center tap always carries weight 1, so the normalizer never
    vanishes and the output is a convex combination of window samples.
    """
    _check_field(img, params, field)
    out, _ = _engine.run_cells(img.data, field, params.variant, params.rho_d,
                               None if params.variant == "adf" else [params.rho_r],
                               params.window_radius, want_div=False)
    return GrayImage(out[0])
