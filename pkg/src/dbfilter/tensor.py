"""Gradient, structure tensor, and per-pixel kernel steering parameters.

Angles follow the raster convention used throughout the package: the x axis
runs along columns, the y axis along rows, and theta is measured from the
x axis. theta points along the local structure (perpendicular to the
dominant gradient), which is the direction the oriented kernel elongates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .image import GrayImage


def gaussian_kernel(scale: float) -> np.ndarray:
    """Unit-sum Gaussian taps truncated at radius ceil(3*scale)."""
    if not scale > 0:
        raise ValueError("scale must be positive")
    radius = math.ceil(3.0 * scale)
    t = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(t * t) / (2.0 * scale * scale))
    return k / k.sum()


def gaussian_derivative_kernel(scale: float) -> np.ndarray:
    """Antisymmetric derivative-of-Gaussian taps with unit ramp response.

    Correlating a ramp of slope 1 with these taps returns 1; the taps sum
    to zero by the exact antisymmetry of t * g(t).
    """
    if not scale > 0:
        raise ValueError("scale must be positive")
    radius = math.ceil(3.0 * scale)
    t = np.arange(-radius, radius + 1, dtype=np.float64)
    k = t * np.exp(-(t * t) / (2.0 * scale * scale))
    return k / np.dot(t, k)


@dataclass(frozen=True)
class TensorField:
    """Smoothed second-moment components of the image gradient."""

    j11: np.ndarray
    j12: np.ndarray
    j22: np.ndarray

    def __post_init__(self):
        if not (self.j11.shape == self.j12.shape == self.j22.shape):
            raise ValueError("tensor components must share one shape")

    @property
    def height(self) -> int:
        return self.j11.shape[0]

    @property
    def width(self) -> int:
        return self.j11.shape[1]


@dataclass(frozen=True)
class OrientationField:
    """Per-pixel steering: angle theta and axis scalings (gamma1, gamma2).

    gamma1 scales the coordinate along theta and stays <= 1, so the kernel
    is always elongated along the structure; gamma1 * gamma2 == 1.
    """

    theta: np.ndarray
    gamma1: np.ndarray
    gamma2: np.ndarray

    def __post_init__(self):
        if not (self.theta.shape == self.gamma1.shape == self.gamma2.shape):
            raise ValueError("field components must share one shape")
        for name in ("theta", "gamma1", "gamma2"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def height(self) -> int:
        return self.theta.shape[0]

    @property
    def width(self) -> int:
        return self.theta.shape[1]


def gradient_dog(img: GrayImage, sigma_g: float):
    """Image gradient (gx, gy) by derivative-of-Gaussian correlation.

    gx responds to variation along columns (a horizontal unit ramp gives
    gx = 1), gy to variation along rows. Mirrored boundaries.
    """
    deriv = gaussian_derivative_kernel(sigma_g)
    smooth = gaussian_kernel(sigma_g)
    a = img.data
    gx = correlate1d(correlate1d(a, deriv, axis=1, mode="mirror"),
                     smooth, axis=0, mode="mirror")
    gy = correlate1d(correlate1d(a, deriv, axis=0, mode="mirror"),
                     smooth, axis=1, mode="mirror")
    return gx, gy


def structure_tensor(gx: np.ndarray, gy: np.ndarray, rho: float) -> TensorField:
    """Gaussian-smoothed outer product of the gradient.

    rho = 0 skips the smoothing and returns the raw per-pixel products.
    """
    if gx.shape != gy.shape:
        raise ValueError("gradient fields must share one shape")
    if rho < 0:
        raise ValueError("rho must be non-negative")
    comps = [gx * gx, gx * gy, gy * gy]
    if rho > 0:
        k = gaussian_kernel(rho)
        comps = [correlate1d(correlate1d(c, k, axis=0, mode="mirror"),
                             k, axis=1, mode="mirror") for c in comps]
    return TensorField(*comps)


def eigenvalues(j11, j12, j22):
    """Eigenvalues (lambda1 >= lambda2) of [[j11, j12], [j12, j22]].

    Works elementwise on arrays as well as scalars.
    """
    s = j11 + j22
    root = np.hypot(j11 - j22, 2.0 * j12)
    return 0.5 * (s + root), 0.5 * (s - root)


def orientation(j11, j12, j22, formula: str = "eigen"):
    """Smoothing direction in [0, pi), perpendicular to the dominant gradient.

    'eigen' uses the half-angle eigenvector form
    pi/2 + atan2(2*j12, j11 - j22) / 2. 'paper' is a compatibility variant
    with a single-argument arctangent, pi/2 + arctan(2*j12 / (j22 - j11)),
    kept for comparison; it folds quadrants together.
    """
    if formula == "eigen":
        theta = 0.5 * np.arctan2(2.0 * j12, j11 - j22) + 0.5 * np.pi
    elif formula == "paper":
        num = np.asarray(2.0 * np.asarray(j12, dtype=np.float64))
        den = np.asarray(np.asarray(j22, dtype=np.float64) - j11)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = num / den
        # 0/0 (no orientation at all) degenerates to theta = pi/2.
        theta = np.arctan(np.where(np.isnan(ratio), 0.0, ratio)) + 0.5 * np.pi
    else:
        raise ValueError(f"unknown orientation formula {formula!r}")
    return np.mod(theta, np.pi)[()]


def coherence(lambda1, lambda2, eps_flat: float = 0.0):
    """Anisotropy measure in [0, 1]; 0 where the trace is at most eps_flat."""
    s = lambda1 + lambda2
    safe = np.where(s > eps_flat, s, 1.0)
    c = np.where(s > eps_flat, (lambda1 - lambda2) / safe, 0.0)
    return np.clip(c, 0.0, 1.0)


def scalings(c):
    """Axis scalings (gamma1, gamma2) = (1/(1+C), 1+C)."""
    gamma2 = 1.0 + np.asarray(c, dtype=np.float64)
    return 1.0 / gamma2, gamma2


def orientation_field(img: GrayImage, sigma_g: float = 1.0, rho: float = 2.0,
                      eps_flat: float | None = None,
                      formula: str = "eigen") -> OrientationField:
    """Full steering field of an image: gradient -> tensor -> (theta, gamma).

    eps_flat is the trace level below which a neighbourhood counts as flat
    (theta forced to 0, kernel isotropic). None picks 1e-6 times the mean
    trace, which tolerates noisy flats; pass 0 to treat only exact zeros
    as flat.
    """
    gx, gy = gradient_dog(img, sigma_g)
    field = structure_tensor(gx, gy, rho)
    lam1, lam2 = eigenvalues(field.j11, field.j12, field.j22)
    trace = lam1 + lam2
    if eps_flat is None:
        eps_flat = 1e-6 * float(trace.mean())
    elif eps_flat < 0:
        raise ValueError("eps_flat must be non-negative")
    theta = orientation(field.j11, field.j12, field.j22, formula)
    theta = np.where(trace <= eps_flat, 0.0, theta)
    gamma1, gamma2 = scalings(coherence(lam1, lam2, eps_flat))
    return OrientationField(theta, gamma1, gamma2)
