"""Grayscale denoising with tensor-steered bilateral filters.

The domain kernel of the directional variant elongates along the local
structure (orientation and anisotropy come from a smoothed structure
tensor) while the usual range kernel guards edges. Filter scales are
picked without the clean image by minimizing Stein's unbiased risk
estimate over a parameter grid.
"""

from .filters import (
    VARIANTS,
    FilterParams,
    apply_filter,
    default_window_radius,
    domain_weight_gaussian,
    domain_weight_oriented,
    range_weight,
)
from .image import (
    PRNG_NAME,
    GrayImage,
    NoiseSpec,
    add_awgn,
    estimate_noise_sigma,
    load_image,
    mse,
    psnr,
    quantize,
    save_image,
)
from .sure import (
    SweepGrid,
    SweepReport,
    default_grid,
    denoise_auto,
    filter_with_divergence,
    sure,
    sweep,
)
from .synthetic import KINDS, SyntheticImageSpec, generate
from .tensor import (
    OrientationField,
    TensorField,
    coherence,
    eigenvalues,
    gaussian_derivative_kernel,
    gaussian_kernel,
    gradient_dog,
    orientation,
    orientation_field,
    scalings,
    structure_tensor,
)

__version__ = "0.1.0"

_LAZY = ("BilateralDenoiser", "SureTunedDenoiser")


def __getattr__(name):
    # sklearn is only pulled in when the estimator API is actually used.
    if name in _LAZY:
        from . import estimators
        return getattr(estimators, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
