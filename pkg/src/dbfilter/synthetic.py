"""Deterministic synthetic test images with controllable anisotropy."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .image import GrayImage

KINDS = ("oriented-fringe", "concentric-rings", "step-wedge")


@dataclass(frozen=True)
class SyntheticImageSpec:
    """Recipe for a generated image.

    angle_deg applies to the fringe only and gives the direction (from the
    x axis, in degrees) along which the intensity varies; the stripes
    themselves run perpendicular to it. period is the wavelength in pixels,
    and offset/amplitude must keep the values inside [0, 255].
    """

    kind: str
    width: int
    height: int
    period: float = 8.0
    amplitude: float = 100.0
    offset: float = 128.0
    angle_deg: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown synthetic kind {self.kind!r}")
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be positive")
        if not self.period >= 4:
            raise ValueError("period must be at least 4 pixels")
        if self.amplitude < 0:
            raise ValueError("amplitude must be non-negative")
        if self.offset + self.amplitude > 255 or self.offset - self.amplitude < 0:
            raise ValueError("offset +- amplitude must stay inside [0, 255]")


def generate(spec: SyntheticImageSpec) -> GrayImage:
    """Render the described pattern; seed-free and bit-reproducible."""
    rows = np.arange(spec.height, dtype=np.float64)[:, None]
    cols = np.arange(spec.width, dtype=np.float64)[None, :]
    if spec.kind == "oriented-fringe":
        alpha = math.radians(spec.angle_deg)
        phase = (2.0 * np.pi / spec.period) * (cols * math.cos(alpha)
                                               + rows * math.sin(alpha))
        data = spec.offset + spec.amplitude * np.sin(phase)
    elif spec.kind == "concentric-rings":
        r = np.hypot(rows - 0.5 * (spec.height - 1),
                     cols - 0.5 * (spec.width - 1))
        data = spec.offset + spec.amplitude * np.sin(2.0 * np.pi * r
                                                     / spec.period)
    else:
        steps = max(2, math.ceil(spec.width / spec.period))
        levels = np.linspace(spec.offset - spec.amplitude,
                             spec.offset + spec.amplitude, steps)
        idx = np.minimum((cols / spec.period).astype(np.int64), steps - 1)
        data = np.broadcast_to(levels[idx], (spec.height, spec.width))
    return GrayImage(data)
