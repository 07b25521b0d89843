"""Grayscale image container, PGM/PNG input, seeded noise, quality metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

# Recorded in sweep reports so experiments stay reproducible across builds.
PRNG_NAME = "numpy.random.default_rng(PCG64)"

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


@dataclass(frozen=True)
class GrayImage:
    """Real-valued grayscale raster.

    Intensities live in the nominal 8-bit range but are stored as floats
    and never clamped; quantization happens only when a file is written.
    The pixel buffer is frozen so images can be shared across workers.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64, order="C")
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("image data must be a non-empty 2-D array")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image intensities must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def pixels(self) -> np.ndarray:
        """Row-major flat view of the intensities."""
        return self.data.ravel()


@dataclass(frozen=True)
class NoiseSpec:
    """Additive white Gaussian noise: standard deviation and generator seed."""

    sigma: float
    seed: int

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("noise sigma must be positive")
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise ValueError("seed must be a non-negative integer")


def add_awgn(img: GrayImage, noise: NoiseSpec) -> GrayImage:
    """Add zero-mean Gaussian noise; pure function of (img, sigma, seed)."""
    rng = np.random.default_rng(noise.seed)
    return GrayImage(img.data + rng.normal(0.0, noise.sigma, img.data.shape))


def estimate_noise_sigma(img: GrayImage) -> float:
    """Robust noise estimate from the median absolute second difference.

    The diagonal second difference annihilates locally planar structure and
    has variance sigma^2 under AWGN; the MAD is scaled by the normal
    quantile 0.6745 to read as a standard deviation.
    """
    y = img.data
    if y.shape[0] < 2 or y.shape[1] < 2:
        raise ValueError("image too small for noise estimation")
    d = 0.5 * (y[1:, 1:] - y[1:, :-1] - y[:-1, 1:] + y[:-1, :-1])
    return float(np.median(np.abs(d)) / 0.6744897501960817)


def quantize(img: GrayImage) -> np.ndarray:
    """Round half-up and clamp to [0, 255] as uint8 (file representation)."""
    # floor(x + 0.5), not np.round: ties must go up, not to even.
    return np.clip(np.floor(img.data + 0.5), 0.0, 255.0).astype(np.uint8)


def save_image(img: GrayImage, path) -> None:
    """Write a binary PGM (P5, maxval 255)."""
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + quantize(img).tobytes())


def load_image(path) -> GrayImage:
    """Read a PGM (P2/P5, maxval <= 255) or an 8-bit PNG.

    Color PNGs are reduced to grayscale by averaging the RGB channels.
    """
    buf = Path(path).read_bytes()
    if buf[:2] in (b"P2", b"P5"):
        return _parse_pgm(buf)
    if buf[:8] == _PNG_MAGIC:
        return _load_png(path)
    raise ValueError(f"{path}: not a PGM or PNG file")


def _header_tokens(buf: bytes, count: int):
    """First `count` whitespace-separated tokens, honoring '#' comments.

    Returns the tokens and the offset just past the last one.
    """
    tokens = []
    i = 0
    while len(tokens) < count:
        if i >= len(buf):
            raise ValueError("truncated PGM header")
        c = buf[i:i + 1]
        if c == b"#":
            i = buf.find(b"\n", i)
            if i < 0:
                raise ValueError("truncated PGM header")
            i += 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < len(buf) and not buf[j:j + 1].isspace() and buf[j:j + 1] != b"#":
                j += 1
            tokens.append(buf[i:j])
            i = j
    return tokens, i


def _parse_pgm(buf: bytes) -> GrayImage:
    (magic, w_tok, h_tok, max_tok), end = _header_tokens(buf, 4)
    try:
        width, height, maxval = int(w_tok), int(h_tok), int(max_tok)
    except ValueError:
        raise ValueError("malformed PGM header") from None
    if width <= 0 or height <= 0:
        raise ValueError("malformed PGM header: non-positive dimensions")
    if not 0 < maxval <= 255:
        raise ValueError(f"unsupported PGM maxval {maxval} (only <= 255)")
    n = width * height
    if magic == b"P5":
        # Exactly one whitespace byte separates the header from the payload.
        if end >= len(buf) or not buf[end:end + 1].isspace():
            raise ValueError("malformed PGM header")
        payload = buf[end + 1:end + 1 + n]
        if len(payload) < n:
            raise ValueError("truncated PGM payload")
        data = np.frombuffer(payload, dtype=np.uint8).astype(np.float64)
    else:
        samples = buf[end:].split()
        if len(samples) < n:
            raise ValueError("truncated PGM payload")
        try:
            data = np.array([int(s) for s in samples[:n]], dtype=np.float64)
        except ValueError:
            raise ValueError("malformed PGM sample") from None
        if data.min() < 0 or data.max() > maxval:
            raise ValueError("PGM sample out of range")
    return GrayImage(data.reshape(height, width))


def _load_png(path) -> GrayImage:
    try:
        from PIL import Image
    except ImportError:
        raise ValueError(
            "PNG support needs Pillow (install the 'png' extra)") from None
    with Image.open(path) as im:
        if im.mode in ("I", "I;16", "I;16B", "I;16L", "F"):
            raise ValueError(f"{path}: unsupported bit depth (> 8 bits)")
        rgb = np.asarray(im.convert("RGB"), dtype=np.float64)
    return GrayImage(rgb.mean(axis=2))


def mse(a: GrayImage, b: GrayImage) -> float:
    """Mean squared difference over all pixels."""
    if a.data.shape != b.data.shape:
        raise ValueError("image dimensions differ")
    return float(np.mean((a.data - b.data) ** 2))


def psnr(a: GrayImage, b: GrayImage, peak: float = 255.0) -> float:
    """Peak signal-to-noise ratio in dB; +inf for identical images."""
    m = mse(a, b)
    if m == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / m)
