"""Grayscale images through the concealing-restoring pipeline.

An 8-bit image becomes one bit word: a zero ancilla bit followed by every
pixel, row-major, most significant bit first.  Images are read and written as
binary PGM (P5, maxval 255).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .bitcodec import LogicLevels, ade, dae
from .concealing import ConcealedBundle, conceal
from .keys import KeyBundle, generate_noise_tape
from .restoring import restore


class ImageFormatError(ValueError):
    pass


@dataclass
class GrayImage:
    pixels: np.ndarray  # (height, width) uint8

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2 or 0 in px.shape:
            raise ImageFormatError("pixels must be a nonempty 2-D array")
        if px.dtype != np.uint8:
            if px.min() < 0 or px.max() > 255:
                raise ImageFormatError("pixel values must lie in [0, 255]")
            px = px.astype(np.uint8)
        self.pixels = px

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other):
        return isinstance(other, GrayImage) and np.array_equal(self.pixels, other.pixels)


def image_to_word(img: GrayImage) -> np.ndarray:
    bits = np.unpackbits(img.pixels.ravel())  # MSB first
    return np.concatenate([[0], bits]).astype(np.uint8)


def word_to_image(word, width: int, height: int) -> GrayImage:
    bits = np.asarray(word, dtype=np.uint8)
    if bits.shape[-1] != 8 * width * height + 1:
        raise ImageFormatError(f"word length {bits.shape[-1]} does not fit a {width}x{height} image")
    return GrayImage(np.packbits(bits[1:]).reshape(height, width))


_HEADER = re.compile(rb"(P\d)(?:\s|#[^\n]*\n)+(\d+)(?:\s|#[^\n]*\n)+(\d+)(?:\s|#[^\n]*\n)+(\d+)\s")


def read_pgm(data: bytes) -> GrayImage:
    if data[:2] != b"P5":
        raise ImageFormatError(f"not a binary PGM (magic {data[:2]!r}); only P5 is supported")
    m = _HEADER.match(data)
    if m is None:
        raise ImageFormatError("malformed PGM header")
    width, height, maxval = (int(g) for g in m.groups()[1:])
    if maxval != 255:
        raise ImageFormatError(f"maxval {maxval} unsupported; need 255")
    if width < 1 or height < 1:
        raise ImageFormatError("image dimensions must be positive")
    payload = data[m.end():m.end() + width * height]
    if len(payload) != width * height:
        raise ImageFormatError(f"truncated PGM: expected {width * height} bytes, got {len(payload)}")
    return GrayImage(np.frombuffer(payload, dtype=np.uint8).reshape(height, width).copy())


def write_pgm(img: GrayImage) -> bytes:
    return f"P5\n{img.width} {img.height}\n255\n".encode("ascii") + img.pixels.tobytes()


def conceal_image(img: GrayImage, keys: KeyBundle, trial_seed: int = 0) -> ConcealedBundle:
    word = image_to_word(img)
    tape = generate_noise_tape(keys, word.size, trial_seed)
    data = conceal(dae(word), keys, tape)
    data.image_shape = (img.width, img.height)
    return data


def restore_image(data: ConcealedBundle, keys: KeyBundle, width: int | None = None, height: int | None = None) -> GrayImage:
    if width is None or height is None:
        if data.image_shape is None:
            raise ImageFormatError("image size unknown; pass width and height")
        width, height = data.image_shape
    return word_to_image(restore(data, keys).word, width, height)


def eve_direct_image(data: ConcealedBundle, level: int, width: int, height: int, v_thd: float = 0.5) -> GrayImage:
    """Image read straight off concealed level ``level`` (1-based) by ADE."""
    bits = ade(data.u[level - 1], LogicLevels.threshold(v_thd))
    return word_to_image(bits, width, height)


def mean_abs_error(a: GrayImage, b: GrayImage) -> float:
    """Per-pixel mean absolute error as a fraction of full scale."""
    return float(np.abs(a.pixels.astype(int) - b.pixels.astype(int)).mean() / 255)


def synthetic_image(size: int = 32, seed: int = 0) -> GrayImage:
    """Smooth synthetic image: a radial blob on a gradient with mild texture."""
    y, x = np.mgrid[0:size, 0:size] / max(size - 1, 1)
    blob = np.exp(-((x - 0.55) ** 2 + (y - 0.45) ** 2) / 0.08)
    texture = np.random.default_rng(seed).normal(0, 0.03, (size, size))
    img = 0.35 * x + 0.55 * blob + 0.1 + texture
    return GrayImage(np.clip(np.rint(255 * img), 0, 255).astype(np.uint8))
