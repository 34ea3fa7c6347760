"""Bit words <-> binary pulses, and restored signals -> bits.

Digital-to-analog encoding (DAE) maps each bit to a sample of 0.0 or 1.0 on
unit time steps.  Analog-to-digital encoding (ADE) thresholds samples back to
bits, either with a single threshold or with a forbidden zone between the
logic-low and logic-high ranges.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

FORBIDDEN = "⌵"  # the forbidden-zone marker character


class CodecError(ValueError):
    pass


@dataclass(frozen=True)
class LogicLevels:
    """Logic ranges used by ADE.

    ``v_llr`` is the top of the logic-low range and ``v_lhr`` the bottom of
    the logic-high range.  Equal values mean threshold mode.
    """

    v_llr: float = 0.5
    v_lhr: float = 0.5

    def __post_init__(self):
        if not (np.isfinite(self.v_llr) and np.isfinite(self.v_lhr)):
            raise CodecError("logic levels must be finite")
        if self.v_llr > self.v_lhr:
            raise CodecError(f"v_llr={self.v_llr} exceeds v_lhr={self.v_lhr}")

    @classmethod
    def threshold(cls, v_thd: float = 0.5) -> "LogicLevels":
        return cls(v_thd, v_thd)

    @property
    def is_threshold(self) -> bool:
        return self.v_llr == self.v_lhr

    @property
    def v_thd(self) -> float:
        if not self.is_threshold:
            raise CodecError("levels have a forbidden zone; no single threshold")
        return self.v_llr

    @property
    def noise_margin(self) -> float:
        """Margin length implied by symmetric levels around 0 and 1."""
        return min(self.v_llr, 1.0 - self.v_lhr)


def as_bits(word) -> np.ndarray:
    """Coerce a '0'/'1' string or an integer sequence to a uint8 bit array."""
    if isinstance(word, str):
        word = word.strip()
        if any(c not in "01" for c in word):
            raise CodecError(f"bit string may only contain '0' and '1': {word!r}")
        return np.frombuffer(word.encode("ascii"), dtype=np.uint8) - ord("0")
    bits = np.asarray(word)
    if bits.size and not np.isin(bits, (0, 1)).all():
        raise CodecError("bit values must be 0 or 1")
    return bits.astype(np.uint8)


def bits_to_str(bits: Iterable[int]) -> str:
    return "".join("1" if b else "0" for b in np.asarray(bits).ravel())


def _check_word(bits: np.ndarray):
    if bits.shape[-1] < 2:
        raise CodecError("a bit word needs the ancilla bit plus at least one payload bit")


def dae(word) -> np.ndarray:
    """Binary pulse samples X_0..X_K of a bit word (works on batches too)."""
    bits = as_bits(word)
    _check_word(bits)
    return bits.astype(float)


def dae_continuation(signal, resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """Piecewise-linear continuation sampled ``resolution`` times per step.

    Returns ``(t, x)``.  Only used for rendering; the pipeline works on the
    integer samples.
    """
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise CodecError("continuation needs a nonempty 1-D signal")
    if resolution < 1:
        raise CodecError("resolution must be >= 1")
    t = np.linspace(0.0, x.size - 1, resolution * (x.size - 1) + 1)
    return t, np.interp(t, np.arange(x.size), x)


def ade(signal, levels: LogicLevels = LogicLevels()) -> np.ndarray:
    """Threshold-mode ADE: bit is 1 iff sample >= V_thd."""
    if not levels.is_threshold:
        raise CodecError("threshold ADE called with a forbidden zone; use ade_trilevel")
    x = np.asarray(signal, dtype=float)
    return (x >= levels.v_thd).astype(np.uint8)


def ade_trilevel(signal, levels: LogicLevels) -> list[str]:
    """ADE with a forbidden zone: '1' at or above v_lhr, '0' at or below v_llr."""
    if not 0.0 < levels.v_llr < levels.v_lhr < 1.0:
        raise CodecError("trilevel ADE needs 0 < v_llr < v_lhr < 1")
    x = np.asarray(signal, dtype=float).ravel()
    return ["1" if s >= levels.v_lhr else "0" if s <= levels.v_llr else FORBIDDEN for s in x]


def collapse_trichars(chars: Iterable[str]) -> np.ndarray:
    """Drop forbidden-zone markers and keep the 0/1 characters in order."""
    kept = "".join(c for c in chars if c != FORBIDDEN)
    return as_bits(kept)


def strip_ancilla(word) -> np.ndarray:
    """Payload a_1..a_K of a restored word (the ancilla a_0 is always dropped)."""
    bits = as_bits(word)
    _check_word(bits)
    return bits[..., 1:]


def write_signal_csv(signal) -> str:
    x = np.asarray(signal, dtype=float).ravel()
    return "".join(f"{v:.17g}\n" for v in x)


def read_signal_csv(text: str) -> np.ndarray:
    rows = [line.strip() for line in text.splitlines() if line.strip()]
    try:
        x = np.array([float(r) for r in rows])
    except ValueError as exc:
        raise CodecError(f"malformed signal sample: {exc}") from None
    if not np.isfinite(x).all():
        raise CodecError("signal contains non-finite samples")
    return x


def random_word(rng: np.random.Generator, payload_len: int, shape: Sequence[int] = ()) -> np.ndarray:
    """Uniform random payload bits behind a zero ancilla bit."""
    bits = rng.integers(0, 2, size=(*shape, payload_len + 1), dtype=np.uint8)
    bits[..., 0] = 0
    return bits
