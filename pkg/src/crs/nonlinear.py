"""Shift-only piecewise-linear bijections of the unit interval.

Each piece ``[lo, hi)`` maps ``x -> x + offset``; the last piece also takes
``x = 1``.  A map is a bijection of ``[0, 1)`` when the shifted pieces tile
``[0, 1)`` again.  ``apply_extended`` lifts a map to all reals by acting on the
fractional part, which keeps it invertible for values that leave the unit
interval.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np


class BijectionError(ValueError):
    pass


@dataclass(frozen=True)
class PiecewiseBijection:
    id: str
    breakpoints: tuple[float, ...]  # 0 = p_0 < p_1 < ... < p_m = 1
    offsets: tuple[float, ...]  # one per piece

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))
        object.__setattr__(self, "offsets", tuple(float(c) for c in self.offsets))
        validate(self)

    @property
    def pieces(self) -> list[tuple[float, float, float]]:
        bp = self.breakpoints
        return [(bp[j], bp[j + 1], c) for j, c in enumerate(self.offsets)]

    def _piece_index(self, x: np.ndarray) -> np.ndarray:
        inner = np.asarray(self.breakpoints[1:-1])
        return np.searchsorted(inner, x, side="right")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if ((x < 0.0) | (x > 1.0) | ~np.isfinite(x)).any():
            raise BijectionError(f"{self.id} is defined on [0, 1]; use apply_extended")
        out = x + np.asarray(self.offsets)[self._piece_index(x)]
        return out if out.ndim else float(out)


def _q(x: float) -> Fraction:
    return Fraction(repr(float(x)))


def validate(f: PiecewiseBijection):
    """Raise unless domain and image pieces both tile the unit interval."""
    bp, off = f.breakpoints, f.offsets
    if len(bp) < 2 or len(off) != len(bp) - 1:
        raise BijectionError("need m+1 breakpoints for m offsets")
    if bp[0] != 0.0 or bp[-1] != 1.0:
        raise BijectionError("domain pieces must cover [0, 1]")
    if any(hi <= lo for lo, hi in zip(bp, bp[1:])):
        raise BijectionError("breakpoints must be strictly increasing")
    # exact rationals from each float's shortest decimal form, so pieces
    # written as 0.1 / 0.9 tile the way they read
    images = sorted((_q(lo) + _q(c), _q(hi) + _q(c)) for lo, hi, c in f.pieces)
    edge = Fraction(0)
    for lo, hi in images:
        if lo != edge:
            kind = "overlap" if lo < edge else "gap"
            raise BijectionError(f"{f.id}: image pieces have a {kind} at {float(min(lo, edge))}")
        edge = hi
    if edge != 1:
        raise BijectionError(f"{f.id}: image pieces do not reach 1")


def inverse(f: PiecewiseBijection, id: str | None = None) -> PiecewiseBijection:
    images = sorted((lo + c, -c) for lo, _, c in f.pieces)
    return PiecewiseBijection(
        id=id or f"{f.id}^-1",
        breakpoints=[lo for lo, _ in images] + [1.0],
        offsets=[c for _, c in images],
    )


def apply_extended(f: PiecewiseBijection, x):
    """``floor(x) + f(x - floor(x))``; a bijection of the real line."""
    x = np.asarray(x, dtype=float)
    if not np.isfinite(x).all():
        raise BijectionError("apply_extended needs finite input")
    frac = x - np.floor(x)
    # floor(x) + frac + offset, with a single rounding
    out = x + np.asarray(f.offsets)[f._piece_index(frac)]
    return out if out.ndim else float(out)


IDENTITY = PiecewiseBijection("identity", (0.0, 1.0), (0.0,))

G_S = PiecewiseBijection("g_s", (0, 0.25, 0.5, 0.75, 1), (0.75, 0.25, -0.25, -0.75))

G_C = PiecewiseBijection(
    "g_c",
    (0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1),
    (0.5, 0.75, -0.125, 0.0, -0.5, 0.125, -0.5, -0.25),
)

G_SS = PiecewiseBijection("g_ss", (0, 0.5, 1), (0.5, -0.5))

_REGISTRY: dict[str, PiecewiseBijection] = {}


def register(f: PiecewiseBijection) -> str:
    validate(f)
    existing = _REGISTRY.get(f.id)
    if existing is not None and existing != f:
        raise BijectionError(f"a different bijection is already registered as {f.id!r}")
    _REGISTRY[f.id] = f
    return f.id


def get(id: str) -> PiecewiseBijection:
    try:
        return _REGISTRY[id]
    except KeyError:
        raise BijectionError(f"no bijection registered as {id!r}") from None


def is_registered(id: str) -> bool:
    return id in _REGISTRY


BUILTINS = ("identity", "g_s", "g_c", "g_ss")

for _f in (IDENTITY, G_S, G_C, G_SS):
    register(_f)
