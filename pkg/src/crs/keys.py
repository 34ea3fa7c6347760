"""Secret common keys, seeded noise streams, and the ``crskeys v1`` file format.

Random streams
--------------
Every stream comes from numpy's PCG64 bit generator seeded through
``numpy.random.SeedSequence(entropy=seed, spawn_key=(tag, level, ...))``;
normal variates use ``Generator.standard_normal`` (ziggurat).  The tags are::

    1  W^{1,i} key noise            2  W^{2,i} observation noise
    3  v^i key stream               4  random payload words
    5  attacker-guessed key stream  6  external channel noise

so equal seeds with different ``(tag, level)`` never share a stream.

Key file
--------
UTF-8 text.  The first line is ``crskeys v1``; the rest are ``key = value``
lines (blank lines and ``#`` comments are ignored)::

    crskeys v1
    n_levels = 2
    nonlinear_id = g_c            # or none
    v_thd = 0.5                   # or: v_llr = ... / v_lhr = ...
    v_seed = 7
    v_mode = bits                 # optional, bits (default) or real
    master_seed = 12345
    level.1.a = 0.10000000000000001
    level.1.b = 1
    level.1.b_u = 1
    level.1.m1 = 0
    level.1.s1 = 0.01
    level.1.m2 = 0
    level.1.s2 = 1
    level.1.s_v = 1               # optional, default 1
    ...                           # one block per level
    nl_piece = 0 0.5 0.5          # only for a custom nonlinear_id

Reals are written with 17 significant digits so they read back bit-exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import nonlinear
from .bitcodec import LogicLevels

W1, W2, KEY_STREAM, WORDS, EVE_STREAM, EXTERNAL = 1, 2, 3, 4, 5, 6

_MASK64 = (1 << 64) - 1
HEADER = "crskeys v1"
V_MODES = ("bits", "real")


class KeyFormatError(ValueError):
    pass


def rng_for(seed: int, *path: int) -> np.random.Generator:
    """Generator for the stream addressed by ``seed`` and a tuple of ints."""
    ss = np.random.SeedSequence(entropy=int(seed) & _MASK64, spawn_key=tuple(int(p) & _MASK64 for p in path))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class NoiseSpec:
    mean: float = 0.0
    std_dev: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.mean) and math.isfinite(self.std_dev)):
            raise ValueError("noise parameters must be finite")
        if self.std_dev < 0:
            raise ValueError("std_dev must be nonnegative")

    def draw(self, rng: np.random.Generator, size) -> np.ndarray:
        return self.mean + self.std_dev * rng.standard_normal(size)


@dataclass(frozen=True)
class LevelKeys:
    a: float = 0.1
    b: float = 1.0
    b_u: float = 1.0
    w1: NoiseSpec = NoiseSpec(0.0, 0.01)
    w2: NoiseSpec = NoiseSpec(0.0, 1.0)
    sigma_v: float = 1.0

    def __post_init__(self):
        if self.b == 0 or self.b_u == 0:
            raise ValueError("b and b_u must be nonzero")
        for name in ("a", "b", "b_u", "sigma_v"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.sigma_v < 0:
            raise ValueError("sigma_v must be nonnegative")


@dataclass(frozen=True)
class KeyBundle:
    levels: tuple[LevelKeys, ...]
    nonlinear_id: str | None = None
    logic: LogicLevels = LogicLevels()
    master_seed: int = 0
    v_seed: int = 0
    v_mode: str = "bits"
    custom_pieces: tuple | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        if not self.levels:
            raise ValueError("a key bundle needs at least one level")
        if self.v_mode not in V_MODES:
            raise ValueError(f"v_mode must be one of {V_MODES}")
        if self.nonlinear_id is not None and not nonlinear.is_registered(self.nonlinear_id):
            raise ValueError(f"nonlinear_id {self.nonlinear_id!r} is not registered")

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    @property
    def bijection(self) -> nonlinear.PiecewiseBijection | None:
        return None if self.nonlinear_id is None else nonlinear.get(self.nonlinear_id)

    def with_level_params(self, **changes) -> "KeyBundle":
        """Copy with the same parameter change applied at every level."""
        return replace(self, levels=tuple(replace(lv, **changes) for lv in self.levels))

    def key_streams(self, length: int, trial: int | None = None) -> np.ndarray:
        """v^i_k for every level, shape ``(N, length)``.

        ``trial`` selects an independent per-trial key, used by the
        statistics harness.
        """
        out = np.empty((self.n_levels, length))
        for i, lv in enumerate(self.levels, start=1):
            path = (KEY_STREAM, i) if trial is None else (KEY_STREAM, i, trial)
            draws = NoiseSpec(0.0, lv.sigma_v).draw(rng_for(self.v_seed, *path), length)
            out[i - 1] = draws if self.v_mode == "real" else draws >= 0.5
        return out


def generate_key_stream(spec: NoiseSpec, length: int, seed: int, threshold: float = 0.5) -> np.ndarray:
    """Bits obtained by thresholding ``length`` seeded N(mean, std^2) draws."""
    if length < 1:
        raise ValueError("length must be >= 1")
    if not math.isfinite(threshold):
        raise ValueError("threshold must be finite")
    draws = spec.draw(rng_for(seed, KEY_STREAM), length)
    return (draws >= threshold).astype(np.uint8)


@dataclass(frozen=True)
class NoiseTape:
    w1: np.ndarray  # (N, ..., n+1)
    w2: np.ndarray

    @property
    def length(self) -> int:
        return self.w1.shape[-1]


def generate_noise_tape(bundle: KeyBundle, length: int, trial_seed: int) -> NoiseTape:
    if length < 1:
        raise ValueError("length must be >= 1")
    w1 = np.empty((bundle.n_levels, length))
    w2 = np.empty((bundle.n_levels, length))
    for i, lv in enumerate(bundle.levels, start=1):
        w1[i - 1] = lv.w1.draw(rng_for(bundle.master_seed, W1, i, trial_seed), length)
        w2[i - 1] = lv.w2.draw(rng_for(bundle.master_seed, W2, i, trial_seed), length)
    return NoiseTape(w1, w2)


def keygen(
    n_levels: int = 2,
    *,
    a: float = 0.1,
    b: float = 1.0,
    b_u: float = 1.0,
    sigma1: float = 0.01,
    sigma2: float = 1.0,
    sigma_v: float = 1.0,
    nonlinear_id: str | None = None,
    logic: LogicLevels = LogicLevels(),
    seed: int = 0,
    v_mode: str = "bits",
) -> KeyBundle:
    """Key bundle with identical parameters at every level.

    The defaults are the recommended operating point: A = 0.1, b = b_u = 1,
    sigma_1 = 0.01, sigma_2 = sigma_v = 1, V_thd = 0.5.  Master and key-stream
    seeds are both derived from ``seed``.
    """
    if n_levels < 1:
        raise ValueError("n_levels must be >= 1")
    if b == 0 or b_u == 0:
        raise ValueError("b and b_u must be nonzero")
    ss = np.random.SeedSequence(int(seed) & _MASK64)
    master, vseed = (int(s) for s in ss.generate_state(2, dtype=np.uint64))
    level = LevelKeys(a, b, b_u, NoiseSpec(0.0, sigma1), NoiseSpec(0.0, sigma2), sigma_v)
    return KeyBundle((level,) * n_levels, nonlinear_id, logic, master, vseed, v_mode)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def serialize_keys(bundle: KeyBundle) -> bytes:
    lines = [HEADER, f"n_levels = {bundle.n_levels}", f"nonlinear_id = {bundle.nonlinear_id or 'none'}"]
    if bundle.logic.is_threshold:
        lines.append(f"v_thd = {_fmt(bundle.logic.v_thd)}")
    else:
        lines += [f"v_llr = {_fmt(bundle.logic.v_llr)}", f"v_lhr = {_fmt(bundle.logic.v_lhr)}"]
    lines += [f"v_seed = {bundle.v_seed}", f"v_mode = {bundle.v_mode}", f"master_seed = {bundle.master_seed}"]
    for i, lv in enumerate(bundle.levels, start=1):
        for name, value in (
            ("a", lv.a), ("b", lv.b), ("b_u", lv.b_u),
            ("m1", lv.w1.mean), ("s1", lv.w1.std_dev),
            ("m2", lv.w2.mean), ("s2", lv.w2.std_dev), ("s_v", lv.sigma_v),
        ):
            lines.append(f"level.{i}.{name} = {_fmt(value)}")
    if bundle.nonlinear_id is not None and bundle.nonlinear_id not in nonlinear.BUILTINS:
        for lo, hi, c in bundle.bijection.pieces:
            lines.append(f"nl_piece = {_fmt(lo)} {_fmt(hi)} {_fmt(c)}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _parse_lines(text: str) -> tuple[dict[str, str], list[str]]:
    fields: dict[str, str] = {}
    pieces: list[str] = []
    for lineno, raw in enumerate(text.splitlines()[1:], start=2):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep or not key:
            raise KeyFormatError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if key == "nl_piece":
            pieces.append(value)
        elif key in fields:
            raise KeyFormatError(f"line {lineno}: duplicate field {key!r}")
        else:
            fields[key] = value
    return fields, pieces


def deserialize_keys(data: bytes | str) -> KeyBundle:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    first = text.split("\n", 1)[0].strip()
    if first != HEADER:
        raise KeyFormatError(f"expected header {HEADER!r}, got {first!r}")
    fields, piece_lines = _parse_lines(text)

    def need(key: str) -> str:
        if key not in fields:
            raise KeyFormatError(f"missing field {key!r}")
        return fields[key]

    def real(key: str, default: float | None = None) -> float:
        if default is not None and key not in fields:
            return default
        text = need(key)
        try:
            value = float(text)
        except ValueError:
            raise KeyFormatError(f"field {key!r}: malformed real {text!r}") from None
        if not math.isfinite(value):
            raise KeyFormatError(f"field {key!r} must be finite")
        return value

    def integer(key: str) -> int:
        text = need(key)
        try:
            return int(text)
        except ValueError:
            raise KeyFormatError(f"field {key!r}: malformed integer {text!r}") from None

    n = integer("n_levels")
    if n < 1:
        raise KeyFormatError("n_levels must be >= 1")
    levels = []
    for i in range(1, n + 1):
        p = f"level.{i}."
        if real(p + "b_u") == 0 or real(p + "b") == 0:
            raise KeyFormatError(f"level {i}: b and b_u must be nonzero")
        try:
            levels.append(
                LevelKeys(
                    real(p + "a"), real(p + "b"), real(p + "b_u"),
                    NoiseSpec(real(p + "m1"), real(p + "s1")),
                    NoiseSpec(real(p + "m2"), real(p + "s2")),
                    real(p + "s_v", 1.0),
                )
            )
        except ValueError as exc:
            raise KeyFormatError(f"level {i}: {exc}") from None

    if "v_thd" in fields:
        logic = LogicLevels.threshold(real("v_thd"))
    else:
        try:
            logic = LogicLevels(real("v_llr"), real("v_lhr"))
        except ValueError as exc:
            raise KeyFormatError(str(exc)) from None

    nl_id = need("nonlinear_id")
    nl_id = None if nl_id == "none" else nl_id
    custom = None
    if piece_lines:
        if nl_id is None or nl_id in nonlinear.BUILTINS:
            raise KeyFormatError("nl_piece lines need a custom nonlinear_id")
        try:
            rows = [tuple(float(t) for t in line.split()) for line in piece_lines]
            if any(len(r) != 3 for r in rows):
                raise ValueError("each nl_piece needs 'lo hi offset'")
            rows.sort()
            f = nonlinear.PiecewiseBijection(nl_id, [r[0] for r in rows] + [rows[-1][1]], [r[2] for r in rows])
            if any(r[1] != nxt[0] for r, nxt in zip(rows, rows[1:])):
                raise ValueError("nl_piece intervals must be contiguous")
            nonlinear.register(f)
        except ValueError as exc:
            raise KeyFormatError(f"nl_piece: {exc}") from None
        custom = tuple(rows)
    elif nl_id is not None and not nonlinear.is_registered(nl_id):
        raise KeyFormatError(f"unknown nonlinear_id {nl_id!r}")

    v_mode = fields.get("v_mode", "bits")
    if v_mode not in V_MODES:
        raise KeyFormatError(f"v_mode must be one of {V_MODES}")
    return KeyBundle(tuple(levels), nl_id, logic, integer("master_seed"), integer("v_seed"), v_mode, custom)
