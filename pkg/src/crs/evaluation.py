"""Monte-Carlo statistics: bit-flip norms, attacks, sweeps, noise margins.

Trials are run in vectorized batches.  Every random draw is addressed by
``(seed, stream tag, level, trial)`` so results do not depend on batch size,
and per-position accumulators are integer counts merged by addition/max.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field, replace

import numpy as np

from .bitcodec import LogicLevels, random_word
from .concealing import ConcealedBundle, conceal
from .keys import EVE_STREAM, EXTERNAL, WORDS, KeyBundle, NoiseTape, generate_noise_tape, rng_for
from .restoring import restore

ATTACK_KINDS = ("wrong_b", "wrong_bu", "guessed_v", "no_nonlinearity", "external_noise")
_ATTACK_PARAMS = {
    "wrong_b": "b",
    "wrong_bu": "b_u",
    "guessed_v": "sigma_eve",
    "no_nonlinearity": None,
    "external_noise": "sigma_ext",
}


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class WordNorms:
    max_norm: int
    mean_norm: float


@dataclass
class PositionNorms:
    max: np.ndarray  # per k = 1..K
    mean: np.ndarray
    trials: int

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("k,max_norm,mean_norm\n")
        for k, (mx, mn) in enumerate(zip(self.max, self.mean), start=1):
            out.write(f"{k},{mx:g},{mn:.17g}\n")
        return out.getvalue()


@dataclass
class SignalNorm:
    max: np.ndarray  # per k = 1..K, max over trials of |X_k - X_hat_k|

    def to_csv(self) -> str:
        return "k,max_norm\n" + "".join(f"{k},{v:.17g}\n" for k, v in enumerate(self.max, start=1))


@dataclass(frozen=True)
class AttackScenario:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ATTACK_KINDS:
            raise ScenarioError(f"unknown attack kind {self.kind!r}")
        need = _ATTACK_PARAMS[self.kind]
        if need is not None:
            if need not in self.params:
                raise ScenarioError(f"{self.kind} needs parameter {need!r}")
            value = float(self.params[need])
            if not np.isfinite(value):
                raise ScenarioError(f"{need} must be finite")
            if need in ("b", "b_u") and value == 0:
                raise ScenarioError(f"{need} must be nonzero")
            if need.startswith("sigma") and value < 0:
                raise ScenarioError(f"{need} must be nonnegative")

    @property
    def value(self) -> float | None:
        need = _ATTACK_PARAMS[self.kind]
        return None if need is None else float(self.params[need])


def word_norms(original, restored) -> WordNorms:
    a = np.asarray(original, dtype=np.int64)
    r = np.asarray(restored, dtype=np.int64)
    if a.shape != r.shape or a.ndim != 1 or a.size < 1:
        raise ValueError("word_norms needs two payloads of equal length K >= 1")
    diff = np.abs(a - r)
    return WordNorms(int(diff.max()), float(diff.mean()))


def _flip_table(original, trials) -> np.ndarray:
    r = np.asarray(trials, dtype=float)
    if r.ndim != 2:
        raise ValueError("trials must be a (T, K) array of equal-length words")
    a = np.broadcast_to(np.asarray(original, dtype=float), r.shape) if np.ndim(original) < 2 else np.asarray(original, dtype=float)
    if a.shape != r.shape:
        raise ValueError("original and trial words have different lengths")
    return np.abs(a - r)


def position_norms(original, trials) -> PositionNorms:
    """Per-position max and mean of |a_k - a_hat_k(tau)| over T trials.

    ``original`` is one payload shared by all trials, or one per trial.
    """
    d = _flip_table(original, trials)
    return PositionNorms(d.max(axis=0), d.mean(axis=0), d.shape[0])


def signal_max_norm(original, trials) -> SignalNorm:
    d = _flip_table(original, trials)
    return SignalNorm(d.max(axis=0))


def trilevel_values(signals, levels: LogicLevels) -> np.ndarray:
    """Restored bits with 0.5 standing for a sample in the forbidden zone."""
    if not 0.0 < levels.v_llr < levels.v_lhr < 1.0:
        raise ValueError("forbidden-zone statistics need 0 < v_llr < v_lhr < 1")
    x = np.asarray(signals, dtype=float)
    return np.where(x >= levels.v_lhr, 1.0, np.where(x <= levels.v_llr, 0.0, 0.5))


def fz_occupancy(original, signals, levels: LogicLevels) -> PositionNorms:
    """Position norms with the three-valued restored bit.

    Where ``max == 0.5`` no trial flipped, and ``2 * mean`` is the fraction of
    trials that landed in the forbidden zone.
    """
    return position_norms(original, trilevel_values(signals, levels))


def attack_transform(scenario: AttackScenario | None, data: ConcealedBundle, honest: KeyBundle, seed: int = 0, trial=0):
    """Return ``(data', key_view)`` for a restoration attempt under attack.

    ``trial`` may be an array of trial ids matching the data's batch axis;
    external noise is drawn per trial.
    """
    if scenario is None:
        return data, honest
    kind = scenario.kind
    if kind == "wrong_b":
        return data, honest.with_level_params(b=scenario.value)
    if kind == "wrong_bu":
        return data, honest.with_level_params(b_u=scenario.value)
    if kind == "guessed_v":
        eve_seed = int(rng_for(seed, EVE_STREAM).integers(2**63))
        return data, replace(honest.with_level_params(sigma_v=scenario.value), v_seed=eve_seed)
    if kind == "no_nonlinearity":
        return data, replace(honest, nonlinear_id=None)
    # external_noise
    sigma = scenario.value
    u = data.u.copy()
    trials = np.atleast_1d(trial)
    batch = u.ndim == 3
    for j, t in enumerate(trials):
        rng = rng_for(seed, EXTERNAL, int(t))
        if batch:
            u[:, j] += sigma * rng.standard_normal(u[:, j].shape)
        else:
            u += sigma * rng.standard_normal(u.shape)
    return ConcealedBundle(u, data.nonlinear_id, data.image_shape), honest


def trial_seed(base_seed: int, trial: int) -> int:
    return int(np.random.SeedSequence(int(base_seed) & (2**64 - 1), spawn_key=(trial,)).generate_state(1, np.uint64)[0])


@dataclass
class TrialReport:
    positions: PositionNorms
    signal: SignalNorm
    fz: PositionNorms | None = None
    trials: int = 0
    word_len: int = 0
    words_restored: int = 0  # trials whose whole payload came back intact

    def to_csv(self) -> str:
        return self.positions.to_csv()


def _stream_id(keys: KeyBundle):
    return keys.v_seed, keys.v_mode, tuple(lv.sigma_v for lv in keys.levels)


def _batch(bundle, attack, base_seed, trials, word_len):
    """Conceal, attack and restore a block of trial ids; returns payloads and signals."""
    n = word_len + 1
    seeds = [trial_seed(base_seed, t) for t in trials]
    words = np.stack([random_word(rng_for(base_seed, WORDS, t), word_len) for t in trials])
    tapes = [generate_noise_tape(bundle, n, s) for s in seeds]
    tape = NoiseTape(np.stack([tp.w1 for tp in tapes], axis=1), np.stack([tp.w2 for tp in tapes], axis=1))
    v = np.stack([bundle.key_streams(n, trial=s) for s in seeds], axis=1)
    data = conceal(words.astype(float), bundle, tape, v)
    data, view = attack_transform(attack, data, bundle, base_seed, trials)
    if _stream_id(view) != _stream_id(bundle):
        v = np.stack([view.key_streams(n, trial=s) for s in seeds], axis=1)
    rest = restore(data, view, v)
    return words[:, 1:], rest.word[:, 1:], rest.signal[:, 1:]


def run_trials(
    bundle: KeyBundle,
    trials: int,
    word_len: int,
    base_seed: int = 0,
    attack: AttackScenario | None = None,
    fz_levels: LogicLevels | None = None,
    batch_size: int = 500,
) -> TrialReport:
    """T independent conceal/restore trials on fresh random words.

    Each trial draws its own payload, noise tape and key stream from seeds
    derived from ``(base_seed, trial)``, so any batch size gives identical
    results.
    """
    if trials < 1 or word_len < 1:
        raise ValueError("trials and word_len must be >= 1")
    flips = np.zeros(word_len, dtype=np.int64)
    flip_max = np.zeros(word_len)
    dev_max = np.zeros(word_len)
    fz_half = np.zeros(word_len, dtype=np.int64)
    fz_max = np.zeros(word_len)
    intact = 0
    for start in range(0, trials, batch_size):
        ids = list(range(start, min(trials, start + batch_size)))
        payload, restored, signal = _batch(bundle, attack, base_seed, ids, word_len)
        d = payload != restored
        flips += d.sum(axis=0)
        flip_max = np.maximum(flip_max, d.max(axis=0))
        intact += int((~d.any(axis=1)).sum())
        dev_max = np.maximum(dev_max, np.abs(payload - signal).max(axis=0))
        if fz_levels is not None:
            tri = np.abs(payload - trilevel_values(signal, fz_levels))
            fz_half += np.rint(2 * tri).astype(np.int64).sum(axis=0)
            fz_max = np.maximum(fz_max, tri.max(axis=0))
    positions = PositionNorms(flip_max, flips / trials, trials)
    fz = PositionNorms(fz_max, fz_half / (2 * trials), trials) if fz_levels is not None else None
    return TrialReport(positions, SignalNorm(dev_max), fz, trials, word_len, intact)


SWEEP_PARAMS = {"A": "a", "b": "b", "b_u": "b_u"}


@dataclass
class SweepRow:
    value: float
    max_norm: float
    mean_norm: float
    status: str = "ok"


def sweep(parameter: str, grid, fixed: KeyBundle, word_len: int, seed: int = 0) -> list[SweepRow]:
    """One conceal/restore per grid value, each on a fresh random word."""
    if parameter not in SWEEP_PARAMS:
        raise ValueError(f"parameter must be one of {sorted(SWEEP_PARAMS)}")
    grid = list(grid)
    if not grid:
        raise ValueError("empty grid")
    rows = []
    for j, value in enumerate(grid):
        try:
            bundle = fixed.with_level_params(**{SWEEP_PARAMS[parameter]: float(value)})
        except ValueError as exc:
            rows.append(SweepRow(float(value), float("nan"), float("nan"), f"error: {exc}"))
            continue
        report = run_trials(bundle, 1, word_len, trial_seed(seed, j))
        rows.append(SweepRow(float(value), float(report.positions.max.max()), float(report.positions.mean.mean())))
    return rows


def sweep_csv(rows: list[SweepRow]) -> str:
    out = ["param_value,max_norm,mean_norm,status"]
    for r in rows:
        out.append(f"{r.value:.17g},{r.max_norm:g},{r.mean_norm:.17g},{r.status}")
    return "\n".join(out) + "\n"
