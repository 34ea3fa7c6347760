"""Restoring side: cascaded scalar Kalman filters, from level N+1 down to 1.

Each level treats the Langevin recursion as the state equation and the
estimate from the level above as a noisy observation of the same sample.
Nonlinearized data are first mapped back through the inverse bijection, so
the filtering itself is always linear.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import nonlinear
from .bitcodec import LogicLevels, ade
from .concealing import ConcealedBundle
from .keys import KeyBundle, LevelKeys

# initial values for every level; X_hat_0 = 0 is also forced on the output
X0 = 0.0
P0 = 1.0


class KeyMismatchError(ValueError):
    pass


@dataclass
class KalmanState:
    x_prior: np.ndarray | float
    p_prior: float
    gain: float
    x_post: np.ndarray | float
    p_post: float


@dataclass
class Restoration:
    signal: np.ndarray  # X_hat_0..X_hat_n, possibly batched
    word: np.ndarray


def kalman_predict(prev: KalmanState, u_prev, v_prev, keys: LevelKeys):
    x_prior = keys.a * prev.x_post + keys.b_u * (u_prev - keys.w1.mean) + keys.b * v_prev
    p_prior = keys.a**2 * prev.p_post + keys.w1.std_dev**2 * keys.b_u**2
    return x_prior, p_prior


def kalman_update(x_prior, p_prior: float, observation, keys: LevelKeys) -> KalmanState:
    denom = p_prior + keys.w2.std_dev**2
    gain = p_prior / denom if denom > 0 else 0.0
    x_post = x_prior + gain * (observation - keys.w2.mean - x_prior)
    return KalmanState(x_prior, p_prior, gain, x_post, (1.0 - gain) * p_prior)


def filter_level(u, observation, v, keys: LevelKeys, p0: float = P0):
    """Run one level over k = 1..n.

    Returns the posterior estimates (shape of ``u``) and the list of
    KalmanStates with scalar gains/variances (state values dropped for k > 0
    to keep memory flat).
    """
    u = np.asarray(u, dtype=float)
    n = u.shape[-1]
    x_hat = np.empty_like(u)
    x_hat[..., 0] = X0
    state = KalmanState(X0, p0, 0.0, np.full(u.shape[:-1], X0), p0)
    trace = [state]
    for k in range(1, n):
        x_prior, p_prior = kalman_predict(state, u[..., k - 1], v[..., k - 1], keys)
        state = kalman_update(x_prior, p_prior, observation[..., k], keys)
        x_hat[..., k] = state.x_post
        trace.append(KalmanState(None, state.p_prior, state.gain, None, state.p_post))
    return x_hat, trace


def undo_nonlinearity(data: ConcealedBundle, keys: KeyBundle) -> np.ndarray:
    """Concealed samples with the secret bijection removed, if the key has one."""
    if keys.nonlinear_id is None:
        return data.u
    g_inv = nonlinear.inverse(nonlinear.get(keys.nonlinear_id))
    return nonlinear.apply_extended(g_inv, data.u)


def restore(data: ConcealedBundle, keys: KeyBundle, key_stream=None) -> Restoration:
    """Restore the binary pulse and its bit word (ancilla included).

    A key without ``nonlinear_id`` applied to nonlinearized data is not an
    error: the linear filter simply runs on the wrong samples.
    """
    if data.n_levels != keys.n_levels:
        raise KeyMismatchError(f"data has N={data.n_levels} but the key has N={keys.n_levels}")
    u = undo_nonlinearity(data, keys)
    n = data.length
    v = keys.key_streams(n) if key_stream is None else np.asarray(key_stream, dtype=float)

    x_hat = u[-1]
    for i in reversed(range(keys.n_levels)):
        x_hat, _ = filter_level(u[i], x_hat, v[i], keys.levels[i])
    x_hat[..., 0] = 0.0
    return Restoration(x_hat, ade(x_hat, decision_levels(keys.logic)))


def decision_levels(logic: LogicLevels) -> LogicLevels:
    """Threshold used for the restored word; the forbidden-zone midpoint if there is one."""
    if logic.is_threshold:
        return logic
    return LogicLevels.threshold((logic.v_llr + logic.v_lhr) / 2)
