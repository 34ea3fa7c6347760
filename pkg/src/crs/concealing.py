"""Concealing side: a cascade of discretized Langevin equations.

For levels i = 1..N, with X^1 the binary pulse,

    U^i_k     = (X^i_{k+1} - A^i X^i_k - b^i v^i_k) / b_u^i + W^{1,i}_k
    X^{i+1}_k = X^i_k + W^{2,i}_k

and U^{N+1} = X^{N+1}.  At k = n the missing X^i_{n+1} is taken to be X^i_n.

Arrays may carry leading batch axes: a pulse of shape ``(T, n+1)`` with a
tape of shape ``(N, T, n+1)`` conceals T words at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import nonlinear
from .keys import KeyBundle, NoiseTape


class ConcealError(ValueError):
    pass


class DataFormatError(ValueError):
    pass


DATA_HEADER = "crsdata"


@dataclass
class ConcealedBundle:
    u: np.ndarray  # (N+1, ..., n+1)
    nonlinear_id: str | None = None
    image_shape: tuple[int, int] | None = None  # (width, height) for the image demo

    @property
    def n_levels(self) -> int:
        return self.u.shape[0] - 1

    @property
    def nonlinearized(self) -> bool:
        return self.nonlinear_id is not None

    @property
    def length(self) -> int:
        return self.u.shape[-1]


def _check_inputs(pulse: np.ndarray, bundle: KeyBundle, tape: NoiseTape, key_stream):
    if pulse.shape[-1] < 2:
        raise ConcealError("pulse needs at least two samples")
    if tape.w1.shape[0] != bundle.n_levels or tape.w2.shape[0] != bundle.n_levels:
        raise ConcealError("noise tape level count does not match the key bundle")
    if tape.length != pulse.shape[-1]:
        raise ConcealError(f"tape length {tape.length} != pulse length {pulse.shape[-1]}")
    if key_stream.shape[0] != bundle.n_levels or key_stream.shape[-1] != pulse.shape[-1]:
        raise ConcealError("key stream shape does not match the pulse")


def conceal_linear(pulse, bundle: KeyBundle, tape: NoiseTape, key_stream=None) -> ConcealedBundle:
    """Linear concealment of a binary pulse.

    ``key_stream`` overrides ``bundle.key_streams``; it must have shape
    ``(N, ..., n+1)`` broadcastable against the pulse.
    """
    x = np.asarray(pulse, dtype=float)
    if key_stream is None:
        key_stream = bundle.key_streams(x.shape[-1])
    v = np.asarray(key_stream, dtype=float)
    _check_inputs(x, bundle, tape, v)

    u = np.empty((bundle.n_levels + 1, *x.shape))
    for i, lv in enumerate(bundle.levels):
        x_next = np.concatenate([x[..., 1:], x[..., -1:]], axis=-1)
        u[i] = (x_next - lv.a * x - lv.b * v[i]) / lv.b_u + tape.w1[i]
        x = x + tape.w2[i]
    u[-1] = x
    if not np.isfinite(u).all():
        raise ConcealError("concealment produced non-finite values")
    return ConcealedBundle(u)


def conceal_nonlinear(pulse, bundle: KeyBundle, tape: NoiseTape, key_stream=None) -> ConcealedBundle:
    """Linear concealment followed by the secret bijection on every output.

    On levels 1..N this nonlinearizes the concealed data directly; on level
    N+1 it is the final map X^{N+1} -> U^{N+1}, so both cases reduce to one
    sample-wise application.
    """
    if bundle.nonlinear_id is None:
        raise ConcealError("key bundle has no nonlinear_id")
    g = nonlinear.get(bundle.nonlinear_id)
    out = conceal_linear(pulse, bundle, tape, key_stream)
    out.u = nonlinear.apply_extended(g, out.u)
    out.nonlinear_id = bundle.nonlinear_id
    return out


def conceal(pulse, bundle: KeyBundle, tape: NoiseTape, key_stream=None) -> ConcealedBundle:
    if bundle.nonlinear_id is None:
        return conceal_linear(pulse, bundle, tape, key_stream)
    return conceal_nonlinear(pulse, bundle, tape, key_stream)


def write_data(data: ConcealedBundle) -> str:
    if data.u.ndim != 2:
        raise DataFormatError("only single-message bundles can be written")
    header = f"{DATA_HEADER} v1 N={data.n_levels} nl={data.nonlinear_id or 'none'} len={data.length}"
    if data.image_shape is not None:
        header += " img={}x{}".format(*data.image_shape)
    blocks = ["\n".join(f"{s:.17g}" for s in row) for row in data.u]
    return header + "\n" + "\n\n".join(blocks) + "\n"


def read_data(text: str) -> ConcealedBundle:
    lines = text.splitlines()
    if not lines:
        raise DataFormatError("empty data file")
    tokens = lines[0].split()
    if tokens[:2] != [DATA_HEADER, "v1"]:
        raise DataFormatError(f"expected '{DATA_HEADER} v1' header, got {lines[0]!r}")
    meta = dict(t.partition("=")[::2] for t in tokens[2:])
    try:
        n_levels, length = int(meta["N"]), int(meta["len"])
        nl_id = meta["nl"]
    except (KeyError, ValueError) as exc:
        raise DataFormatError(f"bad header field: {exc}") from None
    image_shape = None
    if "img" in meta:
        try:
            w, h = (int(p) for p in meta["img"].split("x"))
        except ValueError:
            raise DataFormatError(f"bad img field {meta['img']!r}") from None
        image_shape = (w, h)

    blocks: list[list[str]] = [[]]
    for line in lines[1:]:
        if line.strip():
            blocks[-1].append(line.strip())
        elif blocks[-1]:
            blocks.append([])
    blocks = [b for b in blocks if b]
    if len(blocks) != n_levels + 1:
        raise DataFormatError(f"header says N={n_levels} but found {len(blocks)} blocks")
    try:
        u = np.array([[float(s) for s in b] for b in blocks])
    except ValueError:
        lens = {len(b) for b in blocks}
        if len(lens) != 1:
            raise DataFormatError("blocks have unequal lengths") from None
        raise DataFormatError("malformed sample value") from None
    if u.shape[1] != length:
        raise DataFormatError(f"header says len={length} but blocks have {u.shape[1]} samples")
    if not np.isfinite(u).all():
        raise DataFormatError("non-finite sample")
    return ConcealedBundle(u, None if nl_id == "none" else nl_id, image_shape)
