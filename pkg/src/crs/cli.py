"""Command-line front end.

Exit status: 0 success, 2 usage error, 3 file-format error, 4 key/data mismatch.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bitcodec, concealing, evaluation, imagepipe, keys, restoring

EXIT_OK, EXIT_USAGE, EXIT_FORMAT, EXIT_MISMATCH = 0, 2, 3, 4

FORMAT_ERRORS = (
    keys.KeyFormatError,
    concealing.DataFormatError,
    imagepipe.ImageFormatError,
    bitcodec.CodecError,
    UnicodeDecodeError,
)


class UsageError(Exception):
    pass


def _write(path: str | None, text: str | bytes):
    if path is None or path == "-":
        if isinstance(text, bytes):
            sys.stdout.buffer.write(text)
        else:
            sys.stdout.write(text)
        return
    Path(path).write_bytes(text if isinstance(text, bytes) else text.encode("utf-8"))


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _nonlinear_arg(value: str) -> str | None:
    return None if value == "none" else value


def _add_key_params(p: argparse.ArgumentParser, with_seed: bool = True):
    g = p.add_argument_group("key parameters (ignored when --key is given)")
    g.add_argument("--levels", type=int, default=2, help="number of Langevin levels N (default 2)")
    g.add_argument("--nonlinear", default="none", choices=["none", "g_s", "g_c", "g_ss"], help="secret bijection")
    g.add_argument("--a", type=float, default=0.1, help="drift parameter A (default 0.1)")
    g.add_argument("--b", type=float, default=1.0, help="key-stream gain b (default 1)")
    g.add_argument("--bu", type=float, default=1.0, help="concealed-data gain b_u (default 1)")
    g.add_argument("--sigma1", type=float, default=0.01, help="std of W1 (default 0.01)")
    g.add_argument("--sigma2", type=float, default=1.0, help="std of W2 (default 1)")
    g.add_argument("--sigma-v", type=float, default=1.0, help="std behind the key stream (default 1)")
    g.add_argument("--v-mode", choices=keys.V_MODES, default="bits", help="key stream as bits or raw normals")
    g.add_argument("--v-thd", type=float, default=0.5, help="ADE threshold (default 0.5)")
    g.add_argument("--v-llr", type=float, help="logic-low maximum (with --v-lhr: forbidden zone)")
    g.add_argument("--v-lhr", type=float, help="logic-high minimum")
    if with_seed:
        g.add_argument("--key-seed", type=int, default=0, help="seed for key material (default 0)")


def _logic(args) -> bitcodec.LogicLevels:
    if (args.v_llr is None) != (args.v_lhr is None):
        raise UsageError("--v-llr and --v-lhr go together")
    if args.v_llr is not None:
        return bitcodec.LogicLevels(args.v_llr, args.v_lhr)
    return bitcodec.LogicLevels.threshold(args.v_thd)


def _bundle_from_args(args) -> keys.KeyBundle:
    if getattr(args, "key", None):
        return keys.deserialize_keys(_read(args.key))
    try:
        return keys.keygen(
            args.levels, a=args.a, b=args.b, b_u=args.bu, sigma1=args.sigma1, sigma2=args.sigma2,
            sigma_v=args.sigma_v, nonlinear_id=_nonlinear_arg(args.nonlinear), logic=_logic(args),
            seed=getattr(args, "key_seed", getattr(args, "seed", 0)), v_mode=args.v_mode,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_keygen(args):
    _write(args.out, keys.serialize_keys(_bundle_from_args(args)))


def cmd_conceal(args):
    bundle = keys.deserialize_keys(_read(args.key))
    raw = _read(getattr(args, "in"))
    if args.format == "pgm":
        data = imagepipe.conceal_image(imagepipe.read_pgm(raw), bundle, args.trial_seed)
    else:
        word = bitcodec.as_bits(raw.decode("ascii").strip())
        pulse = bitcodec.dae(word)
        tape = keys.generate_noise_tape(bundle, pulse.size, args.trial_seed)
        data = concealing.conceal(pulse, bundle, tape)
    _write(args.out, concealing.write_data(data))


def _check_pair(data: concealing.ConcealedBundle, bundle: keys.KeyBundle):
    if data.n_levels != bundle.n_levels:
        raise restoring.KeyMismatchError(f"data has N={data.n_levels}, key has N={bundle.n_levels}")
    # a key without a bijection on nonlinear data is allowed: that is the attacker's view
    if bundle.nonlinear_id is not None and bundle.nonlinear_id != data.nonlinear_id:
        raise restoring.KeyMismatchError(f"data nonlinearity {data.nonlinear_id!r}, key has {bundle.nonlinear_id!r}")


def cmd_restore(args):
    bundle = keys.deserialize_keys(_read(args.key))
    data = concealing.read_data(_read(getattr(args, "in")).decode("utf-8"))
    _check_pair(data, bundle)
    result = restoring.restore(data, bundle)
    word = result.word[1:] if args.payload_only else result.word
    if args.out_signal:
        _write(args.out_signal, bitcodec.write_signal_csv(result.signal))
    if args.out_pgm:
        width, height = args.width, args.height
        if width is None or height is None:
            if data.image_shape is None:
                raise UsageError("--out-pgm needs --width/--height for data without image size")
            width, height = data.image_shape
        _write(args.out_pgm, imagepipe.write_pgm(imagepipe.word_to_image(result.word, width, height)))
    if args.out or not (args.out_signal or args.out_pgm):
        _write(args.out, bitcodec.bits_to_str(word) + "\n")


def cmd_image_conceal(args):
    args.format = "pgm"
    cmd_conceal(args)


def cmd_image_restore(args):
    bundle = keys.deserialize_keys(_read(args.key))
    data = concealing.read_data(_read(getattr(args, "in")).decode("utf-8"))
    _check_pair(data, bundle)
    try:
        img = imagepipe.restore_image(data, bundle, args.width, args.height)
    except imagepipe.ImageFormatError as exc:
        raise UsageError(str(exc)) from None
    _write(args.out, imagepipe.write_pgm(img))


def _scenario(args) -> evaluation.AttackScenario | None:
    kind = getattr(args, "attack", None)
    if kind is None:
        return None
    kind = kind.replace("-", "_")
    params = {}
    for flag, name in (("eve_b", "b"), ("eve_bu", "b_u"), ("sigma_eve", "sigma_eve"), ("sigma_ext", "sigma_ext")):
        if getattr(args, flag) is not None:
            params[name] = getattr(args, flag)
    try:
        return evaluation.AttackScenario(kind, params)
    except evaluation.ScenarioError as exc:
        raise UsageError(str(exc)) from None


def cmd_eval(args):
    bundle = _bundle_from_args(args)
    scenario = _scenario(args)
    fz = None
    if args.metric == "fz":
        if bundle.logic.is_threshold:
            raise UsageError("--metric fz needs --v-llr and --v-lhr")
        fz = bundle.logic
    report = evaluation.run_trials(bundle, args.trials, args.word_len, args.seed, scenario, fz)
    csv = {"bits": report.positions.to_csv, "signal": report.signal.to_csv}.get(args.metric)
    _write(args.out, csv() if csv else report.fz.to_csv())


def _grid(args) -> list[float]:
    if args.grid:
        try:
            return [float(v) for v in args.grid.split(",") if v.strip()]
        except ValueError:
            raise UsageError(f"bad --grid {args.grid!r}") from None
    if args.start is None or args.stop is None:
        raise UsageError("give --grid or --start/--stop/--num")
    return list(np.linspace(args.start, args.stop, args.num))


def cmd_sweep(args):
    bundle = _bundle_from_args(args)
    rows = evaluation.sweep(args.param, _grid(args), bundle, args.word_len, args.seed)
    _write(args.out, evaluation.sweep_csv(rows))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crs", description="Conceal and restore bit words with noise and Kalman filtering.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="write a crskeys v1 file")
    _add_key_params(p, with_seed=False)
    p.add_argument("--seed", dest="key_seed", type=int, default=0, help="seed for key material")
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("conceal", help="conceal a bit string or PGM into a crsdata v1 file")
    p.add_argument("--key", required=True, help="crskeys v1 file")
    p.add_argument("--in", required=True, help="input: ASCII bit string (a_0 first) or PGM")
    p.add_argument("--format", choices=["bits", "pgm"], default="bits")
    p.add_argument("--trial-seed", type=int, default=0, help="seed selecting the noise tape")
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_conceal)

    p = sub.add_parser("restore", help="restore a crsdata v1 file")
    p.add_argument("--key", required=True)
    p.add_argument("--in", required=True)
    p.add_argument("--out", help="restored bit string (default stdout)")
    p.add_argument("--payload-only", action="store_true", help="drop the ancilla bit")
    p.add_argument("--out-signal", help="restored signal as CSV")
    p.add_argument("--out-pgm", help="restored image as PGM")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.set_defaults(func=cmd_restore)

    p = sub.add_parser("image-conceal", help="conceal a P5 PGM image")
    p.add_argument("--key", required=True)
    p.add_argument("--in", required=True)
    p.add_argument("--trial-seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_image_conceal)

    p = sub.add_parser("image-restore", help="restore an image from a crsdata v1 file")
    p.add_argument("--key", required=True)
    p.add_argument("--in", required=True)
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--out", required=True, help="output PGM")
    p.set_defaults(func=cmd_image_restore)

    for name, helptext in (("eval", "per-position norms over many trials"), ("attack", "per-position norms under an attack")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--key", help="crskeys v1 file (otherwise built from the key parameters)")
        _add_key_params(p)
        p.add_argument("--trials", type=int, default=2000, help="number of trials T (default 2000)")
        p.add_argument("--word-len", type=int, default=1000, help="payload length K (default 1000)")
        p.add_argument("--seed", type=int, default=0, help="base seed for words, tapes and key streams")
        p.add_argument("--metric", choices=["bits", "signal", "fz"], default="bits")
        p.add_argument("--out", help="CSV path (default stdout)")
        p.add_argument(
            "--attack", required=name == "attack",
            choices=[k for kind in evaluation.ATTACK_KINDS for k in {kind, kind.replace("_", "-")}],
        )
        p.add_argument("--eve-b", type=float, help="attacker's b (wrong_b)")
        p.add_argument("--eve-bu", type=float, help="attacker's b_u (wrong_bu)")
        p.add_argument("--sigma-eve", type=float, help="std behind the guessed key stream (guessed_v)")
        p.add_argument("--sigma-ext", type=float, help="std of injected channel noise (external_noise)")
        p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="norms over a grid of one parameter")
    p.add_argument("--key", help="crskeys v1 file holding the fixed parameters")
    _add_key_params(p)
    p.add_argument("--param", required=True, choices=sorted(evaluation.SWEEP_PARAMS))
    p.add_argument("--grid", help="comma-separated values")
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--num", type=int, default=20)
    p.add_argument("--word-len", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except UsageError as exc:
        print(f"crs {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except restoring.KeyMismatchError as exc:
        print(f"crs {args.command}: key/data mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except FORMAT_ERRORS as exc:
        print(f"crs {args.command}: format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except ValueError as exc:  # out-of-range flag values
        print(f"crs {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
