"""Command-line front end.

Exit codes: 0 ok, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cs import RESULT_COLUMNS, CsExperimentConfig, run_cs_experiment
from .errors import LengthMismatch, MrwtlError, OddTapCount
from .io import (
    load_model,
    read_pyramid_csv,
    read_signal,
    save_model,
    write_pyramid_csv,
    write_signal_csv,
    write_table_csv,
)
from .lazy import rational_lazy
from .lifting import learn_mrwtl
from .multirate import RationalRate
from .polyphase import RationalFilterBank, certify
from .transform import (
    STANDARD_BANKS,
    CoeffPyramid,
    analyze_multilevel,
    frequency_response,
    standard_bank,
    synthesize_multilevel,
)

log = logging.getLogger("mrwtl")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


class InputError(Exception):
    pass


def _rate(text: str) -> RationalRate:
    try:
        return RationalRate.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _existing(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"no such file: {path}")
    return p


def _load_signal(path: str):
    try:
        return read_signal(_existing(path))
    except (ValueError, OSError, EOFError) as exc:
        raise InputError(f"cannot read signal {path}: {exc}") from exc


def _load_bank(name: str) -> tuple[RationalFilterBank, object]:
    """A model JSON path, ``lazy:q1/M``, or a standard bank name."""
    if name in STANDARD_BANKS:
        return standard_bank(name), None
    if name.startswith("lazy:"):
        try:
            return rational_lazy(RationalRate.parse(name[5:])), None
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    try:
        bank, cert, _ = load_model(_existing(name))
    except (ValueError, OSError) as exc:
        raise InputError(str(exc)) from exc
    return bank, cert


def _nmse(x: np.ndarray, y: np.ndarray) -> float:
    den = float(x @ x)
    return float((x - y) @ (x - y)) / den if den else float((y @ y) > 0)


def cmd_learn(args) -> int:
    x = _load_signal(args.signal)
    model = learn_mrwtl(x, args.rate, args.np, args.ns)
    save_model(args.out, model)
    cert = model.certificate
    print(f"rate {args.rate} (q1={args.rate.q1}, q2={args.rate.q2}, M={args.rate.m}), N={len(x)}")
    print("t = [" + ", ".join(f"{v:.10g}" for v in model.predict.t) + "]")
    print("s = [" + ", ".join(f"{v:.10g}" for v in model.update.s) + "]")
    print(f"certificate: c={cert.c:.12g} n0={cert.n0} residual_nmse={cert.residual_nmse:.3e}")
    print(f"model written to {args.out}")
    return EXIT_OK if cert.valid else EXIT_NUMERIC


def cmd_transform(args) -> int:
    x = _load_signal(args.signal)
    bank, cert = _load_bank(args.model)
    pyr = analyze_multilevel(x, bank, args.levels)
    if args.format == "json":
        Path(args.out).write_text(json.dumps({
            "rate": bank.rate.to_dict(),
            "lengths": pyr.lengths,
            "details": [d.tolist() for d in pyr.details],
            "approx": pyr.approx.tolist(),
        }))
    else:
        write_pyramid_csv(args.out, pyr)
    back = synthesize_multilevel(pyr, bank, cert if cert is not None else None).samples
    lengths = " -> ".join(str(n) for n in pyr.lengths + [pyr.approx.size])
    print(f"levels {args.levels}, input lengths {lengths}")
    print(f"coefficients {pyr.count()} (padded inputs {pyr.padded_lengths()})")
    print(f"round-trip nmse {_nmse(x.samples, back):.3e}")
    return EXIT_OK


def _read_pyramid(path: Path) -> CoeffPyramid:
    if path.suffix.lower() == ".json":
        raw = json.loads(path.read_text())
        r = raw["rate"]
        return CoeffPyramid(
            RationalRate(r["q1"], r["q2"], r["m"]),
            [np.array(d) for d in raw["details"]],
            np.array(raw["approx"]),
            list(raw["lengths"]),
        )
    return read_pyramid_csv(path)


def cmd_inverse(args) -> int:
    try:
        pyr = _read_pyramid(_existing(args.coeffs))
    except (ValueError, KeyError, OSError) as exc:
        raise InputError(f"cannot read coefficients {args.coeffs}: {exc}") from exc
    bank, cert = _load_bank(args.model)
    if pyr.rate != bank.rate:
        raise InputError(f"coefficients use rate {pyr.rate}, model uses {bank.rate}")
    y = synthesize_multilevel(pyr, bank, cert)
    write_signal_csv(args.out, y)
    print(f"reconstructed {len(y)} samples from {pyr.levels} levels")
    return EXIT_OK


def cmd_prcheck(args) -> int:
    bank, stored = _load_bank(args.model)
    cert = certify(bank)
    print(f"rate {bank.rate}: c={cert.c:.12g} n0={cert.n0} residual_nmse={cert.residual_nmse:.3e}")
    if stored is not None and (stored.n0 != cert.n0 or abs(stored.c - cert.c) > 1e-9 * abs(cert.c)):
        print(f"warning: stored certificate (c={stored.c}, n0={stored.n0}) differs", file=sys.stderr)
    print("PR: valid" if cert.valid else "PR: NOT valid")
    return EXIT_OK if cert.valid else EXIT_NUMERIC


def cmd_freqz(args) -> int:
    bank, _ = _load_bank(args.model)
    resp = frequency_response(bank, args.points)
    cols = ["freq", "g_l", "g_h", "f_l", "f_h"]
    rows = [{k: float(resp[k][i]) for k in cols} for i in range(args.points)]
    write_table_csv(args.out, rows, cols)
    print(f"{args.points} frequency points written to {args.out} (freq normalized to pi)")
    return EXIT_OK


def cmd_csbench(args) -> int:
    try:
        cfg = CsExperimentConfig.from_json(_existing(args.config))
    except (ValueError, TypeError, json.JSONDecodeError) as exc:
        raise InputError(f"bad config {args.config}: {exc}") from exc
    if args.seed is not None:
        cfg.seed = args.seed
    name = Path(cfg.signal).stem
    if cfg.signal not in ("ramp", "ar1", "piecewise"):
        cfg_dir = Path(args.config).resolve().parent
        if not Path(cfg.signal).is_absolute() and (cfg_dir / cfg.signal).is_file():
            cfg.signal = str(cfg_dir / cfg.signal)
        _existing(cfg.signal)
    rows = run_cs_experiment(cfg, signal_name=name)
    if args.format == "json":
        Path(args.out).write_text(json.dumps(rows, indent=2))
    else:
        write_table_csv(args.out, rows, RESULT_COLUMNS)
    banks = list(dict.fromkeys(r["bank"] for r in rows))
    print("sr%   " + "  ".join(f"{b:>12}" for b in banks))
    for sr in cfg.sampling_ratios:
        vals = {r["bank"]: r["mean_psnr_db"] for r in rows if r["sr_percent"] == sr}
        print(f"{sr:<5} " + "  ".join(f"{vals[b]:12.2f}" for b in banks))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mrwtl", description="Signal-matched rational wavelets via lifting.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("learn", help="learn a matched rational wavelet from a signal")
    s.add_argument("signal")
    s.add_argument("--rate", type=_rate, required=True, help="lowpass rate q1/M, e.g. 2/3")
    s.add_argument("--np", type=int, default=2, help="predict taps (even)")
    s.add_argument("--ns", type=int, default=2, help="update taps (even)")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_learn)

    model_help = "model JSON, lazy:q1/M, or one of " + ", ".join(STANDARD_BANKS)
    s = sub.add_parser("transform", help="multi-level forward transform")
    s.add_argument("signal")
    s.add_argument("--model", required=True, help=model_help)
    s.add_argument("--levels", type=int, default=3)
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_transform)

    s = sub.add_parser("inverse", help="multi-level inverse transform")
    s.add_argument("coeffs")
    s.add_argument("--model", required=True, help=model_help)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_inverse)

    s = sub.add_parser("pr-check", help="certify perfect reconstruction")
    s.add_argument("model", help=model_help)
    s.set_defaults(func=cmd_prcheck)

    s = sub.add_parser("freqz", help="export filter magnitude responses")
    s.add_argument("model", help=model_help)
    s.add_argument("--points", type=int, default=512)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_freqz)

    s = sub.add_parser("cs-bench", help="compressed-sensing benchmark")
    s.add_argument("config", help="experiment config JSON")
    s.add_argument("--seed", type=int)
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_csbench)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, LengthMismatch, OddTapCount) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (MrwtlError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
