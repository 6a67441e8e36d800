"""Command-line interface.

Subcommands: encode, decode, simulate, stats, list-codes, verify.
Exit codes: 0 success, 1 verification failure, 2 usage or spec-parse error,
3 I/O error.  Output files land under --out (a path prefix) or, by default,
$STCLAB_OUTDIR (falling back to the working directory).
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__, kernels
from .algebra import BUILTIN_CODES, SpecParseError, encode, spec_from_source, verify_identities
from .alphabet import UnsupportedOrderError, alphabet_by_name
from .channel import sample_channel, sample_symbols, transmit, trial_rng
from .decoders import (
    DECODER_NAMES,
    DEFAULT_BUDGET,
    BudgetExceededError,
    run_decoder,
)
from .simharness import ExperimentConfig, emit_report, run_error_rate, run_selection_stats

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from exc
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _snr_grid(text: str) -> tuple:
    """'start:step:stop' (inclusive) or a comma-separated list, in dB."""
    try:
        if ":" in text:
            start, step, stop = (float(p) for p in text.split(":"))
            if step <= 0:
                raise ValueError("step must be positive")
            grid = []
            value = start
            while value <= stop + 1e-9:
                grid.append(round(value, 9))
                value += step
            if not grid:
                raise ValueError("empty grid")
            return tuple(grid)
        return tuple(float(p) for p in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad SNR grid {text!r}: {exc}") from exc


def _decoder_list(text: str) -> tuple:
    names = tuple(p.strip() for p in text.split(",") if p.strip())
    for name in names:
        if name not in DECODER_NAMES:
            raise argparse.ArgumentTypeError(
                f"unknown decoder {name!r}; choose from {','.join(DECODER_NAMES)}"
            )
    if not names:
        raise argparse.ArgumentTypeError("empty decoder list")
    return names


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stclab",
        description="Algebraic space-time code laboratory: encode, simulate, decode.",
    )
    parser.add_argument("--version", action="version", version=f"stclab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    code_args = argparse.ArgumentParser(add_help=False)
    code_args.add_argument(
        "--code",
        default="golden",
        help="builtin name (golden, perfect4), cyclic:<n>:<gamma re>:<gamma im>, or a spec file",
    )
    code_args.add_argument("--omega-file", default=None, help="omega table JSON for cyclic:... sources")

    run_args = argparse.ArgumentParser(add_help=False)
    run_args.add_argument("--alphabet", default="qam4", choices=("qam4", "qam16", "qam64"))
    run_args.add_argument("--seed", type=int, default=0, help="master seed")

    out_args = argparse.ArgumentParser(add_help=False)
    out_args.add_argument("--out", default=None, help="output path prefix")
    out_args.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1)

    p = sub.add_parser("encode", parents=[code_args, run_args], help="print a random codeword")
    p = sub.add_parser("decode", parents=[code_args, run_args], help="decode one noisy transmission")
    p.add_argument("--snr-db", type=float, default=10.0)
    p.add_argument("--decoder", default="recursive", choices=DECODER_NAMES)

    p = sub.add_parser(
        "simulate", parents=[code_args, run_args, out_args], help="error-rate Monte Carlo"
    )
    p.add_argument("--snr", type=_snr_grid, default=_snr_grid("0:4:24"), help="dB grid: start:step:stop or list")
    p.add_argument("--trials", type=_positive_int, default=1000, help="trials per SNR point")
    p.add_argument("--decoder", type=_decoder_list, default=("ml", "recursive"), help="comma-separated decoders")
    p.add_argument("--budget", type=_positive_int, default=DEFAULT_BUDGET)

    p = sub.add_parser(
        "stats", parents=[code_args, run_args, out_args], help="first-round selection statistics"
    )
    p.add_argument("--trials", type=_positive_int, default=100_000, help="sampled channels (>= 1000)")

    sub.add_parser("list-codes", help="list builtin code specs")
    sub.add_parser("verify", parents=[code_args], help="run the algebraic identity checks on a spec")
    return parser


def _out_prefix(args, default_name: str) -> str:
    if args.out:
        return args.out
    base = os.environ.get("STCLAB_OUTDIR", ".")
    return os.path.join(base, default_name)


def _fmt_matrix(m: np.ndarray) -> str:
    return np.array2string(m, precision=6, suppress_small=True)


def cmd_encode(args) -> int:
    spec = spec_from_source(args.code, args.omega_file)
    alphabet = alphabet_by_name(args.alphabet)
    rng = trial_rng(args.seed, 7)
    s = sample_symbols(alphabet, spec.n, rng)
    print(f"code {spec.label} (n={spec.n}), alphabet {alphabet.label}, seed {args.seed}")
    print("symbol groups (rows s_i):")
    print(_fmt_matrix(s))
    print("codeword:")
    print(_fmt_matrix(encode(spec, s)))
    return EXIT_OK


def cmd_decode(args) -> int:
    spec = spec_from_source(args.code, args.omega_file)
    alphabet = alphabet_by_name(args.alphabet)
    from .simharness import sigma2_for_snr_db

    sigma2 = sigma2_for_snr_db(spec, alphabet, args.snr_db)
    rng = trial_rng(args.seed, 11)
    h = sample_channel(spec.n, rng)
    s = sample_symbols(alphabet, spec.n, rng)
    tx = transmit(spec, s, h, sigma2, rng)
    res = run_decoder(args.decoder, tx.y, tx.context.equivalents, alphabet)
    print(f"code {spec.label}, alphabet {alphabet.label}, SNR {args.snr_db} dB, decoder {args.decoder}")
    print("transmitted groups:")
    print(_fmt_matrix(s))
    print("decoded groups:")
    print(_fmt_matrix(res.symbols))
    print(f"exact recovery: {bool(np.array_equal(res.symbols, s))}")
    print(
        f"decode order {res.step_order}, candidates {res.candidates_examined}, "
        f"metric evals {res.metric_evals}, residual {res.residual:.6g}, "
        f"pseudo-solve steps {sum(res.pseudo_solve_flags)}"
    )
    return EXIT_OK


def cmd_simulate(args) -> int:
    spec = spec_from_source(args.code, args.omega_file)
    alphabet = alphabet_by_name(args.alphabet)
    cfg = ExperimentConfig(
        spec=spec,
        alphabet=alphabet,
        snr_grid_db=args.snr,
        trials_per_point=args.trials,
        decoders=args.decoder,
        master_seed=args.seed,
        threads=args.threads,
        budget=args.budget,
    )
    report = run_error_rate(cfg)
    for name, reason in report.skipped:
        print(f"warning: decoder {name} skipped: {reason}", file=sys.stderr)
    paths = emit_report(report, _out_prefix(args, f"simulate_{spec.label}_{alphabet.label}_seed{args.seed}"))
    print(f"{'snr_db':>8} {'decoder':>16} {'CER':>12} {'SER':>12} {'mean_cand':>12} {'secs':>8}")
    for row in report.rows:
        print(
            f"{row.snr_db:8.2f} {row.decoder:>16} {row.cer:12.6g} {row.ser:12.6g} "
            f"{row.mean_candidates:12.6g} {row.wall_time:8.2f}"
        )
    for path in paths:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_stats(args) -> int:
    spec = spec_from_source(args.code, args.omega_file)
    if args.trials < 1000:
        print("stats needs --trials >= 1000", file=sys.stderr)
        return EXIT_USAGE
    cfg = ExperimentConfig(
        spec=spec,
        alphabet=alphabet_by_name(args.alphabet),  # echoed in the header; the statistics are channel-only
        snr_grid_db=(),
        stats_trials=args.trials,
        master_seed=args.seed,
        threads=args.threads,
    )
    report = run_selection_stats(cfg)
    st = report.stats
    paths = emit_report(report, _out_prefix(args, f"stats_{spec.label}_seed{args.seed}"))
    print(f"selection statistics over {st.trials} channels for {spec.label}:")
    print(f"  pearson r(argmin kappa, argmax ratio) = {st.pearson_r_kappa_ratio:.4f}")
    print(f"  pearson r(argmax det,   argmax ratio) = {st.pearson_r_det_ratio:.4f}")
    print(f"  agreement rates: kappa/ratio {st.agreement_kappa_ratio:.4f}, det/ratio {st.agreement_det_ratio:.4f}")
    print(f"  median min kappa {st.min_kappa_median:.4g}, p90 of all kappas {st.kappa_all_p90:.4g}")
    for path in paths:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_list_codes(_args) -> int:
    for name, factory in BUILTIN_CODES.items():
        spec = factory()
        print(
            f"{name}: n={spec.n}, gamma={spec.gamma:.6g}, alpha={spec.alpha:.6g}, "
            f"unitary_gamma={spec.unitary_gamma}"
        )
    print("also accepted: cyclic:<n>:<gamma re>:<gamma im> with --omega-file, or a spec JSON path")
    return EXIT_OK


def cmd_verify(args) -> int:
    spec = spec_from_source(args.code, args.omega_file)
    results = verify_identities(spec)
    failed = 0
    for name, passed, detail in results:
        status = "PASS" if passed else "FAIL"
        failed += not passed
        print(f"{status} {name}: {detail}")
    print(f"{len(results) - failed}/{len(results)} checks passed for {spec.label}")
    return EXIT_OK if failed == 0 else EXIT_CHECK_FAILED


_COMMANDS = {
    "encode": cmd_encode,
    "decode": cmd_decode,
    "simulate": cmd_simulate,
    "stats": cmd_stats,
    "list-codes": cmd_list_codes,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = _COMMANDS[args.command]
    try:
        return handler(args)
    except (SpecParseError, UnsupportedOrderError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
