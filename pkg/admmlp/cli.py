"""The ``admmlp-sim`` command: run an FER sweep and write CSV/JSON results."""

import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from admmlp.core.harness import DecoderKind, ExperimentSpec, records_to_csv, run_sweep
from admmlp.utils import ParserException


def parse_snr_list(text: str) -> List[float]:
    """Parse a comma-separated list of Eb/N0 values."""
    try:
        return [float(token) for token in text.split(",") if token.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"Invalid SNR list: {text!r}") from e


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="admmlp-sim",
        description="Monte-Carlo frame error rate of LDPC decoders over AWGN.",
    )
    parser.add_argument(
        "--code",
        required=True,
        help="built-in code name (tanner155, wigig672, ensemble1002-example) "
        "or path of a shift file or .alist file",
    )
    parser.add_argument(
        "--decoder",
        choices=[kind.value for kind in DecoderKind],
        default=DecoderKind.ADMM_DOUBLE.value,
    )
    parser.add_argument("--alpha", type=float, default=0.1, help="ADMM penalty")
    parser.add_argument("--max-iters", type=int, default=60)
    parser.add_argument(
        "--snr-db",
        type=parse_snr_list,
        required=True,
        help="comma-separated list of Eb/N0 points in dB",
    )
    parser.add_argument("--target-frame-errors", type=int, default=100)
    parser.add_argument("--max-frames", type=int, default=10**6)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--batch-frames", type=int, default=64)
    parser.add_argument("--saturation-a", type=float, default=1.0)
    parser.add_argument("--out", metavar="PATH", help="CSV output file")
    parser.add_argument("--json", metavar="PATH", help="JSON output file")
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="-v for progress, -vv for decoder details",
    )
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    try:
        spec = ExperimentSpec(
            code=args.code,
            decoder=args.decoder,
            alpha=args.alpha,
            max_iters=args.max_iters,
            snr_points_db=args.snr_db,
            target_frame_errors=args.target_frame_errors,
            max_frames=args.max_frames,
            seed=args.seed,
            workers=args.workers,
            batch_frames=args.batch_frames,
            saturation_a=args.saturation_a,
        )
        records = run_sweep(spec, out=args.out, json_path=args.json)
    except (ValidationError, ParserException, ValueError, OSError) as e:
        print(f"admmlp-sim: error: {e}", file=sys.stderr)
        return 1

    if not args.out:
        sys.stdout.write(records_to_csv(records))
    return 0


if __name__ == "__main__":
    sys.exit(main())
