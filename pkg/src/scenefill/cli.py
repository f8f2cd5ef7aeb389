from __future__ import annotations

import argparse
import sys
from typing import Sequence

from scenefill import pipeline
from scenefill.errors import SceneFillError
from scenefill.utils.logging import get_logger, set_level


logger = get_logger(__name__)


def _key_frame(value: str) -> int | str:
    return value if value == "middle" else int(value)


def _run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON file with run settings; flags override it")
    parser.add_argument("--input-dir", dest="input_dir")
    parser.add_argument("--mask-dir", dest="mask_dir")
    parser.add_argument("--output-dir", dest="output_dir")
    parser.add_argument("--mode", choices=["full", "sliding"])
    parser.add_argument("--window", type=int)
    parser.add_argument("--key-frame", dest="key_frame", type=_key_frame, help="frame index or 'middle'")
    parser.add_argument("--beta", type=float)
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--max-outer", dest="max_outer", type=int)
    parser.add_argument("--no-refine", dest="refine", action="store_const", const=False)
    parser.add_argument("--template-only", dest="use_samples", action="store_const", const=False,
                        help="fill masks from the template alone (no cross-frame samples)")
    parser.add_argument("--flow-cache", dest="flow_cache_dir")
    parser.add_argument("--threads", type=int, help="worker threads, 0 = one per CPU")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scenefill", description="Scene-template video inpainting")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ...")
    sub = parser.add_subparsers(dest="command", required=True)

    inpaint = sub.add_parser("inpaint", help="inpaint a numbered PNG sequence under its masks")
    _run_flags(inpaint)

    estimate = sub.add_parser("estimate-mask", help="estimate missing masks, then inpaint")
    _run_flags(estimate)
    estimate.add_argument("--annotated", type=int, default=None,
                          help="number of leading frames with masks (default: every frame with a mask file)")

    evaluate = sub.add_parser("eval", help="compare results with ground truth")
    evaluate.add_argument("result_dir")
    evaluate.add_argument("gt_dir")
    evaluate.add_argument("mask_dir", nargs="?", default=None)
    evaluate.add_argument("--flow-dir", dest="flow_dir", default=None)
    evaluate.add_argument("--report", default=None, help="where to write the JSON report")

    synth = sub.add_parser("synth", help="render a synthetic sequence from a manifest")
    synth.add_argument("spec_file")
    synth.add_argument("out_dir")
    return parser


def _config(args: argparse.Namespace) -> pipeline.RunConfig:
    fields = [name for name in pipeline.RunConfig.model_fields if hasattr(args, name)]
    return pipeline.RunConfig.from_sources(args.config, **{name: getattr(args, name) for name in fields})


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.log_level:
        set_level(args.log_level)
    try:
        if args.command == "inpaint":
            record = pipeline.run_inpaint(_config(args))
            unfilled = sum(f["unfilled"] for f in record["frames"])
            print(f"{len(record['frames'])} frames written, {unfilled} never-revealed pixels")
        elif args.command == "estimate-mask":
            record = pipeline.run_estimate_mask(_config(args), args.annotated)
            print(f"{len(record['estimated'])} masks estimated, {len(record['frames'])} frames written")
        elif args.command == "eval":
            report = pipeline.run_eval(args.result_dir, args.gt_dir, args.mask_dir, args.flow_dir, args.report)
            print(report.summary_table())
        elif args.command == "synth":
            out = pipeline.run_synth(args.spec_file, args.out_dir)
            print(f"sequence written to {out}")
    except SceneFillError as exc:
        logger.debug("%s failed", args.command, exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ArithmeticError as exc:
        logger.debug("%s failed", args.command, exc_info=True)
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
