# ---------------------------------------------------------------------
# ohcsvm/cli.py
# ---------------------------------------------------------------------
# Command-line surface of the pipeline.
#
# Exit codes: 0 success, 1 stage failure, 2 configuration or missing
# upstream artifact, 130 interrupted.
# ---------------------------------------------------------------------

"""
python3 cli/03_run_pipeline.py --config configs/synthetic.json --out output/synthetic

# One stage at a time (each reads what the previous stage wrote)
python3 cli/03_run_pipeline.py --config configs/synthetic.json --stage label
python3 cli/03_run_pipeline.py --config configs/synthetic.json --stage train-kernel

# Metrics of a standalone predictions file
python3 cli/03_run_pipeline.py --predictions output/synthetic/predictions/rbf.csv
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from ohcsvm.config import apply_seed_overrides, load_run_config
from ohcsvm.constants_config import CYAN, GREEN, RED, RESET, YELLOW
from ohcsvm.errors import ConfigValidationError, DependencyError, OhcSvmError, StageError
from ohcsvm.pipeline import STAGES, metrics_from_predictions, run
from ohcsvm.reports import write_json
from ohcsvm.settings import configure_logging, get_settings

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Label load paths, align kernels, train and evaluate SVM failure classifiers."
    )
    parser.add_argument("--config", type=Path, help="Run configuration (JSON).")
    parser.add_argument(
        "--out",
        type=Path,
        default=None,
        help="Output directory (default: output_dir of the config).",
    )
    parser.add_argument(
        "--workers",
        type=int,
        default=None,
        help="Thread cap for Gram, CV and curve tasks (default: OHCSVM_WORKERS or 1).",
    )
    parser.add_argument(
        "--stage",
        choices=("all",) + STAGES,
        default="all",
        help="Run a single stage instead of the whole pipeline.",
    )
    parser.add_argument(
        "--seed-override",
        action="append",
        default=[],
        metavar="NAME=VALUE",
        help="Replace one config seed, e.g. split_seed=7 (repeatable).",
    )
    parser.add_argument(
        "--predictions",
        type=Path,
        default=None,
        help="Compute the five metrics of a predictions CSV and exit.",
    )
    parser.add_argument("--verbose", action="store_true", help="Log at DEBUG level.")
    return parser


def _fail(message: str) -> None:
    print(f"{RED}{message}{RESET}", file=sys.stderr)


def _standalone_metrics(file: Path, out: Optional[Path]) -> int:
    try:
        summary = metrics_from_predictions(file)
    except FileNotFoundError:
        _fail(f"predictions file {file} does not exist")
        return 2
    except OhcSvmError as exc:
        _fail(str(exc))
        return 1

    target = (out or file.parent.parent) / "metrics" / f"{file.stem}.json"
    write_json({"kernel": file.stem, **summary}, target)

    print(f"\n{YELLOW}{'=' * 60}")
    print(f"{CYAN}{'Metrics: ' + file.name:>40}{RESET}")
    print(f"{YELLOW}{'=' * 60}{RESET}")
    for name, value in summary["metrics"].items():
        shown = "absent" if value is None else f"{value:.4f}"
        print(f"{name + ':':>14} {shown}")
    print(f"{'written:':>14} {target}")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    settings = get_settings()
    level = "DEBUG" if args.verbose else settings.log_level.upper()
    configure_logging(level)

    if args.predictions is not None:
        return _standalone_metrics(args.predictions, args.out)

    if args.config is None:
        _fail("--config is required unless --predictions is given")
        return 2

    try:
        config = apply_seed_overrides(load_run_config(args.config), args.seed_override)
    except ConfigValidationError as exc:
        _fail(str(exc))
        return 2

    out_dir = args.out or config.output_dir
    workers = args.workers or settings.workers
    stages = STAGES if args.stage == "all" else (args.stage,)
    configure_logging(level, out_dir / "run.log")

    print(f"\n{YELLOW}{'=' * 82}")
    print(f"{CYAN}{'ohc-qsvm pipeline':>50}{RESET}")
    print(f"{YELLOW}{'=' * 82}{RESET}")
    print(f"{'Config:':>12} {args.config}")
    print(f"{'Output:':>12} {out_dir}")
    print(f"{'Stages:':>12} {', '.join(stages)}")
    print(f"{'Workers:':>12} {workers}")
    print("-" * 82)

    try:
        report = run(config, out_dir=out_dir, workers=workers, stages=stages)
    except (DependencyError, ConfigValidationError) as exc:
        _fail(str(exc))
        return 2
    except StageError as exc:
        _fail(str(exc))
        return 1
    except KeyboardInterrupt:
        _fail("interrupted")
        return 130

    print(f"{GREEN}{'Completed:':>12} {', '.join(report.stages)}{RESET}")
    print(f"{'Manifest:':>12} {report.manifest}")
    print("=" * 82)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
