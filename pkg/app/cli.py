"""
Command-line front end for the pipeline.

Usage:
  python run_pipeline.py --config pipeline.conf ingest
  python run_pipeline.py --config pipeline.conf assort --predictor culture
  python run_pipeline.py --config pipeline.conf plot --kind overlay --predictor culture --focus chinese

Exit codes: 0 success, 1 validation error, 2 numerical failure.
"""

import argparse
import json
import logging
from pathlib import Path
from typing import Optional, Sequence

import sentry_sdk

from app.core.config import get_settings
from app.core.config_loader import load_pipeline_config
from app.core.errors import DataValidationError, NumericalFailure
from app.core.logging import setup_logging
from app.models.skyculture import Predictor
from app.services.plots import PLOT_KINDS
from app.workers import jobs_diversity, jobs_embed, jobs_features, jobs_ingest, jobs_mixing, jobs_plot

logger = logging.getLogger("skysig.cli")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2

COMMANDS = ("ingest", "features", "embed", "knn", "assort", "similarity", "diversity", "plot")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skysig", description="Visual signature analysis of constellation line figures")
    parser.add_argument("--config", type=Path, default=None, help="pipeline config file (key = value)")
    parser.add_argument("--out", type=Path, default=None, help="output directory (overrides output_dir)")
    parser.add_argument("--seed", type=int, default=None, help="random seed (overrides seed)")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ...")

    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("ingest", "features", "embed", "knn", "diversity"):
        sub.add_parser(name)
    predictors = [p.value for p in Predictor]
    for name in ("assort", "similarity"):
        cmd = sub.add_parser(name)
        cmd.add_argument("--predictor", choices=predictors, default=Predictor.CULTURE.value)

    plot = sub.add_parser("plot")
    plot.add_argument("--kind", required=True, help=f"one of {', '.join(PLOT_KINDS)}")
    plot.add_argument("--feature", default=None, help="gradient feature for 'embedding' (s1..s19)")
    plot.add_argument("--predictor", choices=predictors, default=None)
    plot.add_argument("--focus", default=None, help="foreground class for 'overlay'")
    plot.add_argument("--figure", default=None, help="culture/figure key for 'miniature'")
    return parser


def _config_path(args: argparse.Namespace) -> Optional[Path]:
    if args.config is not None:
        return args.config
    default = Path(get_settings().default_config_path)
    return default if default.is_file() else None


def run_command(args: argparse.Namespace) -> object:
    config = load_pipeline_config(_config_path(args), {"output_dir": args.out, "seed": args.seed})
    Path(config.output_dir).mkdir(parents=True, exist_ok=True)

    if args.command == "ingest":
        return jobs_ingest.run_ingest(config)
    if args.command == "features":
        return jobs_features.run_features(config)
    if args.command == "embed":
        return jobs_embed.run_embed(config)
    if args.command == "knn":
        return jobs_mixing.run_knn(config)
    if args.command == "assort":
        return jobs_mixing.run_assort(config, Predictor(args.predictor))
    if args.command == "similarity":
        return jobs_mixing.run_similarity(config, Predictor(args.predictor))
    if args.command == "diversity":
        return jobs_diversity.run_diversity(config)
    return jobs_plot.run_plot(
        config,
        args.kind,
        feature=args.feature,
        predictor=Predictor(args.predictor) if args.predictor else None,
        focus=args.focus,
        figure=args.figure,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging((args.log_level or get_settings().log_level).upper())

    try:
        result = run_command(args)
    except DataValidationError as exc:
        logger.error("%s failed: %s", args.command, exc)
        return EXIT_VALIDATION
    except NumericalFailure as exc:
        logger.error("%s failed: %s", args.command, exc)
        return EXIT_NUMERICAL
    except Exception as exc:
        logger.exception("%s failed unexpectedly: %s", args.command, exc)
        sentry_sdk.capture_exception(exc)
        return EXIT_VALIDATION

    if isinstance(result, dict):
        print(json.dumps(result, indent=2, sort_keys=True, default=str))
    elif result is not None:
        print(result)
    return EXIT_OK
