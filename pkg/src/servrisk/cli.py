"""Command line: ``servrisk grid | score | validate``.

Exit status is 0 on success, 2 for configuration errors and 3 when the
computation itself fails.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from .config import Command, ConfigError, OutputFormat, RunConfig, parse_axis, parse_config
from .distributions import Family
from .mc_oracle import OracleUnderpoweredError, validate_grid
from .render import grid_document, score_document, summary_line, validation_document
from .risk_model import LedgerConflictError, attach_serviceability
from .serviceability import GridCellError, ServiceabilityCase, UnresolvableBaseError, risk_weight_grid

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_COMPUTE = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(message)


def _axis_arg(text: str) -> tuple[float, ...]:
    try:
        return parse_axis(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _weight_arg(text: str) -> tuple[str, float]:
    name, sep, factor = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected NAME=FACTOR, got {text!r}")
    try:
        return name, float(factor)
    except ValueError:
        raise argparse.ArgumentTypeError(f"factor for {name!r} is not a number") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="servrisk", description="Serviceability risk weights from an income distribution.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML config file")
    common.add_argument("--stress-factor", dest="stress_factor", type=float, help="income stress f")
    common.add_argument("--base-nsr", dest="base_nsr", type=float)
    common.add_argument("--family", choices=[f.value for f in Family])
    common.add_argument("--skew", type=float, help="skew-normal shape parameter")
    common.add_argument("--format", dest="output_format", choices=[f.value for f in OutputFormat])
    common.add_argument("--output", dest="output_path", help="write here instead of stdout")

    axes = _Parser(add_help=False)
    axes.add_argument("--nsr", dest="nsr_axis", type=_axis_arg, help="NSR axis: a,b,c or start:stop:step")
    axes.add_argument("--sd", dest="sd_axis", type=_axis_arg, help="income sd axis: a,b,c or start:stop:step")

    sub.add_parser("grid", parents=[common, axes], help="tabulate risk weights over NSR x sd")

    score = sub.add_parser("score", parents=[common], help="adjusted PD, LGD and expected loss for one loan")
    score.add_argument("--base-pd", dest="base_pd", type=float)
    score.add_argument("--base-lgd", dest="base_lgd", type=float)
    score.add_argument("--pd-cap", dest="pd_cap", type=float)
    score.add_argument("--pd-floor", dest="pd_floor", type=float)
    score.add_argument("--pd-weight", dest="pd_weights", type=_weight_arg, action="append", metavar="NAME=FACTOR")
    score.add_argument("--lgd-weight", dest="lgd_weights", type=_weight_arg, action="append", metavar="NAME=FACTOR")
    score.add_argument("--nsr", type=float, help="attach the NSR risk weight at this NSR")
    score.add_argument("--sd", type=float, help="income sd for the NSR risk weight")

    validate = sub.add_parser("validate", parents=[common, axes], help="Monte Carlo check of the analytic grid")
    validate.add_argument("--samples", type=int)
    validate.add_argument("--seed", type=int)
    validate.add_argument("--workers", type=int)
    return parser


def config_from_args(argv: Sequence[str] | None = None) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    command = Command(args.pop("command"))
    path = args.pop("config")
    text = ""
    if path is not None:
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError("config", str(exc)) from None
    return parse_config(text, args, command)


def render(config: RunConfig) -> str:
    """Execute ``config`` and return the output document."""
    fmt = config.output_format
    if config.command is Command.GRID:
        grid = risk_weight_grid(
            config.stress_factor, config.nsr_axis, config.sd_axis, config.family,
            skew=config.skew, base_nsr=config.base_nsr,
        )
        return grid_document(grid, fmt)
    if config.command is Command.SCORE:
        profile = config.profile
        assert profile is not None
        if config.score_case is not None:
            case = ServiceabilityCase(
                config.stress_factor, config.score_case.nsr,
                config.distribution(config.score_case.sd), base_nsr=config.base_nsr,
            )
            try:
                profile = attach_serviceability(profile, case)
            except UnresolvableBaseError as exc:
                raise UnresolvableBaseError(f"{exc} [case f={case.stress_factor}, nsr={case.nsr}, sd={case.distribution.relative_sd}]") from exc
        return score_document(profile, fmt)
    result = validate_grid(
        config.stress_factor, config.nsr_axis, config.sd_axis, config.family,
        samples=config.samples, seed=config.seed, skew=config.skew,
        base_nsr=config.base_nsr, workers=config.workers,
    )
    if fmt is not OutputFormat.MARKDOWN:
        print(summary_line(result), file=sys.stderr)
    return validation_document(result, fmt)


def run(config: RunConfig) -> tuple[int, str]:
    """Return ``(exit status, document or diagnostic)``."""
    try:
        return EXIT_OK, render(config)
    except LedgerConflictError as exc:
        return EXIT_CONFIG, f"config error: {exc}"
    except (GridCellError, UnresolvableBaseError, OracleUnderpoweredError, ArithmeticError) as exc:
        return EXIT_COMPUTE, f"computation error: {exc}"


def main(argv: Sequence[str] | None = None) -> int:
    try:
        config = config_from_args(argv)
    except _UsageError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    status, text = run(config)
    if status != EXIT_OK:
        print(text, file=sys.stderr)
        return status
    if config.output_path is None:
        sys.stdout.write(text)
    else:
        config.output_path.write_text(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
