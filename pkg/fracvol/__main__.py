"""Start fracvol."""
import argparse
import asyncio
import logging
import os
import sys
from typing import List, Optional

import ujson

from fracvol.constants import (
    COMMANDS,
    ENV_DEBUG,
    EXIT_IO,
    EXIT_OK,
    EXIT_VALIDATION,
    FIGURE_NUMBERS,
    OUTPUT_FORMATS,
    __version__,
)
from fracvol.helpers.errors import ConfigValidationError, DomainError
from fracvol.helpers.util import parse_float_list
from fracvol.managers.config import ConfigManager, nest_flags
from fracvol.models.fou_path import SamplerMethod
from fracvol.models.tt_grid import FieldMode
from fracvol.toolkit import FracVol

LOGGER = logging.getLogger("fracvol")


def _float_list(value: str) -> List[float]:
    try:
        return parse_float_list(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma separated list of numbers: {value}") from exc


def _single(value: str) -> List[float]:
    try:
        return [float(value)]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {value}") from exc


def _vol_spec(value: str) -> dict:
    try:
        spec = ujson.loads(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a JSON object: {value}") from exc
    if not isinstance(spec, dict):
        raise argparse.ArgumentTypeError(f"not a JSON object: {value}")
    return spec


def _add_common(parser: argparse.ArgumentParser) -> None:
    """Flags shared by every command; dests are dotted config keys."""
    parser.add_argument(
        "-c",
        "--config",
        metavar="path",
        help="JSON run configuration or a previously written artifact",
    )
    parser.add_argument("--hurst", dest="model.hurst", type=float, help="Hurst exponent H")
    parser.add_argument(
        "--eps", "--epsilon", dest="model.epsilon", type=float, help="Mean-reversion time"
    )
    parser.add_argument("--seed", dest="seed", type=int, help="Seed of all random streams")
    parser.add_argument("--out", dest="output.path", metavar="path", help="Artifact path")
    parser.add_argument("--format", dest="output.format", choices=OUTPUT_FORMATS)
    parser.add_argument(
        "--debug",
        action="store_true",
        help="Start fracvol with verbose debug logging",
    )


def _add_market(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--spot", dest="market.spot", type=float)
    parser.add_argument("--rho", dest="market.rho", type=float, help="Leverage correlation")
    parser.add_argument("--time", dest="market.t", type=float, help="Current time t")
    parser.add_argument(
        "--vol-spec",
        dest="vol",
        type=_vol_spec,
        metavar="json",
        help='Volatility function, e.g. {"kind": "logistic", "params": {"kappa": 1.5}}',
    )


def _add_lattice(parser: argparse.ArgumentParser) -> None:
    strikes = parser.add_mutually_exclusive_group()
    strikes.add_argument("--strikes", dest="lattice.strikes", type=_float_list)
    strikes.add_argument("--strike", dest="lattice.strikes", type=_single)
    maturities = parser.add_mutually_exclusive_group()
    maturities.add_argument("--maturities", dest="lattice.maturities", type=_float_list)
    maturities.add_argument("--maturity", dest="lattice.maturities", type=_single)
    parser.add_argument("--payoff", dest="lattice.payoff")


def _add_figure(parser: argparse.ArgumentParser, choices) -> None:
    parser.add_argument("--fig", dest="figure", type=int, choices=choices, help="Figure preset")


def get_arguments(argv: Optional[List[str]] = None):
    """Arguments handling."""
    parser = argparse.ArgumentParser(
        prog="fracvol", description="Fractional stochastic-volatility toolkit"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", metavar="command")

    simulate = commands.add_parser("simulate", help="Sample stationary fOU factor paths")
    _add_common(simulate)
    simulate.add_argument("--paths", dest="sampler.n_paths", type=int)
    simulate.add_argument("--grid-size", dest="sampler.grid_size", type=int)
    simulate.add_argument("--dt", dest="sampler.dt", type=float, help="Grid spacing (eps/20)")
    simulate.add_argument(
        "--method", dest="sampler.method", choices=[item.value for item in SamplerMethod]
    )
    simulate.add_argument("--time", dest="market.t", type=float, help="Grid start")

    price = commands.add_parser("price", help="Asymptotically corrected option prices")
    _add_common(price)
    _add_market(price)
    _add_lattice(price)

    ivsurface = commands.add_parser("ivsurface", help="Implied volatility surface")
    _add_common(ivsurface)
    _add_market(ivsurface)
    _add_lattice(ivsurface)
    _add_figure(ivsurface, [3, 4, 5, 6])

    ttfield = commands.add_parser("ttfield", help="Realizations of the t-T correction field")
    _add_common(ttfield)
    ttfield.add_argument("--mode", dest="field.mode", choices=[item.value for item in FieldMode])
    ttfield.add_argument("--grid-size", dest="field.grid_size", type=int)
    ttfield.add_argument("--realizations", dest="field.realizations", type=int)
    ttfield.add_argument("--time", dest="market.t", type=float, help="Current time t")
    ttfield.add_argument("--maturities", dest="lattice.maturities", type=_float_list)
    _add_figure(ttfield, list(range(7, 14)))

    validate = commands.add_parser("validate", help="Monte Carlo convergence study")
    _add_common(validate)
    _add_market(validate)
    _add_lattice(validate)
    validate.add_argument("--eps-ladder", dest="mc.eps_ladder", type=_float_list)
    validate.add_argument("--paths", dest="mc.n_paths", type=int)
    validate.add_argument("--steps-per-eps", dest="mc.steps_per_eps", type=int)
    validate.add_argument("--batch-size", dest="mc.batch_size", type=int)
    validate.add_argument(
        "--no-antithetic", dest="mc.antithetic", action="store_false", default=None
    )
    validate.add_argument(
        "--moments", dest="moments", action="store_true", default=None,
        help="Also run the phi and fourth-moment ensemble checks",
    )

    figures = commands.add_parser("figures", help="Data series of a figure preset")
    _add_common(figures)
    _add_figure(figures, list(FIGURE_NUMBERS))
    figures.add_argument("--grid-size", dest="field.grid_size", type=int)
    figures.add_argument("--realizations", dest="field.realizations", type=int)

    if not argv:
        parser.print_usage(sys.stderr)
        raise SystemExit(EXIT_VALIDATION)
    return parser.parse_args(argv)


async def _run(config_manager: ConfigManager) -> None:
    toolkit = FracVol(config_manager)
    await toolkit.start()
    try:
        await toolkit.run_command()
    finally:
        await toolkit.stop()


def run(argv: Optional[List[str]] = None) -> int:
    """Run one command and return the exit code."""
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = get_arguments(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_VALIDATION
    if args.command not in COMMANDS:
        LOGGER.error("a command is required: %s", ", ".join(COMMANDS))
        return EXIT_VALIDATION
    flags = {
        key: value
        for key, value in vars(args).items()
        if key not in ("config", "debug", "command")
    }
    flags["command"] = args.command
    try:
        config_manager = ConfigManager(args.config)
        config_manager.load(nest_flags(flags))
        asyncio.run(_run(config_manager))
    except ConfigValidationError as exc:
        LOGGER.error("invalid configuration: %s", exc)
        return EXIT_VALIDATION
    except DomainError as exc:
        LOGGER.error("%s", exc)
        return EXIT_VALIDATION
    except OSError as exc:
        LOGGER.error("i/o error: %s", exc)
        return EXIT_IO
    except Exception:  # pylint: disable=broad-except
        LOGGER.exception("%s failed", args.command)
        return 1
    return EXIT_OK


def main():
    """Start fracvol."""
    # setup logger
    logger = logging.getLogger()
    logformat = logging.Formatter("%(asctime)-15s %(levelname)-5s %(name)s  -- %(message)s")
    consolehandler = logging.StreamHandler()
    consolehandler.setFormatter(logformat)
    logger.addHandler(consolehandler)

    argv = sys.argv[1:]
    # config debug settings if needed
    if "--debug" in argv or bool(os.environ.get(ENV_DEBUG)):
        logger.setLevel(logging.DEBUG)
    else:
        logger.setLevel(logging.INFO)
    # cool down logging for asyncio
    logging.getLogger("asyncio").setLevel(logging.WARNING)

    sys.exit(run(argv))


if __name__ == "__main__":
    main()
