"""Command-line application: argument parsing, logging setup and dispatch."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Callable, Sequence

from rich.console import Console
from rich.logging import RichHandler

from accel_sim import ConfigError, ReportMismatchError
from cli import (
    UsageError,
    __version__,
    cmd_codec_stats,
    cmd_compare,
    cmd_gen_scene,
    cmd_render,
    cmd_simulate,
)
from renderer import TraceFormatError
from scene import OccupancyUnreachableError, SceneFormatError

logger = logging.getLogger("rt_nerf")

EXIT_INTERNAL = 1
EXIT_USAGE = 2

# bad flags or bad input files; anything else is a defect
INPUT_ERRORS = (
    UsageError,
    ConfigError,
    TraceFormatError,
    SceneFormatError,
    OccupancyUnreachableError,
    ReportMismatchError,
)


def _bounded_float(flag: str, lo: float, hi: float, *, lo_open: bool = False, hi_open: bool = False) -> Callable[[str], float]:
    def parse(text: str) -> float:
        try:
            value = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{flag} expects a number, got {text!r}") from None
        below = value <= lo if lo_open else value < lo
        above = value >= hi if hi_open else value > hi
        if below or above:
            left = "(" if lo_open else "["
            right = ")" if hi_open else "]"
            raise argparse.ArgumentTypeError(f"{flag} must lie in {left}{lo}, {hi}{right}, got {value}")
        return value

    return parse


def _positive_int(flag: str, minimum: int = 1) -> Callable[[str], int]:
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{flag} expects an integer, got {text!r}") from None
        if value < minimum:
            raise argparse.ArgumentTypeError(f"{flag} must be at least {minimum}, got {value}")
        return value

    return parse


def _add_camera_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("camera")
    group.add_argument("--cam-pos", type=float, nargs=3, metavar=("X", "Y", "Z"))
    group.add_argument("--cam-look-at", type=float, nargs=3, metavar=("X", "Y", "Z"))
    group.add_argument("--fov-deg", type=_bounded_float("--fov-deg", 0.0, 180.0, lo_open=True, hi_open=True), default=40.0)
    group.add_argument("--width", type=_positive_int("--width"), default=128)
    group.add_argument("--height", type=_positive_int("--height"), default=128)


def _add_render_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scene", required=True, help="scene file written by gen-scene")
    parser.add_argument("--exact", action="store_true", help="clip ball segments to the cell cubes")
    parser.add_argument("--tau", type=_bounded_float("--tau", 0.0, 1.0, hi_open=True), default=1e-4)
    parser.add_argument("--n-samples", type=_positive_int("--n-samples"), default=128)
    parser.add_argument("--sample-range", choices=("bounds", "occupied"), default="bounds")
    parser.add_argument("--no-octant-order", action="store_true")
    parser.add_argument("--transmittance", choices=("printed", "conventional"), default="printed")
    _add_camera_flags(parser)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rt-nerf-sim",
        description="Render decomposed radiance grids and model their accelerator cost.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    common.add_argument("-q", "--quiet", action="store_true", help="no summary tables")

    gen = sub.add_parser("gen-scene", parents=[common], help="synthesize a scene file")
    gen.add_argument("--res", type=_positive_int("--res", 8), default=64)
    gen.add_argument("--occupancy", type=_bounded_float("--occupancy", 0.0, 1.0, lo_open=True), default=0.01)
    gen.add_argument("--rank", type=_positive_int("--rank"), default=4)
    gen.add_argument("--channels", type=_positive_int("--channels"), default=3)
    gen.add_argument(
        "--factor-sparsity",
        type=_bounded_float("--factor-sparsity", 0.0, 1.0, hi_open=True),
        nargs="+",
        default=[0.0],
    )
    gen.add_argument("--seed", type=_positive_int("--seed", 0), default=0)
    gen.add_argument("--layout", choices=("blobs", "occluder"), default="blobs")
    gen.add_argument("--optical-depth", type=_bounded_float("--optical-depth", 0.0, 1e6, lo_open=True), default=4.0,
                     help="per-cell optical depth of the occluder layout")
    gen.add_argument("--max-cell-depth", type=_bounded_float("--max-cell-depth", 0.0, 1e6, lo_open=True), default=0.025,
                     help="largest per-cell optical depth of the blobs layout")
    gen.add_argument("--direction-degree", type=_positive_int("--direction-degree", 0), default=2)
    gen.add_argument("--out", required=True)
    gen.add_argument("--manifest-out")
    gen.set_defaults(handler=cmd_gen_scene)

    ren = sub.add_parser("render", parents=[common], help="render one view and record its step trace")
    ren.add_argument("--pipeline", choices=("uniform", "rt"), default="rt")
    _add_render_flags(ren)
    ren.add_argument("--image-out", required=True, help=".png or .ppm")
    ren.add_argument("--trace-out")
    ren.add_argument("--manifest-out")
    ren.set_defaults(handler=cmd_render)

    cmp_ = sub.add_parser("compare", parents=[common], help="render with two pipelines and diff them")
    cmp_.add_argument("--pipelines", nargs=2, choices=("uniform", "rt"), default=["uniform", "rt"])
    _add_render_flags(cmp_)
    cmp_.add_argument("--out", required=True)
    cmp_.add_argument("--manifest-out")
    cmp_.set_defaults(handler=cmd_compare, pipeline="rt")

    codec = sub.add_parser("codec-stats", parents=[common], help="sparsity census and codec latency profile")
    codec.add_argument("--scene", required=True)
    codec.add_argument("--force-variant", choices=("bitmap", "coo"))
    codec.add_argument("--value-width", type=_positive_int("--value-width"), default=4)
    codec.add_argument("--coord-width", type=_positive_int("--coord-width"), default=2)
    codec.add_argument("--ptr-width", type=_positive_int("--ptr-width"), default=4)
    codec.add_argument("--leaf-capacity", type=_positive_int("--leaf-capacity"), default=16)
    codec.add_argument("--dump-encodings", metavar="DIR")
    codec.add_argument("--out", required=True)
    codec.add_argument("--manifest-out")
    codec.set_defaults(handler=cmd_codec_stats)

    sim = sub.add_parser("simulate", parents=[common], help="cost a step trace on accelerator hardware")
    sim.add_argument("--config", required=True, help="config path or preset name")
    sim.add_argument("--trace", required=True)
    sim.add_argument("--codec-stats")
    sim.add_argument("--against", help="second config to compare with")
    sim.add_argument("--out", required=True)
    sim.add_argument("--compare-out")
    sim.add_argument("--manifest-out")
    sim.set_defaults(handler=cmd_simulate)
    return parser


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), rich_tracebacks=True, show_path=False)],
        force=True,
    )


def main(argv: Sequence[str] | None = None) -> int:
    """Parse ``argv``, run the command and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    configure_logging(args.verbose)
    try:
        return args.handler(args)
    except INPUT_ERRORS as exc:
        logger.debug("%s rejected its input", args.command, exc_info=True)
        Console(stderr=True).print(
            f"rt-nerf-sim {args.command}: error: {exc}", style="bold red", markup=False, highlight=False, soft_wrap=True
        )
        return EXIT_USAGE
    except Exception:
        logger.exception("%s failed", args.command)
        return EXIT_INTERNAL


def run() -> None:
    """Run the command-line application."""
    sys.exit(main())


if __name__ == "__main__":
    run()
