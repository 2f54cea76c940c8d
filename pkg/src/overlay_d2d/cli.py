"""Command-line entry point: ``overlay-d2d <command> [options]``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, build_config, load_config
from .errors import NumericalError, ParameterError
from .experiments import run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

COMMANDS = ("simulate", "analytic", "densities", "rate", "optimize")
FIGURES = ("fig2", "fig3", "fig4")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError("arguments", message)


def _add_common(p: argparse.ArgumentParser):
    add = p.add_argument
    add("--config", metavar="PATH", help="flat key = value file; flags override it")
    add("--seed", type=int, metavar="U64")
    add("--trials", type=int, metavar="N")
    add("--out", metavar="PATH", help="CSV destination, '-' for stdout (default)")
    add("--cell-approx", choices=("b1", "b2"))
    add("--b1-literal", action="store_const", const=True, default=None, help="B1 boundary 2 r_a cos(phi)")
    add("--alpha", type=float, metavar="F")
    add("--lambda-a", type=float, metavar="F")
    add("--lambda-d", type=float, metavar="F")
    add("--lambda-c", type=float, metavar="F")
    add("--n-sc", type=int, metavar="N")
    add("--n-max", type=int, metavar="N", help="upper end of the subchannel search")
    add("--rd", type=float, metavar="F")
    add("--theta-db", type=float, metavar="F")
    add("--eta", type=float, metavar="F", help="D2D bandwidth share (default: fair partition)")
    add("--mode", choices=("coord", "uncoord"))
    add("--typical-cell", choices=("tx", "rx"), help="cell that schedules the typical link")
    add("--window-aps", type=float, metavar="F", help="expected APs in the simulation disc")
    add("--theta-min-db", type=float, metavar="F")
    add("--theta-max-db", type=float, metavar="F")
    add("--theta-points", type=int, metavar="N")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="overlay-d2d", description="Overlay D2D scheduling experiments (CSV output).")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        _add_common(sub.add_parser(name))
    fig = sub.add_parser("figure", help="figure presets")
    fig.add_argument("figure", choices=FIGURES)
    _add_common(fig)
    return parser


_NOT_CONFIG = {"command", "figure", "config"}


def _write(tables, out: str):
    text = "\n".join(t.to_csv() for t in tables[:1])
    if out == "-":
        sys.stdout.write(text)
        for t in tables[1:]:
            sys.stdout.write("\n" + t.to_csv())
        sys.stdout.flush()
        return
    path = Path(out)
    path.write_text(text, encoding="utf-8", newline="\n")
    for t in tables[1:]:
        extra = path.with_name(f"{path.stem}_summary{path.suffix or '.csv'}")
        extra.write_text(t.to_csv(), encoding="utf-8", newline="\n")


def run_cli(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        scenario = args.figure if args.command == "figure" else args.command
        file_values = load_config(args.config) if args.config else {}
        flags = {k: v for k, v in vars(args).items() if k not in _NOT_CONFIG}
        cfg = build_config(scenario, file_values, flags)
        tables = run(cfg)
        _write(tables, cfg.out)
    except ConfigError as exc:
        print(f"overlay-d2d: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"overlay-d2d: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ParameterError as exc:
        print(f"overlay-d2d: invalid parameter: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"overlay-d2d: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def main() -> None:
    sys.exit(run_cli())
