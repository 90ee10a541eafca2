"""Command line entry point.

Exit codes: 0 pass, 1 fail, 2 inconclusive, 64 usage error, 65 invalid
config, 74 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

import yaml

from . import __version__
from .config import load_config, parse_config
from .errors import AplabError, ConfigError, ParseError, ValidationError
from .runner import run, text_report

EXIT_USAGE = 64
EXIT_CONFIG = 65
EXIT_IO = 74

_SUBCOMMAND_TYPES = {
    "classify": ("classify",),
    "verify": ("verify",),
    "seminorm": ("seminorm",),
    "run": None,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def preset_names() -> list[str]:
    root = resources.files("aplab") / "presets"
    return sorted(p.name[: -len(".yaml")] for p in root.iterdir() if p.name.endswith(".yaml"))


def list_presets() -> list[tuple[str, str]]:
    """Bundled preset names with their one-line descriptions."""
    out = []
    for name in preset_names():
        data = yaml.safe_load(preset_text(name)) or {}
        out.append((name, str(data.get("description", ""))))
    return out


def preset_text(name: str) -> str:
    res = resources.files("aplab") / "presets" / f"{name}.yaml"
    if not res.is_file():
        raise UsageError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return res.read_text(encoding="utf-8")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="aplab", description="Almost periodic function experiments.")
    parser.add_argument("--version", action="version", version=f"aplab {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in _SUBCOMMAND_TYPES:
        sp = sub.add_parser(name, help=f"run {name} tasks" if name != "run" else "run every task")
        src = sp.add_mutually_exclusive_group(required=True)
        src.add_argument("--config", type=Path, help="YAML experiment config")
        src.add_argument("--preset", help="name of a bundled preset")
        sp.add_argument("--out", type=Path, help="output directory for report, CSVs and manifest")
        sp.add_argument("--tolerance", type=float,
                        help="single epsilon for classify/verify tasks, comparison tolerance for seminorm tasks")
        sp.add_argument("--jobs", type=int, default=1, help="worker threads (default 1)")
        sp.add_argument("--quiet", action="store_true", help="do not print the report")
    sub.add_parser("presets", help="list bundled presets")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        if args.command == "presets":
            for name, desc in list_presets():
                print(f"{name:<28} {desc}")
            return 0
        if args.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        if args.tolerance is not None and not args.tolerance > 0:
            raise UsageError("--tolerance must be positive")
        cfg = parse_config(preset_text(args.preset)) if args.preset else load_config(args.config)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, ValidationError, ConfigError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        manifest, results = run(cfg, args.out, _SUBCOMMAND_TYPES[args.command], args.tolerance, args.jobs)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (AplabError, ValueError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not args.quiet:
        print(text_report(cfg, manifest, results))
    return manifest.exit_code


if __name__ == "__main__":
    sys.exit(main())
