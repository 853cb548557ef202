"""``kiparc <scenario> --config <path> [--out <dir>] [--seed <n>] [--force]``."""
from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .config import SCENARIOS, load_config
from .errors import ConfigError, DataError, NumericError, OutputError
from .scenarios import run_scenario

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("kiparc")


def build_parser():
    listing = "\n".join(f"  {name:<12} {text}" for name, text in SCENARIOS.items())
    parser = argparse.ArgumentParser(
        prog="kiparc",
        description="Run a kinetic-inductance parametric converter scenario and write CSV artifacts.",
        epilog=f"scenarios:\n{listing}\n\nexit codes: 0 ok, 2 config, 3 numeric, 4 I/O",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("scenario", choices=list(SCENARIOS), metavar="scenario", help="one of: " + ", ".join(SCENARIOS))
    parser.add_argument("--config", required=True, help="JSON scenario configuration")
    parser.add_argument("--out", help="output directory (overrides output_dir in the config)")
    parser.add_argument("--seed", type=int, help="random seed (overrides seed in the config)")
    parser.add_argument("--force", action="store_true", help="overwrite existing outputs")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config, args.scenario, seed=args.seed, output_dir=args.out)
        manifest = run_scenario(cfg, force=args.force)
    except (ConfigError, DataError) as exc:
        print(f"kiparc: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"kiparc: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OutputError, OSError) as exc:
        print(f"kiparc: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for entry in manifest.files:
        print(f"{cfg.output_dir / entry['name']}  sha256={entry['sha256']}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
