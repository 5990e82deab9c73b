"""Command line interface.

Every subcommand takes --config PATH, --out DIR and optionally --seed INT.
Exit codes: 0 success, 2 configuration error, 3 stage failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import parse_config
from .exceptions import ConfigError, StageError
from .pipeline import run_stages, train_translator
from .toydata import write_toy_workspace

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STAGE = 3

# subcommand -> pipeline stage(s)
_STAGE_COMMANDS = {
    "ingest": ["ingest"],
    "extract-masks": ["ingest", "extract"],
    "synth-gesture": ["synth"],
    "train-compose": ["ingest", "compose"],
    "assemble": ["assemble"],
    "translate": ["translate"],
    "metrics": ["metrics"],
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gesturesynth",
        description="Generate labelled synthetic hand-gesture videos.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="pipeline config file")
    common.add_argument("--seed", type=int, default=None,
                        help="override pipeline.seed")
    common.add_argument("--out", required=True, help="output directory")

    for name, help_text in [
            ("ingest", "load and index the annotated dataset"),
            ("extract-masks", "extract hand masks for every indexed frame"),
            ("synth-gesture", "animate the reference mask along a gesture"),
            ("train-translate", "train the domain translator"),
            ("train-compose", "train the scene composer"),
            ("assemble", "render a labelled video from the mask sequence"),
            ("translate", "translate an assembled video to a new domain"),
            ("metrics", "compute background coherence metrics"),
            ("run", "run every stage named in pipeline.stages")]:
        sub.add_parser(name, parents=[common], help=help_text)

    toy = sub.add_parser("make-toy", help="write a runnable toy workspace")
    toy.add_argument("--out", required=True, help="workspace directory")
    toy.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)

    if args.command == "make-toy":
        config_path = write_toy_workspace(args.out, seed=args.seed)
        print(f"toy workspace ready; run: gesturesynth run --config {config_path} "
              f"--out {args.out}/out")
        return EXIT_OK

    try:
        config = parse_config(args.config)
        if args.command == "run":
            run_stages(config, args.out, config["pipeline.stages"], seed=args.seed)
        elif args.command == "train-translate":
            path = train_translator(config, args.out, seed=args.seed)
            print(f"translator checkpoint: {path}")
        else:
            stages = _STAGE_COMMANDS[args.command]
            run_stages(config, args.out, stages, seed=args.seed)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except StageError as err:
        print(f"stage error: {err}", file=sys.stderr)
        return EXIT_STAGE
    except FileNotFoundError as err:
        print(f"stage error: {err}", file=sys.stderr)
        return EXIT_STAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
