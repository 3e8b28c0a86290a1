import argparse
import logging
import sys

from src.config_loader import load_config  # Loads and validates the JSON pipeline config
from src.errors import ConfigError, StageError, WikisustainError
from src.logger_setup import setup_logger  # Rotating file logger setup
from src.pipeline import STAGES, Pipeline  # Stage runner with content-hash skipping
from src.synthetic_corpus import generate  # Bundled desk corpus
from src.utils import cleanup_old_logs, handle_error, safely_execute  # Common utility functions

EXIT_OK = 0
EXIT_STAGE_FAILED = 1
EXIT_CONFIG = 2


def build_parser():
    parser = argparse.ArgumentParser(
        prog="wikisustain",
        description="Predict whether Featured and Good Wikipedia articles keep their quality status.",
    )
    parser.add_argument("--config", help="Pipeline config (JSON); defaults apply when omitted")
    parser.add_argument("--use-case", choices=("fa", "ga"), help="Override the configured use case")
    parser.add_argument("--seed", type=int, help="Override the configured seed")
    parser.add_argument("--verbose", action="store_true", help="Log at DEBUG level")
    subcommands = parser.add_subparsers(dest="command", required=True)
    for stage in STAGES + ("all",):
        subcommands.add_parser(stage, help=f"Run the {stage} stage" if stage != "all" else "Run every stage")
    synth = subcommands.add_parser("synth", help="Write the synthetic 50-article corpus and its config")
    synth.add_argument("--out", required=True, help="Output directory")
    return parser


def run(argv=None):
    """
    Main entry point for wikisustain.

    Returns:
        int: 0 on success, 2 for configuration or missing-input errors, 1 when a stage fails
    """
    args = build_parser().parse_args(argv)

    if args.command == "synth":
        setup_logger(log_level=logging.DEBUG if args.verbose else logging.INFO)
        paths = generate(args.out)
        print(paths["config"])
        return EXIT_OK

    overrides = {"use_case": args.use_case.upper() if args.use_case else None, "seed": args.seed}
    try:
        config = load_config(args.config, overrides)
    except ConfigError as e:
        print(f"wikisustain: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    settings = config["settings"]
    setup_logger(log_dir=settings["log_dir"], log_level="DEBUG" if args.verbose else settings["log_level"])
    safely_execute(cleanup_old_logs, (settings["log_dir"], settings["log_retention_days"]), error_type="log_cleanup",
                   default_return=0)
    logging.info(f"Starting wikisustain {args.command} ({config['use_case']}, seed {config['seed']})...")

    try:
        executed = Pipeline(config).run(args.command)
    except ConfigError as e:
        logging.error(f"Config error: {e}")
        print(f"wikisustain: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except StageError as e:
        print(f"wikisustain: {e}", file=sys.stderr)
        return EXIT_STAGE_FAILED
    except WikisustainError as e:
        handle_error(e, "main_function", with_traceback=True)
        print(f"wikisustain: {e}", file=sys.stderr)
        return EXIT_STAGE_FAILED
    logging.info(f"Finished; stages run: {', '.join(executed) or 'none (all up to date)'}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(run())
