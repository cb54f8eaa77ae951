import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from config.scenario import ScenarioConfig
from config.settings import VERSION
from core.exceptions import ConfigurationError, KirchhoffError
from core.oracle1d import oracle_report
from pipeline.construct import Mode
from pipeline.orchestrator import EXIT_CONFIG_ERROR, EXIT_OK, CertificationPipeline
from utils.helpers import format_summary, parse_key_value_args, validate_environment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kirchhoff-certify",
        description="Construct and certify counterexamples to comparison and sub/supersolution "
                    "principles for -M(||u||^2) Laplace u",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    parser.add_argument(
        "--oracle",
        nargs="+",
        metavar="KEY=VALUE",
        help="Print 1D reference values, e.g. --oracle tau=0.5 eps=0.5 alpha=1",
    )
    subparsers = parser.add_subparsers(dest="command")
    for name, help_text in (
        ("run", "Run the scenario in its configured mode"),
        ("classify", "Classify the scenario's coefficient M"),
    ):
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("config", type=str, help="Scenario JSON file (or bundled scenario name)")
        sub.add_argument("--h", type=float, help="Override the mesh size")
        sub.add_argument("--out", type=str, help="Report path (plot data goes next to it as .csv)")
        sub.add_argument(
            "--dump-config",
            action="store_true",
            help="Print the normalized scenario and exit",
        )
    return parser


def run_oracle(items: List[str]) -> int:
    try:
        values = parse_key_value_args(items)
        if "tau" not in values:
            raise ConfigurationError("--oracle needs tau=..")
        report = oracle_report(values["tau"], values.get("epsilon", 1.0), values.get("alpha", 1.0))
    except KirchhoffError as e:
        print(f"Error: {e}")
        return EXIT_CONFIG_ERROR
    print(json.dumps(report.to_dict(), indent=2))
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.oracle:
        return run_oracle(args.oracle)
    if args.command is None:
        parser.print_help()
        return EXIT_CONFIG_ERROR

    for issue in validate_environment():
        print(f"Warning: {issue}")

    try:
        config = ScenarioConfig.load(Path(args.config))
        if args.command == "classify":
            config = config.with_overrides(mode=Mode.CLASSIFY)
        config = config.with_overrides(h=args.h)
    except ConfigurationError as e:
        print(f"Configuration error: {e}")
        return EXIT_CONFIG_ERROR

    if args.dump_config:
        print(config.dumps())
        return EXIT_OK

    results = CertificationPipeline().run(config, Path(args.out) if args.out else None)
    for line in format_summary(results):
        print(line)
    return results["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
