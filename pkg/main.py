#!/usr/bin/env python
"""
kirchhoff-certify - counterexample certificates for nonlocal Kirchhoff problems
Simple entry point: runs the bundled 1D Kirchhoff scenario (M(t) = 1 + t).
"""

import sys

from config.scenario import ScenarioConfig
from config.settings import SCENARIOS_DIR
from pipeline.orchestrator import CertificationPipeline
from utils.helpers import format_summary


def main() -> int:
    print("kirchhoff-certify - sub/supersolution failure for M(t) = 1 + t on (-pi/2, pi/2)")
    print("=" * 60)

    config = ScenarioConfig.load(SCENARIOS_DIR / "kirchhoff_1d_ssm.json")
    results = CertificationPipeline().run(config)
    for line in format_summary(results):
        print(line)
    return results["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
