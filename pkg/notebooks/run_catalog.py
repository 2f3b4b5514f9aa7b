# Runs every builtin experiment in catalog order, one report directory per experiment
# under <output_root>/experiments/<name>/, and persists each report to the runs table
# so the API can serve it (GET /runs/{name}).
#
# This is the "run the whole thing" entrypoint; single experiments go through
#   graphon-spectra experiment run <name>

from __future__ import annotations

import logging
import sys

from src.errors import StageError

from pipelines.experiments.catalog import builtin_experiments
from pipelines.experiments.runner import default_output_dir, run_experiment

log = logging.getLogger(__name__)


def main() -> int:
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    configs = builtin_experiments()
    failed = []
    for cfg in configs:
        try:
            report = run_experiment(cfg, output_dir=default_output_dir(cfg), persist=True)
        except StageError as exc:
            # keep going: one broken experiment should not hide the others
            log.error("%s: %s", cfg.name, exc)
            failed.append(cfg.name)
            continue
        if report["passed"] is False:
            failed.append(cfg.name)
        log.info("%s: %s", cfg.name, "passed" if report["passed"] else "FAILED")

    log.info("Ran %d experiments, %d failed%s", len(configs), len(failed), f": {', '.join(failed)}" if failed else "")
    return 2 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
