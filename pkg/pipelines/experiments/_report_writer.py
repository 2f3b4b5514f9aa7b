from __future__ import annotations

from pathlib import Path

from src.core.homdensity import MomentTable
from src.core.qve import DensityCurve
from src.io.writers import write_json, write_rows

# Shared writer for experiment outputs, used by pipelines/experiments/runner.py.
# One directory per experiment holds:
#   report.json          the full report (canonical JSON, so reruns can be diffed byte for byte)
#   predicted_moments.csv
#   qve_density.csv      the predicted density curve, ready for plotting elsewhere
# Files are overwritten on rerun; the report carries its own timestamp.


def write_report(report: dict, table: MomentTable, curve: DensityCurve, output_dir: str | Path) -> dict[str, str]:
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)  # parents=True makes the whole tree as needed

    paths = {
        "report": write_json(report, output_dir / "report.json"),
        "moments": write_rows(table.to_rows(), output_dir / "predicted_moments.csv"),
        "density": write_rows(curve.to_rows(), output_dir / "qve_density.csv"),
    }
    return {key: str(path) for key, path in paths.items()}
