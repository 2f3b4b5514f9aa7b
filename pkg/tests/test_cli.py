from __future__ import annotations

import io
import json

import numpy as np
import pandas as pd
import pytest

from pipelines.experiments.catalog import experiment_names
from src import __version__
from src.cli import EXIT_CONFIG, EXIT_NONCONVERGENCE, EXIT_OK, EXIT_TOLERANCE, main
from src.config import get_settings
from src.core.graphon import StepGraphon, constant_graphon
from src.core.qve import semicircle_transform
from src.ensembles.samplers import EnsembleSpec
from src.io.graphon_json import dump_graphon
from src.io.spec_json import dump_spec


@pytest.fixture
def flat(tmp_path):
    return str(dump_graphon(constant_graphon(1.0), tmp_path / "flat.json"))


def test_trees(capsys):
    assert main(["trees", "--k", "2"]) == EXIT_OK
    assert capsys.readouterr().out == "UUDD\nUDUD\n"
    assert main(["trees", "--k", "2", "--format", "parent"]) == EXIT_OK
    assert capsys.readouterr().out == "-1 0 1\n-1 0 0\n"


def test_trees_to_csv(tmp_path):
    out = tmp_path / "trees.csv"
    assert main(["trees", "--k", "3", "--out", str(out)]) == EXIT_OK
    frame = pd.read_csv(out)
    assert len(frame) == 5
    assert frame["dyck"].iloc[0] == "UUUDDD"


def test_config_file_sections(tmp_path, capsys):
    cfg = tmp_path / "cli.json"
    cfg.write_text(json.dumps({"trees": {"k": 1}}), encoding="utf-8")
    assert main(["--config", str(cfg), "trees"]) == EXIT_OK
    assert capsys.readouterr().out == "UD\n"
    # the command line wins over the file
    assert main(["--config", str(cfg), "trees", "--k", "0"]) == EXIT_OK
    assert capsys.readouterr().out == "\n"
    assert main(["--config", str(tmp_path / "nope.json"), "trees"]) == EXIT_CONFIG


def test_usage_errors_are_config_errors(capsys):
    with pytest.raises(SystemExit) as info:
        main(["trees", "--k", "many"])
    assert info.value.code == EXIT_CONFIG
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_cutnorm(tmp_path, capsys):
    bipartite = StepGraphon(np.array([0.5, 0.5]), np.array([[0.0, 1.0], [1.0, 0.0]]))
    path = str(dump_graphon(bipartite, tmp_path / "bip.json"))
    assert main(["cutnorm", "--graphon", path]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["cut_norm"] == pytest.approx(0.5)
    assert doc["exact"] is True
    assert main(["cutnorm", "--graphon", path, "--heuristic"]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["exact"] is False
    assert doc["cut_norm"] == pytest.approx(0.5)
    assert main(["cutnorm", "--graphon", path, "--exact"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["exact"] is True
    with pytest.raises(SystemExit) as info:
        main(["cutnorm", "--graphon", path, "--exact", "--heuristic"])
    assert info.value.code == EXIT_CONFIG
    assert main(["cutnorm", "--graphon", path, "--other", path]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["cut_distance_upper"] == pytest.approx(0.0)


def test_moments(flat, tmp_path, capsys):
    assert main(["moments", "--graphon", flat, "--max-order", "4"]) == EXIT_OK
    frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
    assert list(frame.columns) == ["order", "value", "source"]
    assert list(frame["order"]) == [0, 1, 2, 3, 4]
    assert frame["value"].iloc[4] == pytest.approx(2.0)
    assert set(frame["source"]) == {"tree-density"}
    assert main(["moments", "--graphon", flat, "--source", "series", "--out", str(tmp_path / "m.csv")]) == EXIT_OK
    assert pd.read_csv(tmp_path / "m.csv")["value"].iloc[6] == pytest.approx(5.0)


def test_missing_graphon_file(tmp_path, caplog):
    assert main(["moments", "--graphon", str(tmp_path / "ghost.json")]) == EXIT_CONFIG
    assert "ghost.json" in caplog.text


def test_gram_moments_need_structure(flat):
    assert main(["moments", "--graphon", flat, "--gram", "--aspect", "1"]) == EXIT_CONFIG


def test_qve(flat, capsys):
    assert main(["qve", "--graphon", flat, "--z-re", "0", "--z-im", "1"]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    s = complex(*doc["s"])
    assert abs(s - semicircle_transform(1j)) < 1e-10
    assert main(["qve", "--graphon", flat, "--z-re", "0", "--z-im", "1", "--gram"]) == EXIT_CONFIG
    assert main(["qve", "--graphon", flat, "--z-re", "0", "--z-im", "0"]) == EXIT_CONFIG


def test_density(flat, tmp_path, monkeypatch):
    out = tmp_path / "rho.csv"
    assert main(["density", "--graphon", flat, "--points", "61", "--eta", "0.05", "--out", str(out)]) == EXIT_OK
    frame = pd.read_csv(out)
    assert list(frame.columns) == ["E", "rho"]
    assert len(frame) == 61
    monkeypatch.setenv("GRAPHON_SPECTRA_QVE_MAX_ITER", "1")
    get_settings.cache_clear()
    assert main(["density", "--graphon", flat, "--points", "5", "--out", str(out)]) == EXIT_NONCONVERGENCE


def test_qve_reports_the_refinement_of_an_analytic_graphon(tmp_path, capsys):
    path = tmp_path / "product.json"
    path.write_text(json.dumps({"kind": "analytic", "name": "product"}), encoding="utf-8")
    assert main(["qve", "--graphon", str(path), "--z-re", "0.5", "--z-im", "1"]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["refinement_panels"] == 256
    assert doc["s"][1] < 0


def test_density_prints_csv(flat, capsys):
    args = ["density", "--graphon", flat, "--emin", "-2", "--emax", "2", "--points", "11", "--eta", "0.05"]
    assert main(args) == EXIT_OK
    frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
    assert list(frame.columns) == ["E", "rho"]
    assert len(frame) == 11
    assert frame["E"].iloc[0] == pytest.approx(-2.0)
    assert frame["rho"].iloc[5] == pytest.approx(1 / np.pi, rel=0.05)


def test_sample_esd_compare(flat, tmp_path, capsys):
    spec = dump_spec(EnsembleSpec("wigner-type", 120, seed=5, graphon=constant_graphon(1.0)), tmp_path / "spec.json")
    matrix = tmp_path / "m.gspc"
    assert main(["sample", "--spec", str(spec), "--out", str(matrix), "--seed", "6"]) == EXIT_OK
    eigen = tmp_path / "ev.csv"
    assert main(["esd", "--in", str(matrix), "--out", str(eigen), "--backend", "lapack"]) == EXIT_OK
    assert len(pd.read_csv(eigen)) == 120

    report_path = tmp_path / "cmp.json"
    args = ["compare", "--graphon", flat, "--in", str(matrix), "--max-order", "4", "--bins", "20"]
    assert main(args + ["--out", str(report_path)]) == EXIT_OK
    report = json.loads(report_path.read_text(encoding="utf-8"))
    assert report["n"] == 120 and report["failed"] == []
    assert main(args + ["--ks-tol", "1e-9", "--moment-tol", "1e-9"]) == EXIT_TOLERANCE
    failed = json.loads(capsys.readouterr().out)["failed"]
    assert failed[0] == "ks" and "moment-2" in failed


def test_esd_rejects_missing_files(tmp_path):
    assert main(["esd", "--in", str(tmp_path / "none.gspc"), "--out", str(tmp_path / "ev.csv")]) == EXIT_CONFIG


def test_experiment_list(capsys):
    assert main(["experiment", "list"]) == EXIT_OK
    assert capsys.readouterr().out.split() == experiment_names()


def test_experiment_run_prediction_only(tmp_path, capsys):
    assert main(["experiment", "run", "semicircle-gw", "--seeds"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("semicircle-gw: prediction only")
    assert (tmp_path / "out" / "experiments" / "semicircle-gw" / "report.json").is_file()


def test_experiment_run_errors():
    assert main(["experiment", "run"]) == EXIT_CONFIG
    assert main(["experiment", "run", "no-such-experiment"]) == EXIT_CONFIG
