"""The ``graphon-spectra`` command.

Every flag can also come from ``--config file.json``, one section per subcommand (for
example ``{"moments": {"max_order": 8}}``); flags on the command line win over the file,
and the file wins over the built-in defaults.

Exit codes: 0 success, 2 tolerance failure, 3 configuration error, 4 numerical
non-convergence, 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from src import __version__
from src.config import get_settings
from src.core.graphon import cut_distance_upper, cut_norm_detail, refine
from src.core.homdensity import MomentTable
from src.core.qve import density_curve, series_moments, solve_gram_qve, solve_qve
from src.core.trees import catalan, enumerate_trees, tree_to_dyck
from src.ensembles.samplers import sample
from src.errors import (
    ConfigError,
    GraphonSpectraError,
    NonConvergenceError,
    SizeCapError,
    StageError,
    ValidationError,
)
from src.io.graphon_json import load_graphon
from src.io.sample_binary import read_matrix, write_sample
from src.io.spec_json import load_spec
from src.io.writers import canonical_json, csv_text, write_json, write_rows
from src.spectra.compare import compare_spectrum, predicted_moments
from src.spectra.eigen import eigenvalues_symmetric

from pipelines.experiments.catalog import experiment_names, get_experiment
from pipelines.experiments.config import load_config
from pipelines.experiments.runner import default_output_dir, run_experiment

log = logging.getLogger("graphon_spectra")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_TOLERANCE = 2
EXIT_CONFIG = 3
EXIT_NONCONVERGENCE = 4

# built-in defaults, applied after the config file
DEFAULTS: dict[str, dict] = {
    "trees": {"k": 3, "format": "dyck"},
    "cutnorm": {"method": "auto"},
    "moments": {"max_order": 6, "source": "trees"},
    "qve": {},
    "density": {"emin": -3.0, "emax": 3.0, "points": 601, "eta": 0.01},
    "sample": {},
    "esd": {"backend": "auto"},
    "compare": {"max_order": 6, "eta": 0.05, "bins": 60, "points": 801},
    "experiment": {},
}


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which here means a tolerance failure
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _emit(doc, out: Optional[str]) -> None:
    if out:
        path = write_json(doc, out)
        log.info("Wrote %s", path)
    else:
        sys.stdout.write(canonical_json(doc))


def _gram_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gram", action="store_true", default=None, help="Gram (rectangular) model")
    p.add_argument("--aspect", type=float, default=None, help="aspect ratio y = m/n for --gram")


# commands -----------------------------------------------------------------------


def cmd_trees(args) -> int:
    trees = enumerate_trees(args.k)
    rows = [{"index": i, "dyck": tree_to_dyck(t), "parent": " ".join(map(str, t.parent))} for i, t in enumerate(trees)]
    if args.out:
        log.info("Wrote %d trees to %s", len(rows), write_rows(rows, args.out))
        return EXIT_OK
    for row in rows:
        sys.stdout.write(row[args.format] + "\n")
    log.info("%d trees with %d edges (C_%d = %d)", len(rows), args.k, args.k, catalan(args.k))
    return EXIT_OK


def cmd_cutnorm(args) -> int:
    W = refine(load_graphon(args.graphon))
    if args.other:
        value = cut_distance_upper(W, refine(load_graphon(args.other)))
        _emit({"cut_distance_upper": value}, args.out)
        return EXIT_OK
    exact = {"auto": None, "exact": True, "heuristic": False}[args.method]
    result = cut_norm_detail(W, exact=exact)
    _emit({"cut_norm": result.value, "exact": result.exact}, args.out)
    return EXIT_OK


def cmd_moments(args) -> int:
    W = refine(load_graphon(args.graphon))
    if args.source == "series":
        if args.gram:
            raise ValidationError("the series source is only defined for Wigner-type moments")
        table: MomentTable = series_moments(W, args.max_order)
    else:
        table = predicted_moments(W, args.max_order, bool(args.gram), args.aspect)
    if args.out:
        log.info("Wrote moments to %s", write_rows(table.to_rows(), args.out))
    else:
        sys.stdout.write(csv_text(table.to_rows()))
    return EXIT_OK


def cmd_qve(args) -> int:
    # the solvers refine analytic kernels themselves and record the panel count
    W = load_graphon(args.graphon)
    z = complex(args.z_re, args.z_im)
    if args.gram:
        if args.aspect is None:
            raise ValidationError("--gram needs --aspect")
        sol = solve_gram_qve(W, args.aspect, z)
    else:
        sol = solve_qve(W, z)
    _emit(sol.to_dict(), args.out)
    return EXIT_OK


def cmd_density(args) -> int:
    W = refine(load_graphon(args.graphon))
    curve = density_curve(W, args.emin, args.emax, args.points, args.eta, gram=bool(args.gram), y=args.aspect)
    if args.out:
        log.info("Wrote %d density points to %s", curve.energies.size, write_rows(curve.to_rows(), args.out))
    else:
        sys.stdout.write(csv_text(curve.to_rows()))
    if curve.failures:
        log.warning("%d grid points did not converge", len(curve.failures))
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def cmd_sample(args) -> int:
    spec = load_spec(args.spec)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    drawn = sample(spec)
    path = write_sample(drawn, args.out, args.matrix)
    log.info("Wrote %s sample (n=%d, seed=%d) to %s", spec.kind, drawn.n, spec.seed, path)
    return EXIT_OK


def cmd_esd(args) -> int:
    mf = read_matrix(args.input)
    sp = eigenvalues_symmetric(mf.matrix, backend=args.backend)
    path = write_rows(sp.to_rows(), args.out)
    log.info("Wrote %d eigenvalues to %s (residual %.3e)", sp.n, path, sp.metadata["residual"])
    return EXIT_OK


def cmd_compare(args) -> int:
    W = refine(load_graphon(args.graphon))
    mf = read_matrix(args.input)
    sp = eigenvalues_symmetric(mf.matrix)
    report = compare_spectrum(sp, W, args.max_order, args.eta, bool(args.gram), args.aspect, bins=args.bins, points=args.points)
    failed = []
    if args.ks_tol is not None and report["ks_to_qve_cdf"] > args.ks_tol:
        failed.append("ks")
    if args.moment_tol is not None:
        for row in report["moments"]:
            if row["order"] % 2 == 0 and row["relative"] is not None and abs(row["relative"]) > args.moment_tol:
                failed.append(f"moment-{row['order']}")
    report["failed"] = failed
    _emit(report, args.out)
    return EXIT_TOLERANCE if failed else EXIT_OK


def cmd_experiment(args) -> int:
    if args.action == "list":
        for name in experiment_names():
            sys.stdout.write(name + "\n")
        return EXIT_OK
    if args.file:
        cfg = load_config(args.file)
    elif args.name:
        cfg = get_experiment(args.name)
    else:
        raise ConfigError("experiment run needs a builtin name or --file")
    if args.seeds is not None:
        cfg = cfg.with_seeds(args.seeds)
    out = args.out or cfg.output_dir or default_output_dir(cfg)
    report = run_experiment(cfg, threads=args.threads, output_dir=out, persist=bool(args.persist))
    status = "prediction only" if report["passed"] is None else ("passed" if report["passed"] else "FAILED")
    sys.stdout.write(f"{cfg.name}: {status} (report in {Path(out) / 'report.json'})\n")
    return EXIT_TOLERANCE if report["passed"] is False else EXIT_OK


# parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="graphon-spectra", description="Limiting spectra of random matrices from graphons.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="JSON file with one section of defaults per subcommand")
    parser.add_argument("--log-level", default=None, help="overrides GRAPHON_SPECTRA_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("trees", help="enumerate rooted planar trees with k edges")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--format", choices=("dyck", "parent"), default=None)
    p.add_argument("--out", default=None, help="CSV file")
    p.set_defaults(handler=cmd_trees)

    p = sub.add_parser("cutnorm", help="cut norm of a step graphon, or cut distance bound to --other")
    p.add_argument("--graphon", required=True)
    p.add_argument("--other", default=None)
    method = p.add_mutually_exclusive_group()
    method.add_argument("--exact", dest="method", action="store_const", const="exact", default=None)
    method.add_argument("--heuristic", dest="method", action="store_const", const="heuristic")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_cutnorm)

    p = sub.add_parser("moments", help="predicted moments of the limiting spectral distribution")
    p.add_argument("--graphon", required=True)
    p.add_argument("--max-order", dest="max_order", type=int, default=None)
    p.add_argument("--source", choices=("trees", "series"), default=None)
    _gram_args(p)
    p.add_argument("--out", default=None, help="CSV file")
    p.set_defaults(handler=cmd_moments)

    p = sub.add_parser("qve", help="solve the quadratic vector equation at one point z")
    p.add_argument("--graphon", required=True)
    p.add_argument("--z-re", dest="z_re", type=float, required=True)
    p.add_argument("--z-im", dest="z_im", type=float, required=True)
    _gram_args(p)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_qve)

    p = sub.add_parser("density", help="predicted density on an energy grid")
    p.add_argument("--graphon", required=True)
    p.add_argument("--emin", type=float, default=None)
    p.add_argument("--emax", type=float, default=None)
    p.add_argument("--points", type=int, default=None)
    p.add_argument("--eta", type=float, default=None)
    _gram_args(p)
    p.add_argument("--out", default=None, help="CSV file")
    p.set_defaults(handler=cmd_density)

    p = sub.add_parser("sample", help="sample an ensemble into a GSPC matrix file")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None, help="overrides the seed in the spec")
    p.add_argument("--matrix", default=None, help="named matrix to write instead of the primary one")
    p.set_defaults(handler=cmd_sample)

    p = sub.add_parser("esd", help="eigenvalues of a GSPC matrix file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True, help="CSV file")
    p.add_argument("--backend", choices=("auto", "inrepo", "lapack"), default=None)
    p.set_defaults(handler=cmd_esd)

    p = sub.add_parser("compare", help="compare a sampled spectrum with the graphon prediction")
    p.add_argument("--graphon", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--max-order", dest="max_order", type=int, default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--bins", type=int, default=None)
    p.add_argument("--points", type=int, default=None)
    p.add_argument("--ks-tol", dest="ks_tol", type=float, default=None)
    p.add_argument("--moment-tol", dest="moment_tol", type=float, default=None)
    _gram_args(p)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_compare)

    p = sub.add_parser("experiment", help="run or list experiments")
    p.add_argument("action", choices=("run", "list"))
    p.add_argument("name", nargs="?", default=None, help="builtin experiment name")
    p.add_argument("--file", default=None, help="experiment config JSON")
    p.add_argument("--seeds", type=int, nargs="*", default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--persist", action="store_true", default=None)
    p.set_defaults(handler=cmd_experiment)
    return parser


def _apply_config(args) -> None:
    section: dict = {}
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        section = doc.get(args.command, {})
    for layer in (section, DEFAULTS.get(args.command, {})):
        for key, value in layer.items():
            key = key.replace("-", "_")
            if getattr(args, key, None) is None:
                setattr(args, key, value)


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, StageError):
        return _exit_code(exc.cause)
    if isinstance(exc, NonConvergenceError):
        return EXIT_NONCONVERGENCE
    if isinstance(exc, (ConfigError, ValidationError, SizeCapError, FileNotFoundError)):
        return EXIT_CONFIG
    return EXIT_ERROR


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        level = (args.log_level or get_settings().log_level).upper()
    except ConfigError as exc:
        sys.stderr.write(f"graphon-spectra: {exc}\n")
        return EXIT_CONFIG
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        _apply_config(args)
        return args.handler(args)
    except (GraphonSpectraError, FileNotFoundError) as exc:
        code = _exit_code(exc)
        log.error("%s", exc)
        return code
    except Exception:
        log.exception("unexpected failure")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
