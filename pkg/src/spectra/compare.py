"""Prediction-versus-sample comparisons and the perturbation diagnostics for SBM samples."""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from src.core.graphon import Graphon, StepGraphon, refine
from src.core.homdensity import MomentTable, gram_moment_table, moment_table
from src.core.qve import DensityCurve, density_curve
from src.ensembles.samplers import EnsembleSample
from src.errors import ValidationError
from src.spectra.distances import (
    esd_moments,
    histogram_density,
    kolmogorov_distance,
    ks_to_curve,
    l1_density_distance,
    levy_cube_bound,
    levy_distance,
)
from src.spectra.eigen import Spectrum, eigenvalues_symmetric

log = logging.getLogger(__name__)

DEFAULT_BINS = 60
DEFAULT_POINTS = 801


def predicted_moments(W: Graphon, max_order: int, gram: bool = False, y: Optional[float] = None) -> MomentTable:
    W = refine(W)
    if gram:
        if y is None:
            raise ValidationError("Gram predictions need the aspect ratio y")
        return gram_moment_table(W, y, max_order)
    return moment_table(W, max_order)


def predicted_range(W: StepGraphon, gram: bool = False, y: Optional[float] = None) -> tuple[float, float]:
    """Interval containing the limiting support, with a margin for the eta-smearing."""
    edge = 2.0 * np.sqrt(W.sup_norm)
    if gram:
        # the Gram spectrum is the squared symmetrized one, rescaled by (1+y)
        top = (1.0 + y) * edge**2
        return -0.25, top + 0.5
    return -edge - 0.5, edge + 0.5


def moment_deltas(predicted: MomentTable, empirical: MomentTable) -> list[dict]:
    rows = []
    for k in range(1, min(predicted.max_order, empirical.max_order) + 1):
        p, e = predicted[k], empirical[k]
        rows.append(
            {
                "order": k,
                "predicted": p,
                "empirical": e,
                "delta": e - p,
                "relative": (e - p) / p if p != 0 else None,
            }
        )
    return rows


def compare_spectrum(
    sp: Spectrum,
    W: Graphon,
    max_order: int,
    eta: float,
    gram: bool = False,
    y: Optional[float] = None,
    bins: int = DEFAULT_BINS,
    points: int = DEFAULT_POINTS,
    curve: Optional[DensityCurve] = None,
) -> dict:
    """Moment deltas, KS distance to the QVE CDF and L1 distance between histogram and QVE density.

    ``curve`` lets repeated comparisons against the same prediction reuse one density sweep.
    """
    W = refine(W)
    predicted = predicted_moments(W, max_order, gram, y)
    empirical = esd_moments(sp, max_order)
    if curve is None:
        lo, hi = predicted_range(W, gram, y)
        curve = density_curve(W, lo, hi, points, eta, gram=gram, y=y)
    lo, hi = curve.support
    hist = histogram_density(sp, bins, (lo, hi))
    report = {
        "n": sp.n,
        "moments": moment_deltas(predicted, empirical),
        "ks_to_qve_cdf": ks_to_curve(sp, curve),
        "l1_density": l1_density_distance(hist, curve),
        "eta": eta,
        "qve_failures": len(curve.failures),
    }
    log.debug("compared n=%d spectrum: ks=%.4f l1=%.4f", sp.n, report["ks_to_qve_cdf"], report["l1_density"])
    return report


def sbm_perturbation_report(sample: EnsembleSample) -> dict:
    """Checks the two perturbation bounds used to reduce the SBM to a Wigner-type matrix.

    - Levy^3 between the ESDs of A/(sigma sqrt n) and (A - EA)/(sigma sqrt n) is at most
      (1/n) tr of the squared difference;
    - with the diagonal sampled, removing the mean (rank at most d) moves the ESD by at
      most d/n in Kolmogorov distance.
    """
    if sample.metadata.get("kind") != "sbm":
        raise ValidationError("perturbation diagnostics apply to SBM samples")
    n = sample.n
    d = int(sample.metadata["d"])
    scaled = eigenvalues_symmetric(sample.get("scaled"))
    centered = eigenvalues_symmetric(sample.get("centered"))
    levy = levy_distance(scaled, centered)
    bound = levy_cube_bound(sample.get("scaled"), sample.get("centered"))

    tilde = eigenvalues_symmetric(sample.get("tilde"))
    tilde_centered = eigenvalues_symmetric(sample.get("tilde_centered"))
    ks = kolmogorov_distance(tilde, tilde_centered)
    return {
        "n": n,
        "d": d,
        "levy": levy,
        "levy_cubed": levy**3,
        "levy_cube_bound": bound,
        "levy_bound_holds": levy**3 <= bound,
        "rank_ks": ks,
        "rank_bound": d / n,
        "rank_bound_holds": ks <= d / n,
    }
