"""Statistics of empirical spectra: moments, Stieltjes transforms, histograms and CDF distances."""

from __future__ import annotations

import logging

import numpy as np

from src.core.homdensity import MomentTable
from src.core.qve import DensityCurve
from src.errors import DomainError, ValidationError
from src.spectra.eigen import Spectrum

log = logging.getLogger(__name__)

LEVY_BISECTIONS = 200
L1_GRID_POINTS = 4001


def esd_moments(sp: Spectrum, max_order: int) -> MomentTable:
    """(1/n) sum_i lambda_i^k for k = 0..max_order."""
    if max_order < 0:
        raise ValidationError("max_order must be non-negative")
    entries = {0: 1.0}
    for k in range(1, max_order + 1):
        entries[k] = float(np.mean(sp.eigenvalues**k))
    return MomentTable(entries, "empirical", max_order, {"n": sp.n})


def empirical_stieltjes(sp: Spectrum, z: complex) -> complex:
    z = complex(z)
    if z.imag == 0:
        raise DomainError(f"the empirical transform needs Im z != 0, got {z}")
    return complex(np.mean(1.0 / (z - sp.eigenvalues)))


def empirical_cdf(sp: Spectrum, x) -> np.ndarray:
    """Right-continuous step CDF of the spectrum."""
    return np.searchsorted(sp.eigenvalues, x, side="right") / sp.n


def kolmogorov_distance(sp1: Spectrum, sp2: Spectrum) -> float:
    """Sup distance between two step CDFs, computed from integer counts.

    The gap max|c1 n2 - c2 n1| is exact, so a distance of exactly k/n comes out as the
    correctly rounded k/n and compares exactly against bounds of that form.
    """
    # both CDFs are constant between merged breakpoints
    points = np.union1d(sp1.eigenvalues, sp2.eigenvalues)
    c1 = np.searchsorted(sp1.eigenvalues, points, side="right").astype(np.int64)
    c2 = np.searchsorted(sp2.eigenvalues, points, side="right").astype(np.int64)
    gap = int(np.max(np.abs(c1 * sp2.n - c2 * sp1.n)))
    return gap / (sp1.n * sp2.n)


def _within_band(sp1: Spectrum, sp2: Spectrum, eps: float) -> bool:
    """F(x - eps) - eps <= G(x) <= F(x + eps) + eps for all x.

    Each side only has to be checked at the jumps of the larger function: between its
    jumps it is constant while the other side only grows.
    """
    g_at = empirical_cdf(sp2, sp2.eigenvalues)
    if np.any(g_at > empirical_cdf(sp1, sp2.eigenvalues + eps) + eps):
        return False
    f_at = empirical_cdf(sp1, sp1.eigenvalues)
    return not np.any(f_at > empirical_cdf(sp2, sp1.eigenvalues + eps) + eps)


def levy_distance(sp1: Spectrum, sp2: Spectrum) -> float:
    """Smallest eps for which the two step CDFs stay inside each other's eps-band.

    The feasible set is [L, inf) and eps = Kolmogorov distance is always feasible, so the
    bisection starts there; it runs until the bracket stops shrinking in floating point, so the
    result is the smallest feasible eps up to a few ulps (absolute error below 1e-15 for
    distances of order one). The returned eps always passed the band check.
    """
    if _within_band(sp1, sp2, 0.0):
        return 0.0
    lo, hi = 0.0, min(1.0, kolmogorov_distance(sp1, sp2))
    for _ in range(LEVY_BISECTIONS):
        mid = (lo + hi) / 2.0
        if mid <= lo or mid >= hi:
            break
        if _within_band(sp1, sp2, mid):
            hi = mid
        else:
            lo = mid
    return float(hi)


def levy_cube_bound(A, B) -> float:
    """(1/n) tr((A - B)(A - B)^T), the bound on the cube of the Levy distance between the ESDs."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError(f"matrices must be square with equal shapes, got {A.shape} and {B.shape}")
    diff = A - B
    return float(np.sum(diff * diff) / A.shape[0])


def histogram_density(sp: Spectrum, bins: int, range: tuple[float, float]) -> DensityCurve:
    """Normalized histogram on bin midpoints; bins are right-open except the last."""
    lo, hi = float(range[0]), float(range[1])
    if bins < 1:
        raise ValidationError("bins must be at least 1")
    if not hi > lo:
        raise ValidationError(f"empty histogram range [{lo}, {hi}]")
    counts, edges = np.histogram(sp.eigenvalues, bins=bins, range=(lo, hi))
    inside = int(counts.sum())
    if inside == 0:
        raise ValidationError(f"no eigenvalues fall in [{lo}, {hi}]")
    if inside < sp.n:
        log.debug("%d of %d eigenvalues fall outside the histogram range", sp.n - inside, sp.n)
    width = (hi - lo) / bins
    mids = (edges[:-1] + edges[1:]) / 2.0
    return DensityCurve(mids, counts / (inside * width), float(width), "histogram")


def l1_density_distance(a: DensityCurve, b: DensityCurve, points: int = L1_GRID_POINTS) -> float:
    """Integral of |rho_a - rho_b| over the union of both supports (trapezoid on a fine grid)."""
    lo = min(a.support[0], b.support[0])
    hi = max(a.support[1], b.support[1])
    grid = np.linspace(lo, hi, points)
    gap = np.abs(a.at(grid) - b.at(grid))
    return float(np.sum(np.diff(grid) * (gap[1:] + gap[:-1]) / 2.0))


def ks_to_curve(sp: Spectrum, curve: DensityCurve) -> float:
    """Sup distance between the empirical CDF and the normalized CDF of a predicted density.

    The predicted CDF is continuous, so the sup is attained at an eigenvalue on one side of
    its jump.
    """
    predicted = np.interp(sp.eigenvalues, curve.energies, curve.cdf(), left=0.0, right=1.0)
    upper = np.arange(1, sp.n + 1) / sp.n
    lower = np.arange(0, sp.n) / sp.n
    return float(max(np.max(upper - predicted), np.max(predicted - lower)))
