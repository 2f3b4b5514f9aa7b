"""Quadratic vector equations for the limiting Stieltjes transform.

Sign convention: s(z) = integral of 1/(z - x) dmu(x), which maps the upper half plane
to the lower one. (The QVE literature usually uses the opposite sign.) Every
Herglotz-type check in this package is stated in this convention: Im a_i < 0 and
Im s < 0 whenever Im z > 0.

For a step graphon the equation a_i^{-1} = z - sum_j weights[i, j] fractions[j] a_j
has a block-constant solution, so solving it in block form involves no discretization.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from src.config import get_settings
from src.core.graphon import Graphon, StepGraphon, bipartite_blocks, refine
from src.core.homdensity import MomentTable, rooted_moment_vector
from src.errors import DomainError, NonConvergenceError, ValidationError

log = logging.getLogger(__name__)

DAMPING = 0.5


@dataclass(frozen=True)
class QveSolution:
    z: complex
    a: np.ndarray
    s: complex
    residual: float
    iterations: int
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "z": [self.z.real, self.z.imag],
            "s": [self.s.real, self.s.imag],
            "residual": self.residual,
            "iterations": self.iterations,
            **self.metadata,
        }


@dataclass(frozen=True)
class GramQveSolution:
    z: complex
    b: np.ndarray
    s: complex
    residual: float
    iterations: int
    aspect: float
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "z": [self.z.real, self.z.imag],
            "s": [self.s.real, self.s.imag],
            "residual": self.residual,
            "iterations": self.iterations,
            "aspect": self.aspect,
            **self.metadata,
        }


@dataclass(frozen=True)
class DensityCurve:
    energies: np.ndarray
    rho: np.ndarray
    eta: float
    kind: str = "qve"
    # (energy, last residual) for every grid point whose solve did not converge
    failures: tuple[tuple[float, float], ...] = ()

    @property
    def support(self) -> tuple[float, float]:
        # histogram energies are bin midpoints and eta is the bin width
        if self.kind == "histogram":
            return float(self.energies[0] - self.eta / 2), float(self.energies[-1] + self.eta / 2)
        return float(self.energies[0]), float(self.energies[-1])

    def integral(self) -> float:
        rho = np.nan_to_num(self.rho, nan=0.0)
        if self.kind == "histogram":
            return float(rho.sum() * self.eta)
        return float(np.sum(np.diff(self.energies) * (rho[1:] + rho[:-1]) / 2.0))

    def cdf(self) -> np.ndarray:
        """Cumulative trapezoid of the curve, normalized to end at 1."""
        rho = np.nan_to_num(self.rho, nan=0.0)
        steps = np.diff(self.energies) * (rho[1:] + rho[:-1]) / 2.0
        cum = np.concatenate([[0.0], np.cumsum(steps)])
        return cum / cum[-1] if cum[-1] > 0 else cum

    def at(self, energies) -> np.ndarray:
        energies = np.asarray(energies, dtype=float)
        if self.kind == "histogram":
            lo, hi = self.support
            idx = np.clip(np.floor((energies - lo) / self.eta).astype(int), 0, len(self.rho) - 1)
            return np.where((energies >= lo) & (energies <= hi), self.rho[idx], 0.0)
        return np.interp(energies, self.energies, np.nan_to_num(self.rho, nan=0.0), left=0.0, right=0.0)

    def to_rows(self) -> list[dict]:
        return [{"E": float(e), "rho": float(r)} for e, r in zip(self.energies, self.rho)]


def _check_z(z: complex) -> complex:
    z = complex(z)
    if z.imag <= 0:
        raise DomainError(f"spectral parameter must have Im z > 0, got {z}")
    return z


def _defaults(tol: Optional[float], max_iter: Optional[int]) -> tuple[float, int]:
    settings = get_settings()
    tol = settings.qve_tol if tol is None else tol
    max_iter = settings.qve_max_iter if max_iter is None else max_iter
    if tol <= 0:
        raise ValidationError("tolerance must be positive")
    return tol, max_iter


def solve_qve(
    W: Graphon,
    z: complex,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    initial: Optional[np.ndarray] = None,
) -> QveSolution:
    z = _check_z(z)
    tol, max_iter = _defaults(tol, max_iter)
    metadata: dict = {}
    if not isinstance(W, StepGraphon):
        W = refine(W)
        metadata["refinement_panels"] = W.d
    # op[i, j] = weights[i, j] * fractions[j], so (op @ a)_i is the integral of W(x, .) a(.)
    op = W.operator.astype(complex)
    # 1/z is the large-|z| behaviour of every a_i and already has Im < 0
    a = np.full(W.d, 1.0 / z, dtype=complex) if initial is None else np.array(initial, dtype=complex)

    residual = np.inf
    for iteration in range(max_iter + 1):
        denom = z - op @ a
        # relative residual of a_i^{-1} = denom_i, measured as |a_i denom_i - 1|
        residual = float(np.max(np.abs(a * denom - 1.0)))
        if residual <= tol:
            s = complex(W.fractions @ a)
            return QveSolution(z, a, s, residual, iteration, metadata)
        # damped update: a convex combination of the old iterate and 1/denom
        a = (1.0 - DAMPING) * a + DAMPING / denom
    raise NonConvergenceError(f"QVE did not converge at z={z}", residual, max_iter, z)


def solve_gram_qve(
    W: Graphon,
    y: float,
    z: complex,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    initial: Optional[np.ndarray] = None,
) -> GramQveSolution:
    """Gram equation on the left blocks of a symmetrized graphon.

    b_i^{-1} = z - sum_v S[i, v] g_v / ((1+y)^{-1} - sum_t S[t, v] f_t b_t), with f, g the
    absolute measures of the left and right blocks; s = (1+y)/y * sum_i f_i b_i.
    """
    z = _check_z(z)
    tol, max_iter = _defaults(tol, max_iter)
    metadata: dict = {}
    if not isinstance(W, StepGraphon):
        W = refine(W)
        metadata["refinement_panels"] = W.d
    # the left blocks carry mass y/(1+y); everything below lives on them
    p = bipartite_blocks(W, y)
    f = W.fractions[:p]
    g = W.fractions[p:]
    S = W.weights[:p, p:]
    inner_op = (S * f[:, None]).T.astype(complex)  # (v, t) -> S[t, v] f_t
    outer_op = (S * g[None, :]).astype(complex)  # (i, v) -> S[i, v] g_v
    base = 1.0 / (1.0 + y)
    b = np.full(p, 1.0 / z, dtype=complex) if initial is None else np.array(initial, dtype=complex)

    residual = np.inf
    for iteration in range(max_iter + 1):
        # the right-block unknowns are eliminated: c_v = 1 / (base - sum_t S[t, v] f_t b_t)
        denom = z - outer_op @ (1.0 / (base - inner_op @ b))
        residual = float(np.max(np.abs(b * denom - 1.0)))
        if residual <= tol:
            s = complex((1.0 + y) / y * (f @ b))
            return GramQveSolution(z, b, s, residual, iteration, float(y), metadata)
        b = (1.0 - DAMPING) * b + DAMPING / denom
    raise NonConvergenceError(f"Gram QVE did not converge at z={z}", residual, max_iter, z)


def gram_transform_from_wigner(W: StepGraphon, y: float, z: complex, tol: Optional[float] = None) -> complex:
    """Gram transform assembled from the symmetrized Wigner-type transform m by change of variables."""
    z = _check_z(z)
    bipartite_blocks(W, y)
    zeta = np.sqrt(z / (1.0 + y))
    m = solve_qve(W, zeta, tol=tol).s
    return complex(np.sqrt((1.0 + y) / z) * m / (2.0 * y) + (y - 1.0) / (2.0 * y * z))


def density_curve(
    W: Graphon,
    e_min: float,
    e_max: float,
    points: int,
    eta: float,
    gram: bool = False,
    y: Optional[float] = None,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> DensityCurve:
    """rho(E) = -Im s(E + i eta) / pi on a uniform grid, warm-starting each point from the last.

    One sweep is sequential by construction; independent sweeps can run in parallel.
    """
    if eta <= 0:
        raise ValidationError("eta must be positive")
    if points < 2:
        raise ValidationError("a density curve needs at least 2 points")
    if gram and y is None:
        raise ValidationError("a Gram density needs the aspect ratio y")
    if not isinstance(W, StepGraphon):
        W = refine(W)
    energies = np.linspace(e_min, e_max, points)
    rho = np.empty(points)
    failures = []
    # each solve starts from the previous grid point's solution; a failure resets to 1/z
    warm = None
    for idx, energy in enumerate(energies):
        z = complex(energy, eta)
        try:
            if gram:
                sol = solve_gram_qve(W, y, z, tol=tol, max_iter=max_iter, initial=warm)
                warm = sol.b
            else:
                sol = solve_qve(W, z, tol=tol, max_iter=max_iter, initial=warm)
                warm = sol.a
            rho[idx] = -sol.s.imag / np.pi
        except NonConvergenceError as exc:
            log.warning("density point E=%.6g did not converge: %s", energy, exc)
            failures.append((float(energy), exc.residual))
            rho[idx] = np.nan
            warm = None
    return DensityCurve(energies, rho, float(eta), "gram-qve" if gram else "qve", tuple(failures))


# series expansion -----------------------------------------------------------


def series_moments(W: StepGraphon, max_order: int) -> MomentTable:
    """Moments read off the large-|z| expansion a(z, x) = sum_k beta_2k(x) / z^(2k+1)."""
    entries = {0: 1.0}
    for order in range(1, max_order + 1):
        entries[order] = rooted_moment_vector(order // 2, W).average(W) if order % 2 == 0 else 0.0
    return MomentTable(entries, "qve-series", max_order, {"d": W.d})


def series_transform(table: MomentTable, z: complex) -> complex:
    z = complex(z)
    return complex(sum(value / z ** (order + 1) for order, value in table.entries.items()))


def transform_moments(
    transform: Callable[[complex], complex], max_order: int, radius: float, points: int = 64
) -> MomentTable:
    """Moments of a measure from its transform by trapezoidal quadrature on |z| = radius.

    Only upper-half-plane points are solved; the rest use s(conj z) = conj s(z). The
    radius must exceed the support.
    """
    if points % 2:
        raise ValidationError("quadrature needs an even number of points")
    theta = 2.0 * np.pi * (np.arange(points) + 0.5) / points
    nodes = radius * np.exp(1j * theta)
    values = np.empty(points, dtype=complex)
    half = points // 2
    for j in range(half):
        values[j] = transform(nodes[j])
        values[points - 1 - j] = np.conj(values[j])
    # m_k = (1/2 pi i) contour integral of z^k s(z) dz, and dz = i z dtheta on the circle
    entries = {}
    for k in range(max_order + 1):
        entries[k] = float(np.mean(nodes ** (k + 1) * values).real)
    return MomentTable(entries, "qve-transform", max_order, {"radius": radius, "points": points})


# closed forms ----------------------------------------------------------------


def semicircle_transform(z: complex, variance: float = 1.0) -> complex:
    """Semicircle transform on the branch vanishing at infinity."""
    z = complex(z) / np.sqrt(variance)
    root = np.sqrt(z - 2.0) * np.sqrt(z + 2.0)
    return complex((z - root) / 2.0 / np.sqrt(variance))


def marchenko_pastur_transform(z: complex, y: float = 1.0) -> complex:
    """Transform of the Marchenko-Pastur law with ratio y (unit variance)."""
    z = complex(z)
    lo, hi = (1.0 - np.sqrt(y)) ** 2, (1.0 + np.sqrt(y)) ** 2
    root = np.sqrt(z - lo) * np.sqrt(z - hi)
    return complex((z + y - 1.0 - root) / (2.0 * y * z))
