"""Dense symmetric eigenvalues with a residual certificate.

The in-repo path reduces A to tridiagonal form with Householder reflections and then
runs implicit-shift QL sweeps on the tridiagonal matrix. Every result is certified: a
few eigenpairs are rebuilt by inverse iteration and their residuals checked, and the
trace and Frobenius identities are verified against the matrix.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
from scipy.linalg import lu_factor, lu_solve, solve_banded

from src.config import get_settings
from src.errors import NonConvergenceError, SizeCapError, ValidationError

log = logging.getLogger(__name__)

Backend = Literal["auto", "inrepo", "lapack"]

SYMMETRY_TOL = 1e-9
RESIDUAL_TOL = 1e-8
IDENTITY_TOL = 1e-9
SPOT_CHECKS = 10
QL_MAX_SWEEPS = 60
EPS = np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class Spectrum:
    eigenvalues: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        values = np.asarray(self.eigenvalues, dtype=float).copy()
        if values.ndim != 1 or values.size == 0:
            raise ValidationError("a spectrum needs a non-empty 1-d array of eigenvalues")
        if np.any(np.diff(values) < 0):
            raise ValidationError("eigenvalues must be sorted ascending")
        values.setflags(write=False)
        object.__setattr__(self, "eigenvalues", values)

    @classmethod
    def from_values(cls, values, metadata: Optional[dict] = None) -> "Spectrum":
        return cls(np.sort(np.asarray(values, dtype=float)), dict(metadata or {}))

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]

    def to_rows(self) -> list[dict]:
        return [{"index": i, "eigenvalue": float(v)} for i, v in enumerate(self.eigenvalues)]


@dataclass(frozen=True)
class Tridiagonal:
    diagonal: np.ndarray
    offdiagonal: np.ndarray
    # reflector k acts on coordinates k+1.. as I - u u^T / h
    reflectors: tuple[tuple[np.ndarray, float], ...]

    def back_transform(self, w: np.ndarray) -> np.ndarray:
        """Map a vector from the tridiagonal basis back to the basis of A."""
        v = np.array(w, dtype=float)
        for k in range(len(self.reflectors) - 1, -1, -1):
            u, h = self.reflectors[k]
            if h > 0:
                v[k + 1 :] -= u * (u @ v[k + 1 :]) / h
        return v


def householder_tridiagonal(A: np.ndarray) -> Tridiagonal:
    """Orthogonal similarity A -> T = Q^T A Q with T tridiagonal. ``A`` is not modified."""
    a = np.array(A, dtype=float)
    n = a.shape[0]
    off = np.zeros(max(n - 1, 0))
    reflectors = []
    for k in range(n - 2):
        # reflect column k below the diagonal onto a multiple of e_1
        u = a[k + 1 :, k].copy()
        norm = math.sqrt(u @ u)
        if norm == 0.0:
            reflectors.append((u, 0.0))
            continue
        # sign chosen so u[0] + norm does not cancel
        if u[0] < 0.0:
            norm = -norm
        u[0] += norm
        h = (u @ u) / 2.0
        # rank-two update of the trailing block: A - v u^T - u v^T
        v = a[k + 1 :, k + 1 :] @ u / h
        g = (u @ v) / (2.0 * h)
        v -= g * u
        a[k + 1 :, k + 1 :] -= np.outer(v, u) + np.outer(u, v)
        off[k] = -norm
        reflectors.append((u, h))
    if n >= 2:
        off[n - 2] = a[n - 1, n - 2]
    return Tridiagonal(np.diagonal(a).copy(), off, tuple(reflectors))


def tridiagonal_ql(diagonal: np.ndarray, offdiagonal: np.ndarray) -> np.ndarray:
    """Eigenvalues of a symmetric tridiagonal matrix by QL sweeps with implicit Wilkinson-type shifts."""
    d = [float(x) for x in diagonal]
    n = len(d)
    e = [float(x) for x in offdiagonal] + [0.0]
    for l in range(n):
        sweeps = 0
        while True:
            # find the first negligible off-diagonal entry at or after l
            for m in range(l, n - 1):
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= EPS * dd:
                    break
            else:
                m = n - 1
            if m == l:
                break
            if sweeps == QL_MAX_SWEEPS:
                raise NonConvergenceError(f"QL iteration stalled on eigenvalue {l}", abs(e[l]), sweeps)
            sweeps += 1
            # shift from the leading 2x2 block
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            # chase the bulge up with Givens rotations
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    # split: restart the sweep on the smaller block
                    d[i + 1] -= p
                    e[m] = 0.0
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
            else:
                d[l] -= p
                e[l] = g
                e[m] = 0.0
    return np.sort(np.array(d))


def _check_matrix(A) -> tuple[np.ndarray, float]:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise ValidationError(f"expected a non-empty square matrix, got shape {A.shape}")
    cap = get_settings().eig_cap
    if A.shape[0] > cap:
        raise SizeCapError("matrix dimension", A.shape[0], cap)
    if not np.all(np.isfinite(A)):
        raise ValidationError("matrix entries must be finite")
    scale = float(np.max(np.abs(A)))
    asym = float(np.max(np.abs(A - A.T)))
    if asym > SYMMETRY_TOL * scale:
        raise ValidationError(f"matrix is not symmetric (max |A - A^T| = {asym:.3e})")
    return (A + A.T) / 2.0, scale


def _inverse_iteration_tridiagonal(tri: Tridiagonal, shift: float, start: np.ndarray) -> np.ndarray:
    n = tri.diagonal.shape[0]
    if n == 1:
        return np.ones(1)
    ab = np.zeros((3, n))
    ab[0, 1:] = tri.offdiagonal
    ab[1] = tri.diagonal - shift
    ab[2, :-1] = tri.offdiagonal
    w = start
    for _ in range(3):
        w = solve_banded((1, 1), ab, w)
        w /= np.linalg.norm(w)
    return tri.back_transform(w)


def _inverse_iteration_dense(A: np.ndarray, shift: float, start: np.ndarray) -> np.ndarray:
    lu = lu_factor(A - shift * np.eye(A.shape[0]), check_finite=False)
    v = start
    for _ in range(3):
        v = lu_solve(lu, v, check_finite=False)
        v /= np.linalg.norm(v)
    return v


def _certify(A: np.ndarray, values: np.ndarray, scale: float, tri: Optional[Tridiagonal], spot_checks: int) -> dict:
    n = A.shape[0]
    trace_err = abs(float(values.sum()) - float(np.trace(A)))
    frob = float(np.linalg.norm(A))
    frob_err = abs(float(values @ values) - frob**2)
    if trace_err > IDENTITY_TOL * n * max(scale, EPS) or frob_err > IDENTITY_TOL * n * max(scale * frob, EPS):
        raise NonConvergenceError("eigenvalues fail the trace/Frobenius identities", max(trace_err, frob_err), 0)

    gen = np.random.Generator(np.random.Philox(key=n))
    indices = np.sort(gen.choice(n, size=min(spot_checks, n), replace=False))
    worst = 0.0
    if scale > 0:
        # keep the shift off the computed eigenvalue so the shifted system stays solvable
        delta = 1e3 * EPS * scale * max(n, 1)
        for i in indices:
            start = gen.standard_normal(n)
            shift = values[i] + delta
            if tri is not None:
                v = _inverse_iteration_tridiagonal(tri, shift, start)
            else:
                v = _inverse_iteration_dense(A, shift, start)
            v /= np.linalg.norm(v)
            worst = max(worst, float(np.linalg.norm(A @ v - values[i] * v)))
    limit = RESIDUAL_TOL * n * scale
    if worst > limit:
        raise NonConvergenceError(f"eigenpair residual {worst:.3e} exceeds {limit:.3e}", worst, 0)
    return {
        "residual": worst,
        "spot_indices": indices.tolist(),
        "trace_error": trace_err,
        "frobenius_error": frob_err,
    }


def eigenvalues_symmetric(
    A,
    backend: Backend = "auto",
    spot_checks: int = SPOT_CHECKS,
    metadata: Optional[dict] = None,
) -> Spectrum:
    """All eigenvalues of a dense real symmetric matrix, sorted ascending and certified.

    ``auto`` uses the in-repo reduction up to GRAPHON_SPECTRA_EIG_INREPO_MAX_N and LAPACK
    above it; the certificate is the same for both.
    """
    A, scale = _check_matrix(A)
    n = A.shape[0]
    if backend == "auto":
        backend = "inrepo" if n <= get_settings().eig_inrepo_max_n else "lapack"
    if backend == "inrepo":
        tri = householder_tridiagonal(A)
        values = tridiagonal_ql(tri.diagonal, tri.offdiagonal)
    elif backend == "lapack":
        tri = None
        values = np.linalg.eigvalsh(A)
    else:
        raise ValidationError(f"unknown eigen backend {backend!r}")
    certificate = _certify(A, values, scale, tri, spot_checks)
    log.debug("n=%d eigenvalues via %s, residual %.3e", n, backend, certificate["residual"])
    return Spectrum(values, {"n": n, "backend": backend, **certificate, **(metadata or {})})
