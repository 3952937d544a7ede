"""Dense complex Hermitian linear algebra.

Everything is built on one cyclic Jacobi eigensolver; the spectral
functions (positive part, norms, square roots, fidelity) are thin maps
over its eigensystem.  Matrices are plain ``numpy`` arrays of dtype
``complex128``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import NamedTuple

import numpy as np

from .errors import NoConvergence, NotHermitian, NotPsd, ValidationError, ZeroMatrix

__all__ = [
    "Tolerances",
    "DEFAULT_TOL",
    "HermitianEigensystem",
    "as_matrix",
    "hermitian_eig",
    "positive_part",
    "trace_norm",
    "operator_norm",
    "matrix_sqrt_psd",
    "fidelity",
    "fidelity_from_root",
    "pseudo_inverse_sqrt",
    "support_projector",
    "spectral_cutoff",
]

MAX_SWEEPS = 60


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared by every module.

    ``tol_rank`` is relative: it is multiplied by the largest absolute
    eigenvalue of the matrix at hand.
    """

    tol_eig: float = 1e-14
    tol_psd: float = 1e-10
    tol_orth: float = 1e-10
    tol_recon: float = 1e-9
    tol_rank: float = 1e-10

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValidationError(f"{f.name} must be a positive finite number, got {value!r}")

    def replace(self, **overrides) -> "Tolerances":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        unknown = set(overrides) - set(values)
        if unknown:
            raise ValidationError(f"unknown tolerance(s): {', '.join(sorted(unknown))}")
        values.update({k: float(v) for k, v in overrides.items()})
        return Tolerances(**values)

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


DEFAULT_TOL = Tolerances()


class HermitianEigensystem(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite square complex128 array (a copy)."""
    arr = np.array(a, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise ValidationError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    return arr


def hermiticity_defect(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def _jacobi(h: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    # Works on python lists: for the small dimensions used here this is
    # several times faster than numpy fancy indexing per rotation.
    n = h.shape[0]
    a = h.tolist()
    v = [[1.0 + 0j if i == j else 0j for j in range(n)] for i in range(n)]
    frob = math.sqrt(sum(abs(x) ** 2 for row in a for x in row))
    threshold = tol * frob
    for _ in range(MAX_SWEEPS):
        off = max((abs(a[p][q]) for p in range(n) for q in range(p + 1, n)), default=0.0)
        if off <= threshold:
            return np.array([a[i][i].real for i in range(n)]), np.array(v)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                r = abs(apq)
                if r <= threshold * 1e-3:
                    continue
                phase = apq / r
                app = a[p][p].real
                aqq = a[q][q].real
                tau = (aqq - app) / (2.0 * r)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # U = [[c, s*phase], [-s*conj(phase), c]] on columns (p, q).
                sp = s * phase
                spc = sp.conjugate()
                for k in range(n):
                    akp = a[k][p]
                    akq = a[k][q]
                    a[k][p] = c * akp - spc * akq
                    a[k][q] = sp * akp + c * akq
                for k in range(n):
                    apk = a[p][k]
                    aqk = a[q][k]
                    a[p][k] = c * apk - sp * aqk
                    a[q][k] = spc * apk + c * aqk
                a[p][q] = 0j
                a[q][p] = 0j
                a[p][p] = complex(app - t * r)
                a[q][q] = complex(aqq + t * r)
                for k in range(n):
                    vkp = v[k][p]
                    vkq = v[k][q]
                    v[k][p] = c * vkp - spc * vkq
                    v[k][q] = sp * vkp + c * vkq
    raise NoConvergence(f"Jacobi iteration did not converge in {MAX_SWEEPS} sweeps")


def hermitian_eig(a, tol: Tolerances = DEFAULT_TOL) -> HermitianEigensystem:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Sweeps visit the strict upper triangle in row-major order, and stop
    once the largest off-diagonal magnitude is at most
    ``tol.tol_eig * ||A||_F``.  Eigenvalues are returned ascending
    (stable sort), eigenvectors as the matching columns.

    Raises
    ------
    NotHermitian
        If ``max|A - A^H| > tol.tol_recon``.
    NoConvergence
        If the sweep budget is exhausted.
    """
    h = as_matrix(a)
    defect = hermiticity_defect(h)
    if defect > tol.tol_recon:
        raise NotHermitian(f"matrix is not Hermitian (max |A - A^H| = {defect:.3e})")
    h = 0.5 * (h + h.conj().T)
    w, v = _jacobi(h, tol.tol_eig)
    order = np.argsort(w, kind="stable")
    return HermitianEigensystem(w[order], v[:, order])


def _rebuild(vecs: np.ndarray, values: np.ndarray) -> np.ndarray:
    return (vecs * values) @ vecs.conj().T


def spectral_cutoff(eigenvalues: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> float:
    """Absolute threshold ``tol_rank * max|lambda|`` for rank decisions."""
    if eigenvalues.size == 0:
        return 0.0
    return tol.tol_rank * float(np.max(np.abs(eigenvalues)))


def positive_part(a, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Keep the spectral components of ``a`` with eigenvalue above the rank cutoff."""
    w, v = hermitian_eig(a, tol)
    keep = np.where(w > spectral_cutoff(w, tol), w, 0.0)
    return _rebuild(v, keep)


def trace_norm(a, tol: Tolerances = DEFAULT_TOL) -> float:
    """Sum of absolute eigenvalues (Hermitian input only)."""
    w, _ = hermitian_eig(a, tol)
    return float(np.sum(np.abs(w)))


def operator_norm(a, tol: Tolerances = DEFAULT_TOL) -> float:
    """Largest absolute eigenvalue (Hermitian input only)."""
    w, _ = hermitian_eig(a, tol)
    return float(np.max(np.abs(w)))


def _psd_eig(a, tol: Tolerances) -> HermitianEigensystem:
    w, v = hermitian_eig(a, tol)
    if w[0] < -tol.tol_psd:
        raise NotPsd(f"matrix has eigenvalue {w[0]:.3e} below -{tol.tol_psd:g}")
    return HermitianEigensystem(w, v)


def matrix_sqrt_psd(a, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Principal square root of a positive semidefinite matrix.

    Eigenvalues below ``tol.tol_psd`` are set to zero before the root is
    taken, so rounding noise on a null space does not leak through as
    ``sqrt(1e-17) ~ 3e-9``.
    """
    w, v = _psd_eig(a, tol)
    roots = np.sqrt(np.where(w < tol.tol_psd, 0.0, w))
    return _rebuild(v, roots)


def fidelity(rho, sigma, tol: Tolerances = DEFAULT_TOL) -> float:
    """Root fidelity ``Tr sqrt(sqrt(rho) sigma sqrt(rho))``.

    Accepts unnormalised positive semidefinite arguments with trace at
    most ``1 + tol_recon``.
    """
    rho = as_matrix(rho, "rho")
    sigma = as_matrix(sigma, "sigma")
    if rho.shape != sigma.shape:
        raise ValidationError(f"shape mismatch: {rho.shape} vs {sigma.shape}")
    for name, x in (("rho", rho), ("sigma", sigma)):
        tr = float(np.trace(x).real)
        if tr > 1.0 + tol.tol_recon:
            raise ValidationError(f"{name} has trace {tr!r} > 1")
    root = matrix_sqrt_psd(rho, tol)
    _psd_eig(sigma, tol)
    return fidelity_from_root(root, sigma, tol)


def fidelity_from_root(root: np.ndarray, sigma: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> float:
    """Fidelity given ``sqrt(rho)`` already computed; no argument checks."""
    inner = root @ sigma @ root
    inner = 0.5 * (inner + inner.conj().T)
    w, _ = _psd_eig(inner, tol)
    return float(np.sum(np.sqrt(np.where(w < tol.tol_psd, 0.0, w))))


def pseudo_inverse_sqrt(a, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Inverse square root on the support of ``a``, zero on its kernel."""
    w, v = _psd_eig(a, tol)
    mask = w > spectral_cutoff(w, tol)
    if not np.any(mask):
        raise ZeroMatrix("matrix has no eigenvalue above the rank cutoff")
    inv = np.zeros_like(w)
    inv[mask] = 1.0 / np.sqrt(w[mask])
    return _rebuild(v, inv)


def support_projector(a, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthogonal projector onto the span of eigenvectors above the rank cutoff."""
    w, v = _psd_eig(a, tol)
    mask = (w > spectral_cutoff(w, tol)).astype(float)
    return _rebuild(v, mask)
