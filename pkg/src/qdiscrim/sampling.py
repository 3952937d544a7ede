"""Seeded random instances.

Generator algorithm, fixed so that sweeps are reproducible:

* bit stream: ``numpy.random.PCG64(seed)`` (PCG-XSL-RR 128/64, seeded via
  ``SeedSequence(seed)``);
* uniforms: ``Generator.random()``, i.e. 53-bit doubles in ``[0, 1)``;
* standard normals: Box-Muller on consecutive uniform pairs ``(u1, u2)``,
  ``r = sqrt(-2 ln(1 - u1))`` giving ``r cos(2 pi u2)`` then
  ``r sin(2 pi u2)``;
* complex standard normals: ``(x + i y) / sqrt(2)`` from two consecutive
  normals;
* exponentials: ``-ln(1 - u)``; points on the simplex are normalised
  exponentials.

Matrices are filled in row-major order.  Per-trial seeds in sweeps come
from :func:`trial_seed`: the first 64-bit word of
``SeedSequence([seed, trial]).generate_state(1, uint64)``.
"""

from __future__ import annotations

import math

import numpy as np

from .ensemble import Ensemble, StructuredEnsemble
from .linalg import DEFAULT_TOL, Tolerances

__all__ = [
    "PortableRng",
    "random_ensemble",
    "random_commuting_ensemble",
    "random_structured",
    "random_density_matrix",
    "random_unitary",
    "trial_seed",
]


def trial_seed(seed: int, trial: int) -> int:
    """Independent 64-bit seed for trial ``trial`` of a sweep seeded with ``seed``."""
    state = np.random.SeedSequence([seed, trial]).generate_state(1, np.uint64)
    return int(state[0])


class PortableRng:
    """Uniform, normal and exponential draws with a fixed, documented algorithm."""

    def __init__(self, seed: int):
        if seed < 0:
            raise ValueError(f"seed must be non-negative, got {seed}")
        self.seed = seed
        self._gen = np.random.Generator(np.random.PCG64(seed))
        self._spare: float | None = None

    def uniform(self) -> float:
        return float(self._gen.random())

    def normal(self) -> float:
        if self._spare is not None:
            z, self._spare = self._spare, None
            return z
        u1 = self.uniform()
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(1.0 - u1))
        self._spare = r * math.sin(2.0 * math.pi * u2)
        return r * math.cos(2.0 * math.pi * u2)

    def complex_normal(self) -> complex:
        x = self.normal()
        y = self.normal()
        return complex(x, y) / math.sqrt(2.0)

    def exponential(self) -> float:
        return -math.log(1.0 - self.uniform())

    def simplex(self, n: int) -> np.ndarray:
        e = np.array([self.exponential() for _ in range(n)])
        return e / e.sum()

    def ginibre(self, n: int) -> np.ndarray:
        return np.array([[self.complex_normal() for _ in range(n)] for _ in range(n)])


def random_density_matrix(rng: PortableRng, dim: int) -> np.ndarray:
    g = rng.ginibre(dim)
    rho = g @ g.conj().T
    rho = rho / np.trace(rho).real
    return 0.5 * (rho + rho.conj().T)


def random_unitary(rng: PortableRng, dim: int) -> np.ndarray:
    """Haar unitary: QR of a Ginibre matrix with the phases of R's diagonal removed."""
    q, r = np.linalg.qr(rng.ginibre(dim))
    d = np.diag(r)
    return q * (d / np.abs(d))


def _check_sizes(m: int, dim: int) -> None:
    if m < 2 or dim < 2:
        raise ValueError(f"need m >= 2 and dim >= 2, got m={m}, dim={dim}")


def random_ensemble(seed: int, m: int, dim: int, tol: Tolerances = DEFAULT_TOL) -> Ensemble:
    """Ginibre states ``G G^H / Tr(G G^H)`` with priors uniform on the simplex."""
    _check_sizes(m, dim)
    rng = PortableRng(seed)
    states = tuple(random_density_matrix(rng, dim) for _ in range(m))
    return Ensemble(states, rng.simplex(m), tol)


def random_commuting_ensemble(
    seed: int, m: int, dim: int, tol: Tolerances = DEFAULT_TOL, basis: np.ndarray | None = None
) -> Ensemble:
    """States diagonal in one shared basis, Haar-random unless ``basis`` is given."""
    _check_sizes(m, dim)
    rng = PortableRng(seed)
    u = random_unitary(rng, dim) if basis is None else np.asarray(basis, dtype=np.complex128)
    states = []
    for _ in range(m):
        rho = (u * rng.simplex(dim)) @ u.conj().T
        states.append(0.5 * (rho + rho.conj().T))
    return Ensemble(tuple(states), rng.simplex(m), tol)


def random_structured(seed: int, m: int, tol: Tolerances = DEFAULT_TOL) -> StructuredEnsemble:
    """Alphas uniform on ``[0, 1)``, priors uniform on the simplex."""
    if m < 2:
        raise ValueError(f"need m >= 2, got {m}")
    rng = PortableRng(seed)
    alphas = np.array([rng.uniform() for _ in range(m)])
    return StructuredEnsemble(alphas, rng.simplex(m), tol)
