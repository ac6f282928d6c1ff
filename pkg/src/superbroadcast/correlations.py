"""Two-site correlations of universally broadcast states.

A two-qubit state supported on the triplet and commuting with J_z is
fixed by two numbers: alpha (weight on |psi+>) and beta (half the
population imbalance between |00> and |11>). It is physical iff
0 <= alpha <= 1 - 2|beta| and entangled iff alpha > (1 - 4 beta^2) / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ContractError, DomainError
from .simulator import DensityMatrix, reduce_to_two_sites, superbroadcast_universal

_PSI_PLUS = np.array([0.0, 1.0, 1.0, 0.0]) / math.sqrt(2)
_PSI_MINUS = np.array([0.0, 1.0, -1.0, 0.0]) / math.sqrt(2)
_YY = np.fliplr(np.diag([-1.0, 1.0, 1.0, -1.0]))
_JZ_TOTAL = np.diag([1.0, 0.0, 0.0, -1.0])


@dataclass(frozen=True)
class SymmetricPairState:
    alpha: float
    beta: float

    @property
    def is_physical(self) -> bool:
        return -1e-12 <= self.alpha <= 1 - 2 * abs(self.beta) + 1e-12

    def density_matrix(self) -> DensityMatrix:
        """Dense two-qubit state alpha I1 + beta Jz + (1 - 3 alpha)/2 Jz^2."""
        a_plus = (1 - self.alpha) / 2 + self.beta
        a_minus = (1 - self.alpha) / 2 - self.beta
        rho = np.zeros((4, 4))
        rho[0, 0] = a_plus
        rho[3, 3] = a_minus
        rho += self.alpha * np.outer(_PSI_PLUS, _PSI_PLUS)
        return DensityMatrix(2, rho)


def _matrix(rho2) -> np.ndarray:
    rho = np.asarray(rho2)
    if rho.shape != (4, 4):
        raise DomainError(f"expected a two-qubit (4x4) matrix, got {rho.shape}")
    return rho


def extract_alpha_beta(rho2) -> SymmetricPairState:
    rho = _matrix(rho2)
    comm = _JZ_TOTAL @ rho - rho @ _JZ_TOTAL
    if np.abs(comm).max() > 1e-8:
        raise ContractError("state does not commute with total J_z")
    singlet = float(np.real(_PSI_MINUS @ rho @ _PSI_MINUS))
    if abs(singlet) > 1e-8:
        raise ContractError(f"state has singlet weight {singlet:.3g}")
    a_plus = float(rho[0, 0].real)
    a_minus = float(rho[3, 3].real)
    a_zero = float(np.real(_PSI_PLUS @ rho @ _PSI_PLUS))
    return SymmetricPairState(alpha=a_zero, beta=(a_plus - a_minus) / 2)


def concurrence(rho2) -> float:
    """Wootters concurrence of a two-qubit density matrix."""
    rho = _matrix(rho2).astype(complex)
    rho = (rho + rho.conj().T) / 2
    evals, evecs = np.linalg.eigh(rho)
    if evals[0] < -1e-10:
        raise ContractError(f"input is not positive semidefinite (min eigenvalue {evals[0]:.3g})")
    sqrt_rho = (evecs * np.sqrt(np.clip(evals, 0, None))) @ evecs.conj().T
    flipped = _YY @ rho.conj() @ _YY
    lam = np.linalg.eigvalsh(sqrt_rho @ flipped @ sqrt_rho)
    lam = np.sqrt(np.clip(lam, 0, None))[::-1]
    return max(0.0, float(lam[0] - lam[1] - lam[2] - lam[3]))


def _require_physical(s: SymmetricPairState) -> None:
    if not s.is_physical:
        raise DomainError(f"(beta, alpha) = ({s.beta}, {s.alpha}) lies outside the positivity triangle")


def family_concurrence(s: SymmetricPairState) -> float:
    _require_physical(s)
    rad = max(((1 - s.alpha) / 2) ** 2 - s.beta ** 2, 0.0)
    return max(0.0, s.alpha - 2 * math.sqrt(rad))


def separability_boundary(beta: float) -> float:
    return (1 - 4 * beta ** 2) / 2


def is_entangled_family(s: SymmetricPairState) -> bool:
    _require_physical(s)
    return s.alpha > separability_boundary(s.beta)


@dataclass(frozen=True)
class CurvePoint:
    r: float
    beta: float
    alpha: float
    concurrence: float


def concurrence_curve(N: int, M: int, r_grid: Iterable[float]) -> list[CurvePoint]:
    """(beta, alpha, C) of the two-site output marginal along an r grid."""
    points = []
    for r in r_grid:
        rho2 = reduce_to_two_sites(superbroadcast_universal(N, M, float(r)))
        s = extract_alpha_beta(rho2)
        points.append(CurvePoint(float(r), s.beta, s.alpha, family_concurrence(s)))
    return points
