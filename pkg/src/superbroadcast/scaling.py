"""Optimal output purity of universal and phase-covariant superbroadcasting.

The scaling factor p = r'/r of the optimal N -> M map is a fixed linear
combination of r-dependent terms; only the combination weights depend on M.
:class:`ScalingProfile` keeps the terms so that threshold searches can sweep
M cheaply over a fixed r grid.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ContractError, DomainError
from .spinrep import (
    BlockDiagonalState,
    HalfInteger,
    admissible_spins,
    jx_operator,
    jz_operator,
    multiplicity,
    wigner_d_half_pi,
)

INF = math.inf

# Above this many inputs d_l and the paired powers are combined in log space.
_LOG_SPACE_N = 300


class Covariance(str, enum.Enum):
    UNIVERSAL = "universal"
    PHASE = "phase"


@dataclass(frozen=True)
class ScalingResult:
    N: int
    M: float
    r: float
    covariance: Covariance
    p: float
    r_prime: float

    @property
    def superbroadcasting(self) -> bool:
        return self.p > 1.0


def _check_args(N: int, M: float, r) -> np.ndarray:
    if N < 1:
        raise DomainError("N must be at least 1")
    if M != INF and (int(M) != M or M < N):
        raise DomainError(f"need integer M >= N, got N={N}, M={M}")
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0) or np.any(r > 1):
        raise DomainError("scaling factors are defined for 0 < r <= 1")
    return r


def _weighted_powers(d: int, rp: np.ndarray, rm: np.ndarray,
                     a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """d * rp**a * rm**b, shape (len(a), len(rp)), with 0**0 == 1."""
    a = a[:, None]
    b = b[:, None]
    if a.max(initial=0) + b.max(initial=0) <= _LOG_SPACE_N:
        return float(d) * np.power(rp, a) * np.power(rm, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_rm = np.where(b == 0, 0.0, b * np.log(rm))
    return np.exp(math.log(d) + a * np.log(rp) + log_rm)


def _compensated_sum(terms: np.ndarray) -> np.ndarray:
    """Column sums of ``terms`` with error compensation."""
    if terms.shape[1] <= 16:
        return np.array([math.fsum(col) for col in terms.T.tolist()])
    # Neumaier summation, largest rows first.
    order = np.argsort(-np.abs(terms).max(axis=1))
    total = np.zeros(terms.shape[1])
    comp = np.zeros(terms.shape[1])
    for row in terms[order]:
        t = total + row
        comp += np.where(np.abs(total) >= np.abs(row), (total - t) + row, (row - t) + total)
        total = t
    return total + comp


@lru_cache(maxsize=None)
def _coherence_kernel(twice_l: int) -> np.ndarray:
    """K[k, i] = D[k, i] D[k+1, i]; then K @ w gives the entries
    <l, m-1| D diag(w) D^T |l, m> for m = l, ..., -l+1."""
    d = wigner_d_half_pi(HalfInteger(twice_l))
    kern = d[1:, :] * d[:-1, :]
    kern.setflags(write=False)
    return kern


@dataclass(frozen=True)
class ScalingProfile:
    """r-dependent terms of p^{N,M}(r) for a fixed N and covariance class.

    ``terms[k]`` is evaluated on ``r``. For the universal class every term
    carries the weight (M+2)/M; for the phase class term k carries
    (2/M) sqrt(j(j+1) - n'(n'+1)) with j = M/2, where n' is ``twice_n[k]/2``
    or that value plus 1/2 depending on the parity of M - N.
    """

    N: int
    covariance: Covariance
    r: np.ndarray
    terms: np.ndarray
    twice_n: np.ndarray

    def weights(self, M: float) -> np.ndarray:
        if self.covariance is Covariance.UNIVERSAL:
            factor = 1.0 if M == INF else (M + 2) / M
            return np.full(len(self.terms), factor)
        if M == INF:
            return np.ones(len(self.terms))
        j = M / 2
        n = self.twice_n / 2
        if (M - self.N) % 2:
            n = n + 0.5
        return (2 / M) * np.sqrt(np.maximum(j * (j + 1) - n * (n + 1), 0.0))

    def evaluate(self, M: float, compensated: bool = True) -> np.ndarray:
        """p^{N,M} on the profile grid; M may be ``math.inf``."""
        if M != INF and M < self.N:
            raise DomainError(f"need M >= N, got N={self.N}, M={M}")
        weighted = self.terms * self.weights(M)[:, None]
        if compensated:
            return _compensated_sum(weighted)
        return weighted.sum(axis=0)


def _universal_terms(N: int, r: np.ndarray):
    rp, rm = (1 + r) / 2, (1 - r) / 2
    rows, ns = [], []
    for l in admissible_spins(N):
        n = l.m_values()
        w = _weighted_powers(multiplicity(N, l), rp, rm, N / 2 - n, N / 2 + n)
        rows.append(-(n / (l.value + 1))[:, None] * w / r)
        ns.append(np.rint(2 * n).astype(int))
    return np.vstack(rows), np.concatenate(ns)


def _phase_terms(N: int, r: np.ndarray):
    rp, rm = (1 + r) / 2, (1 - r) / 2
    rows, ns = [], []
    for l in admissible_spins(N):
        if l.twice_value == 0:
            continue
        m = l.m_values()
        # (r+ r-)^{N/2} exp(J_x log(r+/r-)) = D diag(r+^{N/2+m} r-^{N/2-m}) D^T
        w = _weighted_powers(multiplicity(N, l), rp, rm, N / 2 + m, N / 2 - m)
        coh = _coherence_kernel(l.twice_value) @ w
        rows.append(coh / r)
        # row k holds the (n, n+1) entry with n = l - k - 1
        ns.append(np.rint(2 * (m[1:])).astype(int))
    return np.vstack(rows), np.concatenate(ns)


def scaling_profile(N: int, r, covariance: Covariance | str) -> ScalingProfile:
    covariance = Covariance(covariance)
    r = np.atleast_1d(_check_args(N, N, r))
    if covariance is Covariance.UNIVERSAL:
        terms, twice_n = _universal_terms(N, r)
    else:
        terms, twice_n = _phase_terms(N, r)
    return ScalingProfile(N, covariance, r, terms, twice_n)


def _evaluate(N, M, r, covariance):
    r_arr = _check_args(N, M, r)
    out = scaling_profile(N, r_arr.ravel(), covariance).evaluate(M)
    if r_arr.ndim == 0:
        return float(out[0])
    return out.reshape(r_arr.shape)


def scaling_universal(N: int, M: float, r):
    """Optimal universally covariant N -> M scaling factor p(r).

    ``r`` may be a scalar or an array; ``M = math.inf`` gives the large-M limit.
    """
    return _evaluate(N, M, r, Covariance.UNIVERSAL)


def scaling_phase(N: int, M: float, r):
    """Optimal phase-covariant N -> M scaling factor for equatorial inputs."""
    return _evaluate(N, M, r, Covariance.PHASE)


def scaling_factor(N: int, M: float, r, covariance: Covariance | str):
    return _evaluate(N, M, r, Covariance(covariance))


def evaluate(N: int, M: float, r: float, covariance: Covariance | str) -> ScalingResult:
    covariance = Covariance(covariance)
    p = scaling_factor(N, M, r, covariance)
    return ScalingResult(N, M, float(r), covariance, p, p * r)


def universal_pure_limit(N: int, M: int) -> float:
    """Scaling factor of the optimal universal N -> M cloner on pure inputs."""
    return N * (M + 2) / (M * (N + 2))


def single_site_bloch(state: BlockDiagonalState, axis: str = "z") -> float:
    """Bloch component of the one-qubit marginal of a permutation-invariant state."""
    if axis not in ("z", "x"):
        raise DomainError(f"axis must be 'z' or 'x', got {axis!r}")
    tr = state.trace()
    if abs(tr - 1.0) > 1e-8:
        raise ContractError(f"state is not normalized (trace {tr!r})")
    op = jz_operator if axis == "z" else jx_operator
    acc = [mult * float(np.real(np.trace(op(j) @ block))) for j, block, mult in state]
    return 2.0 / state.num_qubits * math.fsum(acc)
