"""Dense simulation of the measure / discard / clone realization of the
optimal universal superbroadcaster.

1. Measure the total-spin label l (and multiplicity copy) of rho^{⊗N}.
2. Discard the N - 2l qubits paired into singlets.
3. Feed the remaining spin-l state to the optimal universal 2l -> M cloner
   for pure states.

Averaging over outcomes gives the broadcast state. Its one-site Bloch
length is an independent check on the closed-form scaling factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ContractError, DomainError
from .spinrep import (
    MAX_DENSE_QUBITS,
    BlockDiagonalState,
    HalfInteger,
    schur_basis,
    tensor_power_blocks,
)


@dataclass
class DensityMatrix:
    num_qubits: int
    entries: np.ndarray

    def __post_init__(self):
        dim = 2 ** self.num_qubits
        if self.entries.shape != (dim, dim):
            raise ContractError(f"expected a {dim}x{dim} matrix, got {self.entries.shape}")

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def validate(self, tol_herm: float = 1e-12, tol_trace: float = 1e-10,
                 tol_psd: float = 1e-10) -> None:
        rho = self.entries
        if np.abs(rho - rho.conj().T).max() > tol_herm:
            raise ContractError("density matrix is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > tol_trace:
            raise ContractError(f"density matrix has trace {np.trace(rho).real!r}")
        if np.linalg.eigvalsh(rho)[0] < -tol_psd:
            raise ContractError("density matrix is not positive semidefinite")


@dataclass(frozen=True)
class MeasurementOutcome:
    l: HalfInteger
    multiplicity_index: int
    probability: float
    post_state: np.ndarray


def check_capacity(n: int, what: str) -> None:
    if n > MAX_DENSE_QUBITS:
        raise CapacityError(f"{what}={n} exceeds the dense limit of {MAX_DENSE_QUBITS} qubits")


def project_measurement(N: int, r: float) -> list[MeasurementOutcome]:
    """All outcomes (l, alpha) of the irrep-label measurement on rho^{⊗N}."""
    check_capacity(N, "N")
    state = tensor_power_blocks(r, N)
    outcomes = []
    for l, block, mult in state:
        prob = float(np.trace(block).real)
        post = block / prob if prob > 0 else np.full_like(block, np.nan)
        for alpha in range(mult):
            outcomes.append(MeasurementOutcome(l, alpha, prob, post))
    return outcomes


def _clone_symmetric_block(rho: np.ndarray, l: HalfInteger, M: int) -> np.ndarray:
    """Spin-M/2 block of the optimal universal 2l -> M cloner output."""
    n_in = l.twice_value
    if M < n_in:
        raise DomainError(f"cannot clone {n_in} qubits into M={M} < {n_in}")
    check_capacity(M, "M")
    if rho.shape != (l.dim, l.dim):
        raise DomainError(f"input must be {l.dim}x{l.dim} for l={l}")
    sym_out = schur_basis(M).symmetric_isometry()
    if n_in == 0:
        embedded = rho.reshape(1, 1)
    else:
        sym_in = schur_basis(n_in).symmetric_isometry()
        embedded = sym_in @ rho @ sym_in.T
    rest = 2 ** (M - n_in)
    # (embedded ⊗ I_rest) applied to the symmetric columns without forming the kron
    cols = sym_out.reshape(2 ** n_in, rest, M + 1)
    moved = np.einsum("ab,bkc->akc", embedded, cols).reshape(2 ** M, M + 1)
    out = (l.dim / (M + 1)) * (sym_out.T @ moved)
    return (out + out.conj().T) / 2


def universal_pure_cloner(rho: np.ndarray, l, M: int) -> DensityMatrix:
    """Optimal universal 2l -> M cloner applied to a state of the spin-l
    (symmetric) sector of 2l qubits.

    ``rho`` is given in the |l, m> basis. Returns the dense M-qubit output
    ((2l+1)/(M+1)) S_M (rho ⊗ I) S_M.
    """
    l = HalfInteger.of(l)
    rho = np.asarray(rho)
    if abs(np.trace(rho).real - 1.0) > 1e-10:
        raise ContractError("cloner input must have unit trace")
    block = _clone_symmetric_block(rho, l, M)
    if abs(np.trace(block).real - 1.0) > 1e-10:
        raise ContractError("cloner failed to preserve trace")
    sym_out = schur_basis(M).symmetric_isometry()
    return DensityMatrix(M, sym_out @ block @ sym_out.T)


def universal_pure_cloner_dense(rho_dense: np.ndarray, n_in: int, M: int) -> DensityMatrix:
    """Same channel for an input given as a dense 2^n_in matrix; the input
    must be supported on the symmetric subspace."""
    check_capacity(M, "M")
    if M < n_in:
        raise DomainError(f"cannot clone {n_in} qubits into M={M} < {n_in}")
    sym_in = schur_basis(n_in).symmetric_isometry()
    inside = float(np.trace(sym_in.T @ rho_dense @ sym_in).real)
    if abs(np.trace(rho_dense).real - inside) > 1e-10:
        raise ContractError("input has weight outside the symmetric subspace")
    return universal_pure_cloner(sym_in.T @ rho_dense @ sym_in, HalfInteger(n_in), M)


def superbroadcast_universal(N: int, M: int, r: float) -> BlockDiagonalState:
    """Average output of the realization scheme, in block form on M qubits."""
    check_capacity(N, "N")
    check_capacity(M, "M")
    # Outcomes sharing l carry the same post-state; clone each once. The
    # singlet pairs are dropped by working with the abstract spin-l block.
    weights: dict[HalfInteger, float] = {}
    posts: dict[HalfInteger, np.ndarray] = {}
    for o in project_measurement(N, r):
        weights[o.l] = weights.get(o.l, 0.0) + o.probability
        posts[o.l] = o.post_state
    total = np.zeros((M + 1, M + 1))
    for l, w in weights.items():
        if w > 0:
            # raises DomainError for a realized outcome with 2l > M
            total += w * _clone_symmetric_block(posts[l], l, M)
    out = BlockDiagonalState.from_blocks(M, {HalfInteger(M): total})
    out.validate(tol_psd=1e-10)
    return out


def partial_trace(rho: np.ndarray, n: int, keep: tuple[int, ...]) -> np.ndarray:
    """Reduce an n-qubit operator to the qubits in ``keep`` (in that order)."""
    tensor = rho.reshape([2] * (2 * n))
    letters = "abcdefghijklmnopqrstuvwxyz"
    bra = list(letters[:n])
    ket = list(letters[n:2 * n])
    for q in range(n):
        if q not in keep:
            ket[q] = bra[q]
    out = "".join(bra[q] for q in keep) + "".join(ket[q] for q in keep)
    spec = "".join(bra) + "".join(ket) + "->" + out
    k = len(keep)
    return np.einsum(spec, tensor).reshape(2 ** k, 2 ** k)


def reduce_to_two_sites(state: BlockDiagonalState) -> DensityMatrix:
    """Two-qubit marginal of a permutation-invariant M-qubit state."""
    M = state.num_qubits
    check_capacity(M, "M")
    if M < 2:
        raise DomainError("need at least two qubits")
    dense = state.to_dense()
    rho2 = partial_trace(dense, M, (M - 2, M - 1))
    if M > 2:
        other = partial_trace(dense, M, (0, 1))
        if np.abs(other - rho2).max() > 1e-10:
            raise ContractError("state is not permutation invariant")
    return DensityMatrix(2, rho2)
