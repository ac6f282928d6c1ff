"""SU(2) bookkeeping for systems of qubits.

Spin labels are stored exactly as twice their value. Every matrix on a
spin-j irrep uses the basis |j, m> ordered m = j, j-1, ..., -j.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence, Union

import numpy as np
from scipy.linalg import eigh_tridiagonal, expm

from .errors import CapacityError, ContractError, DomainError

MAX_DENSE_QUBITS = 12


@dataclass(frozen=True, order=True)
class HalfInteger:
    """Nonnegative half-integer j, stored as the integer 2j."""

    twice_value: int

    def __post_init__(self):
        if not isinstance(self.twice_value, (int, np.integer)) or self.twice_value < 0:
            raise DomainError(f"twice_value must be a nonnegative integer, got {self.twice_value!r}")
        object.__setattr__(self, "twice_value", int(self.twice_value))

    @classmethod
    def of(cls, j: SpinLike) -> HalfInteger:
        """Coerce a HalfInteger, int, float or Fraction spin value."""
        if isinstance(j, HalfInteger):
            return j
        twice = Fraction(j) * 2
        if twice.denominator != 1:
            raise DomainError(f"{j!r} is not a half-integer")
        return cls(int(twice))

    @property
    def value(self) -> float:
        return self.twice_value / 2

    @property
    def dim(self) -> int:
        return self.twice_value + 1

    def m_values(self) -> np.ndarray:
        """Magnetic quantum numbers j, j-1, ..., -j."""
        return self.value - np.arange(self.dim)

    def __float__(self) -> float:
        return self.value

    def __str__(self) -> str:
        if self.twice_value % 2:
            return f"{self.twice_value}/2"
        return str(self.twice_value // 2)


SpinLike = Union[HalfInteger, int, float, Fraction]


def admissible_spins(n: int) -> list[HalfInteger]:
    """Spins j occurring in n qubits, in descending order."""
    if n < 0:
        raise DomainError("number of qubits must be nonnegative")
    return [HalfInteger(t) for t in range(n, -1, -2)]


def _check_admissible(n: int, j: HalfInteger) -> None:
    if j.twice_value > n or (n - j.twice_value) % 2:
        raise DomainError(f"spin {j} does not occur in {n} qubits")


def multiplicity(M: int, j: SpinLike) -> int:
    """Number of copies of the spin-j irrep inside M qubits."""
    j = HalfInteger.of(j)
    if M < 1:
        raise DomainError("M must be at least 1")
    _check_admissible(M, j)
    num = j.dim * math.comb(M, (M - j.twice_value) // 2)
    den = (M + j.twice_value) // 2 + 1
    d, rem = divmod(num, den)
    assert rem == 0
    return d


def jz_operator(j: SpinLike) -> np.ndarray:
    return np.diag(HalfInteger.of(j).m_values())


def _jx_offdiag(j: HalfInteger) -> np.ndarray:
    # <j, m-1| J_x |j, m> for m = j, ..., -j+1
    jv = j.value
    m = j.m_values()[:-1]
    return 0.5 * np.sqrt(np.maximum(jv * (jv + 1) - m * (m - 1), 0.0))


def jx_operator(j: SpinLike) -> np.ndarray:
    j = HalfInteger.of(j)
    off = _jx_offdiag(j)
    return np.diag(off, 1) + np.diag(off, -1)


def jy_operator(j: SpinLike) -> np.ndarray:
    """J_y = (J_+ - J_-) / 2i in the descending-m basis."""
    j = HalfInteger.of(j)
    off = _jx_offdiag(j)
    # J_+ raises m, i.e. moves to a smaller row index.
    jplus = np.diag(2 * off, 1).astype(complex)
    return (jplus - jplus.T) / 2j


@lru_cache(maxsize=None)
def _wigner_d_half_pi(twice_j: int) -> np.ndarray:
    j = HalfInteger(twice_j)
    if twice_j == 0:
        return np.ones((1, 1))
    # Columns are the J_x eigenvectors, eigenvalue m in descending order.
    _, vecs = eigh_tridiagonal(np.zeros(j.dim), _jx_offdiag(j))
    d = vecs[:, ::-1]
    # Column signs of the Wigner convention d(pi/2) = exp(-i pi/2 J_y). The
    # edge rows are ~2^-j for the outer columns, too small to read a sign
    # from, so compare whole columns with the matrix exponential instead.
    ref = expm(-0.5 * math.pi * (1j * jy_operator(j)).real)
    d = d * np.where(np.einsum("ki,ki->i", d, ref) < 0, -1.0, 1.0)
    d.setflags(write=False)
    return d


def wigner_d_half_pi(j: SpinLike) -> np.ndarray:
    """Real orthogonal D with D J_z D^T = J_x; equals the Wigner d^j(pi/2)."""
    return _wigner_d_half_pi(HalfInteger.of(j).twice_value)


def _factorial(n: Fraction | int) -> int:
    n = int(n)
    if n < 0:
        raise ValueError
    return math.factorial(n)


@lru_cache(maxsize=None)
def _cg_exact(tj1: int, tm1: int, tj2: int, tm2: int, tJ: int, tM: int) -> tuple[int, Fraction]:
    """Sign and exact square of <j1 m1; j2 m2 | J M>, all arguments doubled."""
    if tm1 + tm2 != tM:
        return 0, Fraction(0)
    if not (abs(tj1 - tj2) <= tJ <= tj1 + tj2) or (tj1 + tj2 + tJ) % 2:
        return 0, Fraction(0)
    if abs(tm1) > tj1 or abs(tm2) > tj2 or abs(tM) > tJ:
        return 0, Fraction(0)
    if (tj1 + tm1) % 2 or (tj2 + tm2) % 2 or (tJ + tM) % 2:
        return 0, Fraction(0)
    h = lambda *xs: sum(xs) // 2  # noqa: E731  (half of a sum of doubled labels)
    f = _factorial
    pre = Fraction(
        (tJ + 1) * f(h(tJ, tj1, -tj2)) * f(h(tJ, -tj1, tj2)) * f(h(tj1, tj2, -tJ)),
        f(h(tj1, tj2, tJ) + 1),
    )
    pre *= (
        f(h(tJ, tM)) * f(h(tJ, -tM)) * f(h(tj1, -tm1)) * f(h(tj1, tm1))
        * f(h(tj2, -tm2)) * f(h(tj2, tm2))
    )
    total = Fraction(0)
    kmax = min(h(tj1, tj2, -tJ), h(tj1, -tm1), h(tj2, tm2))
    kmin = max(0, -h(tJ, -tj2, tm1), -h(tJ, -tj1, -tm2))
    for k in range(kmin, kmax + 1):
        den = (
            f(k) * f(h(tj1, tj2, -tJ) - k) * f(h(tj1, -tm1) - k) * f(h(tj2, tm2) - k)
            * f(h(tJ, -tj2, tm1) + k) * f(h(tJ, -tj1, -tm2) + k)
        )
        total += Fraction((-1) ** k, den)
    if total == 0:
        return 0, Fraction(0)
    return (1 if total > 0 else -1), total * total * pre


def clebsch_gordan(j1: SpinLike, m1: SpinLike, j2: SpinLike, m2: SpinLike,
                   J: SpinLike, M: SpinLike) -> float:
    """<j1 m1; j2 m2 | J M> in the Condon-Shortley convention.

    Evaluated exactly in rational arithmetic; the square root is the only
    rounding step.
    """
    def twice(x):
        t = Fraction(x.twice_value if isinstance(x, HalfInteger) else 2 * Fraction(x))
        if t.denominator != 1:
            raise DomainError(f"{x!r} is not a half-integer")
        return int(t)

    sign, sq = _cg_exact(twice(j1), twice(m1), twice(j2), twice(m2), twice(J), twice(M))
    return sign * math.sqrt(sq)


@dataclass
class BlockDiagonalState:
    """Permutation-invariant operator on ``num_qubits`` qubits.

    ``blocks`` holds one ``(j, block, multiplicity)`` triple per spin in
    descending order; the operator is the direct sum of ``block ⊗ I_multiplicity``.
    """

    num_qubits: int
    blocks: list[tuple[HalfInteger, np.ndarray, int]] = field(default_factory=list)

    def __post_init__(self):
        spins = admissible_spins(self.num_qubits)
        if [b[0] for b in self.blocks] != spins:
            raise ContractError("blocks must list every admissible spin in descending order")
        for j, block, mult in self.blocks:
            if block.shape != (j.dim, j.dim):
                raise ContractError(f"block for j={j} has shape {block.shape}")
            if mult != multiplicity(self.num_qubits, j):
                raise ContractError(f"multiplicity for j={j} must be {multiplicity(self.num_qubits, j)}")
            if np.abs(block - block.conj().T).max(initial=0.0) > 1e-12:
                raise ContractError(f"block for j={j} is not Hermitian")

    @classmethod
    def from_blocks(cls, num_qubits: int, blocks: dict[HalfInteger, np.ndarray]) -> BlockDiagonalState:
        """Build from a mapping spin -> block; missing spins get zero blocks."""
        out = []
        for j in admissible_spins(num_qubits):
            b = blocks.get(j)
            if b is None:
                b = np.zeros((j.dim, j.dim))
            out.append((j, np.asarray(b), multiplicity(num_qubits, j)))
        return cls(num_qubits, out)

    def __iter__(self) -> Iterator[tuple[HalfInteger, np.ndarray, int]]:
        return iter(self.blocks)

    def block(self, j: SpinLike) -> np.ndarray:
        j = HalfInteger.of(j)
        for jj, b, _ in self.blocks:
            if jj == j:
                return b
        raise DomainError(f"spin {j} does not occur in {self.num_qubits} qubits")

    def trace(self) -> float:
        return math.fsum(m * float(np.trace(b).real) for _, b, m in self.blocks)

    def min_eigenvalue(self) -> float:
        return min(float(np.linalg.eigvalsh(b)[0]) for _, b, _ in self.blocks)

    def validate(self, tol_psd: float = 1e-12, tol_trace: float = 1e-10) -> None:
        """Raise ContractError unless this is a normalized positive state."""
        if self.min_eigenvalue() < -tol_psd:
            raise ContractError("state is not positive semidefinite")
        if abs(self.trace() - 1.0) > tol_trace:
            raise ContractError(f"state has trace {self.trace()!r}, expected 1")

    def to_dense(self) -> np.ndarray:
        return schur_basis(self.num_qubits).to_dense(self)


def _paired_powers(rp: float, rm: float, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # rp**a * rm**b with 0**0 == 1; no ratio form, so r = 0 and r = 1 are exact.
    return np.power(rp, a) * np.power(rm, b)


def tensor_power_blocks(r: float, N: int) -> BlockDiagonalState:
    """Block form of rho^{⊗N} for rho = (I + r sigma_z) / 2."""
    if not 0.0 <= r <= 1.0:
        raise DomainError(f"Bloch length r={r} outside [0, 1]")
    if N < 1:
        raise DomainError("N must be at least 1")
    rp, rm = (1 + r) / 2, (1 - r) / 2
    blocks = {}
    for j in admissible_spins(N):
        m = j.m_values()
        blocks[j] = np.diag(_paired_powers(rp, rm, N / 2 + m, N / 2 - m))
    return BlockDiagonalState.from_blocks(N, blocks)


@dataclass(frozen=True)
class SchurBasis:
    """Orthogonal change of basis from the Schur basis to the computational one.

    Column groups are ordered by descending j, then by coupling path; inside
    a group the columns run over m = j, ..., -j. Qubit 0 is the most
    significant bit of the computational index and |0> has m = +1/2.
    """

    n: int
    columns: np.ndarray
    labels: tuple[tuple[HalfInteger, float, int], ...]
    paths: dict[HalfInteger, tuple[tuple[int, ...], ...]]

    def block_columns(self, j: SpinLike) -> np.ndarray:
        """Columns for spin j as an array of shape (2**n, d_j, 2j+1)."""
        j = HalfInteger.of(j)
        _check_admissible(self.n, j)
        start = 0
        for jj in admissible_spins(self.n):
            width = jj.dim * len(self.paths[jj])
            if jj == j:
                cols = self.columns[:, start:start + width]
                return cols.reshape(2 ** self.n, len(self.paths[jj]), jj.dim)
            start += width
        raise AssertionError("unreachable")

    def symmetric_isometry(self) -> np.ndarray:
        """Columns spanning the symmetric subspace, m = n/2, ..., -n/2."""
        return self.block_columns(HalfInteger(self.n))[:, 0, :]

    def to_dense(self, state: BlockDiagonalState) -> np.ndarray:
        if state.num_qubits != self.n:
            raise DomainError("qubit count mismatch")
        dim = 2 ** self.n
        dense = np.zeros((dim, dim), dtype=np.result_type(*(b for _, b, _ in state.blocks), float))
        for j, block, _ in state.blocks:
            if not np.any(block):
                continue
            cols = self.block_columns(j)
            flat = cols.reshape(dim, -1)
            dense += (cols @ block).reshape(dim, -1) @ flat.T
        return dense

    def to_blocks(self, dense: np.ndarray) -> BlockDiagonalState:
        """Project a dense operator onto its permutation-invariant block form.

        Each block is the average over multiplicity copies; for a permutation
        invariant operator this is exact.
        """
        blocks = {}
        for j in admissible_spins(self.n):
            cols = self.block_columns(j)
            d = cols.shape[1]
            acc = np.einsum("xak,xy,yal->kl", cols, dense, cols, optimize=True) / d
            blocks[j] = (acc + acc.conj().T) / 2
        return BlockDiagonalState.from_blocks(self.n, blocks)


_SCHUR_CACHE: dict[int, SchurBasis] = {}
_SCHUR_LOCK = threading.Lock()


def _couple_qubit(groups: dict[tuple[int, ...], np.ndarray]) -> dict[tuple[int, ...], np.ndarray]:
    """Couple one more qubit onto every (path -> columns) group."""
    out = {}
    for path, cols in groups.items():
        tj = path[-1]
        dim_old = cols.shape[0]
        for tJ in (tj + 1, tj - 1):
            if tJ < 0:
                continue
            new = np.zeros((2 * dim_old, tJ + 1))
            for k, tM in enumerate(range(tJ, -tJ - 1, -2)):
                # qubit up (|0>, even index) pairs with m1 = M - 1/2
                tm1 = tM - 1
                if abs(tm1) <= tj:
                    c = clebsch_gordan(HalfInteger(tj), Fraction(tm1, 2), Fraction(1, 2), Fraction(1, 2),
                                       HalfInteger(tJ), Fraction(tM, 2))
                    new[0::2, k] += c * cols[:, (tj - tm1) // 2]
                tm1 = tM + 1
                if abs(tm1) <= tj:
                    c = clebsch_gordan(HalfInteger(tj), Fraction(tm1, 2), Fraction(1, 2), Fraction(-1, 2),
                                       HalfInteger(tJ), Fraction(tM, 2))
                    new[1::2, k] += c * cols[:, (tj - tm1) // 2]
            out[path + (tJ,)] = new
    return out


def _build_schur_basis(n: int) -> SchurBasis:
    groups = {(1,): np.eye(2)}
    for _ in range(n - 1):
        groups = _couple_qubit(groups)
    blocks, labels, paths = [], [], {}
    for j in admissible_spins(n):
        js = sorted(p for p in groups if p[-1] == j.twice_value)
        paths[j] = tuple(js)
        for alpha, p in enumerate(js):
            blocks.append(groups[p])
            labels.extend((j, float(m), alpha) for m in j.m_values())
    columns = np.hstack(blocks)
    columns.setflags(write=False)
    return SchurBasis(n, columns, tuple(labels), paths)


def schur_basis(N: int) -> SchurBasis:
    """Sequentially coupled (Schur) basis of N qubits; cached per N."""
    if N < 1:
        raise DomainError("N must be at least 1")
    if N > MAX_DENSE_QUBITS:
        raise CapacityError(f"dense Schur basis limited to {MAX_DENSE_QUBITS} qubits, got {N}")
    with _SCHUR_LOCK:
        basis = _SCHUR_CACHE.get(N)
        if basis is None:
            basis = _SCHUR_CACHE[N] = _build_schur_basis(N)
    return basis


def total_jz_dense(n: int) -> np.ndarray:
    """Total J_z of n qubits in the computational basis (diagonal)."""
    bits = (np.arange(2 ** n)[:, None] >> np.arange(n - 1, -1, -1)) & 1
    return np.diag(0.5 * (n - 2 * bits.sum(axis=1)))


__all__: Sequence[str] = [
    "HalfInteger", "BlockDiagonalState", "SchurBasis", "admissible_spins", "multiplicity",
    "jz_operator", "jx_operator", "jy_operator", "wigner_d_half_pi", "clebsch_gordan",
    "tensor_power_blocks", "schur_basis", "total_jz_dense", "MAX_DENSE_QUBITS",
]
