import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from superbroadcast.errors import CapacityError, ContractError, DomainError
from superbroadcast.scaling import scaling_universal, single_site_bloch, universal_pure_limit
from superbroadcast.simulator import (
    DensityMatrix,
    partial_trace,
    project_measurement,
    reduce_to_two_sites,
    superbroadcast_universal,
    universal_pure_cloner,
    universal_pure_cloner_dense,
)
from superbroadcast.spinrep import HalfInteger, multiplicity, schur_basis, tensor_power_blocks

R_GRID = np.round(np.arange(1, 11) / 10, 1)


def permute_qubits(n, perm):
    """Permutation matrix sending qubit k to position perm[k]."""
    dim = 2 ** n
    idx = np.arange(dim).reshape([2] * n)
    target = np.transpose(idx, np.argsort(perm)).ravel()
    p = np.zeros((dim, dim))
    p[target, np.arange(dim)] = 1
    return p


def symmetric_projector(n):
    perms = list(itertools.permutations(range(n)))
    return sum(permute_qubits(n, p) for p in perms) / len(perms)


def swap_qubits(rho, n, a, b):
    perm = list(range(n))
    perm[a], perm[b] = perm[b], perm[a]
    p = permute_qubits(n, perm)
    return p @ rho @ p.T


def werner_cloner_dense(rho_in, n_in, M):
    s = symmetric_projector(M)
    big = np.kron(rho_in, np.eye(2 ** (M - n_in)))
    return (n_in + 1) / (M + 1) * s @ big @ s


def random_symmetric_state(rng, twice_l):
    dim = twice_l + 1
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


class TestProjectMeasurement:
    def test_single_qubit(self):
        (o,) = project_measurement(1, 0.4)
        assert o.l == HalfInteger(1)
        assert o.probability == pytest.approx(1.0)
        np.testing.assert_allclose(o.post_state, np.diag([0.7, 0.3]))

    def test_two_qubits_mixed(self):
        probs = {o.l.twice_value: o.probability for o in project_measurement(2, 0.0)}
        assert probs[2] == pytest.approx(3 / 4)
        assert probs[0] == pytest.approx(1 / 4)

    def test_two_qubits_pure(self):
        probs = {o.l.twice_value: o.probability for o in project_measurement(2, 1.0)}
        assert probs[2] == pytest.approx(1.0)
        assert probs[0] == 0.0

    def test_one_outcome_per_copy(self):
        outs = project_measurement(6, 0.3)
        for tl in (6, 4, 2, 0):
            assert sum(o.l.twice_value == tl for o in outs) == multiplicity(6, HalfInteger(tl))

    @pytest.mark.parametrize("N", range(1, 13))
    def test_completeness(self, N):
        for r in np.linspace(0, 1, 11):
            outs = project_measurement(N, float(r))
            assert math.fsum(o.probability for o in outs) == pytest.approx(1.0, abs=1e-12)
            for o in outs:
                if o.probability > 0:
                    assert np.trace(o.post_state) == pytest.approx(1.0, abs=1e-12)

    def test_matches_dense_projection(self):
        # probability of the symmetric outcome against the dense projector
        for N in (2, 3, 4):
            rho = np.diag([0.8, 0.2])
            dense = rho
            for _ in range(N - 1):
                dense = np.kron(dense, rho)
            p_sym = np.trace(symmetric_projector(N) @ dense)
            top = [o for o in project_measurement(N, 0.6) if o.l.twice_value == N][0]
            assert top.probability == pytest.approx(p_sym, abs=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            project_measurement(3, 1.1)
        with pytest.raises(CapacityError):
            project_measurement(13, 0.5)


class TestPureCloner:
    def test_identity_when_no_extra_outputs(self):
        rng = np.random.default_rng(1)
        for tl in (1, 2, 3):
            rho = random_symmetric_state(rng, tl)
            out = universal_pure_cloner(rho, HalfInteger(tl), tl)
            sym = schur_basis(tl).symmetric_isometry()
            np.testing.assert_allclose(sym.T @ out.entries @ sym, rho, atol=1e-12)

    def test_one_to_two_pure(self):
        out = universal_pure_cloner(np.diag([1.0, 0.0]), 0.5, 2)
        z0 = np.kron(np.diag([1.0, -1.0]), np.eye(2))
        assert np.trace(z0 @ out.entries).real == pytest.approx(2 / 3, abs=1e-14)
        np.testing.assert_allclose(out.entries, werner_cloner_dense(np.diag([1.0, 0.0]), 1, 2), atol=1e-14)

    def test_trace_preserved_random_inputs(self):
        rng = np.random.default_rng(7)
        for tl in range(0, 5):
            for M in range(max(tl, 1), 7):
                rho = random_symmetric_state(rng, tl)
                out = universal_pure_cloner(rho, HalfInteger(tl), M)
                assert np.trace(out.entries).real == pytest.approx(1.0, abs=1e-12)
                out.validate()

    @pytest.mark.parametrize("n_in,M", [(1, 3), (2, 3), (2, 4), (3, 5)])
    def test_against_permutation_average(self, n_in, M):
        rng = np.random.default_rng(n_in * 10 + M)
        rho = random_symmetric_state(rng, n_in)
        sym = schur_basis(n_in).symmetric_isometry()
        dense_in = sym @ rho @ sym.T
        ref = werner_cloner_dense(dense_in, n_in, M)
        out = universal_pure_cloner_dense(dense_in, n_in, M)
        np.testing.assert_allclose(out.entries, ref, atol=1e-12)

    def test_rejects_too_few_outputs(self):
        with pytest.raises(DomainError):
            universal_pure_cloner(np.eye(4) / 4, 1.5, 2)

    def test_rejects_nonsymmetric_support(self):
        singlet = np.array([0, 1, -1, 0]) / math.sqrt(2)
        with pytest.raises(ContractError):
            universal_pure_cloner_dense(np.outer(singlet, singlet), 2, 3)

    def test_rejects_unnormalized(self):
        with pytest.raises(ContractError):
            universal_pure_cloner(np.eye(2), 0.5, 3)


class TestSuperbroadcast:
    def test_two_to_three(self):
        out = superbroadcast_universal(2, 3, 0.5)
        assert single_site_bloch(out) / 0.5 == pytest.approx(5 / 6, abs=1e-9)

    def test_one_to_two(self):
        out = superbroadcast_universal(1, 2, 0.8)
        assert single_site_bloch(out) / 0.8 == pytest.approx(2 / 3, abs=1e-9)

    @pytest.mark.parametrize("N", range(1, 5))
    def test_pure_inputs(self, N):
        for M in range(N, 7):
            out = superbroadcast_universal(N, M, 1.0)
            assert single_site_bloch(out) == pytest.approx(universal_pure_limit(N, M), abs=1e-9)

    @pytest.mark.parametrize("N,M", [(N, M) for N in range(1, 5) for M in range(N, 7)])
    def test_oracle_equivalence(self, N, M):
        for r in R_GRID:
            out = superbroadcast_universal(N, M, float(r))
            assert abs(single_site_bloch(out) / r - scaling_universal(N, M, float(r))) <= 1e-9
            dense = schur_basis(M).to_dense(out)
            assert np.linalg.eigvalsh(dense)[0] >= -1e-10

    def test_two_inputs_against_dense_pipeline(self):
        # N = 2: the triplet outcome goes through the 2 -> M Werner cloner,
        # the singlet outcome through the 0 -> M one, both built here from
        # permutation averages.
        r = 0.45
        rho = np.diag([(1 + r) / 2, (1 - r) / 2])
        rho2 = np.kron(rho, rho)
        s2 = symmetric_projector(2)
        p_trip = np.trace(s2 @ rho2)
        for M in (2, 3, 4):
            ref = werner_cloner_dense(s2 @ rho2 @ s2, 2, M)
            ref += (1 - p_trip) * werner_cloner_dense(np.ones((1, 1)), 0, M)
            out = schur_basis(M).to_dense(superbroadcast_universal(2, M, r))
            np.testing.assert_allclose(out, ref, atol=1e-12)

    @pytest.mark.parametrize("N,M", [(3, 4), (4, 5)])
    def test_permutation_invariance(self, N, M):
        dense = schur_basis(M).to_dense(superbroadcast_universal(N, M, 0.6))
        for a, b in itertools.combinations(range(M), 2):
            assert np.abs(swap_qubits(dense, M, a, b) - dense).max() <= 1e-10

    def test_output_in_symmetric_block_only(self):
        out = superbroadcast_universal(3, 5, 0.4)
        for j, block, _ in out:
            if j.twice_value != 5:
                assert not np.any(block)

    def test_more_inputs_than_outputs_with_realized_high_spin(self):
        with pytest.raises(DomainError):
            superbroadcast_universal(4, 3, 0.5)

    def test_capacity(self):
        with pytest.raises(CapacityError):
            superbroadcast_universal(13, 14, 0.5)
        with pytest.raises(CapacityError):
            superbroadcast_universal(2, 13, 0.5)

    @given(st.integers(1, 5), st.integers(0, 3), st.floats(0.0, 1.0))
    @settings(max_examples=30, deadline=None)
    def test_outputs_are_states(self, N, extra, r):
        out = superbroadcast_universal(N, N + extra, r)
        assert out.trace() == pytest.approx(1.0, abs=1e-10)
        assert out.min_eigenvalue() >= -1e-10


class TestPartialTrace:
    def test_product_marginals(self):
        for M in (2, 3, 5):
            for r in (0.0, 0.3, 1.0):
                rho2 = reduce_to_two_sites(tensor_power_blocks(r, M))
                rp, rm = (1 + r) / 2, (1 - r) / 2
                np.testing.assert_allclose(rho2.entries, np.diag([rp * rp, rp * rm, rm * rp, rm * rm]), atol=1e-12)

    def test_two_qubits_is_identity_map(self):
        state = superbroadcast_universal(1, 2, 0.7)
        np.testing.assert_allclose(reduce_to_two_sites(state).entries, schur_basis(2).to_dense(state), atol=1e-14)

    def test_output_supported_on_triplet(self):
        rho2 = reduce_to_two_sites(superbroadcast_universal(4, 5, 0.9)).entries
        singlet = np.array([0, 1, -1, 0]) / math.sqrt(2)
        assert abs(singlet @ rho2 @ singlet) < 1e-10

    def test_partial_trace_order(self):
        a = np.diag([0.9, 0.1])
        b = np.array([[0.5, 0.5], [0.5, 0.5]])
        c = np.eye(2) / 2
        rho = np.kron(np.kron(a, b), c)
        np.testing.assert_allclose(partial_trace(rho, 3, (1,)), b)
        np.testing.assert_allclose(partial_trace(rho, 3, (2, 0)), np.kron(c, a))

    def test_capacity_and_size(self):
        with pytest.raises(DomainError):
            reduce_to_two_sites(tensor_power_blocks(0.5, 1))


class TestDensityMatrix:
    def test_shape(self):
        with pytest.raises(ContractError):
            DensityMatrix(2, np.eye(3))

    def test_validate(self):
        DensityMatrix(1, np.eye(2) / 2).validate()
        with pytest.raises(ContractError):
            DensityMatrix(1, np.diag([1.2, -0.2])).validate()
        with pytest.raises(ContractError):
            DensityMatrix(1, np.eye(2)).validate()
        with pytest.raises(ContractError):
            DensityMatrix(1, np.array([[0.5, 0.1], [0.0, 0.5]])).validate()
