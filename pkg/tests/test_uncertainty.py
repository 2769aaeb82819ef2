import numpy as np
import pytest

from shallownet import states, uncertainty
from shallownet.linalg import SIGMA_X, SIGMA_Y, SIGMA_Z, operator_norm
from shallownet.network import cat_ladder, identity_network
from shallownet.states import (
    SeparableInput,
    cat_state,
    mix,
    product_state,
    random_density_state,
    random_product_input,
    random_pure_state,
    to_density,
)
from shallownet.uncertainty import (
    AveragingObservable,
    Hypersurface,
    SiteObservable,
    averaging_matrix,
    check_uncertainty_bound,
    commutator_expectation,
    commutator_trace_norm,
    commutator_witness,
    estimate_e,
    fibonacci_sphere,
    hypersurface_value,
    max_variance_qubit,
    uncertainty_bound,
    variance,
)

KET0 = np.array([1, 0], dtype=complex)
Z_HALF = SiteObservable(np.diag([0.5, -0.5]).astype(complex))
X_HALF = SiteObservable(SIGMA_X / 2)


def zeros_state(n):
    return to_density(product_state([KET0] * n))


def maximally_mixed(n):
    return states.DensityState(n, 2, np.eye(2**n, dtype=complex) / 2**n)


class TestSiteObservable:
    def test_stored_traceless(self):
        c = SiteObservable(np.diag([1.0, 0.0]).astype(complex))
        assert np.trace(c.matrix) == pytest.approx(0.0, abs=1e-14)
        assert c.spread == pytest.approx(1.0)

    def test_spread_limit_enforced(self):
        with pytest.raises(ValueError):
            SiteObservable(SIGMA_Z)  # spread 2

    def test_centered_norm_half_for_qutrit(self):
        # traceless is not spectrum-centered once l > 2
        c = SiteObservable(np.diag([2 / 3, -1 / 3, -1 / 3]).astype(complex))
        assert operator_norm(c.matrix) > 0.5
        assert operator_norm(c.centered()) == pytest.approx(0.5, abs=1e-12)

    def test_from_bloch(self):
        c = SiteObservable.from_bloch([0, 0, 1])
        assert np.allclose(c.matrix, np.diag([0.5, -0.5]))


class TestAveragingMatrix:
    def test_single_site(self):
        assert np.allclose(averaging_matrix(Z_HALF, 1), np.diag([0.5, -0.5]))

    def test_two_sites(self):
        got = averaging_matrix(Z_HALF, 2)
        expect = (np.kron(SIGMA_Z, np.eye(2)) + np.kron(np.eye(2), SIGMA_Z)) / 4
        assert np.allclose(got, expect)

    def test_norm_is_half(self):
        for n in (1, 2, 4, 8):
            assert operator_norm(averaging_matrix(Z_HALF, n)) == pytest.approx(0.5, abs=1e-10)

    def test_materialized_through_dataclass(self):
        abar = AveragingObservable(Z_HALF, 3)
        assert np.allclose(abar.matrix(), averaging_matrix(Z_HALF, 3))


class TestVariance:
    def test_cat_z(self):
        for n in (2, 4, 8):
            assert variance(averaging_matrix(Z_HALF, n), to_density(cat_state(n))) == pytest.approx(
                0.25, abs=1e-10
            )

    def test_zeros_z_eigenstate(self):
        assert variance(averaging_matrix(Z_HALF, 4), zeros_state(4)) == pytest.approx(0.0, abs=1e-12)

    def test_zeros_x_scaling(self):
        for n in (1, 2, 4, 8):
            got = variance(averaging_matrix(X_HALF, n), zeros_state(n))
            assert got == pytest.approx(1 / (4 * n), abs=1e-10)


class TestCommutatorTraceNorm:
    def test_maximally_mixed_commutes(self):
        for n in (1, 3):
            assert commutator_trace_norm(averaging_matrix(Z_HALF, n), maximally_mixed(n)) == pytest.approx(
                0.0, abs=1e-12
            )

    def test_cat_reaches_one(self):
        for n in (2, 4, 8):
            got = commutator_trace_norm(averaging_matrix(Z_HALF, n), to_density(cat_state(n)))
            assert got == pytest.approx(1.0, abs=1e-10)

    def test_single_qubit_closed_form(self):
        # For |0><0| and c = (v . sigma)/2 the norm is sqrt(vx^2 + vy^2).
        rho = zeros_state(1)
        for v in ([1, 0, 0], [0, 1, 0], [0.6, 0.8, 0.0], [0.6, 0.0, 0.8]):
            c = SiteObservable.from_bloch(v)
            expect = np.hypot(v[0], v[1])
            assert commutator_trace_norm(c.matrix, rho) == pytest.approx(expect, abs=1e-10)

    def test_witness_attains_value(self):
        rng = np.random.default_rng(19)
        for _ in range(5):
            rho = random_density_state(3, 2, rng)
            abar = averaging_matrix(Z_HALF, 3)
            value, b = commutator_witness(abar, rho)
            assert operator_norm(b) <= 1 + 1e-10
            assert commutator_expectation(rho, abar, b) == pytest.approx(value, abs=1e-8)


class TestMaxVarianceQubit:
    def test_cat_direction_z(self):
        value, direction = max_variance_qubit(to_density(cat_state(6)))
        assert value == pytest.approx(0.25, abs=1e-10)
        assert abs(direction[2]) == pytest.approx(1.0, abs=1e-8)

    def test_zeros_direction_in_xy_plane(self):
        value, direction = max_variance_qubit(zeros_state(4))
        assert value == pytest.approx(1 / 16, abs=1e-10)
        assert abs(direction[2]) <= 1e-8

    def test_maximally_mixed_is_classical_noise_floor(self):
        # Uncorrelated coin flips: Var = 1/(4n) in every direction, even though
        # the commutator trace norm (the quantum part) is exactly 0.
        value, _ = max_variance_qubit(maximally_mixed(3))
        assert value == pytest.approx(1 / 12, abs=1e-12)
        assert commutator_trace_norm(
            averaging_matrix(Z_HALF, 3), maximally_mixed(3)
        ) == pytest.approx(0.0, abs=1e-12)

    def test_grid_search_oracle(self):
        rng = np.random.default_rng(20)
        rho = random_density_state(2, 2, rng)
        value, _ = max_variance_qubit(rho)
        grid_best = max(
            variance(averaging_matrix(SiteObservable.from_bloch(v), 2), rho)
            for v in fibonacci_sphere(1000)
        )
        assert value >= grid_best - 1e-9
        assert value == pytest.approx(grid_best, abs=1e-3)


class TestEstimate:
    def test_cat8(self):
        report = estimate_e(to_density(cat_state(8)))
        assert report.e_lower == pytest.approx(1.0, abs=1e-6)
        assert report.variance_bound == pytest.approx(1.0, abs=1e-6)

    def test_maximally_mixed(self):
        assert estimate_e(maximally_mixed(3)).e_lower <= 1e-10

    def test_zeros_closed_form(self):
        for n in (2, 4, 8):
            report = estimate_e(zeros_state(n))
            assert report.e_lower == pytest.approx(1 / np.sqrt(n), abs=1e-4)

    def test_matches_dense_grid(self):
        rng = np.random.default_rng(21)
        for n in (2, 3, 4):
            rho = random_density_state(n, 2, rng, rank=2)
            report = estimate_e(rho)
            grid_best = max(
                commutator_trace_norm(
                    averaging_matrix(SiteObservable.from_bloch(v), n), rho
                )
                for v in fibonacci_sphere(10_000)
            )
            assert abs(report.e_lower - grid_best) <= 1e-3

    def test_deterministic(self):
        rng = np.random.default_rng(22)
        rho = random_density_state(3, 2, rng)
        a = estimate_e(rho, seed=5)
        b = estimate_e(rho, seed=5)
        assert a.e_lower == b.e_lower
        assert np.array_equal(a.maximizer.matrix, b.maximizer.matrix)

    def test_achieved_value_is_certified(self):
        rng = np.random.default_rng(23)
        rho = random_density_state(3, 2, rng)
        report = estimate_e(rho)
        direct = commutator_trace_norm(averaging_matrix(report.maximizer, 3), rho)
        assert direct == pytest.approx(report.e_lower, abs=1e-10)

    def test_qutrit_path(self):
        rng = np.random.default_rng(24)
        sep = states.random_product_input(2, 3, rng)
        report = estimate_e(mix(sep), restarts=4, seed=1)
        assert report.variance_bound is None
        assert 0 < report.e_lower <= uncertainty_bound(2, 0) + 1e-8

    def test_permutation_invariance(self):
        rng = np.random.default_rng(25)
        rho = random_density_state(3, 2, rng)
        # relabel sites by a cyclic permutation
        perm = np.zeros((8, 8))
        for idx in range(8):
            bits = [(idx >> (2 - s)) & 1 for s in range(3)]
            rolled = bits[1:] + bits[:1]
            jdx = rolled[0] * 4 + rolled[1] * 2 + rolled[2]
            perm[jdx, idx] = 1
        permuted = states.DensityState(3, 2, perm @ rho.matrix @ perm.T)
        a = estimate_e(rho).e_lower
        b = estimate_e(permuted).e_lower
        assert a == pytest.approx(b, abs=1e-6)


class TestHypersurface:
    def test_identity_witness_gives_zero(self):
        rho = to_density(cat_state(3))
        h = Hypersurface(AveragingObservable(Z_HALF, 3), np.eye(8, dtype=complex), 0.0)
        assert hypersurface_value(rho, h) == pytest.approx(0.0, abs=1e-12)

    def test_duality_attainment_on_cat(self):
        rho = to_density(cat_state(5))
        abar = AveragingObservable(Z_HALF, 5)
        value, b = commutator_witness(abar, rho)
        h = Hypersurface(abar, b, 1.0)
        assert hypersurface_value(rho, h) == pytest.approx(value, abs=1e-8)
        assert value == pytest.approx(1.0, abs=1e-8)

    def test_separable_states_stay_below_baseline(self):
        rng = np.random.default_rng(26)
        n = 6
        for _ in range(10):
            rho = mix(random_product_input(n, 2, rng))
            abar = AveragingObservable(Z_HALF, n)
            _, b = commutator_witness(abar, rho)
            assert abs(commutator_expectation(rho, abar, b)) <= np.sqrt(2 / n) + 1e-8

    def test_norm_validation(self):
        with pytest.raises(ValueError):
            Hypersurface(AveragingObservable(Z_HALF, 2), 3.0 * np.eye(4, dtype=complex), 0.0)


class TestIdentities:
    def test_pure_state_identity(self):
        rng = np.random.default_rng(27)
        for _ in range(20):
            n = int(rng.integers(1, 4))
            psi = random_pure_state(n, 2, rng)
            c = uncertainty.random_site_observable(2, rng)
            abar = averaging_matrix(c, n)
            rho = to_density(psi)
            lhs = commutator_trace_norm(abar, rho)
            rhs = 2 * np.sqrt(variance(abar, rho))
            assert lhs == pytest.approx(rhs, abs=1e-8)

    def test_mixed_state_inequality(self):
        rng = np.random.default_rng(28)
        for _ in range(20):
            n = int(rng.integers(1, 4))
            rho = random_density_state(n, 2, rng)
            c = uncertainty.random_site_observable(2, rng)
            abar = averaging_matrix(c, n)
            assert commutator_trace_norm(abar, rho) <= 2 * np.sqrt(variance(abar, rho)) + 1e-8

    def test_convexity_triangle(self):
        rng = np.random.default_rng(29)
        parts = [random_density_state(2, 2, rng) for _ in range(3)]
        weights = [0.5, 0.3, 0.2]
        mixture = states.DensityState(
            2, 2, sum(w * p.matrix for w, p in zip(weights, parts))
        )
        abar = averaging_matrix(estimate_e(mixture).maximizer, 2)
        lhs = commutator_trace_norm(abar, mixture)
        rhs = sum(w * commutator_trace_norm(abar, p) for w, p in zip(weights, parts))
        assert lhs <= rhs + 1e-10


class TestBoundCheck:
    def test_identity_network_baseline(self):
        sep = SeparableInput(((1.0, (np.outer(KET0, KET0),) * 8),))
        check = check_uncertainty_bound(identity_network(8), sep)
        assert check.e_lower == pytest.approx(1 / np.sqrt(8), abs=1e-4)
        assert check.bound == pytest.approx(0.5)
        assert check.passed

    def test_ladder_with_prologue(self):
        sep = SeparableInput(((1.0, (np.outer(KET0, KET0),) * 8),))
        check = check_uncertainty_bound(cat_ladder(3, include_prologue=True), sep)
        assert check.e_lower == pytest.approx(1.0, abs=1e-6)
        assert check.bound == pytest.approx(np.sqrt(2 / 8) * 8)
        assert check.passed
