import numpy as np
import pytest

from bayescub.bench import toy_integrand
from bayescub.errors import NotUnisolvent
from bayescub.gp import (
    Dataset,
    condition,
    finite_prior,
    flat_prior,
    lagrange_functions,
    posterior_cov,
    posterior_mean,
)
from bayescub.kernels import gaussian_kernel, kernel_matrix, matern_kernel
from bayescub.linalg import jittered_factorize
from bayescub.polyspace import empty_space, evaluate_basis, total_degree_space

KERNEL = gaussian_kernel(0.8)


def toy_data(n=6, lo=-2.0, hi=2.0):
    X = np.linspace(lo, hi, n)
    return Dataset(X=X, f=toy_integrand(X))


class TestDataset:
    def test_duplicate_nodes_rejected(self):
        with pytest.raises(ValueError):
            Dataset(X=np.array([0.0, 0.0, 1.0]), f=np.zeros(3))

    def test_shapes(self):
        data = Dataset(X=np.array([0.0, 1.0]), f=np.array([2.0, 3.0]))
        assert data.n == 2 and data.d == 1
        assert data.X.shape == (2, 1)


class TestFlatMode:
    def test_empty_space_reduces_to_centred_posterior(self, rng):
        data = toy_data(7)
        post = condition(flat_prior(empty_space(1)), KERNEL, data)
        xs = np.linspace(-3, 3, 11)
        K = kernel_matrix(KERNEL, data.X, data.X)
        kq = kernel_matrix(KERNEL, xs.reshape(-1, 1), data.X)
        oracle = kq @ np.linalg.solve(K, data.f)
        np.testing.assert_allclose(posterior_mean(post, xs), oracle, atol=1e-9)

    def test_polynomial_reproduction(self, rng):
        space = total_degree_space(3, 1)
        X = np.linspace(-2, 2, 8)
        coef = rng.standard_normal(space.Q)
        p = lambda x: evaluate_basis(space, np.atleast_2d(x)) @ coef
        data = Dataset(X=X, f=p(X.reshape(-1, 1)))
        post = condition(flat_prior(space), KERNEL, data)
        xs = rng.uniform(-4.0, 4.0, 50)
        vals = posterior_mean(post, xs)
        expected = p(xs.reshape(-1, 1))
        np.testing.assert_allclose(vals, expected, rtol=1e-8, atol=1e-10)
        np.testing.assert_allclose(post.alpha, 0.0, atol=1e-8)

    def test_single_node_constant_space(self):
        data = Dataset(X=np.array([0.3]), f=np.array([4.2]))
        post = condition(flat_prior(total_degree_space(0, 1)), KERNEL, data)
        for x in (-5.0, 0.0, 7.0):
            assert posterior_mean(post, x) == pytest.approx(4.2, rel=1e-12)

    def test_interpolation_and_zero_variance_at_nodes(self):
        data = toy_data(9)
        for space in (empty_space(1), total_degree_space(2, 1)):
            post = condition(flat_prior(space), KERNEL, data)
            means = posterior_mean(post, data.X)
            np.testing.assert_allclose(means, data.f, rtol=1e-8)
            for x in data.X[:, 0]:
                assert abs(posterior_cov(post, x, x)) <= 1e-8 * KERNEL.amplitude

    def test_not_unisolvent_raises(self):
        data = Dataset(X=np.array([0.0, 1.0]), f=np.zeros(2))
        with pytest.raises(NotUnisolvent):
            condition(flat_prior(total_degree_space(3, 1)), KERNEL, data)

    def test_square_regime_equals_parametric_interpolant(self, rng):
        # Q = n: the mean is the unique interpolant in the space everywhere
        X = np.array([-1.5, -0.4, 0.6, 1.7])
        data = Dataset(X=X, f=toy_integrand(X))
        space = total_degree_space(3, 1)
        post = condition(flat_prior(space), KERNEL, data)
        V = evaluate_basis(space, data.X)
        coef = np.linalg.solve(V, data.f)
        xs = rng.uniform(-3, 3, 25)
        interp = evaluate_basis(space, xs.reshape(-1, 1)) @ coef
        np.testing.assert_allclose(posterior_mean(post, xs), interp, rtol=1e-8, atol=1e-10)
        np.testing.assert_allclose(post.alpha, 0.0, atol=1e-8)

    def test_flat_mean_differs_from_interpolant_generically(self):
        # with n > Q the kernel part contributes off the nodes
        data = toy_data(8)
        space = total_degree_space(3, 1)
        post = condition(flat_prior(space), KERNEL, data)
        V = evaluate_basis(space, data.X)
        coef, *_ = np.linalg.lstsq(V, data.f, rcond=None)
        x = 0.123
        interp = float((evaluate_basis(space, np.array([[x]])) @ coef)[0])
        assert abs(posterior_mean(post, x) - interp) > 1e-6


class TestFiniteMode:
    def test_flat_limit_consistency(self):
        data = toy_data(7)
        space = total_degree_space(2, 1)
        flat = condition(flat_prior(space), KERNEL, data)
        xs = np.linspace(-3, 3, 50)
        flat_means = posterior_mean(flat, xs)
        sup_devs = []
        for s2 in (1e2, 1e4, 1e6):
            finite = condition(finite_prior(space, s2 * np.eye(space.Q)), KERNEL, data)
            sup_devs.append(np.max(np.abs(posterior_mean(finite, xs) - flat_means)))
        assert sup_devs[0] > sup_devs[1] > sup_devs[2]
        assert sup_devs[2] <= 1e-5 * np.max(np.abs(data.f))

    def test_equivalent_kernel_identity(self):
        # conditioning with k + sigma^2 sum_j p_j p_j and no parametric part
        # reproduces the finite-covariance posterior mean (eta = 0)
        data = toy_data(7)
        space = total_degree_space(2, 1)
        s2 = 37.0
        finite = condition(finite_prior(space, s2 * np.eye(space.Q)), KERNEL, data)
        xs = np.linspace(-3, 3, 40)
        P = evaluate_basis(space, data.X)
        Pq = evaluate_basis(space, xs.reshape(-1, 1))
        K = kernel_matrix(KERNEL, data.X, data.X)
        kq = kernel_matrix(KERNEL, xs.reshape(-1, 1), data.X)
        lhs = (kq + s2 * Pq @ P.T) @ np.linalg.solve(K + s2 * P @ P.T, data.f)
        np.testing.assert_allclose(posterior_mean(finite, xs), lhs, rtol=1e-8, atol=1e-10)

    def test_finite_covariance_formula(self, rng):
        # covariance equals k + p S p' - b M^{-1} b' assembled directly
        data = toy_data(5)
        space = total_degree_space(1, 1)
        S = np.array([[2.0, 0.3], [0.3, 1.0]])
        post = condition(finite_prior(space, S), KERNEL, data)
        x, y = 0.37, -1.21
        P = evaluate_basis(space, data.X)
        px = evaluate_basis(space, np.array([[x]]))
        py = evaluate_basis(space, np.array([[y]]))
        kx = kernel_matrix(KERNEL, np.array([[x]]), data.X)
        ky = kernel_matrix(KERNEL, np.array([[y]]), data.X)
        M = kernel_matrix(KERNEL, data.X, data.X) + P @ S @ P.T
        bx = kx + px @ S @ P.T
        by = ky + py @ S @ P.T
        kxy = kernel_matrix(KERNEL, np.array([[x]]), np.array([[y]]))
        oracle = float((kxy + px @ S @ py.T - bx @ np.linalg.solve(M, by.T))[0, 0])
        assert posterior_cov(post, x, y) == pytest.approx(oracle, abs=1e-10)

    def test_interpolation(self):
        data = toy_data(6)
        space = total_degree_space(1, 1)
        post = condition(finite_prior(space, 5.0 * np.eye(2)), KERNEL, data)
        np.testing.assert_allclose(posterior_mean(post, data.X), data.f, rtol=1e-9)

    def test_rejects_indefinite_covariance(self):
        data = toy_data(4)
        space = total_degree_space(1, 1)
        with pytest.raises(ValueError):
            condition(finite_prior(space, np.diag([1.0, -1.0])), KERNEL, data)


class TestPosteriorCov:
    def test_symmetry_and_positivity(self, rng):
        data = toy_data(7)
        post = condition(flat_prior(total_degree_space(2, 1)), KERNEL, data)
        xs = rng.uniform(-3, 3, 10)
        for x in xs[:4]:
            for y in xs[:4]:
                assert posterior_cov(post, x, y) == pytest.approx(posterior_cov(post, y, x), abs=1e-12)
        for x in xs:
            assert posterior_cov(post, x, x) >= -1e-10 * KERNEL.amplitude

    def test_covariance_matrix_factorizable(self, rng):
        data = toy_data(7)
        post = condition(flat_prior(total_degree_space(2, 1)), KERNEL, data)
        xs = rng.uniform(-3, 3, (10, 1))
        C = posterior_cov(post, xs, xs)
        assert C.shape == (10, 10)
        F = jittered_factorize(C)
        assert F.jitter_used <= 1e-6 * KERNEL.amplitude

    def test_flat_variance_dominates_centred_variance(self, rng):
        data = toy_data(8)
        bc_post = condition(flat_prior(empty_space(1)), KERNEL, data)
        bsc_post = condition(flat_prior(total_degree_space(3, 1)), KERNEL, data)
        for x in rng.uniform(-3, 3, 20):
            assert posterior_cov(bsc_post, x, x) >= posterior_cov(bc_post, x, x) - 1e-10


class TestLagrange:
    @pytest.mark.parametrize("mode", ["flat", "finite"])
    def test_cardinality(self, mode):
        data = toy_data(6)
        space = total_degree_space(2, 1)
        prior = flat_prior(space) if mode == "flat" else finite_prior(space, 4.0 * np.eye(space.Q))
        post = condition(prior, KERNEL, data)
        for j, xj in enumerate(data.X[:, 0]):
            u, v = lagrange_functions(post, xj)
            np.testing.assert_allclose(u, np.eye(data.n)[j], atol=1e-8)
            np.testing.assert_allclose(v, 0.0, atol=1e-8)

    def test_mean_identity_with_nonzero_eta_flat(self, rng):
        data = toy_data(6)
        space = total_degree_space(2, 1)
        eta = rng.standard_normal(space.Q)
        post = condition(flat_prior(space, coefficient_mean=eta), KERNEL, data)
        for x in rng.uniform(-3, 3, 20):
            u, v = lagrange_functions(post, x)
            lhs = float(u @ data.f - v @ eta)
            assert posterior_mean(post, x) == pytest.approx(lhs, rel=1e-8, abs=1e-10)

    def test_mean_identity_with_nonzero_eta_finite(self, rng):
        # with a finite coefficient covariance the eta correction carries the
        # inverse covariance: s = u^T f - (S^{-1} v)^T eta, since v = S (P^T u - p)
        data = toy_data(6)
        space = total_degree_space(2, 1)
        S = np.array([[4.0, 0.5, 0.0], [0.5, 2.0, 0.0], [0.0, 0.0, 1.5]])
        eta = rng.standard_normal(space.Q)
        post = condition(finite_prior(space, S, coefficient_mean=eta), KERNEL, data)
        for x in rng.uniform(-3, 3, 20):
            u, v = lagrange_functions(post, x)
            lhs = float(u @ data.f - np.linalg.solve(S, v) @ eta)
            assert posterior_mean(post, x) == pytest.approx(lhs, rel=1e-8, abs=1e-10)

    def test_lagrange_solves_block_system_finite(self, rng):
        data = toy_data(6)
        space = total_degree_space(2, 1)
        S = 4.0 * np.eye(space.Q)
        post = condition(finite_prior(space, S), KERNEL, data)
        K = kernel_matrix(KERNEL, data.X, data.X)
        P = evaluate_basis(space, data.X)
        x = 0.77
        u, v = lagrange_functions(post, x)
        kq = kernel_matrix(KERNEL, np.array([[x]]), data.X)[0]
        pq = evaluate_basis(space, np.array([[x]]))[0]
        np.testing.assert_allclose(K @ u + P @ v, kq, atol=1e-9)
        np.testing.assert_allclose(P.T @ u - np.linalg.solve(S, v), pq, atol=1e-9)

    def test_partition_of_unity_with_constants(self, rng):
        # constants lie in the space, so the cardinal functions sum to one
        data = toy_data(7)
        post = condition(flat_prior(total_degree_space(1, 1)), KERNEL, data)
        for x in rng.uniform(-4, 4, 10):
            u, _ = lagrange_functions(post, x)
            assert float(u.sum()) == pytest.approx(1.0, abs=1e-9)


class TestMatern:
    def test_matern_flat_posterior(self):
        data = toy_data(8)
        post = condition(flat_prior(total_degree_space(1, 1)), matern_kernel(2.5, 0.9), data)
        np.testing.assert_allclose(posterior_mean(post, data.X), data.f, rtol=1e-8)
