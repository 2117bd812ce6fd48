import numpy as np
import pytest
from scipy import integrate

from bayescub.cubature import bc, bsc, bsc_square, endow_rule, normalized_bc, wce
from bayescub.errors import NotUnisolvent, ZeroWeight
from bayescub.gp import Dataset
from bayescub.kernels import gaussian_kernel, matern_kernel
from bayescub.measures import StandardGaussian, UniformBox, kernel_mean_set, poly_moments
from bayescub.polyspace import empty_space, evaluate_basis, total_degree_space, vandermonde

STD1 = StandardGaussian(1)
GAUSS = gaussian_kernel(1.0)


def toy_dataset(n=10, half_width=None):
    half = np.sqrt(n) if half_width is None else half_width
    X = np.linspace(-half, half, n)
    from bayescub.bench import toy_integrand

    return Dataset(X=X, f=toy_integrand(X))


class TestBC:
    def test_zero_integrand(self):
        data = toy_dataset(8)
        zero = Dataset(X=data.X, f=np.zeros(8))
        r0 = bc(GAUSS, STD1, zero)
        r1 = bc(GAUSS, STD1, data)
        assert r0.mean == 0.0
        assert r0.variance == pytest.approx(r1.variance, rel=1e-14)

    def test_stddev_equals_wce_of_its_weights(self):
        data = toy_dataset(12)
        r = bc(GAUSS, STD1, data)
        assert r.stddev == pytest.approx(wce(GAUSS, STD1, data.X, r.weights), rel=1e-8)

    def test_small_lengthscale_weights_degenerate(self):
        # unit-spaced nodes, tiny lengthscale: all weights collapse toward zero
        X = np.arange(10, dtype=float)
        data = Dataset(X=X, f=np.ones(10))
        r = bc(GAUSS.with_lengthscale(1e-3), STD1, data)
        assert np.max(np.abs(r.weights)) <= 1e-3


class TestBSC:
    def test_empty_space_equals_bc(self):
        data = toy_dataset(9)
        r_bc = bc(GAUSS, STD1, data)
        r_bsc = bsc(GAUSS, STD1, empty_space(1), data)
        np.testing.assert_allclose(r_bsc.weights, r_bc.weights, atol=1e-10)
        assert r_bsc.mean == pytest.approx(r_bc.mean, abs=1e-10)
        assert r_bsc.variance == pytest.approx(r_bc.variance, abs=1e-10)

    def test_polynomial_exactness(self, rng):
        for m, d in [(1, 1), (3, 1), (2, 2), (1, 3)]:
            space = total_degree_space(m, d)
            measure = StandardGaussian(d)
            X = rng.standard_normal((space.Q + 6, d))
            coef = rng.standard_normal(space.Q)
            f = evaluate_basis(space, X) @ coef
            data = Dataset(X=X, f=f)
            result = bsc(GAUSS, measure, space, data)
            truth = float(poly_moments(space, measure) @ coef)
            assert abs(result.mean - truth) <= 1e-8 * (1.0 + abs(truth))

    def test_constant_space_weights_sum_to_one(self, rng):
        X = rng.standard_normal((11, 1))
        data = Dataset(X=X, f=rng.standard_normal(11))
        r = bsc(GAUSS, STD1, total_degree_space(0, 1), data)
        assert float(r.weights.sum()) == pytest.approx(1.0, abs=1e-10)

    def test_exactness_constraint_identity(self, rng):
        for m in (0, 1, 2, 3):
            space = total_degree_space(m, 1)
            data = toy_dataset(12)
            r = bsc(GAUSS, STD1, space, data)
            P = vandermonde(space, data.X).matrix
            p_nu = poly_moments(space, STD1)
            np.testing.assert_allclose(P.T @ r.weights, p_nu, atol=1e-8)

    def test_variance_dominates_bc(self):
        data = toy_dataset(14)
        r_bc = bc(GAUSS, STD1, data)
        for m in (0, 1, 2, 3, 4):
            r = bsc(GAUSS, STD1, total_degree_space(m, 1), data)
            assert r.variance >= r_bc.variance - 1e-10

    def test_not_unisolvent(self):
        data = Dataset(X=np.array([0.0, 1.0]), f=np.zeros(2))
        with pytest.raises(NotUnisolvent):
            bsc(GAUSS, STD1, total_degree_space(3, 1), data)

    def test_eta_shift(self, rng):
        space = total_degree_space(2, 1)
        data = toy_dataset(9)
        eta = rng.standard_normal(space.Q)
        r0 = bsc(GAUSS, STD1, space, data)
        r1 = bsc(GAUSS, STD1, space, data, eta=eta)
        assert r1.mean == pytest.approx(r0.mean - float(r0.poly_weights @ eta), rel=1e-12)
        assert r1.variance == pytest.approx(r0.variance, rel=1e-12)

    def test_affine_equivariance(self):
        # rescaling nodes, lengthscale, and the Gaussian measure jointly
        # leaves the weights unchanged
        c = 2.7
        X = np.linspace(-2.0, 2.0, 9)
        f = np.sin(X)
        space = total_degree_space(2, 1)
        r1 = bsc(GAUSS.with_lengthscale(0.8), STD1, space, Dataset(X=X, f=f))
        from bayescub.measures import DiagonalGaussian

        scaled_measure = DiagonalGaussian((0.0,), (c * c,))
        r2 = bsc(GAUSS.with_lengthscale(0.8 * c), scaled_measure, space, Dataset(X=c * X, f=f))
        np.testing.assert_allclose(r1.weights, r2.weights, atol=1e-9)

    def test_variance_equals_wce_squared(self):
        # holds for the saddle-point weights at every space dimension
        data = toy_dataset(10)
        for m in (0, 2, 4):
            r = bsc(GAUSS, STD1, total_degree_space(m, 1), data)
            assert r.variance == pytest.approx(wce(GAUSS, STD1, data.X, r.weights) ** 2, rel=1e-7, abs=1e-12)


class TestNormalizedBC:
    def test_equals_bsc_constant_space(self, rng):
        # moderately conditioned random configurations: both routes agree to
        # 1e-10 (forward error scales with the kernel-matrix condition number,
        # so extreme lengthscales are out of scope for this identity)
        for seed in range(8):
            local = np.random.default_rng(seed)
            X = local.uniform(-2, 2, (8, 1))
            data = Dataset(X=X, f=local.standard_normal(8))
            kernel = GAUSS.with_lengthscale(float(local.uniform(0.3, 1.0)))
            r_nbc = normalized_bc(kernel, STD1, data)
            r_bsc = bsc(kernel, STD1, total_degree_space(0, 1), data)
            np.testing.assert_allclose(r_nbc.weights, r_bsc.weights, atol=1e-10)
            assert r_nbc.variance == pytest.approx(r_bsc.variance, rel=1e-6, abs=1e-12)

    def test_tiny_lengthscale_uniform_weights(self):
        X = np.arange(12, dtype=float)
        data = Dataset(X=X, f=np.ones(12))
        r = normalized_bc(GAUSS.with_lengthscale(1e-3), STD1, data)
        assert np.max(np.abs(r.weights - 1.0 / 12)) <= 1e-3

    def test_single_node(self):
        data = Dataset(X=np.array([0.4]), f=np.array([2.0]))
        r = normalized_bc(GAUSS, STD1, data)
        np.testing.assert_allclose(r.weights, [1.0], atol=1e-12)
        assert r.mean == pytest.approx(2.0)


class TestSquareRegime:
    def test_symmetric_pair(self):
        X = np.array([-1.0, 1.0])
        data = Dataset(X=X, f=np.array([3.0, 5.0]))
        r = bsc_square(GAUSS, STD1, total_degree_space(1, 1), data)
        np.testing.assert_allclose(r.weights, [0.5, 0.5], atol=1e-12)
        assert r.mean == pytest.approx(4.0)

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_gauss_hermite_reproduction(self, n):
        nodes, weights = np.polynomial.hermite_e.hermegauss(n)
        gh_weights = weights / np.sqrt(2.0 * np.pi)
        data = Dataset(X=nodes, f=np.zeros(n))
        space = total_degree_space(n - 1, 1)
        r = bsc_square(GAUSS, STD1, space, data)
        np.testing.assert_allclose(r.weights, gh_weights, atol=1e-8)
        # independent oracle: solve the monomial moment system directly
        V = np.vander(nodes, n, increasing=True)
        moments = np.array([_gauss_moment(k) for k in range(n)])
        oracle = np.linalg.solve(V.T, moments)
        np.testing.assert_allclose(r.weights, oracle, atol=1e-8)

    def test_kernel_independence(self):
        nodes, _ = np.polynomial.hermite_e.hermegauss(5)
        data = Dataset(X=nodes, f=np.sin(nodes))
        space = total_degree_space(4, 1)
        r_g = bsc_square(GAUSS, STD1, space, data)
        r_m = bsc_square(matern_kernel(2.5, 0.7), STD1, space, data)
        np.testing.assert_allclose(r_g.weights, r_m.weights, atol=1e-10)
        assert r_g.variance != pytest.approx(r_m.variance, rel=1e-3)

    def test_stddev_equals_wce(self):
        nodes, _ = np.polynomial.hermite_e.hermegauss(4)
        data = Dataset(X=nodes, f=np.zeros(4))
        space = total_degree_space(3, 1)
        for kernel in (GAUSS, matern_kernel(1.5, 1.3)):
            r = bsc_square(kernel, STD1, space, data)
            assert r.stddev == pytest.approx(wce(kernel, STD1, data.X, r.weights), rel=1e-8)

    def test_wrong_size_raises(self):
        data = toy_dataset(5)
        with pytest.raises(NotUnisolvent):
            bsc_square(GAUSS, STD1, total_degree_space(3, 1), data)


def _gauss_moment(k: int) -> float:
    if k % 2 == 1:
        return 0.0
    out = 1.0
    for j in range(k - 1, 1, -2):
        out *= j
    return out


class TestWCE:
    def test_single_node_against_quadrature_oracle(self):
        # assemble e^2 = k_nunu - 2 k_nu(0) w + w^2 k(0,0) from scratch
        phi = lambda t: np.exp(-t * t / 2.0) / np.sqrt(2.0 * np.pi)
        k_nu_0, _ = integrate.quad(lambda t: np.exp(-t * t / 2.0) * phi(t), -np.inf, np.inf, epsabs=1e-13)
        inner = lambda s: integrate.quad(
            lambda t: np.exp(-((s - t) ** 2) / 2.0) * phi(t), -10, 10, epsabs=1e-12
        )[0]
        k_nunu, _ = integrate.quad(lambda s: inner(s) * phi(s), -10, 10, epsabs=1e-11)
        oracle = np.sqrt(k_nunu - 2.0 * k_nu_0 + 1.0)
        got = wce(GAUSS, STD1, np.array([0.0]), np.array([1.0]))
        assert got == pytest.approx(oracle, abs=1e-9)

    def test_zero_weights_give_initial_error(self):
        from bayescub.measures import initial_error

        X = np.linspace(-1, 1, 5)
        got = wce(GAUSS, STD1, X, np.zeros(5))
        assert got == pytest.approx(np.sqrt(initial_error(GAUSS, STD1)), rel=1e-12)

    def test_bc_weights_are_optimal(self, rng):
        data = toy_dataset(9)
        r = bc(GAUSS, STD1, data)
        base = wce(GAUSS, STD1, data.X, r.weights)
        for _ in range(100):
            delta = rng.standard_normal(9) * 10.0 ** rng.uniform(-4, 0)
            perturbed = wce(GAUSS, STD1, data.X, r.weights + delta)
            assert base <= perturbed + 1e-12
            if np.linalg.norm(delta) >= 1e-3:
                assert base < perturbed


class TestEndowRule:
    def test_monte_carlo_rule(self, rng):
        X = rng.standard_normal((10, 1))
        from bayescub.bench import toy_integrand

        f = toy_integrand(X[:, 0])
        data = Dataset(X=X, f=f)
        w = np.full(10, 0.1)
        r = endow_rule(X, w, GAUSS, STD1, data)
        assert r.mean == pytest.approx(float(f.mean()), rel=1e-12)
        assert r.stddev == pytest.approx(wce(GAUSS, STD1, X, w), rel=1e-12)

    def test_gauss_hermite_matches_square_regime(self):
        nodes, weights = np.polynomial.hermite_e.hermegauss(3)
        gh_weights = weights / np.sqrt(2.0 * np.pi)
        data = Dataset(X=nodes, f=np.cos(nodes))
        r_endow = endow_rule(nodes.reshape(-1, 1), gh_weights, GAUSS, STD1, data)
        r_square = bsc_square(GAUSS, STD1, total_degree_space(2, 1), data)
        assert r_endow.variance == pytest.approx(r_square.variance, abs=1e-10)

    def test_bc_weights_recover_bc_variance(self):
        data = toy_dataset(8)
        r_bc = bc(GAUSS, STD1, data)
        r = endow_rule(data.X, r_bc.weights, GAUSS, STD1, data)
        assert r.variance == pytest.approx(r_bc.variance, abs=1e-10)

    def test_zero_weight_rejected(self):
        data = toy_dataset(4)
        w = np.array([0.5, 0.0, 0.3, 0.2])
        with pytest.raises(ZeroWeight):
            endow_rule(data.X, w, GAUSS, STD1, data)


class TestKernelMeasureMatrix:
    """Exactness across kernels, measures, and dimensions (spot version)."""

    @pytest.mark.parametrize("kernel", [gaussian_kernel(0.9), matern_kernel(2.5, 0.9)])
    @pytest.mark.parametrize("measure_kind", ["gauss", "box"])
    def test_exactness(self, kernel, measure_kind, rng):
        d, m = 2, 2
        measure = StandardGaussian(d) if measure_kind == "gauss" else UniformBox((0.0,) * d, (1.0,) * d)
        space = total_degree_space(m, d)
        X = (
            rng.standard_normal((space.Q + 5, d))
            if measure_kind == "gauss"
            else rng.uniform(0, 1, (space.Q + 5, d))
        )
        coef = rng.standard_normal(space.Q)
        data = Dataset(X=X, f=evaluate_basis(space, X) @ coef)
        r = bsc(kernel, measure, space, data)
        truth = float(poly_moments(space, measure) @ coef)
        assert abs(r.mean - truth) <= 1e-8 * (1.0 + abs(truth))


class TestDiagnostics:
    def test_fields_populated(self):
        data = toy_dataset(7)
        r = bsc(GAUSS, STD1, total_degree_space(2, 1), data)
        assert r.diagnostics.vandermonde_rank == 3
        assert r.diagnostics.jitter >= 0.0
        assert r.diagnostics.wall_time > 0.0
        assert r.method == "bsc"
        assert not r.diagnostics.variance_clamped
