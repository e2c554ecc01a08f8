import numpy as np
import numpy.testing as npt
import pytest
from scipy import stats

from basisselect import (
    ChainState,
    Curve,
    Dataset,
    DegenerateCurveError,
    DomainError,
    Hyperparameters,
    InvalidConfigurationError,
    design_matrices,
    log_joint_posterior,
    make_bspline_basis,
    predict_curve,
    standardize_curves,
)
from basisselect.bases import BasisMatrix


def _random_problem(rng, m=2, n=9, num_bases=5):
    system = make_bspline_basis((0.0, 1.0), num_bases)
    curves = [
        Curve(t=np.sort(rng.uniform(0, 1, n)), y=rng.normal(0, 1, n), name=str(i))
        for i in range(m)
    ]
    data = Dataset(curves)
    return data, design_matrices(system, data)


def _random_state(rng, m=2, num_bases=5, mu=0.3):
    return ChainState(
        beta=rng.normal(0, 1, (m, num_bases)),
        z=rng.integers(0, 2, (m, num_bases)).astype(float),
        theta=rng.uniform(0.05, 0.95, (m, num_bases)),
        mu=mu,
        sigma2=float(rng.uniform(0.3, 2.0)),
        tau2=float(rng.uniform(0.3, 2.0)),
    )


def _scipy_log_joint(state, data, bases, hyp):
    """Independent full-density recomputation from standard distributions.

    scipy keeps every normalization constant, so only differences between two
    states under the same fixed hyperparameters are comparable.
    """
    total = stats.invgamma.logpdf(state.sigma2, hyp.delta1, scale=hyp.delta2)
    total += stats.invgamma.logpdf(state.tau2, hyp.lambda1, scale=hyp.lambda2)
    mu = float(state.mu)
    total += stats.beta.logpdf(state.theta, mu, 1.0 - mu).sum()
    total += stats.bernoulli.logpmf(state.z.astype(int), state.theta).sum()
    scale = np.sqrt(state.sigma2 * state.tau2)
    total += stats.norm.logpdf(state.beta, 0.0, scale).sum()
    for i, curve in enumerate(data.curves):
        fitted = bases[i].values @ (state.z[i] * state.beta[i])
        total += stats.norm.logpdf(curve.y, fitted, np.sqrt(state.sigma2)).sum()
    return float(total)


class TestContainers:
    def test_curve_rejects_length_mismatch(self):
        with pytest.raises(InvalidConfigurationError):
            Curve(t=np.array([0.0, 1.0]), y=np.array([1.0]))

    def test_curve_rejects_nan(self):
        with pytest.raises(InvalidConfigurationError):
            Curve(t=np.array([0.0, 1.0]), y=np.array([1.0, np.nan]))

    def test_curve_rejects_empty(self):
        with pytest.raises(InvalidConfigurationError):
            Curve(t=np.array([]), y=np.array([]))

    def test_dataset_counts(self):
        data = Dataset(
            [
                Curve(t=np.array([0.0, 0.5]), y=np.array([1.0, 2.0])),
                Curve(t=np.array([0.0, 0.3, 0.9]), y=np.array([1.0, 2.0, 3.0])),
            ]
        )
        assert data.m == 2
        npt.assert_array_equal(data.counts, [2, 3])
        assert data.total_obs == 5

    def test_dataset_rejects_empty(self):
        with pytest.raises(InvalidConfigurationError):
            Dataset([])


class TestHyperparameters:
    def test_mu_from_expected_bases(self):
        hyp = Hyperparameters(expected_bases=2.0)
        assert hyp.resolved_mu(10) == pytest.approx(0.2)

    def test_explicit_mu_wins(self):
        hyp = Hyperparameters(mu=0.1, expected_bases=5.0)
        assert hyp.resolved_mu(10) == pytest.approx(0.1)

    def test_expected_bases_above_k_rejected_at_resolution(self):
        hyp = Hyperparameters(expected_bases=12.0)
        with pytest.raises(DomainError):
            hyp.resolved_mu(10)

    def test_mu_outside_unit_interval_rejected(self):
        with pytest.raises(DomainError):
            Hyperparameters(mu=1.0)

    def test_fixed_mode_needs_some_mu(self):
        with pytest.raises(InvalidConfigurationError):
            Hyperparameters()

    def test_negative_shape_rejected(self):
        with pytest.raises(InvalidConfigurationError):
            Hyperparameters(mu=0.1, delta1=-1.0)

    def test_unknown_mode_rejected(self):
        with pytest.raises(InvalidConfigurationError):
            Hyperparameters(mu_mode="adaptive")

    def test_random_mode_psi_bounds(self):
        with pytest.raises(DomainError):
            Hyperparameters(mu_mode="random", psi=1.0)
        Hyperparameters(mu_mode="random", psi=0.6)


class TestPredict:
    def test_hand_example(self):
        values = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        basis = BasisMatrix(points=np.array([0.0, 0.5, 1.0]), values=values, system=None)
        state = ChainState(
            beta=np.array([[2.0, 3.0]]),
            z=np.array([[1.0, 0.0]]),
            theta=np.full((1, 2), 0.5),
            mu=0.5,
            sigma2=1.0,
            tau2=1.0,
        )
        npt.assert_array_equal(predict_curve(state, basis, 0), [2.0, 0.0, 2.0])

    def test_masked_coefficient_has_no_effect(self):
        rng = np.random.default_rng(3)
        data, bases = _random_problem(rng)
        state = _random_state(rng)
        state.z[0, 2] = 0.0
        before = predict_curve(state, bases[0], 0)
        state.beta[0, 2] = 99.0
        npt.assert_array_equal(predict_curve(state, bases[0], 0), before)

    def test_dimension_mismatch_rejected(self):
        rng = np.random.default_rng(4)
        data, bases = _random_problem(rng, num_bases=5)
        state = _random_state(rng, num_bases=6)
        with pytest.raises(InvalidConfigurationError):
            predict_curve(state, bases[0], 0)


class TestLogJointPosterior:
    def test_difference_matches_scipy_densities(self):
        """Differences between states must agree with a scipy recomputation.

        Normalization constants depend only on the hyperparameters, so they
        cancel; this pins every state-dependent term at once.
        """
        rng = np.random.default_rng(11)
        data, bases = _random_problem(rng, m=3, n=12, num_bases=5)
        hyp = Hyperparameters(delta1=2.0, delta2=3.0, lambda1=1.5, lambda2=0.7, mu=0.3)
        for _ in range(20):
            s1 = _random_state(rng, m=3)
            s2 = _random_state(rng, m=3)
            got = log_joint_posterior(s1, data, bases, hyp) - log_joint_posterior(
                s2, data, bases, hyp
            )
            want = _scipy_log_joint(s1, data, bases, hyp) - _scipy_log_joint(
                s2, data, bases, hyp
            )
            assert got == pytest.approx(want, abs=1e-8)

    def test_theta_only_difference(self):
        rng = np.random.default_rng(12)
        data, bases = _random_problem(rng)
        hyp = Hyperparameters(mu=0.25)
        s1 = _random_state(rng, mu=0.25)
        s2 = s1.copy()
        s2.theta[0, 1] = 0.77
        mu, z = 0.25, s1.z[0, 1]
        logit = lambda p: np.log(p / (1.0 - p))
        want = (mu + z - 1.0) * (logit(s1.theta[0, 1]) - logit(s2.theta[0, 1]))
        got = log_joint_posterior(s1, data, bases, hyp) - log_joint_posterior(
            s2, data, bases, hyp
        )
        assert got == pytest.approx(want, abs=1e-10)

    def test_doubling_y_with_zero_fit(self):
        rng = np.random.default_rng(13)
        data, bases = _random_problem(rng, m=1, n=7)
        hyp = Hyperparameters(mu=0.5)
        state = _random_state(rng, m=1)
        state.beta[:] = 0.0
        doubled = Dataset([Curve(t=c.t, y=2.0 * c.y, name=c.name) for c in data.curves])
        sum_sq = float(data.curves[0].y @ data.curves[0].y)
        got = log_joint_posterior(state, data, bases, hyp) - log_joint_posterior(
            state, doubled, bases, hyp
        )
        assert got == pytest.approx(3.0 * sum_sq / (2.0 * state.sigma2), rel=1e-12)

    def test_random_mode_mu_difference(self):
        rng = np.random.default_rng(14)
        data, bases = _random_problem(rng)
        hyp = Hyperparameters(mu_mode="random", psi=0.6)
        s1 = _random_state(rng)
        s1.mu = np.full((2, 5), 0.3)
        s2 = s1.copy()
        s2.mu[0, 1] = 0.45
        theta = s1.theta[0, 1]
        want = (0.3 - 0.45) * np.log(theta / (1.0 - theta))
        got = log_joint_posterior(s1, data, bases, hyp) - log_joint_posterior(
            s2, data, bases, hyp
        )
        assert got == pytest.approx(want, abs=1e-10)

    def test_random_mode_mu_outside_support(self):
        rng = np.random.default_rng(15)
        data, bases = _random_problem(rng)
        hyp = Hyperparameters(mu_mode="random", psi=0.6)
        state = _random_state(rng)
        state.mu = np.full((2, 5), 0.3)
        state.mu[1, 4] = 0.6
        assert log_joint_posterior(state, data, bases, hyp) == -np.inf

    @pytest.mark.parametrize("field,value", [("sigma2", 0.0), ("sigma2", -1.0), ("tau2", 0.0)])
    def test_nonpositive_scale_rejected(self, field, value):
        rng = np.random.default_rng(16)
        data, bases = _random_problem(rng)
        state = _random_state(rng)
        setattr(state, field, value)
        with pytest.raises(DomainError):
            log_joint_posterior(state, data, bases, Hyperparameters(mu=0.3))

    def test_theta_on_boundary_rejected(self):
        rng = np.random.default_rng(17)
        data, bases = _random_problem(rng)
        state = _random_state(rng)
        state.theta[0, 0] = 1.0
        with pytest.raises(DomainError):
            log_joint_posterior(state, data, bases, Hyperparameters(mu=0.3))


class TestStandardize:
    def test_divides_by_sample_sd(self):
        data = Dataset([Curve(t=np.array([0.0, 0.5, 1.0]), y=np.array([2.0, 4.0, 6.0]))])
        out = standardize_curves(data)
        npt.assert_allclose(out.curves[0].y, [1.0, 2.0, 3.0])
        assert out.curves[0].scale == pytest.approx(2.0)

    def test_original_untouched(self):
        y = np.array([2.0, 4.0, 6.0])
        data = Dataset([Curve(t=np.array([0.0, 0.5, 1.0]), y=y)])
        standardize_curves(data)
        npt.assert_array_equal(data.curves[0].y, y)
        assert data.curves[0].scale is None

    def test_standardized_data_has_unit_sd(self):
        rng = np.random.default_rng(18)
        data = Dataset([Curve(t=np.arange(20.0), y=rng.normal(3, 7, 20))])
        out = standardize_curves(data)
        assert np.std(out.curves[0].y, ddof=1) == pytest.approx(1.0)

    def test_constant_curve_rejected(self):
        data = Dataset([Curve(t=np.array([0.0, 1.0]), y=np.array([5.0, 5.0]))])
        with pytest.raises(DegenerateCurveError):
            standardize_curves(data)

    def test_single_point_rejected(self):
        data = Dataset([Curve(t=np.array([0.0]), y=np.array([5.0]))])
        with pytest.raises(DegenerateCurveError):
            standardize_curves(data)
