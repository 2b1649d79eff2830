import math

import numpy as np
import pytest

from fieldwork import backend
from fieldwork.gp import (
    DEFAULT_HP_INIT,
    GpModel,
    Hyperparams,
    TrainingSet,
    entropy,
    fit,
    kernel_eval,
    log_marginal_likelihood,
    optimize_hyperparams,
    predict,
)
from oracles import naive_gp_predict


HP = Hyperparams(math.log(0.5), math.log(2.0), math.log(0.05))


def random_training_set(rng, n, box=3.0):
    X = rng.uniform(-box, box, size=(n, 2))
    y = rng.normal(size=n)
    return TrainingSet(X, y)


class TestKernelEval:
    def test_zero_distance_gives_signal_variance_exactly(self):
        x = (0.31, -2.7)
        assert kernel_eval(x, x, HP) == HP.sf2

    def test_distance_equal_to_length_scale(self):
        x, x2 = (0.0, 0.0), (HP.l, 0.0)
        assert kernel_eval(x, x2, HP) == pytest.approx(
            HP.sf2 * math.exp(-0.5), rel=1e-14)

    def test_field_scale_hyperparameters(self):
        hp = Hyperparams(-7.81, 1.68, 0.0)
        d = 2.0 * math.exp(-7.81)
        value = kernel_eval((0.0, 0.0), (d, 0.0), hp)
        assert value == pytest.approx(math.exp(1.68) * math.exp(-2.0), rel=1e-12)

    def test_noise_not_included(self):
        noisy = Hyperparams(HP.log_l, HP.log_sf2, 5.0)
        assert kernel_eval((0.0, 0.0), (0.0, 0.0), noisy) == noisy.sf2


class TestFitPredict:
    def test_single_point_posterior_recovers_value(self):
        hp = Hyperparams(math.log(0.5), math.log(2.0), math.log(1e-12))
        train = TrainingSet([[0.4, 0.2]], [3.7])
        model = fit(train, hp)
        pred = predict(model, [[0.4, 0.2]])
        assert pred.mean[0] == pytest.approx(3.7, abs=1e-6)

    def test_empty_training_set_rejected(self):
        with pytest.raises(ValueError):
            fit(TrainingSet(np.empty((0, 2)), np.empty(0)), HP)

    def test_duplicate_points_survive_with_noise(self):
        train = TrainingSet([[1.0, 1.0], [1.0, 1.0]], [2.0, 4.0])
        model = fit(train, HP)
        pred = predict(model, [[1.0, 1.0]])
        assert np.isfinite(pred.mean).all()

    def test_prior_prediction_without_data(self):
        model = GpModel.prior(HP)
        pred = predict(model, [[5.0, 5.0], [-1.0, 2.0]])
        np.testing.assert_array_equal(pred.mean, 0.0)
        np.testing.assert_array_equal(pred.variance, HP.sf2)

    def test_far_test_point_returns_to_training_mean(self, rng):
        train = random_training_set(rng, 8, box=0.5)
        model = fit(train, HP)
        pred = predict(model, [[500.0, 500.0]])
        assert pred.mean[0] == pytest.approx(train.y.mean(), abs=1e-6)
        assert pred.variance[0] == pytest.approx(HP.sf2, abs=1e-6)

    def test_matches_dense_inverse_oracle(self, rng):
        train = random_training_set(rng, 3)
        model = fit(train, HP)
        xstar = rng.uniform(-3, 3, size=(5, 2))
        got = predict(model, xstar)
        want_mean, want_var = naive_gp_predict(
            train.X, train.y, xstar, HP.log_l, HP.log_sf2, HP.log_sn2)
        np.testing.assert_allclose(got.mean, want_mean, atol=1e-8)
        np.testing.assert_allclose(got.variance, want_var, atol=1e-8)

    def test_factor_reconstructs_training_covariance(self, rng):
        train = random_training_set(rng, 25)
        model = fit(train, HP)
        k = backend.se_sym(train.X, HP.l, HP.sf2, HP.sn2)
        recon = model.factor @ model.factor.T
        rel = np.linalg.norm(recon - k) / np.linalg.norm(k)
        assert rel < 1e-8

    def test_variance_never_exceeds_prior(self, rng):
        for _ in range(5):
            train = random_training_set(rng, 30)
            model = fit(train, HP)
            pred = predict(model, rng.uniform(-3, 3, size=(100, 2)))
            assert (pred.variance <= HP.sf2).all()
            assert (pred.variance >= 0.0).all()

    def test_adding_a_point_never_raises_variance(self, rng):
        xstar = rng.uniform(-3, 3, size=(40, 2))
        for _ in range(5):
            train = random_training_set(rng, 20)
            extra_x = rng.uniform(-3, 3, size=2)
            bigger = TrainingSet(np.vstack([train.X, extra_x]),
                                 np.append(train.y, rng.normal()))
            before = predict(fit(train, HP), xstar).variance
            after = predict(fit(bigger, HP), xstar).variance
            assert (after <= before + 1e-8).all()


class TestEntropy:
    def test_unit_log_argument_gives_zero(self):
        assert entropy(1.0 / (2.0 * math.pi * math.e)) == pytest.approx(0.0, abs=1e-15)

    def test_unit_variance_value(self):
        assert entropy(1.0) == pytest.approx(1.41894, abs=1e-5)

    def test_zero_variance_is_minus_infinity(self):
        assert entropy(0.0) == -math.inf

    def test_strictly_increasing(self, rng):
        v = np.sort(rng.uniform(1e-6, 10.0, size=50))
        h = entropy(v)
        assert (np.diff(h) > 0).all()

    def test_array_and_scalar_agree(self):
        assert entropy(np.array([2.0]))[0] == entropy(2.0)


class TestLogMarginalLikelihood:
    def test_gradient_matches_finite_differences(self, rng):
        train = random_training_set(rng, 10)
        hp = Hyperparams(rng.uniform(-1.5, 0.5), rng.uniform(-0.5, 1.0),
                         rng.uniform(-3.0, -0.5))
        _, grad = log_marginal_likelihood(train, hp)
        eps = 1e-5
        for i in range(3):
            arr = hp.as_array()
            arr[i] += eps
            up, _ = log_marginal_likelihood(train, Hyperparams.from_array(arr))
            arr[i] -= 2 * eps
            dn, _ = log_marginal_likelihood(train, Hyperparams.from_array(arr))
            fd = (up - dn) / (2 * eps)
            assert grad[i] == pytest.approx(fd, rel=1e-4, abs=1e-8)

    def test_single_point_closed_form(self):
        train = TrainingSet([[0.0, 0.0]], [5.0])
        value, _ = log_marginal_likelihood(train, HP)
        # centered target is zero, so only the normalizer remains
        assert value == pytest.approx(
            -0.5 * math.log(2.0 * math.pi * (HP.sf2 + HP.sn2)), rel=1e-12)

    def test_invariant_under_constant_shift(self, rng):
        train = random_training_set(rng, 12)
        shifted = TrainingSet(train.X, train.y + 123.456)
        a, ga = log_marginal_likelihood(train, HP)
        b, gb = log_marginal_likelihood(shifted, HP)
        assert a == pytest.approx(b, rel=1e-12)
        np.testing.assert_allclose(ga, gb, rtol=1e-9, atol=1e-12)


class TestOptimizeHyperparams:
    def test_never_worse_than_init(self, rng):
        for _ in range(5):
            train = random_training_set(rng, 15)
            init = Hyperparams(rng.uniform(-2, 0), rng.uniform(-1, 1),
                               rng.uniform(-3, 0))
            out = optimize_hyperparams(train, init)
            f_init, _ = log_marginal_likelihood(train, init)
            f_out, _ = log_marginal_likelihood(train, out)
            assert f_out >= f_init - 1e-9

    def test_stationary_init_returned_unchanged(self):
        from scipy.optimize import minimize

        train = TrainingSet([[0.0, 0.0], [0.8, 0.3]], [1.0, -0.5])

        def neg(theta):
            value, grad = log_marginal_likelihood(
                train, Hyperparams.from_array(theta))
            return -value, -grad

        res = minimize(neg, HP.as_array(), jac=True, method="L-BFGS-B",
                       bounds=[(-12.0, 5.0)] * 3,
                       options={"ftol": 1e-14, "gtol": 1e-9})
        optimum = Hyperparams.from_array(res.x)
        again = optimize_hyperparams(train, optimum)
        np.testing.assert_allclose(again.as_array(), optimum.as_array(),
                                   atol=1e-5)

    def test_result_within_clamp_box(self, rng):
        train = random_training_set(rng, 10)
        out = optimize_hyperparams(train, Hyperparams(20.0, -20.0, 0.0))
        assert (np.abs(out.as_array()) <= 12.0).all()

    def test_recovers_known_length_scale(self, spec):
        true_hp = Hyperparams(-7.81, 1.68, -3.0)
        centers = spec.centers_lonlat()
        errors = []
        for seed in range(20):
            gen = np.random.default_rng(1000 + seed)
            X = np.ascontiguousarray(
                centers[gen.choice(len(centers), size=50, replace=False)])
            k = backend.se_sym(X, true_hp.l, true_hp.sf2, true_hp.sn2)
            chol = np.linalg.cholesky(k + 1e-12 * np.eye(50))
            y = chol @ gen.standard_normal(50)
            est = optimize_hyperparams(TrainingSet(X, y), DEFAULT_HP_INIT)
            errors.append(abs(est.log_l - true_hp.log_l))
        assert float(np.median(errors)) <= 1.0
