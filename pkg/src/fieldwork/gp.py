"""Gaussian process regression with a squared-exponential kernel.

Covers the model used everywhere in the workbench: an isotropic squared
exponential covariance k(x, x') = sf2 * exp(-|x - x'|^2 / (2 l^2)) plus a
white-noise term sn2 on the training diagonal. Targets are centered on the
training mean before fitting and de-centered on prediction; predictive
variance describes the latent field, i.e. excludes sn2.

Hyperparameters are kept in log space. Maximum-likelihood estimation uses
projected gradient ascent with Armijo backtracking, a 100-iteration cap,
and a box clamp on the log values; these optimizer settings are
configuration, not modeling assumptions.
"""

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_solve, cholesky, solve_triangular

from . import backend
from .errors import FactorizationFailure

log = logging.getLogger(__name__)

# Box clamp for log hyperparameters during optimization.
LOG_HP_MIN = -12.0
LOG_HP_MAX = 5.0

# Jitter ladder: start fraction of the signal variance, growth per retry.
_JITTER_START = 1e-10
_JITTER_GROWTH = 10.0
_JITTER_RETRIES = 5

_LOG_2PI = math.log(2.0 * math.pi)
# entropy(v) = 0.5 * ln(2 pi e v) = _ENTROPY_CONST + 0.5 * ln(v)
_ENTROPY_CONST = 0.5 * (_LOG_2PI + 1.0)


@dataclass(frozen=True)
class Hyperparams:
    """Log-space kernel parameters: length scale, signal and noise variance."""

    log_l: float
    log_sf2: float
    log_sn2: float

    @property
    def l(self) -> float:
        return math.exp(self.log_l)

    @property
    def sf2(self) -> float:
        return math.exp(self.log_sf2)

    @property
    def sn2(self) -> float:
        return math.exp(self.log_sn2)

    def as_array(self) -> np.ndarray:
        return np.array([self.log_l, self.log_sf2, self.log_sn2])

    @classmethod
    def from_array(cls, arr) -> "Hyperparams":
        return cls(float(arr[0]), float(arr[1]), float(arr[2]))

    def to_dict(self) -> dict:
        return {"log_l": self.log_l, "log_sf2": self.log_sf2, "log_sn2": self.log_sn2}

    @classmethod
    def from_dict(cls, d: dict) -> "Hyperparams":
        return cls(float(d["log_l"]), float(d["log_sf2"]), float(d["log_sn2"]))


# Sampling agents start hyperparameter estimation here (log l, log sf2,
# log sn2); the length scale is degree-valued, roughly 55 m at the default
# anchor latitude.
DEFAULT_HP_INIT = Hyperparams(-7.5, 0.5, 1.0)


@dataclass(frozen=True)
class TrainingSet:
    """Training locations (degrees) and sampled values (field units)."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.ascontiguousarray(self.X, dtype=np.float64)
        y = np.ascontiguousarray(self.y, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError("X must be (n, d)")
        if y.shape != (X.shape[0],):
            raise ValueError("X and y lengths differ")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return self.X.shape[0]


@dataclass(frozen=True)
class Prediction:
    """Posterior mean and (clamped, noise-free) variance per test location."""

    mean: np.ndarray
    variance: np.ndarray


class GpModel:
    """Immutable fitted model: training set, Cholesky factor, and weights.

    factor is the lower-triangular Cholesky of K(X,X) + sn2*I (plus any
    jitter the ladder required); alpha solves that matrix against the
    centered targets; y_mean is the centering offset.
    """

    __slots__ = ("train", "hp", "factor", "alpha", "y_mean")

    def __init__(self, train: TrainingSet, hp: Hyperparams, factor, alpha,
                 y_mean: float):
        self.train = train
        self.hp = hp
        self.factor = factor
        self.alpha = alpha
        self.y_mean = y_mean

    @property
    def n_train(self) -> int:
        return len(self.train)

    @classmethod
    def prior(cls, hp: Hyperparams) -> "GpModel":
        """Model with no training data: prior mean 0, prior variance sf2."""
        empty = TrainingSet(np.empty((0, 2)), np.empty(0))
        return cls(empty, hp, None, np.empty(0), 0.0)


def chol_with_jitter(k: np.ndarray, scale: float) -> np.ndarray:
    """Lower Cholesky factor, retrying with escalating diagonal jitter.

    Jitter starts at 1e-10 * scale and grows tenfold per retry, at most 5
    retries. Raises FactorizationFailure once the ladder is exhausted.
    """
    try:
        return cholesky(k, lower=True)
    except LinAlgError:
        pass
    jitter = _JITTER_START * scale
    eye = np.eye(k.shape[0])
    for _ in range(_JITTER_RETRIES):
        try:
            return cholesky(k + jitter * eye, lower=True)
        except LinAlgError:
            jitter *= _JITTER_GROWTH
    raise FactorizationFailure(
        f"covariance not positive definite after jitter ladder (scale {scale:g})"
    )


def kernel_eval(x, x2, hp: Hyperparams) -> float:
    """Squared-exponential covariance between two locations.

    The white-noise variance is not included; it enters only on the
    diagonal of the training covariance.
    """
    diff = np.asarray(x, dtype=np.float64) - np.asarray(x2, dtype=np.float64)
    d2 = float(diff @ diff)
    if d2 == 0.0:
        return hp.sf2
    return hp.sf2 * math.exp(-0.5 * d2 / (hp.l * hp.l))


def fit(train: TrainingSet, hp: Hyperparams) -> GpModel:
    """Center targets, factorize K(X,X) + sn2*I, and solve for the weights."""
    if len(train) == 0:
        raise ValueError("training set is empty")
    k = backend.se_sym(train.X, hp.l, hp.sf2, hp.sn2)
    factor = chol_with_jitter(k, hp.sf2)
    y_mean = float(train.y.mean())
    alpha = cho_solve((factor, True), train.y - y_mean)
    return GpModel(train, hp, factor, alpha, y_mean)


def predict(model: GpModel, Xstar) -> Prediction:
    """Posterior mean and variance at test locations.

    mean = K(X*,X) alpha + y_mean; variance = sf2 - ||L^-1 K(X,X*)||^2 per
    column, clamped to [0, sf2]. With no training data this is the prior:
    mean 0, variance sf2.
    """
    Xstar = np.ascontiguousarray(np.atleast_2d(Xstar), dtype=np.float64)
    if Xstar.shape[0] == 0:
        raise ValueError("Xstar is empty")
    sf2 = model.hp.sf2
    if model.n_train == 0:
        n = Xstar.shape[0]
        return Prediction(np.zeros(n), np.full(n, sf2))
    ks = backend.se_cross(Xstar, model.train.X, model.hp.l, sf2)
    mean = ks @ model.alpha + model.y_mean
    v = solve_triangular(model.factor, ks.T, lower=True)
    variance = sf2 - np.einsum("ij,ij->j", v, v)
    np.clip(variance, 0.0, sf2, out=variance)
    return Prediction(mean, variance)


def entropy(variance):
    """Gaussian differential entropy 0.5 * ln(2 pi e v).

    Accepts scalars or arrays; zero variance maps to -inf, which orders
    below every finite entropy. Strictly increasing in the variance.
    """
    v = np.asarray(variance, dtype=np.float64)
    with np.errstate(divide="ignore"):
        h = _ENTROPY_CONST + 0.5 * np.log(v)
    if np.ndim(variance) == 0:
        return float(h)
    return h


class _LmlWorkspace:
    """Caches the pairwise distances of one training set across evaluations."""

    def __init__(self, train: TrainingSet):
        self.X = train.X
        self.yc = train.y - train.y.mean()
        self.n = len(train)
        self.d2 = backend.sq_dists_sym(train.X)
        self.eye = np.eye(self.n)

    def value(self, theta: np.ndarray):
        """Log marginal likelihood; returns (value, cache-for-gradient)."""
        l, sf2, sn2 = np.exp(theta)
        kse = backend.se_from_sq(self.d2, l, sf2)
        k = kse + sn2 * self.eye
        factor = chol_with_jitter(k, sf2)
        alpha = cho_solve((factor, True), self.yc)
        lml = (
            -0.5 * float(self.yc @ alpha)
            - float(np.log(np.diag(factor)).sum())
            - 0.5 * self.n * _LOG_2PI
        )
        return lml, (l, sn2, kse, factor, alpha)

    def gradient(self, cache) -> np.ndarray:
        """Analytic gradient over (log_l, log_sf2, log_sn2) from a value cache."""
        l, sn2, kse, factor, alpha = cache
        w = np.outer(alpha, alpha) - cho_solve((factor, True), self.eye)
        wk = w * kse
        g_log_l = 0.5 * float((wk * self.d2).sum()) / (l * l)
        g_log_sf2 = 0.5 * float(wk.sum())
        g_log_sn2 = 0.5 * sn2 * float(np.trace(w))
        return np.array([g_log_l, g_log_sf2, g_log_sn2])


def log_marginal_likelihood(train: TrainingSet, hp: Hyperparams):
    """Log evidence of the centered targets and its gradient.

    Returns (lml, gradient over (log_l, log_sf2, log_sn2)). Adding a
    constant to y leaves the value unchanged (mean centering).
    """
    if len(train) == 0:
        raise ValueError("training set is empty")
    ws = _LmlWorkspace(train)
    value, cache = ws.value(hp.as_array())
    return value, ws.gradient(cache)


def optimize_hyperparams(train: TrainingSet, init: Hyperparams,
                         max_iter: int = 100, grad_tol: float = 1e-5) -> Hyperparams:
    """Maximize the log marginal likelihood over log hyperparameters.

    Projected gradient ascent with Armijo backtracking inside the
    [LOG_HP_MIN, LOG_HP_MAX] box, at most max_iter iterations, returning the
    best iterate visited. If the initial point cannot be factorized the init
    is returned unchanged with a warning.
    """
    if len(train) == 0:
        raise ValueError("training set is empty")
    ws = _LmlWorkspace(train)
    theta = np.clip(init.as_array(), LOG_HP_MIN, LOG_HP_MAX)
    try:
        f, cache = ws.value(theta)
    except FactorizationFailure:
        warnings.warn("hyperparameter optimization failed at init; keeping init",
                      stacklevel=2)
        return init
    grad = ws.gradient(cache)
    best_f, best_theta = f, theta
    for _ in range(max_iter):
        if np.linalg.norm(grad) <= grad_tol * max(1.0, abs(f)):
            break
        # fresh backtracking line search each iteration so one flat stretch
        # cannot pin later steps at a microscopic length
        step = 1.0
        moved = False
        while step >= 1e-10:
            cand = np.clip(theta + step * grad, LOG_HP_MIN, LOG_HP_MAX)
            direction = cand - theta
            slope = float(grad @ direction)
            if slope <= 0.0 or np.linalg.norm(direction) < 1e-12:
                break  # pinned against the box
            try:
                f_cand, cache = ws.value(cand)
            except FactorizationFailure:
                step *= 0.5
                continue
            if f_cand > f + 1e-4 * slope:
                theta, f = cand, f_cand
                moved = True
                break
            step *= 0.5
        if not moved:
            break
        grad = ws.gradient(cache)
        if f > best_f:
            best_f, best_theta = f, theta
    return Hyperparams.from_array(best_theta)
