"""Comparison confidence sequences from prior work.

* WSR: the predictable plug-in empirical Bernstein CS with the ``lambda_t``
  schedule ``sqrt(2 log(2/alpha) / (sigma2_{t-1} t log(1+t))) ^ 1/2``.
* HRMS: the stitched empirical Bernstein boundary with residual variance
  ``Vhat_t = max(sum (X_i - Xhat_i)^2, 1)``.
* Hoeffding: the predictable plug-in sub-Gaussian CS with known ``sigma``.
* Robbins: the Gaussian-mixture sub-Gaussian CS with known ``sigma``.

Each comes as a frozen state with ``*_update`` / ``*_interval`` plus a
vectorised ``*_path`` over the last axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .eb import smoothed_predictions
from .intervals import Band, Interval, make_interval
from .kernel import DomainError, psi_e
from .stitching import zeta

LAMBDA_VARIANTS = ("alpha", "noalpha")


def _check_alpha(alpha):
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")


def _check_x(x):
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0) or np.any(xa > 1) or np.any(np.isnan(xa)):
        raise DomainError("observations must lie in [0, 1]")
    return xa


# ---------------------------------------------------------------------------
# WSR


@dataclass(frozen=True)
class WsrConfig:
    alpha: float = 0.05
    variant: str = "alpha"

    def __post_init__(self):
        _check_alpha(self.alpha)
        if self.variant not in LAMBDA_VARIANTS:
            raise DomainError(f"unknown lambda variant {self.variant!r}")

    def lam_numerator(self) -> float:
        return 2.0 * math.log(2.0 / self.alpha) if self.variant == "alpha" else 2.0


@dataclass(frozen=True)
class WsrState:
    t: int = 0
    sum_lambda: float = 0.0
    sum_lambda_x: float = 0.0
    sum_vpsi: float = 0.0
    mu_hat: float = 0.5
    sigma2_hat: float = 0.25
    sum_x: float = 0.0
    sum_sq: float = 0.0


def wsr_lambda(t, sigma2_prev, config: WsrConfig):
    t = np.asarray(t, dtype=float)
    return np.minimum(0.5, np.sqrt(config.lam_numerator() / (sigma2_prev * t * np.log1p(t))))


def wsr_update(state: WsrState, x: float, config: WsrConfig) -> WsrState:
    _check_x(x)
    t = state.t + 1
    lam = float(wsr_lambda(t, state.sigma2_hat, config))
    sum_x = state.sum_x + x
    mu = (0.5 + sum_x) / (t + 1)
    sum_sq = state.sum_sq + (x - mu) ** 2
    return replace(
        state, t=t,
        sum_lambda=state.sum_lambda + lam,
        sum_lambda_x=state.sum_lambda_x + lam * x,
        sum_vpsi=state.sum_vpsi + (x - state.mu_hat) ** 2 * psi_e(lam),
        mu_hat=mu, sigma2_hat=(0.25 + sum_sq) / (t + 1), sum_x=sum_x, sum_sq=sum_sq,
    )


def wsr_interval(state: WsrState, config: WsrConfig) -> Interval:
    if state.t < 1:
        raise DomainError("need t >= 1")
    w = (math.log(2.0 / config.alpha) + state.sum_vpsi) / state.sum_lambda
    return make_interval(state.sum_lambda_x / state.sum_lambda, w, state.t)


def wsr_path(x, config: WsrConfig) -> Band:
    x = _check_x(x)
    n = x.shape[-1]
    t = np.arange(1, n + 1, dtype=float)
    mu = (0.5 + np.cumsum(x, axis=-1)) / (t + 1)
    mu_prev = np.concatenate([np.full(x.shape[:-1] + (1,), 0.5), mu[..., :-1]], axis=-1)
    sig2 = (0.25 + np.cumsum((x - mu) ** 2, axis=-1)) / (t + 1)
    sig2_prev = np.concatenate([np.full(x.shape[:-1] + (1,), 0.25), sig2[..., :-1]], axis=-1)
    lam = wsr_lambda(t, sig2_prev, config)
    sl = np.cumsum(lam, axis=-1)
    center = np.cumsum(lam * x, axis=-1) / sl
    w = (math.log(2.0 / config.alpha) + np.cumsum((x - mu_prev) ** 2 * psi_e(lam), axis=-1)) / sl
    return Band(center, w, np.ones(w.shape, dtype=bool), {"lambda": lam})


# ---------------------------------------------------------------------------
# HRMS

HRMS_CENTERS = ("smoothed", "sample_mean", "predictor")


@dataclass(frozen=True)
class HrmsConfig:
    """``center`` picks the point the interval is built around.

    ``smoothed`` is the running smoothed mean ``(1/2 + S_t)/(t + 1)``,
    ``predictor`` the predictable ``Xhat_t = (1/2 + S_{t-1})/t`` and
    ``sample_mean`` the plain ``S_t/t``.
    """

    alpha: float = 0.05
    eta: float = 2.0
    s: float = 1.4
    center: str = "smoothed"

    def __post_init__(self):
        _check_alpha(self.alpha)
        if not self.eta > 1:
            raise DomainError("eta must exceed 1")
        if not self.s > 1:
            raise DomainError("s must exceed 1")
        if self.center not in HRMS_CENTERS:
            raise DomainError(f"unknown center {self.center!r}")

    @property
    def k1(self) -> float:
        return (self.eta**0.25 + self.eta**-0.25) / math.sqrt(2.0)

    @property
    def k2(self) -> float:
        return (math.sqrt(self.eta) + 1) / 2

    def h_const(self) -> float:
        """``log(2 zeta(s) / (alpha log^s eta))``."""
        return math.log(2 * zeta(self.s) / (self.alpha * math.log(self.eta) ** self.s))


@dataclass(frozen=True)
class HrmsState:
    t: int = 0
    sum_sq: float = 0.0
    sum_x: float = 0.0
    x_hat_t: float = 0.5

    @property
    def v_hat(self) -> float:
        return max(self.sum_sq, 1.0)


def hrms_update(state: HrmsState, x: float) -> HrmsState:
    _check_x(x)
    t = state.t + 1
    sum_x = state.sum_x + x
    return replace(state, t=t, sum_sq=state.sum_sq + (x - state.x_hat_t) ** 2, sum_x=sum_x,
                   x_hat_t=(0.5 + sum_x) / (t + 1))


def hrms_width(t, v_hat, config: HrmsConfig):
    v_hat = np.asarray(v_hat, dtype=float)
    h = config.s * np.log(np.log(config.eta * v_hat)) + config.h_const()
    return (config.k1 * np.sqrt(v_hat * h) + config.k2 * h) / np.asarray(t, dtype=float)


def _hrms_center(t, sum_x, x_last, config: HrmsConfig):
    if config.center == "smoothed":
        return (0.5 + sum_x) / (t + 1)
    if config.center == "sample_mean":
        return sum_x / t
    return (0.5 + sum_x - x_last) / t


def hrms_interval(state: HrmsState, config: HrmsConfig, x_last: float | None = None) -> Interval:
    """``x_last`` (the latest observation) is needed only for ``center='predictor'``."""
    if state.t < 1:
        raise DomainError("need t >= 1")
    if config.center == "predictor" and x_last is None:
        raise DomainError("center='predictor' needs the latest observation")
    w = float(hrms_width(state.t, state.v_hat, config))
    c = _hrms_center(state.t, state.sum_x, x_last or 0.0, config)
    return make_interval(c, w, state.t)


def hrms_path(x, config: HrmsConfig) -> Band:
    x = _check_x(x)
    t = np.arange(1, x.shape[-1] + 1, dtype=float)
    v_hat = np.maximum(np.cumsum((x - smoothed_predictions(x)) ** 2, axis=-1), 1.0)
    center = _hrms_center(t, np.cumsum(x, axis=-1), x, config)
    return Band(center, hrms_width(t, v_hat, config), np.ones(x.shape, dtype=bool),
                {"v_hat": v_hat})


# ---------------------------------------------------------------------------
# known-variance baselines


@dataclass(frozen=True)
class SubGaussianConfig:
    sigma: float
    a: float = 1.0
    alpha: float = 0.05
    variant: str = "alpha"

    def __post_init__(self):
        _check_alpha(self.alpha)
        if not self.sigma > 0:
            raise DomainError("sigma must be positive")
        if not self.a > 0:
            raise DomainError("a must be positive")
        if self.variant not in LAMBDA_VARIANTS:
            raise DomainError(f"unknown lambda variant {self.variant!r}")


@dataclass(frozen=True)
class SumState:
    """Weighted sums shared by the Hoeffding and Robbins CSs."""

    t: int = 0
    sum_x: float = 0.0
    sum_lambda: float = 0.0
    sum_lambda_x: float = 0.0
    sum_lambda2: float = 0.0


def hoeffding_lambda(t, config: SubGaussianConfig):
    t = np.asarray(t, dtype=float)
    num = 2 * math.log(2 / config.alpha) if config.variant == "alpha" else 2.0
    return np.sqrt(num / (config.sigma**2 * t * np.log1p(t)))


def sum_update(state: SumState, x: float, config: SubGaussianConfig) -> SumState:
    _check_x(x)
    t = state.t + 1
    lam = float(hoeffding_lambda(t, config))
    return SumState(t, state.sum_x + x, state.sum_lambda + lam, state.sum_lambda_x + lam * x,
                    state.sum_lambda2 + lam * lam)


def hoeffding_interval(state: SumState, config: SubGaussianConfig) -> Interval:
    if state.t < 1:
        raise DomainError("need t >= 1")
    w = (math.log(2 / config.alpha) + 0.5 * config.sigma**2 * state.sum_lambda2) / state.sum_lambda
    return make_interval(state.sum_lambda_x / state.sum_lambda, w, state.t)


def hoeffding_path(x, config: SubGaussianConfig) -> Band:
    x = _check_x(x)
    t = np.arange(1, x.shape[-1] + 1, dtype=float)
    lam = hoeffding_lambda(t, config)
    sl = np.cumsum(lam)
    w = (math.log(2 / config.alpha) + 0.5 * config.sigma**2 * np.cumsum(lam * lam)) / sl
    return Band(np.cumsum(lam * x, axis=-1) / sl, np.broadcast_to(w, x.shape).copy(),
                np.ones(x.shape, dtype=bool))


def robbins_width(t, config: SubGaussianConfig):
    t = np.asarray(t, dtype=float)
    ats = config.a * t * config.sigma**2
    return np.sqrt(2 * (1 + ats) / (config.a * t * t)
                   * (math.log(1 / config.alpha) + 0.5 * np.log1p(ats)))


def robbins_interval(state: SumState, config: SubGaussianConfig) -> Interval:
    if state.t < 1:
        raise DomainError("need t >= 1")
    return make_interval(state.sum_x / state.t, float(robbins_width(state.t, config)), state.t)


def robbins_path(x, config: SubGaussianConfig) -> Band:
    x = _check_x(x)
    t = np.arange(1, x.shape[-1] + 1, dtype=float)
    w = np.broadcast_to(robbins_width(t, config), x.shape).copy()
    return Band(np.cumsum(x, axis=-1) / t, w, np.ones(x.shape, dtype=bool))
