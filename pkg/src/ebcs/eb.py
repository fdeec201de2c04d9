"""Mixture, uniform-mixture and closed-form empirical Bernstein confidence sequences.

All three track the average conditional mean ``mu_t`` of a stream in [0, 1]
and are centred at the plain sample mean. The running statistics are

    S_t = sum X_i,     U_t = 1/(2 kappa^2) + sum psi_E(|X_i - Xhat_i|),

where ``Xhat_i`` is a predictable guess of ``X_i`` (by default the smoothed
running mean ``(1/2 + sum_{j<i} X_j) / i``).

Two APIs are provided: a stepwise one (``new_state`` / ``update`` and the
``interval_*`` readers) and ``*_path`` functions that process whole arrays at
once, which is what the experiment harness uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .intervals import Band, Interval, make_interval
from .kernel import (
    DEFAULT_TOL,
    DomainError,
    KernelTolerances,
    kappa_z,
    log_mixture_integral,
    psi_e,
    solve_radius,
    solve_radius_many,
)

LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)
PREDICTORS = ("smoothed_mean", "constant", "external")


@dataclass(frozen=True)
class EbConfig:
    alpha: float = 0.05
    kappa: float = 0.25
    predictor: str = "smoothed_mean"
    constant: float = 0.5
    intersect: bool = False

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise DomainError("alpha must lie in (0, 1)")
        if not self.kappa > 0:
            raise DomainError("kappa must be positive")
        if self.predictor not in PREDICTORS:
            raise DomainError(f"unknown predictor {self.predictor!r}")
        if not 0 <= self.constant < 1:
            raise DomainError("constant predictor must lie in [0, 1)")

    @property
    def u0(self) -> float:
        return 1.0 / (2.0 * self.kappa**2)

    @property
    def kz(self) -> float:
        return kappa_z(self.kappa)

    @property
    def log_g(self) -> float:
        """log of the mixture threshold G_alpha = kappa Z sqrt(2 pi) / alpha."""
        return math.log(self.kz) + LOG_SQRT_2PI - math.log(self.alpha)


@dataclass(frozen=True)
class EbState:
    t: int
    s_t: float
    u_t: float
    v_t: float
    predictor_sum: float
    next_predictor: float
    t0_reached: bool = False
    intersection: Interval | None = None


def new_state(config: EbConfig) -> EbState:
    first = config.constant if config.predictor == "constant" else 0.5
    return EbState(t=0, s_t=0.0, u_t=config.u0, v_t=0.0, predictor_sum=0.5,
                   next_predictor=first)


def t0_condition(u, config: EbConfig, log_threshold: float | None = None):
    """``sqrt(pi/U) (exp(U/4) - 1/2) >= G_alpha``, evaluated in log space."""
    ua = np.asarray(u, dtype=float)
    lhs = 0.5 * np.log(np.pi / ua) + ua / 4 + np.log1p(-0.5 * np.exp(-ua / 4))
    thr = config.log_g if log_threshold is None else log_threshold
    res = lhs >= thr
    return bool(res) if np.ndim(u) == 0 else res


def t0_reached(state: EbState, config: EbConfig) -> bool:
    return state.t0_reached or t0_condition(state.u_t, config)


def update(state: EbState, x: float, config: EbConfig, prediction: float | None = None) -> EbState:
    """Absorb one observation.

    ``prediction`` is only used (and then required) for the ``external``
    predictor; it is the forecast for the *next* observation.
    """
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"observation {x!r} outside [0, 1]")
    resid = psi_e(abs(x - state.next_predictor))
    t = state.t + 1
    s = state.s_t + x
    psum = state.predictor_sum + x
    if config.predictor == "smoothed_mean":
        nxt = psum / (t + 1)
    elif config.predictor == "constant":
        nxt = config.constant
    else:
        if prediction is None or not 0.0 <= prediction < 1.0:
            raise DomainError("external predictor needs a prediction in [0, 1)")
        nxt = prediction
    new = replace(state, t=t, s_t=s, u_t=state.u_t + resid, v_t=state.v_t + resid,
                  predictor_sum=psum, next_predictor=nxt)
    new = replace(new, t0_reached=state.t0_reached or t0_condition(new.u_t, config))
    if config.intersect:
        cur = interval_apx(new, config)
        if cur.valid:
            prev = state.intersection
            if prev is not None:
                cur = Interval(max(prev.lo, cur.lo), min(prev.hi, cur.hi), t, True,
                               cur.center, cur.halfwidth)
            new = replace(new, intersection=cur)
    return new


def apx_halfwidth(t, u, kz: float, alpha: float, log_d: float = 0.0):
    """``(2/t) sqrt(U (l + log(2U)/2))`` with ``l = log(d kZ/alpha / (1 - e^{-U/4}))``."""
    ua = np.asarray(u, dtype=float)
    tail = np.where(ua > 200, 0.0, np.log1p(-np.exp(-np.minimum(ua, 200) / 4)))
    ell = math.log(kz / alpha) + log_d - tail
    return 2.0 / np.asarray(t, dtype=float) * np.sqrt(ua * (ell + 0.5 * np.log(2 * ua)))


def interval_apx(state: EbState, config: EbConfig) -> Interval:
    if state.t < 1:
        raise DomainError("interval_apx needs t >= 1")
    w = float(apx_halfwidth(state.t, state.u_t, config.kz, config.alpha))
    return make_interval(state.s_t / state.t, w, state.t, t0_reached(state, config))


def interval_mix(state: EbState, config: EbConfig, tol: KernelTolerances = DEFAULT_TOL) -> Interval:
    if state.t < 1:
        raise DomainError("interval_mix needs t >= 1")
    y = solve_radius(state.u_t, config.log_g, tol)
    return make_interval(state.s_t / state.t, y / state.t, state.t)


def interval_unif(state: EbState, config: EbConfig, tol: KernelTolerances = DEFAULT_TOL) -> Interval:
    if state.t < 1:
        raise DomainError("interval_unif needs t >= 1")
    center = state.s_t / state.t
    log_g = math.log(2.0 / config.alpha)
    # V_t = 0 only for a stream that matched its predictor exactly; report the vacuous set
    if state.v_t <= 0 or log_mixture_integral(0.0, state.v_t) >= log_g:
        return Interval(0.0, 1.0, state.t, True, center, math.inf)
    y = solve_radius(state.v_t, log_g, tol)
    return make_interval(center, y / state.t, state.t)


# ---------------------------------------------------------------------------
# whole-path versions


def smoothed_predictions(x: np.ndarray) -> np.ndarray:
    """``Xhat_t = (1/2 + sum_{j<t} X_j) / t`` along the last axis."""
    t = np.arange(1, x.shape[-1] + 1, dtype=float)
    prev = np.cumsum(x, axis=-1) - x
    return (0.5 + prev) / t


def _predictions(x: np.ndarray, config: EbConfig, predictions=None) -> np.ndarray:
    if config.predictor == "smoothed_mean":
        return smoothed_predictions(x)
    if config.predictor == "constant":
        return np.full_like(x, config.constant)
    if predictions is None:
        raise DomainError("external predictor needs an array of predictions")
    return np.asarray(predictions, dtype=float)


def accumulate(x, config: EbConfig, predictions=None):
    """Return ``(t, S_t, V_t)`` arrays for a stream (or a stack of streams)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > 1):
        raise DomainError("observations must lie in [0, 1]")
    xhat = _predictions(x, config, predictions)
    t = np.arange(1, x.shape[-1] + 1, dtype=float)
    s = np.cumsum(x, axis=-1)
    v = np.cumsum(psi_e(np.abs(x - xhat)), axis=-1)
    return t, s, v


def apx_path(x, config: EbConfig, predictions=None) -> Band:
    t, s, v = accumulate(x, config, predictions)
    u = config.u0 + v
    valid = np.maximum.accumulate(t0_condition(u, config), axis=-1)
    w = apx_halfwidth(t, u, config.kz, config.alpha)
    return Band(s / t, w, valid, {"u_t": u})


def mix_radius(u, config: EbConfig, tol: KernelTolerances = DEFAULT_TOL):
    """Radius ``y*`` solving ``I(y*; U) = G_alpha`` for an array of ``U``."""
    return solve_radius_many(u, np.full(np.shape(u), config.log_g), tol)


def mix_path(x, config: EbConfig, predictions=None, tol: KernelTolerances = DEFAULT_TOL) -> Band:
    t, s, v = accumulate(x, config, predictions)
    u = config.u0 + v
    w = mix_radius(u, config, tol) / t
    return Band(s / t, w, np.ones(u.shape, dtype=bool), {"u_t": u})


def unif_path(x, config: EbConfig, predictions=None, tol: KernelTolerances = DEFAULT_TOL) -> Band:
    t, s, v = accumulate(x, config, predictions)
    log_g = math.log(2.0 / config.alpha)
    w = np.full(v.shape, np.inf)
    ok = v > 0
    ok[ok] = log_mixture_integral(0.0, v[ok]) < log_g
    w[ok] = solve_radius_many(v[ok], np.full(int(ok.sum()), log_g), tol) / t[np.nonzero(ok)[-1]]
    return Band(s / t, w, np.ones(v.shape, dtype=bool), {"v_t": v})


def mix_excludes(s, t, u, m, config: EbConfig):
    """True where ``m`` lies outside C^mix, i.e. ``I(S_t - t m; U_t) >= G_alpha``.

    Used for coverage studies; avoids a root find per step.
    """
    return log_mixture_integral(s - t * m, u) >= config.log_g


def unif_excludes(s, t, v, m, alpha: float):
    out = np.zeros(np.shape(v), dtype=bool)
    ok = v > 0
    out[ok] = log_mixture_integral((s - t * m)[ok], v[ok]) >= math.log(2.0 / alpha)
    return out
