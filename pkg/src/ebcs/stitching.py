"""Stitched empirical Bernstein CS with iterated-logarithm width.

Epochs are geometric in the variance process: epoch ``j`` covers
``V_t in [L0 eta^j, L0 eta^(j+1))``. Each epoch runs the fixed-``xi`` bound at
level ``alpha_j = alpha / h(j)`` and a union bound glues them together, which
gives

    W_t = (sqrt(eta) + 1)/t * sqrt(V_t (log(2/alpha) + log h(j_t))),

valid once ``V_t >= L0`` and ``V_t >= log(2/alpha_j)``.

``epoch="floor"`` evaluates ``h`` at the integer epoch index ``floor(log_eta(V_t/L0))``,
so the width is exactly the per-epoch bound. ``epoch="continuous"`` plugs the
real-valued ``log_eta(V_t/L0)`` into ``h``, which is slightly more conservative
(``h`` is increasing).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .eb import smoothed_predictions
from .intervals import Band, Interval, make_interval
from .kernel import DomainError, psi_e

_ZETA_N = 1000


def zeta(s: float) -> float:
    """Riemann zeta for real ``s > 1``: partial sum plus an Euler-Maclaurin tail."""
    if not s > 1:
        raise DomainError("zeta requires s > 1")
    n = _ZETA_N
    k = np.arange(1, n, dtype=float)
    head = math.fsum(np.exp(-s * np.log(k))[::-1])
    # tail sum_{k>=n} k^-s via Euler-Maclaurin with three Bernoulli corrections
    tail = (n ** (1 - s) / (s - 1) + 0.5 * n**-s + s * n ** (-s - 1) / 12
            - s * (s + 1) * (s + 2) * n ** (-s - 3) / 720
            + s * (s + 1) * (s + 2) * (s + 3) * (s + 4) * n ** (-s - 5) / 30240)
    return head + tail


@dataclass(frozen=True)
class StitchConfig:
    alpha: float = 0.05
    eta: float = 2.0
    s: float = 1.4
    l0: float = 1.0
    h_table: Sequence[float] | None = None
    epoch: str = "floor"

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise DomainError("alpha must lie in (0, 1)")
        if not self.eta > 1:
            raise DomainError("eta must exceed 1")
        if not self.s > 1:
            raise DomainError("s must exceed 1")
        if not self.l0 >= 1:
            raise DomainError("l0 must be at least 1")
        if self.epoch not in ("floor", "continuous"):
            raise DomainError("epoch must be 'floor' or 'continuous'")
        if self.h_table is not None:
            tab = np.asarray(self.h_table, dtype=float)
            if tab.ndim != 1 or tab.size == 0 or np.any(tab <= 0):
                raise DomainError("h_table must be a nonempty list of positive values")
            if np.any(np.diff(tab) < 0):
                raise DomainError("h_table must be nondecreasing")
            if math.fsum(1.0 / tab) > 1 + 1e-12:
                raise DomainError("h_table violates sum 1/h(j) <= 1")
            if self.epoch != "floor":
                raise DomainError("a tabulated h is only defined at integer epochs")
            object.__setattr__(self, "h_table", tuple(float(v) for v in tab))

    @property
    def log_zeta(self) -> float:
        return math.log(zeta(self.s))

    def log_h(self, j):
        """``log h(j)``; NaN past the end of a custom table."""
        ja = np.asarray(j, dtype=float)
        if self.h_table is None:
            out = self.log_zeta + self.s * np.log1p(ja)
        else:
            tab = np.log(np.asarray(self.h_table))
            idx = ja.astype(int)
            inside = (idx >= 0) & (idx < tab.size)
            out = np.where(inside, tab[np.clip(idx, 0, tab.size - 1)], np.nan)
        return float(out) if np.ndim(j) == 0 else out


@dataclass(frozen=True)
class StitchState:
    t: int
    s_t: float
    v_t: float
    predictor_sum: float
    next_predictor: float


def new_state() -> StitchState:
    return StitchState(0, 0.0, 0.0, 0.5, 0.5)


def update(state: StitchState, x: float) -> StitchState:
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"observation {x!r} outside [0, 1]")
    t = state.t + 1
    psum = state.predictor_sum + x
    return replace(state, t=t, s_t=state.s_t + x,
                   v_t=state.v_t + psi_e(abs(x - state.next_predictor)),
                   predictor_sum=psum, next_predictor=psum / (t + 1))


def fixed_xi_halfwidth(state: StitchState, xi: float, alpha: float) -> float:
    """Halfwidth of the single-``xi`` bound: ``xi V_t/t + log(2/alpha)/(t xi)``."""
    if not 0 < xi <= 1:
        raise DomainError("xi must lie in (0, 1]")
    if state.t < 1:
        raise DomainError("need t >= 1")
    return xi * state.v_t / state.t + math.log(2.0 / alpha) / (state.t * xi)


def epoch_schedule(config: StitchConfig, j: int) -> tuple[float, float]:
    """Per-epoch ``(xi_j, alpha_j)`` of the union-bound construction."""
    if j < 0:
        raise DomainError("epoch index must be >= 0")
    log_h = config.log_h(j)
    alpha_j = config.alpha * math.exp(-log_h)
    ell = math.log(2.0 / config.alpha) + log_h
    xi = min(1.0, math.sqrt(ell / (config.l0 * config.eta ** (j + 1))))
    return xi, alpha_j


def epoch_index(v, config: StitchConfig):
    """``log_eta(V/L0)``, floored when ``config.epoch == 'floor'``; NaN for ``V < L0``."""
    va = np.asarray(v, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        j = np.log(va / config.l0) / math.log(config.eta)
    j = np.where(va >= config.l0, np.maximum(j, 0.0), np.nan)
    if config.epoch == "floor":
        j = np.floor(j)
    return float(j) if np.ndim(v) == 0 else j


def stitched_width(t, v, config: StitchConfig):
    """Vectorised ``(halfwidth, valid)`` for arrays of ``t`` and ``V_t``."""
    va = np.asarray(v, dtype=float)
    j = np.asarray(epoch_index(va, config))
    ok = ~np.isnan(j)
    log_h = np.full(va.shape, np.nan)
    log_h[ok] = config.log_h(j[ok])
    ell = math.log(2.0 / config.alpha) + log_h
    with np.errstate(invalid="ignore"):
        valid = ok & ~np.isnan(log_h) & (log_h <= math.log(config.alpha / 2) + va)
        w = (math.sqrt(config.eta) + 1) / np.asarray(t, dtype=float) * np.sqrt(va * ell)
    if np.ndim(v) == 0:
        return float(w), bool(valid)
    return w, valid


def stitched_halfwidth(state: StitchState, config: StitchConfig) -> Interval:
    if state.t < 1:
        raise DomainError("need t >= 1")
    w, valid = stitched_width(state.t, state.v_t, config)
    return make_interval(state.s_t / state.t, w, state.t, valid)


def chain_bound(t, v, config: StitchConfig):
    """Per-epoch bound ``(1 + sqrt(eta))/t sqrt(V log(2/alpha_j))`` at the integer epoch of ``V``."""
    j = np.floor(np.log(np.asarray(v, dtype=float) / config.l0) / math.log(config.eta))
    alpha_j = config.alpha / np.exp(config.log_h(j))
    return (1 + math.sqrt(config.eta)) / np.asarray(t, dtype=float) * np.sqrt(
        np.asarray(v) * np.log(2.0 / alpha_j))


def stitched_path(x, config: StitchConfig) -> Band:
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > 1):
        raise DomainError("observations must lie in [0, 1]")
    t = np.arange(1, x.shape[-1] + 1, dtype=float)
    v = np.cumsum(psi_e(np.abs(x - smoothed_predictions(x))), axis=-1)
    w, valid = stitched_width(t, v, config)
    return Band(np.cumsum(x, axis=-1) / t, w, valid, {"v_t": v})
