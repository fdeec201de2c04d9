"""Limiting-width formulas and the moment ``E psi_E(|X - mu|)`` that drives them.

For iid data in [0, 1] with mean ``mu`` and variance ``sigma^2`` the closed-form
CS shrinks like ``sqrt(2 u log t / t)`` with ``u = E psi_E(|X - mu|)``, and
``sigma^2/2 <= u <= log 2 - 1/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .eb import EbConfig, EbState, apx_halfwidth
from .kernel import DomainError, psi_e
from .streams import DistributionSpec

U_MAX = math.log(2) - 0.5
QUAD_ABS_TOL = 1e-9


def _psi_abs(x):
    return psi_e(abs(x))


def _beta_logpdf(x, a, b):
    lognorm = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
    return lognorm + (a - 1) * math.log(x) + (b - 1) * math.log1p(-x)


def _psi_antiderivative(y):
    # int_0^y psi_E(s) ds
    return (1 - y) * math.log1p(-y) + y - 0.5 * y * y


def expected_psi_e(dist: DistributionSpec) -> float:
    """``E psi_E(|X - mu|)`` for a fixed scalar distribution."""
    k, p = dist.kind, dist.params
    mu = dist.mean if k in ("bernoulli", "beta", "uniform", "two_point", "point") else None
    if mu is None:
        raise DomainError(f"expected_psi_e does not support {k!r}")
    if k == "point":
        return 0.0
    if k == "bernoulli":
        q = p[0]
        if q in (0.0, 1.0):
            return 0.0
        return q * psi_e(1 - q) + (1 - q) * psi_e(q)
    if k == "two_point":
        eps = p[1]
        low = (mu - eps) / (1 - eps)
        return eps * psi_e(1 - mu) + (1 - eps) * psi_e(mu - low)
    if k == "uniform":
        return _psi_antiderivative(mu) + _psi_antiderivative(1 - mu)
    a, b = p

    def f(x):
        if x <= 0 or x >= 1:
            return 0.0
        return _psi_abs(x - mu) * math.exp(_beta_logpdf(x, a, b))

    val, _ = integrate.quad(f, 0.0, 1.0, points=[mu], epsabs=QUAD_ABS_TOL, epsrel=1e-10, limit=200)
    return float(val)


def variance(dist: DistributionSpec) -> float:
    return dist.variance


def a_t_apx(t, u):
    """Predicted closed-form width ``sqrt(2 u log t / t)``."""
    ta = np.asarray(t, dtype=float)
    if np.any(ta < 3):
        raise DomainError("a_t_apx needs t >= 3")
    if not u > 0:
        raise DomainError("u must be positive")
    out = np.sqrt(2 * u * np.log(ta) / ta)
    return float(out) if np.ndim(t) == 0 else out


def r_t(state: EbState, config: EbConfig, u: float) -> float:
    """Realised over predicted width ``W_t / A_t``."""
    w = float(apx_halfwidth(state.t, state.u_t, config.kz, config.alpha))
    return w / a_t_apx(state.t, u)


def r_t_squared_prediction(t, u_t, u: float, alpha: float):
    """``(2 U_t/(t u)) (log(1/alpha)/log t + 1/2)``, dropping the vanishing remainder."""
    ta = np.asarray(t, dtype=float)
    if np.any(ta < 3):
        raise DomainError("need t >= 3")
    if not u > 0:
        raise DomainError("u must be positive")
    return 2 * np.asarray(u_t) / (ta * u) * (math.log(1 / alpha) / np.log(ta) + 0.5)


def a_t_wsr(t, sigma: float, alpha: float, variant: str = "alpha"):
    """Limiting WSR width for the alpha-dependent or alpha-free ``lambda_t``."""
    ta = np.asarray(t, dtype=float)
    if np.any(ta < 16):
        raise DomainError("a_t_wsr needs t >= 16")
    if not sigma > 0 or not 0 < alpha < 1:
        raise DomainError("need sigma > 0 and alpha in (0, 1)")
    la = math.log(2 / alpha)
    llt = np.log(np.log(ta))
    if variant == "alpha":
        out = 0.5 * sigma * np.sqrt(la * np.log(ta) / (2 * ta)) * (1 + llt)
    elif variant == "noalpha":
        out = 0.5 * np.sqrt(sigma**2 * np.log(ta) / (2 * ta)) * (la + llt)
    else:
        raise DomainError(f"unknown variant {variant!r}")
    return float(out) if np.ndim(t) == 0 else out


def a_t_matrix(t, u_max: float):
    """Matrix analogue: ``sqrt(2 gamma_max(E psi_E(|X - M|)) log t / t)``."""
    return a_t_apx(t, u_max)


def psi_sigma_ratio_bound(mu: float) -> float:
    """``C_mu = psi_E(g)/g^2`` with ``g = max(mu, 1 - mu)``; ``E psi_E <= C_mu sigma^2``."""
    if not 0 < mu < 1:
        raise DomainError("mu must lie in (0, 1)")
    g = max(mu, 1 - mu)
    return psi_e(g) / (g * g)


def two_point_dist(mu: float, eps: float, seed: int = 0) -> DistributionSpec:
    """1 with probability ``eps``, ``(mu - eps)/(1 - eps)`` otherwise; mean ``mu``."""
    return DistributionSpec("two_point", (mu, eps), seed=seed)


METHODS = ("apx", "stch", "wsr_alpha", "wsr_noalpha", "hrms", "hoeff_alpha", "hoeff_noalpha",
           "robbins", "bern", "bern_stch")
_NEEDS = {"apx": ("u",), "stch": ("u",), "wsr_alpha": ("sigma", "alpha"), "wsr_noalpha": ("sigma",),
          "hrms": ("sigma",), "hoeff_alpha": ("sigma", "alpha"), "hoeff_noalpha": ("sigma",),
          "robbins": ("sigma",), "bern": ("sigma",), "bern_stch": ("sigma",)}


@dataclass(frozen=True)
class LimitingWidthRow:
    method: str
    alpha: float | None = None
    sigma: float | None = None
    u: float | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise DomainError(f"unknown method {self.method!r}")
        missing = [n for n in _NEEDS[self.method] if getattr(self, n) is None]
        if missing:
            raise DomainError(f"{self.method} needs {', '.join(missing)}")

    def value_at(self, t):
        return limiting_width(self, t)


def limiting_width(row: LimitingWidthRow, t):
    ta = np.asarray(t, dtype=float)
    if np.any(ta < 3):
        raise DomainError("limiting widths need t >= 3")
    lt, llt = np.log(ta), np.log(np.log(ta))
    m = row.method
    if m == "apx":
        out = np.sqrt(2 * row.u * lt / ta)
    elif m == "stch":
        out = np.sqrt(4 * row.u * llt / ta)
    elif m in ("wsr_alpha", "hoeff_alpha"):
        out = np.sqrt(row.sigma**2 * math.log(2 / row.alpha) * lt / (8 * ta)) * llt
    elif m in ("wsr_noalpha", "hoeff_noalpha"):
        out = np.sqrt(row.sigma**2 * lt / (8 * ta)) * llt
    elif m in ("hrms", "bern_stch"):
        out = np.sqrt(2 * row.sigma**2 * llt / ta)
    else:  # robbins, bern
        out = np.sqrt(row.sigma**2 * lt / ta)
    return float(out) if np.ndim(t) == 0 else out


PSI_REFERENCE_DISTS = {
    "Ber(0.5)": DistributionSpec("bernoulli", (0.5,)),
    "Ber(0.1)": DistributionSpec("bernoulli", (0.1,)),
    "Unif(0,1)": DistributionSpec("uniform"),
    "Beta(5,2)": DistributionSpec("beta", (5, 2)),
    "Beta(10,30)": DistributionSpec("beta", (10, 30)),
}


def psi_reference_table() -> list[tuple[str, float, float]]:
    """Rows ``(name, sigma^2/2, E psi_E(|X - mu|))``."""
    return [(name, d.variance / 2, expected_psi_e(d)) for name, d in PSI_REFERENCE_DISTS.items()]


def limiting_width_table(t, alpha: float, sigma: float, u: float) -> list[tuple[str, float]]:
    return [(m, limiting_width(LimitingWidthRow(m, alpha=alpha, sigma=sigma, u=u), t)) for m in METHODS]
