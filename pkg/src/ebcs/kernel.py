"""Special functions and the radius solver shared by every scalar confidence sequence.

Everything here is vectorised over numpy arrays but returns plain floats for
scalar input. The mixture integral

    I(y; v) = int_{-1}^{1} exp(y*xi - v*xi^2) dxi

is only ever handled through its logarithm: for long streams y^2/(4v) grows
without bound and the textbook erf form overflows well before t = 10^6.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SQRT_PI = math.sqrt(math.pi)
LOG_SQRT_PI = 0.5 * math.log(math.pi)

# |z| below this uses the Taylor-type series, above it the continued fraction.
_ERF_SPLIT = 2.5
_SERIES_TERMS = 60
_CF_DEPTH = 60
_PSI_SERIES_CUTOFF = 0.1


class DomainError(ValueError):
    """An argument lies outside the domain of the function."""


class ConvergenceError(ArithmeticError):
    """An iterative solver hit its iteration budget."""


@dataclass(frozen=True)
class KernelTolerances:
    erf_rel_tol: float = 1e-13
    root_abs_tol: float = 1e-10
    root_max_iter: int = 200

    def __post_init__(self):
        if not (self.erf_rel_tol > 0 and self.root_abs_tol > 0):
            raise DomainError("tolerances must be strictly positive")
        if self.root_max_iter < 1:
            raise DomainError("root_max_iter must be >= 1")


DEFAULT_TOL = KernelTolerances()


def _out(arr, scalar):
    return float(arr) if scalar else arr


def psi_e(x):
    """CGF of a centred unit-rate exponential: ``-log(1 - x) - x`` on [0, 1)."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0) or np.any(xa >= 1) or np.any(np.isnan(xa)):
        raise DomainError("psi_e requires 0 <= x < 1")
    out = -np.log1p(-xa) - xa
    small = xa < _PSI_SERIES_CUTOFF
    if np.any(small):
        # sum_{k>=2} x^k / k, Horner form; avoids the cancellation above near 0
        xs = xa[small] if out.ndim else xa
        acc = np.zeros_like(xs)
        for k in range(24, 1, -1):
            acc = acc * xs + 1.0 / k
        val = acc * xs * xs
        if out.ndim:
            out[small] = val
        else:
            out = val
    return _out(out, np.ndim(x) == 0)


def _erf_series(z):
    # erf(z) = 2/sqrt(pi) exp(-z^2) sum_n 2^n z^(2n+1) / (2n+1)!!  (all terms positive)
    z2 = z * z
    term = z.copy()
    total = z.copy()
    for k in range(_SERIES_TERMS):
        term = term * (2.0 * z2) / (2 * k + 3)
        total = total + term
    return (2.0 / SQRT_PI) * np.exp(-z2) * total


def _erfc_cf_factor(z):
    """K(z) with erfc(z) = exp(-z^2) K(z) / sqrt(pi), for z >= _ERF_SPLIT."""
    f = z.copy()
    for k in range(_CF_DEPTH, 0, -1):
        f = z + (0.5 * k) / f
    return 1.0 / f


def erf(z):
    """Error function, relative accuracy ~1e-15 on the real line."""
    za = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(za)):
        raise DomainError("erf requires finite input")
    a = np.abs(np.atleast_1d(za))
    out = np.empty_like(a)
    lo = a < _ERF_SPLIT
    out[lo] = _erf_series(a[lo])
    hi = ~lo
    if np.any(hi):
        ah = a[hi]
        out[hi] = 1.0 - np.exp(-ah * ah) * _erfc_cf_factor(ah) / SQRT_PI
    out = np.copysign(out, np.atleast_1d(za)).reshape(za.shape)
    return _out(out, np.ndim(z) == 0)


def log_erfc(z):
    """``log(erfc(z))`` for z >= 0 without underflow."""
    za = np.asarray(z, dtype=float)
    if np.any(za < 0):
        raise DomainError("log_erfc is only provided for z >= 0")
    a = np.atleast_1d(za)
    out = np.empty_like(a)
    lo = a < _ERF_SPLIT
    out[lo] = np.log1p(-_erf_series(a[lo]))
    hi = ~lo
    if np.any(hi):
        ah = a[hi]
        out[hi] = -ah * ah - LOG_SQRT_PI + np.log(_erfc_cf_factor(ah))
    out = out.reshape(za.shape)
    return _out(out, np.ndim(z) == 0)


def erfc(z):
    za = np.asarray(z, dtype=float)
    out = np.where(za >= 0, np.exp(log_erfc(np.abs(za))), 2.0 - np.exp(log_erfc(np.abs(za))))
    return _out(out, np.ndim(z) == 0)


def kappa_z(kappa):
    """``kappa * (Phi(1/kappa) - Phi(-1/kappa))``, the truncated-Gaussian mixture constant."""
    if np.any(np.asarray(kappa) <= 0):
        raise DomainError("kappa must be positive")
    return kappa * erf(1.0 / (np.asarray(kappa, dtype=float) * math.sqrt(2.0)))


def log_mixture_integral(y, v):
    """Return ``log I(y; v)``.

    Parameters
    ----------
    y : float or array
        Unnormalised deviation ``S_t - t*m``. Only ``|y|`` matters.
    v : float or array
        Quadratic coefficient, strictly positive.
    """
    ya = np.abs(np.asarray(y, dtype=float))
    va = np.asarray(v, dtype=float)
    if np.any(va <= 0) or np.any(np.isnan(va)):
        raise DomainError("log_mixture_integral requires v > 0")
    ya, va = np.broadcast_arrays(ya, va)
    shape = ya.shape
    ya = np.atleast_1d(ya).ravel()
    va = np.atleast_1d(va).ravel()

    sv = np.sqrt(va)
    half = ya / (2.0 * sv)
    a = sv - half
    b = sv + half
    log_norm = np.log(2.0 * sv) - LOG_SQRT_PI  # log(2 sqrt(v/pi))
    out = np.empty_like(ya)

    pos = a >= 0
    if np.any(pos):
        yp, vp = ya[pos], va[pos]
        s = erf(a[pos]) + erf(b[pos])
        out[pos] = yp * yp / (4.0 * vp) + np.log(s) - log_norm[pos]

    neg = ~pos
    if np.any(neg):
        # erf(a) + erf(b) = erfc(|a|) - erfc(b), factor out erfc(|a|)
        an, bn, yn, vn = -a[neg], b[neg], ya[neg], va[neg]
        far = an >= _ERF_SPLIT
        head = np.empty_like(an)
        # y^2/(4v) - a^2 == y - v exactly; use it so nothing large cancels
        head[far] = (yn[far] - vn[far]) - LOG_SQRT_PI + np.log(_erfc_cf_factor(an[far]))
        near = ~far
        head[near] = yn[near] ** 2 / (4.0 * vn[near]) + np.log1p(-_erf_series(an[near]))
        ratio = np.exp(log_erfc(bn) - log_erfc(an))
        out[neg] = head + np.log1p(-ratio) - log_norm[neg]

    out = out.reshape(shape)
    return _out(out, out.ndim == 0)


def solve_radius(v: float, log_g: float, tol: KernelTolerances = DEFAULT_TOL) -> float:
    """Find ``y >= 0`` with ``log I(y; v) == log_g``.

    The upper bracket starts at ``max(1, v)`` and doubles; the root is then
    refined by bisection until the residual in log space is below
    ``tol.root_abs_tol`` (or the bracket collapses to a few ulps).
    """
    if v <= 0:
        raise DomainError("solve_radius requires v > 0")
    f0 = log_mixture_integral(0.0, v)
    if log_g == f0:
        return 0.0
    if log_g < f0:
        raise DomainError(
            f"no radius: log I(0; v) = {f0:.6g} already exceeds log_g = {log_g:.6g}"
        )
    hi = max(1.0, v)
    it = 0
    while log_mixture_integral(hi, v) < log_g:
        hi *= 2.0
        it += 1
        if it >= tol.root_max_iter:
            raise ConvergenceError("bracket expansion exceeded root_max_iter")
    lo = 0.0
    while True:
        mid = 0.5 * (lo + hi)
        r = log_mixture_integral(mid, v) - log_g
        if abs(r) <= tol.root_abs_tol or hi - lo <= 4 * np.spacing(hi):
            return mid
        if r < 0:
            lo = mid
        else:
            hi = mid
        it += 1
        if it >= tol.root_max_iter:
            raise ConvergenceError("bisection exceeded root_max_iter")


def solve_radius_many(v, log_g, tol: KernelTolerances = DEFAULT_TOL):
    """Vectorised :func:`solve_radius` over matching arrays.

    Entries whose target lies at or below ``log I(0; v)`` get radius 0 when
    equal and NaN when strictly below; callers decide what an empty set means.
    """
    va = np.atleast_1d(np.asarray(v, dtype=float)).ravel()
    ga = np.broadcast_to(np.asarray(log_g, dtype=float), np.shape(v)).ravel().copy()
    n = va.size
    out = np.full(n, np.nan)
    if n == 0:
        return out.reshape(np.shape(v))
    f0 = log_mixture_integral(np.zeros(n), va)
    out[ga == f0] = 0.0
    todo = ga > f0
    idx = np.nonzero(todo)[0]
    if idx.size:
        vv, gg = va[idx], ga[idx]
        hi = np.maximum(1.0, vv)
        it = 0
        short = log_mixture_integral(hi, vv) < gg
        while np.any(short):
            hi[short] *= 2.0
            short = log_mixture_integral(hi, vv) < gg
            it += 1
            if it >= tol.root_max_iter:
                raise ConvergenceError("bracket expansion exceeded root_max_iter")
        lo = np.zeros_like(hi)
        res = np.empty_like(hi)
        active = np.ones(idx.size, dtype=bool)
        while np.any(active):
            a = np.nonzero(active)[0]
            mid = 0.5 * (lo[a] + hi[a])
            r = log_mixture_integral(mid, vv[a]) - gg[a]
            done = (np.abs(r) <= tol.root_abs_tol) | (hi[a] - lo[a] <= 4 * np.spacing(hi[a]))
            res[a[done]] = mid[done]
            below = (r < 0) & ~done
            above = (r >= 0) & ~done
            lo[a[below]] = mid[below]
            hi[a[above]] = mid[above]
            active[a[done]] = False
            it += 1
            if it >= tol.root_max_iter:
                raise ConvergenceError("bisection exceeded root_max_iter")
        out[idx] = res
    return out.reshape(np.shape(v))
