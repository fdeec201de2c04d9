"""Matrix empirical Bernstein bounds on ``gamma_max(Xbar_t - M_t)``.

Observations are symmetric ``d x d`` matrices with spectrum in [0, 1]. The
closed-form bound replaces the scalar variance proxy by the largest
eigenvalue of ``V_t = sum psi_E(|X_i - Xhat_i|)`` (a spectral function) and
pays ``log d`` for the union over directions.

Eigen-decompositions use a cyclic Jacobi sweep written out here so results
are deterministic and batched over any number of leading axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .eb import apx_halfwidth, t0_condition, EbConfig
from .intervals import Band
from .kernel import ConvergenceError, DomainError, kappa_z, psi_e

JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100
SYM_TOL = 1e-12


@dataclass(frozen=True)
class EigDecomposition:
    eigenvalues: np.ndarray  # (..., d), descending
    basis: np.ndarray  # (..., d, d), columns are eigenvectors


def _offdiag_norm(a):
    d = a.shape[-1]
    mask = ~np.eye(d, dtype=bool)
    return np.sqrt(np.sum(a[..., mask] ** 2, axis=-1))


def sym_eig(a, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS) -> EigDecomposition:
    """Cyclic Jacobi eigen-decomposition of a (stack of) symmetric matrices.

    Sweeps visit pairs ``(p, q)`` in row order and stop once the off-diagonal
    Frobenius norm falls below ``tol * max(1, ||A||_F)`` for every matrix.
    """
    a = np.array(a, dtype=float)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise DomainError("sym_eig needs square matrices")
    if not np.all(np.isfinite(a)):
        raise DomainError("sym_eig needs finite entries")
    if np.any(np.abs(a - np.swapaxes(a, -1, -2)) > SYM_TOL * np.maximum(1.0, np.abs(a))):
        raise DomainError("matrix is not symmetric")
    shape = a.shape
    d = shape[-1]
    a = a.reshape((-1, d, d))
    a = 0.5 * (a + np.swapaxes(a, -1, -2))
    q = np.broadcast_to(np.eye(d), a.shape).copy()
    scale = tol * np.maximum(1.0, np.sqrt(np.sum(a * a, axis=(-1, -2))))
    for _ in range(max_sweeps):
        if np.all(_offdiag_norm(a) <= scale):
            break
        for p in range(d - 1):
            for r in range(p + 1, d):
                apq = a[:, p, r]
                act = apq != 0
                if not np.any(act):
                    continue
                safe = np.where(act, apq, 1.0)
                with np.errstate(over="ignore"):
                    theta = (a[:, r, r] - a[:, p, p]) / (2.0 * safe)
                    big = np.abs(theta) > 1e150
                    th = np.where(big, 1.0, theta)
                    tt = np.sign(th) / (np.abs(th) + np.sqrt(th * th + 1.0))
                # for huge theta, t ~ 1/(2 theta); also covers theta = inf
                tt = np.where(big, 0.5 / np.where(big, theta, 1.0), tt)
                tt = np.where(theta == 0, 1.0, tt)
                c = np.where(act, 1.0 / np.sqrt(tt * tt + 1.0), 1.0)
                s = np.where(act, tt * c, 0.0)
                cc, ss = c[:, None], s[:, None]
                # A <- J^T A J with J the (p, r) plane rotation
                colp, colr = a[:, :, p].copy(), a[:, :, r].copy()
                a[:, :, p] = cc * colp - ss * colr
                a[:, :, r] = ss * colp + cc * colr
                rowp, rowr = a[:, p, :].copy(), a[:, r, :].copy()
                a[:, p, :] = cc * rowp - ss * rowr
                a[:, r, :] = ss * rowp + cc * rowr
                a[:, p, r] = np.where(act, 0.0, a[:, p, r])
                a[:, r, p] = a[:, p, r]
                qp, qr = q[:, :, p].copy(), q[:, :, r].copy()
                q[:, :, p] = cc * qp - ss * qr
                q[:, :, r] = ss * qp + cc * qr
    else:
        if not np.all(_offdiag_norm(a) <= scale):
            raise ConvergenceError("Jacobi sweeps did not converge")
    w = np.diagonal(a, axis1=-2, axis2=-1)
    order = np.argsort(-w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    q = np.take_along_axis(q, order[:, None, :], axis=-1)
    return EigDecomposition(w.reshape(shape[:-1]), q.reshape(shape))


def gamma_max(a):
    return sym_eig(a).eigenvalues[..., 0]


def spectral_map(a, f: Callable[[np.ndarray], np.ndarray]):
    """``Q f(Lambda) Q^T``; ``f`` must accept an array of eigenvalues."""
    eig = sym_eig(a)
    fw = np.asarray(f(eig.eigenvalues), dtype=float)
    q = eig.basis
    out = (q * fw[..., None, :]) @ np.swapaxes(q, -1, -2)
    return 0.5 * (out + np.swapaxes(out, -1, -2))


def psi_e_abs(a):
    """``psi_E(|A|)`` for symmetric ``A`` with spectrum in (-1, 1)."""
    return spectral_map(a, lambda w: psi_e(np.abs(w)))


def check_observation(x, eig_tol: float = 1e-12):
    w = sym_eig(x).eigenvalues
    if np.any(w < -eig_tol) or np.any(w > 1 + eig_tol):
        raise DomainError("observation eigenvalues must lie in [0, 1]")


# ---------------------------------------------------------------------------
# closed-form matrix CS


@dataclass(frozen=True)
class MatrixEbConfig:
    d: int
    alpha: float = 0.05
    kappa: float = 0.25

    def __post_init__(self):
        if self.d < 1:
            raise DomainError("d must be >= 1")
        EbConfig(alpha=self.alpha, kappa=self.kappa)

    @property
    def u0(self) -> float:
        return 1.0 / (2.0 * self.kappa**2)

    @property
    def kz(self) -> float:
        return kappa_z(self.kappa)

    @property
    def log_g(self) -> float:
        """log of ``G_{alpha,d} = d kZ sqrt(2 pi) / alpha``."""
        return math.log(self.d) + EbConfig(self.alpha, self.kappa).log_g


@dataclass(frozen=True)
class MatrixEbState:
    t: int
    s_mat: np.ndarray
    v_mat: np.ndarray
    u_t: float
    predictor_sum: np.ndarray
    predictor: np.ndarray
    t0_reached: bool = False


@dataclass(frozen=True)
class MatrixBound:
    t: int
    halfwidth: float
    valid: bool
    mean: np.ndarray


def matrix_new_state(config: MatrixEbConfig) -> MatrixEbState:
    d = config.d
    eye = np.eye(d)
    return MatrixEbState(0, np.zeros((d, d)), np.zeros((d, d)), config.u0, 0.5 * eye, 0.5 * eye)


def matrix_update(state: MatrixEbState, x, config: MatrixEbConfig) -> MatrixEbState:
    x = np.asarray(x, dtype=float)
    if x.shape != (config.d, config.d):
        raise DomainError(f"expected a {config.d}x{config.d} matrix")
    check_observation(x)
    x = 0.5 * (x + x.T)
    t = state.t + 1
    v = state.v_mat + psi_e_abs(x - state.predictor)
    u = config.u0 + float(gamma_max(v))
    psum = state.predictor_sum + x
    reached = state.t0_reached or t0_condition(u, None, config.log_g)
    return replace(state, t=t, s_mat=state.s_mat + x, v_mat=v, u_t=u, predictor_sum=psum,
                   predictor=psum / (t + 1), t0_reached=reached)


def matrix_halfwidth(state: MatrixEbState, config: MatrixEbConfig) -> MatrixBound:
    if state.t < 1:
        raise DomainError("need t >= 1")
    w = float(apx_halfwidth(state.t, state.u_t, config.kz, config.alpha, math.log(config.d)))
    return MatrixBound(state.t, w, state.t0_reached, state.s_mat / state.t)


def matrix_predictions(xs):
    """``Xhat_t = (I/2 + sum_{j<t} X_j)/t`` for a stream of shape (..., T, d, d)."""
    d = xs.shape[-1]
    t = np.arange(1, xs.shape[-3] + 1, dtype=float)[:, None, None]
    prev = np.cumsum(xs, axis=-3) - xs
    return (0.5 * np.eye(d) + prev) / t


def matrix_apx_path(xs, config: MatrixEbConfig) -> Band:
    """Whole-path closed-form bound; ``xs`` has shape (..., T, d, d).

    ``center`` holds ``gamma_max`` of nothing meaningful, so it is NaN; use
    :func:`deviation_path` to score coverage.
    """
    xs = np.asarray(xs, dtype=float)
    v = np.cumsum(psi_e_abs(xs - matrix_predictions(xs)), axis=-3)
    u = config.u0 + gamma_max(v)
    t = np.arange(1, xs.shape[-3] + 1, dtype=float)
    valid = np.maximum.accumulate(t0_condition(u, None, config.log_g), axis=-1)
    w = apx_halfwidth(t, u, config.kz, config.alpha, math.log(config.d))
    return Band(np.full(w.shape, np.nan), w, valid, {"u_t": u})


def deviation_path(xs, mean_path):
    """``gamma_max(Xbar_t - M_t)`` along the stream; ``mean_path`` broadcasts against ``xs``."""
    t = np.arange(1, xs.shape[-3] + 1, dtype=float)[:, None, None]
    return gamma_max(np.cumsum(xs, axis=-3) / t - mean_path)


# ---------------------------------------------------------------------------
# Wang-Ramdas style plug-in bound


@dataclass(frozen=True)
class WangRamdasConfig:
    d: int
    alpha: float = 0.05

    def __post_init__(self):
        if self.d < 1:
            raise DomainError("d must be >= 1")
        if not 0 < self.alpha < 1:
            raise DomainError("alpha must lie in (0, 1)")

    @property
    def log_term(self) -> float:
        return math.log(2 * self.d / self.alpha)


@dataclass(frozen=True)
class WangRamdasState:
    t: int
    sum_lambda: float
    sum_lambda_x: np.ndarray
    w_mat: np.ndarray
    sum_x: np.ndarray
    mu_hat: np.ndarray
    sum_gsq: float
    vbar: float


def wr_new_state(config: WangRamdasConfig) -> WangRamdasState:
    d = config.d
    z = np.zeros((d, d))
    return WangRamdasState(0, 0.0, z, z, z, 0.5 * np.eye(d), 0.0, 0.25)


def wr_lambda(t, vbar_prev, config: WangRamdasConfig):
    t = np.asarray(t, dtype=float)
    return np.minimum(0.5, np.sqrt(2 * config.log_term / (vbar_prev * t * np.log1p(t))))


def wr_update(state: WangRamdasState, x, config: WangRamdasConfig,
              lam: float | None = None) -> WangRamdasState:
    """Absorb one matrix. ``lam`` overrides the default schedule and must be predictable."""
    x = np.asarray(x, dtype=float)
    check_observation(x)
    x = 0.5 * (x + x.T)
    t = state.t + 1
    if lam is None:
        lam = float(wr_lambda(t, state.vbar, config))
    if not 0 < lam < 1:
        raise DomainError("lambda must lie in (0, 1)")
    r = x - state.mu_hat
    sum_x = state.sum_x + x
    mu = (0.5 * np.eye(config.d) + sum_x) / (t + 1)
    e = x - mu
    gsq = state.sum_gsq + float(np.max(np.abs(sym_eig(e).eigenvalues))) ** 2
    return WangRamdasState(t, state.sum_lambda + lam, state.sum_lambda_x + lam * x,
                           state.w_mat + psi_e(lam) * (r @ r), sum_x, mu, gsq,
                           (0.25 + gsq) / (t + 1))


def wr_halfwidth(state: WangRamdasState, config: WangRamdasConfig) -> MatrixBound:
    if state.t < 1:
        raise DomainError("need t >= 1")
    w = (config.log_term + float(gamma_max(state.w_mat))) / state.sum_lambda
    return MatrixBound(state.t, w, True, state.sum_lambda_x / state.sum_lambda)


def wr_path(xs, config: WangRamdasConfig):
    """Whole-path Wang-Ramdas bound; returns ``(Band, weighted_mean_path)``."""
    xs = np.asarray(xs, dtype=float)
    d = xs.shape[-1]
    n = xs.shape[-3]
    t = np.arange(1, n + 1, dtype=float)
    eye = np.eye(d)
    mu = (0.5 * eye + np.cumsum(xs, axis=-3)) / (t + 1)[:, None, None]
    first = np.broadcast_to(0.5 * eye, xs[..., :1, :, :].shape)
    mu_prev = np.concatenate([first, mu[..., :-1, :, :]], axis=-3)
    ev = sym_eig(xs - mu).eigenvalues
    gsq = np.max(np.abs(ev), axis=-1) ** 2
    vbar = (0.25 + np.cumsum(gsq, axis=-1)) / (t + 1)
    vbar_prev = np.concatenate([np.full(vbar.shape[:-1] + (1,), 0.25), vbar[..., :-1]], axis=-1)
    lam = wr_lambda(t, vbar_prev, config)
    r = xs - mu_prev
    w_mat = np.cumsum(psi_e(lam)[..., None, None] * (r @ r), axis=-3)
    sl = np.cumsum(lam, axis=-1)
    hw = (config.log_term + gamma_max(w_mat)) / sl
    wmean = np.cumsum(lam[..., None, None] * xs, axis=-3) / sl[..., None, None]
    return Band(np.full(hw.shape, np.nan), hw, np.ones(hw.shape, dtype=bool), {"lambda": lam}), wmean
