"""Experiment drivers behind the command line: tracking, width comparisons,
Monte Carlo coverage, kappa sweeps and matrix runs.

Everything returns plain rows (lists of tuples) plus a header so the CLI and
the scripts can write byte-stable CSV with ``%.17g`` floats.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import asymptotics, baselines, eb, matrix, stitching
from .intervals import Band
from .kernel import DomainError, kappa_z, solve_radius_many
from .streams import DistributionSpec, matrix_mean, mean_path, sample_many, sample_path

SCALAR_METHODS = ("apx", "mix", "unif", "stch", "wsr", "hrms", "hoeff", "robbins")
MATRIX_METHODS = ("mat_apx", "wang_ramdas")
SUBGAUSSIAN = ("hoeff", "robbins")


@dataclass(frozen=True)
class RunConfig:
    alpha: float = 0.05
    kappa: float = 0.25
    eta: float = 2.0
    s: float = 1.4
    l0: float = 1.0
    sigma: float | None = None
    a: float = 1.0
    wsr_variant: str = "alpha"
    hrms_center: str = "smoothed"
    epoch: str = "floor"

    def eb(self) -> eb.EbConfig:
        return eb.EbConfig(alpha=self.alpha, kappa=self.kappa)

    def stitch(self) -> stitching.StitchConfig:
        return stitching.StitchConfig(alpha=self.alpha, eta=self.eta, s=self.s, l0=self.l0,
                                      epoch=self.epoch)

    def wsr(self) -> baselines.WsrConfig:
        return baselines.WsrConfig(alpha=self.alpha, variant=self.wsr_variant)

    def hrms(self) -> baselines.HrmsConfig:
        return baselines.HrmsConfig(alpha=self.alpha, eta=self.eta, s=self.s, center=self.hrms_center)

    def subgaussian(self) -> baselines.SubGaussianConfig:
        if self.sigma is None:
            raise DomainError("hoeff and robbins need sigma")
        return baselines.SubGaussianConfig(sigma=self.sigma, a=self.a, alpha=self.alpha,
                                           variant=self.wsr_variant)

    def echo(self) -> str:
        return ";".join(f"{k}={v}" for k, v in asdict(self).items())


def check_methods(methods, cfg: RunConfig, allowed=SCALAR_METHODS) -> tuple:
    methods = tuple(methods)
    if not methods:
        raise DomainError("no methods given")
    bad = [m for m in methods if m not in allowed]
    if bad:
        raise DomainError(f"unknown method(s): {', '.join(bad)}")
    if cfg.sigma is None and any(m in SUBGAUSSIAN for m in methods):
        raise DomainError("hoeff and robbins need --sigma")
    return methods


def band_for(method: str, x, cfg: RunConfig, at=None) -> Band:
    """Band of ``method`` over stream(s) ``x``, optionally only at indices ``at``.

    The mixture methods root-find only at the requested indices.
    """
    x = np.asarray(x, dtype=float)
    if method in ("mix", "unif"):
        c = cfg.eb()
        t, s, v = eb.accumulate(x, c)
        if at is not None:
            t, s, v = t[at], np.take(s, at, axis=-1), np.take(v, at, axis=-1)
        if method == "mix":
            u = c.u0 + v
            w = eb.mix_radius(u, c) / t
            return Band(s / t, w, np.ones(w.shape, dtype=bool), {"u_t": u})
        log_g = math.log(2 / cfg.alpha)
        w = np.full(v.shape, np.inf)
        ok = v > 0
        ok[ok] = eb.log_mixture_integral(0.0, v[ok]) < log_g
        w[ok] = solve_radius_many(v[ok], log_g) / np.broadcast_to(t, v.shape)[ok]
        return Band(s / t, w, np.ones(w.shape, dtype=bool), {"v_t": v})
    if method == "apx":
        band = eb.apx_path(x, cfg.eb())
    elif method == "stch":
        band = stitching.stitched_path(x, cfg.stitch())
    elif method == "wsr":
        band = baselines.wsr_path(x, cfg.wsr())
    elif method == "hrms":
        band = baselines.hrms_path(x, cfg.hrms())
    elif method == "hoeff":
        band = baselines.hoeffding_path(x, cfg.subgaussian())
    elif method == "robbins":
        band = baselines.robbins_path(x, cfg.subgaussian())
    else:
        raise DomainError(f"unknown method {method!r}")
    return band if at is None else band.take(at)


def log_grid(horizon: int, per_decade: int = 64) -> np.ndarray:
    """Integer times ``round(10^(k/per_decade))`` up to ``horizon`` (always included)."""
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    per_decade = min(int(per_decade), 64)
    if per_decade < 1:
        raise DomainError("points per decade must be >= 1")
    top = math.log10(horizon)
    k = np.arange(0, math.floor(top * per_decade + 1e-9) + 1)
    t = np.unique(np.round(10.0 ** (k / per_decade)).astype(np.int64))
    t = t[t <= horizon]
    if t[-1] != horizon:
        t = np.append(t, horizon)
    return t


# ---------------------------------------------------------------------------
# track

TRACK_HEADER = ("t", "method", "center", "lo", "hi", "halfwidth", "valid", "mu_t", "covered")


def track(obs, methods, cfg: RunConfig, mu=None):
    """Per-step rows for each method; ``mu`` (running mean path) may be None."""
    methods = check_methods(methods, cfg)
    obs = np.asarray(obs, dtype=float)
    rows = []
    t = np.arange(1, obs.shape[0] + 1)
    for m in methods:
        b = band_for(m, obs, cfg)
        lo, hi = b.lo, b.hi
        for i in range(obs.shape[0]):
            if mu is None:
                mu_i, cov = math.nan, ""
            else:
                mu_i = float(mu[i])
                cov = int(lo[i] <= mu_i <= hi[i])
            rows.append((int(t[i]), m, float(b.center[i]), float(lo[i]), float(hi[i]),
                         float(b.halfwidth[i]), int(b.valid[i]), mu_i, cov))
    return TRACK_HEADER, rows


# ---------------------------------------------------------------------------
# compare


def compare(spec: DistributionSpec, methods, horizon: int, seeds: int, cfg: RunConfig,
            per_decade: int = 64):
    """Median-over-replications halfwidth on a log grid.

    Columns: ``t, log10_t``, then per method the median halfwidth and the
    fraction of replications where the bound is valid, then the median
    ``U_t`` and ``U_t / t`` of the closed-form CS.
    """
    methods = check_methods(methods, cfg)
    if seeds < 1:
        raise DomainError("need at least one replication")
    grid = log_grid(horizon, per_decade)
    at = grid - 1
    widths = {m: np.empty((seeds, grid.size)) for m in methods}
    valids = {m: np.empty((seeds, grid.size)) for m in methods}
    u_all = np.empty((seeds, grid.size))
    c = cfg.eb()
    for r in range(seeds):
        x, _ = sample_path(spec, horizon, r)
        for m in methods:
            b = band_for(m, x, cfg, at)
            widths[m][r] = b.halfwidth
            valids[m][r] = b.valid
        _, _, v = eb.accumulate(x, c)
        u_all[r] = c.u0 + v[at]
    header = ["t", "log10_t"]
    for m in methods:
        header += [m, f"{m}_valid"]
    header += ["u_t", "u_t_over_t"]
    med = {m: np.median(widths[m], axis=0) for m in methods}
    vfrac = {m: valids[m].mean(axis=0) for m in methods}
    u_med = np.median(u_all, axis=0)
    rows = []
    for i, t in enumerate(grid):
        row = [int(t), math.log10(t)]
        for m in methods:
            row += [float(med[m][i]), float(vfrac[m][i])]
        row += [float(u_med[i]), float(u_med[i] / t)]
        rows.append(tuple(row))
    return tuple(header), rows


# ---------------------------------------------------------------------------
# coverage


@dataclass(frozen=True)
class CoverageResult:
    method: str
    replications: int
    horizon: int
    misses: int

    @property
    def rate(self) -> float:
        return self.misses / self.replications

    @property
    def se(self) -> float:
        p = self.rate
        return math.sqrt(p * (1 - p) / self.replications)


COVERAGE_HEADER = ("method", "replications", "horizon", "misses", "miscoverage", "se")


def _misses_scalar(method: str, x, mu, cfg: RunConfig) -> np.ndarray:
    """Boolean per replication: did ``method`` ever exclude the mean path?"""
    if method == "mix":
        c = cfg.eb()
        t, s, v = eb.accumulate(x, c)
        bad = eb.mix_excludes(s, t, c.u0 + v, mu, c)
        return bad.any(axis=-1)
    if method == "unif":
        t, s, v = eb.accumulate(x, cfg.eb())
        return eb.unif_excludes(s, np.broadcast_to(t, s.shape), v,
                                np.broadcast_to(mu, s.shape), cfg.alpha).any(axis=-1)
    b = band_for(method, x, cfg)
    return (b.valid & ~b.covers(mu)).any(axis=-1)


def _coverage_chunk(args):
    spec, methods, horizon, reps, cfg = args
    x = sample_many(spec, horizon, reps)
    mu = mean_path(spec, horizon).mu
    return {m: int(_misses_scalar(m, x, mu, cfg).sum()) for m in methods}


def _run_chunks(fn, jobs, workers: int):
    if workers <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, jobs))  # map preserves job order


def coverage(spec: DistributionSpec, methods, replications: int, horizon: int, cfg: RunConfig,
             workers: int = 1, chunk: int = 100):
    """Any-time miscoverage over ``t = 1..horizon`` (valid steps only)."""
    methods = check_methods(methods, cfg)
    if replications < 1:
        raise DomainError("replications must be >= 1")
    if spec.is_matrix:
        raise DomainError("use matrix_coverage for matrix scenarios")
    starts = range(0, replications, chunk)
    jobs = [(spec, methods, horizon, range(a, min(a + chunk, replications)), cfg) for a in starts]
    parts = _run_chunks(_coverage_chunk, jobs, workers)
    return [CoverageResult(m, replications, horizon, sum(p[m] for p in parts)) for m in methods]


def coverage_rows(results):
    return COVERAGE_HEADER, [(r.method, r.replications, r.horizon, r.misses, r.rate, r.se)
                             for r in results]


# ---------------------------------------------------------------------------
# kappa sweep

KAPPA_HEADER = ("t", "kappa", "kappa_z", "halfwidth")


def kappa_sweep(spec: DistributionSpec, kappas, horizon: int, seeds: int, alpha: float,
                per_decade: int = 16, times=None):
    """Median mixture-CS halfwidth per ``kappa`` at grid times."""
    kappas = [float(k) for k in kappas]
    if not kappas or any(k <= 0 for k in kappas):
        raise DomainError("kappas must be a nonempty list of positive numbers")
    grid = np.asarray(times, dtype=np.int64) if times is not None else log_grid(horizon, per_decade)
    if np.any(grid < 1) or np.any(grid > horizon):
        raise DomainError("grid times must lie in [1, horizon]")
    at = grid - 1
    rows = []
    vs = []
    for r in range(seeds):
        x, _ = sample_path(spec, horizon, r)
        _, _, v = eb.accumulate(x, eb.EbConfig(alpha=alpha))
        vs.append(v[at])
    vs = np.asarray(vs)
    for k in kappas:
        c = eb.EbConfig(alpha=alpha, kappa=k)
        w = np.median(eb.mix_radius(c.u0 + vs, c) / grid, axis=0)
        kz = float(kappa_z(k))
        rows += [(int(t), k, kz, float(wi)) for t, wi in zip(grid, w)]
    return KAPPA_HEADER, rows


# ---------------------------------------------------------------------------
# matrices

MATRIX_HEADER = ("t", "method", "deviation", "bound", "valid", "covered")


def matrix_track(obs, methods, alpha: float, kappa: float, mean=None):
    """Rows of ``gamma_max(Xbar_t - M_t)`` (or of the weighted mean for
    ``wang_ramdas``) next to each bound. ``mean`` is the true mean matrix
    (or a per-step path); without it the deviation column is NaN."""
    methods = tuple(methods)
    bad = [m for m in methods if m not in MATRIX_METHODS]
    if bad or not methods:
        raise DomainError(f"unknown matrix method(s): {', '.join(bad) or '(none)'}")
    obs = np.asarray(obs, dtype=float)
    n, d = obs.shape[0], obs.shape[-1]
    for x in obs:
        matrix.check_observation(x)
    rows = []
    for m in methods:
        if m == "mat_apx":
            band = matrix.matrix_apx_path(obs, matrix.MatrixEbConfig(d=d, alpha=alpha, kappa=kappa))
            est = np.cumsum(obs, axis=0) / np.arange(1, n + 1)[:, None, None]
        else:
            band, est = matrix.wr_path(obs, matrix.WangRamdasConfig(d=d, alpha=alpha))
        dev = matrix.gamma_max(est - mean) if mean is not None else np.full(n, np.nan)
        for i in range(n):
            cov = "" if mean is None else int(not (band.valid[i] and dev[i] > band.halfwidth[i]))
            rows.append((i + 1, m, float(dev[i]), float(band.halfwidth[i]), int(band.valid[i]), cov))
    return MATRIX_HEADER, rows


def _matrix_chunk(args):
    spec, methods, horizon, reps, alpha, kappa = args
    xs = sample_many(spec, horizon, reps)
    mean = matrix_mean(spec)
    d = spec.d
    t = np.arange(1, horizon + 1, dtype=float)[:, None, None]
    out = {}
    for m in methods:
        if m == "mat_apx":
            band = matrix.matrix_apx_path(xs, matrix.MatrixEbConfig(d=d, alpha=alpha, kappa=kappa))
            est = np.cumsum(xs, axis=-3) / t
        else:
            band, est = matrix.wr_path(xs, matrix.WangRamdasConfig(d=d, alpha=alpha))
        dev = matrix.gamma_max(est - mean)
        out[m] = int((band.valid & (dev > band.halfwidth)).any(axis=-1).sum())
    return out


def matrix_coverage(spec: DistributionSpec, methods, replications: int, horizon: int,
                    alpha: float, kappa: float, workers: int = 1, chunk: int = 25):
    if not spec.is_matrix:
        raise DomainError("matrix_coverage needs a matrix scenario")
    methods = tuple(methods)
    if any(m not in MATRIX_METHODS for m in methods):
        raise DomainError("unknown matrix method")
    jobs = [(spec, methods, horizon, range(a, min(a + chunk, replications)), alpha, kappa)
            for a in range(0, replications, chunk)]
    parts = _run_chunks(_matrix_chunk, jobs, workers)
    return [CoverageResult(m, replications, horizon, sum(p[m] for p in parts)) for m in methods]


# ---------------------------------------------------------------------------
# asymptotics tables

ASYMPTOTICS_HEADER = ("table", "row", "column", "value")


def asymptotics_rows(alpha: float, times=(10**4, 10**6), sigma: float = 0.5,
                     u: float = asymptotics.U_MAX):
    rows = []
    for name, half_var, upsi in asymptotics.psi_reference_table():
        rows.append(("psi", name, "sigma2_over_2", half_var))
        rows.append(("psi", name, "expected_psi_e", upsi))
    for t in times:
        for m, val in asymptotics.limiting_width_table(t, alpha, sigma, u):
            rows.append(("limiting_width", m, f"t={t}", val))
    return ASYMPTOTICS_HEADER, rows
