"""Synthetic streams, their average conditional mean paths, and CSV ingestion.

Randomness comes from numpy's counter-based Philox generator. Replication
``r`` of a scenario with seed ``s`` always uses ``SeedSequence(s, spawn_key=(r,))``,
so a replication's data do not depend on how replications are batched or
distributed over workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable

import numpy as np

from .kernel import DomainError

SCALAR_KINDS = ("bernoulli", "beta", "uniform", "two_point", "point", "switch", "sinusoid")
MATRIX_KINDS = ("diagonal-bernoulli", "rotated-beta")
_BASIS_KEY = (1, 0)
_ALIASES = {"two-point": "two_point", "diagonal_bernoulli": "diagonal-bernoulli",
            "rotated_beta": "rotated-beta", "ber": "bernoulli", "unif": "uniform"}


class DataError(ValueError):
    """Malformed or out-of-range input data."""

    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


@dataclass(frozen=True)
class DistributionSpec:
    """A data scenario.

    ``params`` by kind:

    * ``bernoulli``: (p,)
    * ``beta``: (a, b)
    * ``uniform``: ()
    * ``two_point``: (mu, eps): 1 w.p. eps, else (mu - eps)/(1 - eps)
    * ``point``: (value,)
    * ``switch``: (p1, p2, frac): Bernoulli(p1) for t <= frac*T, then Bernoulli(p2)
    * ``sinusoid``: (amplitude[, period]): Bernoulli(0.5 + A sin(2 pi t / P)), P = T/4 by default
    * ``diagonal-bernoulli``: (p,) or one p per coordinate, matrices need ``d``
    * ``rotated-beta``: (a, b) or 2d values (a_1..a_d, b_1..b_d)
    """

    kind: str
    params: tuple = ()
    seed: int = 0
    d: int = 1

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        k, p = self.kind, self.params
        need = {"bernoulli": 1, "beta": 2, "uniform": 0, "two_point": 2, "point": 1, "switch": 3}
        if k in need and len(p) != need[k]:
            raise DomainError(f"{k} takes {need[k]} parameter(s), got {len(p)}")
        if k == "bernoulli" and not 0 <= p[0] <= 1:
            raise DomainError("bernoulli p must lie in [0, 1]")
        elif k == "beta" and not (p[0] > 0 and p[1] > 0):
            raise DomainError("beta parameters must be positive")
        elif k == "two_point" and not 0 < p[1] < p[0] < 1:
            raise DomainError("two_point needs 0 < eps < mu < 1")
        elif k == "point" and not 0 <= p[0] <= 1:
            raise DomainError("point value must lie in [0, 1]")
        elif k == "switch":
            if not (0 <= p[0] <= 1 and 0 <= p[1] <= 1):
                raise DomainError("switch probabilities must lie in [0, 1]")
            if not 0 < p[2] < 1:
                raise DomainError("switch frac must lie in (0, 1)")
        elif k == "sinusoid":
            if len(p) not in (1, 2):
                raise DomainError("sinusoid takes (amplitude[, period])")
            if not 0 <= p[0] <= 0.4:
                raise DomainError("sinusoid amplitude must lie in [0, 0.4]")
            if len(p) == 2 and not p[1] > 0:
                raise DomainError("sinusoid period must be positive")
        elif k == "diagonal-bernoulli":
            if len(p) not in (1, self.d) or any(not 0 <= q <= 1 for q in p):
                raise DomainError("diagonal-bernoulli takes p in [0, 1], one or d of them")
        elif k == "rotated-beta":
            if len(p) not in (2, 2 * self.d) or any(q <= 0 for q in p):
                raise DomainError("rotated-beta takes positive (a, b) or d a's then d b's")
        elif k not in SCALAR_KINDS + MATRIX_KINDS:
            raise DomainError(f"unknown distribution kind {k!r}")
        if self.d < 1:
            raise DomainError("d must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")

    @property
    def is_matrix(self) -> bool:
        return self.kind in MATRIX_KINDS

    @property
    def mean(self) -> float:
        """Mean of a fixed (time-invariant) scalar distribution."""
        k, p = self.kind, self.params
        if k in ("bernoulli", "point"):
            return p[0]
        if k == "beta":
            return p[0] / (p[0] + p[1])
        if k == "uniform":
            return 0.5
        if k == "two_point":
            return p[0]
        raise DomainError(f"{k} has no single mean")

    @property
    def variance(self) -> float:
        k, p = self.kind, self.params
        if k == "bernoulli":
            return p[0] * (1 - p[0])
        if k == "point":
            return 0.0
        if k == "beta":
            a, b = p
            return a * b / ((a + b) ** 2 * (a + b + 1))
        if k == "uniform":
            return 1.0 / 12
        if k == "two_point":
            mu, eps = p
            low = (mu - eps) / (1 - eps)
            return eps * (1 - mu) ** 2 + (1 - eps) * (low - mu) ** 2
        raise DomainError(f"{k} has no single variance")


@dataclass
class MeanPath:
    """Per-step conditional means ``m`` and their running averages ``mu``."""

    m: np.ndarray
    mu: np.ndarray = field(init=False)

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=float)
        self.mu = running_mean(self.m)


_BLOCK = 512


def running_mean(m: np.ndarray) -> np.ndarray:
    """``t^{-1} sum_{j<=t} m_j`` along axis 0, accurate to the final rounding.

    Block prefixes are carried as exact double-double pairs (``math.fsum``);
    within a block the partial sums run in extended precision.
    """
    n = m.shape[0]
    if n == 0:
        return m.copy()
    if np.all(m == m[:1]):
        return np.broadcast_to(m[:1], m.shape).copy()
    flat = m.reshape(n, -1)
    k = flat.shape[1]
    nb = -(-n // _BLOCK)
    pad = np.zeros((nb * _BLOCK, k))
    pad[:n] = flat
    blocks = pad.reshape(nb, _BLOCK, k)
    hi = np.zeros((nb, k))
    lo = np.zeros((nb, k))
    for c in range(k):
        h = l = 0.0
        for b in range(nb):
            hi[b, c], lo[b, c] = h, l
            vals = [h, l, *blocks[b, :, c].tolist()]
            h2 = math.fsum(vals)
            l = math.fsum(vals + [-h2])
            h = h2
    base = hi.astype(np.longdouble) + lo.astype(np.longdouble)
    within = np.cumsum(blocks.astype(np.longdouble), axis=1) + base[:, None, :]
    t = np.arange(1, nb * _BLOCK + 1, dtype=np.longdouble)[:, None]
    out = (within.reshape(-1, k) / t)[:n].astype(float)
    return out.reshape(m.shape)


def parse_dist(text: str, seed: int = 0, d: int = 1) -> DistributionSpec:
    """Parse ``kind[:p1,p2,...]``, e.g. ``bernoulli:0.5`` or ``switch:0.8,0.2,0.1``."""
    kind, _, rest = text.strip().partition(":")
    kind = kind.strip().lower()
    kind = _ALIASES.get(kind, kind)
    try:
        params = tuple(float(v) for v in rest.split(",")) if rest.strip() else ()
    except ValueError as err:
        raise DomainError(f"bad parameters in {text!r}") from err
    return DistributionSpec(kind, params, seed=seed, d=d)


def replication_rng(seed: int, replication: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(replication,))))


@lru_cache(maxsize=32)
def mean_path(spec: DistributionSpec, horizon: int) -> MeanPath:
    """Exact conditional-mean path of a scenario (cached, arrays read-only)."""
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    k, p = spec.kind, spec.params
    t = np.arange(1, horizon + 1, dtype=float)
    if k == "switch":
        m = np.where(t <= p[2] * horizon, p[0], p[1])
    elif k == "sinusoid":
        m = _sinusoid_p(t, p, horizon)
    elif spec.is_matrix:
        m = np.broadcast_to(matrix_mean(spec), (horizon, spec.d, spec.d))
    else:
        m = np.full(horizon, spec.mean)
    out = MeanPath(m)
    out.m.flags.writeable = False
    out.mu.flags.writeable = False
    return out


def _sinusoid_p(t, params, horizon):
    period = params[1] if len(params) == 2 else horizon / 4
    return 0.5 + params[0] * np.sin(2 * math.pi * t / period)


def _draw_scalar(spec: DistributionSpec, rng: np.random.Generator, horizon: int) -> np.ndarray:
    k, p = spec.kind, spec.params
    if k == "bernoulli":
        return (rng.random(horizon) < p[0]).astype(float)
    if k == "beta":
        return rng.beta(p[0], p[1], horizon)
    if k == "uniform":
        return rng.random(horizon)
    if k == "two_point":
        mu, eps = p
        return np.where(rng.random(horizon) < eps, 1.0, (mu - eps) / (1 - eps))
    if k == "point":
        return np.full(horizon, p[0])
    m = mean_path(spec, horizon).m
    return (rng.random(horizon) < m).astype(float)


def fixed_basis(spec: DistributionSpec) -> np.ndarray:
    """Orthogonal basis shared by every replication of a matrix scenario."""
    if spec.kind == "diagonal-bernoulli" or spec.d == 1:
        return np.eye(spec.d)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(spec.seed, spawn_key=_BASIS_KEY)))
    q, r = np.linalg.qr(rng.standard_normal((spec.d, spec.d)))
    return q * np.sign(np.diag(r))


def _coord_params(spec: DistributionSpec):
    p, d = spec.params, spec.d
    if spec.kind == "diagonal-bernoulli":
        return np.broadcast_to(np.asarray(p), (d,)).copy() if len(p) == 1 else np.asarray(p)
    if len(p) == 2:
        return np.full(d, p[0]), np.full(d, p[1])
    return np.asarray(p[:d]), np.asarray(p[d:])


def matrix_mean(spec: DistributionSpec) -> np.ndarray:
    q = fixed_basis(spec)
    if spec.kind == "diagonal-bernoulli":
        lam = _coord_params(spec)
    else:
        a, b = _coord_params(spec)
        lam = a / (a + b)
    return (q * lam) @ q.T


def _draw_matrix(spec: DistributionSpec, rng: np.random.Generator, horizon: int) -> np.ndarray:
    d = spec.d
    if spec.kind == "diagonal-bernoulli":
        lam = (rng.random((horizon, d)) < _coord_params(spec)).astype(float)
    else:
        a, b = _coord_params(spec)
        lam = rng.beta(a, b, (horizon, d))
    q = fixed_basis(spec)
    out = (q * lam[:, None, :]) @ q.T
    return 0.5 * (out + np.swapaxes(out, -1, -2))


def matrix_generator(d: int, kind: str, params=(0.5,), seed: int = 0, horizon: int = 1,
                     replication: int = 0) -> np.ndarray:
    """Stream of ``horizon`` symmetric ``d x d`` matrices with spectrum in [0, 1]."""
    spec = DistributionSpec(kind, tuple(params), seed=seed, d=d)
    if not spec.is_matrix:
        raise DomainError(f"{kind!r} is not a matrix generator")
    return _draw_matrix(spec, replication_rng(seed, replication), horizon)


def sample_path(spec: DistributionSpec, horizon: int, replication: int = 0):
    """Return ``(observations, MeanPath)`` for one replication."""
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    rng = replication_rng(spec.seed, replication)
    if spec.is_matrix:
        obs = _draw_matrix(spec, rng, horizon)
    else:
        obs = _draw_scalar(spec, rng, horizon)
    return obs, mean_path(spec, horizon)


def sample_many(spec: DistributionSpec, horizon: int, replications: Iterable[int]) -> np.ndarray:
    """Stack replications along a new leading axis."""
    return np.stack([sample_path(spec, horizon, r)[0] for r in replications])


# ---------------------------------------------------------------------------
# CSV


def _data_lines(path):
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if line and not line.startswith("#"):
                yield lineno, line


def ingest_csv(path, eig_tol: float = 1e-12) -> np.ndarray:
    """Read a scalar stream (one value per line) or a matrix stream.

    Matrix files start with a ``d=<int>`` line followed by one row of ``d*d``
    comma-separated entries per step. Blank lines and ``#`` comments are skipped.
    Returns shape ``(T,)`` or ``(T, d, d)``.
    """
    p = Path(path)
    if not p.is_file():
        raise DataError(f"no such file: {path}")
    lines = list(_data_lines(p))
    if not lines:
        raise DataError("file holds no observations")
    first_no, first = lines[0]
    if first.lower().startswith("d="):
        try:
            d = int(first[2:])
        except ValueError as err:
            raise DataError(f"bad dimension header {first!r}", first_no) from err
        if d < 1:
            raise DataError("dimension must be >= 1", first_no)
        return _ingest_matrix(lines[1:], d, eig_tol)
    out = []
    for lineno, line in lines:
        try:
            v = float(line)
        except ValueError as err:
            raise DataError(f"cannot parse {line!r} as a number", lineno) from err
        if not 0.0 <= v <= 1.0:
            raise DataError(f"value {v!r} outside [0, 1]", lineno)
        out.append(v)
    return np.asarray(out)


def _ingest_matrix(lines, d: int, eig_tol: float) -> np.ndarray:
    from .matrix import sym_eig

    mats = []
    for lineno, line in lines:
        cells = line.split(",")
        if len(cells) != d * d:
            raise DataError(f"expected {d * d} entries, got {len(cells)}", lineno)
        try:
            m = np.asarray([float(c) for c in cells]).reshape(d, d)
        except ValueError as err:
            raise DataError("cannot parse matrix entries", lineno) from err
        if not np.all(np.isfinite(m)):
            raise DataError("non-finite matrix entry", lineno)
        if np.any(np.abs(m - m.T) > 1e-12 * np.maximum(1.0, np.abs(m))):
            raise DataError("matrix is not symmetric", lineno)
        w = sym_eig(m).eigenvalues
        if w[-1] < -eig_tol or w[0] > 1 + eig_tol:
            raise DataError(f"eigenvalues {w[-1]:.6g}..{w[0]:.6g} outside [0, 1]", lineno)
        mats.append(0.5 * (m + m.T))
    if not mats:
        raise DataError("file holds no observations")
    return np.stack(mats)


def write_matrix_csv(path, mats) -> None:
    mats = np.asarray(mats, dtype=float)
    d = mats.shape[-1]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"d={d}\n")
        for m in mats:
            fh.write(",".join(f"{v:.17g}" for v in m.ravel()) + "\n")


def write_scalar_csv(path, xs) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for v in np.asarray(xs, dtype=float):
            fh.write(f"{v:.17g}\n")
