from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Interval:
    """Confidence interval at one time step, clipped to [0, 1].

    ``halfwidth`` is the unclipped radius of the bound; ``valid`` is False
    when the bound carries no guarantee yet, in which case ``lo, hi = 0, 1``.
    """

    lo: float
    hi: float
    t: int
    valid: bool = True
    center: float = float("nan")
    halfwidth: float = float("nan")

    def contains(self, m: float) -> bool:
        return self.lo <= m <= self.hi


def make_interval(center: float, halfwidth: float, t: int, valid: bool = True) -> Interval:
    if not valid:
        return Interval(0.0, 1.0, t, False, center, halfwidth)
    return Interval(max(0.0, center - halfwidth), min(1.0, center + halfwidth), t, True,
                    center, halfwidth)


@dataclass
class Band:
    """A whole path of intervals, arrays over the trailing (time) axis."""

    center: np.ndarray
    halfwidth: np.ndarray
    valid: np.ndarray
    aux: dict = field(default_factory=dict)

    @property
    def lo(self) -> np.ndarray:
        return np.where(self.valid, np.clip(self.center - self.halfwidth, 0.0, 1.0), 0.0)

    @property
    def hi(self) -> np.ndarray:
        return np.where(self.valid, np.clip(self.center + self.halfwidth, 0.0, 1.0), 1.0)

    def covers(self, mu: np.ndarray) -> np.ndarray:
        return (self.lo <= mu) & (mu <= self.hi)

    def take(self, idx) -> "Band":
        """Restrict to the (0-based) time indices ``idx``."""
        aux = {k: np.take(v, idx, axis=-1) for k, v in self.aux.items()}
        return Band(np.take(self.center, idx, axis=-1), np.take(self.halfwidth, idx, axis=-1),
                    np.take(self.valid, idx, axis=-1), aux)

    def interval(self, i: int) -> Interval:
        """Interval at 0-based index ``i`` (single-path bands only)."""
        return make_interval(float(self.center[i]), float(self.halfwidth[i]), i + 1,
                             bool(self.valid[i]))
