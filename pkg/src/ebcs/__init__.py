"""Closed-form and mixture empirical Bernstein confidence sequences."""

from .eb import EbConfig, EbState, interval_apx, interval_mix, interval_unif, new_state, update
from .intervals import Band, Interval
from .kernel import (
    ConvergenceError,
    DomainError,
    KernelTolerances,
    erf,
    kappa_z,
    log_mixture_integral,
    psi_e,
    solve_radius,
)
from .stitching import StitchConfig, stitched_halfwidth, zeta

__all__ = [
    "Band",
    "ConvergenceError",
    "DomainError",
    "EbConfig",
    "EbState",
    "Interval",
    "KernelTolerances",
    "StitchConfig",
    "erf",
    "interval_apx",
    "interval_mix",
    "interval_unif",
    "kappa_z",
    "log_mixture_integral",
    "new_state",
    "psi_e",
    "solve_radius",
    "stitched_halfwidth",
    "update",
    "zeta",
]
