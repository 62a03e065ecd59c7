"""Helper types."""

from __future__ import annotations

import typing as t

import numpy as np
import numpy.typing as npt

FloatArray = npt.NDArray[np.float64]
"""Array of double precision samples or coefficients."""

StepperKind = t.Literal["linear", "cubic", "forced"]
"""Time steppers known to :py:func:`h3wave_core.evolve.evolve_run`."""

DataKind = t.Literal["power_law", "bump", "single_mode"]
"""Families of synthetic initial data."""

SourceHook = t.Callable[[float], FloatArray]
"""Forcing at a requested time, in the weighted representation.

The hook returns ``sinh(r)·N(t, r)`` sampled at the interior nodes, i.e. the right hand side that
enters the equation for ``w = sinh(r)·u``.
"""


class NumericalAbortError(ArithmeticError):
    """Raised when an evolution produces non-finite samples."""

    def __init__(self, message: str, time: float) -> None:
        """Initialize with a diagnostic message and the time of the failing step.

        :param message: What went wrong
        :param time: Time at which the non-finite quantity appeared
        """
        super().__init__(f"{message} (t={time!r})")
        self.time = time


class EvolveRow(t.TypedDict):
    """Observer row of an evolution run."""

    t: float
    E_total: float
    E_kinetic: float
    E_gradient: float
    E_potential: float
    L4_partial: float
    M_t: float


class IntervalRow(t.TypedDict):
    """Ledger row of one closed truncation interval."""

    j: int
    t_start: float
    t_end: float
    l4_acc: float
    E_phi_start: float
    E_phi_end: float
    sup_E_v: float
    dE: float
    sup_v_L4: float


class BernsteinRow(t.TypedDict):
    """Bernstein ratio diagnostics at one heat-flow scale."""

    s: float
    ratio_low: float
    ratio_grad_high: float
    ratio_grad_band: float


class SplitNormRow(t.TypedDict):
    """High/low split norms of one state at one truncation scale."""

    s0: float
    hi_norm: float
    lo_norm: float
    hi_ratio: float
    lo_ratio: float


class MorawetzRow(t.TypedDict):
    """Morawetz monitor row at one sample time."""

    t: float
    M: float
    dMdt_fd: float
    quarter_L4: float
    err_Nzeta: float
    err_Ngradzeta: float
    margin: float


class ScatterRow(t.TypedDict):
    """Difference of two consecutive linear pullbacks."""

    t_a: float
    t_b: float
    difference: float


class StrichartzRow(t.TypedDict):
    """Maximal Strichartz ratio of one admissible triple over a data corpus."""

    p: float
    q: float
    gamma: float
    max_ratio: float
    samples: int


class SweepRow(t.TypedDict):
    """Measured quantities of one truncation run inside an ``s0`` sweep."""

    s: float
    s0: float
    sup_E_phi: float
    sup_E_v: float
    max_abs_dE: float
    total_L4: float
    interval_count: int
    sup_psi_L4: float
    sup_v_L4: float


class ComparisonRow(t.TypedDict):
    """Measured quantity next to the scaling law it is compared against."""

    quantity: str
    measured: float
    exponent: str
    predicted: float
    ratio: float
