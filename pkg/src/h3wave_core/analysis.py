"""Scaling laws, exponent fits, the bootstrap threshold and the scattering diagnostic."""

from __future__ import annotations

import dataclasses
import fractions
import itertools
import logging
import math
import types as pytypes
import typing as t

import numpy as np
import scipy.stats

from . import grid as grid_mod, norms, spectral, types

if t.TYPE_CHECKING:
    from . import truncation

logger = logging.getLogger(__name__)

Fraction = fractions.Fraction


@dataclasses.dataclass(frozen=True)
class AffineExponent:
    """Exponent ``slope·s + intercept`` of a power of ``s0``, in exact arithmetic."""

    slope: Fraction
    intercept: Fraction

    @t.overload
    def __call__(self, s: Fraction) -> Fraction: ...

    @t.overload
    def __call__(self, s: float) -> float: ...

    def __call__(self, s: Fraction | float) -> Fraction | float:
        """Evaluate the exponent at regularity ``s``."""
        if isinstance(s, Fraction):
            return self.slope * s + self.intercept
        return float(self.slope) * s + float(self.intercept)

    def __str__(self) -> str:
        """Render as ``a*s + b``."""
        sign = "-" if self.intercept < 0 else "+"
        return f"{self.slope}*s {sign} {abs(self.intercept)}"


def _exp(slope: str, intercept: str) -> AffineExponent:
    return AffineExponent(Fraction(slope), Fraction(intercept))


EXPONENTS: t.Mapping[str, AffineExponent] = pytypes.MappingProxyType(
    {
        "hi_data": _exp("1/2", "-1/4"),
        "lo_data": _exp("1/2", "-1/2"),
        "low_energy": _exp("1", "-1"),
        "psi_l4": _exp("1/2", "-1/4"),
        "psi_l3_l6": _exp("1/2", "-1/3"),
        "psi_l83_l8": _exp("1/2", "-3/8"),
        "v_l4": _exp("1/2", "-1/4"),
        "v_l83_l8": _exp("1/2", "-3/8"),
        "phi_l83_l8": _exp("1/2", "-1/2"),
        "correction_energy": _exp("7/4", "-3/2"),
        "increment": _exp("19/16", "-9/8"),
        "bootstrap_m": _exp("-3/16", "1/8"),
        "zeta_error": _exp("3/2", "-11/8"),
    }
)
"""Power of ``s0`` in every scaling law of the truncation scheme, as a function of ``s``.

``hi_data`` is the decay of the high part in ``H^{1/2}×H^{−1/2}``; ``zeta_error`` multiplies
``M^{5/8}`` in the bound of the Morawetz error terms.
"""

ERROR_POWER = Fraction(5, 8)
"""Power of ``M`` in the bound of the Morawetz error terms."""

STATED_THRESHOLD = Fraction(166, 185)
"""Threshold quoted with the bootstrap statement, which disagrees with its own algebra."""


@dataclasses.dataclass(frozen=True)
class SlopeFit:
    """Least-squares line through ``(log2 x, log2 y)``."""

    slope: float
    intercept: float
    residual: float
    stderr: float
    points: int


def fit_loglog_slope(x: t.Sequence[float], y: t.Sequence[float]) -> SlopeFit:
    """Fit ``log2 y = slope·log2 x + intercept``.

    :param x: Positive abscissae
    :param y: Positive ordinates
    :raises ValueError: If fewer than two points are given or a value is not positive
    :return: Slope, intercept, RMS residual and slope standard error
    """
    x_arr = np.asarray(x, dtype=np.float64)
    y_arr = np.asarray(y, dtype=np.float64)
    if x_arr.shape != y_arr.shape or len(x_arr) < 2:  # noqa: PLR2004
        msg = "Log-log fit needs at least two matching points"
        raise ValueError(msg)
    if np.any(x_arr <= 0) or np.any(y_arr <= 0):
        msg = "Log-log fit needs positive values"
        raise ValueError(msg)
    log_x, log_y = np.log2(x_arr), np.log2(y_arr)
    result = scipy.stats.linregress(log_x, log_y)
    residual = log_y - (result.slope * log_x + result.intercept)
    return SlopeFit(
        slope=float(result.slope),
        intercept=float(result.intercept),
        residual=float(np.sqrt(np.mean(residual**2))),
        stderr=float(result.stderr),
        points=len(x_arr),
    )


SWEEP_PREDICTIONS: t.Mapping[str, str | None] = pytypes.MappingProxyType(
    {
        "sup_E_phi": "low_energy",
        "sup_E_v": "correction_energy",
        "max_abs_dE": "increment",
        "sup_psi_L4": "psi_l4",
        "sup_v_L4": "v_l4",
        "total_L4": None,
    }
)
"""Sweep columns that are fitted, with the scaling law each one is compared against."""

MIN_SWEEP_POINTS = 4
MIN_SWEEP_OCTAVES = 3.0


def check_sweep_scales(s0_list: t.Sequence[float]) -> None:
    """Require at least four positive scales spanning three octaves.

    :raises ValueError: If the scales are too few or too close together
    """
    if len(s0_list) < MIN_SWEEP_POINTS or any(not s0 > 0 for s0 in s0_list):
        msg = f"A sweep needs at least {MIN_SWEEP_POINTS} positive scales, got {list(s0_list)}"
        raise ValueError(msg)
    if math.log2(max(s0_list) / min(s0_list)) < MIN_SWEEP_OCTAVES:
        msg = f"A sweep must span at least {MIN_SWEEP_OCTAVES:g} octaves, got {list(s0_list)}"
        raise ValueError(msg)


@dataclasses.dataclass(frozen=True)
class SweepResult:
    """Rows of an ``s0`` sweep with log-log fits of the monitored quantities."""

    s: float
    rows: list[types.SweepRow]
    fits: dict[str, SlopeFit]
    degenerate: list[str]

    def predicted_slope(self, quantity: str) -> float | None:
        """Return the slope the scaling law predicts for ``quantity``, if any."""
        law = SWEEP_PREDICTIONS.get(quantity)
        return None if law is None else EXPONENTS[law](self.s)

    def meets_prediction(self, quantity: str, tolerance: float) -> bool:
        """Check ``slope + residual ≥ predicted − tolerance`` for a fitted quantity.

        :raises KeyError: If the quantity was not fitted or has no prediction
        """
        predicted = self.predicted_slope(quantity)
        if predicted is None:
            msg = f"No scaling law is attached to {quantity!r}"
            raise KeyError(msg)
        fit = self.fits[quantity]
        return fit.slope + fit.residual >= predicted - tolerance


def summarize_sweep(s: float, rows: list[types.SweepRow]) -> SweepResult:
    """Fit every monitored column of a sweep against ``s0``.

    Columns that vanish anywhere cannot be fitted on a log scale; they are listed as degenerate.

    :param s: Regularity of the swept data
    :param rows: One row per scale
    :return: The result
    """
    fits: dict[str, SlopeFit] = {}
    degenerate: list[str] = []
    s0_values = [row["s0"] for row in rows]
    for quantity in SWEEP_PREDICTIONS:
        values = [float(row[quantity]) for row in rows]  # type: ignore[literal-required]
        if any(not v > 0 for v in values):
            degenerate.append(quantity)
            continue
        fits[quantity] = fit_loglog_slope(s0_values, values)
    if degenerate:
        logger.warning(
            "Sweep quantities not fitted (non-positive values): %s.", ", ".join(degenerate)
        )
    return SweepResult(s=s, rows=rows, fits=fits, degenerate=degenerate)


@dataclasses.dataclass(frozen=True)
class ThresholdReport:
    """Solution of the bootstrap exponent inequality."""

    threshold: Fraction
    stated: Fraction
    m_exponent: AffineExponent
    error_exponent: AffineExponent

    @property
    def decimal(self) -> float:
        """Threshold as a float."""
        return float(self.threshold)

    @property
    def discrepancy(self) -> bool:
        """Whether the solved threshold differs from the stated one."""
        return self.threshold != self.stated


def threshold_calculator(
    m_exponent: AffineExponent | None = None,
    error_exponent: AffineExponent | None = None,
    power: Fraction = ERROR_POWER,
) -> ThresholdReport:
    """Solve ``s0^{e(s)}·M^{p} ≲ M`` with ``M ∼ s0^{m(s)}`` for small ``s0``.

    The inequality holds for small ``s0`` iff ``e(s) + p·m(s) > m(s)``; with the default laws this
    is ``s > 182/201``. All arithmetic is exact.

    :param m_exponent: Exponent ``m`` of the bootstrap size ``M``
    :param error_exponent: Exponent ``e`` of the error bound
    :param power: Power ``p`` of ``M`` in the error bound
    :raises ValueError: If the inequality does not improve with ``s``
    :return: The threshold next to the stated one
    """
    m_law = m_exponent or EXPONENTS["bootstrap_m"]
    e_law = error_exponent or EXPONENTS["zeta_error"]
    a = e_law.slope + (power - 1) * m_law.slope
    b = e_law.intercept + (power - 1) * m_law.intercept
    if a <= 0:
        msg = f"Exponent inequality {a}*s + {b} > 0 has no lower threshold"
        raise ValueError(msg)
    report = ThresholdReport(
        threshold=-b / a, stated=STATED_THRESHOLD, m_exponent=m_law, error_exponent=e_law
    )
    if report.discrepancy:
        logger.warning(
            "Solved threshold %s differs from the stated threshold %s.",
            report.threshold,
            report.stated,
        )
    return report


@dataclasses.dataclass(frozen=True)
class BootstrapReport:
    """Measured ``‖u‖⁴_{L⁴}`` against the bootstrap size ``M = c·s0^{m(s)}``."""

    l4_total: float
    m: float
    error_estimate: float
    s: float
    s0: float

    @property
    def half_m(self) -> float:
        """Bootstrap target ``M/2``."""
        return 0.5 * self.m

    @property
    def holds(self) -> bool:
        """Whether ``‖u‖⁴_{L⁴} ≤ M/2``."""
        return self.l4_total <= self.half_m


def bootstrap_report(
    ledger: truncation.EnergyLedger, s: float, s0: float, c: float = 1.0
) -> BootstrapReport:
    """Compare a run's ``‖u‖⁴_{L⁴}`` with the bootstrap size at its scale.

    :param ledger: Ledger of the run
    :param s: Regularity of the data
    :param s0: Truncation scale
    :param c: Constant in ``M = c·s0^{−(3/16)s + 1/8}``
    :return: The report; ``error_estimate`` is ``s0^{(3/2)s − 11/8}·M^{5/8}``
    """
    m = c * s0 ** EXPONENTS["bootstrap_m"](s)
    return BootstrapReport(
        l4_total=ledger.total_l4,
        m=m,
        error_estimate=s0 ** EXPONENTS["zeta_error"](s) * m ** float(ERROR_POWER),
        s=s,
        s0=s0,
    )


@dataclasses.dataclass(frozen=True)
class ScatterReport:
    """Linear pullbacks ``S(−t_i)(u(t_i), u_t(t_i))`` and their consecutive differences."""

    pullbacks: list[grid_mod.WaveState]
    rows: list[types.ScatterRow]

    def decay_factors(self) -> list[float]:
        """Ratios of consecutive differences; above 1 while the pullbacks converge."""
        diffs = [row["difference"] for row in self.rows]
        return [a / b if b > 0 else math.inf for a, b in itertools.pairwise(diffs)]


SCATTER_NORM = 0.5


def scattering_diagnostic(
    states: t.Iterable[grid_mod.WaveState],
    probe_times: t.Sequence[float],
    *,
    max_time: float | None = None,
) -> ScatterReport:
    """Pull back a trajectory to ``t = 0`` at probe times and compare the pullbacks.

    A probe uses the first sample at or after its time. Differences are measured in
    ``H^{1/2} × H^{−1/2}``.

    :param states: Trajectory of a cubic run
    :param probe_times: Increasing probe times
    :param max_time: Latest time the domain guard covers
    :raises ValueError: If probes are not increasing, exceed the guard or are never reached
    :return: The pullbacks and their consecutive differences
    """
    probes = list(probe_times)
    if any(b <= a for a, b in itertools.pairwise(probes)):
        msg = f"Probe times must increase strictly, got {probes}"
        raise ValueError(msg)
    if max_time is not None and probes and probes[-1] > max_time:
        msg = f"Probe time {probes[-1]} lies beyond the guarded horizon {max_time}"
        raise ValueError(msg)

    pullbacks: list[grid_mod.WaveState] = []
    pending = iter(probes)
    target = next(pending, None)
    for state in states:
        if target is None:
            break
        if state.t >= target - 1e-9 * max(1.0, abs(target)):
            pullbacks.append(spectral.wave_propagate(state, -state.t))
            target = next(pending, None)
    if target is not None:
        msg = f"Trajectory ended before probe time {target}"
        raise ValueError(msg)

    rows = [
        types.ScatterRow(t_a=a, t_b=b, difference=norms.pair_norm(pb - pa, SCATTER_NORM))
        for (a, b), (pa, pb) in zip(
            itertools.pairwise(probes), itertools.pairwise(pullbacks), strict=True
        )
    ]
    return ScatterReport(pullbacks=pullbacks, rows=rows)
