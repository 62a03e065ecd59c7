"""Morawetz weight, potential and the monotonicity monitor.

The radial weight solves ``Δa = a'' + 2·coth(r)·a' = 1`` with

    a'(r) = (sinh 2r − 2r) / (4 sinh² r),    a''(r) = (r·coth r − 1) / sinh² r.

Both are non-negative, ``a' < 1/2`` and ``a'(r) → 1/2`` as ``r`` grows. For a solution of
``u_tt − Δu + u³ = N`` the potential

    M(t) = −∫ u_t·a'·u_r + ½·u_t·u dμ

satisfies ``|M| ≤ E`` and

    dM/dt = ∫ a''·u_r² dμ + ¼‖u‖₄⁴ − ∫ N·a'·u_r dμ − ½∫ N·u dμ − 2π·a'(r_max)·w_r(r_max)².

The last term comes from the wall and vanishes while the solution stays away from it.
"""

from __future__ import annotations

import dataclasses
import logging
import typing as t

import numpy as np
import scipy.integrate

from . import grid as grid_mod, norms, spectral, types

logger = logging.getLogger(__name__)


INTEGRATED_CONSTANT = 8.0
"""Constant of ``‖u‖⁴_{L⁴} ≤ 8(sup E + ‖Nu‖_{L¹} + ‖N∇u‖_{L¹})``."""

DEFAULT_PROBES = 10
POINTWISE_SHARE = 0.99
_SERIES_CUTOFF = 1e-2


def weight_derivative(r: types.FloatArray) -> types.FloatArray:
    """Evaluate ``a'(r) = (sinh 2r − 2r)/(4 sinh² r)``.

    :param r: Positive radii
    :return: ``a'`` at ``r``
    """
    r = np.asarray(r, dtype=np.float64)
    small = r < _SERIES_CUTOFF
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        closed = (np.sinh(2.0 * r) - 2.0 * r) / (4.0 * np.sinh(r) ** 2)
    closed = np.where(np.isfinite(closed), closed, 0.5)
    series = r / 3.0 - 2.0 * r**3 / 45.0 + 2.0 * r**5 / 315.0
    return np.where(small, series, closed)


def weight_second_derivative(r: types.FloatArray) -> types.FloatArray:
    """Evaluate ``a''(r) = (r·coth r − 1)/sinh² r``.

    :param r: Positive radii
    :return: ``a''`` at ``r``
    """
    r = np.asarray(r, dtype=np.float64)
    small = r < _SERIES_CUTOFF
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        closed = (r / np.tanh(r) - 1.0) / np.sinh(r) ** 2
    closed = np.where(np.isfinite(closed), closed, 0.0)
    series = 1.0 / 3.0 - 2.0 * r**2 / 15.0 + 2.0 * r**4 / 63.0
    return np.where(small, series, closed)


@dataclasses.dataclass(frozen=True, eq=False)
class MorawetzWeight:
    """Tabulated weight ``a`` with its first two radial derivatives."""

    grid: grid_mod.RadialGrid
    a: types.FloatArray
    a_prime: types.FloatArray
    a_second: types.FloatArray
    a_prime_wall: float

    def laplacian_residual(self) -> types.FloatArray:
        """Return ``a'' + 2·coth(r)·a' − 1`` at the interior nodes."""
        return self.a_second + 2.0 * self.grid.coth * self.a_prime - 1.0


def build_weight(grid: grid_mod.RadialGrid) -> MorawetzWeight:
    """Tabulate the Morawetz weight on a grid.

    ``a`` is the cumulative trapezoid integral of the closed-form ``a'`` with ``a(0) = 0``.

    :param grid: Grid
    :return: The weight
    """
    a_prime = weight_derivative(grid.r)
    nodes = np.concatenate(([0.0], grid.r))
    a = scipy.integrate.cumulative_trapezoid(np.concatenate(([0.0], a_prime)), nodes, initial=0.0)
    return MorawetzWeight(
        grid=grid,
        a=a[1:],
        a_prime=a_prime,
        a_second=weight_second_derivative(grid.r),
        a_prime_wall=float(weight_derivative(np.array([grid.r_max]))[0]),
    )


def _radial_gradient(w: grid_mod.RadialField) -> tuple[types.FloatArray, float]:
    """Return ``sinh(r)·u_r = w_r − coth(r)·w`` at the interior nodes and ``w_r(r_max)``."""
    w_r = spectral.radial_derivative(w)
    return w_r[1:-1] - w.grid.coth * w.values, float(w_r[-1])


def potential(state: grid_mod.WaveState, wt: MorawetzWeight) -> float:
    """Evaluate the Morawetz potential ``M(t)``.

    :param state: State
    :param wt: Weight on the same grid
    :return: ``−4π Σ [a'·w_t·(w_r − coth·w) + ½·w_t·w]·dr``
    """
    sinh_u_r, _ = _radial_gradient(state.w)
    w_t = state.w_t.values
    return -state.grid.volume_integral(wt.a_prime * w_t * sinh_u_r + 0.5 * w_t * state.w.values)


@dataclasses.dataclass(frozen=True)
class DerivativeTerms:
    """Two evaluations of ``dM/dt`` at one instant.

    ``I .. IV`` come from the product rule applied to ``M``; the remaining terms form the
    integrated-by-parts identity.
    """

    t: float
    I: float  # noqa: E741
    II: float
    III: float
    IV: float
    hessian: float
    quarter_l4: float
    source_gradient: float
    source_field: float
    boundary: float

    @property
    def total(self) -> float:
        """``dM/dt`` from the product rule."""
        return self.I + self.II + self.III + self.IV

    @property
    def identity(self) -> float:
        """``dM/dt`` from the integrated identity."""
        return (
            self.hessian
            + self.quarter_l4
            + self.source_gradient
            + self.source_field
            + self.boundary
        )


def derivative_terms(
    state: grid_mod.WaveState, wt: MorawetzWeight, source: types.SourceHook | None = None
) -> DerivativeTerms:
    """Decompose ``dM/dt`` of a solution of ``u_tt − Δu + u³ = N`` at the state's time.

    :param state: State
    :param wt: Weight on the same grid
    :param source: Hook returning ``sinh(r)·N``; no forcing when absent
    :return: The terms
    """
    grid = state.grid
    w = state.w.values
    w_t = state.w_t.values
    g = np.zeros_like(w) if source is None else np.asarray(source(state.t), dtype=np.float64)

    sinh_u_r, w_r_wall = _radial_gradient(state.w)
    sinh_ut_r, _ = _radial_gradient(state.w_t)
    w_tt = spectral.laplacian(state.w).values - w**3 / grid.sinh2 + g

    return DerivativeTerms(
        t=state.t,
        I=-grid.volume_integral(w_tt * wt.a_prime * sinh_u_r),
        II=-grid.volume_integral(wt.a_prime * w_t * sinh_ut_r),
        III=-0.5 * grid.volume_integral(w_tt * w),
        IV=-0.5 * grid.volume_integral(w_t**2),
        hessian=grid.volume_integral(wt.a_second * sinh_u_r**2),
        quarter_l4=norms.potential_energy(state.w),
        source_gradient=-grid.volume_integral(g * wt.a_prime * sinh_u_r),
        source_field=-0.5 * grid.volume_integral(g * w),
        boundary=-0.5 * grid_mod.FOUR_PI * wt.a_prime_wall * w_r_wall**2,
    )


def source_error_norms(
    state: grid_mod.WaveState, source: types.SourceHook | None
) -> tuple[float, float]:
    """Return ``‖Nζ‖_{L¹}`` and ``‖N∇ζ‖_{L¹}`` for the field ``ζ`` of ``state``.

    :param state: State of ``ζ``
    :param source: Hook returning ``sinh(r)·N``
    :return: Both spatial norms; zeros without a source
    """
    if source is None:
        return 0.0, 0.0
    grid = state.grid
    g = np.asarray(source(state.t), dtype=np.float64)
    sinh_u_r, _ = _radial_gradient(state.w)
    return (
        grid.volume_integral(np.abs(g * state.w.values)),
        grid.volume_integral(np.abs(g * sinh_u_r)),
    )


@dataclasses.dataclass(frozen=True)
class MorawetzReport:
    """Time series and verdicts of the Morawetz monitor."""

    times: types.FloatArray
    M: types.FloatArray
    dMdt_fd: types.FloatArray
    quarter_l4: types.FloatArray
    energy: types.FloatArray
    err_Nzeta: types.FloatArray
    err_Ngradzeta: types.FloatArray
    margin: types.FloatArray
    tolerance: float
    probes: list[DerivativeTerms]
    l4_total: float
    sup_energy: float
    err_Nzeta_total: float
    err_Ngradzeta_total: float

    @property
    def integrated_bound(self) -> float:
        """Right side ``8(sup E + ‖Nζ‖_{L¹} + ‖N∇ζ‖_{L¹})`` of the integrated estimate."""
        return INTEGRATED_CONSTANT * (
            self.sup_energy + self.err_Nzeta_total + self.err_Ngradzeta_total
        )

    @property
    def integrated_margin(self) -> float:
        """Slack of the integrated estimate; non-negative when it holds."""
        return self.integrated_bound - self.l4_total

    @property
    def c_meas(self) -> float:
        """Measured constant ``‖u‖⁴_{L⁴} / (sup E + error norms)``."""
        denominator = self.sup_energy + self.err_Nzeta_total + self.err_Ngradzeta_total
        return self.l4_total / denominator if denominator > 0 else 0.0

    @property
    def c_meas_potential(self) -> float:
        """Measured ``sup|M| / sup E``; at most 1 in theory."""
        if self.sup_energy == 0:
            return 0.0
        return float(np.max(np.abs(self.M))) / self.sup_energy

    @property
    def pointwise_share(self) -> float:
        """Share of samples where ``dM/dt ≥ ¼‖u‖₄⁴ − errors − tolerance``."""
        if len(self.margin) == 0:
            return 1.0
        return float(np.mean(self.margin >= -self.tolerance))

    @property
    def holds(self) -> bool:
        """Whether both the pointwise and the integrated estimates hold."""
        return self.pointwise_share >= POINTWISE_SHARE and self.integrated_margin >= 0

    def rows(self) -> list[types.MorawetzRow]:
        """Return the report as CSV rows."""
        return [
            types.MorawetzRow(
                t=float(self.times[k]),
                M=float(self.M[k]),
                dMdt_fd=float(self.dMdt_fd[k]),
                quarter_L4=float(self.quarter_l4[k]),
                err_Nzeta=float(self.err_Nzeta[k]),
                err_Ngradzeta=float(self.err_Ngradzeta[k]),
                margin=float(self.margin[k]),
            )
            for k in range(len(self.times))
        ]


def _probe_indices(count: int, probes: int) -> set[int]:
    if count == 0 or probes <= 0:
        return set()
    return {int(k) for k in np.linspace(0, count - 1, num=min(probes, count)).round()}


def monitor(  # noqa: PLR0914
    states: t.Iterable[grid_mod.WaveState],
    source: types.SourceHook | None = None,
    *,
    weight: MorawetzWeight | None = None,
    probes: int = DEFAULT_PROBES,
    expected_count: int | None = None,
) -> MorawetzReport:
    """Check the Morawetz estimates along a uniformly sampled trajectory.

    ``dM/dt`` is taken from second-order finite differences of the sampled potential. The
    derivative decomposition is evaluated independently at ``probes`` evenly spaced samples;
    without ``expected_count`` it is evaluated at every sample and thinned afterwards.

    :param states: Trajectory, e.g. from :py:func:`h3wave_core.evolve.trajectory`
    :param source: Hook returning ``sinh(r)·N`` for forced equations
    :param weight: Weight; built from the first state's grid when absent
    :param probes: Number of probe samples
    :param expected_count: Length of the trajectory if known
    :raises ValueError: If the samples are not uniformly spaced in time
    :return: The report
    """
    times: list[float] = []
    m_series: list[float] = []
    quarter: list[float] = []
    energies: list[float] = []
    err_zeta: list[float] = []
    err_grad: list[float] = []
    probe_rows: list[DerivativeTerms] = []
    wanted = _probe_indices(expected_count, probes) if expected_count is not None else None

    for index, state in enumerate(states):
        if weight is None:
            weight = build_weight(state.grid)
        times.append(state.t)
        m_series.append(potential(state, weight))
        quarter.append(norms.potential_energy(state.w))
        energies.append(norms.energy(state).total)
        e_zeta, e_grad = source_error_norms(state, source)
        err_zeta.append(e_zeta)
        err_grad.append(e_grad)
        if wanted is None or index in wanted:
            probe_rows.append(derivative_terms(state, weight, source))

    if wanted is None:
        keep = _probe_indices(len(probe_rows), probes)
        probe_rows = [row for k, row in enumerate(probe_rows) if k in keep]

    t_arr = np.asarray(times)
    dt = _uniform_step(t_arr)
    m_arr = np.asarray(m_series)
    if len(m_arr) >= 3:  # noqa: PLR2004
        dmdt = np.gradient(m_arr, dt, edge_order=2)
    elif len(m_arr) == 2:  # noqa: PLR2004
        dmdt = np.gradient(m_arr, dt)
    else:
        dmdt = np.zeros_like(m_arr)

    quarter_arr = np.asarray(quarter)
    zeta_arr = np.asarray(err_zeta)
    grad_arr = np.asarray(err_grad)
    energy_arr = np.asarray(energies)
    e0 = float(energy_arr[0]) if len(energy_arr) else 0.0
    steps = max(len(t_arr) - 1, 0)

    report = MorawetzReport(
        times=t_arr,
        M=m_arr,
        dMdt_fd=dmdt,
        quarter_l4=quarter_arr,
        energy=energy_arr,
        err_Nzeta=zeta_arr,
        err_Ngradzeta=grad_arr,
        margin=dmdt - quarter_arr + zeta_arr + grad_arr,
        tolerance=10.0 * dt**2 * e0,
        probes=probe_rows,
        l4_total=4.0 * dt * float(np.sum(quarter_arr[:steps])),
        sup_energy=float(np.max(energy_arr, initial=0.0)),
        err_Nzeta_total=dt * float(np.sum(zeta_arr[:steps])),
        err_Ngradzeta_total=dt * float(np.sum(grad_arr[:steps])),
    )
    boundary = max((abs(p.boundary) for p in probe_rows), default=0.0)
    if boundary > 1e-8 * max(report.sup_energy, np.finfo(float).tiny):
        logger.warning(
            "Wall boundary term %s is not negligible; the domain guard is too tight.", boundary
        )
    logger.debug(
        "Morawetz monitor: %s samples, pointwise share %s, integrated margin %s.",
        len(t_arr),
        report.pointwise_share,
        report.integrated_margin,
    )
    return report


def _uniform_step(times: types.FloatArray) -> float:
    if len(times) < 2:  # noqa: PLR2004
        return 0.0
    steps = np.diff(times)
    dt = float(steps[0])
    if dt <= 0 or np.any(np.abs(steps - dt) > 1e-9 * max(abs(dt), 1.0)):
        msg = "Morawetz monitor needs samples uniformly spaced in increasing time"
        raise ValueError(msg)
    return dt
