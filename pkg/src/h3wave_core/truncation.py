"""Fourier truncation scheme: the coupled evolution of ``u = ψ + φ + v`` and its energy ledger.

The data are split at scale ``s0``: the rough high part ``ψ`` evolves by the free wave equation
for the whole run, the smooth low part ``φ`` by the cubic equation and the correction ``v`` by the
forced equation ``v_tt − Δv = −(u³ − φ³)``. Time is cut into intervals on which the
``L⁴_{t,x}`` norm of ``u`` accumulates to ``ε``. At the end of each interval ``v`` is added to
``φ`` and restarted from zero; the energy gained by ``φ`` in this step is the increment ``ΔE``
recorded in the ledger.

All three nonlinear kicks of one step are built from the same positions, so they sum to the kick
of ``u`` and ``u = ψ + φ + v`` holds up to roundoff for the whole run.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import typing as t

import numpy as np

from . import analysis, evolve, grid as grid_mod, morawetz, norms, projections, types

logger = logging.getLogger(__name__)


IDENTITY_TOLERANCE = 1e-9
DEFAULT_T_MAX = 4.0

ClosedBy = t.Literal["threshold", "t_max", "horizon"]


@dataclasses.dataclass(frozen=True)
class IntervalRecord:
    """Measurements of one closed interval ``[t_start, t_end]``.

    Space-time norms are ``L^p_t L^q_x`` norms over the interval; ``sup_v_L4`` is
    ``sup_t ‖v(t)‖_{L⁴}``. ``dE = E(φ+v) − E(φ)`` at ``t_end`` and the ``dE_*`` columns are its
    exact expansion.
    """

    j: int
    t_start: float
    t_end: float
    l4_accumulated: float
    E_phi_start: float
    E_phi_end: float
    sup_E_v: float
    dE: float
    sup_v_L4: float
    closed_by: ClosedBy
    psi_L4: float
    phi_L4: float
    v_L4: float
    phi_L83_L8: float
    v_L83_L8: float
    psi_L3_L6: float
    psi_L83_L8: float
    dE_grad_cross: float
    dE_kin_cross: float
    dE_quad_v: float
    dE_quartic: float

    def row(self) -> types.IntervalRow:
        """Return the ledger CSV row."""
        return types.IntervalRow(
            j=self.j,
            t_start=self.t_start,
            t_end=self.t_end,
            l4_acc=self.l4_accumulated,
            E_phi_start=self.E_phi_start,
            E_phi_end=self.E_phi_end,
            sup_E_v=self.sup_E_v,
            dE=self.dE,
            sup_v_L4=self.sup_v_L4,
        )


@dataclasses.dataclass
class _IntervalMeasures:
    """Running measurements of the open interval."""

    t_start: float
    E_phi_start: float
    u_l4: norms.SpaceTimeAccumulator = dataclasses.field(
        default_factory=lambda: norms.SpaceTimeAccumulator(4, 4)
    )
    psi_l4: norms.SpaceTimeAccumulator = dataclasses.field(
        default_factory=lambda: norms.SpaceTimeAccumulator(4, 4)
    )
    phi_l4: norms.SpaceTimeAccumulator = dataclasses.field(
        default_factory=lambda: norms.SpaceTimeAccumulator(4, 4)
    )
    v_l4: norms.SpaceTimeAccumulator = dataclasses.field(
        default_factory=lambda: norms.SpaceTimeAccumulator(4, 4)
    )
    phi_l83_l8: norms.SpaceTimeAccumulator = dataclasses.field(
        default_factory=lambda: norms.SpaceTimeAccumulator(8 / 3, 8)
    )
    v_l83_l8: norms.SpaceTimeAccumulator = dataclasses.field(
        default_factory=lambda: norms.SpaceTimeAccumulator(8 / 3, 8)
    )
    psi_l3_l6: norms.SpaceTimeAccumulator = dataclasses.field(
        default_factory=lambda: norms.SpaceTimeAccumulator(3, 6)
    )
    psi_l83_l8: norms.SpaceTimeAccumulator = dataclasses.field(
        default_factory=lambda: norms.SpaceTimeAccumulator(8 / 3, 8)
    )
    sup_E_v: float = 0.0
    sup_v_L4: float = 0.0


@dataclasses.dataclass
class Decomposition:
    """Coupled states ``(u, ψ, φ, v)`` of one truncation run and their bookkeeping.

    Instances are single-owner and mutated in place by :py:func:`advance` and
    :py:func:`maybe_close_interval`.
    """

    u: grid_mod.WaveState
    psi: grid_mod.WaveState
    phi: grid_mod.WaveState
    v: grid_mod.WaveState
    s0: float
    epsilon: float
    t_max: float = DEFAULT_T_MAX
    j: int = 1
    b_j: float = 0.0
    records: list[IntervalRecord] = dataclasses.field(default_factory=list)
    total_l4: norms.SpaceTimeAccumulator = dataclasses.field(
        default_factory=lambda: norms.SpaceTimeAccumulator(4, 4)
    )
    err_Nzeta: float = 0.0
    err_Ngradzeta: float = 0.0
    max_identity_defect: float = 0.0
    E_phi_initial: float = 0.0
    sup_E_phi: float = 0.0
    current: _IntervalMeasures = dataclasses.field(init=False)

    def __post_init__(self) -> None:
        """Open the first interval."""
        self.E_phi_initial = norms.energy(self.phi).total
        self.sup_E_phi = self.E_phi_initial
        self.current = _IntervalMeasures(t_start=self.b_j, E_phi_start=self.E_phi_initial)

    @property
    def t(self) -> float:
        """Common time of the four states."""
        return self.u.t

    def identity_defect(self) -> float:
        """Relative ``L²`` defect ``‖u − (ψ+φ+v)‖ / ‖u‖``; absolute when ``u = 0``."""
        residual = self.u.w.values - (self.psi.w.values + self.phi.w.values + self.v.w.values)
        scale = float(np.linalg.norm(self.u.w.values))
        defect = float(np.linalg.norm(residual))
        return defect / scale if scale > 0 else defect


def init_decomposition(
    data: grid_mod.WaveState, s0: float, epsilon: float, t_max: float = DEFAULT_T_MAX
) -> Decomposition:
    """Split the data and start the first interval at ``b_1 = t(data)``.

    :param data: Initial state of ``u``
    :param s0: Truncation scale, ``0 ≤ s0 ≤ ∞``
    :param epsilon: ``L⁴_{t,x}`` budget per interval, ``0 < ε ≤ ∞``
    :param t_max: Longest interval, positive
    :raises ValueError: On invalid scales
    :return: The decomposition with ``ψ = hi``, ``φ = lo`` and ``v = 0``
    """
    if not (epsilon > 0 and t_max > 0):
        msg = f"epsilon and t_max must be positive, got epsilon={epsilon!r}, t_max={t_max!r}"
        raise ValueError(msg)
    split = projections.split_state(data, s0)
    logger.debug("Initialized decomposition with s0=%s, epsilon=%s.", s0, epsilon)
    return Decomposition(
        u=data,
        psi=split.hi,
        phi=split.lo,
        v=grid_mod.WaveState.zeros(data.grid, data.t),
        s0=s0,
        epsilon=epsilon,
        t_max=t_max,
        b_j=data.t,
    )


class _EndpointSource:
    """Forcing ``−(w_u³ − w_φ³)/sinh²`` sampled at the two ends of one step."""

    def __init__(
        self, t_start: float, start: types.FloatArray, t_end: float, end: types.FloatArray
    ) -> None:
        self.t_start = t_start
        self.start = start
        self.t_end = t_end
        self.end = end

    def __call__(self, time: float) -> types.FloatArray:
        if time == self.t_start:
            return self.start
        if time == self.t_end:
            return self.end
        msg = f"Source requested at {time!r}, outside the step [{self.t_start!r}, {self.t_end!r}]"
        raise RuntimeError(msg)


def correction_source(
    u: grid_mod.RadialField, phi: grid_mod.RadialField
) -> types.FloatArray:
    """Weighted forcing ``−(w_u³ − w_φ³)/sinh²(r)`` of the correction equation."""
    return -(u.values**3 - phi.values**3) / u.grid.sinh2


def zeta_source(u: grid_mod.RadialField, zeta: grid_mod.RadialField) -> types.FloatArray:
    """Weighted ``sinh(r)·N`` with ``N = ζ³ − u³`` for ``ζ = φ + v``."""
    return (zeta.values**3 - u.values**3) / u.grid.sinh2


def _check_synchronized(dec: Decomposition) -> None:
    times = (dec.u.t, dec.psi.t, dec.phi.t, dec.v.t)
    if max(times) - min(times) > 1e-12 * max(1.0, abs(dec.u.t)):
        msg = f"Decomposition states are desynchronized: {times}"
        raise RuntimeError(msg)


def _measure_left_endpoint(dec: Decomposition, dt: float) -> None:
    current = dec.current
    u_l4 = norms.lq_norm(dec.u.w, 4)
    current.u_l4.feed(u_l4, dt)
    dec.total_l4.feed(u_l4, dt)
    current.psi_l4.feed(norms.lq_norm(dec.psi.w, 4), dt)
    current.phi_l4.feed(norms.lq_norm(dec.phi.w, 4), dt)
    current.v_l4.feed(norms.lq_norm(dec.v.w, 4), dt)
    current.phi_l83_l8.feed(norms.lq_norm(dec.phi.w, 8), dt)
    current.v_l83_l8.feed(norms.lq_norm(dec.v.w, 8), dt)
    current.psi_l3_l6.feed(norms.lq_norm(dec.psi.w, 6), dt)
    current.psi_l83_l8.feed(norms.lq_norm(dec.psi.w, 8), dt)

    zeta = dec.phi + dec.v
    g = zeta_source(dec.u.w, zeta.w)
    err_zeta, err_grad = morawetz.source_error_norms(zeta, lambda _: g)
    dec.err_Nzeta += dt * err_zeta
    dec.err_Ngradzeta += dt * err_grad


def _measure_correction(dec: Decomposition) -> None:
    current = dec.current
    current.sup_E_v = max(current.sup_E_v, norms.energy(dec.v).total)
    current.sup_v_L4 = max(current.sup_v_L4, norms.lq_norm(dec.v.w, 4))


def advance(dec: Decomposition, dt: float) -> Decomposition:
    """Advance all four states by one step and feed the interval accumulators.

    :param dec: Decomposition; updated in place
    :param dt: Positive step
    :raises RuntimeError: If the states are not synchronized
    :raises NumericalAbortError: If a stepper produces non-finite values
    :return: The same decomposition
    """
    _check_synchronized(dec)
    if dec.t == dec.current.t_start:
        _measure_correction(dec)
    _measure_left_endpoint(dec, dt)

    t_start = dec.t
    source_start = correction_source(dec.u.w, dec.phi.w)
    dec.u = evolve.step_cubic(dec.u, dt)
    dec.phi = evolve.step_cubic(dec.phi, dt)
    dec.psi = evolve.step_linear(dec.psi, dt)
    source = _EndpointSource(
        t_start, source_start, t_start + dt, correction_source(dec.u.w, dec.phi.w)
    )
    dec.v = evolve.step_forced(dec.v, source, dt)

    _measure_correction(dec)
    dec.sup_E_phi = max(dec.sup_E_phi, norms.energy(dec.phi).total)
    defect = dec.identity_defect()
    if defect > IDENTITY_TOLERANCE and defect > dec.max_identity_defect:
        logger.warning("Decomposition identity defect %s at t=%s.", defect, dec.t)
    dec.max_identity_defect = max(dec.max_identity_defect, defect)
    return dec


def maybe_close_interval(dec: Decomposition, *, at_horizon: bool = False) -> IntervalRecord | None:
    """Close the open interval if its budget, its length limit or the horizon is reached.

    Closing records ``ΔE = E(φ+v) − E(φ)``, then sets ``φ ← φ + v`` and ``v ← 0``.

    :param dec: Decomposition; updated in place
    :param at_horizon: Whether the run ends at the current time
    :return: The record of the closed interval, or :py:obj:`None`
    """
    current = dec.current
    closed_by: ClosedBy | None = None
    if current.u_l4.partial >= dec.epsilon:
        closed_by = "threshold"
    elif dec.t - current.t_start >= dec.t_max - 1e-9 * dec.t_max:
        closed_by = "t_max"
    elif at_horizon:
        closed_by = "horizon"
    if closed_by is None:
        return None

    e_phi_end = norms.energy(dec.phi).total
    cross = norms.energy_cross_terms(dec.phi, dec.v)
    increment = norms.energy(dec.phi + dec.v).total - e_phi_end
    record = IntervalRecord(
        j=dec.j,
        t_start=current.t_start,
        t_end=dec.t,
        l4_accumulated=current.u_l4.partial,
        E_phi_start=current.E_phi_start,
        E_phi_end=e_phi_end,
        sup_E_v=current.sup_E_v,
        dE=increment,
        sup_v_L4=current.sup_v_L4,
        closed_by=closed_by,
        psi_L4=current.psi_l4.norm(),
        phi_L4=current.phi_l4.norm(),
        v_L4=current.v_l4.norm(),
        phi_L83_L8=current.phi_l83_l8.norm(),
        v_L83_L8=current.v_l83_l8.norm(),
        psi_L3_L6=current.psi_l3_l6.norm(),
        psi_L83_L8=current.psi_l83_l8.norm(),
        dE_grad_cross=cross.grad_cross,
        dE_kin_cross=cross.kin_cross,
        dE_quad_v=cross.quad_v,
        dE_quartic=cross.quartic,
    )
    dec.records.append(record)
    logger.info(
        "Closed interval %s [%s, %s] by %s: dE=%s.",
        record.j,
        record.t_start,
        record.t_end,
        closed_by,
        record.dE,
    )

    dec.phi = dec.phi + dec.v
    dec.v = grid_mod.WaveState.zeros(dec.u.grid, dec.t)
    dec.j += 1
    dec.b_j = dec.t
    e_phi_start = norms.energy(dec.phi).total
    dec.sup_E_phi = max(dec.sup_E_phi, e_phi_start)
    dec.current = _IntervalMeasures(t_start=dec.t, E_phi_start=e_phi_start)
    return record


@dataclasses.dataclass(frozen=True)
class EnergyLedger:
    """Interval records of a finished run with their totals."""

    records: list[IntervalRecord]
    s0: float
    epsilon: float
    total_l4: float
    sup_E_phi: float
    E_phi_initial: float
    E_phi_final: float
    max_identity_defect: float
    err_Nzeta: float
    err_Ngradzeta: float

    @property
    def interval_count(self) -> int:
        """Number of closed intervals."""
        return len(self.records)

    @property
    def total_dE(self) -> float:
        """Sum of all increments."""
        return math.fsum(r.dE for r in self.records)

    @property
    def phi_drift(self) -> float:
        """Energy change of ``φ`` inside the intervals, i.e. the stepper drift.

        ``E_phi_final − E_phi_initial = total_dE + phi_drift``.
        """
        return math.fsum(r.E_phi_end - r.E_phi_start for r in self.records)

    @property
    def max_abs_dE(self) -> float:
        """Largest increment in absolute value."""
        return max((abs(r.dE) for r in self.records), default=0.0)

    @property
    def sup_E_v(self) -> float:
        """Largest correction energy over all intervals."""
        return max((r.sup_E_v for r in self.records), default=0.0)

    @property
    def sup_v_L4(self) -> float:
        """Largest ``‖v(t)‖_{L⁴}`` over the run."""
        return max((r.sup_v_L4 for r in self.records), default=0.0)

    @property
    def sup_psi_L4(self) -> float:
        """Largest ``‖ψ‖_{L⁴_{t,x}(I_j)}`` over the intervals."""
        return max((r.psi_L4 for r in self.records), default=0.0)

    @property
    def closed_by_t_max(self) -> int:
        """Number of intervals closed by the length limit."""
        return sum(1 for r in self.records if r.closed_by == "t_max")

    @property
    def pigeonhole_bound(self) -> int:
        """Most intervals the accumulator allows: ``ceil(‖u‖⁴_{L⁴}/ε) + 1`` plus forced closings."""
        if math.isinf(self.epsilon):
            return 1 + self.closed_by_t_max
        return math.ceil(self.total_l4 / self.epsilon) + 1 + self.closed_by_t_max

    def rows(self) -> list[types.IntervalRow]:
        """Return the ledger CSV rows."""
        return [record.row() for record in self.records]


def _ledger(dec: Decomposition) -> EnergyLedger:
    return EnergyLedger(
        records=list(dec.records),
        s0=dec.s0,
        epsilon=dec.epsilon,
        total_l4=dec.total_l4.partial,
        sup_E_phi=dec.sup_E_phi,
        E_phi_initial=dec.E_phi_initial,
        E_phi_final=norms.energy(dec.phi).total,
        max_identity_defect=dec.max_identity_defect,
        err_Nzeta=dec.err_Nzeta,
        err_Ngradzeta=dec.err_Ngradzeta,
    )


@dataclasses.dataclass(frozen=True)
class LedgerReport:
    """Ledger with measured quantities set against their scaling laws."""

    ledger: EnergyLedger
    comparisons: list[types.ComparisonRow]


def _comparison(
    quantity: str, measured: float, law: str, s: float, s0: float, prefactor: float = 1.0
) -> types.ComparisonRow:
    exponent = analysis.EXPONENTS[law]
    predicted = prefactor * s0 ** exponent(s) if s0 > 0 and math.isfinite(s0) else math.nan
    ratio = measured / predicted if predicted and math.isfinite(predicted) else math.nan
    return types.ComparisonRow(
        quantity=quantity,
        measured=measured,
        exponent=str(exponent),
        predicted=predicted,
        ratio=ratio,
    )


def ledger_report(dec: Decomposition, s: float) -> LedgerReport:
    """Summarize a finished run and compare it with the scaling laws at regularity ``s``.

    :param dec: Decomposition after the last interval has been closed
    :param s: Regularity of the data
    :return: Ledger and comparison table
    """
    ledger = _ledger(dec)
    budget = ledger.total_l4 / ledger.epsilon if math.isfinite(ledger.epsilon) else 0.0
    comparisons = [
        _comparison("sup_E_phi", ledger.sup_E_phi, "low_energy", s, dec.s0),
        _comparison("sup_E_v", ledger.sup_E_v, "correction_energy", s, dec.s0),
        _comparison("total_dE", ledger.total_dE, "increment", s, dec.s0, prefactor=budget),
        _comparison("max_abs_dE", ledger.max_abs_dE, "increment", s, dec.s0),
        _comparison("sup_psi_L4", ledger.sup_psi_L4, "psi_l4", s, dec.s0),
        _comparison("sup_v_L4", ledger.sup_v_L4, "v_l4", s, dec.s0),
        types.ComparisonRow(
            quantity="interval_count",
            measured=float(ledger.interval_count),
            exponent="M/epsilon",
            predicted=budget,
            ratio=ledger.interval_count / budget if budget > 0 else math.nan,
        ),
    ]
    if ledger.interval_count > ledger.pigeonhole_bound:
        logger.warning(
            "Interval count %s exceeds the pigeonhole bound %s.",
            ledger.interval_count,
            ledger.pigeonhole_bound,
        )
    return LedgerReport(ledger=ledger, comparisons=comparisons)


def run_truncation(
    data: grid_mod.WaveState,
    s0: float,
    epsilon: float,
    plan: evolve.StepPlan,
    t_max: float = DEFAULT_T_MAX,
) -> Decomposition:
    """Run the truncation scheme over a plan and close the last interval at the horizon.

    :param data: Initial state
    :param s0: Truncation scale
    :param epsilon: ``L⁴_{t,x}`` budget per interval
    :param plan: Step plan; its guard must hold
    :param t_max: Longest interval
    :raises ValueError: On invalid scales or a violated domain guard
    :raises NumericalAbortError: If a stepper produces non-finite values
    :return: The finished decomposition
    """
    if not plan.guard:
        msg = "Domain guard violated: r_support + horizon + 1 exceeds r_max"
        raise ValueError(msg)
    dec = init_decomposition(data, s0, epsilon, t_max)
    logger.info("Truncation run: s0=%s, epsilon=%s, %s steps.", s0, epsilon, plan.steps)
    for index in range(plan.steps):
        advance(dec, plan.dt)
        maybe_close_interval(dec, at_horizon=index == plan.steps - 1)
    if plan.steps == 0:
        maybe_close_interval(dec, at_horizon=True)
    return dec
