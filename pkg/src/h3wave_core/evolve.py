"""Time steppers for the free, cubic and forced radial wave equations.

All steppers share one kick-drift-kick splitting: a half kick of the velocity by the forcing, the
exact linear flow of every mode over a full step, and a second half kick with the forcing at the
end of the step. The free stepper uses a zero kick and therefore follows the same code path.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import typing as t

import numpy as np

from . import grid as grid_mod, morawetz, norms, spectral, types
from .types import NumericalAbortError as NumericalAbortError

logger = logging.getLogger(__name__)


GUARD_MARGIN = 1.0
"""Distance kept between the light cone of the data and the wall at ``r_max``."""


def guard_holds(r_support: float, duration: float, r_max: float) -> bool:
    """Check that the wall stays outside the light cone of the data.

    :param r_support: Radius outside of which the data vanish
    :param duration: Length of the evolution
    :param r_max: Position of the wall
    :return: :py:obj:`True` if ``r_support + duration + 1 ≤ r_max``
    """
    return r_support + duration + GUARD_MARGIN <= r_max


@dataclasses.dataclass(frozen=True)
class StepPlan:
    """Uniform time stepping from ``t_start`` to ``t_end``."""

    dt: float
    t_end: float
    t_start: float = 0.0
    guard: bool = True

    def __post_init__(self) -> None:
        """Validate the plan.

        :raises ValueError: If ``dt`` is not positive or does not divide the interval
        """
        if not (math.isfinite(self.dt) and self.dt > 0):
            msg = f"Time step must be positive and finite, got {self.dt!r}"
            raise ValueError(msg)
        if not self.t_end >= self.t_start:
            msg = f"Plan ends before it starts ({self.t_start!r} > {self.t_end!r})"
            raise ValueError(msg)
        ratio = (self.t_end - self.t_start) / self.dt
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            msg = f"dt={self.dt!r} does not divide [{self.t_start!r}, {self.t_end!r}]"
            raise ValueError(msg)

    @property
    def steps(self) -> int:
        """Number of steps of the plan."""
        return round((self.t_end - self.t_start) / self.dt)

    @classmethod
    def from_horizon(
        cls,
        dt: float,
        t_end: float,
        *,
        t_start: float = 0.0,
        r_support: float | None = None,
        r_max: float | None = None,
    ) -> StepPlan:
        """Build a plan, shrinking ``dt`` so a whole number of steps fits.

        :param dt: Requested time step
        :param t_end: Final time
        :param t_start: Initial time
        :param r_support: Support radius of the data; the guard is assumed to hold when absent
        :param r_max: Wall position; needed together with ``r_support``
        :raises ValueError: If ``dt`` is not positive
        :return: The plan
        """
        if not (math.isfinite(dt) and dt > 0):
            msg = f"Time step must be positive and finite, got {dt!r}"
            raise ValueError(msg)
        duration = t_end - t_start
        steps = math.ceil(duration / dt - 1e-9) if duration > 0 else 0
        adjusted = duration / steps if steps else dt
        guard = True
        if r_support is not None and r_max is not None:
            guard = guard_holds(r_support, duration, r_max)
        if adjusted != dt:
            logger.debug("Adjusted time step from %s to %s.", dt, adjusted)
        return cls(dt=adjusted, t_end=t_end, t_start=t_start, guard=guard)


def cubic_force(w: types.FloatArray, sinh2: types.FloatArray) -> types.FloatArray:
    """Defocusing force ``−w³/sinh²(r)`` of the weighted cubic equation."""
    return -(w**3) / sinh2


def _check_finite(values: types.FloatArray, what: str, time: float) -> None:
    if not np.all(np.isfinite(values)):
        raise NumericalAbortError(f"Non-finite {what}", time)


def _kick_drift_kick(
    state: grid_mod.WaveState,
    dt: float,
    force_start: types.FloatArray | None,
    force_end: t.Callable[[types.FloatArray], types.FloatArray | None],
) -> grid_mod.WaveState:
    grid = state.grid
    w_t = state.w_t.values
    if force_start is not None:
        w_t = w_t + 0.5 * dt * force_start

    omega = np.sqrt(spectral.laplacian_symbol(spectral.frequencies(grid)))
    w_hat, wt_hat = spectral.rotate(
        spectral.sine_transform(state.w.values, grid.dr),
        spectral.sine_transform(w_t, grid.dr),
        omega,
        dt,
    )
    w = spectral.inverse_sine_transform(w_hat, grid.dr)
    w_t = spectral.inverse_sine_transform(wt_hat, grid.dr)

    end = force_end(w)
    if end is not None:
        w_t = w_t + 0.5 * dt * end

    time = state.t + dt
    _check_finite(w, "field samples", time)
    _check_finite(w_t, "velocity samples", time)
    return grid_mod.WaveState(grid_mod.RadialField(w, grid), grid_mod.RadialField(w_t, grid), time)


def _no_force(_: types.FloatArray) -> None:
    return None


def step_linear(state: grid_mod.WaveState, dt: float) -> grid_mod.WaveState:
    """Advance the free wave equation by ``dt``; exact per mode.

    :param state: Current state
    :param dt: Step, possibly negative
    :return: State at ``t + dt``
    """
    return _kick_drift_kick(state, dt, None, _no_force)


def step_cubic(state: grid_mod.WaveState, dt: float) -> grid_mod.WaveState:
    """Advance ``u_tt − Δu + u³ = 0`` by one symmetric splitting step.

    :param state: Current state
    :param dt: Step, possibly negative
    :raises NumericalAbortError: If the step produces non-finite samples
    :return: State at ``t + dt``
    """
    sinh2 = state.grid.sinh2
    return _kick_drift_kick(
        state, dt, cubic_force(state.w.values, sinh2), lambda w: cubic_force(w, sinh2)
    )


def _evaluate_source(src: types.SourceHook, time: float) -> types.FloatArray:
    values = np.asarray(src(time), dtype=np.float64)
    _check_finite(values, "source values", time)
    return values


def step_forced(state: grid_mod.WaveState, src: types.SourceHook, dt: float) -> grid_mod.WaveState:
    """Advance ``u_tt − Δu = N`` by one splitting step.

    The hook returns ``sinh(r)·N`` and is sampled at both ends of the step.

    :param state: Current state
    :param src: Forcing hook
    :param dt: Step, possibly negative
    :raises NumericalAbortError: If the source or the result is not finite
    :return: State at ``t + dt``
    """
    start = _evaluate_source(src, state.t)
    end = _evaluate_source(src, state.t + dt)
    return _kick_drift_kick(state, dt, start, lambda _: end)


def step(
    state: grid_mod.WaveState,
    dt: float,
    stepper: types.StepperKind,
    source: types.SourceHook | None = None,
) -> grid_mod.WaveState:
    """Dispatch one step to the stepper of the given kind.

    :raises ValueError: If a forced step has no source
    """
    if stepper == "linear":
        return step_linear(state, dt)
    if stepper == "cubic":
        return step_cubic(state, dt)
    if source is None:
        msg = "Forced stepping requires a source hook"
        raise ValueError(msg)
    return step_forced(state, source, dt)


def trajectory(
    state: grid_mod.WaveState,
    plan: StepPlan,
    stepper: types.StepperKind,
    source: types.SourceHook | None = None,
) -> t.Iterator[grid_mod.WaveState]:
    """Yield the initial state and the state after every step of the plan.

    :param state: Initial state
    :param plan: Step plan
    :param stepper: Equation to integrate
    :param source: Forcing hook for forced runs
    :raises ValueError: If a cubic run violates the domain guard or a forced run has no source
    :return: Iterator over ``plan.steps + 1`` states
    """
    if stepper == "cubic" and not plan.guard:
        msg = "Domain guard violated: r_support + horizon + 1 exceeds r_max"
        raise ValueError(msg)
    if stepper == "forced" and source is None:
        msg = "Forced stepping requires a source hook"
        raise ValueError(msg)
    yield state
    for _ in range(plan.steps):
        state = step(state, plan.dt, stepper, source)
        yield state


class Observer(t.Protocol):
    """Callback fed with every state of a run."""

    def observe(self, state: grid_mod.WaveState) -> None:
        """Record one state."""

    def result(self) -> t.Any:  # noqa: ANN401
        """Return what has been recorded."""


@dataclasses.dataclass(frozen=True)
class RunSummary:
    """Outcome of :py:func:`evolve_run`."""

    final: grid_mod.WaveState
    outputs: list[t.Any]
    steps: int


def evolve_run(
    state: grid_mod.WaveState,
    plan: StepPlan,
    stepper: types.StepperKind,
    observers: t.Sequence[Observer] = (),
    source: types.SourceHook | None = None,
) -> RunSummary:
    """Run a plan and feed every state, the initial one included, to the observers.

    :param state: Initial state
    :param plan: Step plan
    :param stepper: Equation to integrate
    :param observers: Observers called ``plan.steps + 1`` times each
    :param source: Forcing hook for forced runs
    :raises ValueError: On guard violations or a missing source
    :raises NumericalAbortError: If a step produces non-finite values
    :return: Final state and observer results
    """
    logger.info("Starting %s run: %s steps of dt=%s.", stepper, plan.steps, plan.dt)
    final = state
    for current in trajectory(state, plan, stepper, source):
        for observer in observers:
            observer.observe(current)
        final = current
    return RunSummary(final=final, outputs=[o.result() for o in observers], steps=plan.steps)


class EnergyObserver:
    """Energy parts, running ``L⁴_{t,x}`` accumulation and Morawetz potential per state.

    The ``L4_partial`` column at time ``t_k`` holds ``Σ_{j<k} dt·‖u(t_j)‖₄⁴``. Without the
    Morawetz potential ``M_t`` is NaN.
    """

    def __init__(
        self,
        dt: float,
        weight: morawetz.MorawetzWeight | None = None,
        *,
        with_morawetz: bool = True,
    ) -> None:
        """Initialize the observer.

        :param dt: Step length of the run
        :param weight: Morawetz weight; built from the first observed grid when absent
        :param with_morawetz: Whether to evaluate the Morawetz potential
        """
        self.dt = dt
        self.weight = weight
        self.with_morawetz = with_morawetz
        self.rows: list[types.EvolveRow] = []
        self._l4 = norms.SpaceTimeAccumulator(p=4, q=4)

    def observe(self, state: grid_mod.WaveState) -> None:
        """Append the row of ``state``."""
        m_t = math.nan
        if self.with_morawetz:
            if self.weight is None:
                self.weight = morawetz.build_weight(state.grid)
            m_t = morawetz.potential(state, self.weight)
        parts = norms.energy(state)
        self.rows.append(
            types.EvolveRow(
                t=state.t,
                E_total=parts.total,
                E_kinetic=parts.kinetic,
                E_gradient=parts.gradient,
                E_potential=parts.potential,
                L4_partial=self._l4.partial,
                M_t=m_t,
            )
        )
        self._l4.feed(norms.lq_norm(state.w, 4), self.dt)

    def result(self) -> list[types.EvolveRow]:
        """Return the recorded rows."""
        return self.rows


class SpaceTimeObserver:
    """Accumulate one ``L^p_t L^q_x`` norm with the left-endpoint rule."""

    def __init__(self, p: float, q: float, dt: float) -> None:
        """Initialize the observer for exponents ``(p, q)`` and step ``dt``."""
        self.dt = dt
        self.acc = norms.SpaceTimeAccumulator(p=p, q=q)
        self._pending: float | None = None

    def observe(self, state: grid_mod.WaveState) -> None:
        """Feed the previous state and remember the current one."""
        if self._pending is not None:
            self.acc.feed(self._pending, self.dt)
        self._pending = norms.lq_norm(state.w, self.acc.q)

    def result(self) -> norms.SpaceTimeAccumulator:
        """Return the accumulator over all completed steps."""
        return self.acc


def wall_mass_fraction(state: grid_mod.WaveState, margin: float = GUARD_MARGIN) -> float:
    """Share of the ``L²`` mass of ``u`` located within ``margin`` of the wall.

    :param state: State
    :param margin: Width of the inspected layer
    :return: Fraction in ``[0, 1]``; ``0`` for the zero state
    """
    grid = state.grid
    mass = state.w.values**2
    total = float(np.sum(mass))
    if total == 0:
        return 0.0
    return float(np.sum(mass[grid.r > grid.r_max - margin])) / total
