"""Tests for ``truncation`` module."""

from __future__ import annotations

import dataclasses
import itertools
import math

import numpy as np
import pytest

from h3wave_core import evolve, grid as grid_mod, norms, output, synth, truncation


def _plan(horizon: float = 1.0, dt: float = 0.01) -> evolve.StepPlan:
    return evolve.StepPlan.from_horizon(dt, horizon, r_support=4.0, r_max=16.0)


class TestInitDecomposition:
    """Test ``init_decomposition``."""

    @staticmethod
    def test_split(power_law_state: grid_mod.WaveState) -> None:
        """Test ``ψ + φ`` is the data and ``v`` starts at zero."""
        result = truncation.init_decomposition(power_law_state, 2.0**-6, 0.1)

        assert result.j == 1
        assert result.b_j == 0.0
        assert not np.any(result.v.w.values)
        assert result.identity_defect() < 1e-12
        assert result.E_phi_initial == pytest.approx(norms.energy(result.phi).total)

    @staticmethod
    @pytest.mark.parametrize(("epsilon", "t_max"), [(0.0, 4.0), (-1.0, 4.0), (0.1, 0.0)])
    def test_bad_scales_error(
        power_law_state: grid_mod.WaveState, epsilon: float, t_max: float
    ) -> None:
        """Test the interval budget and length limit must be positive."""
        with pytest.raises(ValueError, match="must be positive"):
            truncation.init_decomposition(power_law_state, 2.0**-6, epsilon, t_max)


class TestSources:
    """Test ``correction_source`` and ``zeta_source``."""

    @staticmethod
    def test_correction_source(small_grid: grid_mod.RadialGrid) -> None:
        """Test the forcing is ``−(w_u³ − w_φ³)/sinh²``."""
        u = grid_mod.RadialField(np.full(small_grid.size, 2.0), small_grid)
        phi = grid_mod.RadialField(np.ones(small_grid.size), small_grid)

        result = truncation.correction_source(u, phi)

        assert np.allclose(result, -7.0 / small_grid.sinh2)

    @staticmethod
    def test_zeta_source_vanishes_for_equal_fields(bump_state: grid_mod.WaveState) -> None:
        """Test ``N = ζ³ − u³`` vanishes when ``ζ = u``."""
        result = truncation.zeta_source(bump_state.w, bump_state.w)

        assert not np.any(result)


class TestAdvance:
    """Test ``advance`` and ``maybe_close_interval``."""

    @staticmethod
    def test_keeps_time_and_identity(power_law_state: grid_mod.WaveState) -> None:
        """Test one step advances all four states together."""
        dec = truncation.init_decomposition(power_law_state, 2.0**-6, 0.1)

        truncation.advance(dec, 0.01)

        assert dec.t == pytest.approx(0.01)
        assert {dec.u.t, dec.psi.t, dec.phi.t, dec.v.t} == {dec.t}
        assert dec.max_identity_defect < 1e-9
        assert dec.total_l4.partial > 0

    @staticmethod
    def test_desynchronized_states_error(power_law_state: grid_mod.WaveState) -> None:
        """Test states at different times are refused."""
        dec = truncation.init_decomposition(power_law_state, 2.0**-6, 0.1)
        dec.v = grid_mod.WaveState.zeros(power_law_state.grid, 0.5)

        with pytest.raises(RuntimeError, match="desynchronized"):
            truncation.advance(dec, 0.01)

    @staticmethod
    def test_closing_folds_correction(power_law_state: grid_mod.WaveState) -> None:
        """Test a closed interval moves ``v`` into ``φ`` and restarts ``v``."""
        dec = truncation.init_decomposition(power_law_state, 2.0**-6, 1e-12)
        truncation.advance(dec, 0.01)
        phi_plus_v = dec.phi + dec.v

        record = truncation.maybe_close_interval(dec)

        assert record is not None
        assert record.closed_by == "threshold"
        assert record.j == 1
        assert dec.j == 2
        assert dec.b_j == dec.t
        assert not np.any(dec.v.w.values)
        assert np.array_equal(dec.phi.w.values, phi_plus_v.w.values)

    @staticmethod
    def test_open_interval_stays_open(power_law_state: grid_mod.WaveState) -> None:
        """Test nothing is closed before the budget, the limit or the horizon is reached."""
        dec = truncation.init_decomposition(power_law_state, 2.0**-6, math.inf)
        truncation.advance(dec, 0.01)

        result = truncation.maybe_close_interval(dec)

        assert result is None
        assert dec.records == []


class TestRunTruncation:
    """Test ``run_truncation`` and the ledger."""

    @staticmethod
    def test_identity_and_increments(power_law_state: grid_mod.WaveState) -> None:
        """Test the decomposition identity holds and every increment matches its expansion."""
        dec = truncation.run_truncation(power_law_state, 2.0**-6, 0.05, _plan())

        assert dec.max_identity_defect <= truncation.IDENTITY_TOLERANCE
        assert dec.records
        for record in dec.records:
            cross = (
                record.dE_grad_cross + record.dE_kin_cross + record.dE_quad_v + record.dE_quartic
            )
            assert cross == pytest.approx(record.dE, rel=1e-8, abs=1e-14)

    @staticmethod
    def test_intervals_tile_the_run(power_law_state: grid_mod.WaveState) -> None:
        """Test consecutive intervals share endpoints and the last one ends at the horizon."""
        dec = truncation.run_truncation(power_law_state, 2.0**-6, 0.05, _plan())

        records = dec.records
        assert records[0].t_start == 0.0
        assert records[-1].t_end == pytest.approx(1.0)
        for before, after in itertools.pairwise(records):
            assert after.t_start == before.t_end
        assert all(r.closed_by == "threshold" for r in records[:-1])

    @staticmethod
    def test_pigeonhole_bound(power_law_state: grid_mod.WaveState) -> None:
        """Test the interval count respects the accumulator bound."""
        dec = truncation.run_truncation(power_law_state, 2.0**-6, 0.05, _plan())

        ledger = truncation.ledger_report(dec, 0.95).ledger

        assert 1 <= ledger.interval_count <= ledger.pigeonhole_bound

    @staticmethod
    def test_infinite_budget_gives_one_interval(power_law_state: grid_mod.WaveState) -> None:
        """Test ``ε = ∞`` closes a single interval at the horizon."""
        dec = truncation.run_truncation(power_law_state, 2.0**-6, math.inf, _plan())

        assert len(dec.records) == 1
        assert dec.records[0].closed_by == "horizon"

    @staticmethod
    def test_length_limit(power_law_state: grid_mod.WaveState) -> None:
        """Test intervals are cut at ``t_max`` when the budget is never reached."""
        dec = truncation.run_truncation(power_law_state, 2.0**-6, math.inf, _plan(), t_max=0.25)

        ledger = truncation.ledger_report(dec, 0.95).ledger

        assert [r.closed_by for r in dec.records] == ["t_max"] * 4
        assert ledger.closed_by_t_max == 4
        assert ledger.interval_count <= ledger.pigeonhole_bound

    @staticmethod
    def test_zero_scale_keeps_correction_negligible(power_law_state: grid_mod.WaveState) -> None:
        """Test ``s0 = 0`` puts everything into ``φ`` and ``v`` stays at roundoff."""
        dec = truncation.run_truncation(power_law_state, 0.0, 0.05, _plan(0.5))

        ledger = truncation.ledger_report(dec, 0.95).ledger

        assert ledger.sup_psi_L4 < 1e-10
        assert ledger.sup_E_v < 1e-20
        assert ledger.max_abs_dE < 1e-10

    @staticmethod
    def test_infinite_scale_keeps_phi_empty(power_law_state: grid_mod.WaveState) -> None:
        """Test ``s0 = ∞`` puts everything into ``ψ`` and ``φ`` stays zero until a closing."""
        dec = truncation.run_truncation(power_law_state, math.inf, math.inf, _plan(0.5))

        assert dec.E_phi_initial == 0.0
        assert dec.records[0].E_phi_end == 0.0

    @staticmethod
    def test_guard_violation_errors(power_law_state: grid_mod.WaveState) -> None:
        """Test runs refuse a plan that violates the domain guard."""
        plan = evolve.StepPlan(dt=0.1, t_end=1.0, guard=False)

        with pytest.raises(ValueError, match="Domain guard"):
            truncation.run_truncation(power_law_state, 2.0**-6, 0.1, plan)

    @staticmethod
    def test_empty_plan_closes_once(power_law_state: grid_mod.WaveState) -> None:
        """Test a zero-length run still closes its only interval."""
        plan = evolve.StepPlan.from_horizon(0.1, 0.0)

        dec = truncation.run_truncation(power_law_state, 2.0**-6, 0.1, plan)

        assert len(dec.records) == 1
        assert dec.records[0].dE == 0.0

    @staticmethod
    def test_ledger_balances_low_energy(power_law_state: grid_mod.WaveState) -> None:
        """Test the energy of ``φ`` changes by the increments plus a small stepper drift."""
        dec = truncation.run_truncation(power_law_state, 2.0**-6, 0.05, _plan())

        ledger = truncation.ledger_report(dec, 0.95).ledger

        assert ledger.records[0].E_phi_start == ledger.E_phi_initial
        for before, after in itertools.pairwise(ledger.records):
            assert after.E_phi_start == pytest.approx(before.E_phi_end + before.dE, rel=1e-12)
        change = ledger.E_phi_final - ledger.E_phi_initial
        assert change == pytest.approx(ledger.total_dE + ledger.phi_drift, rel=1e-10, abs=1e-12)
        assert abs(ledger.phi_drift) <= 1e-3 * ledger.E_phi_initial

    @staticmethod
    def test_ledger_rows_match_columns(power_law_state: grid_mod.WaveState) -> None:
        """Test ledger rows carry exactly the ledger CSV columns."""
        dec = truncation.run_truncation(power_law_state, 2.0**-6, 0.05, _plan(0.5))

        rows = truncation.ledger_report(dec, 0.95).ledger.rows()

        assert rows
        assert all(tuple(row) == output.LEDGER_COLUMNS for row in rows)


class TestLedgerReport:
    """Test ``ledger_report``."""

    @staticmethod
    def test_comparisons(power_law_state: grid_mod.WaveState) -> None:
        """Test every measured quantity is set against its scaling law."""
        dec = truncation.run_truncation(power_law_state, 2.0**-6, 0.05, _plan(0.5))

        result = truncation.ledger_report(dec, 0.95)

        quantities = [row["quantity"] for row in result.comparisons]
        assert quantities == [
            "sup_E_phi",
            "sup_E_v",
            "total_dE",
            "max_abs_dE",
            "sup_psi_L4",
            "sup_v_L4",
            "interval_count",
        ]
        sup_e_phi = result.comparisons[0]
        assert sup_e_phi["exponent"] == "1*s - 1"
        assert sup_e_phi["predicted"] == pytest.approx(2.0 ** (-6 * (0.95 - 1.0)))

    @staticmethod
    def test_no_prediction_without_scale(power_law_state: grid_mod.WaveState) -> None:
        """Test ``s0 = ∞`` has no finite prediction."""
        dec = truncation.run_truncation(power_law_state, math.inf, math.inf, _plan(0.2))

        result = truncation.ledger_report(dec, 0.95)

        assert math.isnan(result.comparisons[0]["predicted"])
        assert math.isnan(result.comparisons[0]["ratio"])

    @staticmethod
    def test_ledger_totals() -> None:
        """Test the ledger aggregates its records."""
        record = truncation.IntervalRecord(
            j=1,
            t_start=0.0,
            t_end=1.0,
            l4_accumulated=0.2,
            E_phi_start=1.0,
            E_phi_end=1.0,
            sup_E_v=0.1,
            dE=-0.5,
            sup_v_L4=0.3,
            closed_by="threshold",
            psi_L4=0.4,
            phi_L4=0.0,
            v_L4=0.0,
            phi_L83_L8=0.0,
            v_L83_L8=0.0,
            psi_L3_L6=0.0,
            psi_L83_L8=0.0,
            dE_grad_cross=0.0,
            dE_kin_cross=0.0,
            dE_quad_v=0.0,
            dE_quartic=0.0,
        )
        second = dataclasses.replace(record, j=2, dE=0.25, sup_E_v=0.2, closed_by="t_max")
        ledger = truncation.EnergyLedger(
            records=[record, second],
            s0=0.1,
            epsilon=0.2,
            total_l4=0.3,
            sup_E_phi=1.0,
            E_phi_initial=1.0,
            E_phi_final=1.0,
            max_identity_defect=0.0,
            err_Nzeta=0.0,
            err_Ngradzeta=0.0,
        )

        assert ledger.interval_count == 2
        assert ledger.total_dE == -0.25
        assert ledger.max_abs_dE == 0.5
        assert ledger.sup_E_v == 0.2
        assert ledger.sup_psi_L4 == 0.4
        assert ledger.closed_by_t_max == 1
        assert ledger.pigeonhole_bound == 2 + 1 + 1


def test_synthesized_data_run_is_reproducible(small_grid: grid_mod.RadialGrid) -> None:
    """Test two runs on identical data produce identical ledgers."""
    spec = synth.DataSpec(seed=5, radius=4.0)

    first = truncation.run_truncation(synth.synthesize(spec, small_grid), 2.0**-6, 0.05, _plan(0.3))
    data = synth.synthesize(spec, small_grid)
    second = truncation.run_truncation(data, 2.0**-6, 0.05, _plan(0.3))

    assert [r.row() for r in first.records] == [r.row() for r in second.records]
