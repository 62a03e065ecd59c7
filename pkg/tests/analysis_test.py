"""Tests for ``analysis`` module."""

from __future__ import annotations

import logging
import math
from fractions import Fraction

import numpy as np
import pytest

from h3wave_core import analysis, evolve, grid as grid_mod, spectral, truncation, types


class TestExponents:
    """Test the scaling-law table."""

    @staticmethod
    def test_exact_evaluation() -> None:
        """Test exponents evaluate exactly for fractions and approximately for floats."""
        law = analysis.EXPONENTS["correction_energy"]

        assert law(Fraction(19, 20)) == Fraction(7, 4) * Fraction(19, 20) - Fraction(3, 2)
        assert law(0.95) == pytest.approx(1.75 * 0.95 - 1.5)

    @staticmethod
    @pytest.mark.parametrize(
        ("name", "rendered"),
        [("low_energy", "1*s - 1"), ("bootstrap_m", "-3/16*s + 1/8"), ("hi_data", "1/2*s - 1/4")],
    )
    def test_rendering(name: str, rendered: str) -> None:
        """Test exponents render as ``a*s + b``."""
        assert str(analysis.EXPONENTS[name]) == rendered

    @staticmethod
    def test_table_is_read_only() -> None:
        """Test the table cannot be modified."""
        with pytest.raises(TypeError):
            analysis.EXPONENTS["hi_data"] = analysis.EXPONENTS["lo_data"]  # type: ignore[index]


class TestThreshold:
    """Test ``threshold_calculator``."""

    @staticmethod
    def test_solved_threshold(caplog: pytest.LogCaptureFixture) -> None:
        """Test the default laws solve to ``182/201`` and the discrepancy is logged."""
        with caplog.at_level(logging.WARNING):
            result = analysis.threshold_calculator()

        assert result.threshold == Fraction(182, 201)
        assert result.decimal == pytest.approx(0.905473, abs=1e-6)
        assert result.stated == Fraction(166, 185)
        assert result.discrepancy is True
        assert "differs from the stated threshold" in caplog.text

    @staticmethod
    def test_steeper_bootstrap_law_lowers_threshold() -> None:
        """Test a bootstrap exponent of larger magnitude in ``s`` lowers the threshold."""
        steeper = analysis.AffineExponent(Fraction(-1, 4), Fraction(1, 8))

        result = analysis.threshold_calculator(m_exponent=steeper)

        assert result.threshold < Fraction(182, 201)

    @staticmethod
    def test_matching_stated_threshold_has_no_discrepancy(caplog: pytest.LogCaptureFixture) -> None:
        """Test no warning is logged when the solution matches the stated value."""
        error = analysis.AffineExponent(Fraction(185, 166), Fraction(-1))
        flat = analysis.AffineExponent(Fraction(0), Fraction(0))

        with caplog.at_level(logging.WARNING):
            result = analysis.threshold_calculator(m_exponent=flat, error_exponent=error)

        assert result.threshold == Fraction(166, 185)
        assert result.discrepancy is False
        assert caplog.text == ""

    @staticmethod
    def test_no_lower_threshold_errors() -> None:
        """Test an inequality that does not improve with ``s`` is rejected."""
        error = analysis.AffineExponent(Fraction(0), Fraction(1))
        rising = analysis.AffineExponent(Fraction(1), Fraction(0))

        with pytest.raises(ValueError, match="no lower threshold"):
            analysis.threshold_calculator(m_exponent=rising, error_exponent=error)


class TestFits:
    """Test ``fit_loglog_slope`` and ``check_sweep_scales``."""

    @staticmethod
    def test_exact_power_law() -> None:
        """Test an exact power law is fitted with zero residual."""
        x = [2.0**-k for k in range(4, 11)]
        y = [3.0 * v**0.5 for v in x]

        result = analysis.fit_loglog_slope(x, y)

        assert result.slope == pytest.approx(0.5)
        assert result.intercept == pytest.approx(math.log2(3.0))
        assert result.residual == pytest.approx(0.0, abs=1e-12)
        assert result.points == 7

    @staticmethod
    @pytest.mark.parametrize(
        ("x", "y", "message"),
        [
            ([1.0], [1.0], "at least two"),
            ([1.0, 2.0], [1.0], "at least two"),
            ([1.0, 0.0], [1.0, 2.0], "positive"),
        ],
    )
    def test_bad_points_error(x: list[float], y: list[float], message: str) -> None:
        """Test degenerate inputs are rejected."""
        with pytest.raises(ValueError, match=message):
            analysis.fit_loglog_slope(x, y)

    @staticmethod
    @pytest.mark.parametrize(
        ("s0_list", "message"),
        [
            ([2.0**-4, 2.0**-5, 2.0**-6], "at least 4"),
            ([2.0**-4, 2.0**-5, 2.0**-6, 0.0], "at least 4"),
            ([2.0**-4, 2.0**-5, 2.0**-5.5, 2.0**-6], "octaves"),
        ],
    )
    def test_bad_sweep_scales_error(s0_list: list[float], message: str) -> None:
        """Test sweeps need four positive scales over three octaves."""
        with pytest.raises(ValueError, match=message):
            analysis.check_sweep_scales(s0_list)

    @staticmethod
    def test_good_sweep_scales() -> None:
        """Test the default scale list is accepted."""
        analysis.check_sweep_scales([2.0**-k for k in range(4, 11)])  # act


def _sweep_row(s0: float, scale: float) -> types.SweepRow:
    return types.SweepRow(
        s=0.95,
        s0=s0,
        sup_E_phi=scale * s0**-0.05,
        sup_E_v=scale * s0**0.1625,
        max_abs_dE=scale * s0**-0.05,
        total_L4=1.0,
        interval_count=3,
        sup_psi_L4=s0**0.225,
        sup_v_L4=0.0,
    )


class TestSummarizeSweep:
    """Test ``summarize_sweep``."""

    @staticmethod
    def test_fits_and_degenerate_columns(caplog: pytest.LogCaptureFixture) -> None:
        """Test positive columns are fitted and vanishing ones are listed."""
        rows = [_sweep_row(2.0**-k, 2.0) for k in range(4, 9)]

        with caplog.at_level(logging.WARNING):
            result = analysis.summarize_sweep(0.95, rows)

        assert result.degenerate == ["sup_v_L4"]
        assert result.fits["sup_E_v"].slope == pytest.approx(0.1625)
        assert result.fits["total_L4"].slope == pytest.approx(0.0, abs=1e-12)
        assert "sup_v_L4" in caplog.text

    @staticmethod
    def test_predictions() -> None:
        """Test measured slopes are compared with the scaling laws."""
        rows = [_sweep_row(2.0**-k, 1.0) for k in range(4, 9)]

        result = analysis.summarize_sweep(0.95, rows)

        assert result.predicted_slope("sup_E_v") == pytest.approx(1.75 * 0.95 - 1.5)
        assert result.predicted_slope("total_L4") is None
        assert result.meets_prediction("sup_E_v", 0.01)
        assert result.meets_prediction("sup_psi_L4", 0.01)
        assert not result.meets_prediction("max_abs_dE", 0.01)

    @staticmethod
    def test_unpredicted_quantity_errors() -> None:
        """Test quantities without a law cannot be checked."""
        result = analysis.summarize_sweep(0.95, [_sweep_row(2.0**-k, 1.0) for k in range(4, 9)])

        with pytest.raises(KeyError, match="No scaling law"):
            result.meets_prediction("total_L4", 0.01)

    @staticmethod
    def test_all_zero_rows() -> None:
        """Test a sweep of zero data fits nothing."""
        rows = [
            types.SweepRow(
                s=0.95,
                s0=2.0**-k,
                sup_E_phi=0.0,
                sup_E_v=0.0,
                max_abs_dE=0.0,
                total_L4=0.0,
                interval_count=1,
                sup_psi_L4=0.0,
                sup_v_L4=0.0,
            )
            for k in range(4, 9)
        ]

        result = analysis.summarize_sweep(0.95, rows)

        assert result.fits == {}
        assert sorted(result.degenerate) == sorted(analysis.SWEEP_PREDICTIONS)


class TestBootstrapReport:
    """Test ``bootstrap_report``."""

    @staticmethod
    def test_bootstrap_size(power_law_state: grid_mod.WaveState) -> None:
        """Test ``M = c·s0^{−(3/16)s + 1/8}`` and the error estimate."""
        plan = evolve.StepPlan.from_horizon(0.01, 0.2, r_support=4.0, r_max=16.0)
        dec = truncation.run_truncation(power_law_state, 2.0**-6, 0.05, plan)
        ledger = truncation.ledger_report(dec, 0.95).ledger

        result = analysis.bootstrap_report(ledger, 0.95, 2.0**-6, c=2.0)

        m = 2.0 * (2.0**-6) ** (-3 / 16 * 0.95 + 1 / 8)
        assert result.m == pytest.approx(m)
        assert result.half_m == pytest.approx(0.5 * m)
        assert result.error_estimate == pytest.approx((2.0**-6) ** (1.5 * 0.95 - 11 / 8) * m**0.625)
        assert result.l4_total == ledger.total_l4
        assert result.holds is (ledger.total_l4 <= 0.5 * result.m)


class TestScatteringDiagnostic:
    """Test ``scattering_diagnostic``."""

    @staticmethod
    def test_free_pullbacks_coincide(bump_state: grid_mod.WaveState) -> None:
        """Test linear pullbacks of a free trajectory agree to roundoff."""
        plan = evolve.StepPlan(dt=0.1, t_end=2.0)

        result = analysis.scattering_diagnostic(
            evolve.trajectory(bump_state, plan, "linear"), [0.5, 1.0, 2.0], max_time=2.0
        )

        assert len(result.pullbacks) == 3
        assert [(row["t_a"], row["t_b"]) for row in result.rows] == [(0.5, 1.0), (1.0, 2.0)]
        assert all(row["difference"] < 1e-10 for row in result.rows)
        assert all(pb.t == pytest.approx(0.0, abs=1e-12) for pb in result.pullbacks)

    @staticmethod
    def test_pullback_recovers_data(bump_state: grid_mod.WaveState) -> None:
        """Test the pullback of a free state is the initial state."""
        state = spectral.wave_propagate(bump_state, 1.5)

        result = analysis.scattering_diagnostic([bump_state, state], [1.5])

        assert np.allclose(result.pullbacks[0].w.values, bump_state.w.values, atol=1e-11)
        assert result.rows == []

    @staticmethod
    def test_decay_factors() -> None:
        """Test ratios of consecutive differences."""
        rows = [
            types.ScatterRow(t_a=1.0, t_b=2.0, difference=0.4),
            types.ScatterRow(t_a=2.0, t_b=3.0, difference=0.2),
            types.ScatterRow(t_a=3.0, t_b=4.0, difference=0.0),
        ]

        result = analysis.ScatterReport(pullbacks=[], rows=rows).decay_factors()

        assert result == [2.0, math.inf]

    @staticmethod
    @pytest.mark.parametrize(
        ("probes", "max_time", "message"),
        [
            ([1.0, 1.0], None, "increase strictly"),
            ([1.0, 3.0], 2.0, "beyond the guarded horizon"),
            ([1.0, 5.0], None, "ended before"),
        ],
    )
    def test_bad_probes_error(
        bump_state: grid_mod.WaveState, probes: list[float], max_time: float | None, message: str
    ) -> None:
        """Test probes must increase, stay within the guard and be reached."""
        plan = evolve.StepPlan(dt=0.5, t_end=2.0)

        with pytest.raises(ValueError, match=message):
            analysis.scattering_diagnostic(
                evolve.trajectory(bump_state, plan, "linear"), probes, max_time=max_time
            )
