"""Tests for ``spectral`` module."""

from __future__ import annotations

import math

import numpy as np
import pytest

from h3wave_core import grid as grid_mod, spectral


class TestSineTransform:
    """Test the forward and inverse sine transforms."""

    @staticmethod
    def test_round_trip(power_law_state: grid_mod.WaveState) -> None:
        """Test ``inverse ∘ forward`` is the identity to roundoff."""
        f = power_law_state.w

        result = spectral.inverse(spectral.forward(f))

        assert np.allclose(result.values, f.values, rtol=0, atol=1e-12 * np.max(np.abs(f.values)))

    @staticmethod
    def test_plancherel(power_law_state: grid_mod.WaveState) -> None:
        """Test ``Σŵ² = dr·Σw²``."""
        f = power_law_state.w

        coeffs = spectral.forward(f).coeffs

        assert float(np.sum(coeffs**2)) == pytest.approx(f.grid.trapezoid(f.values**2), rel=1e-12)

    @staticmethod
    @pytest.mark.parametrize("k", [1, 7, 63])
    def test_unit_mode_has_unit_coefficient(k: int) -> None:
        """Test the ``k``-th eigenfunction transforms to the ``k``-th unit vector."""
        grid = grid_mod.make_grid(10.0, 64)
        expected = np.zeros(grid.size)
        expected[k - 1] = 1.0

        result = spectral.forward(spectral.unit_mode(grid, k)).coeffs

        assert np.allclose(result, expected, rtol=0, atol=1e-12)

    @staticmethod
    @pytest.mark.parametrize("k", [0, 64])
    def test_unit_mode_out_of_range_errors(k: int) -> None:
        """Test modes outside ``[1, n−1]`` are rejected."""
        grid = grid_mod.make_grid(10.0, 64)

        with pytest.raises(ValueError, match="Mode index"):
            spectral.unit_mode(grid, k)

    @staticmethod
    def test_frequencies() -> None:
        """Test ``λ_k = kπ/r_max`` and the symbol is at least the spectral gap."""
        grid = grid_mod.make_grid(10.0, 64)

        lam = spectral.frequencies(grid)

        assert lam[0] == pytest.approx(math.pi / 10.0)
        assert lam[-1] == pytest.approx(63 * math.pi / 10.0)
        assert np.all(spectral.laplacian_symbol(lam) >= 1.0)

    @staticmethod
    def test_spectral_field_length_mismatch_errors() -> None:
        """Test coefficient vectors of the wrong length are rejected."""
        grid = grid_mod.make_grid(10.0, 64)

        with pytest.raises(ValueError, match="Expected 63 coefficients"):
            spectral.SpectralField(np.zeros(64), grid)


class TestMultipliers:
    """Test multipliers and the operators built on them."""

    @staticmethod
    def test_from_symbol_applies_scalar_rule() -> None:
        """Test a scalar symbol is evaluated at every frequency."""
        grid = grid_mod.make_grid(10.0, 64)
        multiplier = spectral.SpectralMultiplier.from_symbol(lambda lam: 2.0 * lam, name="double")
        spectrum = spectral.forward(spectral.unit_mode(grid, 5))

        result = spectral.apply_multiplier(spectrum, multiplier).coeffs

        assert result[4] == pytest.approx(2.0 * 5 * math.pi / 10.0)

    @staticmethod
    def test_non_finite_multiplier_errors() -> None:
        """Test a multiplier that is not finite on the grid is rejected."""
        grid = grid_mod.make_grid(10.0, 64)
        multiplier = spectral.SpectralMultiplier.from_symbol(lambda _: math.inf, name="bad")

        with pytest.raises(ValueError, match="'bad' is not finite"):
            spectral.apply_multiplier(spectral.forward(spectral.unit_mode(grid, 1)), multiplier)

    @staticmethod
    def test_heat_flow_damps_eigenfunction() -> None:
        """Test ``e^{sΔ}`` multiplies the ``k``-th mode by ``e^{−s(λ_k²+1)}``."""
        grid = grid_mod.make_grid(10.0, 64)
        mode = spectral.unit_mode(grid, 4)
        factor = math.exp(-0.3 * ((4 * math.pi / 10.0) ** 2 + 1.0))

        result = spectral.heat_flow(mode, 0.3)

        assert np.allclose(result.values, factor * mode.values, rtol=0, atol=1e-13)

    @staticmethod
    def test_heat_flow_endpoints(power_law_state: grid_mod.WaveState) -> None:
        """Test ``s = 0`` keeps the field and ``s = ∞`` removes it."""
        f = power_law_state.w

        assert np.allclose(spectral.heat_flow(f, 0.0).values, f.values, rtol=0, atol=1e-12)
        assert not np.any(spectral.heat_flow(f, math.inf).values)

    @staticmethod
    def test_heat_semigroup(power_law_state: grid_mod.WaveState) -> None:
        """Test ``e^{aΔ}e^{bΔ} = e^{(a+b)Δ}``."""
        f = power_law_state.w

        composed = spectral.heat_flow(spectral.heat_flow(f, 0.01), 0.02)
        direct = spectral.heat_flow(f, 0.03)

        assert np.allclose(composed.values, direct.values, rtol=0, atol=1e-12)

    @staticmethod
    @pytest.mark.parametrize("s", [-1.0, math.nan])
    def test_bad_heat_scale_errors(s: float) -> None:
        """Test negative or NaN heat-flow times are rejected."""
        with pytest.raises(ValueError, match="non-negative"):
            spectral.heat_multiplier(s)

    @staticmethod
    def test_fractional_laplacian_inverts(power_law_state: grid_mod.WaveState) -> None:
        """Test ``(−Δ)^{−σ/2}(−Δ)^{σ/2}`` is the identity."""
        f = power_law_state.w

        result = spectral.fractional_laplacian(spectral.fractional_laplacian(f, 0.7), -0.7)

        assert np.allclose(result.values, f.values, rtol=0, atol=1e-10)

    @staticmethod
    def test_laplacian_of_eigenfunction() -> None:
        """Test ``Δ`` multiplies the ``k``-th mode by ``−(λ_k²+1)``."""
        grid = grid_mod.make_grid(10.0, 64)
        mode = spectral.unit_mode(grid, 3)
        eigenvalue = -((3 * math.pi / 10.0) ** 2 + 1.0)

        result = spectral.laplacian(mode)

        assert np.allclose(result.values, eigenvalue * mode.values, rtol=0, atol=1e-12)

    @staticmethod
    def test_radial_derivative_of_eigenfunction() -> None:
        """Test the derivative is the cosine series evaluated at all nodes, endpoints included."""
        grid = grid_mod.make_grid(10.0, 64)
        lam = 5 * math.pi / 10.0
        nodes = grid.nodes_with_endpoints
        expected = math.sqrt(2.0 / 10.0) * lam * np.cos(lam * nodes)

        result = spectral.radial_derivative(spectral.unit_mode(grid, 5))

        assert result.shape == (65,)
        assert np.allclose(result, expected, rtol=0, atol=1e-12)


class TestWavePropagate:
    """Test ``wave_propagate``."""

    @staticmethod
    def test_group_law(power_law_state: grid_mod.WaveState) -> None:
        """Test ``S(a)S(b) = S(a+b)``."""
        composed = spectral.wave_propagate(spectral.wave_propagate(power_law_state, 0.4), 0.7)
        direct = spectral.wave_propagate(power_law_state, 1.1)

        assert composed.t == pytest.approx(1.1)
        assert np.allclose(composed.w.values, direct.w.values, rtol=0, atol=1e-11)
        assert np.allclose(composed.w_t.values, direct.w_t.values, rtol=0, atol=1e-10)

    @staticmethod
    def test_time_reversal(power_law_state: grid_mod.WaveState) -> None:
        """Test ``S(−t)S(t)`` returns the initial state."""
        result = spectral.wave_propagate(spectral.wave_propagate(power_law_state, 2.5), -2.5)

        assert result.t == 0.0
        assert np.allclose(result.w.values, power_law_state.w.values, rtol=0, atol=1e-11)

    @staticmethod
    def test_conserves_linear_energy(power_law_state: grid_mod.WaveState) -> None:
        """Test the quadratic energy is conserved by the free flow."""
        before = spectral.linear_energy(power_law_state)

        after = spectral.linear_energy(spectral.wave_propagate(power_law_state, 3.0))

        assert after == pytest.approx(before, rel=1e-12)

    @staticmethod
    def test_single_mode_oscillates() -> None:
        """Test a mode at rest follows ``cos(ω t)``."""
        grid = grid_mod.make_grid(10.0, 64)
        mode = spectral.unit_mode(grid, 2)
        state = grid_mod.WaveState(mode, grid_mod.RadialField.zeros(grid))
        omega = math.sqrt((2 * math.pi / 10.0) ** 2 + 1.0)

        result = spectral.wave_propagate(state, 0.9)

        assert np.allclose(result.w.values, math.cos(omega * 0.9) * mode.values, atol=1e-12)

    @staticmethod
    def test_non_finite_time_errors(power_law_state: grid_mod.WaveState) -> None:
        """Test a non-finite propagation time is rejected."""
        with pytest.raises(ValueError, match="finite"):
            spectral.wave_propagate(power_law_state, math.inf)
