"""Tests for ``norms`` module."""

from __future__ import annotations

import math

import numpy as np
import pytest

from h3wave_core import grid as grid_mod, norms, spectral, synth


class TestLqNorm:
    """Test ``lq_norm``."""

    @staticmethod
    def test_l2_matches_sobolev_zero(power_law_state: grid_mod.WaveState) -> None:
        """Test the physical ``L²`` norm equals the spectral ``H⁰`` norm."""
        f = power_law_state.w

        assert norms.lq_norm(f, 2) == pytest.approx(norms.sobolev_norm(f, 0.0), rel=1e-12)

    @staticmethod
    def test_infinity_is_max_amplitude(bump_state: grid_mod.WaveState) -> None:
        """Test ``q = ∞`` gives ``max|u|``."""
        u = grid_mod.to_physical(bump_state.w)

        assert norms.lq_norm(bump_state.w, math.inf) == pytest.approx(float(np.max(np.abs(u))))

    @staticmethod
    def test_zero_field(small_grid: grid_mod.RadialGrid) -> None:
        """Test every norm of the zero field vanishes."""
        zero = grid_mod.RadialField.zeros(small_grid)

        assert norms.lq_norm(zero, 4) == 0.0
        assert norms.lq_norm(zero, math.inf) == 0.0

    @staticmethod
    @pytest.mark.parametrize("q", [0.5, math.nan])
    def test_bad_exponent_errors(q: float, small_grid: grid_mod.RadialGrid) -> None:
        """Test exponents below one are rejected."""
        with pytest.raises(ValueError, match="at least 1"):
            norms.lq_norm(grid_mod.RadialField.zeros(small_grid), q)


class TestSobolevNorm:
    """Test ``sobolev_norm`` and ``pair_norm``."""

    @staticmethod
    def test_increases_with_order(power_law_state: grid_mod.WaveState) -> None:
        """Test norms do not decrease with the regularity index."""
        values = [norms.sobolev_norm(power_law_state.w, sigma) for sigma in (-1.0, 0.0, 0.5, 1.0)]

        assert values == sorted(values)

    @staticmethod
    def test_unit_mode() -> None:
        """Test ``‖e_k‖_{H^σ}² = 4π(λ_k²+1)^σ``."""
        grid = grid_mod.make_grid(10.0, 64)
        symbol = (3 * math.pi / 10.0) ** 2 + 1.0

        result = norms.sobolev_norm(spectral.unit_mode(grid, 3), 1.0)

        assert result == pytest.approx(math.sqrt(4 * math.pi * symbol), rel=1e-12)

    @staticmethod
    def test_pair_norm_is_hypot(power_law_state: grid_mod.WaveState) -> None:
        """Test the data norm combines ``H^σ`` and ``H^{σ−1}``."""
        expected = math.hypot(
            norms.sobolev_norm(power_law_state.w, 0.5),
            norms.sobolev_norm(power_law_state.w_t, -0.5),
        )

        assert norms.pair_norm(power_law_state, 0.5) == pytest.approx(expected)


class TestEnergy:
    """Test ``energy`` and ``energy_cross_terms``."""

    @staticmethod
    def test_zero_state(small_grid: grid_mod.RadialGrid) -> None:
        """Test the zero state has zero energy."""
        result = norms.energy(grid_mod.WaveState.zeros(small_grid))

        assert result.total == 0.0

    @staticmethod
    def test_quadratic_parts_of_unit_modes() -> None:
        """Test kinetic and gradient parts of single modes."""
        grid = grid_mod.make_grid(10.0, 64)
        mode = spectral.unit_mode(grid, 2)
        symbol = (2 * math.pi / 10.0) ** 2 + 1.0

        result = norms.energy(grid_mod.WaveState(mode, mode))

        assert result.kinetic == pytest.approx(2 * math.pi, rel=1e-12)
        assert result.gradient == pytest.approx(2 * math.pi * symbol, rel=1e-12)

    @staticmethod
    def test_potential_part(bump_state: grid_mod.WaveState) -> None:
        """Test the quartic part is ``¼‖u‖₄⁴``."""
        result = norms.energy(bump_state)

        assert result.kinetic == 0.0
        assert result.potential == pytest.approx(0.25 * norms.lq_norm(bump_state.w, 4) ** 4)

    @staticmethod
    def test_cross_terms_sum_to_increment(
        bump_state: grid_mod.WaveState, power_law_state: grid_mod.WaveState
    ) -> None:
        """Test the expansion of ``E(φ+v) − E(φ)`` is exact."""
        v = grid_mod.WaveState(power_law_state.w.scaled(0.1), power_law_state.w_t.scaled(0.1))

        result = norms.energy_cross_terms(bump_state, v)

        increment = norms.energy(bump_state + v).total - norms.energy(bump_state).total
        assert result.total == pytest.approx(increment, rel=1e-9)
        assert result.quad_v > 0


class TestSpaceTimeAccumulator:
    """Test ``SpaceTimeAccumulator`` and ``st_accumulate``."""

    @staticmethod
    def test_finite_exponent() -> None:
        """Test the partial sum is ``Σ dt·‖u‖^p``."""
        acc = norms.SpaceTimeAccumulator(p=4, q=4)

        acc.feed(2.0, 0.5)
        acc.feed(1.0, 0.5)

        assert acc.partial == pytest.approx(8.5)
        assert acc.norm() == pytest.approx(8.5**0.25)

    @staticmethod
    def test_infinite_exponent_keeps_maximum() -> None:
        """Test ``p = ∞`` tracks the running maximum."""
        acc = norms.SpaceTimeAccumulator(p=math.inf, q=2)

        for value in (1.0, 3.0, 2.0):
            acc.feed(value, 0.1)

        assert acc.norm() == 3.0

    @staticmethod
    @pytest.mark.parametrize(("p", "q"), [(1.0, 4.0), (4.0, 1.5), (math.nan, 4.0)])
    def test_bad_exponents_error(p: float, q: float) -> None:
        """Test exponents outside ``[2, ∞]`` are rejected."""
        with pytest.raises(ValueError, match="must lie in"):
            norms.SpaceTimeAccumulator(p=p, q=q)

    @staticmethod
    @pytest.mark.parametrize("dt", [0.0, -0.1])
    def test_bad_step_errors(dt: float) -> None:
        """Test non-positive steps are rejected."""
        acc = norms.SpaceTimeAccumulator(p=4, q=4)

        with pytest.raises(ValueError, match="positive"):
            acc.feed(1.0, dt)

    @staticmethod
    def test_st_accumulate_uses_lq_norm(bump_state: grid_mod.WaveState) -> None:
        """Test one step feeds ``dt·‖u‖_q^p``."""
        acc = norms.SpaceTimeAccumulator(p=3, q=6)

        result = norms.st_accumulate(acc, bump_state, 0.25)

        assert result is acc
        assert acc.partial == pytest.approx(0.25 * norms.lq_norm(bump_state.w, 6) ** 3)


class TestStrichartz:
    """Test admissibility checks and ``strichartz_ratio``."""

    @staticmethod
    @pytest.mark.parametrize(
        ("p", "q", "gamma"),
        [(4, 4, 0.5), (math.inf, 2, 0.0), (3, 6, 2 / 3), (8 / 3, 8, 0.75), (4, 6, 0.75)],
    )
    def test_admissible_triples(p: float, q: float, gamma: float) -> None:
        """Test admissible triples pass and match ``γ = 3/2 − 1/p − 3/q``."""
        norms.check_admissible(p, q, gamma)  # act

        assert norms.admissible_gamma(p, q) == pytest.approx(gamma)

    @staticmethod
    @pytest.mark.parametrize(
        ("p", "q", "gamma", "violation"),
        [
            (1.5, 4, 0.5, "p, q >= 2"),
            (3, 3, 0.1666, r"1/p \+ 1/q <= 1/2"),
            (4, 4, 0.6, "gamma = 3/2"),
        ],
    )
    def test_inadmissible_triples(p: float, q: float, gamma: float, violation: str) -> None:
        """Test the first violated constraint is named."""
        with pytest.raises(ValueError, match=violation):
            norms.check_admissible(p, q, gamma)

    @staticmethod
    @pytest.mark.parametrize(
        ("p", "q", "gamma", "expected"),
        [
            (2, 4, 0.5, True),
            (2, 2, 0.0, False),
            (4, 3, 1 / 3, True),
            (4, 3, 0.5, False),
            (4, 8, 0.75, False),
        ],
    )
    def test_endpoint_set(p: float, q: float, gamma: float, expected: bool) -> None:
        """Test membership in the second family of triples."""
        assert norms.in_endpoint_set(p, q, gamma) is expected

    @staticmethod
    def test_ratio_is_scale_invariant(power_law_state: grid_mod.WaveState) -> None:
        """Test the ratio does not depend on the size of the data."""
        doubled = grid_mod.WaveState(power_law_state.w.scaled(2.0), power_law_state.w_t.scaled(2.0))

        first = norms.strichartz_ratio(power_law_state, 4, 4, 0.5, horizon=1.0, dt=0.1)
        second = norms.strichartz_ratio(doubled, 4, 4, 0.5, horizon=1.0, dt=0.1)

        assert first > 0
        assert second == pytest.approx(first, rel=1e-12)

    @staticmethod
    def test_zero_data_errors(small_grid: grid_mod.RadialGrid) -> None:
        """Test the ratio is undefined for zero data."""
        with pytest.raises(ValueError, match="zero data"):
            norms.strichartz_ratio(grid_mod.WaveState.zeros(small_grid), 4, 4, 0.5, horizon=1.0)

    @staticmethod
    def test_inadmissible_triple_errors(power_law_state: grid_mod.WaveState) -> None:
        """Test the triple is validated before any evolution."""
        with pytest.raises(ValueError, match="violates"):
            norms.strichartz_ratio(power_law_state, 4, 4, 0.9, horizon=1.0)

    @staticmethod
    def test_ratio_is_stable_under_refinement() -> None:
        """Test the worst ``(4, 4, 1/2)`` ratio of a small corpus is stable when ``n`` doubles."""
        worst = []
        for n in (512, 1024):
            grid = grid_mod.make_grid(40.0, n)
            corpus = [synth.synthesize(synth.DataSpec(s=0.95, seed=k), grid) for k in range(4)]
            corpus.append(synth.synthesize(synth.DataSpec(kind="bump", radius=4.0), grid))
            worst.append(max(norms.strichartz_ratio(d, 4, 4, 0.5, horizon=16.0) for d in corpus))

        assert worst[0] > 0
        assert worst[1] == pytest.approx(worst[0], rel=0.2)
