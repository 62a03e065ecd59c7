"""Fixtures for tests."""

from __future__ import annotations

import pathlib

import pytest

from h3wave_core import grid as grid_mod, synth

REPO_DIR = pathlib.Path(__file__).resolve().parents[1].resolve()
TESTING_DIR = REPO_DIR / "testing"
EXAMPLES_DIR = TESTING_DIR / "examples"


@pytest.fixture(name="small_grid")
def _small_grid_fixture() -> grid_mod.RadialGrid:
    """Grid small enough for fast evolutions but wide enough for the domain guard."""
    return grid_mod.make_grid(16.0, 128)


@pytest.fixture(name="bump_state")
def _bump_state_fixture(small_grid: grid_mod.RadialGrid) -> grid_mod.WaveState:
    """Smooth bump of radius 4 at rest."""
    return synth.synthesize(synth.DataSpec(kind="bump", radius=4.0), small_grid)


@pytest.fixture(name="power_law_state")
def _power_law_state_fixture(small_grid: grid_mod.RadialGrid) -> grid_mod.WaveState:
    """Localized rough data with ``s = 0.95`` and unit data norm."""
    return synth.synthesize(synth.DataSpec(s=0.95, seed=3, radius=4.0), small_grid)
