"""Fixtures for integration tests."""

from __future__ import annotations

from tests.conftest import EXAMPLES_DIR

GOOD_RUNS = sorted(EXAMPLES_DIR.glob("good_runs/*.*"))
BAD_RUNS = sorted(EXAMPLES_DIR.glob("bad_runs/*.*"))
RUN_COMMANDS = ("evolve", "truncate", "morawetz", "scatter")
