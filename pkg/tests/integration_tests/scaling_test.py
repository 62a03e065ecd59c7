"""Reduced-scale scaling-law tests over full experiment runs."""

from __future__ import annotations

import pytest

from h3wave_core import selftest


class TestScalingLaws:
    """Test the slower checks of the self-check battery."""

    @staticmethod
    @pytest.mark.parametrize(
        "check",
        [
            selftest.check_sweep,
            selftest.check_scatter_decay,
            selftest.check_strichartz,
            selftest.check_split,
        ],
    )
    def test_check_passes(check: selftest.Check) -> None:
        """Test the check passes at ``n = 1024``."""
        result = check()

        assert result.passed, result.detail
