"""Tests for ``types`` module."""

from __future__ import annotations

import pytest

from h3wave_core import types


class TestNumericalAbortError:
    """Test ``NumericalAbortError``."""

    @staticmethod
    def test_message_carries_time() -> None:
        """Test the message names the failing time and the time is kept."""
        result = types.NumericalAbortError("Non-finite field values", 1.25)

        assert str(result) == "Non-finite field values (t=1.25)"
        assert result.time == 1.25

    @staticmethod
    def test_is_arithmetic_error() -> None:
        """Test the error is caught as ``ArithmeticError``."""
        with pytest.raises(ArithmeticError):
            raise types.NumericalAbortError("overflow", 0.0)
