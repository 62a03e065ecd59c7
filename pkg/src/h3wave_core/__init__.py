"""Spectral simulator for the radial cubic wave equation on hyperbolic 3-space."""

from __future__ import annotations

import logging

logging.getLogger("h3wave_core").addHandler(logging.NullHandler())
