"""Truncated radial domain and the weighted field representation.

Radial functions on hyperbolic 3-space are stored as ``w(r) = sinh(r)·u(r)`` sampled at the
interior nodes ``r_i = i·dr`` of ``[0, r_max]``. Both endpoints carry an implicit zero (Dirichlet
wall at ``r_max``, regularity at the origin), so every spatial integral is a composite trapezoid
rule that reduces to ``dr`` times a plain sum.
"""

from __future__ import annotations

import dataclasses
import logging
import math

import numpy as np

from . import types

logger = logging.getLogger(__name__)


MIN_POINTS = 8
"""Smallest interior point count accepted by :py:func:`make_grid`."""

FOUR_PI = 4.0 * math.pi
"""Solid angle of the unit sphere; every volume integral carries it."""


def _frozen(array: types.FloatArray) -> types.FloatArray:
    array.flags.writeable = False
    return array


@dataclasses.dataclass(frozen=True, eq=False)
class RadialGrid:
    """Uniform grid on ``[0, r_max]`` with precomputed hyperbolic tables.

    Grids compare by identity; fields built on two separately constructed grids with the same
    parameters are still compatible, see :py:meth:`RadialGrid.matches`.
    """

    r_max: float
    n: int
    dr: float = dataclasses.field(init=False)
    r: types.FloatArray = dataclasses.field(init=False, repr=False)
    sinh: types.FloatArray = dataclasses.field(init=False, repr=False)
    cosh: types.FloatArray = dataclasses.field(init=False, repr=False)
    sinh2: types.FloatArray = dataclasses.field(init=False, repr=False)

    def __post_init__(self) -> None:
        """Fill the node and hyperbolic tables.

        :raises ValueError: If the parameters do not describe a usable grid
        """
        if not (math.isfinite(self.r_max) and self.r_max > 0):
            msg = f"r_max must be positive and finite, got {self.r_max!r}"
            raise ValueError(msg)
        if self.n < 2:  # noqa: PLR2004
            msg = f"Grid needs at least one interior node, got n={self.n!r}"
            raise ValueError(msg)

        dr = self.r_max / self.n
        r = np.arange(1, self.n, dtype=np.float64) * dr
        with np.errstate(over="ignore"):
            sinh = np.sinh(r)
            cosh = np.cosh(r)
        sinh2 = sinh * sinh
        if not (np.all(np.isfinite(sinh2)) and np.all(np.isfinite(cosh))):
            msg = f"r_max={self.r_max!r} overflows the sinh table"
            raise ValueError(msg)

        object.__setattr__(self, "dr", dr)
        object.__setattr__(self, "r", _frozen(r))
        object.__setattr__(self, "sinh", _frozen(sinh))
        object.__setattr__(self, "cosh", _frozen(cosh))
        object.__setattr__(self, "sinh2", _frozen(sinh2))

    @property
    def size(self) -> int:
        """Number of interior nodes (``n − 1``)."""
        return self.n - 1

    @property
    def coth(self) -> types.FloatArray:
        """``coth(r_i)`` at the interior nodes."""
        return self.cosh / self.sinh

    @property
    def nodes_with_endpoints(self) -> types.FloatArray:
        """Nodes including ``r = 0`` and ``r = r_max``."""
        return np.arange(0, self.n + 1, dtype=np.float64) * self.dr

    def matches(self, other: RadialGrid) -> bool:
        """Check whether two grids describe the same nodes.

        :param other: Grid to compare with
        :return: :py:obj:`True` if ``r_max`` and ``n`` agree
        """
        return self is other or (self.n == other.n and self.r_max == other.r_max)

    def trapezoid(self, integrand: types.FloatArray) -> float:
        """Integrate samples over ``[0, r_max]`` with zero endpoint values.

        :param integrand: Samples at the interior nodes
        :return: ``dr·Σ integrand``
        """
        return float(self.dr * np.sum(integrand))

    def volume_integral(self, integrand: types.FloatArray) -> float:
        """Integrate a radial density already multiplied by ``sinh²(r)``, including ``4π``.

        :param integrand: Samples of ``f(r)·sinh²(r)`` at the interior nodes
        :return: ``4π·dr·Σ integrand``
        """
        return FOUR_PI * self.trapezoid(integrand)


def make_grid(r_max: float, n: int) -> RadialGrid:
    """Create a grid with ``n − 1`` interior nodes on ``[0, r_max]``.

    :param r_max: Geodesic radius of the truncated domain
    :param n: Number of intervals; at least :py:data:`MIN_POINTS`
    :raises ValueError: On non-positive ``r_max`` or undersized ``n``
    :return: The grid
    """
    if n < MIN_POINTS:
        msg = f"n must be at least {MIN_POINTS}, got {n!r}"
        raise ValueError(msg)
    grid = RadialGrid(r_max=r_max, n=n)
    logger.debug("Created radial grid r_max=%s n=%s dr=%s.", r_max, n, grid.dr)
    return grid


@dataclasses.dataclass(frozen=True, eq=False)
class RadialField:
    """Weighted radial profile ``w = sinh(r)·u`` at the interior nodes of a grid."""

    values: types.FloatArray
    grid: RadialGrid

    def __post_init__(self) -> None:
        """Validate and freeze the samples.

        :raises ValueError: On length mismatch or non-finite samples
        """
        values = np.array(self.values, dtype=np.float64)
        if values.shape != (self.grid.size,):
            msg = f"Expected {self.grid.size} samples, got shape {values.shape}"
            raise ValueError(msg)
        if not np.all(np.isfinite(values)):
            msg = "Field samples must be finite"
            raise ValueError(msg)
        object.__setattr__(self, "values", _frozen(values))

    @classmethod
    def zeros(cls, grid: RadialGrid) -> RadialField:
        """Zero field on ``grid``."""
        return cls(np.zeros(grid.size), grid)

    def _check_grid(self, other: RadialField) -> None:
        if not self.grid.matches(other.grid):
            msg = "Fields live on different grids"
            raise ValueError(msg)

    def __add__(self, other: RadialField) -> RadialField:
        """Add samples of two fields on the same grid."""
        self._check_grid(other)
        return RadialField(self.values + other.values, self.grid)

    def __sub__(self, other: RadialField) -> RadialField:
        """Subtract samples of two fields on the same grid."""
        self._check_grid(other)
        return RadialField(self.values - other.values, self.grid)

    def scaled(self, factor: float) -> RadialField:
        """Multiply all samples by ``factor``."""
        return RadialField(factor * self.values, self.grid)


@dataclasses.dataclass(frozen=True, eq=False)
class WaveState:
    """Field and velocity ``(w, w_t)`` at time ``t``; represents ``(u, u_t)``."""

    w: RadialField
    w_t: RadialField
    t: float = 0.0

    def __post_init__(self) -> None:
        """Check that both components share a grid and the time stamp is finite.

        :raises ValueError: If the components are incompatible
        """
        if not self.w.grid.matches(self.w_t.grid):
            msg = "Field and velocity live on different grids"
            raise ValueError(msg)
        if not math.isfinite(self.t):
            msg = f"State time must be finite, got {self.t!r}"
            raise ValueError(msg)

    @property
    def grid(self) -> RadialGrid:
        """Grid shared by both components."""
        return self.w.grid

    @classmethod
    def zeros(cls, grid: RadialGrid, t: float = 0.0) -> WaveState:
        """Zero state on ``grid`` at time ``t``."""
        return cls(RadialField.zeros(grid), RadialField.zeros(grid), t)

    def __add__(self, other: WaveState) -> WaveState:
        """Add components; the time stamp of ``self`` is kept."""
        return WaveState(self.w + other.w, self.w_t + other.w_t, self.t)

    def __sub__(self, other: WaveState) -> WaveState:
        """Subtract components; the time stamp of ``self`` is kept."""
        return WaveState(self.w - other.w, self.w_t - other.w_t, self.t)


def to_physical(f: RadialField) -> types.FloatArray:
    """Recover ``u = w / sinh(r)`` at the interior nodes.

    :param f: Weighted field
    :return: Physical amplitudes ``u_i``
    """
    return f.values / f.grid.sinh


def from_physical(u: types.FloatArray, grid: RadialGrid) -> RadialField:
    """Build the weighted field ``w = sinh(r)·u``.

    :param u: Physical amplitudes at the interior nodes
    :param grid: Grid the samples belong to
    :raises ValueError: On length mismatch
    :return: Weighted field
    """
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (grid.size,):
        msg = f"Expected {grid.size} samples, got shape {u.shape}"
        raise ValueError(msg)
    return RadialField(u * grid.sinh, grid)
