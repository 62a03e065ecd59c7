"""Deterministic synthetic initial data of prescribed regularity."""

from __future__ import annotations

import logging
import typing as t

import numpy as np
import numpy.typing as npt
import pydantic

from . import grid as grid_mod, norms, spectral, types

logger = logging.getLogger(__name__)


FIELD_STREAM = 0
VELOCITY_STREAM = 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)

UInt64Array = npt.NDArray[np.uint64]


class DataSpec(pydantic.BaseModel):
    """Parameters of a synthetic initial state.

    ``power_law`` data have coefficients ``±(λ_k²+1)^{−(s/2+1/4)}`` for the field and
    ``±(λ_k²+1)^{−((s−1)/2+1/4)}`` for the velocity from mode ``k_min`` on. They lie in
    ``H^σ × H^{σ−1}`` exactly for ``σ < s`` and are rescaled to ``‖·‖_{H^s×H^{s−1}} = amplitude``
    on the grid. With ``radius`` set they are first multiplied by a smooth cutoff supported in
    ``r ≤ radius``. ``bump`` data are ``u = amplitude·exp(1 − 1/(1 − (r/radius)²))``, ``u_t = 0``;
    ``single_mode`` data put ``amplitude`` on mode ``k_min``.
    """

    model_config = pydantic.ConfigDict(frozen=True, extra="forbid")

    kind: types.DataKind = "power_law"
    s: float = 0.95
    seed: int = 0
    k_min: int = 1
    amplitude: float = 1.0
    radius: float | None = 4.0

    @pydantic.field_validator("s")
    @classmethod
    def valid_regularity(cls, value: float) -> float:
        """Require ``0 < s ≤ 1``.

        :raises ValueError: If ``s`` is out of range
        """
        if not 0 < value <= 1:
            msg = f"s must lie in (0, 1], got {value!r}"
            raise ValueError(msg)
        return value

    @pydantic.field_validator("seed")
    @classmethod
    def valid_seed(cls, value: int) -> int:
        """Require a seed representable as an unsigned 64-bit integer.

        :raises ValueError: If the seed is negative or too large
        """
        if not 0 <= value < 2**64:
            msg = f"seed must lie in [0, 2**64), got {value!r}"
            raise ValueError(msg)
        return value

    @pydantic.field_validator("k_min")
    @classmethod
    def valid_k_min(cls, value: int) -> int:
        """Require ``k_min ≥ 1``.

        :raises ValueError: If ``k_min`` is smaller
        """
        if value < 1:
            msg = f"k_min must be at least 1, got {value!r}"
            raise ValueError(msg)
        return value

    @pydantic.field_validator("amplitude", "radius")
    @classmethod
    def positive(cls, value: float | None, info: pydantic.ValidationInfo) -> float | None:
        """Require positive finite values.

        :raises ValueError: If the value is not positive and finite
        """
        if value is not None and not (np.isfinite(value) and value > 0):
            msg = f"{info.field_name} must be positive and finite, got {value!r}"
            raise ValueError(msg)
        return value

    @pydantic.model_validator(mode="after")
    def bump_has_radius(self) -> DataSpec:
        """Require a radius for bump data.

        :raises ValueError: If ``kind`` is ``bump`` and ``radius`` is unset
        """
        if self.kind == "bump" and self.radius is None:
            msg = "bump data need a radius"
            raise ValueError(msg)
        return self


def _splitmix64(x: UInt64Array) -> UInt64Array:
    with np.errstate(over="ignore"):
        z = x + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def hash_signs(seed: int, stream: int, modes: npt.ArrayLike) -> types.FloatArray:
    """Deterministic ``±1`` per mode index; a mode's sign depends only on ``(seed, stream, k)``.

    :param seed: Seed of the data
    :param stream: Independent sequence number
    :param modes: Mode indices
    :return: Signs as floats
    """
    stream_key = _splitmix64(np.array([stream], dtype=np.uint64))
    base = _splitmix64(np.array([seed], dtype=np.uint64) ^ stream_key)
    with np.errstate(over="ignore"):
        mixed = _splitmix64(base + np.asarray(modes, dtype=np.uint64))
    return np.where((mixed >> np.uint64(63)) == 1, -1.0, 1.0)


def power_law_coefficients(
    spec: DataSpec, grid: grid_mod.RadialGrid
) -> tuple[types.FloatArray, types.FloatArray]:
    """Return the unnormalized sine coefficients of power-law data.

    :param spec: Data parameters; ``kind`` is ignored
    :param grid: Grid
    :return: Field and velocity coefficients
    """
    modes = np.arange(1, grid.n)
    symbol = spectral.laplacian_symbol(spectral.frequencies(grid))
    active = modes >= spec.k_min
    w_hat = hash_signs(spec.seed, FIELD_STREAM, modes) * symbol ** -(0.5 * spec.s + 0.25)
    wt_decay = 0.5 * (spec.s - 1.0) + 0.25
    wt_hat = hash_signs(spec.seed, VELOCITY_STREAM, modes) * symbol**-wt_decay
    return np.where(active, w_hat, 0.0), np.where(active, wt_hat, 0.0)


def smooth_cutoff(r: types.FloatArray, radius: float) -> types.FloatArray:
    """C^∞ cutoff equal to 1 for ``r ≤ radius/2`` and 0 for ``r ≥ radius``."""
    x = np.clip(2.0 * np.asarray(r) / radius - 1.0, 0.0, 1.0)
    with np.errstate(divide="ignore"):
        rise = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
        fall = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
    return rise / (rise + fall)


def _bump(spec: DataSpec, grid: grid_mod.RadialGrid) -> grid_mod.WaveState:
    radius = t.cast(float, spec.radius)
    x = grid.r / radius
    inside = x < 1
    profile = np.zeros_like(x)
    profile[inside] = np.exp(1.0 - 1.0 / (1.0 - x[inside] ** 2))
    w = grid_mod.from_physical(spec.amplitude * profile, grid)
    return grid_mod.WaveState(w, grid_mod.RadialField.zeros(grid))


def _power_law(spec: DataSpec, grid: grid_mod.RadialGrid) -> grid_mod.WaveState:
    w_hat, wt_hat = power_law_coefficients(spec, grid)
    w = spectral.inverse_sine_transform(w_hat, grid.dr)
    w_t = spectral.inverse_sine_transform(wt_hat, grid.dr)
    if spec.radius is not None:
        cutoff = smooth_cutoff(grid.r, spec.radius)
        w, w_t = w * cutoff, w_t * cutoff
    state = grid_mod.WaveState(grid_mod.RadialField(w, grid), grid_mod.RadialField(w_t, grid))
    scale = norms.pair_norm(state, spec.s)
    if scale == 0:
        msg = f"No power-law modes are represented (k_min={spec.k_min}, n={grid.n})"
        raise ValueError(msg)
    factor = spec.amplitude / scale
    return grid_mod.WaveState(state.w.scaled(factor), state.w_t.scaled(factor))


def synthesize(spec: DataSpec, grid: grid_mod.RadialGrid) -> grid_mod.WaveState:
    """Build the initial state described by ``spec`` at ``t = 0``.

    :param spec: Data parameters
    :param grid: Grid
    :raises ValueError: If the requested modes are not represented on the grid
    :return: The state; identical for identical arguments
    """
    if spec.k_min >= grid.n:
        msg = f"k_min={spec.k_min} is not represented on a grid with n={grid.n}"
        raise ValueError(msg)
    if spec.kind == "bump":
        state = _bump(spec, grid)
    elif spec.kind == "single_mode":
        w = spectral.unit_mode(grid, spec.k_min).scaled(spec.amplitude)
        state = grid_mod.WaveState(w, grid_mod.RadialField.zeros(grid))
    else:
        state = _power_law(spec, grid)
    logger.debug("Synthesized %s data (s=%s, seed=%s).", spec.kind, spec.s, spec.seed)
    return state


def r_support(spec: DataSpec, r_max: float) -> float:
    """Radius outside of which the synthesized data vanish.

    :param spec: Data parameters
    :param r_max: Outer radius of the grid
    :return: ``radius`` for localized data, ``r_max`` otherwise
    """
    if spec.kind == "single_mode" or spec.radius is None:
        return r_max
    return spec.radius
