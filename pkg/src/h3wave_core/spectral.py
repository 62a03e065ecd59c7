"""Sine-transform calculus of the radial Laplacian.

Under ``w = sinh(r)·u`` the radial operator ``−Δ`` of hyperbolic 3-space becomes ``−∂_r² + 1`` with
Dirichlet walls at ``0`` and ``r_max``. Its eigenfunctions are

    φ_k(r) = sqrt(2/r_max)·sin(λ_k r),   λ_k = kπ/r_max,   k = 1 .. n−1,

with eigenvalues ``λ_k² + 1``. The orthonormal type-I discrete sine transform of the interior
samples, scaled by ``sqrt(dr)``, computes the coefficients ``ŵ_k = ∫ w φ_k dr`` exactly for the
trapezoid rule, so Parseval reads ``Σ ŵ_k² = dr·Σ w_i²``.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import typing as t

import numpy as np
import scipy.fft

from . import grid as grid_mod, types

logger = logging.getLogger(__name__)


def frequencies(grid: grid_mod.RadialGrid) -> types.FloatArray:
    """Return the represented frequencies ``λ_k = kπ/r_max`` for ``k = 1 .. n−1``.

    :param grid: Grid the transform acts on
    :return: Strictly increasing positive frequencies
    """
    return np.arange(1, grid.n, dtype=np.float64) * (math.pi / grid.r_max)


def laplacian_symbol(lam: types.FloatArray) -> types.FloatArray:
    """Symbol ``λ² + 1`` of ``−Δ``; bounded below by the spectral gap 1."""
    return lam * lam + 1.0


def sine_transform(values: types.FloatArray, dr: float) -> types.FloatArray:
    """Coefficients of interior samples in the orthonormal sine basis.

    :param values: Samples ``w_i``
    :param dr: Grid spacing
    :return: Coefficients ``ŵ_k``
    """
    return math.sqrt(dr) * scipy.fft.dst(values, type=1, norm="ortho")


def inverse_sine_transform(coeffs: types.FloatArray, dr: float) -> types.FloatArray:
    """Interior samples of a sine series; inverse of :py:func:`sine_transform`.

    :param coeffs: Coefficients ``ŵ_k``
    :param dr: Grid spacing
    :return: Samples ``w_i``
    """
    return scipy.fft.dst(coeffs, type=1, norm="ortho") / math.sqrt(dr)


@dataclasses.dataclass(frozen=True, eq=False)
class SpectralField:
    """Sine coefficients ``ŵ_k`` of a :py:class:`~h3wave_core.grid.RadialField`."""

    coeffs: types.FloatArray
    grid: grid_mod.RadialGrid

    def __post_init__(self) -> None:
        """Validate and freeze the coefficients.

        :raises ValueError: On length mismatch or non-finite coefficients
        """
        coeffs = np.array(self.coeffs, dtype=np.float64)
        if coeffs.shape != (self.grid.size,):
            msg = f"Expected {self.grid.size} coefficients, got shape {coeffs.shape}"
            raise ValueError(msg)
        if not np.all(np.isfinite(coeffs)):
            msg = "Spectral coefficients must be finite"
            raise ValueError(msg)
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def frequencies(self) -> types.FloatArray:
        """Frequencies ``λ_k`` the coefficients belong to."""
        return frequencies(self.grid)


@dataclasses.dataclass(frozen=True)
class SpectralMultiplier:
    """Rule ``λ ↦ m(λ)`` applied diagonally to sine coefficients.

    ``rule`` must accept the whole frequency array; scalar callables are wrapped by
    :py:meth:`from_symbol`.
    """

    rule: t.Callable[[types.FloatArray], types.FloatArray]
    name: str = "multiplier"

    @classmethod
    def from_symbol(
        cls, symbol: t.Callable[[float], float], name: str = "symbol"
    ) -> SpectralMultiplier:
        """Build a multiplier from a scalar function of ``λ``.

        :param symbol: Function evaluated at each frequency separately
        :param name: Label used in messages
        :return: The multiplier
        """
        vectorized = np.vectorize(symbol, otypes=[np.float64])
        return cls(rule=vectorized, name=name)

    def evaluate(self, lam: types.FloatArray) -> types.FloatArray:
        """Evaluate the rule at the given frequencies.

        :param lam: Frequencies
        :raises ValueError: If any value is not finite
        :return: Multiplier values
        """
        with np.errstate(under="ignore", over="ignore"):
            values = np.broadcast_to(np.asarray(self.rule(lam), dtype=np.float64), lam.shape)
        if not np.all(np.isfinite(values)):
            msg = f"Multiplier {self.name!r} is not finite at all grid frequencies"
            raise ValueError(msg)
        return values


def forward(f: grid_mod.RadialField) -> SpectralField:
    """Transform a weighted field into sine coefficients.

    :param f: Field to transform
    :return: Its coefficients
    """
    return SpectralField(sine_transform(f.values, f.grid.dr), f.grid)


def inverse(spectrum: SpectralField) -> grid_mod.RadialField:
    """Synthesize the field of a coefficient vector; two-sided inverse of :py:func:`forward`.

    :param spectrum: Coefficients to synthesize
    :return: The field
    """
    values = inverse_sine_transform(spectrum.coeffs, spectrum.grid.dr)
    return grid_mod.RadialField(values, spectrum.grid)


def apply_multiplier(spectrum: SpectralField, multiplier: SpectralMultiplier) -> SpectralField:
    """Scale each coefficient by the multiplier at its frequency.

    :param spectrum: Coefficients
    :param multiplier: Diagonal rule
    :raises ValueError: If the multiplier is not finite at some grid frequency
    :return: Scaled coefficients
    """
    values = multiplier.evaluate(spectrum.frequencies)
    return SpectralField(values * spectrum.coeffs, spectrum.grid)


def _apply_to_field(
    f: grid_mod.RadialField, multiplier: SpectralMultiplier
) -> grid_mod.RadialField:
    return inverse(apply_multiplier(forward(f), multiplier))


def _check_scale(s: float) -> None:
    if math.isnan(s) or s < 0:
        msg = f"Heat-flow scale must be non-negative, got {s!r}"
        raise ValueError(msg)


def heat_multiplier(s: float) -> SpectralMultiplier:
    """Multiplier ``e^{−s(λ²+1)}`` of the heat semigroup ``e^{sΔ}``.

    :param s: Heat-flow time, ``0 ≤ s ≤ ∞``
    :raises ValueError: On negative ``s``
    :return: The multiplier
    """
    _check_scale(s)
    if math.isinf(s):
        return SpectralMultiplier(rule=np.zeros_like, name="heat(inf)")
    return SpectralMultiplier(
        rule=lambda lam: np.exp(-s * laplacian_symbol(lam)), name=f"heat({s!r})"
    )


def heat_flow(f: grid_mod.RadialField, s: float) -> grid_mod.RadialField:
    """Apply the heat semigroup ``e^{sΔ}``.

    :param f: Field
    :param s: Heat-flow time; must be non-negative
    :raises ValueError: On negative ``s``
    :return: Smoothed field
    """
    return _apply_to_field(f, heat_multiplier(s))


def fractional_laplacian(f: grid_mod.RadialField, sigma: float) -> grid_mod.RadialField:
    """Apply ``(−Δ)^{σ/2}``, i.e. the multiplier ``(λ²+1)^{σ/2}``.

    Negative powers are bounded because the symbol never drops below 1.

    :param f: Field
    :param sigma: Real power
    :return: Transformed field
    """
    multiplier = SpectralMultiplier(
        rule=lambda lam: laplacian_symbol(lam) ** (0.5 * sigma), name=f"(-Δ)^({sigma!r}/2)"
    )
    return _apply_to_field(f, multiplier)


def laplacian(f: grid_mod.RadialField) -> grid_mod.RadialField:
    """Apply the radial Laplacian in the weighted representation (``w ↦ w_rr − w``).

    :param f: Field ``w = sinh(r)·u``
    :return: ``sinh(r)·Δu``
    """
    multiplier = SpectralMultiplier(rule=lambda lam: -laplacian_symbol(lam), name="Δ")
    return _apply_to_field(f, multiplier)


def radial_derivative(f: grid_mod.RadialField) -> types.FloatArray:
    """Differentiate the sine series of ``w`` term by term.

    The derivative is a cosine series; it is evaluated at all nodes ``r_i = i·dr`` for
    ``i = 0 .. n``, endpoints included, through an unnormalized type-I cosine transform.

    :param f: Field ``w``
    :return: ``w_r`` at ``n + 1`` nodes; interior values are ``[1:-1]``
    """
    grid = f.grid
    coeffs = sine_transform(f.values, grid.dr) * frequencies(grid)
    padded = np.concatenate(([0.0], coeffs, [0.0]))
    return scipy.fft.dct(padded, type=1) / math.sqrt(2.0 * grid.r_max)


def wave_propagate(state: grid_mod.WaveState, t: float) -> grid_mod.WaveState:
    """Evolve a state by the free wave group for a time ``t`` (negative allowed).

    Each mode rotates with ``ω_k = sqrt(λ_k² + 1)``.

    :param state: Initial state
    :param t: Duration
    :raises ValueError: If ``t`` is not finite
    :return: Evolved state with its time stamp advanced by ``t``
    """
    if not math.isfinite(t):
        msg = f"Propagation time must be finite, got {t!r}"
        raise ValueError(msg)
    grid = state.grid
    w_hat = sine_transform(state.w.values, grid.dr)
    wt_hat = sine_transform(state.w_t.values, grid.dr)
    w_hat, wt_hat = rotate(w_hat, wt_hat, np.sqrt(laplacian_symbol(frequencies(grid))), t)
    return grid_mod.WaveState(
        grid_mod.RadialField(inverse_sine_transform(w_hat, grid.dr), grid),
        grid_mod.RadialField(inverse_sine_transform(wt_hat, grid.dr), grid),
        state.t + t,
    )


def rotate(
    w_hat: types.FloatArray, wt_hat: types.FloatArray, omega: types.FloatArray, t: float
) -> tuple[types.FloatArray, types.FloatArray]:
    """Exact per-mode solution of ``ŵ'' + ω²ŵ = 0`` over a time ``t``.

    :param w_hat: Position coefficients
    :param wt_hat: Velocity coefficients
    :param omega: Angular frequencies
    :param t: Duration
    :return: New position and velocity coefficients
    """
    cos = np.cos(omega * t)
    sin = np.sin(omega * t)
    return w_hat * cos + wt_hat * sin / omega, -w_hat * omega * sin + wt_hat * cos


def unit_mode(grid: grid_mod.RadialGrid, k: int) -> grid_mod.RadialField:
    """Field of the ``k``-th orthonormal eigenfunction ``sqrt(2/r_max)·sin(λ_k r)``.

    :param grid: Grid
    :param k: Mode index, ``1 ≤ k ≤ n−1``
    :raises ValueError: If ``k`` is not represented on the grid
    :return: The eigenfunction sampled at the interior nodes
    """
    if not 1 <= k < grid.n:
        msg = f"Mode index must lie in [1, {grid.n - 1}], got {k!r}"
        raise ValueError(msg)
    lam = k * math.pi / grid.r_max
    return grid_mod.RadialField(math.sqrt(2.0 / grid.r_max) * np.sin(lam * grid.r), grid)


def linear_energy(state: grid_mod.WaveState) -> float:
    """Quadratic energy ``½Σ(λ²+1)ŵ² + ½Σŵ_t²``, without the angular factor.

    :param state: State
    :return: The energy conserved by :py:func:`wave_propagate`
    """
    grid = state.grid
    w_hat = sine_transform(state.w.values, grid.dr)
    wt_hat = sine_transform(state.w_t.values, grid.dr)
    return 0.5 * float(np.sum(laplacian_symbol(frequencies(grid)) * w_hat**2) + np.sum(wt_hat**2))
