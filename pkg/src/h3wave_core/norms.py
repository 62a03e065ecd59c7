"""Norms, the conserved energy and space-time accumulators.

Every spatial integral carries the full volume measure ``4π·sinh²(r)·dr`` of hyperbolic 3-space.
"""

from __future__ import annotations

import dataclasses
import logging
import math

import numpy as np

from . import grid as grid_mod, spectral, types

logger = logging.getLogger(__name__)


ADMISSIBLE_TOLERANCE = 1e-12


def lq_norm(f: grid_mod.RadialField, q: float) -> float:
    """Compute ``‖u‖_{L^q}`` of the physical amplitude ``u = w/sinh(r)``.

    :param f: Weighted field
    :param q: Exponent in ``[1, ∞]``
    :raises ValueError: If ``q < 1``
    :return: The norm; ``max|u_i|`` for ``q = ∞``
    """
    if math.isnan(q) or q < 1:
        msg = f"L^q exponent must be at least 1, got {q!r}"
        raise ValueError(msg)
    u = np.abs(grid_mod.to_physical(f))
    if math.isinf(q):
        return float(np.max(u, initial=0.0))
    return f.grid.volume_integral(u**q * f.grid.sinh2) ** (1.0 / q)


def _sobolev_from_coeffs(coeffs: types.FloatArray, symbol: types.FloatArray, sigma: float) -> float:
    return math.sqrt(grid_mod.FOUR_PI * float(np.sum(symbol**sigma * coeffs**2)))


def sobolev_norm(f: grid_mod.RadialField, sigma: float) -> float:
    """Compute ``‖(−Δ)^{σ/2}u‖_{L²}`` spectrally.

    :param f: Weighted field
    :param sigma: Real regularity index
    :return: ``(4π Σ (λ_k²+1)^σ ŵ_k²)^{1/2}``
    """
    grid = f.grid
    coeffs = spectral.sine_transform(f.values, grid.dr)
    symbol = spectral.laplacian_symbol(spectral.frequencies(grid))
    return _sobolev_from_coeffs(coeffs, symbol, sigma)


def pair_norm(state: grid_mod.WaveState, sigma: float) -> float:
    """Compute the data norm ``‖(u, u_t)‖_{H^σ × H^{σ−1}}``.

    :param state: State
    :param sigma: Regularity of the field component
    :return: The norm
    """
    return math.hypot(sobolev_norm(state.w, sigma), sobolev_norm(state.w_t, sigma - 1.0))


@dataclasses.dataclass(frozen=True)
class EnergyBreakdown:
    """Parts of the conserved energy ``∫ ½|∇u|² + ½u_t² + ¼u⁴ dμ``."""

    kinetic: float
    gradient: float
    potential: float

    @property
    def total(self) -> float:
        """Sum of the three parts."""
        return self.kinetic + self.gradient + self.potential


def _quadratic_parts(state: grid_mod.WaveState) -> tuple[float, float]:
    grid = state.grid
    symbol = spectral.laplacian_symbol(spectral.frequencies(grid))
    w_hat = spectral.sine_transform(state.w.values, grid.dr)
    wt_hat = spectral.sine_transform(state.w_t.values, grid.dr)
    gradient = 0.5 * grid_mod.FOUR_PI * float(np.sum(symbol * w_hat**2))
    kinetic = 0.5 * grid_mod.FOUR_PI * float(np.sum(wt_hat**2))
    return kinetic, gradient


def potential_energy(f: grid_mod.RadialField) -> float:
    """Quartic energy ``¼‖u‖₄⁴`` of a field."""
    return 0.25 * f.grid.volume_integral(f.values**4 / f.grid.sinh2)


def energy(state: grid_mod.WaveState) -> EnergyBreakdown:
    """Evaluate the energy of a state.

    The gradient part uses the identity ``∫|∇u|² dμ = 4π∫(w_r² + w²) dr`` and is computed from
    the sine coefficients, so it is exact for the represented modes.

    :param state: State
    :return: Kinetic, gradient and potential parts
    """
    kinetic, gradient = _quadratic_parts(state)
    return EnergyBreakdown(kinetic=kinetic, gradient=gradient, potential=potential_energy(state.w))


@dataclasses.dataclass(frozen=True)
class EnergyCrossTerms:
    """Exact expansion of ``E(φ + v) − E(φ)``."""

    grad_cross: float
    kin_cross: float
    quad_v: float
    quartic: float

    @property
    def total(self) -> float:
        """The increment ``ΔE``."""
        return self.grad_cross + self.kin_cross + self.quad_v + self.quartic


def energy_cross_terms(phi: grid_mod.WaveState, v: grid_mod.WaveState) -> EnergyCrossTerms:
    """Split the energy increment caused by adding ``v`` to ``φ``.

    :param phi: Low-frequency state
    :param v: Correction
    :return: ``∫∇φ·∇v + φ_t v_t``, the quadratic energy of ``v`` and the quartic increment
    """
    grid = phi.grid
    symbol = spectral.laplacian_symbol(spectral.frequencies(grid))
    phi_hat = spectral.sine_transform(phi.w.values, grid.dr)
    phit_hat = spectral.sine_transform(phi.w_t.values, grid.dr)
    v_hat = spectral.sine_transform(v.w.values, grid.dr)
    vt_hat = spectral.sine_transform(v.w_t.values, grid.dr)

    zeta = phi.w.values + v.w.values
    quartic = 0.25 * grid.volume_integral((zeta**4 - phi.w.values**4) / grid.sinh2)
    return EnergyCrossTerms(
        grad_cross=grid_mod.FOUR_PI * float(np.sum(symbol * phi_hat * v_hat)),
        kin_cross=grid_mod.FOUR_PI * float(np.sum(phit_hat * vt_hat)),
        quad_v=0.5 * grid_mod.FOUR_PI * float(np.sum(symbol * v_hat**2) + np.sum(vt_hat**2)),
        quartic=quartic,
    )


def _check_exponent(name: str, value: float) -> None:
    if math.isnan(value) or value < 2:  # noqa: PLR2004
        msg = f"Space-time exponent {name} must lie in [2, inf], got {value!r}"
        raise ValueError(msg)


@dataclasses.dataclass
class SpaceTimeAccumulator:
    """Running ``L^p_t L^q_x`` norm, fed step by step with a left-endpoint rule.

    ``partial`` holds ``Σ dt·‖u(t)‖_q^p``, or the running maximum of ``‖u(t)‖_q`` when
    ``p = ∞``.
    """

    p: float
    q: float
    partial: float = 0.0
    interval: int = 0

    def __post_init__(self) -> None:
        """Validate the exponents.

        :raises ValueError: If an exponent lies outside ``[2, ∞]``
        """
        _check_exponent("p", self.p)
        _check_exponent("q", self.q)

    def feed(self, spatial_norm: float, dt: float) -> None:
        """Add one time step with a precomputed ``‖u(t)‖_{L^q}``.

        :param spatial_norm: Spatial norm at the left endpoint of the step
        :param dt: Step length
        :raises ValueError: If ``dt`` is not positive
        """
        if not dt > 0:
            msg = f"Time step must be positive, got {dt!r}"
            raise ValueError(msg)
        if math.isinf(self.p):
            self.partial = max(self.partial, spatial_norm)
        else:
            self.partial += dt * spatial_norm**self.p

    def norm(self) -> float:
        """Return the accumulated ``L^p_t L^q_x`` norm."""
        if math.isinf(self.p):
            return self.partial
        return self.partial ** (1.0 / self.p)


def st_accumulate(
    acc: SpaceTimeAccumulator, state: grid_mod.WaveState, dt: float
) -> SpaceTimeAccumulator:
    """Feed one evolution step into a space-time accumulator.

    :param acc: Accumulator; updated in place
    :param state: State at the left endpoint of the step
    :param dt: Step length
    :raises ValueError: If ``dt`` is not positive
    :return: The same accumulator
    """
    acc.feed(lq_norm(state.w, acc.q), dt)
    return acc


def admissible_gamma(p: float, q: float) -> float:
    """Regularity ``γ = 3/2 − 1/p − 3/q`` paired with ``(p, q)``."""
    return 1.5 - 1.0 / p - 3.0 / q


def check_admissible(p: float, q: float, gamma: float) -> None:
    """Validate a Strichartz triple against the admissible set.

    The set consists of triples with ``p, q ≥ 2``, ``1/p + 1/q ≤ 1/2`` and
    ``γ = 3/2 − 1/p − 3/q``.

    :param p: Time exponent
    :param q: Space exponent
    :param gamma: Regularity of the data
    :raises ValueError: Naming the first violated constraint
    """
    if p < 2 or q < 2:  # noqa: PLR2004
        msg = f"Triple ({p}, {q}, {gamma}) violates p, q >= 2"
        raise ValueError(msg)
    if 1.0 / p + 1.0 / q > 0.5 + ADMISSIBLE_TOLERANCE:
        msg = f"Triple ({p}, {q}, {gamma}) violates 1/p + 1/q <= 1/2"
        raise ValueError(msg)
    if abs(gamma - admissible_gamma(p, q)) > ADMISSIBLE_TOLERANCE:
        msg = f"Triple ({p}, {q}, {gamma}) violates gamma = 3/2 - 1/p - 3/q"
        raise ValueError(msg)


def in_endpoint_set(p: float, q: float, gamma: float) -> bool:
    """Check membership in the second family of Strichartz triples.

    The family holds triples with ``γ = 1 − 2/q`` and either ``p > 2`` with
    ``1/2 − 1/p ≤ 1/q ≤ 1/2 − 1/(3p)``, or ``p = 2`` with ``0 < 1/q < 1/3``.

    :param p: Time exponent
    :param q: Space exponent
    :param gamma: Regularity of the data
    :return: :py:obj:`True` if the triple belongs to the family
    """
    if abs(gamma - (1.0 - 2.0 / q)) > ADMISSIBLE_TOLERANCE:
        return False
    inv_p, inv_q = 1.0 / p, 1.0 / q
    if p > 2:  # noqa: PLR2004
        lower, upper = 0.5 - inv_p, 0.5 - inv_p / 3.0
        return lower - ADMISSIBLE_TOLERANCE <= inv_q <= upper + ADMISSIBLE_TOLERANCE
    return p == 2 and 0 < inv_q < 1.0 / 3.0  # noqa: PLR2004


def strichartz_ratio(  # noqa: PLR0913
    data: grid_mod.WaveState,
    p: float,
    q: float,
    gamma: float,
    horizon: float,
    dt: float = 0.05,
) -> float:
    """Measure ``‖S(t)data‖_{L^p_t L^q_x([0,T])} / ‖data‖_{H^γ × H^{γ−1}}``.

    The free evolution is sampled exactly at the step times ``k·dt`` by rotating the initial
    coefficients.

    :param data: Initial state
    :param p: Time exponent
    :param q: Space exponent
    :param gamma: Regularity of the data norm
    :param horizon: Final time ``T``
    :param dt: Time sampling step
    :raises ValueError: If the triple is not admissible or the data vanish
    :return: The ratio
    """
    check_admissible(p, q, gamma)
    denominator = pair_norm(data, gamma)
    if denominator == 0:
        msg = "Strichartz ratio is undefined for zero data"
        raise ValueError(msg)

    grid = data.grid
    omega = np.sqrt(spectral.laplacian_symbol(spectral.frequencies(grid)))
    w_hat = spectral.sine_transform(data.w.values, grid.dr)
    wt_hat = spectral.sine_transform(data.w_t.values, grid.dr)
    steps = max(1, math.ceil(horizon / dt - 1e-9))
    step = horizon / steps
    acc = SpaceTimeAccumulator(p=p, q=q)
    for k in range(steps):
        position, _ = spectral.rotate(w_hat, wt_hat, omega, k * step)
        field = grid_mod.RadialField(spectral.inverse_sine_transform(position, grid.dr), grid)
        acc.feed(lq_norm(field, q), step)
    ratio = acc.norm() / denominator
    logger.debug("Strichartz ratio (p=%s, q=%s, gamma=%s): %s.", p, q, gamma, ratio)
    return ratio
