"""Heat-flow frequency projections and the high/low data split.

``P_{≥s} = e^{sΔ}`` keeps frequencies below ``s^{−1/2}``, ``P_{<s} = I − P_{≥s}`` keeps the rest
and ``P_s = (−sΔ)e^{sΔ}`` is the band piece at scale ``s``. A state is split at ``s0`` into a
rough high part ``(I − e^{s0Δ})`` and a smooth low part ``e^{s0Δ}``.
"""

from __future__ import annotations

import dataclasses
import logging
import math

import numpy as np

from . import grid as grid_mod, norms, spectral, types

logger = logging.getLogger(__name__)


def p_geq(f: grid_mod.RadialField, s: float) -> grid_mod.RadialField:
    """Low-pass projection ``P_{≥s} f = e^{sΔ} f``.

    :raises ValueError: On negative ``s``
    """
    return spectral.heat_flow(f, s)


def p_lt(f: grid_mod.RadialField, s: float) -> grid_mod.RadialField:
    """High-pass projection ``P_{<s} f = f − P_{≥s} f``.

    :raises ValueError: On negative ``s``
    """
    return f - p_geq(f, s)


def band_multiplier(s: float) -> spectral.SpectralMultiplier:
    """Multiplier ``s(λ²+1)e^{−s(λ²+1)}`` of ``P_s``.

    :param s: Finite non-negative scale
    :raises ValueError: If ``s`` is negative or not finite
    :return: The multiplier
    """
    if not (math.isfinite(s) and s >= 0):
        msg = f"Band scale must be finite and non-negative, got {s!r}"
        raise ValueError(msg)

    def rule(lam: types.FloatArray) -> types.FloatArray:
        x = s * spectral.laplacian_symbol(lam)
        return x * np.exp(-x)

    return spectral.SpectralMultiplier(rule=rule, name=f"band({s!r})")


def p_band(f: grid_mod.RadialField, s: float) -> grid_mod.RadialField:
    """Band projection ``P_s f = (−sΔ)e^{sΔ} f``.

    :raises ValueError: If ``s`` is negative or not finite
    """
    return spectral.inverse(spectral.apply_multiplier(spectral.forward(f), band_multiplier(s)))


@dataclasses.dataclass(frozen=True)
class SplitData:
    """High/low frequency pieces of a state at truncation scale ``s0``."""

    hi: grid_mod.WaveState
    lo: grid_mod.WaveState
    s0: float


def split_state(state: grid_mod.WaveState, s0: float) -> SplitData:
    """Split both components of a state at scale ``s0``.

    ``lo = e^{s0Δ}state`` and ``hi = state − lo``; ``s0 = ∞`` moves everything into ``hi``.

    :param state: State to split
    :param s0: Truncation scale, ``0 ≤ s0 ≤ ∞``
    :raises ValueError: On negative ``s0``
    :return: The two pieces
    """
    lo = grid_mod.WaveState(p_geq(state.w, s0), p_geq(state.w_t, s0), state.t)
    hi = grid_mod.WaveState(state.w - lo.w, state.w_t - lo.w_t, state.t)
    return SplitData(hi=hi, lo=lo, s0=s0)


def bernstein_report(f: grid_mod.RadialField, s_list: list[float]) -> list[types.BernsteinRow]:
    """Tabulate the ``L²`` Bernstein ratios of a field over heat-flow scales.

    For each ``s`` the rows hold ``‖P_{<s}f‖ / (s^{1/2}‖∇f‖)``, ``‖∇P_{≥s}f‖ / (s^{−1/2}‖f‖)`` and
    the band analogue ``‖∇P_s f‖ / (s^{−1/2}‖f‖)``. The gradient norm is ``‖(−Δ)^{1/2}f‖``.

    :param f: Field
    :param s_list: Positive scales
    :raises ValueError: If a scale is not positive
    :return: One row per scale; empty for the zero field
    """
    norm_f = norms.sobolev_norm(f, 0.0)
    grad_f = norms.sobolev_norm(f, 1.0)
    if norm_f == 0 or grad_f == 0:
        logger.debug("Bernstein report skipped for a zero field.")
        return []

    rows: list[types.BernsteinRow] = []
    for s in s_list:
        if not s > 0:
            msg = f"Bernstein scales must be positive, got {s!r}"
            raise ValueError(msg)
        rows.append(
            types.BernsteinRow(
                s=s,
                ratio_low=norms.sobolev_norm(p_lt(f, s), 0.0) / (math.sqrt(s) * grad_f),
                ratio_grad_high=norms.sobolev_norm(p_geq(f, s), 1.0) * math.sqrt(s) / norm_f,
                ratio_grad_band=norms.sobolev_norm(p_band(f, s), 1.0) * math.sqrt(s) / norm_f,
            )
        )
    return rows


def split_norm_report(
    state: grid_mod.WaveState, s0_list: list[float], s: float, nu: float = 0.5
) -> list[types.SplitNormRow]:
    """Compare split norms with the decay laws of rough data.

    ``hi_ratio = ‖hi‖_{H^ν×H^{ν−1}} / (s0^{(s−ν)/2}·‖state‖_{H^s×H^{s−1}})`` and
    ``lo_ratio = ‖lo‖_{H^1×L^2} / (s0^{−(1−s)/2}·‖state‖_{H^s×H^{s−1}})``. Both stay bounded
    as ``s0 → 0`` for data of regularity ``s``.

    :param state: Data
    :param s0_list: Positive truncation scales
    :param s: Regularity of the data
    :param nu: Regularity at which the high part is measured, ``ν ≤ s``
    :return: One row per scale; empty for zero data
    """
    data_norm = norms.pair_norm(state, s)
    if data_norm == 0:
        return []
    rows: list[types.SplitNormRow] = []
    for s0 in s0_list:
        split = split_state(state, s0)
        hi_norm = norms.pair_norm(split.hi, nu)
        lo_norm = norms.pair_norm(split.lo, 1.0)
        rows.append(
            types.SplitNormRow(
                s0=s0,
                hi_norm=hi_norm,
                lo_norm=lo_norm,
                hi_ratio=hi_norm / (s0 ** (0.5 * (s - nu)) * data_norm),
                lo_ratio=lo_norm / (s0 ** (-0.5 * (1.0 - s)) * data_norm),
            )
        )
    return rows
