"""Reduced-scale property battery of the solver."""

from __future__ import annotations

import dataclasses
import itertools
import logging
import sys
import typing as t
from fractions import Fraction

import numpy as np

from . import (
    analysis,
    config,
    evolve,
    grid as grid_mod,
    morawetz,
    norms,
    projections,
    runner,
    spectral,
    synth,
    truncation,
)

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class CheckResult:
    """Outcome of one self-check."""

    name: str
    passed: bool
    detail: str


Check = t.Callable[[], CheckResult]


def _result(name: str, value: float, bound: float, *, upper: bool = True) -> CheckResult:
    passed = bool(value <= bound) if upper else bool(value >= bound)
    relation = "<=" if upper else ">="
    return CheckResult(name, passed, f"{value:.3e} {relation} {bound:.1e}")


def _power_law(
    grid: grid_mod.RadialGrid, seed: int, radius: float | None = None
) -> grid_mod.WaveState:
    return synth.synthesize(synth.DataSpec(seed=seed, radius=radius), grid)


def _bump(grid: grid_mod.RadialGrid, amplitude: float = 1.0) -> grid_mod.WaveState:
    return synth.synthesize(synth.DataSpec(kind="bump", radius=4.0, amplitude=amplitude), grid)


def check_transform() -> CheckResult:
    """Round trip and discrete Plancherel of the sine transform."""
    grid = grid_mod.make_grid(40.0, 4096)
    f = _power_law(grid, 0).w
    coeffs = spectral.forward(f).coeffs
    back = spectral.inverse(spectral.forward(f)).values
    scale = float(np.linalg.norm(f.values))
    roundtrip = float(np.linalg.norm(back - f.values)) / scale
    plancherel = abs(float(np.sum(coeffs**2)) - grid.trapezoid(f.values**2)) / (grid.dr * scale**2)
    return _result("transform", max(roundtrip, plancherel), 1e-12)


def check_poincare() -> CheckResult:
    """Sobolev norms increase with the order across a corpus."""
    grid = grid_mod.make_grid(40.0, 1024)
    sigmas = np.linspace(0.0, 1.0, 5)
    violations = 0
    for seed in range(10):
        f = _power_law(grid, seed).w
        values = [norms.sobolev_norm(f, float(sigma)) for sigma in sigmas]
        violations += sum(b < a * (1 - 1e-12) for a, b in itertools.pairwise(values))
    return CheckResult("poincare", violations == 0, f"{violations} violations")


def check_bernstein() -> CheckResult:
    """Low-pass and high-pass Bernstein ratios stay below one."""
    grid = grid_mod.make_grid(40.0, 1024)
    scales = [2.0**-k for k in range(2, 17)]
    worst = 0.0
    for seed in range(4):
        for row in projections.bernstein_report(_power_law(grid, seed).w, scales):
            worst = max(worst, row["ratio_low"], row["ratio_grad_high"])
    return _result("bernstein", worst, 1.0)


def check_linear() -> CheckResult:
    """Per-step quadratic energy conservation and the group law of the free flow."""
    grid = grid_mod.make_grid(40.0, 1024)
    state = _power_law(grid, 1)
    e0 = spectral.linear_energy(state)
    composed = state
    previous = e0
    worst_step = 0.0
    for _ in range(1000):
        composed = evolve.step_linear(composed, 1e-2)
        current = spectral.linear_energy(composed)
        worst_step = max(worst_step, abs(current - previous) / e0)
        previous = current
    direct = spectral.wave_propagate(state, composed.t)
    group = norms.pair_norm(composed - direct, 1.0) / norms.pair_norm(state, 1.0)
    passed = worst_step <= 1e-13 and group <= 1e-12
    return CheckResult("linear", passed, f"step drift {worst_step:.3e}, group {group:.3e}")


def _cubic_drift(grid: grid_mod.RadialGrid, dt: float, horizon: float) -> float:
    state = _bump(grid)
    e0 = norms.energy(state).total
    plan = evolve.StepPlan.from_horizon(dt, horizon, r_support=4.0, r_max=grid.r_max)
    states = evolve.trajectory(state, plan, "cubic")
    return max(abs(norms.energy(s).total - e0) / e0 for s in states)


def check_cubic() -> CheckResult:
    """Energy drift of the cubic stepper and its second order."""
    grid = grid_mod.make_grid(40.0, 1024)
    coarse = _cubic_drift(grid, 2e-3, 4.0)
    fine = _cubic_drift(grid, 1e-3, 4.0)
    ratio = coarse / fine if fine > 0 else float("inf")
    passed = fine <= 1e-6 and 3.5 <= ratio <= 4.5
    return CheckResult("cubic", passed, f"drift {fine:.3e}, ratio {ratio:.2f}")


def check_duhamel() -> CheckResult:
    """Constant single-mode forcing against the closed-form response."""
    grid = grid_mod.make_grid(10.0, 64)
    k, g, dt = 3, 0.5, 1e-3
    mode = spectral.unit_mode(grid, k).values
    forcing = g * mode
    state = grid_mod.WaveState.zeros(grid)
    for _ in range(1000):
        state = evolve.step_forced(state, lambda _: forcing, dt)
    omega2 = float(spectral.laplacian_symbol(spectral.frequencies(grid))[k - 1])
    exact = g * (1.0 - np.cos(np.sqrt(omega2) * state.t)) / omega2
    measured = float(spectral.forward(state.w).coeffs[k - 1])
    return _result("duhamel", abs(measured - exact) / abs(exact), 1e-4)


def check_decomposition() -> CheckResult:
    """The pieces of the truncation scheme sum to the solution."""
    grid = grid_mod.make_grid(24.0, 512)
    data = _power_law(grid, 0, radius=4.0)
    plan = evolve.StepPlan.from_horizon(5e-3, 4.0, r_support=4.0, r_max=grid.r_max)
    dec = truncation.run_truncation(data, 2.0**-6, 0.1, plan)
    return _result("decomposition", dec.max_identity_defect, 1e-9)


def check_morawetz() -> CheckResult:
    """Weight residual and the pointwise Morawetz inequality along a cubic run."""
    weight = morawetz.build_weight(grid_mod.make_grid(40.0, 4096))
    residual = float(np.max(np.abs(weight.laplacian_residual())))
    grid = grid_mod.make_grid(24.0, 512)
    plan = evolve.StepPlan.from_horizon(5e-3, 4.0, r_support=4.0, r_max=grid.r_max)
    states = evolve.trajectory(_bump(grid), plan, "cubic")
    report = morawetz.monitor(states, expected_count=plan.steps + 1)
    passed = residual <= 1e-8 and report.holds
    return CheckResult(
        "morawetz", passed, f"residual {residual:.3e}, share {report.pointwise_share:.3f}"
    )


def check_threshold() -> CheckResult:
    """The exponent inequality solves to 182/201."""
    report = analysis.threshold_calculator()
    return CheckResult("threshold", report.threshold == Fraction(182, 201), str(report.threshold))


def check_scatter() -> CheckResult:
    """Pullbacks of a free trajectory coincide."""
    grid = grid_mod.make_grid(24.0, 512)
    plan = evolve.StepPlan.from_horizon(1e-2, 4.0)
    states = evolve.trajectory(_bump(grid, 0.1), plan, "linear")
    report = analysis.scattering_diagnostic(states, [1.0, 2.0, 3.0, 4.0])
    worst = max(row["difference"] for row in report.rows)
    return _result("scatter", worst, 1e-11)


def check_scatter_decay() -> CheckResult:
    """Pullback differences of a small cubic run shrink between consecutive scatter times."""
    run_config = config.RunConfig.model_validate({"grid": {"n": 1024}, "data": {"amplitude": 0.1}})
    data = synth.synthesize(run_config.data, run_config.grid.build())
    states = evolve.trajectory(data, run_config.plan(), "cubic")
    report = analysis.scattering_diagnostic(
        states, run_config.diagnostics.scatter_probes, max_time=run_config.horizon
    )
    return _result("scatter_decay", min(report.decay_factors()), 1.5, upper=False)


def check_split() -> CheckResult:
    """Split norms of rough data stay within their decay laws at every scale."""
    data = _power_law(grid_mod.make_grid(40.0, 1024), 0, radius=4.0)
    rows = projections.split_norm_report(data, [2.0**-k for k in range(2, 15)], s=0.95)
    worst = max(max(row["hi_ratio"], row["lo_ratio"]) for row in rows)
    return _result("split", worst, 1.0 + 1e-9)


def check_strichartz() -> CheckResult:
    """The ``(4, 4, 1/2)`` ratio over the corpus is stable under grid refinement."""
    ratios = []
    for n in (512, 1024):
        run_config = config.RunConfig.model_validate({"grid": {"n": n}})
        corpus = runner.ExperimentRunner(run_config, workers=1).strichartz_corpus()
        ratios.append(
            max(norms.strichartz_ratio(data, 4, 4, 0.5, run_config.horizon) for data in corpus)
        )
    return _result("strichartz", abs(ratios[1] / ratios[0] - 1.0), 0.2)


SWEEP_TOLERANCES: t.Mapping[str, float] = {
    "sup_E_v": 0.15,
    "max_abs_dE": 0.15,
    "sup_psi_L4": 0.1,
}
"""Slack below the predicted ``s0``-slope allowed per sweep quantity."""


def check_sweep() -> CheckResult:
    """Fitted ``s0``-slopes of the ledger quantities reach their scaling laws."""
    run_config = config.RunConfig.model_validate({"grid": {"n": 1024}})
    rows = [runner.sweep_point(run_config, s0) for s0 in run_config.diagnostics.s0_list]
    result = analysis.summarize_sweep(run_config.data.s, rows)
    passed = all(
        name in result.fits and result.meets_prediction(name, tolerance)
        for name, tolerance in SWEEP_TOLERANCES.items()
    )
    detail = ", ".join(
        f"{name} {result.fits[name].slope:.3f}" for name in SWEEP_TOLERANCES if name in result.fits
    )
    return CheckResult("sweep", passed, detail)


CHECKS: tuple[Check, ...] = (
    check_transform,
    check_poincare,
    check_bernstein,
    check_linear,
    check_cubic,
    check_duhamel,
    check_decomposition,
    check_morawetz,
    check_threshold,
    check_scatter,
    check_scatter_decay,
    check_split,
    check_strichartz,
    check_sweep,
)


def run_selftest(checks: t.Sequence[Check] = CHECKS) -> list[CheckResult]:
    """Run the checks; a check raising a numerical error counts as failed."""
    results: list[CheckResult] = []
    for check in checks:
        logger.info("Running self-check %s.", check.__name__)
        try:
            results.append(check())
        except (ValueError, ArithmeticError) as exc:
            logger.exception("Self-check %s raised.", check.__name__)
            results.append(CheckResult(check.__name__.removeprefix("check_"), False, str(exc)))
    return results


def print_result(results: t.Sequence[CheckResult], output_file: t.TextIO | None = None) -> int:
    """Print one line per check and return the exit code.

    :param results: Check results
    :param output_file: file to print to; defaults to sys.stdout (if ``None``)
    :return: exit code 0 if every check passed; 1 otherwise
    """
    stream = output_file or sys.stdout
    for result in results:
        status = "ok" if result.passed else "FAILED"
        print(f"{result.name}: {status} ({result.detail})", file=stream)
    failed = [r for r in results if not r.passed]
    if not failed:
        print("Success! All checks passed.", file=stream)
        return 0
    print(f"Error! {len(failed)} check(s) failed.", file=stream)
    return 1
