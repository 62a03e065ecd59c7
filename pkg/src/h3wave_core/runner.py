"""Runner of the h3wave_core experiments."""

from __future__ import annotations

import dataclasses
import logging
import math
import multiprocessing
import pathlib
import sys
import typing as t

from . import (
    analysis,
    config,
    evolve,
    grid as grid_mod,
    morawetz,
    norms,
    output,
    projections,
    synth,
    truncation,
    types,
)

logger = logging.getLogger(__name__)


SUMMARY_FILE = "summary.jsonl"
STRICHARTZ_CORPUS_SIZE = 4
"""Power-law seeds per Strichartz corpus; a bump completes it."""


def sweep_point(run_config: config.RunConfig, s0: float) -> types.SweepRow:
    """Run one truncation at scale ``s0``; executed in a worker process."""
    grid = run_config.grid.build()
    data = synth.synthesize(run_config.data, grid)
    dec = truncation.run_truncation(
        data,
        s0,
        run_config.scheme.epsilon,
        run_config.plan(),
        run_config.scheme.t_max,
    )
    ledger = truncation.ledger_report(dec, run_config.data.s).ledger
    logger.info("Finished sweep point s0=%s with %s intervals.", s0, ledger.interval_count)
    return types.SweepRow(
        s=run_config.data.s,
        s0=s0,
        sup_E_phi=ledger.sup_E_phi,
        sup_E_v=ledger.sup_E_v,
        max_abs_dE=ledger.max_abs_dE,
        total_L4=ledger.total_l4,
        interval_count=ledger.interval_count,
        sup_psi_L4=ledger.sup_psi_L4,
        sup_v_L4=ledger.sup_v_L4,
    )


@dataclasses.dataclass(frozen=True)
class StrichartzSuite:
    """Maximal ratios of the admissible triples and the reasons inadmissible ones were skipped."""

    rows: list[types.StrichartzRow]
    skipped: dict[str, str]


class ExperimentRunner:
    """Run the experiments of one configuration and write their artifacts."""

    def __init__(self, run_config: config.RunConfig, *, workers: int | None = None) -> None:
        """Initialize the :py:class:`ExperimentRunner`.

        :param run_config: Validated configuration
        :param workers: Worker processes for sweeps; defaults to the CPU count
        """
        self.config = run_config
        pool_size = workers or multiprocessing.cpu_count()
        # NOTE: Work around https://bugs.python.org/issue45077
        self._pool_size = pool_size if sys.platform != "win32" else min(pool_size, 61)
        self.artifacts: list[pathlib.Path] = []
        self.messages: list[str] = []

    @property
    def out_dir(self) -> pathlib.Path:
        """Directory receiving the artifacts."""
        return self.config.output.out_dir

    def _write(
        self, name: str, columns: t.Sequence[str], rows: t.Iterable[t.Mapping[str, t.Any]]
    ) -> None:
        self.artifacts.append(output.write_csv(self.out_dir / name, columns, rows))

    def _summarize(self, command: str, record: t.Mapping[str, t.Any]) -> None:
        summary = {"command": command, "seed": self.config.data.seed, **record}
        path = output.append_summary(self.out_dir / SUMMARY_FILE, summary)
        if path not in self.artifacts:
            self.artifacts.append(path)

    def initial_data(self) -> grid_mod.WaveState:
        """Synthesize the configured data on the configured grid."""
        return synth.synthesize(self.config.data, self.config.grid.build())

    def run_evolution(self) -> evolve.RunSummary:
        """Evolve the data and write the observer rows to ``evolve.csv``.

        :raises ValueError: If the domain guard is violated
        :raises NumericalAbortError: If a step produces non-finite values
        :return: The run summary
        """
        plan = self.config.plan()
        observers: list[evolve.Observer] = []
        with_morawetz = self.config.diagnostics.morawetz
        energy_observer = evolve.EnergyObserver(plan.dt, with_morawetz=with_morawetz)
        if self.config.diagnostics.energy:
            observers.append(energy_observer)
        space_time = [
            evolve.SpaceTimeObserver(p, q, plan.dt) for p, q in self.config.diagnostics.space_time
        ]
        observers.extend(space_time)

        summary = evolve.evolve_run(self.initial_data(), plan, self.config.stepper, observers)
        record: dict[str, t.Any] = {
            "steps": summary.steps,
            "dt": plan.dt,
            "wall_mass_fraction": evolve.wall_mass_fraction(summary.final),
            "space_time": {
                f"L{obs.acc.p}_L{obs.acc.q}": obs.acc.norm() for obs in space_time
            },
        }
        if self.config.diagnostics.energy:
            rows = energy_observer.result()
            columns = output.EVOLVE_COLUMNS if with_morawetz else output.EVOLVE_COLUMNS[:-1]
            self._write("evolve.csv", columns, rows)
            first, last = rows[0]["E_total"], rows[-1]["E_total"]
            record["energy_drift"] = abs(last - first) / first if first > 0 else abs(last - first)
            self.messages.append(f"Energy drift: {record['energy_drift']!r}")
        self._summarize("evolve", record)
        return summary

    def projection_reports(self, data: grid_mod.WaveState) -> None:
        """Write ``bernstein.csv`` and ``split_norms.csv`` of ``data`` over ``diagnostics.s0_list``.

        Scales of 0 and infinity are left out.

        :param data: Initial data
        """
        scales = [s0 for s0 in self.config.diagnostics.s0_list if 0 < s0 < math.inf]
        self._write(
            "bernstein.csv", output.BERNSTEIN_COLUMNS, projections.bernstein_report(data.w, scales)
        )
        split_rows = projections.split_norm_report(data, scales, self.config.data.s)
        self._write("split_norms.csv", output.SPLIT_NORM_COLUMNS, split_rows)

    def truncate(self) -> truncation.LedgerReport:
        """Run the truncation scheme and write the ledger, the comparisons and the split reports.

        Writes ``ledger.csv``, ``comparison.csv``, ``bernstein.csv`` and ``split_norms.csv``.

        :raises ValueError: If the domain guard is violated
        :raises NumericalAbortError: If a step produces non-finite values
        :return: The ledger report
        """
        scheme = self.config.scheme
        data = self.initial_data()
        self.projection_reports(data)
        dec = truncation.run_truncation(
            data, scheme.s0, scheme.epsilon, self.config.plan(), scheme.t_max
        )
        report = truncation.ledger_report(dec, self.config.data.s)
        ledger = report.ledger
        self._write("ledger.csv", output.LEDGER_COLUMNS, ledger.rows())
        self._write("comparison.csv", output.COMPARISON_COLUMNS, report.comparisons)

        record: dict[str, t.Any] = {
            "s0": scheme.s0,
            "epsilon": scheme.epsilon,
            "interval_count": ledger.interval_count,
            "pigeonhole_bound": ledger.pigeonhole_bound,
            "total_dE": ledger.total_dE,
            "phi_drift": ledger.phi_drift,
            "total_L4": ledger.total_l4,
            "max_identity_defect": ledger.max_identity_defect,
        }
        if 0 < scheme.s0 < float("inf"):
            bootstrap = analysis.bootstrap_report(
                ledger, self.config.data.s, scheme.s0, self.config.diagnostics.bootstrap_c
            )
            record |= {
                "bootstrap_half_M": bootstrap.half_m,
                "bootstrap_holds": bootstrap.holds,
                "bootstrap_error_estimate": bootstrap.error_estimate,
            }
        self.messages.append(
            f"Closed {ledger.interval_count} intervals (bound {ledger.pigeonhole_bound})."
        )
        self._summarize("truncate", record)
        return report

    def _run_sweep_sync(self, s0_list: list[float]) -> list[types.SweepRow]:
        logger.debug("Running sweep points synchronously.")
        return [sweep_point(self.config, s0) for s0 in s0_list]

    def _run_sweep_parallel(self, s0_list: list[float]) -> list[types.SweepRow]:
        logger.debug("Running sweep points in parallel with pool size of %s.", self._pool_size)
        with multiprocessing.Pool(min(self._pool_size, len(s0_list))) as pool:
            return pool.starmap(sweep_point, [(self.config, s0) for s0 in s0_list])

    def sweep_s0(self, s0_list: t.Sequence[float] | None = None) -> analysis.SweepResult:
        """Run the truncation scheme per scale and fit every monitored quantity against ``s0``.

        Rows keep the order of ``s0_list`` regardless of the worker count.

        :param s0_list: Scales; defaults to ``diagnostics.s0_list``
        :raises ValueError: If the scales span fewer than 4 points or 3 octaves
        :return: The fitted sweep
        """
        scales = list(s0_list if s0_list is not None else self.config.diagnostics.s0_list)
        analysis.check_sweep_scales(scales)
        logger.info("Sweeping %s scales.", len(scales))
        rows = (
            self._run_sweep_parallel(scales)
            if self._pool_size > 1 and len(scales) > 1
            else self._run_sweep_sync(scales)
        )
        result = analysis.summarize_sweep(self.config.data.s, rows)
        self._write("sweep.csv", output.SWEEP_COLUMNS, rows)
        fits = {
            name: {
                "slope": fit.slope,
                "residual": fit.residual,
                "stderr": fit.stderr,
                "predicted": result.predicted_slope(name),
            }
            for name, fit in result.fits.items()
        }
        for name, fit in fits.items():
            self.messages.append(
                f"{name}: slope {fit['slope']!r} ± {fit['residual']!r} "
                f"(predicted {fit['predicted']!r})"
            )
        self._summarize("sweep", {"s": result.s, "fits": fits, "degenerate": result.degenerate})
        return result

    def run_morawetz(self) -> morawetz.MorawetzReport:
        """Monitor the Morawetz estimates along a cubic run and write ``morawetz.csv``.

        :raises ValueError: If the domain guard is violated
        :raises NumericalAbortError: If a step produces non-finite values
        :return: The report
        """
        plan = self.config.plan()
        states = evolve.trajectory(self.initial_data(), plan, "cubic")
        report = morawetz.monitor(
            states,
            probes=self.config.diagnostics.morawetz_probes,
            expected_count=plan.steps + 1,
        )
        self._write("morawetz.csv", output.MORAWETZ_COLUMNS, report.rows())
        record = {
            "pointwise_share": report.pointwise_share,
            "integrated_margin": report.integrated_margin,
            "c_meas": report.c_meas,
            "c_meas_potential": report.c_meas_potential,
            "holds": report.holds,
        }
        self.messages.append(
            f"Morawetz: pointwise share {report.pointwise_share!r}, C_meas {report.c_meas!r}"
        )
        self._summarize("morawetz", record)
        return report

    def strichartz_corpus(self) -> list[grid_mod.WaveState]:
        """Power-law data for consecutive seeds and one bump, at the configured regularity."""
        grid = self.config.grid.build()
        base = self.config.data
        specs = [
            base.model_copy(update={"kind": "power_law", "seed": base.seed + k})
            for k in range(STRICHARTZ_CORPUS_SIZE)
        ]
        specs.append(base.model_copy(update={"kind": "bump", "radius": base.radius or 4.0}))
        return [synth.synthesize(spec, grid) for spec in specs]

    def strichartz_suite(self) -> StrichartzSuite:
        """Measure the maximal Strichartz ratio of every configured triple over the corpus.

        Inadmissible triples are skipped with the reason. Measured triples that also belong to
        the second family are listed under ``endpoint_family`` in the summary record.

        :return: Rows of the admissible triples and the skipped ones
        """
        corpus = self.strichartz_corpus()
        rows: list[types.StrichartzRow] = []
        skipped: dict[str, str] = {}
        endpoint_family: list[str] = []
        for p, q, gamma in self.config.diagnostics.strichartz_triples:
            label = f"({p!r}, {q!r}, {gamma!r})"
            try:
                norms.check_admissible(p, q, gamma)
            except ValueError as exc:
                logger.warning("Skipping triple %s: %s", label, exc)
                skipped[label] = str(exc)
                continue
            if norms.in_endpoint_set(p, q, gamma):
                endpoint_family.append(label)
            ratios = [
                norms.strichartz_ratio(data, p, q, gamma, self.config.horizon) for data in corpus
            ]
            rows.append(
                types.StrichartzRow(
                    p=p, q=q, gamma=gamma, max_ratio=max(ratios), samples=len(ratios)
                )
            )
        self._write("strichartz.csv", output.STRICHARTZ_COLUMNS, rows)
        self._summarize("strichartz", {"skipped": skipped, "endpoint_family": endpoint_family})
        return StrichartzSuite(rows=rows, skipped=skipped)

    def scatter(self) -> analysis.ScatterReport:
        """Pull back a cubic run at the probe times and write ``scatter.csv``.

        :raises ValueError: If a probe lies beyond the horizon
        :raises NumericalAbortError: If a step produces non-finite values
        :return: The report
        """
        probes = self.config.diagnostics.scatter_probes
        plan = self.config.plan()
        states = evolve.trajectory(self.initial_data(), plan, "cubic")
        report = analysis.scattering_diagnostic(states, probes, max_time=self.config.horizon)
        self._write("scatter.csv", output.SCATTER_COLUMNS, report.rows)
        self._summarize("scatter", {"decay_factors": report.decay_factors()})
        return report

    def threshold(self) -> analysis.ThresholdReport:
        """Solve the bootstrap exponent inequality."""
        report = analysis.threshold_calculator()
        self.messages.append(f"Threshold: s > {report.threshold} ≈ {report.decimal:.5f}")
        if report.discrepancy:
            self.messages.append(f"Note: the bootstrap statement uses s > {report.stated}.")
        return report

    def print_result(self, output_file: t.TextIO | None = None) -> int:
        """Print the collected messages and the written artifacts and return the exit code.

        :param output_file: file to print to; defaults to sys.stdout (if ``None``)
        :return: exit code 0
        """
        stream = output_file or sys.stdout
        for message in self.messages:
            print(message, file=stream)
        for path in self.artifacts:
            print(f"Wrote {path}", file=stream)
        print("Success! Run completed.", file=stream)
        return 0
