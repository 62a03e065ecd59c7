"""CSV and JSON-lines artifact writers.

Floats are written with :py:func:`repr` so identical runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import pathlib
import typing as t

logger = logging.getLogger(__name__)


EVOLVE_COLUMNS = ("t", "E_total", "E_kinetic", "E_gradient", "E_potential", "L4_partial", "M_t")
LEDGER_COLUMNS = (
    "j",
    "t_start",
    "t_end",
    "l4_acc",
    "E_phi_start",
    "E_phi_end",
    "sup_E_v",
    "dE",
    "sup_v_L4",
)
MORAWETZ_COLUMNS = ("t", "M", "dMdt_fd", "quarter_L4", "err_Nzeta", "err_Ngradzeta", "margin")
BERNSTEIN_COLUMNS = ("s", "ratio_low", "ratio_grad_high", "ratio_grad_band")
SPLIT_NORM_COLUMNS = ("s0", "hi_norm", "lo_norm", "hi_ratio", "lo_ratio")
SCATTER_COLUMNS = ("t_a", "t_b", "difference")
STRICHARTZ_COLUMNS = ("p", "q", "gamma", "max_ratio", "samples")
SWEEP_COLUMNS = (
    "s",
    "s0",
    "sup_E_phi",
    "sup_E_v",
    "max_abs_dE",
    "total_L4",
    "interval_count",
    "sup_psi_L4",
    "sup_v_L4",
)
COMPARISON_COLUMNS = ("quantity", "measured", "exponent", "predicted", "ratio")


def format_value(value: t.Any) -> str:  # noqa: ANN401
    """Format one cell; floats use their shortest round-tripping representation."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(
    path: pathlib.Path, columns: t.Sequence[str], rows: t.Iterable[t.Mapping[str, t.Any]]
) -> pathlib.Path:
    """Write rows under a fixed header.

    :param path: Target file; parent directories are created
    :param columns: Header, also the column order
    :param rows: Rows keyed by column name; extra keys are ignored
    :raises KeyError: If a row lacks a column
    :return: The written path
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row[column]) for column in columns])
            count += 1
    logger.info("Wrote %s rows to '%s'.", count, path)
    return path


def _jsonable(value: t.Any) -> t.Any:  # noqa: ANN401
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    if isinstance(value, t.Mapping):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def append_summary(path: pathlib.Path, record: t.Mapping[str, t.Any]) -> pathlib.Path:
    """Append one JSON record as a line; non-finite floats become strings.

    :param path: JSON-lines file; created if missing
    :param record: Summary of one run
    :return: The written path
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("a", encoding="utf-8") as handle:
        handle.write(json.dumps(_jsonable(record), sort_keys=True, allow_nan=False))
        handle.write("\n")
    logger.debug("Appended summary record to '%s'.", path)
    return path


def read_csv(path: pathlib.Path) -> list[dict[str, str]]:
    """Read an artifact back as string rows."""
    with path.open(encoding="utf-8", newline="") as handle:
        return list(csv.DictReader(handle))
