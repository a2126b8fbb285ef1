#
# File:    ./src/evoagent/metrics.py
# Author:  Jiří Kučera <sanczes AT gmail.com>
# Date:    2026-10-19 15:36:40 +0200
# Project: evoagent: Evolutionary agents in an evolving society
#
# SPDX-License-Identifier: MIT
#
"""
Fitness metrics.

Metrics are derived from run logs alone, so they can be recomputed from a
finished run without any backend call.
"""

import csv
import io
import json
import pathlib
from typing import TYPE_CHECKING, List, Sequence

import numpy
from pydantic import BaseModel, ConfigDict, Field

from evoagent.errors import ExportError, ReplayMismatch
from evoagent.runlog import RunLog

if TYPE_CHECKING:
    from evoagent.runlog import RunLogRecord

HEADER: "tuple[str, ...]" = (
    "method",
    "year",
    "mean_fitness",
    "std",
    "n_trials",
)
RADAR_HEADER: "tuple[str, ...]" = (
    "method",
    "trial",
    "generation",
    "agent_id",
    "mean_fitness",
)
LINEAGE_HEADER: "tuple[str, ...]" = (
    "trial",
    "year",
    "agent_id",
    "parent_a",
    "parent_b",
    "career",
)

METRICS_NAME: str = "metrics.csv"
BEST_METRICS_NAME: str = "metrics_best.csv"
RADAR_NAME: str = "radar.csv"
LINEAGE_NAME: str = "lineage.csv"


class MetricsRow(BaseModel):
    """The fitness of one method in one year, averaged over trials."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    method: str
    year: int
    mean_fitness: float = Field(ge=1.0, le=7.0)
    std: float = Field(ge=0.0)
    n_trials: int = Field(ge=1)

    def cells(self) -> "list[str]":
        """
        Get the CSV cells of the row.

        :return: the cells; floats are written in their shortest exact form
        """
        return [
            self.method,
            str(self.year),
            repr(self.mean_fitness),
            repr(self.std),
            str(self.n_trials),
        ]


class MetricsTable(BaseModel):
    """Rows ordered by method and year."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    rows: List[MetricsRow] = Field(default_factory=list)

    def __len__(self) -> int:
        """
        Get the number of rows.

        :return: the number of rows
        """
        return len(self.rows)

    def methods(self) -> "list[str]":
        """
        Get the methods present in the table.

        :return: the method names in table order
        """
        return list(dict.fromkeys(row.method for row in self.rows))

    def to_csv(self) -> str:
        """
        Serialize the table.

        :return: the CSV text with a header line
        """
        return csv_text(HEADER, [row.cells() for row in self.rows])

    @classmethod
    def from_csv(cls, text: str) -> "MetricsTable":
        """
        Parse a table.

        :param text: The CSV text
        :return: the table
        :raises ValueError: when the header or a row is invalid
        """
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != HEADER:
            raise ValueError(f"unexpected header {reader.fieldnames}")
        return cls(
            rows=[
                MetricsRow(
                    method=r["method"],
                    year=int(r["year"]),
                    mean_fitness=float(r["mean_fitness"]),
                    std=float(r["std"]),
                    n_trials=int(r["n_trials"]),
                )
                for r in reader
            ]
        )


def _scores_by_year(
    records: "Sequence[RunLogRecord]",
) -> "dict[int, list[int]]":
    scores: "dict[int, list[int]]" = {}
    for record in records:
        scores.setdefault(record.year, []).append(record.payload["score"])
    return scores


def trial_series(
    log: RunLog, trial: int, best: bool = False
) -> "dict[int, float]":
    """
    Get the fitness series of one trial.

    :param log: The run log
    :param trial: The trial number
    :param best: The flag selecting the best score instead of the mean
    :return: the population mean (or best) score keyed by year
    """
    scores = _scores_by_year(log.select("score", trial))
    return {
        year: float(max(values) if best else numpy.mean(values))
        for year, values in sorted(scores.items())
    }


def average_trials(
    logs: "Sequence[RunLog]", best: bool = False
) -> MetricsTable:
    """
    Average the fitness series over trials.

    :param logs: The run logs, one or more per method
    :param best: The flag selecting the best-score series
    :return: the table; the standard deviation is the population one
    """
    series: "dict[str, dict[int, list[float]]]" = {}
    for log in logs:
        years = series.setdefault(log.method, {})
        for trial in log.trials():
            for year, value in trial_series(log, trial, best).items():
                years.setdefault(year, []).append(value)
    rows = [
        MetricsRow(
            method=method,
            year=year,
            mean_fitness=float(numpy.mean(values)),
            std=float(numpy.std(values)),
            n_trials=len(values),
        )
        for method, years in series.items()
        for year, values in sorted(years.items())
    ]
    return MetricsTable(rows=rows)


def radar_rows(log: RunLog) -> "list[list[str]]":
    """
    Get the mean score of every agent in every generation.

    :param log: The run log
    :return: the rows (see `RADAR_HEADER`)
    """
    rows = []
    for trial in log.trials():
        scores: "dict[tuple[int, str], list[int]]" = {}
        for record in log.select("score", trial):
            key = (log.generation_of(record.year), record.payload["agent_id"])
            scores.setdefault(key, []).append(record.payload["score"])
        for (generation, agent_id), values in sorted(scores.items()):
            rows.append(
                [
                    log.method,
                    str(trial),
                    str(generation),
                    agent_id,
                    repr(float(numpy.mean(values))),
                ]
            )
    return rows


def lineage_rows(log: RunLog) -> "list[list[str]]":
    """
    Get the births of every trial.

    :param log: The run log
    :return: the rows (see `LINEAGE_HEADER`)
    """
    return [
        [
            str(record.trial),
            str(record.year),
            record.payload["agent_id"],
            record.payload.get("parent_a") or "",
            record.payload.get("parent_b") or "",
            record.payload["career"],
        ]
        for record in log.select("birth")
    ]


def write_export(path: pathlib.Path, text: str) -> pathlib.Path:
    """
    Write an export file, creating its directory.

    :param path: The path to the file
    :param text: The file contents
    :return: the path
    :raises ExportError: when the file cannot be written
    """
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc}") from exc
    return path


def csv_text(header: "Sequence[str]", rows: "list[list[str]]") -> str:
    """
    Format CSV rows.

    :param header: The header cells
    :param rows: The rows
    :return: the CSV text
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def export_metrics(
    table: MetricsTable, path: pathlib.Path, fmt: str = "csv"
) -> pathlib.Path:
    """
    Write the table to a file.

    :param table: The table
    :param path: The path to the file
    :param fmt: The format, ``csv`` or ``json``
    :return: the path
    :raises ExportError: when the table is empty, the format is unknown, or
        the file cannot be written
    """
    if not table.rows:
        raise ExportError("nothing to export")
    if fmt == "csv":
        return write_export(path, table.to_csv())
    if fmt == "json":
        data = [row.model_dump() for row in table.rows]
        return write_export(path, json.dumps(data, indent=2) + "\n")
    raise ExportError(f"unknown format {fmt!r}")


def export_run(
    logs: "Sequence[RunLog]", out_dir: pathlib.Path, fmt: str = "csv"
) -> "list[pathlib.Path]":
    """
    Write every export of a run.

    :param logs: The run logs
    :param out_dir: The output directory
    :param fmt: The format of the two metrics tables
    :return: the written paths
    :raises ExportError: when there are no scores or a file cannot be
        written

    Besides the population mean series this writes the best-score series,
    the per-agent generation scores and the lineage of every trial.
    """
    suffix = f".{fmt}"
    paths = [
        export_metrics(
            average_trials(logs),
            (out_dir / METRICS_NAME).with_suffix(suffix),
            fmt,
        ),
        export_metrics(
            average_trials(logs, best=True),
            (out_dir / BEST_METRICS_NAME).with_suffix(suffix),
            fmt,
        ),
    ]
    radar = [row for log in logs for row in radar_rows(log)]
    lineage = [row for log in logs for row in lineage_rows(log)]
    paths.append(
        write_export(out_dir / RADAR_NAME, csv_text(RADAR_HEADER, radar))
    )
    paths.append(
        write_export(out_dir / LINEAGE_NAME, csv_text(LINEAGE_HEADER, lineage))
    )
    return paths


def replay(run_dir: pathlib.Path, check: bool = False) -> MetricsTable:
    """
    Recompute the metrics of a finished run from its logs.

    :param run_dir: The run directory
    :param check: The flag to compare with the stored ``metrics.csv``
    :return: the recomputed table
    :raises ConfigError: when the run log cannot be loaded
    :raises ReplayMismatch: when the check fails
    """
    table = average_trials([RunLog.load(run_dir)])
    if check:
        stored_path = run_dir / METRICS_NAME
        try:
            stored = MetricsTable.from_csv(
                stored_path.read_text(encoding="utf-8")
            )
        except (OSError, ValueError) as exc:
            raise ReplayMismatch(f"cannot read {stored_path}: {exc}") from exc
        if stored != table:
            raise ReplayMismatch(f"{stored_path} differs from the run log")
    return table
