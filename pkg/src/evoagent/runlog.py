#
# File:    ./src/evoagent/runlog.py
# Author:  Jiří Kučera <sanczes AT gmail.com>
# Date:    2026-10-19 15:10:02 +0200
# Project: evoagent: Evolutionary agents in an evolving society
#
# SPDX-License-Identifier: MIT
#
"""
Run logs.

A run log is the append-only record of everything that happened during the
trials of a run. Each trial writes its records to ``runlog.jsonl`` in its
own directory, one JSON object per line, next to ``config.snapshot``.
"""

import json
import pathlib
from typing import Any, Dict, Literal, TextIO

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from evoagent.errors import ConfigError

EventName = Literal[
    "action",
    "compression",
    "statement",
    "score",
    "feedback",
    "crossover",
    "mutation",
    "elimination",
    "birth",
    "norm_set",
    "questionnaire_set",
    "best_agent",
]

RUNLOG_NAME: str = "runlog.jsonl"
SNAPSHOT_NAME: str = "config.snapshot"
TRIAL_PREFIX: str = "trial-"


class RunLogRecord(BaseModel):
    """One event of a trial."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    trial: int = Field(ge=1)
    year: int
    seq: int = Field(ge=0)
    event: EventName
    payload: Dict[str, Any] = Field(default_factory=dict)

    def to_line(self) -> str:
        """
        Serialize the record.

        :return: the JSON line with sorted keys
        """
        data = self.model_dump(mode="json")
        return json.dumps(data, sort_keys=True, ensure_ascii=False) + "\n"


class RunLog:
    """The records of all trials of a run."""

    __slots__ = ("method", "start_year", "generation_years", "records")

    def __init__(
        self,
        method: str = "evolutionary",
        start_year: int = 2000,
        generation_years: int = 10,
        records: "list[RunLogRecord] | None" = None,
    ) -> None:
        """
        Initialize the log.

        :param method: The method of the run
        :param start_year: The first simulated year
        :param generation_years: The length of a generation
        :param records: The initial records
        """
        self.method: str = method
        self.start_year: int = start_year
        self.generation_years: int = generation_years
        self.records: "list[RunLogRecord]" = list(records or [])

    def __len__(self) -> int:
        """
        Get the number of records.

        :return: the number of records
        """
        return len(self.records)

    def append(self, record: RunLogRecord) -> None:
        """
        Append a record.

        :param record: The record
        """
        self.records.append(record)

    def trials(self) -> "list[int]":
        """
        Get the trial numbers present in the log.

        :return: the sorted trial numbers
        """
        return sorted({record.trial for record in self.records})

    def select(
        self, event: "str | None" = None, trial: "int | None" = None
    ) -> "list[RunLogRecord]":
        """
        Select records.

        :param event: The event name (any if `None`)
        :param trial: The trial number (any if `None`)
        :return: the matching records in log order
        """
        return [
            r
            for r in self.records
            if (event is None or r.event == event)
            and (trial is None or r.trial == trial)
        ]

    def of_trial(self, trial: int) -> "RunLog":
        """
        Get the log of one trial.

        :param trial: The trial number
        :return: the log restricted to the trial
        """
        return RunLog(
            self.method,
            self.start_year,
            self.generation_years,
            self.select(trial=trial),
        )

    def generation_of(self, year: int) -> int:
        """
        Get the generation start year of *year*.

        :param year: The year
        :return: the generation start year
        """
        offset = (year - self.start_year) % self.generation_years
        return year - offset

    @classmethod
    def load(cls, run_dir: "pathlib.Path") -> "RunLog":
        """
        Load the run log of a finished run.

        :param run_dir: The run directory holding ``trial-*`` directories
        :return: the log
        :raises ConfigError: when the directory holds no readable trial

        Entries other than ``trial-<number>`` directories are skipped.
        """
        numbered: "dict[int, pathlib.Path]" = {}
        for path in run_dir.glob(f"{TRIAL_PREFIX}*"):
            suffix = path.name[len(TRIAL_PREFIX) :]
            if suffix.isascii() and suffix.isdigit() and path.is_dir():
                numbered[int(suffix)] = path
        trial_dirs = [numbered[trial] for trial in sorted(numbered)]
        if not trial_dirs:
            raise ConfigError(f"no trials found in {run_dir}")
        try:
            snapshot = json.loads(
                (trial_dirs[0] / SNAPSHOT_NAME).read_text(encoding="utf-8")
            )
            config = snapshot["config"]
            log = cls(
                config["method"],
                config["clock"]["start_year"],
                config["clock"]["generation_years"],
            )
            for trial_dir in trial_dirs:
                with open(trial_dir / RUNLOG_NAME, encoding="utf-8") as f:
                    for line in f:
                        if line.strip():
                            log.append(RunLogRecord.model_validate_json(line))
        except (OSError, ValueError, KeyError, ValidationError) as exc:
            raise ConfigError(f"cannot load run log: {exc}") from exc
        return log


class TrialRecorder:
    """
    Writer of the records of one trial.

    Every record is written and flushed as soon as it is emitted, so an
    aborted trial leaves its partial log behind.
    """

    __slots__ = ("log", "trial", "path", "__seq", "__stream")

    def __init__(self, log: RunLog, trial: int, path: "pathlib.Path") -> None:
        """
        Initialize the recorder.

        :param log: The run log collecting the records
        :param trial: The trial number
        :param path: The path to the trial log file (truncated)
        """
        self.log: RunLog = log
        self.trial: int = trial
        self.path: pathlib.Path = path
        self.__seq: int = 0
        self.__stream: "TextIO | None" = None

    def __enter__(self) -> "TrialRecorder":
        """
        Open the log file.

        :return: the recorder
        """
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.__stream = open(self.path, mode="w", encoding="utf-8")
        return self

    def __exit__(self, *exc_info: object) -> None:
        """
        Close the log file.

        :param exc_info: The exception information
        """
        self.close()

    def close(self) -> None:
        """Close the log file."""
        if self.__stream is not None:
            self.__stream.close()
            self.__stream = None

    def emit(
        self, year: int, event: EventName, **payload: Any
    ) -> RunLogRecord:
        """
        Record an event.

        :param year: The year of the event
        :param event: The event name
        :param payload: The event data
        :return: the record
        """
        record = RunLogRecord(
            trial=self.trial,
            year=year,
            seq=self.__seq,
            event=event,
            payload=payload,
        )
        self.__seq += 1
        self.log.append(record)
        if self.__stream is not None:
            self.__stream.write(record.to_line())
            self.__stream.flush()
        return record
