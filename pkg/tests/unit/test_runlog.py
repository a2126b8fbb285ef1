#
# File:    ./tests/unit/test_runlog.py
# Author:  Jiří Kučera <sanczes AT gmail.com>
# Date:    2026-10-19 18:42:26 +0200
# Project: evoagent: Evolutionary agents in an evolving society
#
# SPDX-License-Identifier: MIT
#
"""Test `evoagent.runlog` module."""

import json
import pathlib
import tempfile

from vutils.testing.testcase import TestCase

from evoagent.config import ExperimentConfig
from evoagent.errors import ConfigError
from evoagent.runlog import (
    RUNLOG_NAME,
    SNAPSHOT_NAME,
    RunLog,
    RunLogRecord,
    TrialRecorder,
)


def record(trial, year, seq, event="score", **payload):
    """
    Make a record.

    :param trial: The trial number
    :param year: The year
    :param seq: The sequence number
    :param event: The event name
    :param payload: The event data
    :return: the record
    """
    return RunLogRecord(
        trial=trial, year=year, seq=seq, event=event, payload=payload
    )


class RunLogRecordTestCase(TestCase):
    """Test case for `RunLogRecord`."""

    __slots__ = ()

    def test_to_line(self):
        """Test the canonical JSON line."""
        line = record(1, 2000, 0, agent_id="00000", score=4).to_line()

        self.assertTrue(line.endswith("\n"))
        self.assertEqual(
            line,
            '{"event": "score", "payload": {"agent_id": "00000", '
            '"score": 4}, "seq": 0, "trial": 1, "year": 2000}\n',
        )
        self.assertEqual(
            RunLogRecord.model_validate_json(line),
            record(1, 2000, 0, agent_id="00000", score=4),
        )

    def test_invalid(self):
        """Test that unknown events and trial zero are rejected."""
        with self.assertRaises(ValueError):
            record(1, 2000, 0, event="explosion")
        with self.assertRaises(ValueError):
            record(0, 2000, 0)


class RunLogTestCase(TestCase):
    """Test case for `RunLog`."""

    __slots__ = ()

    def make_log(self):
        """
        Make a log of two trials.

        :return: the log
        """
        return RunLog(
            records=[
                record(2, 2000, 0),
                record(1, 2000, 0),
                record(1, 2000, 1, event="feedback"),
                record(1, 2002, 2),
            ]
        )

    def test_select(self):
        """Test selecting records by event and trial."""
        log = self.make_log()

        self.assertEqual(len(log), 4)
        self.assertEqual(log.trials(), [1, 2])
        self.assertEqual(len(log.select("score")), 3)
        self.assertEqual(len(log.select("score", 1)), 2)
        self.assertEqual(len(log.select(trial=2)), 1)
        self.assertEqual(log.select("birth"), [])

    def test_of_trial(self):
        """Test restricting the log to one trial."""
        log = RunLog("frozen", 1990, 5, self.make_log().records)

        trial = log.of_trial(1)

        self.assertEqual(trial.method, "frozen")
        self.assertEqual(trial.start_year, 1990)
        self.assertEqual(trial.generation_years, 5)
        self.assertEqual(trial.trials(), [1])
        self.assertEqual(len(trial), 3)

    def test_generation_of(self):
        """Test mapping years to generation starts."""
        log = RunLog()

        self.assertEqual(log.generation_of(2000), 2000)
        self.assertEqual(log.generation_of(2008), 2000)
        self.assertEqual(log.generation_of(2010), 2010)
        self.assertEqual(log.generation_of(2050), 2050)


class TrialRecorderTestCase(TestCase):
    """Test case for `TrialRecorder` and `RunLog.load`."""

    __slots__ = ()

    def write_trial(self, run_dir, trial, config):
        """
        Write the files of one trial.

        :param run_dir: The run directory
        :param trial: The trial number
        :param config: The configuration
        :return: the recorded log
        """
        log = RunLog()
        trial_dir = run_dir / f"trial-{trial}"
        with TrialRecorder(log, trial, trial_dir / RUNLOG_NAME) as recorder:
            recorder.emit(2000, "norm_set", text="Share.")
            recorder.emit(2000, "score", agent_id="00000", score=trial)
        (trial_dir / SNAPSHOT_NAME).write_text(
            config.snapshot({"trial": trial}), encoding="utf-8"
        )
        return log

    def test_emit(self):
        """Test numbering and writing the records."""
        with tempfile.TemporaryDirectory() as tmp:
            path = pathlib.Path(tmp) / "trial-1" / RUNLOG_NAME
            log = RunLog()
            recorder = TrialRecorder(log, 1, path)
            with recorder:
                first = recorder.emit(2000, "birth", agent_id="00000")
                second = recorder.emit(2002, "action", plan="read")
                lines = path.read_text(encoding="utf-8").splitlines()
            recorder.close()
            late = recorder.emit(2004, "action", plan="late")
            final = path.read_text(encoding="utf-8").splitlines()

        self.assertEqual((first.seq, second.seq, late.seq), (0, 1, 2))
        self.assertEqual(log.records, [first, second, late])
        self.assertEqual(len(lines), 2)
        self.assertEqual(json.loads(lines[1])["payload"], {"plan": "read"})
        self.assertEqual(len(final), 2)

    def test_load(self):
        """Test loading the trials of a run in trial order."""
        config = ExperimentConfig(method="react", trials=2)
        with tempfile.TemporaryDirectory() as tmp:
            run_dir = pathlib.Path(tmp)
            for trial in (2, 1, 10):
                self.write_trial(run_dir, trial, config)
            (run_dir / "trial-x").mkdir()
            (run_dir / "trial-").mkdir()
            (run_dir / "trial-3").write_text("", encoding="utf-8")
            log = RunLog.load(run_dir)

        self.assertEqual(log.method, "react")
        self.assertEqual(log.start_year, 2000)
        self.assertEqual(log.generation_years, 10)
        self.assertEqual(log.trials(), [1, 2, 10])
        self.assertEqual(
            [r.payload["score"] for r in log.select("score")], [1, 2, 10]
        )

    def test_load_errors(self):
        """Test that missing or broken runs are reported."""
        with tempfile.TemporaryDirectory() as tmp:
            run_dir = pathlib.Path(tmp)
            with self.assertRaises(ConfigError):
                RunLog.load(run_dir)
            (run_dir / "trial-x").mkdir()
            with self.assertRaises(ConfigError):
                RunLog.load(run_dir)
            self.write_trial(run_dir, 1, ExperimentConfig())
            with open(
                run_dir / "trial-1" / RUNLOG_NAME, "a", encoding="utf-8"
            ) as stream:
                stream.write("{broken\n")
            with self.assertRaises(ConfigError):
                RunLog.load(run_dir)
            (run_dir / "trial-1" / SNAPSHOT_NAME).unlink()
            with self.assertRaises(ConfigError):
                RunLog.load(run_dir)
