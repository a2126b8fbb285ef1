#
# File:    ./tests/unit/test_cli.py
# Author:  Jiří Kučera <sanczes AT gmail.com>
# Date:    2026-10-19 19:46:55 +0200
# Project: evoagent: Evolutionary agents in an evolving society
#
# SPDX-License-Identifier: MIT
#
"""Test `evoagent.cli` module."""

import argparse
import io
import json
import pathlib
import tempfile
import unittest.mock

from vutils.testing.testcase import TestCase

from evoagent.cli import (
    EvoAgentApp,
    comma_list,
    load_config,
    load_run_config,
    main,
)
from evoagent.errors import ConfigError
from evoagent.logging import get_logger, set_logger
from evoagent.metrics import (
    BEST_METRICS_NAME,
    LINEAGE_NAME,
    METRICS_NAME,
    RADAR_NAME,
)

from .common import ModulePatcher, make_config


def write_config(directory, **overrides):
    """
    Write a small configuration file.

    :param directory: The directory
    :param overrides: Top-level entries replacing the defaults
    :return: the path
    """
    path = pathlib.Path(directory) / "config.json"
    config = make_config(clock={"end_year": 2010}, **overrides)
    path.write_text(config.model_dump_json(), encoding="utf-8")
    return path


class HelpersTestCase(TestCase):
    """Test case for the configuration helpers."""

    __slots__ = ()

    def test_comma_list(self):
        """Test parsing comma separated lists."""
        self.assertEqual(comma_list(int)("10, 20,"), [10, 20])
        self.assertEqual(comma_list(float)("0.2"), [0.2])
        for text in ("ten", ",", ""):
            with self.subTest(text=text):
                with self.assertRaises(argparse.ArgumentTypeError):
                    comma_list(int)(text)

    def test_load_config(self):
        """Test loading the configuration or the defaults."""
        self.assertEqual(load_config(None).method, "evolutionary")
        with tempfile.TemporaryDirectory() as tmp:
            config = load_config(write_config(tmp, method="frozen"))
            with self.assertRaises(ConfigError):
                load_config(pathlib.Path(tmp) / "missing.json")

        self.assertEqual(config.method, "frozen")
        self.assertEqual(config.clock.end_year, 2010)

    def test_load_run_config(self):
        """Test that a run without snapshots is reported."""
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(ConfigError):
                load_run_config(pathlib.Path(tmp))


class EvoAgentAppTestCase(TestCase):
    """Test case for `EvoAgentApp`."""

    __slots__ = ("previous",)

    def setUp(self):
        """Remember the process-wide logger."""
        self.previous = get_logger()

    def tearDown(self):
        """Restore the process-wide logger."""
        set_logger(self.previous)

    def invoke(self, *argv):
        """
        Run the application.

        :param argv: The arguments
        :return: the exit code, the output and the error output
        """
        out, err = io.StringIO(), io.StringIO()
        app = EvoAgentApp()
        app.set_streams(out, err)
        ecode = app.run(["--no-color", *argv])
        return ecode, out.getvalue(), err.getvalue()

    def test_workflow(self):
        """Test running, exporting and evaluating a small experiment."""
        with tempfile.TemporaryDirectory() as tmp:
            config = write_config(tmp)
            run_dir = pathlib.Path(tmp) / "run"
            dataset = pathlib.Path(tmp) / "prompts.json"
            dataset.write_text(
                json.dumps(["Why?", {"prompt": "How?"}]), encoding="utf-8"
            )

            ran = self.invoke(
                "run", "--config", str(config), "--output", str(run_dir)
            )
            loaded = load_run_config(run_dir)
            exported = self.invoke(
                "export", str(run_dir), "--output", str(run_dir / "x")
            )
            exported_json = self.invoke(
                "export", str(run_dir), "--format", "json"
            )
            replayed = self.invoke("replay", str(run_dir), "--check")
            evaluated = self.invoke(
                "eval-downstream",
                str(run_dir),
                "--dataset",
                str(dataset),
                "--samples",
                "2",
            )
            stored = (run_dir / METRICS_NAME).read_text(encoding="utf-8")

        self.assertEqual(ran[0], EvoAgentApp.EXIT_SUCCESS)
        self.assertTrue(ran[1].endswith(f"records written to {run_dir}\n"))
        self.assertIn(
            "INFO: [evolutionary trial 1] started with seed 0", ran[2]
        )
        self.assertEqual(loaded.clock.end_year, 2010)
        self.assertEqual(loaded.evolution.population_size, 4)

        self.assertEqual(exported[0], EvoAgentApp.EXIT_SUCCESS)
        self.assertEqual(
            [pathlib.Path(p).name for p in exported[1].splitlines()],
            [METRICS_NAME, BEST_METRICS_NAME, RADAR_NAME, LINEAGE_NAME],
        )
        self.assertEqual(
            [pathlib.Path(p).name for p in exported_json[1].splitlines()][:2],
            ["metrics.json", "metrics_best.json"],
        )

        self.assertEqual(replayed[0], EvoAgentApp.EXIT_SUCCESS)
        self.assertEqual(replayed[1], stored)

        self.assertEqual(evaluated[0], EvoAgentApp.EXIT_SUCCESS)
        result = json.loads(evaluated[1])
        self.assertEqual(result["dataset"], "prompts.json")
        self.assertEqual(result["ratings"], [5, 5])
        self.assertEqual(result["alignment"], 4.0)
        self.assertEqual(result["overall"], 4.5)

    def test_overrides(self):
        """Test that the command line overrides the configuration."""
        with tempfile.TemporaryDirectory() as tmp:
            config = write_config(tmp)
            run_dir = pathlib.Path(tmp) / "run"
            ecode, _, _ = self.invoke(
                "run",
                "--config",
                str(config),
                "--output",
                str(run_dir),
                "--method",
                "frozen",
                "--seed",
                "9",
                "-N",
                "3",
            )
            loaded = load_run_config(run_dir)

        self.assertEqual(ecode, EvoAgentApp.EXIT_SUCCESS)
        self.assertEqual(loaded.method, "frozen")
        self.assertEqual(loaded.evolution.rng_seed, 9)
        self.assertEqual(loaded.evolution.population_size, 3)

    def test_gen_questionnaire(self):
        """Test generating a questionnaire for a norm."""
        ecode, out, _ = self.invoke(
            "gen-questionnaire", "Share your knowledge.", "--year", "2030"
        )

        self.assertEqual(ecode, EvoAgentApp.EXIT_SUCCESS)
        items = json.loads(out)
        self.assertEqual(len(items), 10)
        self.assertIn("Education Contribution", items)

    def test_sweep(self):
        """Test running a grid of mutation rates."""
        with tempfile.TemporaryDirectory() as tmp:
            config = write_config(tmp)
            out_dir = pathlib.Path(tmp) / "sweep"
            ecode, out, _ = self.invoke(
                "sweep",
                "--config",
                str(config),
                "--output",
                str(out_dir),
                "--rates",
                "0.0,1.0",
            )
            rows = (out_dir / "sweep.csv").read_text(encoding="utf-8")

        self.assertEqual(ecode, EvoAgentApp.EXIT_SUCCESS)
        self.assertEqual(
            [pathlib.Path(p).name for p in out.splitlines()],
            ["N4-m0.0", "N4-m1.0"],
        )
        self.assertEqual(len(rows.splitlines()), 1 + 2 * 5)

    def test_errors(self):
        """Test the exit codes of invalid invocations."""
        with tempfile.TemporaryDirectory() as tmp:
            missing = str(pathlib.Path(tmp) / "missing.json")
            no_command = self.invoke()
            bad_option = self.invoke("run", "--trials", "many")
            bad_config = self.invoke("run", "--config", missing)
            no_run = self.invoke("replay", tmp)

        self.assertEqual(no_command[0], EvoAgentApp.EXIT_USAGE)
        self.assertIn("no command given", no_command[2])
        self.assertEqual(bad_option[0], EvoAgentApp.EXIT_USAGE)
        self.assertEqual(bad_config[0], EvoAgentApp.EXIT_FAILURE)
        self.assertIn("missing.json", bad_config[2])
        self.assertEqual(no_run[0], EvoAgentApp.EXIT_FAILURE)


class MainTestCase(TestCase):
    """Test case for `main`."""

    __slots__ = ()

    def test_main(self):
        """Test that `main` exits with the application exit code."""
        patcher = ModulePatcher()
        previous = get_logger()

        try:
            with patcher.patch(), unittest.mock.patch(
                "sys.argv", ["evoagent"]
            ):
                main()
        finally:
            set_logger(previous)
        self.assert_called_with(patcher.sys_exit, EvoAgentApp.EXIT_USAGE)
