#
# File:    ./tests/unit/test_config.py
# Author:  Jiří Kučera <sanczes AT gmail.com>
# Date:    2026-10-19 17:55:02 +0200
# Project: evoagent: Evolutionary agents in an evolving society
#
# SPDX-License-Identifier: MIT
#
"""Test `evoagent.config` module."""

import json
import pathlib
import tempfile

from vutils.testing.testcase import TestCase

from evoagent.config import (
    BackendSpec,
    ClockConfig,
    EvolutionConfig,
    ExperimentConfig,
)
from evoagent.errors import ConfigError


class EvolutionConfigTestCase(TestCase):
    """Test case for `EvolutionConfig`."""

    __slots__ = ()

    def test_counts(self):
        """Test the eliminated and parent counts."""
        config = EvolutionConfig(population_size=10, replace_fraction=0.5)
        self.assertEqual(config.eliminated_count, 5)
        self.assertEqual(config.parent_count, 5)

        config = EvolutionConfig(population_size=10, replace_fraction=0.25)
        self.assertEqual(config.eliminated_count, 2)
        self.assertEqual(config.parent_count, 3)

    def test_counts_exact(self):
        """Test that the counts are taken from the decimal fraction."""
        config = EvolutionConfig(population_size=50, replace_fraction=0.58)
        self.assertEqual(config.eliminated_count, 29)
        self.assertEqual(config.parent_count, 29)

        config = EvolutionConfig(population_size=50, replace_fraction=0.14)
        self.assertEqual(config.eliminated_count, 7)
        self.assertEqual(config.parent_count, 7)

        for size in range(1, 101):
            for percent in range(1, 100):
                config = EvolutionConfig(
                    population_size=size, replace_fraction=percent / 100
                )
                product = percent * size
                with self.subTest(size=size, percent=percent):
                    self.assertEqual(config.eliminated_count, product // 100)
                    self.assertEqual(config.parent_count, -(-product // 100))

    def test_defaults(self):
        """Test the default evolution parameters."""
        config = EvolutionConfig()

        self.assertEqual(config.population_size, 10)
        self.assertEqual(config.replace_fraction, 0.5)
        self.assertEqual(config.mutation_rate, 0.8)
        self.assertEqual(config.norm_fraction, 0.3)


class ClockConfigTestCase(TestCase):
    """Test case for `ClockConfig`."""

    __slots__ = ()

    def test_invalid(self):
        """Test that inconsistent clocks are rejected."""
        with self.assertRaises(ValueError):
            ClockConfig(start_year=2010, end_year=2000)
        with self.assertRaises(ValueError):
            ClockConfig(step_years=3)


class ExperimentConfigTestCase(TestCase):
    """Test case for `ExperimentConfig`."""

    __slots__ = ()

    def test_from_json(self):
        """Test validating configuration documents."""
        config = ExperimentConfig.from_json(
            '{"method": "react", "evolution": {"population_size": 6}}'
        )

        self.assertEqual(config.method, "react")
        self.assertEqual(config.evolution.population_size, 6)
        for text in (
            '{"unknown": 1}',
            '{"method": "genetic"}',
            '{"evolution": {"replace_fraction": 1.0}}',
            "not json",
        ):
            with self.subTest(text=text):
                with self.assertRaises(ConfigError):
                    ExperimentConfig.from_json(text)

    def test_load(self):
        """Test loading a configuration file."""
        with tempfile.TemporaryDirectory() as tmp:
            path = pathlib.Path(tmp) / "config.json"
            path.write_text('{"trials": 2}', encoding="utf-8")
            config = ExperimentConfig.load(path)
            with self.assertRaises(ConfigError):
                ExperimentConfig.load(pathlib.Path(tmp) / "missing.json")

        self.assertEqual(config.trials, 2)

    def test_generator(self):
        """Test that the generator falls back to the observer."""
        config = ExperimentConfig()
        self.assertIs(config.generator, config.observer_backend)

        spec = BackendSpec(temperature=0.3)
        config = ExperimentConfig(generator_backend=spec)
        self.assertEqual(config.generator, spec)

    def test_agent_sampling(self):
        """Test the default sampling of agents and the observer."""
        config = ExperimentConfig()

        self.assertEqual(config.agent_backend.sampling().temperature, 0.7)
        self.assertEqual(config.observer_backend.sampling().temperature, 0.0)

    def test_with_overrides(self):
        """Test applying command line overrides."""
        config = ExperimentConfig().with_overrides(
            seed=7,
            method="frozen",
            population=20,
            replace=0.3,
            mutation=0.2,
            trials=5,
            output="out",
        )

        self.assertEqual(config.evolution.rng_seed, 7)
        self.assertEqual(config.method, "frozen")
        self.assertEqual(config.evolution.population_size, 20)
        self.assertEqual(config.evolution.replace_fraction, 0.3)
        self.assertEqual(config.evolution.mutation_rate, 0.2)
        self.assertEqual(config.trials, 5)
        self.assertEqual(config.output_dir, "out")
        self.assertEqual(
            ExperimentConfig().with_overrides(), ExperimentConfig()
        )
        with self.assertRaises(ConfigError):
            ExperimentConfig().with_overrides(mutation=1.5)

    def test_snapshot(self):
        """Test the canonical snapshot."""
        config = ExperimentConfig()
        data = json.loads(config.snapshot({"seed": 3}))

        self.assertEqual(data["seed"], 3)
        self.assertEqual(
            ExperimentConfig.model_validate(data["config"]), config
        )
        self.assertEqual(config.snapshot(), ExperimentConfig().snapshot())
