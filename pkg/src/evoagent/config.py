#
# File:    ./src/evoagent/config.py
# Author:  Jiří Kučera <sanczes AT gmail.com>
# Date:    2026-10-19 11:34:08 +0200
# Project: evoagent: Evolutionary agents in an evolving society
#
# SPDX-License-Identifier: MIT
#
"""
Experiment configuration.

All models reject unknown keys. Configuration files are JSON documents
validated into `ExperimentConfig`.
"""

import fractions
import json
import math
from typing import TYPE_CHECKING, Literal, Optional

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    model_validator,
)

from evoagent.backend import Sampling
from evoagent.errors import ConfigError

if TYPE_CHECKING:
    import pathlib

ProviderName = Literal[
    "scripted", "openai", "gemini", "together", "local", "interactive"
]
MethodName = Literal["evolutionary", "react", "reflexion", "frozen"]


def portion(fraction: float, count: int) -> fractions.Fraction:
    """
    Take a fraction of a count exactly.

    :param fraction: The fraction
    :param count: The count
    :return: the exact product of the decimal fraction and the count

    The fraction is taken as the decimal it prints as: ``0.58`` of 50 is 29.
    """
    return fractions.Fraction(repr(fraction)) * count


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class BackendSpec(_Model):
    """Chat-completion backend configuration."""

    provider: ProviderName = "scripted"
    model: str = ""
    rules: Optional[str] = None
    cache: bool = False
    max_attempts: int = Field(default=5, ge=1)
    backoff: float = Field(default=1.0, ge=0.0)
    temperature: float = Field(default=0.0, ge=0.0)
    max_tokens: int = Field(default=512, gt=0)

    def sampling(self) -> Sampling:
        """
        Get the sampling parameters of this backend.

        :return: the sampling parameters
        """
        return Sampling(
            temperature=self.temperature,
            max_tokens=self.max_tokens,
            model_tag=self.model,
        )


class EvolutionConfig(_Model):
    """
    Survival-of-the-fittest parameters.

    ``replace_fraction`` is the share of the population eliminated (and
    replaced by offspring) after every timestep, ``norm_fraction`` is the
    share of top agents whose strategies seed norm evolution, and
    ``mutation_rate`` is the per-attribute mutation probability.
    """

    population_size: int = Field(default=10, gt=0)
    replace_fraction: float = Field(default=0.5, gt=0.0, lt=1.0)
    norm_fraction: float = Field(default=0.3, gt=0.0, le=1.0)
    mutation_rate: float = Field(default=0.8, ge=0.0, le=1.0)
    rng_seed: int = 0
    fitness_proportional: bool = False

    @property
    def eliminated_count(self) -> int:
        """
        Get the number of agents eliminated per evolution step.

        :return: ``floor(p * N)``
        """
        return math.floor(portion(self.replace_fraction, self.population_size))

    @property
    def parent_count(self) -> int:
        """
        Get the size of the reproducing pool.

        :return: ``ceil(p * N)``
        """
        return math.ceil(portion(self.replace_fraction, self.population_size))


class ClockConfig(_Model):
    """Simulation time settings."""

    start_year: int = 2000
    end_year: int = 2050
    step_years: int = Field(default=2, gt=0)
    generation_years: int = Field(default=10, gt=0)
    evaluate_final: bool = False

    @model_validator(mode="after")
    def _check(self) -> "ClockConfig":
        if self.start_year > self.end_year:
            raise ValueError("start_year must not exceed end_year")
        if self.generation_years % self.step_years:
            raise ValueError("step_years must divide generation_years")
        return self


class AgentConfig(_Model):
    """Agent behavior settings."""

    compression_threshold: int = Field(default=10, gt=0)
    actions_per_step: int = Field(default=1, gt=0)
    unique_careers: bool = True
    baseline_window: int = Field(default=3, gt=0)


def _agent_backend() -> BackendSpec:
    return BackendSpec(temperature=0.7)


class ExperimentConfig(_Model):
    """The complete configuration of an experiment."""

    method: MethodName = "evolutionary"
    agent_backend: BackendSpec = Field(default_factory=_agent_backend)
    observer_backend: BackendSpec = Field(default_factory=BackendSpec)
    generator_backend: Optional[BackendSpec] = None
    evolution: EvolutionConfig = Field(default_factory=EvolutionConfig)
    clock: ClockConfig = Field(default_factory=ClockConfig)
    agent: AgentConfig = Field(default_factory=AgentConfig)
    schedule_path: Optional[str] = None
    attributes_path: Optional[str] = None
    trials: int = Field(default=3, ge=1)
    output_dir: str = "runs"
    workers: int = Field(default=4, ge=1)
    token_budget: Optional[int] = Field(default=2_000_000, gt=0)
    max_failure_fraction: float = Field(default=0.2, ge=0.0, le=1.0)

    @property
    def generator(self) -> BackendSpec:
        """
        Get the questionnaire and norm generator backend.

        :return: the generator spec, the observer spec when unset
        """
        return self.generator_backend or self.observer_backend

    @classmethod
    def from_json(
        cls, text: str, source: str = "<string>"
    ) -> "ExperimentConfig":
        """
        Validate a JSON document.

        :param text: The JSON text
        :param source: The name of the source used in error messages
        :return: the configuration
        :raises ConfigError: when the document is invalid
        """
        try:
            return cls.model_validate_json(text)
        except ValidationError as exc:
            raise ConfigError(f"{source}: {exc}") from exc

    @classmethod
    def load(cls, path: "pathlib.Path") -> "ExperimentConfig":
        """
        Load the configuration from a JSON file.

        :param path: The path to the file
        :return: the configuration
        :raises ConfigError: when the file cannot be read or is invalid
        """
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
        return cls.from_json(text, str(path))

    def with_overrides(
        self,
        seed: "int | None" = None,
        method: "str | None" = None,
        population: "int | None" = None,
        replace: "float | None" = None,
        mutation: "float | None" = None,
        trials: "int | None" = None,
        output: "str | None" = None,
    ) -> "ExperimentConfig":
        """
        Apply command line overrides.

        :param seed: The random seed
        :param method: The method name
        :param population: The population size
        :param replace: The replacement fraction
        :param mutation: The mutation rate
        :param trials: The number of trials
        :param output: The output directory
        :return: a new validated configuration
        :raises ConfigError: when an override is invalid
        """
        data = self.model_dump()
        evolution = data["evolution"]
        for key, value in (
            ("rng_seed", seed),
            ("population_size", population),
            ("replace_fraction", replace),
            ("mutation_rate", mutation),
        ):
            if value is not None:
                evolution[key] = value
        for key, value in (
            ("method", method),
            ("trials", trials),
            ("output_dir", output),
        ):
            if value is not None:
                data[key] = value
        try:
            return type(self).model_validate(data)
        except ValidationError as exc:
            raise ConfigError(f"invalid override: {exc}") from exc

    def snapshot(self, extra: "dict[str, object] | None" = None) -> str:
        """
        Dump the canonical JSON form of the configuration.

        :param extra: Additional top-level entries (template versions)
        :return: the JSON text with sorted keys
        """
        data: "dict[str, object]" = {"config": self.model_dump(mode="json")}
        data.update(extra or {})
        return json.dumps(data, sort_keys=True, indent=2) + "\n"
