#
# File:    ./src/evoagent/society.py
# Author:  Jiří Kučera <sanczes AT gmail.com>
# Date:    2026-10-19 12:05:51 +0200
# Project: evoagent: Evolutionary agents in an evolving society
#
# SPDX-License-Identifier: MIT
#
"""
The evolving society.

Simulation clock, the world of locations, the per-generation social norms
(read from a schedule or evolved from the best agents' strategies), and the
questionnaires used to evaluate the agents.
"""

import json
import pathlib
import re
from typing import TYPE_CHECKING, Dict, List, Literal, NamedTuple, Set

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    model_validator,
)

from evoagent.assets import asset_path
from evoagent.errors import (
    ClockExhausted,
    ConfigError,
    EmptyNormText,
    EmptyStrategies,
    MalformedQuestionnaire,
    MissingNorm,
)
from evoagent.logging import get_logger
from evoagent.prompts import load_template

if TYPE_CHECKING:
    from evoagent.agent import Trajectory
    from evoagent.backend import Backend, Sampling
    from evoagent.config import ClockConfig

QUESTIONNAIRE_SIZE: int = 10
QUESTIONNAIRE_ATTEMPTS: int = 3


class Clock(BaseModel):
    """Simulation clock."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    year: int = 2000
    start_year: int = 2000
    end_year: int = 2050
    step_years: int = Field(default=2, gt=0)
    generation_years: int = Field(default=10, gt=0)

    @model_validator(mode="after")
    def _check(self) -> "Clock":
        if not self.start_year <= self.year <= self.end_year:
            raise ValueError("year out of range")
        if self.generation_years % self.step_years:
            raise ValueError("step_years must divide generation_years")
        return self

    @classmethod
    def from_config(cls, config: "ClockConfig") -> "Clock":
        """
        Make the clock at the start of the configured range.

        :param config: The clock settings
        :return: the clock
        """
        return cls(
            year=config.start_year,
            start_year=config.start_year,
            end_year=config.end_year,
            step_years=config.step_years,
            generation_years=config.generation_years,
        )

    @property
    def generation_start(self) -> int:
        """
        Get the start year of the current generation.

        :return: the greatest generation start not after `year`
        """
        offset = (self.year - self.start_year) % self.generation_years
        return self.year - offset

    @property
    def at_boundary(self) -> bool:
        """
        Test whether the current year starts a generation.

        :return: `True` at a generation boundary
        """
        return self.year == self.generation_start

    def generation_starts(self) -> "list[int]":
        """
        Get all generation start years of the range.

        :return: the start years including a terminal boundary
        """
        return list(
            range(self.start_year, self.end_year + 1, self.generation_years)
        )


def tick(clock: Clock) -> "tuple[Clock, bool]":
    """
    Advance the clock by one step.

    :param clock: The clock
    :return: the advanced clock and the generation boundary flag
    :raises ClockExhausted: when the step would pass the end year
    """
    year = clock.year + clock.step_years
    if clock.year >= clock.end_year or year > clock.end_year:
        raise ClockExhausted(f"cannot advance past {clock.end_year}")
    advanced = clock.model_copy(update={"year": year})
    return advanced, advanced.at_boundary


class Location(BaseModel):
    """A place of the world and the agents currently there."""

    model_config = ConfigDict(extra="forbid")

    index: int = Field(ge=0)
    name: str = Field(min_length=1)
    description: str = ""
    occupants: Set[str] = Field(default_factory=set)


class WorldSnapshot(NamedTuple):
    """Read-only view of the world shared with agent workers."""

    year: int
    norm_text: str
    locations: "tuple[Location, ...]"

    def places(self) -> str:
        """
        Render the list of places for prompts.

        :return: the numbered places
        """
        return ", ".join(f"{loc.index}: {loc.name}" for loc in self.locations)


class World:
    """
    The locations of the society.

    Occupancy is mutated only by the control loop; workers see snapshots.
    """

    __slots__ = ("locations",)

    def __init__(self, locations: "list[Location]") -> None:
        """
        Initialize the world.

        :param locations: The locations
        :raises ConfigError: when the indices are not contiguous from 0
        """
        if [loc.index for loc in locations] != list(range(len(locations))):
            raise ConfigError("location indices must be contiguous from 0")
        if not locations:
            raise ConfigError("the world needs at least one location")
        self.locations: "list[Location]" = locations

    def __len__(self) -> int:
        """
        Get the number of locations.

        :return: the number of locations
        """
        return len(self.locations)

    def valid(self, index: "int | None") -> bool:
        """
        Test whether *index* names a location.

        :param index: The location index
        :return: `True` if the index is valid
        """
        return index is not None and 0 <= index < len(self.locations)

    def place(self, agent_id: str, index: int) -> None:
        """
        Put the agent at the location, leaving its previous one.

        :param agent_id: The agent id
        :param index: The location index
        :raises ConfigError: when the index is invalid
        """
        if not self.valid(index):
            raise ConfigError(f"invalid location index {index}")
        self.remove(agent_id)
        self.locations[index].occupants.add(agent_id)

    def remove(self, agent_id: str) -> None:
        """
        Remove the agent from the world.

        :param agent_id: The agent id
        """
        for location in self.locations:
            location.occupants.discard(agent_id)

    def occupants(self) -> "set[str]":
        """
        Get all agents present in the world.

        :return: the agent ids
        """
        return set().union(*(loc.occupants for loc in self.locations))

    def snapshot(self, year: int, norm_text: str) -> WorldSnapshot:
        """
        Make a read-only snapshot.

        :param year: The current year
        :param norm_text: The current norm text
        :return: the snapshot
        """
        return WorldSnapshot(
            year,
            norm_text,
            tuple(loc.model_copy(deep=True) for loc in self.locations),
        )


class SocialNorm(BaseModel):
    """The social norm of one generation."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    generation_year: int
    text: str = Field(min_length=1)


class NormSchedule(BaseModel):
    """
    The norms in force.

    In predefined mode `norms` holds one norm per generation start. In
    dynamic mode it starts with the initial norm and gains one evolved norm
    per generation boundary.
    """

    model_config = ConfigDict(extra="forbid")

    mode: Literal["predefined", "dynamic"] = "predefined"
    norms: Dict[int, SocialNorm] = Field(default_factory=dict)
    vision: str = ""
    direction: str = ""

    @model_validator(mode="after")
    def _check(self) -> "NormSchedule":
        if not self.norms:
            raise ValueError("at least one norm is required")
        if self.mode == "dynamic" and not (self.vision and self.direction):
            raise ValueError("dynamic mode requires vision and direction")
        return self

    @property
    def dynamic(self) -> bool:
        """
        Test whether norms are evolved.

        :return: `True` in dynamic mode
        """
        return self.mode == "dynamic"

    def check_coverage(self, clock: Clock) -> None:
        """
        Verify that a predefined schedule covers the clock range.

        :param clock: The clock
        :raises ConfigError: when a generation start has no norm
        """
        if self.dynamic:
            return
        missing = [y for y in clock.generation_starts() if y not in self.norms]
        if missing:
            raise ConfigError(f"no predefined norm for {missing}")

    def record(self, norm: SocialNorm) -> None:
        """
        Record an evolved norm.

        :param norm: The norm
        """
        self.norms[norm.generation_year] = norm


def current_norm(schedule: NormSchedule, clock: Clock) -> SocialNorm:
    """
    Get the norm in force at the clock year.

    :param schedule: The schedule
    :param clock: The clock
    :return: the norm of the latest generation start not after the year
    :raises MissingNorm: when a predefined generation has no norm
    """
    if not schedule.dynamic:
        norm = schedule.norms.get(clock.generation_start)
        if norm is None:
            raise MissingNorm(f"no norm for {clock.generation_start}")
        return norm
    known = [year for year in schedule.norms if year <= clock.year]
    if not known:
        raise MissingNorm(f"no norm before {clock.year}")
    return schedule.norms[max(known)]


class QuestionItem(BaseModel):
    """One question of a questionnaire."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    aspect: str = Field(min_length=1)
    question: str = Field(min_length=1)


class Questionnaire(BaseModel):
    """The evaluation questionnaire of one generation."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    generation_year: int
    items: List[QuestionItem]

    @model_validator(mode="after")
    def _check(self) -> "Questionnaire":
        if len(self.items) != QUESTIONNAIRE_SIZE:
            raise ValueError(
                f"{len(self.items)} items instead of {QUESTIONNAIRE_SIZE}"
            )
        aspects = [item.aspect for item in self.items]
        if len(set(aspects)) != len(aspects):
            raise ValueError("aspects are not unique")
        return self

    @classmethod
    def build(
        cls, year: int, pairs: "list[tuple[str, str]]"
    ) -> "Questionnaire":
        """
        Build a questionnaire from aspect and question pairs.

        :param year: The generation year
        :param pairs: The pairs
        :return: the questionnaire
        :raises MalformedQuestionnaire: when the pairs are invalid
        """
        try:
            return cls(
                generation_year=year,
                items=[QuestionItem(aspect=a, question=q) for a, q in pairs],
            )
        except ValidationError as exc:
            raise MalformedQuestionnaire(str(exc)) from exc


_QUOTED_PAIR = re.compile(r"([\"'])(.+?)\1\s*:\s*([\"'])(.+?)\3", re.DOTALL)


def parse_questionnaire(text: str, year: int) -> Questionnaire:
    """
    Parse a generated aspect to question mapping.

    :param text: The generator output
    :param year: The generation year
    :return: the questionnaire
    :raises MalformedQuestionnaire: when the mapping cannot be parsed or is
        not made of exactly ten unique aspects

    Strict JSON is tried first; duplicate keys are kept so they can be
    detected. Otherwise quoted ``'aspect': 'question'`` pairs are collected.
    """
    start, end = text.find("{"), text.rfind("}")
    if start < 0 or end < start:
        raise MalformedQuestionnaire("no mapping found")
    blob = text[start : end + 1]
    try:
        pairs = json.loads(blob, object_pairs_hook=list)
        if not isinstance(pairs, list):
            raise ValueError("not a mapping")
    except ValueError:
        pairs = [(m[1], m[3]) for m in _QUOTED_PAIR.findall(blob)]
    try:
        cleaned = [(str(a).strip(), str(q).strip()) for a, q in pairs]
    except (TypeError, ValueError) as exc:
        raise MalformedQuestionnaire(f"bad pair: {exc}") from exc
    return Questionnaire.build(year, cleaned)


def generate_questionnaire(
    norm: SocialNorm, backend: "Backend", sampling: "Sampling | None" = None
) -> Questionnaire:
    """
    Generate the questionnaire for the norm.

    :param norm: The norm
    :param backend: The generator backend
    :param sampling: The sampling parameters
    :return: the questionnaire
    :raises MalformedQuestionnaire: when no attempt yields a valid one
    """
    template = load_template("questionnaire")
    error = MalformedQuestionnaire()
    for attempt in range(QUESTIONNAIRE_ATTEMPTS):
        text = template.complete(
            backend,
            sampling,
            attempt,
            year=norm.generation_year,
            norms=norm.text,
        )
        try:
            return parse_questionnaire(text, norm.generation_year)
        except MalformedQuestionnaire as exc:
            get_logger().lwarn(
                f"questionnaire attempt {attempt + 1} rejected: "
                f"{exc.detail().splitlines()[0]}\n"
            )
            error = exc
    raise error


def format_strategies(strategies: "list[Trajectory]") -> str:
    """
    Render the strategies of the top agents.

    :param strategies: The trajectories of the top agents
    :return: one line per agent
    """
    lines = []
    for trajectory in strategies:
        plans = " ".join(action.plan_text for action in trajectory.actions)
        lines.append(f"agent_{trajectory.agent_id}: {plans}".rstrip())
    return "\n".join(lines)


def evolve_norm(
    top_strategies: "list[Trajectory]",
    schedule: NormSchedule,
    current: SocialNorm,
    new_year: int,
    backend: "Backend",
    sampling: "Sampling | None" = None,
) -> SocialNorm:
    """
    Deduce the norm of the next generation.

    :param top_strategies: The trajectories of the top agents
    :param schedule: The schedule holding the vision and the direction
    :param current: The norm in force
    :param new_year: The start year of the new generation
    :param backend: The generator backend
    :param sampling: The sampling parameters
    :return: the new norm
    :raises ConfigError: when the schedule is predefined
    :raises EmptyStrategies: when there are no strategies
    :raises EmptyNormText: when the generator returns nothing
    """
    if not schedule.dynamic:
        raise ConfigError("norms of a predefined schedule are not evolved")
    if not top_strategies:
        raise EmptyStrategies()
    text = load_template("norm_evolving").complete(
        backend,
        sampling,
        ultimate_social_vision=schedule.vision,
        norm=current.text,
        direction=schedule.direction,
        current_generation=current.generation_year,
        new_generation=new_year,
        strategies=format_strategies(top_strategies),
    )
    text = " ".join(text.split()).strip("'\"")
    if not text:
        raise EmptyNormText(f"no norm produced for {new_year}")
    return SocialNorm(generation_year=new_year, text=text)


class _NormEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    year: int
    text: str = Field(min_length=1)


class _QuestionnaireEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    year: int
    items: List[QuestionItem]


class _LocationEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = Field(min_length=1)
    description: str = ""


class _ScheduleFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mode: Literal["predefined", "dynamic"] = "predefined"
    vision: str = ""
    direction: str = ""
    norms: List[_NormEntry] = Field(default_factory=list)
    questionnaires: List[_QuestionnaireEntry] = Field(default_factory=list)
    locations: List[_LocationEntry] = Field(min_length=1)


class ScheduleData(NamedTuple):
    """Contents of a schedule file."""

    schedule: NormSchedule
    questionnaires: "dict[int, Questionnaire]"
    locations: "list[Location]"


def load_schedule(path: "pathlib.Path | None" = None) -> ScheduleData:
    """
    Load the norm schedule, the predefined questionnaires and the world.

    :param path: The path to the schedule file (packaged default if `None`)
    :return: the schedule data
    :raises ConfigError: when the file is missing or invalid
    """
    path = path or asset_path("schedule.json")
    try:
        data = _ScheduleFile.model_validate_json(
            path.read_text(encoding="utf-8")
        )
        schedule = NormSchedule(
            mode=data.mode,
            norms={
                entry.year: SocialNorm(
                    generation_year=entry.year, text=entry.text
                )
                for entry in data.norms
            },
            vision=data.vision,
            direction=data.direction,
        )
        questionnaires = {
            entry.year: Questionnaire(
                generation_year=entry.year, items=entry.items
            )
            for entry in data.questionnaires
        }
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except ValidationError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    locations = [
        Location(index=i, name=entry.name, description=entry.description)
        for i, entry in enumerate(data.locations)
    ]
    return ScheduleData(schedule, questionnaires, locations)
