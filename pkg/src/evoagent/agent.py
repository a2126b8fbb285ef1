#
# File:    ./src/evoagent/agent.py
# Author:  Jiří Kučera <sanczes AT gmail.com>
# Date:    2026-10-19 12:48:27 +0200
# Project: evoagent: Evolutionary agents in an evolving society
#
# SPDX-License-Identifier: MIT
#
"""
Agents.

An agent is a text genome (persona, career, and three views) together with
a two-tier memory and its fitness history. Agents explore the world, keep
what they observe in short-term memory, compress it into long-term memory,
and answer the questionnaire of the current generation.
"""

import pathlib
import re
from typing import TYPE_CHECKING, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from evoagent.assets import asset_path
from evoagent.errors import ConfigError, PartialStatements
from evoagent.logging import get_logger
from evoagent.prompts import load_template
from evoagent.society import Location

if TYPE_CHECKING:
    from evoagent import RngType
    from evoagent.backend import Backend, Sampling
    from evoagent.config import ExperimentConfig
    from evoagent.society import Questionnaire, SocialNorm, WorldSnapshot

_NEXT_PLACE = re.compile(r"###\s*Next place:\s*(-?\d+)")

NOTHING: str = "nothing yet"


def format_agent_id(serial: int) -> str:
    """
    Format the agent id.

    :param serial: The serial number of the agent
    :return: the zero-padded id, so string order is creation order
    """
    return f"{serial:05d}"


class AgentProfile(BaseModel):
    """The text genome of an agent."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    agent_id: str = Field(min_length=1)
    persona: str = Field(min_length=1)
    career: str = Field(min_length=1)
    three_views: str = Field(min_length=1)
    birth_year: int
    parent_ids: Tuple[Optional[str], Optional[str]] = (None, None)


class MemoryStore(BaseModel):
    """Short-term events and long-term summaries."""

    model_config = ConfigDict(extra="forbid")

    short_term: List[str] = Field(default_factory=list)
    long_term: List[str] = Field(default_factory=list)
    compression_threshold: int = Field(default=10, gt=0)

    @property
    def full(self) -> bool:
        """
        Test whether the short-term memory is due for compression.

        :return: `True` when the threshold has been reached
        """
        return len(self.short_term) >= self.compression_threshold

    def long_text(self) -> str:
        """
        Render the long-term memory for prompts.

        :return: the summaries joined by spaces
        """
        return " ".join(self.long_term) or NOTHING


class ActionRecord(BaseModel):
    """One exploration step of an agent."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    year: int
    agent_id: str
    plan_text: str
    next_place: Optional[int] = None


class Agent(BaseModel):
    """An agent of the society."""

    model_config = ConfigDict(extra="forbid")

    profile: AgentProfile
    memory: MemoryStore = Field(default_factory=MemoryStore)
    location_index: int = Field(default=0, ge=0)
    fitness_history: List[Tuple[int, int]] = Field(default_factory=list)
    actions: List[ActionRecord] = Field(default_factory=list)
    feedback: List[Tuple[int, str]] = Field(default_factory=list)
    alive: bool = True

    @property
    def agent_id(self) -> str:
        """
        Get the agent id.

        :return: the id
        """
        return self.profile.agent_id

    def record_fitness(self, year: int, score: int) -> None:
        """
        Append a score to the fitness history.

        :param year: The year of the evaluation
        :param score: The score
        :raises ValueError: when the year does not follow the last one
        """
        if self.fitness_history and self.fitness_history[-1][0] >= year:
            raise ValueError(f"fitness for {year} is out of order")
        self.fitness_history.append((year, score))

    def prompt_vars(self) -> "dict[str, object]":
        """
        Get the profile placeholders shared by agent prompts.

        :return: the placeholder values
        """
        return profile_vars(self.profile, self.memory.long_text())


class Observation(BaseModel):
    """What an agent perceives at the start of a step."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    year: int
    norm_text: str
    location: Location
    copresent: List[str] = Field(default_factory=list)
    recent_events: List[str] = Field(default_factory=list)
    places: str = ""
    place_count: int = Field(default=1, ge=1)


class Trajectory(BaseModel):
    """The actions and feedback of an agent within a window."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    agent_id: str
    window_start: int
    window_end: int
    actions: List[ActionRecord] = Field(default_factory=list)
    feedback: List[str] = Field(default_factory=list)

    def render(self) -> str:
        """
        Render the trajectory for prompts.

        :return: one line per action and feedback
        """
        lines = [f"{a.year}: {a.plan_text}" for a in self.actions]
        lines.extend(f"Feedback: {text}" for text in self.feedback)
        return "\n".join(lines) or "No recorded behavior."


class StatementSet(BaseModel):
    """The answers of an agent to a questionnaire."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    agent_id: str
    generation_year: int
    answers: List[Tuple[str, str]]

    def render(self) -> str:
        """
        Render the statements for prompts.

        :return: one ``aspect: answer`` line per item
        """
        return "\n".join(f"{a}: {text}" for a, text in self.answers)


def perceive(agent: Agent, world: "WorldSnapshot") -> Observation:
    """
    Assemble the observation of the agent.

    :param agent: The agent
    :param world: The world snapshot
    :return: the observation
    """
    location = world.locations[agent.location_index]
    return Observation(
        year=world.year,
        norm_text=world.norm_text,
        location=location,
        copresent=sorted(location.occupants - {agent.agent_id}),
        recent_events=list(agent.memory.short_term),
        places=world.places(),
        place_count=len(world.locations),
    )


def parse_next_place(text: str) -> "tuple[str, int | None]":
    """
    Split the exploration output into the plan and the next place.

    :param text: The model output
    :return: the plan text and the next place index (if any)
    """
    match = _NEXT_PLACE.search(text)
    if match is None:
        return text.strip(), None
    plan = text[: match.start()].strip() or text.strip()
    return plan, int(match.group(1))


def plan_and_act(
    agent: Agent,
    obs: Observation,
    backend: "Backend",
    sampling: "Sampling | None" = None,
) -> ActionRecord:
    """
    Let the agent plan its next step.

    :param agent: The agent
    :param obs: The current observation
    :param backend: The agent backend
    :param sampling: The sampling parameters
    :return: the action record

    A valid next place relocates the agent, an invalid one is dropped.
    """
    text = load_template("exploration").complete(
        backend,
        sampling,
        **agent.prompt_vars(),
        current_time=obs.year,
        norm=obs.norm_text,
        places=obs.places,
        location=obs.location.name,
        location_description=obs.location.description,
        recent_events=" ".join(obs.recent_events) or NOTHING,
        people=", ".join(f"agent_{i}" for i in obs.copresent) or "nobody",
    )
    plan, place = parse_next_place(text)
    if place is not None and not 0 <= place < obs.place_count:
        get_logger().lwarn(
            f"agent_{agent.agent_id}: dropped invalid place {place}\n"
        )
        place = None
    record = ActionRecord(
        year=obs.year,
        agent_id=agent.agent_id,
        plan_text=plan,
        next_place=place,
    )
    if place is not None:
        agent.location_index = place
    agent.actions.append(record)
    return record


def remember(agent: Agent, events: "list[str]") -> None:
    """
    Append events to the short-term memory.

    :param agent: The agent
    :param events: The events, oldest first
    """
    agent.memory.short_term.extend(events)


def compress_memory(
    agent: Agent,
    norm: "SocialNorm",
    backend: "Backend",
    sampling: "Sampling | None" = None,
) -> "str | None":
    """
    Compress the short-term memory into one long-term summary.

    :param agent: The agent
    :param norm: The current norm
    :param backend: The agent backend
    :param sampling: The sampling parameters
    :return: the summary, `None` when the threshold has not been reached

    A blank summary is requested once more; if it stays blank the raw
    events joined together become the summary.
    """
    memory = agent.memory
    if not memory.full:
        return None
    template = load_template("memory_compression")
    summary = ""
    for attempt in range(2):
        summary = template.complete(
            backend,
            sampling,
            attempt,
            **agent.prompt_vars(),
            norm=norm.text,
            events="\n".join(memory.short_term),
        ).strip()
        if summary:
            break
    if not summary:
        summary = " ".join(memory.short_term)
        get_logger().lwarn(
            f"agent_{agent.agent_id}: blank memory summary, keeping events\n"
        )
    memory.long_term.append(summary)
    memory.short_term.clear()
    return summary


def profile_vars(
    profile: AgentProfile, long_mem: str = NOTHING
) -> "dict[str, object]":
    """
    Get the profile placeholders shared by agent prompts.

    :param profile: The profile
    :param long_mem: The long-term memory text
    :return: the placeholder values
    """
    return {
        "agent_id": profile.agent_id,
        "career": profile.career,
        "persona": profile.persona,
        "three_views": profile.three_views,
        "long_mem": long_mem,
    }


def elicit_statements(
    variables: "dict[str, object]",
    questionnaire: "Questionnaire",
    norm: "SocialNorm",
    backend: "Backend",
    sampling: "Sampling | None" = None,
    year: "int | None" = None,
    recent: str = NOTHING,
) -> StatementSet:
    """
    Ask one question at a time and collect the answers.

    :param variables: The profile placeholders (see `profile_vars`)
    :param questionnaire: The questionnaire
    :param norm: The current norm
    :param backend: The agent backend
    :param sampling: The sampling parameters
    :param year: The current year (the questionnaire year by default)
    :param recent: The summary of recent events
    :return: the statements, in questionnaire order
    :raises PartialStatements: when an item stays blank after one retry
    """
    template = load_template("statement")
    agent_id = variables["agent_id"]
    answers = []
    for item in questionnaire.items:
        answer = ""
        for attempt in range(2):
            if attempt:
                get_logger().lwarn(
                    f"agent_{agent_id}: blank answer to "
                    f"{item.aspect!r}, asking again\n"
                )
            answer = template.complete(
                backend,
                sampling,
                attempt,
                **variables,
                current_time=year or questionnaire.generation_year,
                norm=norm.text,
                recent_events=recent,
                question=item.question,
            ).strip()
            if answer:
                break
        if not answer:
            raise PartialStatements(
                f"agent_{agent_id} left {item.aspect!r} unanswered"
            )
        answers.append((item.aspect, answer))
    return StatementSet(
        agent_id=str(agent_id),
        generation_year=questionnaire.generation_year,
        answers=answers,
    )


def answer_questionnaire(
    agent: Agent,
    questionnaire: "Questionnaire",
    norm: "SocialNorm",
    backend: "Backend",
    sampling: "Sampling | None" = None,
    year: "int | None" = None,
) -> StatementSet:
    """
    Let the agent answer every questionnaire item.

    :param agent: The agent
    :param questionnaire: The questionnaire
    :param norm: The current norm
    :param backend: The agent backend
    :param sampling: The sampling parameters
    :param year: The current year (the questionnaire year by default)
    :return: the statements, in questionnaire order
    :raises PartialStatements: when an item stays blank after one retry

    The context holds the long-term memory and the latest short-term
    events.
    """
    return elicit_statements(
        agent.prompt_vars(),
        questionnaire,
        norm,
        backend,
        sampling,
        year,
        " ".join(agent.memory.short_term[-3:]) or NOTHING,
    )


def trajectory_window(
    agent: Agent, window_start: int, window_end: int
) -> Trajectory:
    """
    Get the behavior of the agent within a window of years.

    :param agent: The agent
    :param window_start: The first year of the window
    :param window_end: The last year of the window
    :return: the trajectory
    """
    return Trajectory(
        agent_id=agent.agent_id,
        window_start=window_start,
        window_end=window_end,
        actions=[
            a for a in agent.actions if window_start <= a.year <= window_end
        ],
        feedback=[
            text
            for year, text in agent.feedback
            if window_start <= year <= window_end
        ],
    )


class AttitudePools(BaseModel):
    """Positive and negative variants of one attribute."""

    model_config = ConfigDict(extra="forbid")

    positive: List[str] = Field(min_length=1)
    negative: List[str] = Field(default_factory=list)

    def pool(self) -> "list[str]":
        """
        Get all eligible values.

        :return: the positive values followed by the negative ones
        """
        return self.positive + self.negative


class AttributeTables(BaseModel):
    """Initial values of the agent attributes."""

    model_config = ConfigDict(extra="forbid")

    careers: List[str] = Field(min_length=1)
    personalities: AttitudePools
    three_views: AttitudePools


def load_attribute_tables(
    path: "pathlib.Path | None" = None,
) -> AttributeTables:
    """
    Load the attribute tables.

    :param path: The path to the tables (packaged default if `None`)
    :return: the tables
    :raises ConfigError: when the file is missing or invalid
    """
    path = path or asset_path("attributes.json")
    try:
        return AttributeTables.model_validate_json(
            path.read_text(encoding="utf-8")
        )
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except ValidationError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def spawn_initial_population(
    config: "ExperimentConfig",
    tables: AttributeTables,
    rng: "RngType",
    location_count: int = 1,
) -> "list[Agent]":
    """
    Create the initial population.

    :param config: The experiment configuration
    :param tables: The attribute tables
    :param rng: The random number generator
    :param location_count: The number of locations agents are spread over
    :return: the agents
    :raises ConfigError: when unique careers are requested but too few
        careers are available

    Careers are assigned by index; persona and three views are drawn from
    both the positive and the negative pools.
    """
    size = config.evolution.population_size
    careers = tables.careers
    if config.agent.unique_careers and size > len(careers):
        raise ConfigError(
            f"{size} agents but only {len(careers)} unique careers"
        )
    personas = tables.personalities.pool()
    views = tables.three_views.pool()
    agents = []
    for i in range(size):
        profile = AgentProfile(
            agent_id=format_agent_id(i),
            persona=personas[int(rng.integers(len(personas)))],
            career=careers[i % len(careers)],
            three_views=views[int(rng.integers(len(views)))],
            birth_year=config.clock.start_year,
        )
        agents.append(
            Agent(
                profile=profile,
                memory=MemoryStore(
                    compression_threshold=config.agent.compression_threshold
                ),
                location_index=i % location_count,
            )
        )
    return agents
