#
# File:    ./src/evoagent/evolution.py
# Author:  Jiří Kučera <sanczes AT gmail.com>
# Date:    2026-10-19 14:02:33 +0200
# Project: evoagent: Evolutionary agents in an evolving society
#
# SPDX-License-Identifier: MIT
#
"""
Survival of the fittest.

Ranking, survivor selection, crossover, mutation, and replacement of the
bottom of the population by the offspring of the top.

Every random draw happens in the calling thread in a fixed order, so a seed
and a scripted backend determine the whole lineage. Only the backend calls
of mutations are fanned out.
"""

import math
import re
from typing import (
    TYPE_CHECKING,
    Callable,
    List,
    Mapping,
    NamedTuple,
    Sequence,
    Tuple,
)

from pydantic import BaseModel, ConfigDict

from evoagent.agent import Agent, AgentProfile, MemoryStore
from evoagent.config import portion
from evoagent.errors import (
    DegeneratePopulation,
    InsufficientParents,
    MalformedMutation,
)
from evoagent.logging import get_logger
from evoagent.pool import fan_out
from evoagent.prompts import load_template

if TYPE_CHECKING:
    from evoagent import RngType
    from evoagent.backend import Backend, Sampling
    from evoagent.config import EvolutionConfig
    from evoagent.observer import FitnessReport

ATTRIBUTES: "tuple[str, ...]" = ("persona", "career", "three_views")
MUTATION_ATTEMPTS: int = 3

# attribute -> (template, reply marker)
_MUTATIONS: "dict[str, tuple[str, str]]" = {
    "persona": ("persona_mutation", "Persona"),
    "career": ("career_mutation", "Career"),
    "three_views": ("views_mutation", "Views"),
}


class RankedPopulation(BaseModel):
    """Agents ordered by descending score, ties by ascending id."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    entries: List[Tuple[str, float]]

    def __len__(self) -> int:
        """
        Get the number of ranked agents.

        :return: the number of agents
        """
        return len(self.entries)

    def ids(self) -> "list[str]":
        """
        Get the agent ids in rank order.

        :return: the ids
        """
        return [agent_id for agent_id, _ in self.entries]


def rank(reports: "Mapping[str, FitnessReport]") -> RankedPopulation:
    """
    Rank the agents by their scores.

    :param reports: The reports keyed by agent id
    :return: the ranking
    """
    entries = sorted(
        ((agent_id, float(r.score)) for agent_id, r in reports.items()),
        key=lambda entry: (-entry[1], entry[0]),
    )
    return RankedPopulation(entries=entries)


class Split(NamedTuple):
    """Partition of a ranking."""

    parent_pool: "list[str]"
    middle: "list[str]"
    eliminated: "list[str]"


def split(ranked: RankedPopulation, config: "EvolutionConfig") -> Split:
    """
    Split the ranking into parents, inert survivors and eliminated agents.

    :param ranked: The ranking
    :param config: The evolution parameters
    :return: the split
    :raises DegeneratePopulation: when nothing or everything would be
        eliminated

    The bottom ``floor(p * N)`` agents are eliminated and the top
    ``ceil(p * N)`` survivors form the parent pool.
    """
    ids = ranked.ids()
    size = len(ids)
    k = math.floor(portion(config.replace_fraction, size))
    if k < 1 or k >= size:
        raise DegeneratePopulation(f"cannot replace {k} of {size} agents")
    survivors = ids[: size - k]
    pool = math.ceil(portion(config.replace_fraction, size))
    pool = min(pool, len(survivors))
    return Split(survivors[:pool], survivors[pool:], ids[size - k :])


def crossover(
    parent_a: AgentProfile,
    parent_b: AgentProfile,
    rng: "RngType",
    agent_id: str = "offspring",
    birth_year: "int | None" = None,
) -> AgentProfile:
    """
    Combine two parents.

    :param parent_a: The first parent
    :param parent_b: The second parent
    :param rng: The random number generator
    :param agent_id: The id of the offspring
    :param birth_year: The birth year (the first parent's when `None`)
    :return: the offspring profile

    Every attribute comes from either parent with probability 0.5,
    independently of the other attributes.
    """
    inherited = {
        name: getattr(parent_a if rng.random() < 0.5 else parent_b, name)
        for name in ATTRIBUTES
    }
    return AgentProfile(
        agent_id=agent_id,
        birth_year=parent_a.birth_year if birth_year is None else birth_year,
        parent_ids=(parent_a.agent_id, parent_b.agent_id),
        **inherited,
    )


def parse_mutation(text: str, marker: str) -> str:
    """
    Extract the mutated attribute from the reply.

    :param text: The reply
    :param marker: The marker name (``Persona``, ``Career``, ``Views``)
    :return: the new attribute text
    :raises MalformedMutation: when the marker or the text is missing
    """
    match = re.search(rf"#\s*{marker}:\s*(.*)", text)
    if match is None:
        raise MalformedMutation(f"no '# {marker}:' marker")
    value = match.group(1).strip().strip("[]").strip()
    if not value:
        raise MalformedMutation(f"empty '# {marker}:' value")
    return value


def plan_mutation(rate: float, rng: "RngType") -> "tuple[str, ...]":
    """
    Decide which attributes mutate.

    :param rate: The per-attribute mutation probability
    :param rng: The random number generator
    :return: the names of the attributes to mutate
    """
    draws = [rng.random() for _ in ATTRIBUTES]
    return tuple(name for name, x in zip(ATTRIBUTES, draws) if x < rate)


def apply_mutation(
    offspring: AgentProfile,
    parents: "tuple[AgentProfile, AgentProfile]",
    names: "Sequence[str]",
    current_year: int,
    backend: "Backend",
    sampling: "Sampling | None" = None,
) -> "tuple[AgentProfile, tuple[str, ...]]":
    """
    Rewrite the chosen attributes of the offspring.

    :param offspring: The offspring
    :param parents: The parents
    :param names: The attributes to mutate
    :param current_year: The current year
    :param backend: The agent backend
    :param sampling: The sampling parameters
    :return: the mutated offspring and the attributes actually mutated

    An attribute whose reply lacks the marker after all attempts is left
    unmutated.
    """
    updates = {}
    for name in names:
        template_name, marker = _MUTATIONS[name]
        template = load_template(template_name)
        for attempt in range(MUTATION_ATTEMPTS):
            text = template.complete(
                backend,
                sampling,
                attempt,
                parent_a=getattr(parents[0], name),
                parent_b=getattr(parents[1], name),
                year=current_year,
            )
            try:
                updates[name] = parse_mutation(text, marker)
                break
            except MalformedMutation as exc:
                get_logger().ldebug(
                    f"agent_{offspring.agent_id}: {name} mutation attempt "
                    f"{attempt + 1} rejected: {exc.detail()}\n"
                )
        else:
            get_logger().lwarn(
                f"agent_{offspring.agent_id}: {name} left unmutated\n"
            )
    mutated = offspring.model_copy(update=updates)
    return mutated, tuple(n for n in ATTRIBUTES if n in updates)


def mutate(
    offspring: AgentProfile,
    parents: "tuple[AgentProfile, AgentProfile]",
    config: "EvolutionConfig",
    current_year: int,
    backend: "Backend",
    rng: "RngType",
    sampling: "Sampling | None" = None,
) -> AgentProfile:
    """
    Mutate every attribute independently with the configured rate.

    :param offspring: The offspring from crossover
    :param parents: The parents
    :param config: The evolution parameters
    :param current_year: The current year
    :param backend: The agent backend
    :param rng: The random number generator
    :param sampling: The sampling parameters
    :return: the mutated offspring
    """
    names = plan_mutation(config.mutation_rate, rng)
    profile, _ = apply_mutation(
        offspring, parents, names, current_year, backend, sampling
    )
    return profile


class Offspring(NamedTuple):
    """One offspring and how it came to be."""

    profile: AgentProfile
    mutated: "tuple[str, ...]"


def parent_of(child: Offspring) -> str:
    """
    Get the first parent of the offspring.

    :param child: The offspring
    :return: the id of the first parent
    """
    return child.profile.parent_ids[0] or ""


_Plan = Tuple[
    AgentProfile, Tuple[AgentProfile, AgentProfile], Tuple[str, ...]
]


def pick_parents(
    size: int, rng: "RngType", weights: "Sequence[float] | None" = None
) -> "tuple[int, int]":
    """
    Pick an ordered pair of distinct parent indices.

    :param size: The size of the parent pool
    :param rng: The random number generator
    :param weights: Optional selection weights (uniform when `None`)
    :return: the pair of indices
    """
    if weights is not None:
        total = float(sum(weights))
        chosen = rng.choice(
            size, size=2, replace=False, p=[w / total for w in weights]
        )
        return int(chosen[0]), int(chosen[1])
    first = int(rng.integers(size))
    second = int(rng.integers(size - 1))
    return first, second + (second >= first)


def reproduce(
    parent_pool: "Sequence[AgentProfile]",
    count: int,
    config: "EvolutionConfig",
    current_year: int,
    backend: "Backend",
    rng: "RngType",
    next_id: "Callable[[], str]",
    sampling: "Sampling | None" = None,
    workers: int = 1,
    weights: "Sequence[float] | None" = None,
    route: "Callable[[str], Backend] | None" = None,
) -> "list[Offspring]":
    """
    Breed offspring from the parent pool.

    :param parent_pool: The parents
    :param count: The number of offspring
    :param config: The evolution parameters
    :param current_year: The current year (the birth year)
    :param backend: The agent backend
    :param rng: The random number generator
    :param next_id: The supplier of fresh agent ids
    :param sampling: The sampling parameters
    :param workers: The number of concurrent mutations
    :param weights: Optional selection weights of the parents
    :param route: Optional per-offspring backend selector (used for tracing)
    :return: the offspring
    :raises InsufficientParents: when the pool has fewer than two parents
    """
    if len(parent_pool) < 2:
        raise InsufficientParents(f"{len(parent_pool)} parent(s) available")
    plans = []
    for _ in range(count):
        i, j = pick_parents(len(parent_pool), rng, weights)
        parents = (parent_pool[i], parent_pool[j])
        child = crossover(*parents, rng, next_id(), current_year)
        plans.append(
            (child, parents, plan_mutation(config.mutation_rate, rng))
        )

    def finish(plan: _Plan) -> Offspring:
        child, parents, names = plan
        chosen = route(child.agent_id) if route is not None else backend
        return Offspring(
            *apply_mutation(
                child, parents, names, current_year, chosen, sampling
            )
        )

    return fan_out(finish, plans, workers)


class EvolutionStep(NamedTuple):
    """The outcome of one replacement."""

    agents: "list[Agent]"
    split: Split
    offspring: "list[Offspring]"


def next_generation(
    agents: "list[Agent]",
    reports: "Mapping[str, FitnessReport]",
    config: "EvolutionConfig",
    current_year: int,
    backend: "Backend",
    rng: "RngType",
    next_id: "Callable[[], str]",
    sampling: "Sampling | None" = None,
    workers: int = 1,
    route: "Callable[[str], Backend] | None" = None,
) -> EvolutionStep:
    """
    Replace the bottom of the population by offspring of the top.

    :param agents: The alive agents
    :param reports: The reports of the current timestep
    :param config: The evolution parameters
    :param current_year: The current year
    :param backend: The agent backend
    :param rng: The random number generator
    :param next_id: The supplier of fresh agent ids
    :param sampling: The sampling parameters
    :param workers: The number of concurrent mutations
    :param route: Optional per-offspring backend selector
    :return: the new population and what happened
    :raises DegeneratePopulation: when the population cannot be split
    :raises InsufficientParents: when the parent pool is too small

    Survivors keep their memory and fitness history. Offspring start with
    an empty memory at the location of their first parent.
    """
    by_id = {agent.agent_id: agent for agent in agents}
    parts = split(rank(reports), config)
    pool = [by_id[agent_id].profile for agent_id in parts.parent_pool]
    weights = (
        [float(reports[a].score) for a in parts.parent_pool]
        if config.fitness_proportional
        else None
    )
    offspring = reproduce(
        pool,
        len(parts.eliminated),
        config,
        current_year,
        backend,
        rng,
        next_id,
        sampling,
        workers,
        weights,
        route,
    )
    for agent_id in parts.eliminated:
        by_id[agent_id].alive = False
    survivors = [agent for agent in agents if agent.alive]
    threshold = (
        agents[0].memory.compression_threshold
        if agents
        else MemoryStore().compression_threshold
    )
    newborn = [
        Agent(
            profile=child.profile,
            memory=MemoryStore(compression_threshold=threshold),
            location_index=by_id[parent_of(child)].location_index,
        )
        for child in offspring
    ]
    return EvolutionStep(survivors + newborn, parts, offspring)


def best_agent(timesteps: "Sequence[Mapping[str, FitnessReport]]") -> str:
    """
    Find the best agent of a generation.

    :param timesteps: The reports of every scored timestep of the generation
    :return: the id with the highest mean score, ties by ascending id
    :raises ValueError: when there are no reports
    """
    scores: "dict[str, list[int]]" = {}
    for reports in timesteps:
        for agent_id, report in reports.items():
            scores.setdefault(agent_id, []).append(report.score)
    if not scores:
        raise ValueError("no scored timestep")
    return min(scores, key=lambda a: (-sum(scores[a]) / len(scores[a]), a))


def best_agents(
    history: "Mapping[int, Sequence[Mapping[str, FitnessReport]]]",
) -> "dict[int, str]":
    """
    Find the best agent of every generation.

    :param history: The reports per timestep keyed by generation start
    :return: the best agent id keyed by generation start
    """
    return {
        generation: best_agent(timesteps)
        for generation, timesteps in sorted(history.items())
        if any(timesteps)
    }
