#
# File:    ./src/evoagent/runner.py
# Author:  Jiří Kučera <sanczes AT gmail.com>
# Date:    2026-10-19 16:20:51 +0200
# Project: evoagent: Evolutionary agents in an evolving society
#
# SPDX-License-Identifier: MIT
#
"""
Experiment orchestration.

Every generation starts by setting (or evolving) the norm and the
questionnaire. Every timestep then runs exploration, memory maintenance,
statements, evaluation, feedback delivery and, for the evolutionary method,
replacement of the weakest agents.

One control loop drives a trial. Agent-level backend calls fan out to a
thread pool and their results are committed in agent id order, so the run
log depends only on the configuration, the seed and the backend replies.
"""

import math
import pathlib
from typing import TYPE_CHECKING, Callable, NamedTuple, Sequence

import numpy

from evoagent.agent import (
    ActionRecord,
    Agent,
    AgentProfile,
    StatementSet,
    answer_questionnaire,
    compress_memory,
    format_agent_id,
    load_attribute_tables,
    perceive,
    plan_and_act,
    remember,
    spawn_initial_population,
    trajectory_window,
)
from evoagent.backend import TracingBackend, make_backend
from evoagent.baselines import (
    BaselineState,
    frozen_step,
    observe,
    react_step,
    reflexion_step,
)
from evoagent.config import portion
from evoagent.errors import (
    ClockExhausted,
    ConfigError,
    DegeneratePopulation,
    ExportError,
    InsufficientParents,
    SimulationError,
)
from evoagent.evolution import best_agents, next_generation, parent_of
from evoagent.logging import get_logger, log_scope
from evoagent.metrics import (
    HEADER,
    METRICS_NAME,
    average_trials,
    csv_text,
    export_metrics,
    export_run,
    write_export,
)
from evoagent.observer import (
    EvaluationInput,
    deliver_feedback,
    feedback_event,
    score_population,
)
from evoagent.pool import fan_out
from evoagent.prompts import template_versions
from evoagent.runlog import (
    RUNLOG_NAME,
    SNAPSHOT_NAME,
    TRIAL_PREFIX,
    RunLog,
    TrialRecorder,
)
from evoagent.society import (
    Clock,
    World,
    current_norm,
    evolve_norm,
    generate_questionnaire,
    load_schedule,
    tick,
)

if TYPE_CHECKING:
    from evoagent import RngType
    from evoagent.agent import AttributeTables
    from evoagent.backend import Backend, Sampling
    from evoagent.config import ExperimentConfig
    from evoagent.observer import FitnessReport
    from evoagent.society import (
        NormSchedule,
        Questionnaire,
        ScheduleData,
        SocialNorm,
    )

SWEEP_NAME: str = "sweep.csv"
SWEEP_HEADER: "tuple[str, ...]" = ("N", "m") + HEADER[1:]


class Backends(NamedTuple):
    """The backends of the three roles and their sampling parameters."""

    agent: "Backend"
    observer: "Backend"
    generator: "Backend"
    agent_sampling: "Sampling"
    observer_sampling: "Sampling"
    generator_sampling: "Sampling"


def make_backends(config: "ExperimentConfig") -> Backends:
    """
    Build the backends of an experiment.

    :param config: The configuration
    :return: the backends; every role has its own budget guard
    :raises ConfigError: when a backend cannot be built
    :raises AuthError: when a credential is missing
    """
    observer = make_backend(config.observer_backend, config.token_budget)
    generator = (
        observer
        if config.generator_backend is None
        else make_backend(config.generator_backend, config.token_budget)
    )
    return Backends(
        make_backend(config.agent_backend, config.token_budget),
        observer,
        generator,
        config.agent_backend.sampling(),
        config.observer_backend.sampling(),
        config.generator.sampling(),
    )


def trial_seed(config: "ExperimentConfig", trial: int) -> int:
    """
    Get the seed of a trial.

    :param config: The configuration
    :param trial: The trial number (from 1)
    :return: the seed
    """
    return config.evolution.rng_seed + trial - 1


class Simulation:
    """One trial of an experiment."""

    __slots__ = (
        "config",
        "backends",
        "recorder",
        "questionnaires",
        "schedule",
        "world",
        "rng",
        "agents",
        "states",
        "norm",
        "questionnaire",
        "generation",
        "history",
        "__serial",
    )

    def __init__(
        self,
        config: "ExperimentConfig",
        trial: int,
        backends: Backends,
        recorder: TrialRecorder,
        data: "ScheduleData",
        tables: "AttributeTables",
    ) -> None:
        """
        Initialize the trial.

        :param config: The configuration
        :param trial: The trial number (from 1)
        :param backends: The backends
        :param recorder: The recorder of the trial log
        :param data: The schedule, the questionnaires and the locations
        :param tables: The attribute tables
        :raises ConfigError: when the population cannot be spawned
        """
        self.config: "ExperimentConfig" = config
        self.backends: Backends = backends
        self.recorder: TrialRecorder = recorder
        self.questionnaires: "dict[int, Questionnaire]" = data.questionnaires
        self.schedule: "NormSchedule" = data.schedule.model_copy(deep=True)
        self.world: World = World(
            [loc.model_copy(deep=True) for loc in data.locations]
        )
        seed = trial_seed(config, trial)
        self.rng: "RngType" = numpy.random.default_rng(seed)
        self.agents: "list[Agent]" = spawn_initial_population(
            config, tables, self.rng, len(self.world)
        )
        self.states: "dict[str, BaselineState]" = {
            agent.agent_id: BaselineState(
                profile=agent.profile, window=config.agent.baseline_window
            )
            for agent in self.agents
        }
        self.norm: "SocialNorm | None" = None
        self.questionnaire: "Questionnaire | None" = None
        self.generation: int = config.clock.start_year
        self.history: "dict[int, list[dict[str, FitnessReport]]]" = {}
        self.__serial: int = len(self.agents)

    @property
    def method(self) -> str:
        """
        Get the method of the trial.

        :return: the method name
        """
        return self.config.method

    @property
    def workers(self) -> int:
        """
        Get the number of concurrent backend tasks.

        :return: the number of workers
        """
        return self.config.workers

    def next_id(self) -> str:
        """
        Allocate a fresh agent id.

        :return: the id
        """
        agent_id = format_agent_id(self.__serial)
        self.__serial += 1
        return agent_id

    def tracers(self, backend: "Backend") -> "dict[str, TracingBackend]":
        """
        Make one tracer per alive agent.

        :param backend: The traced backend
        :return: the tracers keyed by agent id
        """
        return {a.agent_id: TracingBackend(backend) for a in self.agents}

    def context(self) -> "tuple[SocialNorm, Questionnaire]":
        """
        Get the norm and the questionnaire of the current generation.

        :return: the norm and the questionnaire
        :raises SimulationError: when no generation has started yet
        """
        if self.norm is None or self.questionnaire is None:
            raise SimulationError("no generation has started")
        return self.norm, self.questionnaire

    def run(self) -> None:
        """
        Run the trial to the end of the clock.

        :raises SimulationError: when the trial cannot continue
        """
        clock = Clock.from_config(self.config.clock)
        self.schedule.check_coverage(clock)
        for agent in self.agents:
            self.world.place(agent.agent_id, agent.location_index)
            self.birth(clock.year, agent)
        self.enter_generation(clock)
        while True:
            if clock.year < clock.end_year or self.config.clock.evaluate_final:
                self.step(clock.year)
            try:
                clock, boundary = tick(clock)
            except ClockExhausted:
                break
            if boundary:
                self.close_generation(clock.year)
                self.enter_generation(clock)
        self.close_generation(clock.year)

    def close_generation(self, year: int) -> None:
        """
        Record the best agent of the ending generation.

        :param year: The current year

        The record carries the current year; the generation start goes to
        the payload.
        """
        best = best_agents({self.generation: self.history[self.generation]})
        for generation, agent_id in best.items():
            self.recorder.emit(
                year, "best_agent", agent_id=agent_id, generation=generation
            )

    def birth(self, year: int, agent: Agent) -> None:
        """
        Record the birth of an agent.

        :param year: The current year
        :param agent: The agent
        """
        profile = agent.profile
        self.recorder.emit(
            year,
            "birth",
            agent_id=agent.agent_id,
            parent_a=profile.parent_ids[0],
            parent_b=profile.parent_ids[1],
            persona=profile.persona,
            career=profile.career,
            three_views=profile.three_views,
            location=agent.location_index,
        )

    def top_strategies(self) -> "list[Agent]":
        """
        Get the best agents of the current generation.

        :return: the alive agents with the highest generation mean score
        """
        scores: "dict[str, list[int]]" = {}
        for reports in self.history.get(self.generation, []):
            for agent_id, report in reports.items():
                scores.setdefault(agent_id, []).append(report.score)
        alive = [a for a in self.agents if a.agent_id in scores]
        alive.sort(
            key=lambda a: (-float(numpy.mean(scores[a.agent_id])), a.agent_id)
        )
        evolution = self.config.evolution
        count = math.ceil(
            portion(evolution.norm_fraction, evolution.population_size)
        )
        return alive[:count]

    def enter_generation(self, clock: Clock) -> None:
        """
        Set the norm and the questionnaire of a new generation.

        :param clock: The clock at the generation start
        :raises MissingNorm: when a predefined norm is missing
        :raises EmptyStrategies: when no agent was scored in the last
            generation of a dynamic schedule
        :raises EmptyNormText: when the evolved norm is empty
        :raises MalformedQuestionnaire: when the questionnaire stays invalid
        """
        year = clock.year
        backends = self.backends
        dynamic = self.schedule.dynamic
        first = self.norm is None
        tracer = TracingBackend(backends.generator)
        if dynamic and self.norm is not None:
            strategies = [
                trajectory_window(agent, self.generation, year - 1)
                for agent in self.top_strategies()
            ]
            self.schedule.record(
                evolve_norm(
                    strategies,
                    self.schedule,
                    self.norm,
                    year,
                    tracer,
                    backends.generator_sampling,
                )
            )
        self.norm = current_norm(self.schedule, clock)
        self.recorder.emit(
            year,
            "norm_set",
            text=self.norm.text,
            mode=self.schedule.mode,
            calls=tracer.drain(),
        )
        predefined = self.questionnaires.get(year)
        if predefined is not None and (first or not dynamic):
            self.questionnaire = predefined
        else:
            self.questionnaire = generate_questionnaire(
                self.norm, tracer, backends.generator_sampling
            )
        self.recorder.emit(
            year,
            "questionnaire_set",
            items=[[i.aspect, i.question] for i in self.questionnaire.items],
            calls=tracer.drain(),
        )
        self.generation = year
        self.history[year] = []
        get_logger().linfo(f"generation {year}: {self.norm.text}\n", 2)

    def step(self, year: int) -> None:
        """
        Run one timestep.

        :param year: The current year
        :raises SimulationError: when the timestep cannot be completed
        """
        evolutionary = self.method == "evolutionary"
        if evolutionary:
            self.explore(year)
            self.maintain(year)
        statements = self.answer(year)
        reports = self.evaluate(year, statements)
        self.history[self.generation].append(reports)
        self.deliver(year, reports)
        if evolutionary:
            self.evolve(year, reports)
        mean = numpy.mean([r.score for r in reports.values()])
        get_logger().linfo(f"{year}: mean fitness {mean:.2f}\n")

    def explore(self, year: int) -> None:
        """
        Let every agent plan, move and witness the others.

        :param year: The current year
        """
        norm, _ = self.context()
        backend, sampling = self.backends.agent, self.backends.agent_sampling
        for _ in range(self.config.agent.actions_per_step):
            snapshot = self.world.snapshot(year, norm.text)
            tracers = self.tracers(backend)
            observations = [perceive(a, snapshot) for a in self.agents]

            def act(index: int) -> ActionRecord:
                agent = self.agents[index]
                return plan_and_act(
                    agent,
                    observations[index],
                    tracers[agent.agent_id],
                    sampling,
                )

            records = fan_out(act, range(len(self.agents)), self.workers)
            for agent, record in zip(self.agents, records):
                self.world.place(agent.agent_id, agent.location_index)
                self.recorder.emit(
                    year,
                    "action",
                    agent_id=agent.agent_id,
                    plan=record.plan_text,
                    next_place=record.next_place,
                    location=agent.location_index,
                    calls=tracers[agent.agent_id].drain(),
                )
            self.witness(year, records)

    def witness(self, year: int, records: "Sequence[ActionRecord]") -> None:
        """
        Let every agent remember what happened at its location.

        :param year: The current year
        :param records: The actions of the step, in agent order
        """
        by_place: "dict[int, list[str]]" = {}
        for agent, record in zip(self.agents, records):
            place = self.world.locations[agent.location_index]
            by_place.setdefault(agent.location_index, []).append(
                f"{year}: agent_{agent.agent_id} at {place.name}: "
                f"{record.plan_text}"
            )
        for agent in self.agents:
            remember(agent, by_place[agent.location_index])

    def maintain(self, year: int) -> None:
        """
        Compress the short-term memories that are full.

        :param year: The current year
        """
        norm, _ = self.context()
        backends = self.backends
        tracers = self.tracers(backends.agent)
        summaries = fan_out(
            lambda agent: compress_memory(
                agent,
                norm,
                tracers[agent.agent_id],
                backends.agent_sampling,
            ),
            self.agents,
            self.workers,
        )
        for agent, summary in zip(self.agents, summaries):
            if summary is not None:
                self.recorder.emit(
                    year,
                    "compression",
                    agent_id=agent.agent_id,
                    summary=summary,
                    calls=tracers[agent.agent_id].drain(),
                )

    def answer(self, year: int) -> "dict[str, StatementSet]":
        """
        Collect the statements of every agent.

        :param year: The current year
        :return: the statements keyed by agent id
        :raises PartialStatements: when an agent leaves an item unanswered
        """
        norm, questionnaire = self.context()
        sampling = self.backends.agent_sampling
        tracers = self.tracers(self.backends.agent)
        method = self.method
        rounds = {"react": react_step, "reflexion": reflexion_step}

        def ask(
            agent: Agent,
        ) -> "tuple[BaselineState | None, StatementSet]":
            backend = tracers[agent.agent_id]
            if method == "evolutionary":
                return None, answer_questionnaire(
                    agent, questionnaire, norm, backend, sampling, year
                )
            if method == "frozen":
                return None, frozen_step(
                    agent.profile, norm, questionnaire, backend, sampling, year
                )
            return rounds[method](
                self.states[agent.agent_id],
                norm,
                questionnaire,
                backend,
                sampling,
                year,
            )

        outcomes = fan_out(ask, self.agents, self.workers)
        statements = {}
        for agent, (state, answers) in zip(self.agents, outcomes):
            if state is not None:
                self.states[agent.agent_id] = state
                agent.actions.append(
                    ActionRecord(
                        year=year,
                        agent_id=agent.agent_id,
                        plan_text=state.rolling_history[-1].thought,
                    )
                )
            statements[agent.agent_id] = answers
            self.recorder.emit(
                year,
                "statement",
                agent_id=agent.agent_id,
                answers=[list(pair) for pair in answers.answers],
                calls=tracers[agent.agent_id].drain(),
            )
        return statements

    def evaluate(
        self, year: int, statements: "dict[str, StatementSet]"
    ) -> "dict[str, FitnessReport]":
        """
        Score every agent.

        :param year: The current year
        :param statements: The statements keyed by agent id
        :return: the reports keyed by agent id
        :raises ScoringAborted: when too many agents fail scoring
        """
        norm, questionnaire = self.context()
        inputs = [
            EvaluationInput(
                profile=agent.profile,
                norm=norm,
                questionnaire=questionnaire,
                statements=statements[agent.agent_id],
                trajectory=trajectory_window(agent, self.generation, year),
            )
            for agent in self.agents
        ]
        tracers = self.tracers(self.backends.observer)
        reports = score_population(
            inputs,
            self.backends.observer,
            self.backends.observer_sampling,
            self.workers,
            self.config.max_failure_fraction,
            year,
            tracers.__getitem__,
        )
        for agent_id, report in reports.items():
            self.recorder.emit(
                year,
                "score",
                agent_id=agent_id,
                score=report.score,
                feedback=report.feedback,
                fallback=report.fallback,
                calls=tracers[agent_id].drain(),
            )
        return reports

    def deliver(self, year: int, reports: "dict[str, FitnessReport]") -> None:
        """
        Hand the reports over to the agents.

        :param year: The current year
        :param reports: The reports keyed by agent id

        The frozen method records the fitness but receives no feedback.
        """
        for agent in self.agents:
            report = reports[agent.agent_id]
            if self.method == "frozen":
                agent.record_fitness(year, report.score)
                continue
            if self.method == "evolutionary":
                deliver_feedback(agent, report)
            else:
                state = self.states[agent.agent_id]
                self.states[agent.agent_id] = observe(state, report)
                agent.feedback.append((year, report.feedback))
                agent.record_fitness(year, report.score)
            self.recorder.emit(
                year,
                "feedback",
                agent_id=agent.agent_id,
                text=feedback_event(report),
            )

    def evolve(self, year: int, reports: "dict[str, FitnessReport]") -> None:
        """
        Replace the weakest agents by offspring of the strongest.

        :param year: The current year
        :param reports: The reports keyed by agent id
        """
        backends = self.backends
        tracers: "dict[str, TracingBackend]" = {}

        def next_id() -> str:
            agent_id = self.next_id()
            tracers[agent_id] = TracingBackend(backends.agent)
            return agent_id

        try:
            outcome = next_generation(
                self.agents,
                reports,
                self.config.evolution,
                year,
                backends.agent,
                self.rng,
                next_id,
                backends.agent_sampling,
                self.workers,
                tracers.__getitem__,
            )
        except (DegeneratePopulation, InsufficientParents) as exc:
            get_logger().lwarn(f"{year}: evolution skipped: {exc.detail()}\n")
            return
        for agent_id in outcome.split.eliminated:
            self.world.remove(agent_id)
            self.recorder.emit(
                year,
                "elimination",
                agent_id=agent_id,
                score=reports[agent_id].score,
            )
        by_id = {agent.agent_id: agent for agent in outcome.agents}
        for child in outcome.offspring:
            profile = child.profile
            agent = by_id[profile.agent_id]
            self.recorder.emit(
                year,
                "crossover",
                agent_id=profile.agent_id,
                parent_a=parent_of(child),
                parent_b=profile.parent_ids[1],
            )
            calls = tracers[profile.agent_id].drain()
            if calls:
                self.recorder.emit(
                    year,
                    "mutation",
                    agent_id=profile.agent_id,
                    attributes=list(child.mutated),
                    calls=calls,
                )
            self.world.place(agent.agent_id, agent.location_index)
            self.birth(year, agent)
        self.agents = outcome.agents


def _load_inputs(
    config: "ExperimentConfig",
) -> "tuple[ScheduleData, AttributeTables]":
    schedule_path = config.schedule_path
    attributes_path = config.attributes_path
    return (
        load_schedule(pathlib.Path(schedule_path) if schedule_path else None),
        load_attribute_tables(
            pathlib.Path(attributes_path) if attributes_path else None
        ),
    )


def run(
    config: "ExperimentConfig",
    output_dir: "pathlib.Path | None" = None,
    backends: "Backends | None" = None,
) -> RunLog:
    """
    Run every trial of an experiment.

    :param config: The configuration
    :param output_dir: The output directory (the configured one if `None`)
    :param backends: The backends (built from the configuration if `None`)
    :return: the run log of all trials
    :raises SimulationError: when a trial is aborted; its partial log is
        left behind

    Every trial writes ``config.snapshot``, ``runlog.jsonl`` and
    ``metrics.csv`` to its ``trial-<k>`` directory. The averaged metrics
    and the other exports go to the output directory itself.
    """
    out = output_dir or pathlib.Path(config.output_dir)
    data, tables = _load_inputs(config)
    backends = backends or make_backends(config)
    log = RunLog(
        config.method,
        config.clock.start_year,
        config.clock.generation_years,
    )
    for trial in range(1, config.trials + 1):
        trial_dir = out / f"{TRIAL_PREFIX}{trial}"
        seed = trial_seed(config, trial)
        snapshot = config.snapshot(
            {
                "seed": seed,
                "templates": template_versions(),
                "trial": trial,
            }
        )
        write_export(trial_dir / SNAPSHOT_NAME, snapshot)
        with log_scope(f"{config.method} trial {trial}"):
            get_logger().linfo(f"started with seed {seed}\n")
            try:
                with TrialRecorder(log, trial, trial_dir / RUNLOG_NAME) as rec:
                    Simulation(
                        config, trial, backends, rec, data, tables
                    ).run()
            except SimulationError as exc:
                get_logger().lerror(
                    f"aborted, partial log kept in {trial_dir}: "
                    f"{exc.detail()}\n"
                )
                raise
        export_metrics(
            average_trials([log.of_trial(trial)]), trial_dir / METRICS_NAME
        )
    export_run([log], out)
    return log


def sweep(
    config: "ExperimentConfig",
    sizes: "Sequence[int]",
    rates: "Sequence[float]",
    output_dir: "pathlib.Path | None" = None,
    make: "Callable[[ExperimentConfig], Backends] | None" = None,
) -> "list[pathlib.Path]":
    """
    Run the experiment over a grid of population sizes and mutation rates.

    :param config: The base configuration
    :param sizes: The population sizes
    :param rates: The mutation rates
    :param output_dir: The output directory (the configured one if `None`)
    :param make: The backend factory (`make_backends` if `None`)
    :return: the run directories, one per grid point
    :raises ExportError: when the grid is empty
    :raises SimulationError: when a run fails

    Every grid point is a full run in its own ``N<size>-m<rate>`` directory.
    The averaged series of all points are combined in ``sweep.csv``.
    """
    if not sizes or not rates:
        raise ExportError("empty sweep grid")
    out = output_dir or pathlib.Path(config.output_dir)
    make = make or make_backends
    run_dirs: "list[pathlib.Path]" = []
    rows: "list[list[str]]" = []
    for size in sizes:
        for rate in rates:
            point = config.with_overrides(population=size, mutation=rate)
            run_dir = out / f"N{size}-m{rate}"
            with log_scope(run_dir.name):
                log = run(point, run_dir, make(point))
            rows.extend(
                [str(size), repr(rate), *row.cells()[1:]]
                for row in average_trials([log]).rows
            )
            run_dirs.append(run_dir)
    write_export(out / SWEEP_NAME, csv_text(SWEEP_HEADER, rows))
    return run_dirs


def recorded_profile(log: RunLog, trial: int, agent_id: str) -> AgentProfile:
    """
    Rebuild the profile of an agent from its birth record.

    :param log: The run log
    :param trial: The trial number
    :param agent_id: The agent id
    :return: the profile
    :raises ConfigError: when the agent was never born in the trial
    """
    for record in log.select("birth", trial):
        data = record.payload
        if data["agent_id"] == agent_id:
            return AgentProfile(
                agent_id=agent_id,
                persona=data["persona"],
                career=data["career"],
                three_views=data["three_views"],
                birth_year=record.year,
                parent_ids=(data["parent_a"], data["parent_b"]),
            )
    raise ConfigError(f"agent_{agent_id} not found in trial {trial}")


def recorded_fitness(
    log: RunLog, trial: int, agent_id: str, generation: int
) -> float:
    """
    Get the mean score of an agent within a generation.

    :param log: The run log
    :param trial: The trial number
    :param agent_id: The agent id
    :param generation: The generation start year
    :return: the mean score
    :raises ConfigError: when the agent was not scored in the generation
    """
    scores = [
        r.payload["score"]
        for r in log.select("score", trial)
        if r.payload["agent_id"] == agent_id
        and log.generation_of(r.year) == generation
    ]
    if not scores:
        raise ConfigError(f"agent_{agent_id} has no score in {generation}")
    return float(numpy.mean(scores))


def recorded_best(
    log: RunLog, trial: int, generation: "int | None" = None
) -> "tuple[str, int]":
    """
    Get the best agent of a generation.

    :param log: The run log
    :param trial: The trial number
    :param generation: The generation start year (the last scored if `None`)
    :return: the agent id and the generation start year
    :raises ConfigError: when the generation has no best agent
    """
    best = {
        r.payload["generation"]: r.payload["agent_id"]
        for r in log.select("best_agent", trial)
    }
    if generation is None:
        generation = max(best, default=log.start_year)
    if generation not in best:
        raise ConfigError(f"no best agent for {generation} in trial {trial}")
    return best[generation], generation
