#
# File:    ./src/evoagent/observer.py
# Author:  Jiří Kučera <sanczes AT gmail.com>
# Date:    2026-10-19 13:31:45 +0200
# Project: evoagent: Evolutionary agents in an evolving society
#
# SPDX-License-Identifier: MIT
#
"""
The social observer.

The observer reads an agent's profile, its statements and its behavior and
scores the adherence to the current norm on a 7-point scale, together with
feedback in natural language.
"""

import re
from typing import TYPE_CHECKING, Callable

from pydantic import BaseModel, ConfigDict, Field, model_validator

from evoagent.agent import AgentProfile, StatementSet, Trajectory
from evoagent.errors import MalformedScore, ScoringAborted
from evoagent.logging import get_logger
from evoagent.pool import fan_out
from evoagent.prompts import load_template
from evoagent.society import Questionnaire, SocialNorm

if TYPE_CHECKING:
    from evoagent.agent import Agent
    from evoagent.backend import Backend, Sampling

SCORE_MIN: int = 1
SCORE_MAX: int = 7
SCORING_ATTEMPTS: int = 3
FALLBACK_FEEDBACK: str = "The observer could not evaluate your behavior."

_SCORE_LINE = re.compile(r"###\s*Score:\s*(\S*?)\s*###\s*Feedback: ?(.*)")
_INTEGER = re.compile(r"[+-]?\d+")


class FitnessReport(BaseModel):
    """The score and feedback of one agent."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    agent_id: str
    year: int
    score: int = Field(ge=SCORE_MIN, le=SCORE_MAX)
    feedback: str = Field(min_length=1)
    fallback: bool = False


class EvaluationInput(BaseModel):
    """Everything the observer sees about one agent."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    profile: AgentProfile
    norm: SocialNorm
    questionnaire: Questionnaire
    statements: StatementSet
    trajectory: Trajectory

    @model_validator(mode="after")
    def _check(self) -> "EvaluationInput":
        if self.statements.generation_year != (
            self.questionnaire.generation_year
        ):
            raise ValueError("statements answer another questionnaire")
        return self

    @property
    def agent_id(self) -> str:
        """
        Get the id of the evaluated agent.

        :return: the agent id
        """
        return self.profile.agent_id

    def render_statements(self) -> str:
        """
        Render the statements together with the questions they answer.

        :return: a question line and an answer line per item
        """
        questions = {i.aspect: i.question for i in self.questionnaire.items}
        return "\n".join(
            f"Question ({aspect}): {questions[aspect]}\nAnswer: {text}"
            if aspect in questions
            else f"{aspect}: {text}"
            for aspect, text in self.statements.answers
        )


def format_score(score: int, feedback: str) -> str:
    """
    Format the score line.

    :param score: The score
    :param feedback: The feedback
    :return: the line
    """
    return f"### Score: {score} ### Feedback: {feedback}"


def parse_score(text: str) -> "tuple[int, str]":
    """
    Parse the score line out of the observer output.

    :param text: The observer output
    :return: the score and the feedback
    :raises MalformedScore: when there is no valid score line

    The last line in the ``### Score: {} ### Feedback: {}`` format counts.
    Scores must be integers within the scale; fractions are rejected. Only
    line feeds end a line (a carriage return before one is dropped) and the
    feedback is kept as written.
    """
    lines = [line.removesuffix("\r") for line in text.split("\n")]
    matches = [m for m in map(_SCORE_LINE.search, lines) if m is not None]
    if not matches:
        raise MalformedScore("no score line")
    token, feedback = matches[-1].group(1).strip("[]"), matches[-1].group(2)
    if not _INTEGER.fullmatch(token):
        raise MalformedScore(f"score {token!r} is not an integer")
    score = int(token)
    if not SCORE_MIN <= score <= SCORE_MAX:
        raise MalformedScore(f"score {score} is out of scale")
    if not feedback.strip():
        raise MalformedScore("empty feedback")
    return score, feedback


def score_agent(
    data: EvaluationInput,
    backend: "Backend",
    sampling: "Sampling | None" = None,
    year: "int | None" = None,
) -> FitnessReport:
    """
    Score one agent.

    :param data: The evaluation input
    :param backend: The observer backend
    :param sampling: The sampling parameters
    :param year: The evaluation year (the trajectory end by default)
    :return: the report
    :raises MalformedScore: when no attempt yields a valid score line
    """
    template = load_template("scoring")
    profile = data.profile
    error = MalformedScore()
    for attempt in range(SCORING_ATTEMPTS):
        text = template.complete(
            backend,
            sampling,
            attempt,
            persona=profile.persona,
            career=profile.career,
            three_views=profile.three_views,
            statements=data.render_statements(),
            behavior=data.trajectory.render(),
            norm=data.norm.text,
        )
        try:
            score, feedback = parse_score(text)
        except MalformedScore as exc:
            get_logger().ldebug(
                f"agent_{profile.agent_id}: score attempt {attempt + 1} "
                f"rejected: {exc.detail()}\n"
            )
            error = exc
            continue
        return FitnessReport(
            agent_id=profile.agent_id,
            year=data.trajectory.window_end if year is None else year,
            score=score,
            feedback=feedback,
        )
    raise error


def score_population(
    inputs: "list[EvaluationInput]",
    backend: "Backend",
    sampling: "Sampling | None" = None,
    workers: int = 1,
    max_failure_fraction: float = 0.2,
    year: "int | None" = None,
    route: "Callable[[str], Backend] | None" = None,
) -> "dict[str, FitnessReport]":
    """
    Score every agent.

    :param inputs: The evaluation inputs, one per alive agent
    :param backend: The observer backend
    :param sampling: The sampling parameters
    :param workers: The number of concurrent evaluations
    :param max_failure_fraction: The largest tolerated share of failures
    :param year: The evaluation year
    :param route: Optional per-agent backend selector (used for tracing)
    :return: the reports keyed by agent id, in agent id order
    :raises ScoringAborted: when too many agents fail scoring

    Agents whose scoring failed within the tolerance get a fallback report
    at the bottom of the scale.
    """

    def evaluate(data: EvaluationInput) -> "FitnessReport | MalformedScore":
        chosen = route(data.agent_id) if route is not None else backend
        try:
            return score_agent(data, chosen, sampling, year)
        except MalformedScore as exc:
            return exc

    ordered = sorted(inputs, key=lambda data: data.agent_id)
    outcomes = fan_out(evaluate, ordered, workers)
    failed = [
        data.agent_id
        for data, outcome in zip(ordered, outcomes)
        if isinstance(outcome, MalformedScore)
    ]
    if ordered and len(failed) > max_failure_fraction * len(ordered):
        raise ScoringAborted(
            f"{len(failed)} of {len(ordered)} agents failed scoring"
        )
    reports = {}
    for data, outcome in zip(ordered, outcomes):
        if isinstance(outcome, MalformedScore):
            get_logger().lwarn(
                f"agent_{data.agent_id}: scoring failed "
                f"({outcome.detail()}), using the fallback score\n"
            )
            outcome = FitnessReport(
                agent_id=data.agent_id,
                year=data.trajectory.window_end if year is None else year,
                score=SCORE_MIN,
                feedback=FALLBACK_FEEDBACK,
                fallback=True,
            )
        reports[data.agent_id] = outcome
    return reports


def feedback_event(report: FitnessReport) -> str:
    """
    Format the feedback as a short-term memory event.

    :param report: The report
    :return: the event text
    """
    return f"Social feedback ({report.year}): {report.feedback}"


def deliver_feedback(agent: "Agent", report: FitnessReport) -> None:
    """
    Hand the report over to the agent.

    :param agent: The agent
    :param report: The report of this agent
    :raises ValueError: when the report belongs to another agent
    """
    if report.agent_id != agent.agent_id:
        raise ValueError(f"report of {report.agent_id} for {agent.agent_id}")
    agent.memory.short_term.append(feedback_event(report))
    agent.feedback.append((report.year, report.feedback))
    agent.record_fitness(report.year, report.score)
