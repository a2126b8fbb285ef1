#
# File:    ./src/evoagent/baselines.py
# Author:  Jiří Kučera <sanczes AT gmail.com>
# Date:    2026-10-19 14:47:19 +0200
# Project: evoagent: Evolutionary agents in an evolving society
#
# SPDX-License-Identifier: MIT
#
"""
Comparison methods.

ReAct and Reflexion agents keep a rolling history of their last rounds
(thought, action, observation, and for Reflexion a reflection). The frozen
method answers without any history at all.
"""

from typing import TYPE_CHECKING, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from evoagent.agent import (
    NOTHING,
    AgentProfile,
    StatementSet,
    elicit_statements,
    profile_vars,
)
from evoagent.prompts import load_template

if TYPE_CHECKING:
    from evoagent.backend import Backend, Sampling
    from evoagent.observer import FitnessReport
    from evoagent.society import Questionnaire, SocialNorm

HISTORY_WINDOW: int = 3


class BaselineRound(BaseModel):
    """One round of a baseline agent."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    year: int
    thought: str
    action: str
    observation: Optional[str] = None
    reflection: Optional[str] = None

    def render(self) -> str:
        """
        Render the round for prompts.

        :return: the round text
        """
        lines = [
            f"[{self.year}] Thought: {self.thought}",
            f"Action: {self.action}",
            f"Observation: {self.observation or NOTHING}",
        ]
        if self.reflection:
            lines.append(f"Reflection: {self.reflection}")
        return "\n".join(lines)


class BaselineState(BaseModel):
    """A baseline agent and its bounded history."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    profile: AgentProfile
    rolling_history: List[BaselineRound] = Field(default_factory=list)
    window: int = Field(default=HISTORY_WINDOW, gt=0)

    def history_text(self) -> str:
        """
        Render the history for prompts.

        :return: the rounds, oldest first
        """
        text = "\n\n".join(r.render() for r in self.rolling_history)
        return text or NOTHING

    def push(self, entry: BaselineRound) -> "BaselineState":
        """
        Append a round, evicting the oldest ones beyond the window.

        :param entry: The round
        :return: the new state
        """
        rounds = [*self.rolling_history, entry][-self.window :]
        return self.model_copy(update={"rolling_history": rounds})


def _think(
    state: BaselineState,
    norm: "SocialNorm",
    year: int,
    backend: "Backend",
    sampling: "Sampling | None",
) -> str:
    return (
        load_template("react_thought")
        .complete(
            backend,
            sampling,
            **profile_vars(state.profile),
            current_time=year,
            norm=norm.text,
            history=state.history_text(),
        )
        .strip()
    )


def _round(
    state: BaselineState,
    norm: "SocialNorm",
    questionnaire: "Questionnaire",
    backend: "Backend",
    sampling: "Sampling | None",
    year: int,
    reflection: "str | None",
) -> "tuple[BaselineState, StatementSet]":
    thought = _think(state, norm, year, backend, sampling)
    context = thought if not reflection else f"{reflection} {thought}"
    statements = elicit_statements(
        profile_vars(state.profile, state.history_text()),
        questionnaire,
        norm,
        backend,
        sampling,
        year,
        context or NOTHING,
    )
    entry = BaselineRound(
        year=year,
        thought=thought,
        action=statements.render(),
        reflection=reflection,
    )
    return state.push(entry), statements


def react_step(
    state: BaselineState,
    norm: "SocialNorm",
    questionnaire: "Questionnaire",
    backend: "Backend",
    sampling: "Sampling | None" = None,
    year: "int | None" = None,
) -> "tuple[BaselineState, StatementSet]":
    """
    Run one ReAct round: a thought, then the statements as the action.

    :param state: The state
    :param norm: The current norm
    :param questionnaire: The questionnaire
    :param backend: The agent backend
    :param sampling: The sampling parameters
    :param year: The current year (the questionnaire year by default)
    :return: the new state and the statements
    """
    year = year or questionnaire.generation_year
    return _round(state, norm, questionnaire, backend, sampling, year, None)


def reflexion_step(
    state: BaselineState,
    norm: "SocialNorm",
    questionnaire: "Questionnaire",
    backend: "Backend",
    sampling: "Sampling | None" = None,
    year: "int | None" = None,
) -> "tuple[BaselineState, StatementSet]":
    """
    Run one Reflexion round.

    :param state: The state
    :param norm: The current norm
    :param questionnaire: The questionnaire
    :param backend: The agent backend
    :param sampling: The sampling parameters
    :param year: The current year (the questionnaire year by default)
    :return: the new state and the statements

    The agent first reflects on the last observation; without one there is
    nothing to reflect on and the round is a plain ReAct round.
    """
    year = year or questionnaire.generation_year
    last = state.rolling_history[-1] if state.rolling_history else None
    reflection = None
    if last is not None and last.observation:
        reflection = (
            load_template("reflexion")
            .complete(
                backend,
                sampling,
                **profile_vars(state.profile),
                current_time=year,
                norm=norm.text,
                observation=last.observation,
            )
            .strip()
            or None
        )
    return _round(
        state, norm, questionnaire, backend, sampling, year, reflection
    )


def observe(state: BaselineState, report: "FitnessReport") -> BaselineState:
    """
    Record the observer feedback as the observation of the last round.

    :param state: The state
    :param report: The report
    :return: the new state
    """
    if not state.rolling_history:
        return state
    last = state.rolling_history[-1].model_copy(
        update={
            "observation": f"Score {report.score}/7. {report.feedback}"
        }
    )
    rounds = [*state.rolling_history[:-1], last]
    return state.model_copy(update={"rolling_history": rounds})


def frozen_step(
    profile: AgentProfile,
    norm: "SocialNorm",
    questionnaire: "Questionnaire",
    backend: "Backend",
    sampling: "Sampling | None" = None,
    year: "int | None" = None,
) -> StatementSet:
    """
    Answer the questionnaire without any memory.

    :param profile: The profile
    :param norm: The current norm
    :param questionnaire: The questionnaire
    :param backend: The agent backend
    :param sampling: The sampling parameters
    :param year: The current year (the questionnaire year by default)
    :return: the statements
    """
    return elicit_statements(
        profile_vars(profile), questionnaire, norm, backend, sampling, year
    )
