#
# File:    ./src/evoagent/downstream.py
# Author:  Jiří Kučera <sanczes AT gmail.com>
# Date:    2026-10-19 15:58:12 +0200
# Project: evoagent: Evolutionary agents in an evolving society
#
# SPDX-License-Identifier: MIT
#
"""
Downstream task evaluation.

An evolved agent answers general instruction prompts in persona and a judge
grades every answer on the same 1 to 7 scale the observer uses.
"""

import json
import pathlib
import re
from typing import TYPE_CHECKING, List, Optional

import numpy
from pydantic import BaseModel, ConfigDict, Field

from evoagent.agent import profile_vars
from evoagent.errors import DatasetMissing, MalformedScore
from evoagent.logging import get_logger
from evoagent.observer import SCORE_MAX, SCORE_MIN
from evoagent.pool import fan_out
from evoagent.prompts import load_template

if TYPE_CHECKING:
    from evoagent.agent import AgentProfile
    from evoagent.backend import Backend, Sampling

JUDGE_ATTEMPTS: int = 3
DEFAULT_SAMPLE_COUNT: int = 50

_RATING = re.compile(r"\[\[\s*([^\]]*?)\s*\]\]")
_PROMPT_KEYS: "tuple[str, ...]" = ("prompt", "question", "text")


def _prompt_of(entry: object) -> "str | None":
    if isinstance(entry, str):
        return entry
    if not isinstance(entry, dict):
        return None
    for key in _PROMPT_KEYS:
        if isinstance(entry.get(key), str):
            return entry[key]
    # Self-instruct style
    if isinstance(entry.get("instruction"), str):
        instances = entry.get("instances") or [{}]
        extra = instances[0].get("input", "") if instances else ""
        return f"{entry['instruction']}\n{extra}".strip()
    # Multi-turn (Vicuna, LIMA)
    for key in ("turns", "conversations"):
        turns = entry.get(key)
        if isinstance(turns, list) and turns:
            first = turns[0]
            if isinstance(first, dict):
                first = first.get("value") or first.get("content")
            if isinstance(first, str):
                return first
    return None


def load_dataset(path: pathlib.Path) -> "list[str]":
    """
    Load the prompts of an evaluation dataset.

    :param path: The path to a JSON array or a JSON Lines file
    :return: the prompts in file order
    :raises DatasetMissing: when the file cannot be read or holds no prompt

    Entries may be plain strings or objects with a ``prompt``,
    ``question``, ``text``, ``instruction`` (plus ``instances``), ``turns``
    or ``conversations`` key. Entries without a prompt are skipped.
    """
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetMissing(f"cannot read {path}: {exc}") from exc
    lines = [line for line in text.splitlines() if line.strip()]
    try:
        if text.lstrip().startswith("["):
            entries = json.loads(text)
        else:
            entries = [json.loads(line) for line in lines]
    except ValueError as exc:
        raise DatasetMissing(f"{path}: {exc}") from exc
    prompts = [p for p in map(_prompt_of, entries) if p and p.strip()]
    if not prompts:
        raise DatasetMissing(f"{path} holds no prompt")
    return prompts


def parse_rating(text: str) -> int:
    """
    Parse the judge verdict.

    :param text: The judge output
    :return: the rating
    :raises MalformedScore: when there is no integer ``[[x]]`` in the scale

    The last ``[[x]]`` of the output counts.
    """
    matches = _RATING.findall(text)
    if not matches:
        raise MalformedScore("no [[rating]]")
    token = matches[-1]
    if not re.fullmatch(r"[+-]?\d+", token):
        raise MalformedScore(f"rating {token!r} is not an integer")
    rating = int(token)
    if not SCORE_MIN <= rating <= SCORE_MAX:
        raise MalformedScore(f"rating {rating} is out of scale")
    return rating


def judge_answer(
    question: str,
    answer: str,
    backend: "Backend",
    sampling: "Sampling | None" = None,
) -> int:
    """
    Grade one answer.

    :param question: The prompt
    :param answer: The answer of the agent
    :param backend: The judge backend
    :param sampling: The sampling parameters
    :return: the rating
    :raises MalformedScore: when no attempt yields a valid rating
    """
    template = load_template("downstream_judge")
    error = MalformedScore()
    for attempt in range(JUDGE_ATTEMPTS):
        text = template.complete(
            backend, sampling, attempt, question=question, answer=answer
        )
        try:
            return parse_rating(text)
        except MalformedScore as exc:
            get_logger().ldebug(
                f"judge attempt {attempt + 1} rejected: {exc.detail()}\n"
            )
            error = exc
    raise error


class DownstreamResult(BaseModel):
    """The downstream scores of one agent."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    agent_id: str
    dataset: str
    ratings: List[int] = Field(min_length=1)
    functionality: float = Field(ge=SCORE_MIN, le=SCORE_MAX)
    alignment: Optional[float] = None
    overall: Optional[float] = None


def overall_score(functionality: float, alignment: float) -> float:
    """
    Combine the functionality and the alignment scores.

    :param functionality: The mean downstream rating
    :param alignment: The alignment (fitness) score
    :return: their mean
    """
    return (functionality + alignment) / 2


def downstream_eval(
    profile: "AgentProfile",
    dataset_path: pathlib.Path,
    agent_backend: "Backend",
    judge_backend: "Backend",
    sample_count: int = DEFAULT_SAMPLE_COUNT,
    alignment: "float | None" = None,
    agent_sampling: "Sampling | None" = None,
    judge_sampling: "Sampling | None" = None,
    workers: int = 1,
) -> DownstreamResult:
    """
    Evaluate an agent on a downstream dataset.

    :param profile: The agent profile
    :param dataset_path: The path to the dataset
    :param agent_backend: The backend answering in persona
    :param judge_backend: The judge backend
    :param sample_count: The number of prompts, taken from the start
    :param alignment: The alignment score for the overall score
    :param agent_sampling: The sampling parameters of the agent
    :param judge_sampling: The sampling parameters of the judge
    :param workers: The number of concurrent prompts
    :return: the result
    :raises DatasetMissing: when the dataset is missing or too small
    :raises MalformedScore: when the judge output stays unparsable
    """
    prompts = load_dataset(dataset_path)
    if sample_count < 1 or sample_count > len(prompts):
        raise DatasetMissing(
            f"{sample_count} samples requested, "
            f"{dataset_path} holds {len(prompts)}"
        )
    answer_template = load_template("downstream_answer")
    variables = profile_vars(profile)

    def grade(prompt: str) -> int:
        answer = answer_template.complete(
            agent_backend, agent_sampling, prompt=prompt, **variables
        ).strip()
        return judge_answer(prompt, answer, judge_backend, judge_sampling)

    ratings = fan_out(grade, prompts[:sample_count], workers)
    functionality = float(numpy.mean(ratings))
    get_logger().linfo(
        f"agent_{profile.agent_id}: functionality {functionality:.2f} "
        f"over {len(ratings)} prompts\n"
    )
    return DownstreamResult(
        agent_id=profile.agent_id,
        dataset=dataset_path.name,
        ratings=ratings,
        functionality=functionality,
        alignment=alignment,
        overall=(
            None
            if alignment is None
            else overall_score(functionality, alignment)
        ),
    )
