#
# File:    ./src/evoagent/prompts.py
# Author:  Jiří Kučera <sanczes AT gmail.com>
# Date:    2026-10-19 11:12:40 +0200
# Project: evoagent: Evolutionary agents in an evolving society
#
# SPDX-License-Identifier: MIT
#
"""
Versioned prompt templates.

A template file starts with a ``version: N`` header terminated by a ``---``
line. The body is either a plain user prompt or is split into ``[system]``
and ``[user]`` sections. Placeholders are written as ``{name}``; a
placeholder without a value is left untouched, so literal braces such as
``'### Score: {} ### Feedback: {}'`` survive rendering.
"""

import functools
import re

from pydantic import BaseModel, ConfigDict, Field

from evoagent.assets import asset_path
from evoagent.backend import (
    DEFAULT_SAMPLING,
    Backend,
    CompletionRequest,
    Sampling,
)
from evoagent.errors import ConfigError

_PLACEHOLDER = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")
_SECTION = re.compile(r"^\[(system|user)\]$", re.MULTILINE)

RETRY_NOTE: str = (
    "(Attempt {attempt}: the previous reply could not be used. "
    "Follow the requested output format exactly.)"
)


class PromptTemplate(BaseModel):
    """A named, versioned prompt template."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = Field(min_length=1)
    version: int = Field(ge=1)
    system: str = ""
    user: str = Field(min_length=1)

    @property
    def template_id(self) -> str:
        """
        Get the identifier used to route scripted rules.

        :return: the template name
        """
        return self.name

    @staticmethod
    def substitute(text: str, variables: "dict[str, object]") -> str:
        """
        Substitute placeholders in *text*.

        :param text: The text with placeholders
        :param variables: The placeholder values
        :return: the text with known placeholders replaced
        """

        def replace(match: "re.Match[str]") -> str:
            key = match.group(1)
            if key in variables:
                return str(variables[key])
            return match.group(0)

        return _PLACEHOLDER.sub(replace, text)

    def render(self, **variables: object) -> "tuple[str, str]":
        """
        Render the template.

        :param variables: The placeholder values
        :return: the pair of rendered system and user prompts
        """
        return (
            self.substitute(self.system, variables),
            self.substitute(self.user, variables),
        )

    def request(
        self,
        sampling: "Sampling | None" = None,
        attempt: int = 0,
        **variables: object,
    ) -> CompletionRequest:
        """
        Render the template into a completion request.

        :param sampling: The sampling parameters
        :param attempt: The zero-based attempt number
        :param variables: The placeholder values
        :return: the request tagged with this template id

        Repeated attempts carry a reminder line so every attempt is a fresh
        request (and a distinct cache entry).
        """
        sampling = sampling or DEFAULT_SAMPLING
        system, user = self.render(**variables)
        if attempt > 0:
            user = f"{user}\n{RETRY_NOTE.format(attempt=attempt + 1)}"
        return CompletionRequest.of(
            user,
            system=system,
            template_id=self.template_id,
            temperature=sampling.temperature,
            max_tokens=sampling.max_tokens,
            model_tag=sampling.model_tag,
        )

    def complete(
        self,
        backend: "Backend",
        sampling: "Sampling | None" = None,
        attempt: int = 0,
        **variables: object,
    ) -> str:
        """
        Render the template and complete it on *backend*.

        :param backend: The backend
        :param sampling: The sampling parameters
        :param attempt: The zero-based attempt number
        :param variables: The placeholder values
        :return: the response text
        """
        request = self.request(sampling, attempt, **variables)
        return backend.complete(request).text

    @classmethod
    def parse(cls, name: str, text: str) -> "PromptTemplate":
        """
        Parse the template file contents.

        :param name: The template name
        :param text: The file contents
        :return: the template
        :raises ConfigError: when the header or the body is malformed
        """
        header, sep, body = text.partition("\n---\n")
        if not sep or not header.startswith("version:"):
            raise ConfigError(f"template {name}: missing version header")
        try:
            version = int(header.split(":", 1)[1])
        except ValueError as exc:
            raise ConfigError(f"template {name}: bad version") from exc
        sections = {"system": "", "user": ""}
        parts = _SECTION.split(body)
        if len(parts) == 1:
            sections["user"] = body
        else:
            for role, content in zip(parts[1::2], parts[2::2]):
                sections[role] = content
        return cls(
            name=name,
            version=version,
            system=sections["system"].strip("\n"),
            user=sections["user"].strip("\n"),
        )


@functools.lru_cache(maxsize=None)
def load_template(name: str) -> PromptTemplate:
    """
    Load the packaged template *name*.

    :param name: The template name (the file stem)
    :return: the template
    :raises ConfigError: when the template is missing or malformed
    """
    path = asset_path("templates") / f"{name}.txt"
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read template {name}: {exc}") from exc
    return PromptTemplate.parse(name, text)


TEMPLATE_NAMES: "tuple[str, ...]" = (
    "exploration",
    "memory_compression",
    "questionnaire",
    "persona_mutation",
    "career_mutation",
    "views_mutation",
    "norm_evolving",
    "scoring",
    "statement",
    "react_thought",
    "reflexion",
    "downstream_answer",
    "downstream_judge",
)


def template_versions() -> "dict[str, int]":
    """
    Get the versions of all packaged templates.

    :return: the mapping from template name to version
    """
    return {name: load_template(name).version for name in TEMPLATE_NAMES}
