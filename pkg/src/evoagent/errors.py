#
# File:    ./src/evoagent/errors.py
# Author:  Jiří Kučera <sanczes AT gmail.com>
# Date:    2026-10-19 09:20:11 +0200
# Project: evoagent: Evolutionary agents in an evolving society
#
# SPDX-License-Identifier: MIT
#
"""Definitions of errors."""


class ApplicationError(Exception):
    """Base class for all application errors."""

    DEFAULT_DETAIL: str = ""
    __slots__ = ()

    def __init__(self) -> None:
        """Initialize the error object."""
        Exception.__init__(self)

    def detail(self) -> str:
        """
        Get the error detail.

        :return: the error detail
        """
        return type(self).DEFAULT_DETAIL

    def __repr__(self) -> str:
        """
        Get the error representation.

        :return: the error representation
        """
        return f"{type(self).__name__}({self.detail()})"

    def __str__(self) -> str:
        """
        Get the error representation (`str` alias).

        :return: the error representation
        """
        return repr(self)


class AppExitError(ApplicationError):
    """Used to signal the exit."""

    __slots__ = ("ecode",)

    def __init__(self, ecode: int = 1) -> None:
        """
        Initialize the error object.

        :param ecode: The exit code (default 1)
        """
        ApplicationError.__init__(self)
        self.ecode: int = ecode

    def detail(self) -> str:
        """
        Get the error detail.

        :return: the error detail
        """
        return f"exit_code={self.ecode}"


class SimulationError(ApplicationError):
    """
    Base class for errors raised by the simulation.

    The optional message overrides the class default detail.
    """

    __slots__ = ("message",)

    def __init__(self, message: str = "") -> None:
        """
        Initialize the error object.

        :param message: The error message
        """
        ApplicationError.__init__(self)
        self.message: str = message

    def detail(self) -> str:
        """
        Get the error detail.

        :return: the error detail
        """
        return self.message or type(self).DEFAULT_DETAIL


class ConfigError(SimulationError):
    """Invalid configuration, schedule, or attribute tables."""

    DEFAULT_DETAIL: str = "invalid configuration"
    __slots__ = ()


class UsageError(SimulationError):
    """Invalid command line arguments."""

    DEFAULT_DETAIL: str = "invalid arguments"
    __slots__ = ()


# Backend errors


class BackendError(SimulationError):
    """Base class for chat-completion backend errors."""

    DEFAULT_DETAIL: str = "backend failure"
    __slots__ = ()


class TransportError(BackendError):
    """Network or HTTP failure that persisted after retries."""

    DEFAULT_DETAIL: str = "transport failure"
    __slots__ = ()


class AuthError(BackendError):
    """Missing or rejected credential."""

    DEFAULT_DETAIL: str = "missing or invalid credential"
    __slots__ = ()


class BudgetExceeded(BackendError):
    """Configured token or call cap has been hit."""

    DEFAULT_DETAIL: str = "budget exceeded"
    __slots__ = ()


class CacheIOError(BackendError):
    """Response cache could not be read or written."""

    DEFAULT_DETAIL: str = "cache I/O failure"
    __slots__ = ()


# Society errors


class ClockExhausted(SimulationError):
    """The clock cannot be advanced past its end year."""

    DEFAULT_DETAIL: str = "clock exhausted"
    __slots__ = ()


class MissingNorm(SimulationError):
    """Predefined schedule has no norm for the requested generation."""

    DEFAULT_DETAIL: str = "missing norm"
    __slots__ = ()


class MalformedQuestionnaire(SimulationError):
    """Questionnaire is not made of exactly ten unique aspects."""

    DEFAULT_DETAIL: str = "malformed questionnaire"
    __slots__ = ()


class EmptyNormText(SimulationError):
    """Norm evolution produced no text."""

    DEFAULT_DETAIL: str = "empty norm text"
    __slots__ = ()


class EmptyStrategies(SimulationError):
    """Norm evolution requested without any strategies."""

    DEFAULT_DETAIL: str = "no strategies"
    __slots__ = ()


# Agent errors


class PartialStatements(SimulationError):
    """Some questionnaire items stayed unanswered."""

    DEFAULT_DETAIL: str = "partial statements"
    __slots__ = ()


# Observer errors


class MalformedScore(SimulationError):
    """Observer output could not be parsed into a valid score."""

    DEFAULT_DETAIL: str = "malformed score"
    __slots__ = ()


class ScoringAborted(SimulationError):
    """Too many agents failed scoring."""

    DEFAULT_DETAIL: str = "scoring aborted"
    __slots__ = ()


# Evolution errors


class DegeneratePopulation(SimulationError):
    """Population too small for the configured replacement fraction."""

    DEFAULT_DETAIL: str = "degenerate population"
    __slots__ = ()


class InsufficientParents(SimulationError):
    """Fewer than two parents are available for reproduction."""

    DEFAULT_DETAIL: str = "insufficient parents"
    __slots__ = ()


class MalformedMutation(SimulationError):
    """Mutation reply lacks its attribute marker."""

    DEFAULT_DETAIL: str = "malformed mutation"
    __slots__ = ()


# Runner errors


class DatasetMissing(SimulationError):
    """Downstream evaluation dataset is missing or too small."""

    DEFAULT_DETAIL: str = "dataset missing"
    __slots__ = ()


class ExportError(SimulationError):
    """Metrics could not be exported."""

    DEFAULT_DETAIL: str = "export failure"
    __slots__ = ()


class ReplayMismatch(SimulationError):
    """Metrics recomputed from run logs differ from the stored ones."""

    DEFAULT_DETAIL: str = "replay mismatch"
    __slots__ = ()
