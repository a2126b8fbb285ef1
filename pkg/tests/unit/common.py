#
# File:    ./tests/unit/common.py
# Author:  Jiří Kučera <sanczes AT gmail.com>
# Date:    2026-10-19 17:20:44 +0200
# Project: evoagent: Evolutionary agents in an evolving society
#
# SPDX-License-Identifier: MIT
#
"""Shared test code and data."""

import contextlib
import json
import re
import unittest.mock

from vutils.testing.mock import PatcherFactory, make_mock

from evoagent.agent import Agent, AgentProfile, MemoryStore
from evoagent.application import ApplicationMixin
from evoagent.backend import (
    Backend,
    ScriptedBackend,
    ScriptedRules,
    default_scripted_rules,
)
from evoagent.config import ExperimentConfig
from evoagent.errors import ApplicationError
from evoagent.io import StreamsProxyMixin
from evoagent.logging import LoggerMixin, set_logger
from evoagent.runner import Backends
from evoagent.society import Questionnaire

SYMBOLS = (
    "ExcType",
    "ExitExcType",
    "ColorFuncType",
    "RngType",
    "ApplicationProtocol",
    "StreamsProxyProtocolP",
    "LoggerProtocolP",
    "ApplicationProtocolP",
)

LOGFILE = "log.txt"
ERR_TEST = 3
MESSAGE = "test message"
UKEY = "foo"
CS_RESET_ALL = "</color:all>"
CS_BRIGHT = "<color:bright>"
CF_RESET = "</color>"
CF_RED = "<color:red>"
CF_GREEN = "<color:green>"
CF_YELLOW = "<color:yellow>"
CF_LIGHTYELLOW_EX = "<color:light_yellow_ex>"
CF_BLUE = "<color:blue>"

SCORE_LINE = "### Score: {} ### Feedback: {}"
NORM_TEXT = "Share knowledge with everyone."
KEYWORDS = {
    2000: ("kwalpha", "kwbeta"),
    2010: ("kwgamma", "kwdelta"),
    2020: ("kwepsilon", "kwzeta"),
    2030: ("kweta", "kwtheta"),
    2040: ("kwiota", "kwkappa"),
    2050: ("kwlambda", "kwmu"),
}


def make_io_mock():
    """
    Make input/output mocking object.

    :return: the mocking object

    The returned mocking object accepts only calls to ``write`` method.
    """
    return make_mock(["write"])


def on_exit_log(ecode):
    """
    Make a log item issued by `ApplicationMixin.on_exit`.

    :param ecode: The exit code
    :return: the log item
    """
    return (f"Application exited with exit code {ecode}\n", 2)


def on_error_log(exc):
    """
    Make a log item issued by `ApplicationMixin.on_error`.

    :param exc: The exception object
    :return: the log item
    """
    return (f"Exception caught: {exc}\n",)


class ModulePatcher(PatcherFactory):
    """Patcher for builtin, `sys` and `colorama` modules."""

    __slots__ = (
        "mock_open",
        "sys_argv",
        "sys_exit",
        "sys_stdout",
        "sys_stderr",
        "colorama_style",
        "colorama_fore",
    )

    @staticmethod
    def setup_colorama_style(style):
        """
        Set up `colorama.Style` mock.

        :param style: The mock of `colorama.Style`.
        """
        style.RESET_ALL = CS_RESET_ALL
        style.BRIGHT = CS_BRIGHT

    @staticmethod
    def setup_colorama_fore(fore):
        """
        Set up `colorama.Fore` mock.

        :param fore: The mock of `colorama.Fore`
        """
        fore.RESET = CF_RESET
        fore.RED = CF_RED
        fore.GREEN = CF_GREEN
        fore.YELLOW = CF_YELLOW
        fore.LIGHTYELLOW_EX = CF_LIGHTYELLOW_EX
        fore.BLUE = CF_BLUE

    def setup(self):
        """Set up the patcher."""
        self.mock_open = unittest.mock.mock_open()
        self.sys_argv = make_mock()
        self.sys_exit = make_mock()
        self.sys_stdout = make_io_mock()
        self.sys_stderr = make_io_mock()
        self.colorama_style = make_mock(["RESET_ALL", "BRIGHT"])
        self.colorama_fore = make_mock(
            ["RESET", "RED", "GREEN", "YELLOW", "LIGHTYELLOW_EX", "BLUE"]
        )

        self.add_spec("builtins.open", new=self.mock_open)
        self.add_spec("sys.argv", new=self.sys_argv)
        self.add_spec("sys.exit", new=self.sys_exit)
        self.add_spec("sys.stdout", new=self.sys_stdout)
        self.add_spec("sys.stderr", new=self.sys_stderr)
        self.add_spec(
            "colorama.Style",
            self.setup_colorama_style,
            new=self.colorama_style,
        )
        self.add_spec(
            "colorama.Fore", self.setup_colorama_fore, new=self.colorama_fore
        )


class ErrorA(ApplicationError):
    """Test error."""

    __slots__ = ()

    def __init__(self):
        """Initialize the error."""
        ApplicationError.__init__(self)


class ErrorB(Exception):
    """Test error."""

    __slots__ = ()

    def __init__(self):
        """Initialize the error."""
        Exception.__init__(self)

    def __repr__(self):
        """
        Get the error representation.

        :return: the error representation
        """
        return f"{type(self).__name__}()"

    def __str__(self):
        """
        Get the error representation.

        :return: the error representation
        """
        return repr(self)


class LoggerA:
    """Test logger recording its arguments."""

    __slots__ = ("stream",)

    def __init__(self):
        """Initialize the logger."""
        self.stream = []

    def linfo(self, *args):
        """
        Implement dummy `LoggerMixin.linfo` that records its arguments.

        :param args: Arguments
        """
        self.stream.append(args)

    def lerror(self, *args):
        """
        Implement dummy `LoggerMixin.lerror` that records its arguments.

        :param args: Arguments
        """
        self.stream.append(args)


class LoggerB(LoggerMixin, StreamsProxyMixin):
    """Test logger."""

    __slots__ = ()

    def __init__(self):
        """Initialize the logger."""
        LoggerMixin.__init__(self)
        StreamsProxyMixin.__init__(self)


class RecordingLogger:
    """Process-wide logger stand-in keeping the messages by kind."""

    __slots__ = ("messages",)

    def __init__(self):
        """Initialize the logger."""
        self.messages = []

    def linfo(self, msg, vlevel=1):
        """
        Record an info message.

        :param msg: The message
        :param vlevel: The verbosity level
        """
        self.messages.append(("info", msg))

    def lwarn(self, msg):
        """
        Record a warning.

        :param msg: The message
        """
        self.messages.append(("warning", msg))

    def lerror(self, msg):
        """
        Record an error.

        :param msg: The message
        """
        self.messages.append(("error", msg))

    def ldebug(self, msg, dlevel=1):
        """
        Record a debug message.

        :param msg: The message
        :param dlevel: The debug level
        """
        self.messages.append(("debug", msg))

    def of_kind(self, kind):
        """
        Get the messages of one kind.

        :param kind: The message kind
        :return: the messages
        """
        return [msg for name, msg in self.messages if name == kind]


@contextlib.contextmanager
def recording_logger():
    """
    Install a `RecordingLogger` for the duration of the block.

    :return: the context manager yielding the logger
    """
    logger = RecordingLogger()
    previous = set_logger(logger)
    try:
        yield logger
    finally:
        set_logger(previous)


class ApplicationA(ApplicationMixin, LoggerA):
    """Test application."""

    CMD_EXIT = "test-exit"
    CMD_ERROR = "test-error"
    CMD_XERROR = "test-error-extra"
    CMD_RAISE_A = "test-raise-a"
    CMD_RAISE_B = "test-raise-b"
    __slots__ = ()

    def __init__(self):
        """Initialize the application."""
        ApplicationMixin.__init__(self)
        LoggerA.__init__(self)

    def main(self, argv):
        """
        Provide application entry point.

        :param argv: The list of arguments
        :return: the exit code
        :raises ErrorA: when 0th argument is set to ``test-raise-a``
        :raises ErrorB: when 0th argument is set to ``test-raise-b``
        """
        cls = type(self)

        if not argv:
            return cls.EXIT_SUCCESS
        cmd = argv[0]

        if cmd == cls.CMD_EXIT:
            self.exit(ERR_TEST)
        elif cmd == cls.CMD_ERROR:
            self.error(MESSAGE)
        elif cmd == cls.CMD_XERROR:
            self.error(MESSAGE, ERR_TEST)
        elif cmd == cls.CMD_RAISE_A:
            raise ErrorA()
        elif cmd == cls.CMD_RAISE_B:
            raise ErrorB()

        return cls.EXIT_FAILURE


class CountingBackend(Backend):
    """Backend wrapper remembering every request it has seen."""

    __slots__ = ("inner", "requests")

    def __init__(self, inner):
        """
        Initialize the wrapper.

        :param inner: The wrapped backend
        """
        self.inner = inner
        self.requests = []

    def complete(self, request):
        """
        Record the request and complete it.

        :param request: The request
        :return: the response of the wrapped backend
        """
        self.requests.append(request)
        return self.inner.complete(request)

    def templates(self):
        """
        Get the template ids of the requests.

        :return: the template ids in call order
        """
        return [request.template_id for request in self.requests]


def scripted(*rules, default=""):
    """
    Make a scripted backend.

    :param rules: The pairs of pattern and response
    :param default: The default response
    :return: the backend
    """
    table = ScriptedRules(default_response=default)
    for pattern, response in rules:
        table.add(pattern, response)
    return ScriptedBackend(table)


def packaged_backend():
    """
    Make a backend answering from the packaged rule table.

    :return: the backend
    """
    return ScriptedBackend(default_scripted_rules())


def make_backends(agent=None, observer=None, generator=None):
    """
    Make the backends of an experiment.

    :param agent: The agent backend (packaged rules if `None`)
    :param observer: The observer backend (packaged rules if `None`)
    :param generator: The generator backend (the observer if `None`)
    :return: the backends
    """
    observer = observer or packaged_backend()
    config = ExperimentConfig()
    return Backends(
        agent or packaged_backend(),
        observer,
        generator or observer,
        config.agent_backend.sampling(),
        config.observer_backend.sampling(),
        config.generator.sampling(),
    )


def make_config(**overrides):
    """
    Make a small configuration for offline runs.

    :param overrides: Top-level entries replacing the defaults
    :return: the configuration
    """
    data = {
        "evolution": {"population_size": 4, "mutation_rate": 1.0},
        "trials": 1,
        "workers": 1,
        "token_budget": None,
    }
    data.update(overrides)
    return ExperimentConfig.model_validate(data)


def make_profile(agent_id="00000", **fields):
    """
    Make an agent profile.

    :param agent_id: The agent id
    :param fields: Profile fields replacing the defaults
    :return: the profile
    """
    data = {
        "agent_id": agent_id,
        "persona": f"persona of {agent_id}",
        "career": f"career of {agent_id}",
        "three_views": f"views of {agent_id}",
        "birth_year": 2000,
    }
    data.update(fields)
    return AgentProfile(**data)


def make_agent(agent_id="00000", location_index=0, threshold=10, **fields):
    """
    Make an agent.

    :param agent_id: The agent id
    :param location_index: The location of the agent
    :param threshold: The memory compression threshold
    :param fields: Profile fields replacing the defaults
    :return: the agent
    """
    return Agent(
        profile=make_profile(agent_id, **fields),
        memory=MemoryStore(compression_threshold=threshold),
        location_index=location_index,
    )


def question_pairs(count=10, prefix="Aspect"):
    """
    Make aspect and question pairs.

    :param count: The number of pairs
    :param prefix: The aspect prefix
    :return: the pairs
    """
    return [(f"{prefix} {i}", f"Question {i}?") for i in range(count)]


def make_questionnaire(year=2000):
    """
    Make a valid questionnaire.

    :param year: The generation year
    :return: the questionnaire
    """
    return Questionnaire.build(year, question_pairs())


def questionnaire_json(count=10):
    """
    Make a generator reply holding a questionnaire.

    :param count: The number of items
    :return: the reply text
    """
    return "Here you are:\n" + json.dumps(dict(question_pairs(count)))


def write_schedule(path, keywords=None, dynamic=False, questionnaires=True):
    """
    Write a schedule file with keyword norms.

    :param path: The path to the file
    :param keywords: The norm keywords keyed by generation year
    :param dynamic: The flag selecting the dynamic mode
    :param questionnaires: The flag to include predefined questionnaires
    :return: the path
    """
    keywords = keywords or KEYWORDS
    norms = [
        {"year": year, "text": f"Live by {' and '.join(words)}."}
        for year, words in sorted(keywords.items())
    ]
    data = {
        "mode": "dynamic" if dynamic else "predefined",
        "vision": "A society of shared knowledge.",
        "direction": "From sharing toward caring.",
        "norms": norms[:1] if dynamic else norms,
        "locations": [
            {"name": "Library", "description": "Quiet place."},
            {"name": "Market", "description": "Busy place."},
        ],
    }
    if questionnaires:
        data["questionnaires"] = [
            {
                "year": year,
                "items": [
                    {"aspect": a, "question": q} for a, q in question_pairs()
                ],
            }
            for year in sorted(keywords)
        ]
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


_YEAR = re.compile(r"current year is (\d+)")
_NORM = re.compile(r"The social norms are: '([^']*)'")


def keyword_backends():
    """
    Make backends rewarding agents whose careers carry the norm keywords.

    :return: the backends

    A mutated career takes the keywords of the norm in force in the year of
    the birth, statements echo the profile line of the prompt, and the
    observer scores one point plus one per norm keyword the statements
    mention.
    """

    def career(request):
        year = int(_YEAR.search(request.text()).group(1))
        generation = max(y for y in KEYWORDS if y <= year)
        return f"# Career: [a keeper of {' '.join(KEYWORDS[generation])}]"

    def statement(request):
        return request.messages[0].content.splitlines()[0]

    def score(request):
        text = request.text()
        norm = _NORM.search(text).group(1)
        said = text.split("### Statements", 1)[1].split("### Behavior", 1)[0]
        hits = sum(1 for word in re.findall(r"kw\w+", norm) if word in said)
        return SCORE_LINE.format(min(7, 1 + hits), "noted")

    agent = scripted(
        ("@career_mutation", career),
        ("@persona_mutation", "# Persona: [curious]"),
        ("@views_mutation", "# Views: [open]"),
        ("@statement", statement),
        ("@exploration", "I read in the library."),
        ("@memory_compression", "I spent my time reading."),
        default="I will follow the social norm.",
    )
    observer = scripted(
        ("@scoring", score),
        ("@questionnaire", questionnaire_json()),
    )
    return make_backends(agent, observer)
