#
# File:    ./src/evoagent/application.py
# Author:  Jiří Kučera <sanczes AT gmail.com>
# Date:    2026-10-19 10:03:36 +0200
# Project: evoagent: Evolutionary agents in an evolving society
#
# SPDX-License-Identifier: MIT
#
"""Command-line interface application classes."""

import argparse
import pathlib
import sys
from typing import TYPE_CHECKING, NoReturn

from evoagent.errors import AppExitError, ApplicationError, UsageError
from evoagent.logging import set_logger

if TYPE_CHECKING:
    from evoagent import ApplicationProtocolP, ExcType, ExitExcType


class ArgumentParser(argparse.ArgumentParser):
    """Argument parser that reports problems by raising instead of exiting."""

    def error(self, message: str) -> NoReturn:
        """
        Report the invalid usage.

        :param message: The error message
        :raises UsageError: when invoked
        """
        raise UsageError(f"{self.prog}: {message}")

    def exit(self, status: int = 0, message: "str | None" = None) -> NoReturn:
        """
        Leave the parser (``--help`` and friends).

        :param status: The exit code
        :param message: The message to be printed on the error output
        :raises AppExitError: when invoked
        """
        if message:
            sys.stderr.write(message)
        raise AppExitError(status)


class ApplicationMixin:
    """
    Mixin for creating CLI applications.

    Should be used together with `LoggerMixin` and `StreamsProxyMixin`. The
    application installs itself as the process-wide logger, so messages from
    the simulation end up in the same streams and log file.
    """

    EXIT_SUCCESS: int = 0
    EXIT_FAILURE: int = 1
    EXIT_USAGE: int = 2
    EXIT_EXCEPTION: "ExitExcType" = AppExitError
    PROG: str = "evoagent"

    def __init__(self: "ApplicationProtocolP") -> None:
        """Initialize the mixin."""
        self.__elist: "list[ExcType]" = []
        self.catch(ApplicationError)

    def catch(self: "ApplicationProtocolP", exc: "ExcType") -> None:
        """
        Register an exception to be caught.

        :param exc: The exception class

        Registered exceptions that are raised by `main` are caught and passed
        to `on_error`. `ApplicationError` is registered by default.
        """
        if exc not in self.__elist:
            self.__elist.append(exc)

    def error(
        self: "ApplicationProtocolP", msg: str, ecode: int = 1
    ) -> NoReturn:
        """
        Issue an error and exit.

        :param msg: The error message
        :param ecode: The exit code (default 1)
        :raises AppExitError: when invoked
        """
        self.lerror(msg)
        self.exit(ecode)

    def exit(self: "ApplicationProtocolP", ecode: int) -> NoReturn:
        """
        Exit the application by raising `AppExitError`.

        :param ecode: The exit code
        :raises AppExitError: when invoked
        """
        raise type(self).EXIT_EXCEPTION(ecode)

    def make_parser(self: "ApplicationProtocolP") -> ArgumentParser:
        """
        Make the argument parser with the logging options.

        :return: the parser

        Subclasses extend the returned parser with their commands. Each
        command sets ``handler`` to a callable taking the parsed namespace
        and returning the exit code.
        """
        parser = ArgumentParser(prog=type(self).PROG)
        parser.add_argument(
            "-v",
            "--verbose",
            action="count",
            default=1,
            help="increase verbosity (repeatable)",
        )
        parser.add_argument(
            "-d",
            "--debug",
            action="count",
            default=0,
            help="increase debug level (repeatable)",
        )
        parser.add_argument(
            "--log-file", type=pathlib.Path, help="append log messages here"
        )
        parser.add_argument(
            "--no-color", action="store_true", help="disable colored output"
        )
        return parser

    def main(self: "ApplicationProtocolP", argv: "list[str]") -> int:
        """
        Provide the application entry point.

        :param argv: The list of application arguments
        :return: the exit code

        Parse *argv*, set up logging, and dispatch to the command handler.
        """
        namespace = self.make_parser().parse_args(argv)
        self.set_logger_props(
            logpath=namespace.log_file,
            vlevel=namespace.verbose,
            dlevel=namespace.debug,
            nocolor=namespace.no_color,
        )
        set_logger(self)
        handler = getattr(namespace, "handler", None)
        if handler is None:
            raise UsageError("no command given")
        ecode: int = handler(namespace)
        return ecode

    def run(self: "ApplicationProtocolP", argv: "list[str]") -> int:
        """
        Run the application.

        :param argv: The list of application arguments
        :return: the exit code
        :raises Exception: if the exception raised by `main` is not handled

        Invalid usage yields `EXIT_USAGE`, registered errors are passed to
        `on_error`, and `exit` requests are honored.
        """
        try:
            ecode = self.main(argv)
        except AppExitError as exc:
            ecode = exc.ecode
            self.on_exit(ecode)
        except UsageError as exc:
            self.lerror(f"{exc.detail()}\n")
            ecode = type(self).EXIT_USAGE
        except tuple(self.__elist) as exc:
            ecode = self.on_error(exc)
        return ecode

    def on_exit(self: "ApplicationProtocolP", ecode: int) -> None:
        """
        Specify what to do on `exit`.

        :param ecode: The exit code
        """
        self.linfo(f"Application exited with exit code {ecode}\n", 2)

    def on_error(self: "ApplicationProtocolP", exc: Exception) -> int:
        """
        Specify what to do on error.

        :param exc: The caught exception
        :return: the exit code
        """
        self.lerror(f"Exception caught: {exc}\n")
        return type(self).EXIT_FAILURE

    @classmethod
    def start(
        cls: "type[ApplicationProtocolP]", modname: str = "__main__"
    ) -> None:
        """
        Start the application.

        :param modname: The module name (default ``__main__``)

        If the module name is ``__main__``, run the application with the
        command line arguments that follow the program name.
        """
        if modname == "__main__":
            sys.exit(cls().run(sys.argv[1:]))
