#
# File:    ./src/evoagent/__init__.pyi
# Author:  Jiří Kučera <sanczes AT gmail.com>
# Date:    2026-10-19 09:52:18 +0200
# Project: evoagent: Evolutionary agents in an evolving society
#
# SPDX-License-Identifier: MIT
#
"""`evoagent` package typing."""

import pathlib
from typing import Callable, NoReturn, Protocol, TextIO

from numpy.random import Generator

from evoagent.application import ArgumentParser
from evoagent.errors import AppExitError
from evoagent.logging import LogFormatter

ExcType = type[Exception]
ExitExcType = type[AppExitError]
ColorFuncType = Callable[[str], str]
RngType = Generator

class StreamsProxyProtocolP(Protocol):
    def set_streams(
        self,
        ostream: TextIO | None = None,
        estream: TextIO | None = None,
        istream: TextIO | None = None,
    ) -> None: ...
    def wout(self, text: str) -> None: ...
    def werr(self, text: str) -> None: ...
    def rin(self) -> str: ...
    def ask(self, text: str) -> str: ...

class LoggerProtocolP(StreamsProxyProtocolP, Protocol):
    def set_logger_props(
        self,
        logpath: pathlib.Path | None = None,
        formatter: LogFormatter | None = None,
        vlevel: int | None = None,
        dlevel: int | None = None,
        nocolor: bool | None = None,
    ) -> None: ...
    def set_log_style(self, name: str, color: ColorFuncType) -> None: ...
    def wlog(self, msg: str) -> None: ...
    def linfo(self, msg: str, vlevel: int = 1) -> None: ...
    def lwarn(self, msg: str) -> None: ...
    def lerror(self, msg: str) -> None: ...
    def ldebug(self, msg: str, dlevel: int = 1) -> None: ...

class ApplicationProtocol(Protocol):
    EXIT_SUCCESS: int
    EXIT_FAILURE: int
    EXIT_USAGE: int
    EXIT_EXCEPTION: ExitExcType
    def catch(self, exc: ExcType) -> None: ...
    def error(self, msg: str, ecode: int = 1) -> NoReturn: ...
    def exit(self, ecode: int) -> NoReturn: ...
    def make_parser(self) -> ArgumentParser: ...
    def main(self, argv: list[str]) -> int: ...
    def run(self, argv: list[str]) -> int: ...
    def on_exit(self, ecode: int) -> None: ...
    def on_error(self, exc: Exception) -> int: ...

class ApplicationProtocolP(ApplicationProtocol, LoggerProtocolP, Protocol): ...
