#
# File:    ./src/evoagent/io.py
# Author:  Jiří Kučera <sanczes AT gmail.com>
# Date:    2026-10-19 09:31:02 +0200
# Project: evoagent: Evolutionary agents in an evolving society
#
# SPDX-License-Identifier: MIT
#
"""Console input/output."""

import sys
from typing import TYPE_CHECKING, TextIO

import colorama

if TYPE_CHECKING:
    from evoagent import StreamsProxyProtocolP


def paint(text: str, fore: str, bright: bool = True) -> str:
    """
    Paint the text with the given `colorama` foreground.

    :param text: The text
    :param fore: The name of the `colorama.Fore` attribute
    :param bright: The flag selecting the bright style (default `True`)
    :return: the painted text

    Bright text resets all styles at the end, normal text resets only the
    foreground.
    """
    color = getattr(colorama.Fore, fore)
    if bright:
        return (
            f"{colorama.Style.BRIGHT}{color}{text}{colorama.Style.RESET_ALL}"
        )
    return f"{color}{text}{colorama.Fore.RESET}"


def red(text: str) -> str:
    """Make the text red."""
    return paint(text, "RED")


def green(text: str) -> str:
    """Make the text green."""
    return paint(text, "GREEN")


def brown(text: str) -> str:
    """Make the text brown."""
    return paint(text, "YELLOW", False)


def yellow(text: str) -> str:
    """Make the text yellow."""
    return paint(text, "LIGHTYELLOW_EX")


def blue(text: str) -> str:
    """Make the text blue."""
    return paint(text, "BLUE")


class StreamsProxyMixin:
    """
    I/O streams proxy mixin.

    Provides the output, error output, and input streams used by the CLI and
    by the interactive observer backend.
    """

    def __init__(self: "StreamsProxyProtocolP") -> None:
        """
        Initialize streams.

        Default streams are `sys.stdout` for the output stream, `sys.stderr`
        for the error output stream, and `sys.stdin` for the input stream.
        """
        self.__output: TextIO = sys.stdout
        self.__errout: TextIO = sys.stderr
        self.__input: TextIO = sys.stdin

    def set_streams(
        self: "StreamsProxyProtocolP",
        ostream: "TextIO | None" = None,
        estream: "TextIO | None" = None,
        istream: "TextIO | None" = None,
    ) -> None:
        """
        Set output, error output, and input streams.

        :param ostream: The output stream
        :param estream: The error output stream
        :param istream: The input stream

        A stream is left untouched when its argument is `None`.
        """
        if ostream is not None:
            self.__output = ostream
        if estream is not None:
            self.__errout = estream
        if istream is not None:
            self.__input = istream

    def wout(self: "StreamsProxyProtocolP", text: str) -> None:
        """
        Write *text* to the output stream.

        :param text: The text
        """
        self.__output.write(text)

    def werr(self: "StreamsProxyProtocolP", text: str) -> None:
        """
        Write *text* to the error output stream.

        :param text: The text
        """
        self.__errout.write(text)

    def rin(self: "StreamsProxyProtocolP") -> str:
        """
        Read one line from the input stream.

        :return: the line without the trailing newline (empty on EOF)
        """
        return self.__input.readline().rstrip("\n")

    def ask(self: "StreamsProxyProtocolP", text: str) -> str:
        """
        Write *text* to the output stream and read the answer.

        :param text: The text shown to the operator
        :return: the answer line
        """
        self.wout(text)
        return self.rin()
