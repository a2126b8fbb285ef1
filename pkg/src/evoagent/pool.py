#
# File:    ./src/evoagent/pool.py
# Author:  Jiří Kučera <sanczes AT gmail.com>
# Date:    2026-10-19 13:20:14 +0200
# Project: evoagent: Evolutionary agents in an evolving society
#
# SPDX-License-Identifier: MIT
#
"""Worker pool for agent-level backend calls."""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

_T = TypeVar("_T")
_R = TypeVar("_R")


def fan_out(
    func: Callable[[_T], _R], items: Iterable[_T], workers: int = 1
) -> "list[_R]":
    """
    Apply *func* to every item, possibly concurrently.

    :param func: The function
    :param items: The items
    :param workers: The number of worker threads (1 runs inline)
    :return: the results in item order
    :raises Exception: the first exception raised by *func*, in item order
    """
    if workers <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))
