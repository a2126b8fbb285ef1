#
# File:    ./src/evoagent/assets/__init__.py
# Author:  Jiří Kučera <sanczes AT gmail.com>
# Date:    2026-10-19 11:02:45 +0200
# Project: evoagent: Evolutionary agents in an evolving society
#
# SPDX-License-Identifier: MIT
#
"""Packaged data files: attribute tables, schedule, templates, rules."""

import pathlib


def asset_path(name: str) -> pathlib.Path:
    """
    Get the path to a packaged asset.

    :param name: The asset name relative to this package
    :return: the path
    """
    return pathlib.Path(__file__).parent / name
