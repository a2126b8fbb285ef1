#
# File:    ./tests/unit/test_coverage.py
# Author:  Jiří Kučera <sanczes AT gmail.com>
# Date:    2026-10-19 19:40:12 +0200
# Project: evoagent: Evolutionary agents in an evolving society
#
# SPDX-License-Identifier: MIT
#
"""Coverage tests."""

import pytest
from vutils.testing.utils import cover_typing

from .common import SYMBOLS

MODULES = (
    "application",
    "io",
    "logging",
    "config",
    "backend",
    "society",
    "agent",
    "observer",
    "evolution",
    "baselines",
    "metrics",
    "downstream",
    "runner",
    "cli",
)


@pytest.mark.order("last")
def test_typing_code_is_covered():
    """
    Ensure typing code coverage.

    This is a dummy test that executes `cover_typing` to ensure that the code
    under ``if TYPE_CHECKING:`` branch is covered. Since `cover_typing` reloads
    the module, run this test as last to prevent mangling of yet imported
    modules.
    """
    for name in MODULES:
        cover_typing(f"evoagent.{name}", SYMBOLS)
