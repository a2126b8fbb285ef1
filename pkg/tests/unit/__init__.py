#
# File:    ./tests/unit/__init__.py
# Author:  Jiří Kučera <sanczes AT gmail.com>
# Date:    2026-10-19 17:18:02 +0200
# Project: evoagent: Evolutionary agents in an evolving society
#
# SPDX-License-Identifier: MIT
#
"""Unit tests for `evoagent`."""
