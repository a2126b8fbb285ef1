#
# File:    ./src/evoagent/__init__.py
# Author:  Jiří Kučera <sanczes AT gmail.com>
# Date:    2026-10-19 09:12:40 +0200
# Project: evoagent: Evolutionary agents in an evolving society
#
# SPDX-License-Identifier: MIT
#
"""`evoagent` package."""
