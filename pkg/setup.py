#!/usr/bin/python3
#
# File:    ./setup.py
# Author:  Jiří Kučera <sanczes AT gmail.com>
# Date:    2026-10-19 19:55:40 +0200
# Project: evoagent: Evolutionary agents in an evolving society
#
# SPDX-License-Identifier: MIT
#
"""Setup for evoagent."""

from setuptools import setup

setup()
