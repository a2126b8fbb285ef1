#
# File:    ./tests/unit/test_prompts.py
# Author:  Jiří Kučera <sanczes AT gmail.com>
# Date:    2026-10-19 17:51:37 +0200
# Project: evoagent: Evolutionary agents in an evolving society
#
# SPDX-License-Identifier: MIT
#
"""Test `evoagent.prompts` module."""

from vutils.testing.testcase import TestCase

from evoagent.backend import Sampling
from evoagent.errors import ConfigError
from evoagent.prompts import (
    RETRY_NOTE,
    TEMPLATE_NAMES,
    PromptTemplate,
    load_template,
    template_versions,
)

from .common import CountingBackend, scripted

SECTIONED = """version: 2
---
[system]
You are {name}.
[user]
Say {what} as '### Score: {} ### Feedback: {}'.
"""


class PromptTemplateTestCase(TestCase):
    """Test case for `PromptTemplate`."""

    __slots__ = ()

    def test_parse_sections(self):
        """Test parsing a template with sections."""
        template = PromptTemplate.parse("demo", SECTIONED)

        self.assertEqual(template.version, 2)
        self.assertEqual(template.template_id, "demo")
        self.assertEqual(template.system, "You are {name}.")
        self.assertEqual(
            template.render(name="Ann", what="hi"),
            (
                "You are Ann.",
                "Say hi as '### Score: {} ### Feedback: {}'.",
            ),
        )

    def test_parse_plain(self):
        """Test parsing a template without sections."""
        template = PromptTemplate.parse("plain", "version: 1\n---\nHi {x}\n")

        self.assertEqual(template.system, "")
        self.assertEqual(template.render(), ("", "Hi {x}"))

    def test_parse_errors(self):
        """Test that malformed headers are rejected."""
        for text in ("Hi\n", "version: one\n---\nHi\n", "v: 1\n---\nHi\n"):
            with self.subTest(text=text):
                with self.assertRaises(ConfigError):
                    PromptTemplate.parse("bad", text)

    def test_request(self):
        """Test rendering requests with sampling and retries."""
        template = PromptTemplate.parse("demo", SECTIONED)
        sampling = Sampling(temperature=0.5, max_tokens=64, model_tag="m")

        first = template.request(sampling, 0, name="Ann", what="hi")
        retry = template.request(sampling, 1, name="Ann", what="hi")

        self.assertEqual(first.template_id, "demo")
        self.assertEqual(first.temperature, 0.5)
        self.assertEqual(first.max_tokens, 64)
        self.assertEqual(first.model_tag, "m")
        self.assertTrue(
            retry.messages[-1].content.endswith(RETRY_NOTE.format(attempt=2))
        )
        self.assertNotEqual(first.digest(), retry.digest())

    def test_complete(self):
        """Test completing a template on a backend."""
        backend = CountingBackend(scripted(("@demo", "done")))
        template = PromptTemplate.parse("demo", SECTIONED)

        self.assertEqual(
            template.complete(backend, name="A", what="b"), "done"
        )
        self.assertEqual(backend.templates(), ["demo"])


class PackagedTemplatesTestCase(TestCase):
    """Test case for the packaged templates."""

    __slots__ = ()

    def test_all_templates_load(self):
        """Test that every packaged template loads."""
        versions = template_versions()

        self.assertEqual(sorted(versions), sorted(TEMPLATE_NAMES))
        self.assertTrue(all(v >= 1 for v in versions.values()))
        self.assertIs(load_template("scoring"), load_template("scoring"))

    def test_scoring_keeps_format(self):
        """Test that the literal score format survives rendering."""
        _, user = load_template("scoring").render(norm="n")

        self.assertIn("'### Score: {} ### Feedback: {}'", user)

    def test_missing_template(self):
        """Test loading an unknown template."""
        with self.assertRaises(ConfigError):
            load_template("no_such_template")
