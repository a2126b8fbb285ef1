#
# File:    ./src/evoagent/cli.py
# Author:  Jiří Kučera <sanczes AT gmail.com>
# Date:    2026-10-19 17:02:26 +0200
# Project: evoagent: Evolutionary agents in an evolving society
#
# SPDX-License-Identifier: MIT
#
"""The ``evoagent`` command."""

import argparse
import json
import pathlib
from typing import TYPE_CHECKING, Callable, TypeVar

from evoagent.application import ApplicationMixin
from evoagent.backend import make_backend
from evoagent.config import ExperimentConfig
from evoagent.downstream import DEFAULT_SAMPLE_COUNT, downstream_eval
from evoagent.errors import ConfigError
from evoagent.io import StreamsProxyMixin
from evoagent.logging import LoggerMixin
from evoagent.metrics import export_run, replay
from evoagent.runlog import SNAPSHOT_NAME, TRIAL_PREFIX, RunLog
from evoagent.runner import (
    make_backends,
    recorded_best,
    recorded_fitness,
    recorded_profile,
    run,
    sweep,
)
from evoagent.society import SocialNorm, generate_questionnaire

if TYPE_CHECKING:
    from evoagent.application import ArgumentParser

_T = TypeVar("_T")

METHODS: "tuple[str, ...]" = ("evolutionary", "react", "reflexion", "frozen")


def comma_list(convert: "Callable[[str], _T]") -> "Callable[[str], list[_T]]":
    """
    Make an argument type for comma separated lists.

    :param convert: The item conversion
    :return: the argument type
    """

    def parse(text: str) -> "list[_T]":
        try:
            items = [convert(x.strip()) for x in text.split(",") if x.strip()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc
        if not items:
            raise argparse.ArgumentTypeError("empty list")
        return items

    return parse


def load_config(path: "pathlib.Path | None") -> ExperimentConfig:
    """
    Load the configuration.

    :param path: The path to the configuration (defaults if `None`)
    :return: the configuration
    :raises ConfigError: when the file is missing or invalid
    """
    return ExperimentConfig() if path is None else ExperimentConfig.load(path)


def load_run_config(run_dir: pathlib.Path) -> ExperimentConfig:
    """
    Load the configuration a run was made with.

    :param run_dir: The run directory
    :return: the configuration of the first trial
    :raises ConfigError: when the snapshot is missing or invalid
    """
    path = run_dir / f"{TRIAL_PREFIX}1" / SNAPSHOT_NAME
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return ExperimentConfig.from_json(json.dumps(data["config"]), str(path))


def _add_overrides(parser: "ArgumentParser") -> None:
    parser.add_argument(
        "--config", type=pathlib.Path, help="experiment configuration (JSON)"
    )
    parser.add_argument("--seed", type=int, help="random seed")
    parser.add_argument("--method", choices=METHODS, help="method")
    parser.add_argument(
        "-N", "--population", type=int, help="population size"
    )
    parser.add_argument(
        "-p", "--replace", type=float, help="replaced fraction per step"
    )
    parser.add_argument(
        "-m", "--mutation", type=float, help="mutation rate"
    )
    parser.add_argument("--trials", type=int, help="number of trials")
    parser.add_argument("--output", help="output directory")


class EvoAgentApp(ApplicationMixin, LoggerMixin, StreamsProxyMixin):
    """Command line front end of the simulation."""

    __slots__ = ()

    def __init__(self) -> None:
        """Initialize the application."""
        StreamsProxyMixin.__init__(self)
        LoggerMixin.__init__(self)
        ApplicationMixin.__init__(self)

    def make_parser(self) -> "ArgumentParser":
        """
        Make the argument parser.

        :return: the parser
        """
        parser = ApplicationMixin.make_parser(self)
        commands = parser.add_subparsers(title="commands", dest="command")

        cmd = commands.add_parser("run", help="run an experiment")
        _add_overrides(cmd)
        cmd.set_defaults(handler=self.cmd_run)

        cmd = commands.add_parser("export", help="export the run metrics")
        cmd.add_argument("run_dir", type=pathlib.Path)
        cmd.add_argument("--format", choices=("csv", "json"), default="csv")
        cmd.add_argument(
            "--output", type=pathlib.Path, help="defaults to the run dir"
        )
        cmd.set_defaults(handler=self.cmd_export)

        cmd = commands.add_parser(
            "gen-questionnaire", help="generate a questionnaire for a norm"
        )
        cmd.add_argument("norm", help="the norm text")
        cmd.add_argument("--year", type=int, default=2000)
        cmd.add_argument("--config", type=pathlib.Path)
        cmd.set_defaults(handler=self.cmd_gen_questionnaire)

        cmd = commands.add_parser(
            "eval-downstream", help="evaluate an agent on a dataset"
        )
        cmd.add_argument("run_dir", type=pathlib.Path)
        cmd.add_argument("--dataset", type=pathlib.Path, required=True)
        cmd.add_argument(
            "--samples", type=int, default=DEFAULT_SAMPLE_COUNT
        )
        cmd.add_argument("--trial", type=int, default=1)
        cmd.add_argument(
            "--generation", type=int, help="defaults to the last one"
        )
        cmd.add_argument(
            "--agent", help="defaults to the best agent of the generation"
        )
        cmd.set_defaults(handler=self.cmd_eval_downstream)

        cmd = commands.add_parser(
            "replay", help="recompute the metrics from the run logs"
        )
        cmd.add_argument("run_dir", type=pathlib.Path)
        cmd.add_argument(
            "--check",
            action="store_true",
            help="compare with the stored metrics.csv",
        )
        cmd.set_defaults(handler=self.cmd_replay)

        cmd = commands.add_parser(
            "sweep", help="run over population sizes and mutation rates"
        )
        _add_overrides(cmd)
        cmd.add_argument("--sizes", type=comma_list(int), help="e.g. 10,20")
        cmd.add_argument(
            "--rates", "--m", type=comma_list(float), help="e.g. 0.2,0.8"
        )
        cmd.set_defaults(handler=self.cmd_sweep)
        return parser

    def configure(self, namespace: argparse.Namespace) -> ExperimentConfig:
        """
        Load the configuration and apply the command line overrides.

        :param namespace: The parsed arguments
        :return: the configuration
        :raises ConfigError: when the configuration is invalid
        """
        return load_config(namespace.config).with_overrides(
            seed=namespace.seed,
            method=namespace.method,
            population=namespace.population,
            replace=namespace.replace,
            mutation=namespace.mutation,
            trials=namespace.trials,
            output=namespace.output,
        )

    def cmd_run(self, namespace: argparse.Namespace) -> int:
        """
        Run an experiment.

        :param namespace: The parsed arguments
        :return: the exit code
        """
        config = self.configure(namespace)
        out = pathlib.Path(config.output_dir)
        log = run(config, out)
        self.wout(f"{len(log)} records written to {out}\n")
        return type(self).EXIT_SUCCESS

    def cmd_export(self, namespace: argparse.Namespace) -> int:
        """
        Export the metrics of a finished run.

        :param namespace: The parsed arguments
        :return: the exit code
        """
        log = RunLog.load(namespace.run_dir)
        out = namespace.output or namespace.run_dir
        for path in export_run([log], out, namespace.format):
            self.wout(f"{path}\n")
        return type(self).EXIT_SUCCESS

    def cmd_gen_questionnaire(self, namespace: argparse.Namespace) -> int:
        """
        Generate the questionnaire for a norm.

        :param namespace: The parsed arguments
        :return: the exit code
        """
        config = load_config(namespace.config)
        spec = config.generator
        questionnaire = generate_questionnaire(
            SocialNorm(generation_year=namespace.year, text=namespace.norm),
            make_backend(spec, config.token_budget),
            spec.sampling(),
        )
        items = {i.aspect: i.question for i in questionnaire.items}
        self.wout(json.dumps(items, indent=2, ensure_ascii=False) + "\n")
        return type(self).EXIT_SUCCESS

    def cmd_eval_downstream(self, namespace: argparse.Namespace) -> int:
        """
        Evaluate an agent of a finished run on a downstream dataset.

        :param namespace: The parsed arguments
        :return: the exit code
        """
        run_dir, trial = namespace.run_dir, namespace.trial
        config = load_run_config(run_dir)
        log = RunLog.load(run_dir)
        agent_id, generation = recorded_best(log, trial, namespace.generation)
        agent_id = namespace.agent or agent_id
        backends = make_backends(config)
        result = downstream_eval(
            recorded_profile(log, trial, agent_id),
            namespace.dataset,
            backends.agent,
            backends.observer,
            namespace.samples,
            recorded_fitness(log, trial, agent_id, generation),
            backends.agent_sampling,
            backends.observer_sampling,
            config.workers,
        )
        self.wout(result.model_dump_json(indent=2) + "\n")
        return type(self).EXIT_SUCCESS

    def cmd_replay(self, namespace: argparse.Namespace) -> int:
        """
        Recompute the metrics of a finished run.

        :param namespace: The parsed arguments
        :return: the exit code
        """
        table = replay(namespace.run_dir, namespace.check)
        self.wout(table.to_csv())
        return type(self).EXIT_SUCCESS

    def cmd_sweep(self, namespace: argparse.Namespace) -> int:
        """
        Run the experiment over a grid.

        :param namespace: The parsed arguments
        :return: the exit code
        """
        config = self.configure(namespace)
        evolution = config.evolution
        sizes = namespace.sizes or [evolution.population_size]
        rates = namespace.rates or [evolution.mutation_rate]
        for path in sweep(
            config, sizes, rates, pathlib.Path(config.output_dir)
        ):
            self.wout(f"{path}\n")
        return type(self).EXIT_SUCCESS


def main() -> None:
    """Run the ``evoagent`` command."""
    EvoAgentApp.start()


EvoAgentApp.start(__name__)
