# pleat/coordinator.py

from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, Optional

import pandas as pd

from pleat.errors import PleatError, RefusedSingular, SeamError
from pleat.io.export import write_developed_svg, write_fields_csv, write_json, write_obj
from pleat.runners.bump_runner import BumpRunner
from pleat.runners.chain_runner import ChainOutcome, ChainRunner
from pleat.runners.fold_runner import FoldRunner
from pleat.runners.mesh_runner import MeshRunner
from pleat.runners.report_runner import ReportRunner
from pleat.runners.ridge_runner import RidgeBuild, RidgeRunner
from pleat.schemas import BumpExperimentRequest, JobConfig, RunSummary

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SINGULAR = 3
EXIT_FLAGGED = 4

_STATUS = {EXIT_OK: "ok", EXIT_CONFIG: "config-error", EXIT_SINGULAR: "singular", EXIT_FLAGGED: "audit-flagged"}

COMMANDS = ("ridge", "fold", "propagate", "mesh", "develop", "check", "reproduce")


class Coordinator:
    """Routes a command to the runners, writes artifacts and maps failures to exit codes."""

    def __init__(self, job: JobConfig, out_dir: Optional[str] = None):
        self.job = job
        self.settings = job.settings()
        self.out_dir = Path(out_dir or job.output_dir)
        self.ridge_runner = RidgeRunner(self.settings)
        self.fold_runner = FoldRunner(self.settings)
        self.chain_runner = ChainRunner(self.settings)
        self.mesh_runner = MeshRunner(self.settings)

    def handle(self, command: str) -> RunSummary:
        if command not in COMMANDS:
            raise ValueError(f"Unknown command '{command}'.")
        summary = RunSummary(
            profile=self.job.name,
            command=command,
            config_digest=self.job.digest(),
            exit_code=EXIT_OK,
            status="ok",
        )
        fields: Dict[str, pd.DataFrame] = {}
        try:
            code = self._route(command, summary, fields)
        except RefusedSingular as e:
            code, summary.message = EXIT_SINGULAR, str(e)
        except SeamError as e:
            code, summary.message = EXIT_FLAGGED, str(e)
        except (PleatError, ValueError) as e:
            code, summary.message = EXIT_CONFIG, str(e)
        if summary.mesh is not None and summary.mesh.flagged and code == EXIT_OK:
            code = EXIT_FLAGGED

        summary.exit_code = code
        summary.status = _STATUS[code]
        if "report" in self.job.artifacts or code != EXIT_OK:
            ReportRunner(str(self.out_dir)).write(summary, fields)
        logger.info("%s finished with status %s", command, summary.status)
        return summary

    def handle_bump(self, request: BumpExperimentRequest) -> RunSummary:
        summary = RunSummary(
            profile="bump-experiment",
            command="reproduce",
            config_digest=request.job.digest(),
            exit_code=EXIT_OK,
            status="ok",
        )
        try:
            summary.bump = BumpRunner(request).run()
            path = write_json(summary.bump, self.out_dir / "bump_experiment.json")
            summary.artifacts.append(path)
        except (PleatError, ValueError) as e:
            summary.exit_code, summary.status, summary.message = EXIT_CONFIG, _STATUS[EXIT_CONFIG], str(e)
        write_json(summary, self.out_dir / "report.json")
        return summary

    # -------------------------
    # Routing
    # -------------------------

    def _route(self, command: str, summary: RunSummary, fields: Dict[str, pd.DataFrame]) -> int:
        build = self.ridge_runner.build(self.job)
        summary.ridge = build.summary
        if command == "ridge":
            self._write_fields(summary, {"ridge": self.ridge_runner.fields(build.ridge)})
            return EXIT_OK

        fold = self.fold_runner.fold(build.seed_foldline, build.ridge, side=1)
        summary.fold = fold.summary
        if command == "fold":
            self._write_fields(summary, {"seed_fold": fold.fields})
            return EXIT_OK

        outcome = self._propagate(build, fold.descriptor, summary, fields)
        if not outcome.chain.regular:
            return EXIT_SINGULAR
        if command == "propagate":
            return EXIT_OK

        if command in ("mesh", "check", "reproduce"):
            mesh = self.mesh_runner.assemble(outcome.chain, self.job.symmetry)
            summary.mesh = mesh.summary
            if command != "check" and "mesh" in self.job.artifacts:
                summary.artifacts.append(write_obj(self.out_dir / "annulus.obj", mesh.annulus.meshes))

        if command in ("develop", "reproduce") and "developed-svg" in self.job.artifacts:
            developed = self.mesh_runner.develop(outcome.chain, outcome.foldline_of)
            summary.artifacts.append(
                write_developed_svg(self.out_dir / "developed.svg", build.foldlines, developed)
            )
        return EXIT_OK

    def _propagate(self, build: RidgeBuild, seed, summary: RunSummary, fields: Dict[str, pd.DataFrame]) -> ChainOutcome:
        outcome = self.chain_runner.run(build.foldlines, seed, build.seed_index, sides=self.job.side)
        summary.chain = outcome.summary
        fields.update(outcome.fields)
        self._write_fields(summary, {f"strip_{label}": df for label, df in outcome.fields.items()})
        return outcome

    def _write_fields(self, summary: RunSummary, tables: Dict[str, pd.DataFrame]) -> None:
        if "fields" not in self.job.artifacts:
            return
        for name, df in tables.items():
            summary.artifacts.append(write_fields_csv(df, self.out_dir / f"{name}.csv"))
