# pleat/runners/ridge_runner.py

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List

import numpy as np
import pandas as pd

from pleat.config import DEFAULT_SETTINGS, Settings
from pleat.geometry.curvekit import PlanarCurve, SpaceCurve
from pleat.geometry.ridges import fenchel_gate, sphere_paraboloid_curve, sphere_ridge, torus_curve
from pleat.io.ingest import CurveIngestor
from pleat.schemas import JobConfig, RidgePreset, RidgeSummary

logger = logging.getLogger(__name__)

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class RidgeBuild:
    ridge: SpaceCurve
    foldlines: List[PlanarCurve]
    seed_index: int
    summary: RidgeSummary

    @property
    def seed_foldline(self) -> PlanarCurve:
        return self.foldlines[self.seed_index]


class RidgeRunner:
    """
    Builds the seed ridge and the foldline family of a job, length-matched
    so that the seed foldline folds onto the ridge.

    - rescale "foldline": circles of relative radius r get radius r * L / (2 pi r_seed).
    - rescale "ridge": the ridge is shrunk (or scaled) to length 2 pi r_seed.
    """

    def __init__(self, settings: Settings = DEFAULT_SETTINGS):
        self.settings = settings
        self.ingestor = CurveIngestor(settings)

    def build(self, job: JobConfig) -> RidgeBuild:
        family = job.foldlines
        ridge = self._seed_curve(job.ridge)

        if family.files is not None:
            foldlines = [self.ingestor.ingest(path, closed=ridge.closed) for path in family.files]
            ridge = self._match_length(ridge, foldlines[family.seed_index].length, job.ridge)
        else:
            radii = np.asarray(family.radii, dtype=float)
            seed_radius = radii[family.seed_index]
            if family.rescale == "ridge":
                ridge = self._match_length(ridge, _TWO_PI * seed_radius, job.ridge)
                scale = 1.0
            else:
                scale = ridge.length / (_TWO_PI * seed_radius)
            size = ridge.size
            foldlines = [PlanarCurve.from_circle(r * scale, size=size, settings=self.settings) for r in radii]

        for j, foldline in enumerate(foldlines):
            if not isinstance(foldline, PlanarCurve):
                raise ValueError(f"foldline {j} is not planar")
            if foldline.closed and foldline.total_turning() <= 0.0:
                raise ValueError(f"foldline {j} must be traversed counter-clockwise")

        total = fenchel_gate(ridge) if ridge.closed else None
        k = ridge.curvature.values
        summary = RidgeSummary(
            preset=job.ridge.label(),
            samples=ridge.size,
            length=float(ridge.length),
            total_curvature=total,
            min_curvature=float(np.min(k)),
            max_curvature=float(np.max(k)),
            foldline_lengths=[float(f.length) for f in foldlines],
        )
        logger.info("ridge %s: length %.9f, total curvature %s", summary.preset, summary.length, total)
        return RidgeBuild(ridge=ridge, foldlines=foldlines, seed_index=family.seed_index, summary=summary)

    def fields(self, ridge: SpaceCurve) -> pd.DataFrame:
        T, N, B, k, tau, _ = ridge.frenet_samples
        p = ridge.positions
        return pd.DataFrame(
            {"s": ridge.grid, "x": p[:, 0], "y": p[:, 1], "z": p[:, 2], "k": k, "tau": tau}
        )

    # -------------------------
    # Helpers
    # -------------------------

    def _seed_curve(self, preset: RidgePreset) -> SpaceCurve:
        size = self.settings.resolution
        if preset.kind == "sphere-paraboloid":
            return sphere_paraboloid_curve(size=size, settings=self.settings)
        if preset.kind == "torus":
            return torus_curve(preset.a, preset.p, preset.q, size=size, settings=self.settings)
        curve = self.ingestor.ingest(preset.path, closed=True, size=size)
        if not isinstance(curve, SpaceCurve):
            raise ValueError(f"{preset.path}: ridge files need x, y and z columns")
        return curve

    def _match_length(self, ridge: SpaceCurve, target: float, preset: RidgePreset) -> SpaceCurve:
        if preset.kind in ("sphere-paraboloid", "sphere-file"):
            return sphere_ridge(ridge, target_length=target, settings=self.settings)
        return ridge.scaled(target / ridge.length)
