# pleat/io/ingest.py

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from pleat.config import DEFAULT_SETTINGS, Settings
from pleat.geometry.curvekit import ParametricCurve, PlanarCurve, SpaceCurve, arclength_reparametrize

logger = logging.getLogger(__name__)


class CurveIngestor:
    """
    Reads sampled curves from CSV (columns s, x, y and optionally z) and
    resamples them at uniform arc length.

    - `s` is any increasing parameter; when absent the row index is used.
    - A closing sample repeating the first point is dropped for closed curves.
    """

    def __init__(self, settings: Settings = DEFAULT_SETTINGS):
        self.settings = settings

    def ingest(self, csv_path: Union[str, Path], closed: bool = True, size: Optional[int] = None) -> Union[PlanarCurve, SpaceCurve]:
        df = pd.read_csv(csv_path)
        points, t = self._parse(df, csv_path)

        period = None
        if closed and points.shape[0] > 2 and np.allclose(points[0], points[-1], rtol=0.0, atol=1e-12):
            if t is not None:
                period = float(t[-1] - t[0])
                t = t[:-1]
            points = points[:-1]
        curve = ParametricCurve.from_samples(points, closed=closed, t=t, period=period, degree=self.settings.spline_degree)
        result = arclength_reparametrize(curve, size=size or self.settings.resolution, settings=self.settings)
        logger.info("ingested %s: %d rows, length %.9g", csv_path, points.shape[0], result.length)
        return result

    # -------------------------
    # Helpers
    # -------------------------

    @staticmethod
    def _parse(df: pd.DataFrame, source) -> tuple:
        columns = [c.strip().lower() for c in df.columns]
        df = df.set_axis(columns, axis=1)
        for required in ("x", "y"):
            if required not in df.columns:
                raise ValueError(f"{source}: missing column '{required}'")

        coords = ["x", "y", "z"] if "z" in df.columns else ["x", "y"]
        values = df[coords].to_numpy(dtype=float)
        bad = ~np.isfinite(values)
        if bad.any():
            row, col = np.argwhere(bad)[0]
            raise ValueError(f"{source}: non-finite value in column '{coords[col]}' at row {row}")

        t = None
        if "s" in df.columns:
            t = df["s"].to_numpy(dtype=float)
            if not np.all(np.isfinite(t)):
                raise ValueError(f"{source}: non-finite value in column 's' at row {int(np.argmax(~np.isfinite(t)))}")
        return values, t
