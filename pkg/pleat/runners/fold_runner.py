# pleat/runners/fold_runner.py

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from pleat.config import DEFAULT_SETTINGS, Settings
from pleat.geometry.curvekit import PlanarCurve, SpaceCurve
from pleat.geometry.localfold import FoldDescriptor, RulingField, fold_along, fold_diagnostics
from pleat.schemas import FoldSummary


@dataclass(frozen=True, eq=False)
class FoldOutcome:
    descriptor: FoldDescriptor
    rulings: RulingField
    summary: FoldSummary
    fields: pd.DataFrame


class FoldRunner:
    """Folds the seed foldline onto the ridge and tabulates alpha, beta, d and k_p."""

    def __init__(self, settings: Settings = DEFAULT_SETTINGS):
        self.settings = settings

    def fold(self, foldline: PlanarCurve, ridge: SpaceCurve, side: int = 1) -> FoldOutcome:
        desc, rulings = fold_along(foldline, ridge, side, settings=self.settings)
        fields = fold_diagnostics(desc, rulings)
        fields["k_n"] = desc.k_n.values
        fields["tau_r"] = desc.tau_r.values

        summary = FoldSummary(
            side=side,
            alpha_min=float(fields["alpha"].min()),
            alpha_max=float(fields["alpha"].max()),
            min_abs_regression=float(np.min(np.abs(rulings.regression))),
            proper=desc.is_proper(),
        )
        return FoldOutcome(descriptor=desc, rulings=rulings, summary=summary, fields=fields)
