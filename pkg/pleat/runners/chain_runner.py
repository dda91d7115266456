# pleat/runners/chain_runner.py

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from pleat.config import DEFAULT_SETTINGS, Settings
from pleat.geometry.curvekit import PlanarCurve
from pleat.geometry.localfold import FoldDescriptor
from pleat.geometry.propagate import FoldChain, StepResult, propagate_chain
from pleat.geometry.surface import crease_angles
from pleat.schemas import ChainSummary, RegularitySummary, StripSummary

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ChainOutcome:
    chain: FoldChain
    summary: ChainSummary
    fields: Dict[str, pd.DataFrame] = field(default_factory=dict)
    foldline_of: Dict[str, PlanarCurve] = field(default_factory=dict)


class ChainRunner:
    """
    Runs the bidirectional chain from a seed fold and tabulates, per strip,
    the quantities the regularity decision rests on (s, v_bar, d, k_n, tau_r).
    """

    def __init__(self, settings: Settings = DEFAULT_SETTINGS):
        self.settings = settings

    def run(self, foldlines: List[PlanarCurve], seed: FoldDescriptor, seed_index: int, sides: str = "alternate") -> ChainOutcome:
        chain = propagate_chain(foldlines, seed, seed_index=seed_index, sides=sides, settings=self.settings)

        strips: List[StripSummary] = []
        fields: Dict[str, pd.DataFrame] = {}
        foldline_of: Dict[str, PlanarCurve] = {}
        for direction, j, step in chain.steps():
            label = f"{direction}_{j + 1}"
            strips.append(self._strip_summary(label, direction, j, step))
            fields[label] = self._strip_fields(step)
            offset = j if direction == "outward" else -j
            foldline_of[label] = foldlines[seed_index + offset]

        halted = chain.halted
        summary = ChainSummary(
            seed_side=chain.seed.side,
            regular=chain.regular,
            strips=strips,
            halted=None if halted is None else halted.verdict.value,
        )
        if chain.regular:
            logger.info("chain regular: %d strips", len(strips))
        else:
            logger.warning("chain halted: %s", summary.halted)
        return ChainOutcome(chain=chain, summary=summary, fields=fields, foldline_of=foldline_of)

    # -------------------------
    # Helpers
    # -------------------------

    def _strip_summary(self, label: str, direction: str, j: int, step: StepResult) -> StripSummary:
        report = step.report
        worst_s = None if report.worst_index is None else float(report.s[report.worst_index])
        margin = report.margin if np.isfinite(report.margin) else None
        v = report.v_bar[np.isfinite(report.v_bar)]

        crease = None
        carried, following = step.carried, step.next_descriptor
        if carried is not None and carried.frame is not None and following is not None:
            angles = crease_angles(carried.frame.n, following.frame.n, carried.frame.T)
            crease = float(np.max(np.abs(angles)))

        return StripSummary(
            label=label,
            direction=direction,
            index=j + 1,
            side=step.descriptor.side,
            regularity=RegularitySummary(
                verdict=report.verdict.value,
                worst_s=worst_s,
                margin=margin,
                failing_samples=report.failing,
            ),
            v_bar_min=float(np.min(v)) if v.size else None,
            v_bar_max=float(np.max(v)) if v.size else None,
            crease_angle_max=crease,
        )

    @staticmethod
    def _strip_fields(step: StepResult) -> pd.DataFrame:
        df = step.report.to_frame()
        desc = step.descriptor
        df["k_n"] = desc.k_n.values
        df["tau_r"] = desc.tau_r.values
        df["beta"] = step.rulings.beta.values
        return df


def seed_crease(chain: FoldChain) -> Optional[np.ndarray]:
    """Dihedral between the outward and inward developables at the seed ridge."""
    if len(chain.legs) < 2:
        return None
    outward = chain.legs[0].steps[0].descriptor
    inward = chain.legs[1].steps[0].descriptor
    if outward.frame is None or inward.frame is None:
        return None
    return crease_angles(outward.frame.n, inward.frame.n, outward.frame.T)
