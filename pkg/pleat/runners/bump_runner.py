# pleat/runners/bump_runner.py

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from pleat.config import BumpDefaults
from pleat.geometry.localfold import FoldDescriptor, flip_side
from pleat.geometry.propagate import ChainLeg, StepResult, Verdict, perturb_torsion_bump, propagate_direction
from pleat.runners.fold_runner import FoldRunner
from pleat.runners.ridge_runner import RidgeRunner
from pleat.schemas import BumpExperimentRequest, BumpExperimentSummary

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class _Trial:
    magnitude: float
    width: float
    verdict: Optional[Verdict]
    deviation: float
    last_ridge_deviation: float
    regular: bool
    triggers: bool


class BumpRunner:
    """
    Searches for the smallest bump on the seed torsion that makes the last
    strip of the outward chain singular while the ridges before the one that
    generates it stay within epsilon of the unperturbed chain.

    Magnitudes are doubled from `magnitude_start` (both signs) until the chain
    stops being regular or the bump would move tau_r by rho, then bisected
    inside that bracket. When neither sign triggers, the bump is made steeper
    by halving its width, at most `width_halvings` times. Propagation is
    intrinsic.
    """

    def __init__(self, request: BumpExperimentRequest):
        self.request = request
        self.params: BumpDefaults = request.params
        self.settings = request.job.settings().model_copy(update={"resolution": self.params.resolution})
        self.evaluations = 0

    def run(self) -> BumpExperimentSummary:
        job, p = self.request.job, self.params
        build = RidgeRunner(self.settings).build(job)
        outcome = FoldRunner(self.settings).fold(build.seed_foldline, build.ridge, side=1)
        seed = outcome.descriptor
        if job.side == "reversed":
            seed = flip_side(seed)
        seed = replace(seed, ridge=None, frame=None)

        self.foldlines = build.foldlines[build.seed_index:]
        if len(self.foldlines) < 3:
            raise ValueError("the bump experiment needs at least two outward strips")
        self.seed = seed
        self.baseline = self._propagate(seed)
        if not self.baseline.regular:
            raise ValueError("the unperturbed outward chain is already singular")

        found: Optional[_Trial] = None
        width = p.width
        for _ in range(p.width_halvings + 1):
            for sign in (1.0, -1.0):
                found = self._search(sign, width)
                if found is not None:
                    break
            if found is not None:
                break
            logger.info("no trigger with bump width %.4g; halving it", width)
            width /= 2.0

        summary = BumpExperimentSummary(
            order=p.order,
            width=width if found is None else found.width,
            position=p.position,
            epsilon=p.epsilon,
            found=found is not None,
            magnitude=None if found is None else found.magnitude,
            verdict=None if found is None or found.verdict is None else found.verdict.value,
            max_deviation=None if found is None else found.deviation,
            last_ridge_deviation=None if found is None else found.last_ridge_deviation,
            evaluations=self.evaluations,
            message="" if found is not None else "no admissible magnitude below magnitude_max",
        )
        logger.info("bump experiment: found=%s magnitude=%s", summary.found, summary.magnitude)
        return summary

    # -------------------------
    # Helpers
    # -------------------------

    def _propagate(self, seed: FoldDescriptor) -> ChainLeg:
        return propagate_direction(self.foldlines, seed, "outward", self.settings)

    def _trial(self, magnitude: float, width: float) -> Optional[_Trial]:
        p = self.params
        self.evaluations += 1
        try:
            seed = perturb_torsion_bump(self.seed, p.position, magnitude, width, p.order, p.rho)
        except ValueError as e:
            logger.info("magnitude %.4g rejected: %s", magnitude, e)
            return None
        leg = self._propagate(seed)
        steps = leg.steps
        last_reached = len(steps) == len(self.baseline.steps)
        earlier_regular = all(step.report.regular for step in steps[:-1])
        verdict = steps[-1].report.verdict if last_reached else None
        deviation = _deviation(self.baseline.steps[:-1], steps[:-1])
        last_ridge = _deviation(self.baseline.steps[-1:], steps[-1:]) if last_reached else float("inf")
        triggers = (
            last_reached
            and earlier_regular
            and verdict == Verdict.CROSSES_REGRESSION
            and deviation <= p.epsilon
        )
        logger.debug(
            "magnitude %.6g width %.4g: verdict %s, deviation %.3e, last ridge %.3e",
            magnitude, width, verdict, deviation, last_ridge,
        )
        return _Trial(
            magnitude=magnitude,
            width=width,
            verdict=verdict,
            deviation=deviation,
            last_ridge_deviation=last_ridge,
            regular=leg.regular,
            triggers=triggers,
        )

    def _search(self, sign: float, width: float) -> Optional[_Trial]:
        p = self.params
        lo, hi = 0.0, None
        best: Optional[_Trial] = None
        magnitude = p.magnitude_start
        while magnitude <= p.magnitude_max:
            trial = self._trial(sign * magnitude, width)
            if trial is not None and trial.regular:
                lo = magnitude
                magnitude *= 2.0
                continue
            # rejected by rho or no longer regular: upper end of the bracket
            hi = magnitude
            if trial is not None and trial.triggers:
                best = trial
            break
        if hi is None:
            return None

        for _ in range(p.bisection_steps):
            mid = 0.5 * (lo + hi)
            trial = self._trial(sign * mid, width)
            if trial is not None and trial.regular:
                lo = mid
                continue
            hi = mid
            if trial is not None and trial.triggers:
                best = trial
        return best


def _deviation(baseline: Sequence[StepResult], perturbed: Sequence[StepResult]) -> float:
    """Sup-norm distance of (k_n, tau_r) over the ridges generating the given strips."""
    worst = 0.0
    for a, b in zip(baseline, perturbed):
        da, db = a.descriptor, b.descriptor
        worst = max(worst, da.k_n.sup_distance(db.k_n), da.tau_r.sup_distance(db.tau_r))
    return float(worst)
