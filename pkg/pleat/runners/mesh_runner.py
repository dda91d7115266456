# pleat/runners/mesh_runner.py

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Tuple

from pleat.config import DEFAULT_SETTINGS, Settings
from pleat.geometry.curvekit import PlanarCurve
from pleat.geometry.propagate import FoldChain
from pleat.geometry.surface import Annulus, DevelopedStrip, annulus_assembly, develop_strip, gaussian_curvature_audit
from pleat.schemas import AuditSummary, MeshSummary

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MeshOutcome:
    annulus: Annulus
    summary: MeshSummary


class MeshRunner:
    """Embeds, assembles and audits the strips of a chain; develops them back to the plane."""

    def __init__(self, settings: Settings = DEFAULT_SETTINGS):
        self.settings = settings

    def assemble(self, chain: FoldChain, symmetry: str = "none") -> MeshOutcome:
        annulus = annulus_assembly(chain, symmetry, res_t=self.settings.mesh_res_t, settings=self.settings)
        threshold = self.settings.tolerances.audit_threshold

        audits = []
        for label, mesh in annulus.meshes:
            audit = gaussian_curvature_audit(mesh, threshold=threshold)
            audits.append(
                AuditSummary(
                    label=label,
                    max_abs_curvature=audit.max_abs,
                    normalized=audit.normalized,
                    flagged=audit.flagged,
                )
            )
        summary = MeshSummary(
            symmetry=annulus.symmetry,
            sectors=annulus.sectors,
            seam_gap=annulus.gap,
            meshes=len(annulus.meshes),
            audits=audits,
        )
        if summary.flagged:
            logger.warning("%d meshes flagged by the curvature audit", sum(a.flagged for a in audits))
        return MeshOutcome(annulus=annulus, summary=summary)

    def develop(self, chain: FoldChain, foldline_of: Dict[str, PlanarCurve]) -> List[Tuple[str, DevelopedStrip, PlanarCurve]]:
        return [(label, develop_strip(strip), foldline_of[label]) for label, strip in chain.strips()]
