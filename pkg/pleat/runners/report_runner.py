# pleat/runners/report_runner.py

from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, List, Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from pleat.io.export import write_json
from pleat.schemas import RunSummary

logger = logging.getLogger(__name__)


class ReportRunner:
    """
    Writes the run report.

    - report.json with the full RunSummary.
    - An Excel workbook with Summary + Findings tabs and one tab per strip.
    - PNG plots of v_bar against d and of (k_n, tau_r) per strip.
    """

    def __init__(self, reports_dir: str = "out"):
        self.reports_dir = Path(reports_dir)
        self.reports_dir.mkdir(parents=True, exist_ok=True)

    def write(self, summary: RunSummary, fields: Optional[Dict[str, pd.DataFrame]] = None) -> List[str]:
        fields = fields or {}
        paths = [
            self._write_excel(summary, fields),
        ]
        if fields:
            paths.append(self._plot_regression(fields))
            paths.append(self._plot_descriptors(fields))
        summary.artifacts.extend(paths)
        summary.artifacts.append(str(self.reports_dir / "report.json"))
        write_json(summary, self.reports_dir / "report.json")
        return paths + [str(self.reports_dir / "report.json")]

    # -------------------------
    # Helpers
    # -------------------------

    def _findings(self, summary: RunSummary) -> List[Dict[str, str]]:
        rows = []
        if summary.chain is not None:
            for strip in summary.chain.strips:
                reg = strip.regularity
                detail = f"verdict {reg.verdict}"
                if reg.margin is not None:
                    detail += f", margin {reg.margin:.4g} at s={reg.worst_s:.6g}"
                if reg.failing_samples:
                    detail += f", {reg.failing_samples} failing samples"
                rows.append({"finding": strip.label, "details": detail})
        if summary.mesh is not None:
            worst = max(summary.mesh.audits, key=lambda a: a.normalized, default=None)
            if worst is not None:
                rows.append(
                    {"finding": "curvature audit", "details": f"worst normalized |K| {worst.normalized:.3e} ({worst.label})"}
                )
            rows.append({"finding": "seam gap", "details": f"{summary.mesh.seam_gap:.3e}"})
        if summary.message:
            rows.append({"finding": "message", "details": summary.message})
        return rows or [{"finding": "none", "details": ""}]

    def _write_excel(self, summary: RunSummary, fields: Dict[str, pd.DataFrame]) -> str:
        profile_tag = summary.profile.replace(" ", "_").replace(":", "_")
        out_path = self.reports_dir / f"report_{profile_tag}_{summary.config_digest[:12]}.xlsx"

        metrics = [
            {"metric": "profile", "value": summary.profile},
            {"metric": "command", "value": summary.command},
            {"metric": "status", "value": summary.status},
            {"metric": "exit_code", "value": summary.exit_code},
        ]
        if summary.ridge is not None:
            metrics += [
                {"metric": "ridge_length", "value": summary.ridge.length},
                {"metric": "ridge_total_curvature", "value": summary.ridge.total_curvature},
            ]
        if summary.chain is not None:
            metrics += [
                {"metric": "strips", "value": len(summary.chain.strips)},
                {"metric": "chain_regular", "value": summary.chain.regular},
            ]

        with pd.ExcelWriter(out_path, engine="openpyxl") as writer:
            pd.DataFrame(metrics).to_excel(writer, sheet_name="Summary", index=False)
            pd.DataFrame(self._findings(summary)).to_excel(writer, sheet_name="Findings", index=False)
            for label, df in fields.items():
                df.replace([np.inf, -np.inf], np.nan).to_excel(writer, sheet_name=label[:31], index=False)
        return str(out_path)

    def _plot_regression(self, fields: Dict[str, pd.DataFrame]) -> str:
        out_path = self.reports_dir / "regularity.png"
        fig, axes = plt.subplots(len(fields), 1, figsize=(8, 2.5 * len(fields)), squeeze=False)
        for ax, (label, df) in zip(axes[:, 0], fields.items()):
            d = df["d"].where(np.isfinite(df["d"]))
            ax.plot(df["s"], df["v_bar"], label="v_bar")
            ax.plot(df["s"], d, label="d")
            ax.set_title(label)
            ax.legend(loc="upper right")
        fig.tight_layout()
        fig.savefig(out_path, dpi=120)
        plt.close(fig)
        return str(out_path)

    def _plot_descriptors(self, fields: Dict[str, pd.DataFrame]) -> str:
        out_path = self.reports_dir / "descriptors.png"
        fig, axes = plt.subplots(len(fields), 1, figsize=(8, 2.5 * len(fields)), squeeze=False)
        for ax, (label, df) in zip(axes[:, 0], fields.items()):
            ax.plot(df["s"], df["k_n"], label="k_n")
            ax.plot(df["s"], df["tau_r"], label="tau_r")
            ax.set_title(label)
            ax.legend(loc="upper right")
        fig.tight_layout()
        fig.savefig(out_path, dpi=120)
        plt.close(fig)
        return str(out_path)
