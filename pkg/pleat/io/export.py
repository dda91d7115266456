# pleat/io/export.py

from __future__ import annotations

import logging
from pathlib import Path
from typing import Iterable, Sequence, Tuple, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
from matplotlib.collections import LineCollection
import numpy as np
import pandas as pd
from pydantic import BaseModel

from pleat.geometry.curvekit import PlanarCurve
from pleat.geometry.surface import DevelopedStrip, StripMesh

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def write_fields_csv(df: pd.DataFrame, path: PathLike) -> str:
    """Byte-stable CSV: fixed float format and '\\n' line endings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format="%.12e", lineterminator="\n")
    return str(path)


def write_json(model: BaseModel, path: PathLike) -> str:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return str(path)


def write_obj(path: PathLike, parts: Sequence[Tuple[str, StripMesh]]) -> str:
    """
    One OBJ with a `g` group per mesh: vertices, vertex normals, quad faces
    (v//vn) and crease rows as `l` polylines.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        base_index = 0
        for name, mesh in parts:
            f.write(f"g {name}\n")
            for x, y, z in mesh.vertices:
                f.write(f"v {x:.9f} {y:.9f} {z:.9f}\n")
            for x, y, z in mesh.normals:
                f.write(f"vn {x:.9f} {y:.9f} {z:.9f}\n")
            for quad in mesh.faces + base_index + 1:
                f.write("f " + " ".join(f"{i}//{i}" for i in quad) + "\n")
            for line in mesh.crease_polylines():
                f.write("l " + " ".join(str(i) for i in line + base_index + 1) + "\n")
            base_index += mesh.vertices.shape[0]
    logger.info("wrote %s (%d groups)", path, len(parts))
    return str(path)


def write_developed_svg(
    path: PathLike,
    foldlines: Iterable[PlanarCurve],
    strips: Sequence[Tuple[str, DevelopedStrip, PlanarCurve]],
    ruling_stride: int = 32,
) -> str:
    """
    Flat state: the foldlines and every `ruling_stride`-th developed ruling of
    each strip, placed in the foldline chart by matching the developed ridge
    to its foldline.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    matplotlib.rcParams["svg.hashsalt"] = "pleat"

    fig, ax = plt.subplots(figsize=(8, 8))
    for curve in foldlines:
        closed = np.vstack([curve.positions, curve.positions[:1]]) if curve.closed else curve.positions
        ax.plot(closed[:, 0], closed[:, 1], color="black", linewidth=0.8)

    for _, developed, foldline in strips:
        R, t = _planar_fit(developed.points, foldline.positions)
        start = developed.points @ R.T + t
        end = developed.far_boundary() @ R.T + t
        segments = np.stack([start, end], axis=1)[::ruling_stride]
        ax.add_collection(LineCollection(segments, colors="tab:blue", linewidths=0.4))

    ax.set_aspect("equal")
    ax.set_axis_off()
    fig.savefig(path, format="svg", bbox_inches="tight", metadata={"Date": None})
    plt.close(fig)
    logger.info("wrote %s", path)
    return str(path)


def _planar_fit(src: np.ndarray, dst: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Rotation and shift taking corresponding planar points src onto dst."""
    cs, cd = src.mean(axis=0), dst.mean(axis=0)
    U, _, Vt = np.linalg.svd((src - cs).T @ (dst - cd))
    D = np.diag([1.0, np.sign(np.linalg.det(Vt.T @ U.T))])
    R = Vt.T @ D @ U.T
    return R, cd - R @ cs
