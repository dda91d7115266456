# pleat/geometry/surface.py

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, List, Optional, Sequence, Tuple, Union

import numpy as np

from pleat.config import DEFAULT_SETTINGS, Settings
from pleat.errors import Degenerate, RefusedSingular, SeamError
from pleat.geometry.curvekit import ScalarField, SpaceCurve
from pleat.geometry.localfold import RulingField

if TYPE_CHECKING:
    from pleat.geometry.propagate import FoldChain

logger = logging.getLogger(__name__)

_TWO_PI = 2.0 * np.pi


# -----------------------------
# Strips and meshes
# -----------------------------

@dataclass(frozen=True, eq=False)
class DevelopableStrip:
    """
    The part of one developable between two ridges, a(s, v) = p(s) + v r(s)
    with v_lo(s) <= v <= v_hi(s). All arrays are sampled on the ridge grid.
    """

    ridge: SpaceCurve
    rulings: RulingField
    v_lo: np.ndarray
    v_hi: np.ndarray
    normals: np.ndarray
    points: np.ndarray
    tangents: np.ndarray

    def __post_init__(self):
        if self.rulings.directions is None:
            raise ValueError("A strip needs embedded ruling directions.")
        n = self.points.shape[0]
        for name in ("v_lo", "v_hi", "normals", "tangents"):
            if getattr(self, name).shape[0] != n:
                raise ValueError(f"Strip field '{name}' does not match {n} ridge samples.")
        if np.any(self.v_lo > 0.0) or np.any(self.v_hi < 0.0):
            raise ValueError("Strip extents must satisfy v_lo <= 0 <= v_hi.")

    @property
    def closed(self) -> bool:
        return self.ridge.closed

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    @property
    def directions(self) -> np.ndarray:
        return self.rulings.directions


@dataclass(frozen=True, eq=False)
class StripMesh:
    """Quad grid of res_u x res_t vertices, row-major in u; crease rows are t-indices."""

    vertices: np.ndarray
    normals: np.ndarray
    faces: np.ndarray
    res_u: int
    res_t: int
    closed: bool
    crease_rows: Tuple[int, ...] = ()

    @classmethod
    def from_grid(cls, grid: np.ndarray, normals: Optional[np.ndarray] = None, closed: bool = False,
                  crease_rows: Tuple[int, ...] = ()) -> "StripMesh":
        grid = np.asarray(grid, dtype=float)
        res_u, res_t = grid.shape[:2]
        if normals is None:
            normals = _grid_normals(grid, closed)
        return cls(
            vertices=grid.reshape(-1, grid.shape[2]),
            normals=np.asarray(normals, dtype=float).reshape(-1, 3),
            faces=_quad_faces(res_u, res_t, closed),
            res_u=res_u,
            res_t=res_t,
            closed=closed,
            crease_rows=crease_rows,
        )

    @property
    def grid(self) -> np.ndarray:
        return self.vertices.reshape(self.res_u, self.res_t, -1)

    def triangles(self) -> np.ndarray:
        f = self.faces
        return np.concatenate([f[:, [0, 1, 2]], f[:, [0, 2, 3]]], axis=0)

    def crease_polylines(self) -> List[np.ndarray]:
        """Vertex indices of each crease row, closed rows repeating their first vertex."""
        lines = []
        for j in self.crease_rows:
            idx = np.arange(self.res_u) * self.res_t + j
            if self.closed:
                idx = np.append(idx, idx[0])
            lines.append(idx)
        return lines

    def interior_mask(self) -> np.ndarray:
        mask = np.zeros((self.res_u, self.res_t), dtype=bool)
        mask[:, 1:-1] = True
        if not self.closed:
            mask[[0, -1], :] = False
        return mask.ravel()

    def transformed(self, matrix: np.ndarray, shift: np.ndarray) -> "StripMesh":
        normals = self.normals @ matrix.T
        if np.linalg.det(matrix) < 0.0:
            normals = -normals
        return StripMesh(
            vertices=self.vertices @ matrix.T + shift,
            normals=normals,
            faces=self.faces,
            res_u=self.res_u,
            res_t=self.res_t,
            closed=self.closed,
            crease_rows=self.crease_rows,
        )

    def rows(self, start: int, stop: int) -> "StripMesh":
        """Open sub-mesh made of u-rows start..stop (inclusive, wrapping on closed meshes)."""
        idx = np.arange(start, stop + 1) % self.res_u
        grid = self.grid[idx]
        normals = self.normals.reshape(self.res_u, self.res_t, 3)[idx]
        return StripMesh.from_grid(grid, normals, closed=False, crease_rows=self.crease_rows)


@dataclass(frozen=True, eq=False)
class DevelopedStrip:
    """A strip unfolded into the plane: developed ridge, tangent angle and ruling directions."""

    points: np.ndarray
    theta: np.ndarray
    directions: np.ndarray
    beta: np.ndarray
    k_g: np.ndarray
    v_lo: np.ndarray
    v_hi: np.ndarray
    closed: bool

    def vertex_grid(self, res_t: int = DEFAULT_SETTINGS.mesh_res_t) -> np.ndarray:
        t = np.linspace(0.0, 1.0, res_t)
        v = self.v_lo[:, None] + t[None, :] * (self.v_hi - self.v_lo)[:, None]
        return self.points[:, None, :] + v[:, :, None] * self.directions[:, None, :]

    def far_boundary(self) -> np.ndarray:
        far = np.where(np.abs(self.v_lo) > np.abs(self.v_hi), self.v_lo, self.v_hi)
        return self.points + far[:, None] * self.directions


@dataclass(frozen=True, eq=False)
class CurvatureAudit:
    gaussian: np.ndarray
    mean: np.ndarray
    interior: np.ndarray
    max_abs: float
    scale: float
    normalized: float
    threshold: float

    @property
    def flagged(self) -> bool:
        return self.normalized >= self.threshold


@dataclass(frozen=True, eq=False)
class Annulus:
    symmetry: str
    sectors: int
    meshes: Tuple[Tuple[str, StripMesh], ...]
    gap: float


# -----------------------------
# Operations
# -----------------------------

def embed_strip(
    strip: DevelopableStrip,
    res_u: Optional[int] = None,
    res_t: Optional[int] = None,
    settings: Settings = DEFAULT_SETTINGS,
) -> StripMesh:
    """Sample a(s, v) on a res_u x res_t grid; v runs from v_lo to v_hi along each ruling."""
    tol = settings.tolerances
    _refuse_singular(strip, tol.regression_margin)
    res_u = res_u or strip.size
    res_t = res_t or settings.mesh_res_t

    points, directions, normals, v_lo, v_hi = _resampled(strip, res_u)
    t = np.linspace(0.0, 1.0, res_t)
    v = v_lo[:, None] + t[None, :] * (v_hi - v_lo)[:, None]
    grid = points[:, None, :] + v[:, :, None] * directions[:, None, :]
    vertex_normals = np.repeat(normals[:, None, :], res_t, axis=1)

    mesh = StripMesh.from_grid(grid, vertex_normals, closed=strip.closed, crease_rows=(0, res_t - 1))
    area = _quad_areas(mesh)
    if np.any(area <= tol.degenerate_area):
        bad = int(np.argmin(area)) // (res_t - 1)
        raise Degenerate(f"degenerate quad of area {float(np.min(area)):.3e} at ruling {bad}")
    logger.debug("embedded strip: %d x %d vertices, %d quads", res_u, res_t, mesh.faces.shape[0])
    return mesh


def develop_strip(strip: DevelopableStrip) -> DevelopedStrip:
    """
    Unfold a strip isometrically: the ridge is rebuilt in the plane from its
    geodesic curvature, and each ruling keeps its angle beta to the tangent.
    """
    ridge = strip.ridge
    T = strip.tangents
    u = np.cross(strip.normals, T)
    d1, d2, _ = ridge.parametric_derivatives
    k_g = np.einsum("ij,ij->i", d2, u) / np.einsum("ij,ij->i", d1, d1)

    k_g_field = ridge.field(k_g)
    theta = k_g_field.cumulative()
    turning = float(k_g_field.integral()) if strip.closed else 0.0
    if strip.closed and abs(turning - _TWO_PI * np.round(turning / _TWO_PI)) > 1e-9:
        # heading does not wrap: integrate on the open grid that ends at the seam
        ends = np.append(theta, theta[0] + turning)
        heading = ScalarField(
            values=np.column_stack([np.cos(ends), np.sin(ends)]),
            length=ridge.length,
            periodic=False,
            degree=k_g_field.degree,
        )
        points = heading.cumulative()[:-1]
    else:
        heading = ridge.field(np.column_stack([np.cos(theta), np.sin(theta)]))
        points = heading.cumulative()

    r = strip.directions
    beta = np.arctan2(np.einsum("ij,ij->i", r, u), np.einsum("ij,ij->i", r, T))
    directions = np.column_stack([np.cos(theta + beta), np.sin(theta + beta)])
    return DevelopedStrip(
        points=points,
        theta=theta,
        directions=directions,
        beta=beta,
        k_g=k_g,
        v_lo=strip.v_lo,
        v_hi=strip.v_hi,
        closed=strip.closed,
    )


def gaussian_curvature_audit(mesh: StripMesh, threshold: float = DEFAULT_SETTINGS.tolerances.audit_threshold) -> CurvatureAudit:
    """
    Angle-defect Gaussian curvature over mixed Voronoi areas at interior
    vertices, normalized by the mean squared cotangent-Laplacian mean curvature.
    """
    X = mesh.vertices
    tri = mesh.triangles()
    n = X.shape[0]

    p = [X[tri[:, k]] for k in range(3)]
    e = [p[(k + 2) % 3] - p[(k + 1) % 3] for k in range(3)]  # edge opposite corner k
    cross = np.cross(p[1] - p[0], p[2] - p[0])
    double_area = np.linalg.norm(cross, axis=1)

    angles, cots = [], []
    for k in range(3):
        a = p[(k + 1) % 3] - p[k]
        b = p[(k + 2) % 3] - p[k]
        dot = np.einsum("ij,ij->i", a, b)
        sin = np.linalg.norm(np.cross(a, b), axis=1)
        angles.append(np.arctan2(sin, dot))
        cots.append(dot / sin)

    angle_sum = np.zeros(n)
    area = np.zeros(n)
    laplace = np.zeros_like(X)
    obtuse = [angle > np.pi / 2.0 for angle in angles]
    any_obtuse = obtuse[0] | obtuse[1] | obtuse[2]
    for k in range(3):
        i, j, m = tri[:, k], tri[:, (k + 1) % 3], tri[:, (k + 2) % 3]
        np.add.at(angle_sum, i, angles[k])
        # voronoi share of corner k: edges k-j and k-m weighted by the opposite cotangents
        voronoi = (np.sum(e[(k + 2) % 3] ** 2, axis=1) * cots[(k + 2) % 3] + np.sum(e[(k + 1) % 3] ** 2, axis=1) * cots[(k + 1) % 3]) / 8.0
        share = np.where(any_obtuse, np.where(obtuse[k], double_area / 4.0, double_area / 8.0), voronoi)
        np.add.at(area, i, share)
        w = cots[k][:, None] * (X[j] - X[m])
        np.add.at(laplace, j, w)
        np.add.at(laplace, m, -w)

    interior = mesh.interior_mask() & (area > 0.0)
    K = np.zeros(n)
    H = np.zeros(n)
    K[interior] = (_TWO_PI - angle_sum[interior]) / area[interior]
    H[interior] = np.linalg.norm(laplace[interior], axis=1) / (4.0 * area[interior])

    max_abs = float(np.max(np.abs(K[interior]))) if np.any(interior) else 0.0
    scale = float(np.mean(H[interior] ** 2)) if np.any(interior) else 0.0
    normalized = max_abs / scale if scale > np.finfo(float).eps else max_abs
    audit = CurvatureAudit(
        gaussian=K, mean=H, interior=interior, max_abs=max_abs, scale=scale, normalized=normalized, threshold=threshold
    )
    if audit.flagged:
        logger.warning("curvature audit flagged mesh: normalized max |K| = %.3e", normalized)
    return audit


def crease_angles(normals_a: np.ndarray, normals_b: np.ndarray, tangents: np.ndarray) -> np.ndarray:
    """Signed angle about the ridge tangent taking one developable's normal to the other's."""
    return np.arctan2(
        np.einsum("ij,ij->i", tangents, np.cross(normals_a, normals_b)),
        np.einsum("ij,ij->i", normals_a, normals_b),
    )


def parse_symmetry(symmetry: Optional[str]) -> Tuple[str, int]:
    if symmetry in (None, "", "none"):
        return "none", 1
    kind, _, order = symmetry.partition(":")
    if kind not in ("rotate", "reflect") or not order.isdigit() or int(order) < 1:
        raise ValueError(f"Symmetry must look like 'rotate:n' or 'reflect:n', got '{symmetry}'.")
    return kind, int(order)


def annulus_assembly(
    chain: Union["FoldChain", Sequence[Tuple[str, DevelopableStrip]]],
    symmetry: Optional[str] = None,
    res_t: Optional[int] = None,
    settings: Settings = DEFAULT_SETTINGS,
) -> Annulus:
    """
    Assemble the folded annulus from a chain's strips.

    rotate:n builds sector 0 of every strip and places n rotated copies,
    checking each copy against the directly computed sector and against its
    neighbour's seam. reflect:n keeps the directly computed sectors (the
    improper symmetry exchanges the two developables at the seed ridge),
    checks that the seed ridge arcs are congruent and that every strip
    repeats itself under the rotation by two sectors.
    """
    strips = list(chain.strips() if hasattr(chain, "strips") else chain)
    if not strips:
        raise ValueError("Nothing to assemble: the chain produced no strips.")
    kind, order = parse_symmetry(symmetry)
    tol = settings.tolerances

    meshes = [(label, embed_strip(strip, res_t=res_t, settings=settings)) for label, strip in strips]
    if kind == "none":
        return Annulus(symmetry="none", sectors=1, meshes=tuple(meshes), gap=0.0)

    size = strips[0][1].size
    if any(strip.size != size or not strip.closed for _, strip in strips):
        raise ValueError("Sector assembly needs closed strips sampled on a common grid.")
    if size % order:
        raise ValueError(f"{size} samples cannot be split into {order} sectors.")
    m = size // order
    reference = strips[0][1].points

    out: List[Tuple[str, StripMesh]] = []
    gap = 0.0
    if kind == "rotate":
        transforms = [_kabsch(reference[:m], reference[k * m:(k + 1) * m]) for k in range(order)]
        for label, mesh in meshes:
            base = mesh.rows(0, m)
            copies = [base.transformed(R, t) for R, t, _ in transforms]
            for k, copy in enumerate(copies):
                direct = mesh.rows(k * m, (k + 1) * m)
                gap = max(gap, float(np.max(np.linalg.norm(copy.vertices - direct.vertices, axis=1))))
                following = copies[(k + 1) % order]
                seam = copy.grid[-1] - following.grid[0]
                gap = max(gap, float(np.max(np.linalg.norm(seam, axis=1))))
                out.append((f"{label}/sector_{k}", copy))
    else:
        for k in range(order):
            _, _, residual = _kabsch(reference[:m], reference[k * m:(k + 1) * m], allow_reflection=True)
            gap = max(gap, residual)
        for label, mesh in meshes:
            sectors = [mesh.rows(k * m, (k + 1) * m) for k in range(order)]
            # two reflections make a rotation: sector k of every strip is a proper copy of sector k + 2
            if order > 2:
                for k, sector in enumerate(sectors):
                    _, _, residual = _kabsch(sector.vertices, sectors[(k + 2) % order].vertices)
                    gap = max(gap, residual)
            out.extend((f"{label}/sector_{k}", sector) for k, sector in enumerate(sectors))

    logger.info("assembled %s:%d annulus from %d strips, seam gap %.3e", kind, order, len(strips), gap)
    if gap > tol.seam:
        raise SeamError(f"{kind}:{order} sectors do not close", gap=gap)
    return Annulus(symmetry=f"{kind}:{order}", sectors=order, meshes=tuple(out), gap=gap)


# -------------------------
# Helpers
# -------------------------

def _refuse_singular(strip: DevelopableStrip, margin: float) -> None:
    d = strip.rulings.regression
    for extent in (strip.v_lo, strip.v_hi):
        same_side = (np.sign(extent) * np.sign(d) > 0.0) & np.isfinite(d)
        reach = same_side & (np.abs(extent) >= np.abs(d) * (1.0 - margin))
        if np.any(reach):
            bad = int(np.argmax(reach))
            raise RefusedSingular(
                f"strip extent {extent[bad]:.6g} reaches the regression curve at distance {d[bad]:.6g}",
                where=float(strip.ridge.grid[bad]),
            )


def _resampled(strip: DevelopableStrip, res_u: int):
    if res_u == strip.size:
        return strip.points, strip.directions, strip.normals, strip.v_lo, strip.v_hi
    packed = np.column_stack([strip.points, strip.directions, strip.normals, strip.v_lo, strip.v_hi])
    field: ScalarField = strip.ridge.field(packed)
    grid = np.linspace(0.0, strip.ridge.length, res_u, endpoint=not strip.closed)
    sampled = field(grid)
    directions = sampled[:, 3:6] / np.linalg.norm(sampled[:, 3:6], axis=1, keepdims=True)
    normals = sampled[:, 6:9] / np.linalg.norm(sampled[:, 6:9], axis=1, keepdims=True)
    return sampled[:, :3], directions, normals, np.minimum(sampled[:, 9], 0.0), np.maximum(sampled[:, 10], 0.0)


def _quad_faces(res_u: int, res_t: int, closed: bool) -> np.ndarray:
    rows = res_u if closed else res_u - 1
    i, j = np.meshgrid(np.arange(rows), np.arange(res_t - 1), indexing="ij")
    i, j = i.ravel(), j.ravel()
    i1 = (i + 1) % res_u
    return np.column_stack([i * res_t + j, i1 * res_t + j, i1 * res_t + j + 1, i * res_t + j + 1])


def _quad_areas(mesh: StripMesh) -> np.ndarray:
    X = mesh.vertices
    f = mesh.faces
    return 0.5 * np.linalg.norm(np.cross(X[f[:, 2]] - X[f[:, 0]], X[f[:, 3]] - X[f[:, 1]]), axis=1)


def _grid_normals(grid: np.ndarray, closed: bool) -> np.ndarray:
    du = np.gradient(grid, axis=0) if not closed else (np.roll(grid, -1, axis=0) - np.roll(grid, 1, axis=0))
    dt = np.gradient(grid, axis=1)
    n = np.cross(du, dt)
    return n / np.linalg.norm(n, axis=-1, keepdims=True)


def _kabsch(src: np.ndarray, dst: np.ndarray, allow_reflection: bool = False) -> Tuple[np.ndarray, np.ndarray, float]:
    """Best rigid motion x -> R x + t taking src onto dst, with the max residual."""
    cs, cd = src.mean(axis=0), dst.mean(axis=0)
    U, _, Vt = np.linalg.svd((src - cs).T @ (dst - cd))
    D = np.eye(3)
    if not allow_reflection and np.linalg.det(Vt.T @ U.T) < 0.0:
        D[2, 2] = -1.0
    R = Vt.T @ D @ U.T
    t = cd - R @ cs
    residual = float(np.max(np.linalg.norm(src @ R.T + t - dst, axis=1)))
    return R, t, residual
