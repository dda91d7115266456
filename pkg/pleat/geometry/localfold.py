# pleat/geometry/localfold.py

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from pleat.config import DEFAULT_SETTINGS, Settings
from pleat.errors import Degenerate, LengthMismatch, NotProper, RulingTangent
from pleat.geometry.curvekit import (
    ArrayLike,
    PlanarCurve,
    ScalarField,
    SpaceCurve,
    alpha_from_descriptor,
    check_same_grid,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DarbouxFrame:
    """Sampled frame {T, u, n} of one developable along its ridge, with the ridge points."""

    points: np.ndarray
    T: np.ndarray
    u: np.ndarray
    n: np.ndarray

    def rotated(self, angle: np.ndarray) -> "DarbouxFrame":
        """Rotate the surface normal about T by `angle` (per sample)."""
        c, s = np.cos(angle)[:, None], np.sin(angle)[:, None]
        n = c * self.n + s * np.cross(self.T, self.n)
        n = _orthonormalize(n, self.T)
        return DarbouxFrame(points=self.points, T=self.T, u=np.cross(n, self.T), n=n)


def _orthonormalize(v: np.ndarray, T: np.ndarray) -> np.ndarray:
    v = v - np.einsum("ij,ij->i", v, T)[:, None] * T
    return v / np.linalg.norm(v, axis=1, keepdims=True)


@dataclass(frozen=True, eq=False)
class FoldDescriptor:
    """
    One developable along a ridge, described by its normal curvature and
    relative torsion (arc length of the foldline). side = +1 means the fold
    angle alpha lies in (0, pi/2), side = -1 in (-pi/2, 0).
    """

    side: int
    k_n: ScalarField
    tau_r: ScalarField
    k_g: ScalarField
    foldline: Optional[PlanarCurve] = None
    ridge: Optional[SpaceCurve] = None
    frame: Optional[DarbouxFrame] = None

    def __post_init__(self):
        if self.side not in (1, -1):
            raise ValueError("side must be +1 or -1.")
        check_same_grid(self.k_n, self.tau_r, self.k_g)

    @property
    def grid(self) -> np.ndarray:
        return self.k_g.grid

    @property
    def depth(self) -> int:
        return min(self.k_n.depth, self.tau_r.depth)

    @cached_property
    def alpha(self) -> ScalarField:
        return alpha_from_descriptor(self.k_g, self.k_n)

    @cached_property
    def curvature(self) -> np.ndarray:
        s = self.grid
        return np.hypot(self.k_g(s), self.k_n(s))

    def is_proper(self, margin: float = 0.0) -> bool:
        s = self.grid
        k_g, k_n = self.k_g(s), self.k_n(s)
        return bool(np.all(k_g > margin) and np.all(np.abs(k_n) > margin) and np.all(np.sign(k_n) == -self.side))


@dataclass(frozen=True, eq=False)
class RulingField:
    """Ruling angles, regression distances and (when the ridge is embedded) directions of one developable."""

    side: int
    beta: ScalarField
    beta_prime: ScalarField
    regression: np.ndarray
    directions: Optional[np.ndarray] = None

    @property
    def grid(self) -> np.ndarray:
        return self.beta.grid

    def envelope_points(self, points: np.ndarray) -> np.ndarray:
        """Points of the regression curve; rows are inf where d is infinite."""
        if self.directions is None:
            raise ValueError("Ruling directions are only known for embedded ridges.")
        return points + self.regression[:, None] * self.directions


# -----------------------------
# Operations
# -----------------------------

def ruling_angle(k_n: ScalarField, tau_r: ScalarField) -> Tuple[ScalarField, ScalarField]:
    check_same_grid(k_n, tau_r)
    s = k_n.grid
    n, t = k_n(s), tau_r(s)
    norm2 = n * n + t * t
    if np.any(norm2 <= np.finfo(float).tiny):
        raise Degenerate("tau_r and k_n vanish simultaneously", where=float(s[int(np.argmin(norm2))]))
    depth = min(k_n.depth, tau_r.depth)
    beta = ScalarField.angle(
        np.arctan2(-n, t),
        length=k_n.length,
        periodic=k_n.periodic,
        start=k_n.start,
        degree=k_n.degree,
        depth=depth,
        strict=k_n.strict,
    )
    beta_prime = k_n.with_values((tau_r(s, 1) * n - k_n(s, 1) * t) / norm2, depth=max(depth - 1, 0))
    return beta, beta_prime


def ruling_directions(desc: FoldDescriptor) -> np.ndarray:
    if desc.frame is None:
        raise ValueError("Descriptor has no embedded ridge frame.")
    s = desc.grid
    n, t = desc.k_n(s), desc.tau_r(s)
    norm = np.hypot(n, t)
    if np.any(norm <= np.finfo(float).tiny):
        raise Degenerate("tau_r and k_n vanish simultaneously", where=float(s[int(np.argmin(norm))]))
    r = (t[:, None] * desc.frame.T - n[:, None] * desc.frame.u) / norm[:, None]
    return r / np.linalg.norm(r, axis=1, keepdims=True)


def ruling_direction(desc: FoldDescriptor, s: ArrayLike) -> np.ndarray:
    """Unit ruling direction at arc length(s) s, interpolating the ridge frame."""
    if desc.frame is None:
        raise ValueError("Descriptor has no embedded ridge frame.")
    frame_field = desc.k_g.with_values(np.concatenate([desc.frame.T, desc.frame.u], axis=1))
    sampled = np.atleast_2d(frame_field(s))
    T = sampled[:, :3] / np.linalg.norm(sampled[:, :3], axis=1, keepdims=True)
    u = _orthonormalize(sampled[:, 3:], T)
    n, t = np.atleast_1d(desc.k_n(s)), np.atleast_1d(desc.tau_r(s))
    norm = np.hypot(n, t)
    if np.any(norm <= np.finfo(float).tiny):
        raise Degenerate("tau_r and k_n vanish simultaneously")
    r = (t[:, None] * T - n[:, None] * u) / norm[:, None]
    r = r / np.linalg.norm(r, axis=1, keepdims=True)
    return r[0] if np.ndim(s) == 0 else r


def flip_side(desc: FoldDescriptor) -> FoldDescriptor:
    """The other proper fold along the same ridge: k_n changes sign, tau_r loses twice alpha'."""
    s = desc.grid
    g, g1 = desc.k_g(s), desc.k_g(s, 1)
    n, n1 = desc.k_n(s), desc.k_n(s, 1)
    alpha_prime = (g1 * n - g * n1) / (g * g + n * n)
    depth = max(min(desc.depth, desc.k_g.depth) - 1, 0)

    frame = None
    if desc.frame is not None:
        frame = desc.frame.rotated(-2.0 * desc.alpha(s))

    return replace(
        desc,
        side=-desc.side,
        k_n=desc.k_n.with_values(-n, depth=desc.k_n.depth),
        tau_r=desc.tau_r.with_values(desc.tau_r(s) - 2.0 * alpha_prime, depth=depth),
        frame=frame,
    )


def principal_curvature(k_n: ArrayLike, beta: ArrayLike, tol: float = 1e-12) -> np.ndarray:
    sin_b = np.sin(np.asarray(beta, dtype=float))
    if np.any(np.abs(sin_b) < tol):
        raise RulingTangent("ruling tangent to the ridge")
    return np.asarray(k_n, dtype=float) / sin_b ** 2


def regression_distance(beta: ArrayLike, beta_prime: ArrayLike, k_g: ArrayLike) -> np.ndarray:
    """Signed distance along the ruling to the regression curve; +-inf where rulings are parallel."""
    sin_b = np.sin(np.asarray(beta, dtype=float))
    denom = np.asarray(beta_prime, dtype=float) + np.asarray(k_g, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = sin_b / denom
    infinite = denom == 0.0
    return np.where(infinite, np.copysign(np.inf, np.where(sin_b == 0.0, 1.0, sin_b)), d)


def ruling_field(desc: FoldDescriptor) -> RulingField:
    beta, beta_prime = ruling_angle(desc.k_n, desc.tau_r)
    s = desc.grid
    d = regression_distance(beta(s), beta_prime(s), desc.k_g(s))
    _log_regression_jumps(s, d)
    directions = ruling_directions(desc) if desc.frame is not None else None
    return RulingField(side=desc.side, beta=beta, beta_prime=beta_prime, regression=d, directions=directions)


def fold_along(
    foldline: PlanarCurve,
    ridge: SpaceCurve,
    side: int,
    settings: Settings = DEFAULT_SETTINGS,
) -> Tuple[FoldDescriptor, RulingField]:
    """
    Fold `foldline` onto `ridge` on the given side.

    Both curves must be sampled on the same arc-length grid. The fold angle is
    alpha = side * arccos(k_g / k), so properness k > k_g > 0 is required.
    """
    tol = settings.tolerances
    if foldline.closed != ridge.closed or foldline.size != ridge.size:
        raise LengthMismatch("foldline and ridge must share closure and sample count")
    if abs(foldline.length - ridge.length) > tol.length_match * max(foldline.length, ridge.length):
        raise LengthMismatch(
            f"foldline length {foldline.length:.12g} differs from ridge length {ridge.length:.12g}"
        )

    s = foldline.grid
    k_g_field = foldline.geodesic_curvature
    k_g = k_g_field(s)
    T, N, B, k, tau, _ = ridge.frenet_samples

    margin = tol.properness_margin * float(np.max(k))
    gap = k - k_g
    if np.any(k_g <= 0.0) or np.any(gap < margin):
        worst = int(np.argmin(np.minimum(gap, k_g)))
        raise NotProper(
            f"fold requires k > k_g > 0; worst k - k_g = {gap[worst]:.3e}, k_g = {k_g[worst]:.3e}",
            where=float(s[worst]),
        )

    depth = min(k_g_field.depth, ridge.curvature.depth)
    alpha = side * np.arccos(np.clip(k_g / k, -1.0, 1.0))
    alpha_field = k_g_field.with_values(alpha, depth=depth)
    k_n = k_g_field.with_values(-np.sin(alpha) * k, depth=depth)
    tau_r = k_g_field.with_values(tau + alpha_field(s, 1), depth=max(depth - 1, 0))

    u = np.cos(alpha)[:, None] * N + np.sin(alpha)[:, None] * B
    n = np.cos(alpha)[:, None] * B - np.sin(alpha)[:, None] * N
    frame = DarbouxFrame(points=ridge.positions, T=T, u=u, n=n)

    desc = FoldDescriptor(side=side, k_n=k_n, tau_r=tau_r, k_g=k_g_field, foldline=foldline, ridge=ridge, frame=frame)
    rulings = ruling_field(desc)
    logger.debug(
        "fold side %+d: alpha in [%.4f, %.4f], min |d| %.4g",
        side, float(np.min(alpha)), float(np.max(alpha)), float(np.min(np.abs(rulings.regression))),
    )
    return desc, rulings


def fold_diagnostics(desc: FoldDescriptor, rulings: RulingField) -> pd.DataFrame:
    s = desc.grid
    beta = rulings.beta(s)
    return pd.DataFrame(
        {
            "s": s,
            "alpha": desc.alpha(s),
            "beta": beta,
            "beta_prime": rulings.beta_prime(s),
            "d": rulings.regression,
            "k_p": principal_curvature(desc.k_n(s), beta),
        }
    )


# -------------------------
# Helpers
# -------------------------

def _log_regression_jumps(s: np.ndarray, d: np.ndarray) -> None:
    # sin(beta) keeps its sign on a proper fold, so d can only change sign through infinity
    flips = np.flatnonzero(np.diff(np.sign(d)) != 0)
    if flips.size:
        logger.warning("regression curve passes through infinity near s=%.6g (%d places)", float(s[flips[0]]), flips.size)
