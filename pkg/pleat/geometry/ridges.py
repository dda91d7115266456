# pleat/geometry/ridges.py

from __future__ import annotations

import logging
from math import gcd
from typing import Optional

import numpy as np

from pleat.config import DEFAULT_SETTINGS, Settings
from pleat.errors import FenchelObstruction, TooShort
from pleat.geometry.curvekit import ParametricCurve, SpaceCurve, arclength_reparametrize

logger = logging.getLogger(__name__)

_TWO_PI = 2.0 * np.pi

# Rotoreflection carrying each sphere/saddle arc onto the next one.
_QUARTER_TURN_FLIP = np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, -1.0]])
_SECTOR_MAPS = np.stack([np.linalg.matrix_power(_QUARTER_TURN_FLIP, k) for k in range(4)])

SPHERE_PARABOLOID_HALF_WIDTH = float(np.sqrt((np.sqrt(10.0) - 1.0) / 9.0))


# -----------------------------
# Toroidal family
# -----------------------------

def torus_curve(a: float, p: int, q: int, size: Optional[int] = None, settings: Settings = DEFAULT_SETTINGS) -> SpaceCurve:
    """
    Closed (p, q) curve on the torus with radii a and 1:
    ((a + cos lt) cos t, (a + cos lt) sin t, sin lt), l = q / p, t in [0, 2 pi p].
    """
    if int(p) != p or int(q) != q or p <= 0 or q <= 0:
        raise ValueError("Torus winding numbers p, q must be positive integers.")
    if gcd(int(p), int(q)) != 1:
        raise ValueError(f"Torus winding numbers must be coprime, got ({p}, {q}).")
    if a <= 1.0:
        raise ValueError("Torus radius a must exceed 1 for an embedded torus.")
    lam = q / p

    def func(t):
        t = np.asarray(t, dtype=float)
        g = a + np.cos(lam * t)
        return np.stack([g * np.cos(t), g * np.sin(t), np.sin(lam * t)], axis=-1)

    def jet(t):
        t = np.asarray(t, dtype=float)
        c, s = np.cos(t), np.sin(t)
        cl, sl = np.cos(lam * t), np.sin(lam * t)
        g = a + cl
        g1, g2, g3 = -lam * sl, -lam ** 2 * cl, lam ** 3 * sl
        d1 = np.stack([g1 * c - g * s, g1 * s + g * c, lam * cl], axis=-1)
        d2 = np.stack(
            [g2 * c - 2 * g1 * s - g * c, g2 * s + 2 * g1 * c - g * s, -lam ** 2 * sl],
            axis=-1,
        )
        d3 = np.stack(
            [
                g3 * c - 3 * g2 * s - 3 * g1 * c + g * s,
                g3 * s + 3 * g2 * c - 3 * g1 * s - g * c,
                -lam ** 3 * cl,
            ],
            axis=-1,
        )
        return d1, d2, d3

    curve = ParametricCurve(func=func, t_start=0.0, t_end=_TWO_PI * p, closed=True, jet=jet)
    return arclength_reparametrize(curve, size=size, settings=settings)


# -----------------------------
# Sphere / saddle intersection
# -----------------------------

def _arc(t: np.ndarray):
    """Arc (t, f, 3 t f) of the unit sphere cut by z = 3xy, with its first three derivatives."""
    w = 1.0 + 9.0 * t ** 2
    q = (1.0 - t ** 2) / w
    q1 = -20.0 * t / w ** 2
    q2 = -20.0 / w ** 2 + 720.0 * t ** 2 / w ** 3
    q3 = 2160.0 * t / w ** 3 - 38880.0 * t ** 3 / w ** 4

    f = np.sqrt(q)
    f1 = q1 / (2.0 * f)
    f2 = q2 / (2.0 * f) - q1 ** 2 / (4.0 * f ** 3)
    f3 = q3 / (2.0 * f) - 3.0 * q1 * q2 / (4.0 * f ** 3) + 3.0 * q1 ** 3 / (8.0 * f ** 5)

    one, zero = np.ones_like(t), np.zeros_like(t)
    r = np.stack([t, f, 3.0 * t * f], axis=-1)
    d1 = np.stack([one, f1, 3.0 * f + 3.0 * t * f1], axis=-1)
    d2 = np.stack([zero, f2, 6.0 * f1 + 3.0 * t * f2], axis=-1)
    d3 = np.stack([zero, f3, 9.0 * f2 + 3.0 * t * f3], axis=-1)
    return r, d1, d2, d3


def sphere_paraboloid_seam() -> float:
    """Largest position or unit-tangent jump where consecutive mapped arcs meet."""
    t0 = np.array([SPHERE_PARABOLOID_HALF_WIDTH])
    end, end_d1 = (x[0] for x in _arc(t0)[:2])
    start, start_d1 = (x[0] for x in _arc(-t0)[:2])
    gap = 0.0
    for k in range(4):
        a, b = _SECTOR_MAPS[k], _SECTOR_MAPS[(k + 1) % 4]
        gap = max(gap, float(np.linalg.norm(a @ end - b @ start)))
        ta = a @ end_d1 / np.linalg.norm(end_d1)
        tb = b @ start_d1 / np.linalg.norm(start_d1)
        gap = max(gap, float(np.linalg.norm(ta - tb)))
    return gap


def sphere_paraboloid_curve(size: Optional[int] = None, settings: Settings = DEFAULT_SETTINGS) -> SpaceCurve:
    """
    Closed curve where the unit sphere meets the saddle z = 3xy, built from one
    arc and its three images under the quarter-turn-and-flip (x, y, z) -> (y, -x, -z).
    """
    t0 = SPHERE_PARABOLOID_HALF_WIDTH
    width = 2.0 * t0

    def split(u):
        u = np.asarray(u, dtype=float)
        piece = np.clip(np.floor(u / width).astype(int), 0, 3)
        return piece, u - piece * width - t0

    def func(u):
        piece, t = split(u)
        r = _arc(t)[0]
        return np.einsum("...ij,...j->...i", _SECTOR_MAPS[piece], r)

    def jet(u):
        piece, t = split(u)
        maps = _SECTOR_MAPS[piece]
        return tuple(np.einsum("...ij,...j->...i", maps, d) for d in _arc(t)[1:])

    curve = ParametricCurve(
        func=func,
        t_start=0.0,
        t_end=4.0 * width,
        closed=True,
        jet=jet,
        breaks=(width, 2.0 * width, 3.0 * width),
    )
    seam = sphere_paraboloid_seam()
    if seam > settings.tolerances.seam:
        logger.warning("sphere/saddle arcs meet with a gap of %.3e", seam)
    else:
        logger.debug("sphere/saddle arc seam %.3e", seam)
    return arclength_reparametrize(curve, size=size, settings=settings)


# -----------------------------
# Ridges for the unit circle
# -----------------------------

def total_curvature(curve: SpaceCurve) -> float:
    if not curve.closed:
        raise ValueError("Total curvature is only defined here for closed curves.")
    return float(curve.curvature.integral())


def fenchel_gate(curve: SpaceCurve) -> float:
    """Closed ridges over closed convex foldlines need total curvature above 2 pi."""
    total = total_curvature(curve)
    if total <= _TWO_PI:
        raise FenchelObstruction(f"total curvature {total:.9f} does not exceed 2*pi")
    return total


def sphere_ridge(
    omega: SpaceCurve,
    target_length: float = _TWO_PI,
    settings: Settings = DEFAULT_SETTINGS,
) -> SpaceCurve:
    """
    Shrink a closed spherical curve longer than the target foldline to that
    length. The result lies on a sphere of radius target/L < 1, so its
    curvature is at least L/target > 1 = k_g of the unit circle.
    """
    tol = settings.tolerances
    radius_error = float(np.max(np.abs(np.linalg.norm(omega.positions, axis=1) - 1.0)))
    if radius_error > tol.unit_speed:
        raise ValueError(f"Curve is not on the unit sphere (max radius error {radius_error:.3e}).")
    if omega.length <= target_length * (1.0 + tol.length_match):
        raise TooShort(f"spherical curve of length {omega.length:.9f} cannot fold a foldline of length {target_length:.9f}")

    ridge = omega.scaled(target_length / omega.length)
    fenchel_gate(ridge)
    logger.debug(
        "sphere ridge: length %.9f -> %.9f, min curvature %.6f",
        omega.length, ridge.length, float(np.min(ridge.curvature.values)),
    )
    return ridge
