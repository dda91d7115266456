# pleat/geometry/propagate.py

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from pleat.config import DEFAULT_SETTINGS, Settings
from pleat.errors import DepthExhausted, NoIntersection, OnRegressionCurve, TangentHit
from pleat.geometry.curvekit import ArrayLike, PlanarCurve, ScalarField, SpaceCurve, uniform_grid
from pleat.geometry.localfold import (
    DarbouxFrame,
    FoldDescriptor,
    RulingField,
    _orthonormalize,
    flip_side,
    ruling_field,
)
from pleat.geometry.surface import DevelopableStrip

logger = logging.getLogger(__name__)


class Verdict(str, Enum):
    REGULAR = "Regular"
    CROSSES_REGRESSION = "CrossesRegression"
    NO_INTERSECTION = "NoIntersection"
    TANGENT_HIT = "TangentHit"


# -----------------------------
# Data
# -----------------------------

@dataclass(frozen=True, eq=False)
class CorrespondenceMap:
    """Ruling-mediated map from the current foldline (s1) to the next one (s2)."""

    s2: ScalarField
    velocity: ScalarField
    acceleration: ScalarField
    delta: ScalarField
    v_bar: ScalarField
    newton_iterations: int = DEFAULT_SETTINGS.newton_iterations

    def inverse(self, s2: ArrayLike) -> np.ndarray:
        """Arc lengths s1 whose rulings land at the given s2."""
        target = np.asarray(s2, dtype=float)
        s1 = self.s2.grid
        mapped = self.s2.values
        if self.s2.periodic:
            L1, L2 = self.s2.length, float(np.asarray(self.s2.jump))
            s1 = np.concatenate([s1 - L1, s1, s1 + L1])
            mapped = np.concatenate([mapped - L2, mapped, mapped + L2])
        guess = np.interp(target, mapped, s1)
        for _ in range(self.newton_iterations):
            step = (self.s2(guess) - target) / self.s2(guess, 1)
            guess = guess - step
            if np.max(np.abs(step)) < 1e-14 * self.s2.length:
                break
        return guess


@dataclass(frozen=True, eq=False)
class RegularityReport:
    s: np.ndarray
    v_bar: np.ndarray
    d: np.ndarray
    verdict: Verdict
    worst_index: Optional[int]
    margin: float
    failing: int

    @property
    def regular(self) -> bool:
        return self.verdict == Verdict.REGULAR

    def with_verdict(self, verdict: Verdict) -> "RegularityReport":
        return replace(self, verdict=verdict)

    def to_frame(self) -> pd.DataFrame:
        same_side = np.sign(self.d) * np.sign(self.v_bar) >= 0
        margin = np.where(same_side, np.abs(self.d) - np.abs(self.v_bar), np.inf)
        return pd.DataFrame({"s": self.s, "v_bar": self.v_bar, "d": self.d, "margin": margin})


@dataclass(frozen=True, eq=False)
class Intersection:
    v_bar: np.ndarray
    s2: np.ndarray
    delta: np.ndarray
    tangent: np.ndarray


@dataclass(frozen=True, eq=False)
class StepResult:
    """
    One strip of the chain. `carried` is the strip's own developable
    described at the next ridge; `next_descriptor` is the developable on the
    other side of that ridge which generates the following strip.
    """

    descriptor: FoldDescriptor
    rulings: RulingField
    report: RegularityReport
    correspondence: Optional[CorrespondenceMap] = None
    strip: Optional[DevelopableStrip] = None
    carried: Optional[FoldDescriptor] = None
    next_descriptor: Optional[FoldDescriptor] = None
    next_side_gap: Optional[float] = None


@dataclass(frozen=True, eq=False)
class ChainLeg:
    direction: str
    steps: Tuple[StepResult, ...]

    @property
    def regular(self) -> bool:
        return all(step.report.regular for step in self.steps)

    @property
    def halted(self) -> Optional[RegularityReport]:
        for step in self.steps:
            if not step.report.regular:
                return step.report
        return None


@dataclass(frozen=True, eq=False)
class FoldChain:
    seed: FoldDescriptor
    legs: Tuple[ChainLeg, ...]

    @property
    def regular(self) -> bool:
        return all(leg.regular for leg in self.legs)

    @property
    def halted(self) -> Optional[RegularityReport]:
        for leg in self.legs:
            if leg.halted is not None:
                return leg.halted
        return None

    def steps(self) -> List[Tuple[str, int, StepResult]]:
        return [(leg.direction, j, step) for leg in self.legs for j, step in enumerate(leg.steps)]

    def strips(self) -> List[Tuple[str, DevelopableStrip]]:
        return [
            (f"{direction}_{j + 1}", step.strip)
            for direction, j, step in self.steps()
            if step.strip is not None
        ]


# -----------------------------
# Pointwise formulas
# -----------------------------

def _circle_samples(radius: float, c: float, beta: np.ndarray):
    sin_b, cos_b = np.sin(beta), np.cos(beta)
    disc = sin_b ** 2 + c * c + 2.0 * c
    sign = np.where(sin_b >= 0.0, 1.0, -1.0)
    with np.errstate(invalid="ignore"):
        root = np.sqrt(disc)
    # sin(b) - sign*root rewritten without cancellation
    v_bar = -radius * sign * (c * c + 2.0 * c) / (np.abs(sin_b) + root)
    scale = radius * (1.0 + c)
    return v_bar, v_bar * cos_b / scale, (radius - v_bar * sin_b) / scale, disc


def circle_step(radius: ArrayLike, c: ArrayLike, beta: ArrayLike) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Signed ruling distance from a circle of radius R to the concentric circle
    of radius R(1 + c), and the tangent rotation delta between the two hits.
    """
    if np.any(np.asarray(radius, dtype=float) <= 0.0):
        raise ValueError("Circle radius must be positive.")
    if np.any(1.0 + np.asarray(c, dtype=float) <= 0.0):
        raise ValueError("Scaling increment must satisfy 1 + c > 0.")
    v_bar, sin_d, cos_d, disc = _circle_samples(radius, c, np.asarray(beta, dtype=float))
    if np.any(disc < 0.0):
        raise NoIntersection("ruling misses the next circle")
    return v_bar, sin_d, cos_d


def transport_descriptor(k1n: ArrayLike, tau1r: ArrayLike, delta: ArrayLike, velocity: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    k1n, tau1r, delta, velocity = (np.asarray(x, dtype=float) for x in (k1n, tau1r, delta, velocity))
    if np.any(velocity <= 0.0):
        raise ValueError("Correspondence velocity must be positive.")
    c, s = np.cos(delta), np.sin(delta)
    return (c * k1n + s * tau1r) / velocity, (-s * k1n + c * tau1r) / velocity


def _regression_factor(beta1, beta1_prime, k1g, v_bar):
    sin1 = np.sin(beta1)
    return 1.0 - v_bar * (beta1_prime + k1g) / sin1


def transport_via_regression(
    k1n: ArrayLike,
    beta1: ArrayLike,
    beta1_prime: ArrayLike,
    k1g: ArrayLike,
    beta2: ArrayLike,
    v_bar: ArrayLike,
) -> Tuple[np.ndarray, np.ndarray]:
    """Second-ridge descriptor from the principal curvature along the shared ruling."""
    k1n, beta1, beta1_prime, k1g, beta2, v_bar = (
        np.asarray(x, dtype=float) for x in (k1n, beta1, beta1_prime, k1g, beta2, v_bar)
    )
    sin1 = np.sin(beta1)
    if np.any(sin1 == 0.0):
        raise OnRegressionCurve("ruling tangent to the first ridge")
    factor = _regression_factor(beta1, beta1_prime, k1g, v_bar)
    if np.any(np.isclose(factor, 0.0, rtol=0.0, atol=1e-14)):
        raise OnRegressionCurve("next ridge meets the regression curve")
    ratio = np.sin(beta2) / sin1
    k2n = ratio ** 2 * k1n / factor
    tau2r = -(np.cos(beta2) / sin1) * ratio * k1n / factor
    return k2n, tau2r


def step_velocity(
    beta1: ArrayLike,
    beta2: ArrayLike,
    beta1_prime: ArrayLike,
    k1g: ArrayLike,
    v_bar: ArrayLike,
    check: bool = True,
) -> np.ndarray:
    beta1, beta2, beta1_prime, k1g, v_bar = (np.asarray(x, dtype=float) for x in (beta1, beta2, beta1_prime, k1g, v_bar))
    sin2 = np.sin(beta2)
    if check and np.any(sin2 == 0.0):
        raise TangentHit("ruling tangent to the next foldline")
    with np.errstate(divide="ignore", invalid="ignore"):
        return (np.sin(beta1) / sin2) * _regression_factor(beta1, beta1_prime, k1g, v_bar)


def next_side_descriptor(
    k2n: ArrayLike,
    tau2r: ArrayLike,
    velocity: ArrayLike,
    acceleration: ArrayLike,
    k1g: ArrayLike,
    k2g: ArrayLike,
    k2g_prime: ArrayLike,
    beta1: ArrayLike,
    beta2: ArrayLike,
    k1n_prime: ArrayLike,
    tau1r_prime: ArrayLike,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Descriptor of the developable on the far side of the second ridge, from
    the strip's descriptor there (k2n, tau2r). Derivatives are taken in s1;
    k2g_prime is d/ds1 of k2g(s2(s1)).
    """
    K, T, v, a, g1, G, G1 = (
        np.asarray(x, dtype=float) for x in (k2n, tau2r, velocity, acceleration, k1g, k2g, k2g_prime)
    )
    delta = np.asarray(beta1, dtype=float) - np.asarray(beta2, dtype=float)
    rotated = np.cos(delta) * np.asarray(k1n_prime, dtype=float) + np.sin(delta) * np.asarray(tau1r_prime, dtype=float)
    bracket = a * K * G + v * (K * G1 - T * G * (v * G - g1)) - G * rotated
    return -K, T - 2.0 * bracket / (v ** 2 * (K * K + G * G))


def next_side_descriptor_compact(
    k2n: ArrayLike,
    tau2r: ArrayLike,
    k1g: ArrayLike,
    k1g_prime: ArrayLike,
    k2g: ArrayLike,
    delta: ArrayLike,
    delta_prime: ArrayLike,
    delta_second: ArrayLike,
    k1n_prime: ArrayLike,
    tau1r_prime: ArrayLike,
) -> Tuple[np.ndarray, np.ndarray]:
    """Same result written in terms of delta and its first two derivatives."""
    K, T, g1, g1p, G, dl, dl1, dl2 = (
        np.asarray(x, dtype=float) for x in (k2n, tau2r, k1g, k1g_prime, k2g, delta, delta_prime, delta_second)
    )
    w = dl1 + g1
    rotated = np.cos(dl) * np.asarray(k1n_prime, dtype=float) + np.sin(dl) * np.asarray(tau1r_prime, dtype=float)
    bracket = K * (dl2 + g1p) - T * w * dl1 - G * rotated
    return -K, T - 2.0 * (G / w) ** 2 * bracket / (K * K + G * G)


# -----------------------------
# Regularity
# -----------------------------

def _samples(x: Union[ScalarField, ArrayLike]) -> np.ndarray:
    if isinstance(x, ScalarField):
        return x(x.grid)
    return np.asarray(x, dtype=float)


def regularity_check(
    v_bar: Union[ScalarField, ArrayLike],
    d: Union[ScalarField, ArrayLike],
    s: Optional[ArrayLike] = None,
    tangent: Optional[np.ndarray] = None,
) -> RegularityReport:
    """
    A sample is regular when the ruling reaches the next foldline (v_bar
    defined) and either the regression curve lies on the other side of the
    ridge or strictly beyond the next foldline.
    """
    v = _samples(v_bar)
    dd = _samples(d)
    if s is None:
        s = v_bar.grid if isinstance(v_bar, ScalarField) else np.arange(v.size, dtype=float)
    s = np.asarray(s, dtype=float)

    defined = np.isfinite(v)
    v_safe = np.where(defined, v, 0.0)
    opposite = np.sign(dd) * np.sign(v_safe) < 0
    ok = defined & (opposite | (np.abs(dd) > np.abs(v_safe)))

    same_side = defined & ~opposite
    margins = np.where(same_side, np.abs(dd) - np.abs(v_safe), np.inf)
    worst = int(np.argmin(margins)) if np.any(same_side) else None
    margin = float(margins[worst]) if worst is not None else float("inf")

    if not np.all(defined):
        verdict = Verdict.NO_INTERSECTION
    elif tangent is not None and np.any(tangent):
        verdict = Verdict.TANGENT_HIT
    elif not np.all(ok):
        verdict = Verdict.CROSSES_REGRESSION
    else:
        verdict = Verdict.REGULAR

    return RegularityReport(
        s=s,
        v_bar=v,
        d=dd,
        verdict=verdict,
        worst_index=worst,
        margin=margin,
        failing=int(np.count_nonzero(~ok)),
    )


# -----------------------------
# Ruling / foldline intersection
# -----------------------------

def _cross2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _lift(s2: np.ndarray, period: Optional[float]) -> np.ndarray:
    if period is None:
        return s2
    return np.unwrap(np.mod(s2, period), period=period)


def ruling_intersect_general(
    foldline: PlanarCurve,
    beta: Union[ScalarField, ArrayLike],
    next_foldline: PlanarCurve,
    settings: Settings = DEFAULT_SETTINGS,
) -> Intersection:
    """
    Nearest hit of every developed ruling line with the next foldline.

    A dense polyline of the next foldline gives the first guess, refined by
    Newton steps on its spline. Rays without a hit are NaN; hits with
    incidence sine below the tangent tolerance are flagged.
    """
    tol = settings.tolerances
    b = _samples(beta)
    P = foldline.positions
    R = np.cos(b)[:, None] * foldline.tangents + np.sin(b)[:, None] * foldline.left_normals

    m = settings.oversample * next_foldline.size
    seg_s = uniform_grid(next_foldline.length, m, next_foldline.closed)
    Q = next_foldline.point_at(seg_s)
    if next_foldline.closed:
        A, E = Q, np.roll(Q, -1, axis=0) - Q
        seg_len = np.full(m, next_foldline.length / m)
    else:
        A, E = Q[:-1], Q[1:] - Q[:-1]
        seg_s = seg_s[:-1]
        seg_len = np.full(m - 1, next_foldline.length / (m - 1))

    n = P.shape[0]
    v_bar = np.full(n, np.nan)
    s2 = np.full(n, np.nan)
    chunk = settings.intersection_chunk
    for lo in range(0, n, chunk):
        rows = slice(lo, min(lo + chunk, n))
        r = R[rows][:, None, :]
        diff = A[None, :, :] - P[rows][:, None, :]
        denom = _cross2(r, E[None, :, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            v = _cross2(diff, E[None, :, :]) / denom
            w = _cross2(diff, r) / denom
        valid = (denom != 0.0) & (w >= 0.0) & (w <= 1.0)
        distance = np.where(valid, np.abs(v), np.inf)
        j = np.argmin(distance, axis=1)
        idx = np.arange(j.size)
        hit = np.isfinite(distance[idx, j])
        v_bar[rows] = np.where(hit, v[idx, j], np.nan)
        s2[rows] = np.where(hit, seg_s[j] + w[idx, j] * seg_len[j], np.nan)

    found = np.isfinite(v_bar)
    for _ in range(settings.newton_iterations):
        if not np.any(found):
            break
        X = next_foldline.point_at(s2[found])
        D = next_foldline.position_field(s2[found], 1)
        F = P[found] + v_bar[found][:, None] * R[found] - X
        det = _cross2(R[found], D)
        dv = _cross2(F, D) / det
        ds = _cross2(F, R[found]) / det
        v_bar[found] -= dv
        s2[found] -= ds
        if max(np.max(np.abs(dv)), np.max(np.abs(ds))) < tol.newton:
            break

    T2 = np.full_like(R, np.nan)
    T2[found] = next_foldline.tangent_at(s2[found])
    incidence = np.abs(_cross2(R, T2))
    tangent = found & (incidence < tol.tangent_hit)
    T1 = foldline.tangents
    delta = np.arctan2(_cross2(T1, T2), np.einsum("ij,ij->i", T1, T2))
    if np.all(found):
        delta = np.unwrap(delta)
        s2 = _lift(s2, next_foldline.length if next_foldline.closed else None)
    return Intersection(v_bar=v_bar, s2=s2, delta=delta, tangent=tangent)


def _circle_intersection(foldline: PlanarCurve, beta: np.ndarray, next_foldline: PlanarCurve, settings: Settings) -> Intersection:
    c1, c2 = foldline.circle, next_foldline.circle
    R = c1.radius
    c = c2.radius / R - 1.0
    v_bar, sin_d, cos_d, disc = _circle_samples(R, c, beta)
    v_bar = np.where(disc < 0.0, np.nan, v_bar)
    delta = np.arctan2(sin_d, cos_d)
    theta2 = c1.phase + foldline.grid / R + delta
    s2 = c2.radius * (theta2 - c2.phase)
    tangent = np.abs(np.sin(beta - delta)) < settings.tolerances.tangent_hit
    return Intersection(v_bar=v_bar, s2=s2, delta=delta, tangent=tangent & np.isfinite(v_bar))


def _intersect(foldline: PlanarCurve, beta: np.ndarray, next_foldline: PlanarCurve, settings: Settings) -> Intersection:
    if foldline.concentric_with(next_foldline):
        return _circle_intersection(foldline, beta, next_foldline, settings)
    return ruling_intersect_general(foldline, beta, next_foldline, settings)


# -----------------------------
# Steps and chains
# -----------------------------

def _consume_depth(depth: int, used: int, strict: bool) -> int:
    left = depth - used
    if left >= 0:
        return left
    message = f"propagation needs {used} derivative orders but only {depth} remain"
    if strict:
        raise DepthExhausted(message)
    logger.warning("%s; continuing from refitted samples", message)
    return 0


def propagate_step(
    desc: FoldDescriptor,
    next_foldline: PlanarCurve,
    boundary: bool = False,
    settings: Settings = DEFAULT_SETTINGS,
) -> StepResult:
    """
    Carry the developable `desc` across to `next_foldline`.

    Intrinsic data (correspondence, regularity, next descriptors) is always
    produced; the strip and the next ridge in space only when `desc` carries
    a Darboux frame. With `boundary` the next foldline only bounds the strip.
    """
    if desc.foldline is None:
        raise ValueError("Descriptor must reference its foldline.")
    foldline = desc.foldline
    tol = settings.tolerances
    s1 = desc.grid

    rulings = ruling_field(desc)
    b1, bp1 = rulings.beta(s1), rulings.beta_prime(s1)
    kg1 = desc.k_g(s1)
    hit = _intersect(foldline, b1, next_foldline, settings)

    if not np.all(np.isfinite(hit.v_bar)):
        report = regularity_check(hit.v_bar, rulings.regression, s=s1, tangent=hit.tangent)
        logger.info("step to foldline of length %.6g: %s", next_foldline.length, report.verdict.value)
        return StepResult(descriptor=desc, rulings=rulings, report=report)

    b2 = b1 - hit.delta
    velocity = step_velocity(b1, b2, bp1, kg1, hit.v_bar, check=False)
    tangent = hit.tangent | (np.abs(np.sin(b2)) < tol.tangent_hit)
    report = regularity_check(hit.v_bar, rulings.regression, s=s1, tangent=tangent)
    monotone = bool(np.all(velocity > 0.0) and np.all(np.diff(hit.s2) > 0.0))
    if report.regular and not monotone:
        logger.warning("correspondence is not monotone; rulings cross before the next foldline")
        report = report.with_verdict(Verdict.CROSSES_REGRESSION)
    logger.info(
        "step to foldline of length %.6g: %s (margin %.4g)",
        next_foldline.length, report.verdict.value, report.margin,
    )
    if not report.regular:
        return StepResult(descriptor=desc, rulings=rulings, report=report)

    depth = desc.depth
    field = desc.k_g.with_values
    correspondence = CorrespondenceMap(
        s2=field(hit.s2, depth=depth, jump=next_foldline.length if next_foldline.closed else 0.0),
        velocity=field(velocity, depth=max(depth - 1, 0)),
        acceleration=field(velocity, depth=max(depth - 1, 0)).derivative(),
        delta=field(hit.delta, depth=depth),
        v_bar=field(hit.v_bar, depth=depth),
        newton_iterations=settings.newton_iterations,
    )
    strip = _strip(desc, rulings, hit.v_bar) if desc.frame is not None else None
    if boundary:
        return StepResult(descriptor=desc, rulings=rulings, report=report, correspondence=correspondence, strip=strip)

    k1n, tau1r = desc.k_n(s1), desc.tau_r(s1)
    k2n, tau2r = transport_descriptor(k1n, tau1r, hit.delta, velocity)
    k2g_field = next_foldline.geodesic_curvature
    k2g = k2g_field(hit.s2)
    k2n_next, tau2r_next = next_side_descriptor(
        k2n, tau2r, velocity, correspondence.acceleration.values, kg1, k2g,
        k2g_field(hit.s2, 1) * velocity, b1, b2, desc.k_n(s1, 1), desc.tau_r(s1, 1),
    )
    gap = _next_side_gap(desc, correspondence, k2n, tau2r, k2g, k2n_next, tau2r_next)
    if gap > tol.next_side_agreement:
        logger.warning("next-side formulas disagree by %.3e (relative)", gap)

    # resample everything onto the next foldline's uniform grid
    s1_star = correspondence.inverse(next_foldline.grid)
    carried_depth = _consume_depth(depth, 1, settings.strict_depth)
    next_depth = _consume_depth(depth, 2, settings.strict_depth)

    def carry(values: np.ndarray, dep: int) -> ScalarField:
        return k2g_field.with_values(field(values)(s1_star), depth=dep)

    carried = FoldDescriptor(
        side=desc.side,
        k_n=carry(k2n, carried_depth),
        tau_r=carry(tau2r, carried_depth),
        k_g=k2g_field,
        foldline=next_foldline,
    )
    following = FoldDescriptor(
        side=-desc.side,
        k_n=carry(k2n_next, next_depth),
        tau_r=carry(tau2r_next, next_depth),
        k_g=k2g_field,
        foldline=next_foldline,
    )

    if desc.frame is not None:
        carried, following = _embed_next_ridge(desc, rulings, hit.v_bar, correspondence, s1_star, carried, following, settings)

    return StepResult(
        descriptor=desc,
        rulings=rulings,
        report=report,
        correspondence=correspondence,
        strip=strip,
        carried=carried,
        next_descriptor=following,
        next_side_gap=gap,
    )


def propagate_direction(
    foldlines: Sequence[PlanarCurve],
    seed: FoldDescriptor,
    direction: str = "outward",
    settings: Settings = DEFAULT_SETTINGS,
) -> ChainLeg:
    """Propagate from foldlines[0] (the seed's foldline) across the rest; the last one is a boundary."""
    steps: List[StepResult] = []
    desc = seed
    last = len(foldlines) - 2
    for j, next_foldline in enumerate(foldlines[1:]):
        step = propagate_step(desc, next_foldline, boundary=j == last, settings=settings)
        steps.append(step)
        if not step.report.regular:
            logger.info("%s leg halted at strip %d: %s", direction, j + 1, step.report.verdict.value)
            break
        desc = step.next_descriptor
    return ChainLeg(direction=direction, steps=tuple(steps))


def propagate_chain(
    foldlines: Sequence[PlanarCurve],
    seed: FoldDescriptor,
    seed_index: int = 0,
    sides: str = "alternate",
    settings: Settings = DEFAULT_SETTINGS,
) -> FoldChain:
    """
    Propagate a seed fold outward (increasing index) and inward (decreasing
    index) across an ordered foldline family. With sides="alternate" the
    outward strip starts on side + and the inward strip on side -;
    "reversed" swaps them. Each leg halts at its first non-regular strip.
    """
    if not 0 <= seed_index < len(foldlines):
        raise ValueError(f"seed_index {seed_index} outside foldline family of size {len(foldlines)}.")
    if sides not in ("alternate", "reversed"):
        raise ValueError(f"Unknown side rule '{sides}'.")
    _check_nested(foldlines)

    outward_side = 1 if sides == "alternate" else -1
    outward_seed = seed if seed.side == outward_side else flip_side(seed)
    inward_seed = flip_side(outward_seed)

    legs = []
    outward = list(foldlines[seed_index:])
    if len(outward) > 1:
        legs.append(propagate_direction(outward, outward_seed, "outward", settings))
    inward = list(foldlines[seed_index::-1])
    if len(inward) > 1:
        legs.append(propagate_direction(inward, inward_seed, "inward", settings))
    return FoldChain(seed=outward_seed, legs=tuple(legs))


# -----------------------------
# Bump perturbation
# -----------------------------

def bump(x: ArrayLike, nu: int = 0) -> np.ndarray:
    """exp(-1/(1 - x^2)) on |x| < 1 and its derivatives up to order 3."""
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 1.0
    xi = np.where(inside, x, 0.0)
    w = 1.0 - xi ** 2
    psi = np.where(inside, np.exp(-1.0 / w), 0.0)
    g1 = -2.0 * xi / w ** 2
    g2 = -2.0 / w ** 2 - 8.0 * xi ** 2 / w ** 3
    g3 = -24.0 * xi / w ** 3 - 48.0 * xi ** 3 / w ** 4
    factors = {0: 1.0, 1: g1, 2: g2 + g1 ** 2, 3: g3 + 3.0 * g1 * g2 + g1 ** 3}
    if nu not in factors:
        raise ValueError("bump derivatives are available up to order 3.")
    return np.where(inside, psi * factors[nu], 0.0)


@lru_cache(maxsize=None)
def bump_scale(nu: int) -> float:
    x = np.linspace(-1.0, 1.0, 200001)
    return float(np.max(np.abs(bump(x, nu))))


def torsion_bump(s: np.ndarray, length: float, periodic: bool, s0: float, magnitude: float, width: float, order: int) -> np.ndarray:
    """Bump whose order-th derivative peaks at |magnitude|, supported on |s - s0| < width."""
    offset = np.asarray(s, dtype=float) - s0
    if periodic:
        offset = np.mod(offset + length / 2.0, length) - length / 2.0
    return magnitude * width ** order / bump_scale(order) * bump(offset / width)


def perturb_torsion_bump(
    seed: FoldDescriptor,
    s0: float,
    magnitude: float,
    width: float,
    order: int = 3,
    rho: float = 1e-3,
) -> FoldDescriptor:
    """
    Add a steep compactly supported bump to tau_r whose `order`-th derivative
    has height |magnitude|. The bump is the order-fold antiderivative of a
    compactly supported function, so on closed foldlines it is automatically
    periodic with zero-mean derivatives. The embedded ridge is dropped since
    it no longer matches the descriptor.
    """
    if magnitude == 0.0:
        return seed
    if width <= 0.0:
        raise ValueError("Bump width must be positive.")
    field = seed.tau_r
    s = field.grid
    p = torsion_bump(s, field.length, field.periodic, s0, magnitude, width, order)
    peak = float(np.max(np.abs(p)))
    if peak >= rho:
        raise ValueError(f"bump changes tau_r by {peak:.3e} >= rho={rho:.1e}; use a narrower bump")
    if width < 8.0 * field.spacing:
        logger.warning("bump width %.3g resolved by fewer than 16 samples", width)
    return replace(
        seed,
        tau_r=field.with_values(field(s) + p, depth=field.depth),
        ridge=None,
        frame=None,
    )


# -------------------------
# Helpers
# -------------------------

def _check_nested(foldlines: Sequence[PlanarCurve]) -> None:
    circles = [f.circle for f in foldlines]
    if all(c is not None for c in circles):
        radii = np.array([c.radius for c in circles])
        if not np.all(np.diff(radii) > 0.0):
            raise ValueError("Concentric foldline radii must be strictly increasing.")


def _next_side_gap(
    desc: FoldDescriptor,
    correspondence: CorrespondenceMap,
    k2n: np.ndarray,
    tau2r: np.ndarray,
    k2g: np.ndarray,
    k2n_next: np.ndarray,
    tau2r_next: np.ndarray,
) -> float:
    """Relative sup gap between the next-side descriptor and its delta form."""
    s1 = desc.grid
    delta = correspondence.delta
    k_compact, tau_compact = next_side_descriptor_compact(
        k2n, tau2r, desc.k_g(s1), desc.k_g(s1, 1), k2g,
        delta(s1), delta(s1, 1), delta(s1, 2), desc.k_n(s1, 1), desc.tau_r(s1, 1),
    )
    gap = max(np.max(np.abs(k_compact - k2n_next)), np.max(np.abs(tau_compact - tau2r_next)))
    scale = max(1.0, float(np.max(np.abs(k2n_next))), float(np.max(np.abs(tau2r_next))))
    return float(gap) / scale


def _strip(desc: FoldDescriptor, rulings: RulingField, v_bar: np.ndarray) -> DevelopableStrip:
    return DevelopableStrip(
        ridge=desc.ridge,
        rulings=rulings,
        v_lo=np.minimum(v_bar, 0.0),
        v_hi=np.maximum(v_bar, 0.0),
        normals=desc.frame.n,
        points=desc.frame.points,
        tangents=desc.frame.T,
    )


def _embed_next_ridge(
    desc: FoldDescriptor,
    rulings: RulingField,
    v_bar: np.ndarray,
    correspondence: CorrespondenceMap,
    s1_star: np.ndarray,
    carried: FoldDescriptor,
    following: FoldDescriptor,
    settings: Settings,
) -> Tuple[FoldDescriptor, FoldDescriptor]:
    points = desc.frame.points + v_bar[:, None] * rulings.directions
    point_field = desc.k_g.with_values(points)
    points2 = point_field(s1_star)
    tangents2 = point_field(s1_star, 1) / correspondence.velocity(s1_star)[:, None]
    tangents2 = tangents2 / np.linalg.norm(tangents2, axis=1, keepdims=True)

    # the tangent plane, hence the normal, is constant along each ruling
    normals2 = _orthonormalize(desc.k_g.with_values(desc.frame.n)(s1_star), tangents2)
    frame = DarbouxFrame(points=points2, T=tangents2, u=np.cross(normals2, tangents2), n=normals2)

    next_foldline = carried.foldline
    ridge = SpaceCurve(positions=points2, length=next_foldline.length, closed=next_foldline.closed, settings=settings)
    carried = replace(carried, ridge=ridge, frame=frame)
    following = replace(following, ridge=ridge, frame=frame.rotated(-2.0 * carried.alpha(next_foldline.grid)))
    return carried, following
