# pleat/geometry/curvekit.py

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.interpolate import BSpline, make_interp_spline

from pleat.config import DEFAULT_SETTINGS, Settings
from pleat.errors import Degenerate, DepthExhausted, FrameUndefined, VanishingSpeed

logger = logging.getLogger(__name__)

ArrayLike = Union[float, Sequence[float], np.ndarray]
Jet = Tuple[np.ndarray, ...]

_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(8)
_TWO_PI = 2.0 * np.pi


def uniform_grid(length: float, size: int, periodic: bool = True, start: float = 0.0) -> np.ndarray:
    if periodic:
        return start + length * np.arange(size) / size
    return np.linspace(start, start + length, size)


def _norm(v: np.ndarray) -> np.ndarray:
    return np.linalg.norm(v, axis=-1)


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


# -----------------------------
# Scalar fields
# -----------------------------

@dataclass(frozen=True, eq=False)
class ScalarField:
    """
    Smooth function of arc length sampled on a uniform grid.

    Periodic fields live on [start, start + length) and may be quasi-periodic,
    f(s + length) = f(s) + jump, which is how lifted angles and correspondence
    maps are stored. Open fields live on [start, start + length] with both end
    samples included. Samples may carry trailing dimensions (positions, frames);
    they are interpolated component-wise.

    `depth` counts the derivative orders that are still backed by fresh data.
    Asking for more either raises DepthExhausted (strict) or logs the accuracy
    loss and differentiates the current interpolant anyway.
    """

    values: np.ndarray
    length: float
    periodic: bool = True
    start: float = 0.0
    jump: Union[float, np.ndarray] = 0.0
    degree: int = DEFAULT_SETTINGS.spline_degree
    depth: int = DEFAULT_SETTINGS.derivative_depth
    strict: bool = DEFAULT_SETTINGS.strict_depth

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if self.length <= 0:
            raise ValueError("ScalarField length must be positive.")
        if self.degree % 2 == 0:
            raise ValueError("ScalarField degree must be odd.")
        if values.shape[0] <= self.degree + 1:
            raise ValueError(f"ScalarField needs more than {self.degree + 1} samples, got {values.shape[0]}.")
        if not np.all(np.isfinite(values)):
            bad = int(np.argwhere(~np.isfinite(values))[0][0])
            raise ValueError(f"ScalarField sample {bad} is not finite.")

    @classmethod
    def from_function(
        cls,
        fn: Callable[[np.ndarray], np.ndarray],
        length: float,
        size: int,
        periodic: bool = True,
        start: float = 0.0,
        **kwargs,
    ) -> "ScalarField":
        grid = uniform_grid(length, size, periodic, start)
        return cls(values=fn(grid), length=length, periodic=periodic, start=start, **kwargs)

    @classmethod
    def angle(cls, values: ArrayLike, length: float, periodic: bool = True, **kwargs) -> "ScalarField":
        """Angle samples, unwrapped along s; periodic angles record their winding as `jump`."""
        unwrapped = np.unwrap(np.asarray(values, dtype=float))
        jump = 0.0
        if periodic:
            jump = _TWO_PI * np.round((unwrapped[-1] - unwrapped[0]) / _TWO_PI)
        return cls(values=unwrapped, length=length, periodic=periodic, jump=float(jump), **kwargs)

    # -------------------------
    # Grid
    # -------------------------

    @property
    def size(self) -> int:
        return int(self.values.shape[0])

    @property
    def spacing(self) -> float:
        return self.length / (self.size if self.periodic else self.size - 1)

    @cached_property
    def grid(self) -> np.ndarray:
        return uniform_grid(self.length, self.size, self.periodic, self.start)

    def same_grid(self, other: "ScalarField") -> bool:
        return (
            self.size == other.size
            and self.periodic == other.periodic
            and np.isclose(self.length, other.length, rtol=1e-12, atol=0.0)
            and np.isclose(self.start, other.start, rtol=0.0, atol=1e-12 * self.length)
        )

    # -------------------------
    # Evaluation
    # -------------------------

    def __call__(self, s: ArrayLike, nu: int = 0) -> np.ndarray:
        if nu > self.depth:
            self._exhausted(nu)
        s = np.asarray(s, dtype=float)
        if not self.periodic:
            return self._spline(s, nu)
        wrapped = self.start + np.mod(s - self.start, self.length)
        out = self._spline(wrapped, nu)
        if nu == 0:
            out = out + self._trend(s)
        elif nu == 1:
            out = out + self._jump / self.length
        return out

    def derivative(self, nu: int = 1) -> "ScalarField":
        if nu == 0:
            return self
        return self.with_values(self(self.grid, nu), depth=max(self.depth - nu, 0))

    def with_values(self, values: ArrayLike, depth: Optional[int] = None, jump: Union[float, np.ndarray] = 0.0) -> "ScalarField":
        return ScalarField(
            values=values,
            length=self.length,
            periodic=self.periodic,
            start=self.start,
            jump=jump,
            degree=self.degree,
            depth=self.depth if depth is None else depth,
            strict=self.strict,
        )

    def resample(self, size: int) -> "ScalarField":
        grid = uniform_grid(self.length, size, self.periodic, self.start)
        return ScalarField(
            values=self(grid),
            length=self.length,
            periodic=self.periodic,
            start=self.start,
            jump=self.jump,
            degree=self.degree,
            depth=self.depth,
            strict=self.strict,
        )

    def integral(self) -> Union[float, np.ndarray]:
        total = self._spline.integrate(self.start, self.start + self.length)
        if self.periodic:
            total = total + self._jump * self.length / 2.0
        return total

    def cumulative(self) -> np.ndarray:
        """Integral from `start` up to every grid point."""
        anti = self._spline.antiderivative()
        x = self.grid
        out = anti(x) - anti(self.start)
        if self.periodic:
            offset = (x - self.start) ** 2 / (2.0 * self.length)
            out = out + np.multiply.outer(offset, self._jump)
        return out

    def sup_distance(self, other: "ScalarField") -> float:
        return float(np.max(np.abs(self(self.grid) - other(self.grid))))

    # -------------------------
    # Helpers
    # -------------------------

    @property
    def _jump(self) -> np.ndarray:
        """Winding per period, broadcast to the trailing shape of the samples."""
        return np.broadcast_to(np.asarray(self.jump, dtype=float), self.values.shape[1:])

    def _trend(self, s: np.ndarray) -> np.ndarray:
        frac = (np.asarray(s, dtype=float) - self.start) / self.length
        return np.multiply.outer(frac, self._jump)

    def _exhausted(self, nu: int) -> None:
        message = f"derivative order {nu} requested beyond trusted depth {self.depth}"
        if self.strict:
            raise DepthExhausted(message)
        logger.warning("%s; differentiating the refitted interpolant", message)

    @cached_property
    def _spline(self) -> BSpline:
        x = self.grid
        if not self.periodic:
            return make_interp_spline(x, self.values, k=self.degree)
        residual = self.values - self._trend(x)
        x_ext = np.append(x, self.start + self.length)
        y_ext = np.concatenate([residual, residual[:1]], axis=0)
        return make_interp_spline(x_ext, y_ext, k=self.degree, bc_type="periodic")


def check_same_grid(*fields: ScalarField) -> None:
    first = fields[0]
    for other in fields[1:]:
        if not first.same_grid(other):
            raise ValueError(
                f"Fields live on different grids: {first.size} samples over {first.length:.6g} "
                f"vs {other.size} samples over {other.length:.6g}."
            )


# -----------------------------
# Parametric input curves
# -----------------------------

@dataclass(frozen=True)
class ParametricCurve:
    """
    A regular curve t -> r(t) on [t_start, t_end].

    `jet(t)` returns the first three parametric derivatives; without it the
    derivatives come from a dense quintic spline of `func`. `breaks` are
    parameters where the parametrization (not the curve) is only piecewise
    smooth, e.g. the joints of symmetry-completed arcs.
    """

    func: Callable[[np.ndarray], np.ndarray]
    t_start: float
    t_end: float
    closed: bool = True
    jet: Optional[Callable[[np.ndarray], Jet]] = None
    breaks: Tuple[float, ...] = ()

    @classmethod
    def from_samples(
        cls,
        points: ArrayLike,
        closed: bool = True,
        t: Optional[ArrayLike] = None,
        period: Optional[float] = None,
        degree: int = DEFAULT_SETTINGS.spline_degree,
    ) -> "ParametricCurve":
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] not in (2, 3):
            raise ValueError("Curve samples must have shape (m, 2) or (m, 3).")
        t = np.arange(points.shape[0], dtype=float) if t is None else np.asarray(t, dtype=float)
        if np.any(np.diff(t) <= 0):
            raise ValueError("Curve parameter must be strictly increasing.")

        if closed:
            if period is None:
                period = t[-1] - t[0] + (t[-1] - t[-2])
            x = np.append(t, t[0] + period)
            y = np.concatenate([points, points[:1]], axis=0)
            spline = make_interp_spline(x, y, k=degree, bc_type="periodic")
            t0, t1 = float(t[0]), float(t[0] + period)

            def wrap(u):
                return t0 + np.mod(np.asarray(u, dtype=float) - t0, period)
        else:
            spline = make_interp_spline(t, points, k=degree)
            t0, t1 = float(t[0]), float(t[-1])

            def wrap(u):
                return np.asarray(u, dtype=float)

        return cls(
            func=lambda u: spline(wrap(u)),
            t_start=t0,
            t_end=t1,
            closed=closed,
            jet=lambda u: (spline(wrap(u), 1), spline(wrap(u), 2), spline(wrap(u), 3)),
        )

    def derivatives(self, t: np.ndarray) -> Jet:
        if self.jet is not None:
            return self.jet(t)
        spline = self._fallback_spline
        u = t
        if self.closed:
            u = self.t_start + np.mod(np.asarray(t, dtype=float) - self.t_start, self.t_end - self.t_start)
        return spline(u, 1), spline(u, 2), spline(u, 3)

    def speed(self, t: np.ndarray) -> np.ndarray:
        return _norm(self.derivatives(t)[0])

    @cached_property
    def _fallback_spline(self) -> BSpline:
        m = 16384
        if self.closed:
            t = uniform_grid(self.t_end - self.t_start, m, True, self.t_start)
            x = np.append(t, self.t_end)
            y = self.func(t)
            y = np.concatenate([y, y[:1]], axis=0)
            return make_interp_spline(x, y, k=5, bc_type="periodic")
        t = np.linspace(self.t_start, self.t_end, m)
        return make_interp_spline(t, self.func(t), k=5)


def _partial_lengths(speed: Callable[[np.ndarray], np.ndarray], a: np.ndarray, b: np.ndarray) -> np.ndarray:
    half = (b - a) / 2.0
    mid = (b + a) / 2.0
    nodes = mid[:, None] + half[:, None] * _GAUSS_NODES[None, :]
    values = speed(nodes.ravel()).reshape(nodes.shape)
    return (values * _GAUSS_WEIGHTS[None, :]).sum(axis=1) * half


# -----------------------------
# Arc-length curves
# -----------------------------

@dataclass(frozen=True, eq=False)
class _ArcLengthCurve:
    positions: np.ndarray
    length: float
    closed: bool = True
    jets: Optional[Jet] = None
    settings: Settings = DEFAULT_SETTINGS

    def __post_init__(self):
        object.__setattr__(self, "positions", np.asarray(self.positions, dtype=float))
        if self.jets is not None:
            object.__setattr__(self, "jets", tuple(np.asarray(j, dtype=float) for j in self.jets))

    @property
    def size(self) -> int:
        return int(self.positions.shape[0])

    @cached_property
    def grid(self) -> np.ndarray:
        return uniform_grid(self.length, self.size, self.closed)

    @property
    def spacing(self) -> float:
        return self.length / (self.size if self.closed else self.size - 1)

    @cached_property
    def position_field(self) -> ScalarField:
        return self.field(self.positions)

    def field(self, values: ArrayLike, depth: Optional[int] = None, jump: Union[float, np.ndarray] = 0.0) -> ScalarField:
        return ScalarField(
            values=values,
            length=self.length,
            periodic=self.closed,
            jump=jump,
            degree=self.settings.spline_degree,
            depth=self.settings.derivative_depth if depth is None else depth,
            strict=self.settings.strict_depth,
        )

    def point_at(self, s: ArrayLike) -> np.ndarray:
        return self.position_field(s)

    def tangent_at(self, s: ArrayLike) -> np.ndarray:
        return _unit(self.position_field(s, 1))

    @cached_property
    def parametric_derivatives(self) -> Jet:
        """First three derivatives at the grid in the curve's own parameter."""
        exact = self.jets or ()
        field = self.position_field
        return tuple(exact[i] if i < len(exact) else field(self.grid, i + 1) for i in range(3))

    @cached_property
    def tangents(self) -> np.ndarray:
        return _unit(self.parametric_derivatives[0])

    def unit_speed_error(self) -> float:
        return float(np.max(np.abs(_norm(self.position_field(self.grid, 1)) - 1.0)))

    @property
    def _fresh_depth(self) -> int:
        return self.settings.derivative_depth if self.jets is not None else max(self.settings.derivative_depth - 3, 0)


@dataclass(frozen=True)
class Circle:
    center: Tuple[float, float]
    radius: float
    phase: float = 0.0


@dataclass(frozen=True, eq=False)
class PlanarCurve(_ArcLengthCurve):
    """Foldline: an arc-length sampled planar curve, traversed counter-clockwise when closed."""

    circle: Optional[Circle] = None

    @classmethod
    def from_circle(
        cls,
        radius: float,
        size: int = DEFAULT_SETTINGS.resolution,
        center: Tuple[float, float] = (0.0, 0.0),
        phase: float = 0.0,
        settings: Settings = DEFAULT_SETTINGS,
    ) -> "PlanarCurve":
        if radius <= 0:
            raise ValueError("Circle radius must be positive.")
        length = _TWO_PI * radius
        theta = phase + uniform_grid(length, size) / radius
        c, s = np.cos(theta), np.sin(theta)
        positions = np.column_stack([center[0] + radius * c, center[1] + radius * s])
        d1 = np.column_stack([-s, c])
        d2 = np.column_stack([-c, -s]) / radius
        d3 = np.column_stack([s, -c]) / radius ** 2
        return cls(
            positions=positions,
            length=length,
            closed=True,
            jets=(d1, d2, d3),
            settings=settings,
            circle=Circle(center=(float(center[0]), float(center[1])), radius=float(radius), phase=float(phase)),
        )

    @cached_property
    def geodesic_curvature(self) -> ScalarField:
        d1, d2, _ = self.parametric_derivatives
        speed = _norm(d1)
        k_g = (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / speed ** 3
        return self.field(k_g, depth=self._fresh_depth)

    @cached_property
    def tangent_angle(self) -> ScalarField:
        t = self.tangents
        return ScalarField.angle(
            np.arctan2(t[:, 1], t[:, 0]),
            length=self.length,
            periodic=self.closed,
            degree=self.settings.spline_degree,
            depth=self._fresh_depth,
            strict=self.settings.strict_depth,
        )

    @cached_property
    def left_normals(self) -> np.ndarray:
        t = self.tangents
        return np.column_stack([-t[:, 1], t[:, 0]])

    def total_turning(self) -> float:
        return float(self.geodesic_curvature.integral())

    def scaled(self, factor: float) -> "PlanarCurve":
        circle = None
        if self.circle is not None:
            circle = Circle(
                center=(self.circle.center[0] * factor, self.circle.center[1] * factor),
                radius=self.circle.radius * factor,
                phase=self.circle.phase,
            )
        return PlanarCurve(
            positions=self.positions * factor,
            length=self.length * factor,
            closed=self.closed,
            jets=None if self.jets is None else tuple(j * factor for j in self.jets),
            settings=self.settings,
            circle=circle,
        )

    def concentric_with(self, other: "PlanarCurve") -> bool:
        if self.circle is None or other.circle is None:
            return False
        return bool(np.allclose(self.circle.center, other.circle.center, rtol=0.0, atol=1e-12))


@dataclass(frozen=True)
class FrenetFrame:
    T: np.ndarray
    N: np.ndarray
    B: np.ndarray
    k: np.ndarray
    tau: np.ndarray


@dataclass(frozen=True, eq=False)
class SpaceCurve(_ArcLengthCurve):
    """Ridge: an arc-length sampled curve in 3-space."""

    @cached_property
    def frenet_samples(self):
        d1, d2, d3 = self.parametric_derivatives
        cross = np.cross(d1, d2)
        cross_norm = _norm(cross)
        speed = _norm(d1)
        k = cross_norm / speed ** 3
        defined = k > self.settings.tolerances.k_min
        safe = np.where(defined, cross_norm, 1.0)
        tau = np.where(defined, np.einsum("ij,ij->i", cross, d3) / safe ** 2, 0.0)
        T = d1 / speed[:, None]
        B = cross / safe[:, None]
        N = np.cross(B, T)
        return T, N, B, k, tau, defined

    @cached_property
    def curvature(self) -> ScalarField:
        return self.field(self.frenet_samples[3], depth=self._fresh_depth)

    @cached_property
    def torsion(self) -> ScalarField:
        return self.field(self.frenet_samples[4], depth=self._fresh_depth)

    def frames(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        T, N, B, _, _, defined = self.frenet_samples
        if not np.all(defined):
            bad = int(np.argmin(defined))
            raise FrameUndefined("curvature below floor", where=float(self.grid[bad]))
        return T, N, B

    def scaled(self, factor: float) -> "SpaceCurve":
        return SpaceCurve(
            positions=self.positions * factor,
            length=self.length * factor,
            closed=self.closed,
            jets=None if self.jets is None else tuple(j * factor for j in self.jets),
            settings=self.settings,
        )

    def transformed(self, matrix: np.ndarray, shift: ArrayLike = (0.0, 0.0, 0.0)) -> "SpaceCurve":
        matrix = np.asarray(matrix, dtype=float)
        return SpaceCurve(
            positions=self.positions @ matrix.T + np.asarray(shift, dtype=float),
            length=self.length,
            closed=self.closed,
            jets=None if self.jets is None else tuple(j @ matrix.T for j in self.jets),
            settings=self.settings,
        )


Curve = Union[PlanarCurve, SpaceCurve]


def arclength_reparametrize(
    curve: Union[ParametricCurve, ArrayLike],
    closed: bool = True,
    size: Optional[int] = None,
    settings: Settings = DEFAULT_SETTINGS,
) -> Curve:
    """
    Resample a regular curve at uniform arc length.

    Lengths are accumulated with 8-point Gauss-Legendre quadrature per
    parameter interval and inverted with Newton steps; positions and
    derivative jets are then evaluated on the parametrization itself, so
    exact input curves stay exact.
    """
    if not isinstance(curve, ParametricCurve):
        curve = ParametricCurve.from_samples(curve, closed=closed, degree=settings.spline_degree)
    size = size or settings.resolution
    tol = settings.tolerances

    knots = np.linspace(curve.t_start, curve.t_end, size * settings.oversample + 1)
    if curve.breaks:
        inner = [b for b in curve.breaks if curve.t_start < b < curve.t_end]
        knots = np.union1d(knots, inner)

    checked = np.concatenate([knots, ((knots[:-1] + knots[1:]) / 2.0)])
    sampled_speed = curve.speed(checked)
    if np.min(sampled_speed) < tol.min_speed:
        where = float(checked[int(np.argmin(sampled_speed))])
        raise VanishingSpeed(f"vanishing speed at parameter t={where:.6g}")

    pieces = _partial_lengths(curve.speed, knots[:-1], knots[1:])
    cumulative = np.concatenate([[0.0], np.cumsum(pieces)])
    total = float(cumulative[-1])

    targets = uniform_grid(total, size, curve.closed)
    t = np.interp(targets, cumulative, knots)
    for _ in range(settings.newton_iterations):
        idx = np.clip(np.searchsorted(knots, t, side="right") - 1, 0, len(knots) - 2)
        arc = cumulative[idx] + _partial_lengths(curve.speed, knots[idx], t)
        step = (arc - targets) / curve.speed(t)
        t = np.clip(t - step, curve.t_start, curve.t_end)
        if np.max(np.abs(step)) < tol.newton:
            break

    positions = np.asarray(curve.func(t), dtype=float)
    jets = tuple(np.asarray(j, dtype=float) for j in curve.derivatives(t))
    logger.debug("reparametrized curve: %d samples, length %.12g", size, total)

    if positions.shape[1] == 2:
        return PlanarCurve(positions=positions, length=total, closed=curve.closed, jets=jets, settings=settings)
    return SpaceCurve(positions=positions, length=total, closed=curve.closed, jets=jets, settings=settings)


# -----------------------------
# Frames
# -----------------------------

def frenet(curve: SpaceCurve, s: ArrayLike, settings: Optional[Settings] = None) -> FrenetFrame:
    """Frenet frame, curvature and torsion at arc length(s) s."""
    settings = settings or curve.settings
    s = np.asarray(s, dtype=float)
    k = np.asarray(curve.curvature(s))
    low = np.atleast_1d(k) <= settings.tolerances.k_min
    if np.any(low):
        where = float(np.atleast_1d(s)[int(np.argmax(low))])
        raise FrameUndefined("curvature below floor", where=where)
    d1 = curve.position_field(s, 1)
    d2 = curve.position_field(s, 2)
    T = _unit(d1)
    B = _unit(np.cross(d1, d2))
    N = np.cross(B, T)
    return FrenetFrame(T=T, N=N, B=B, k=k, tau=np.asarray(curve.torsion(s)))


@dataclass(frozen=True)
class DarbouxData:
    k_g: ScalarField
    k_n: ScalarField
    tau_r: ScalarField
    alpha: ScalarField
    u: Optional[np.ndarray] = None
    n: Optional[np.ndarray] = None


def darboux_from_alpha(
    k: ScalarField,
    alpha: ScalarField,
    tau: ScalarField,
    frames: Optional[Tuple[np.ndarray, np.ndarray, np.ndarray]] = None,
) -> DarbouxData:
    """
    Darboux coefficients of a curve whose tangent plane makes angle alpha with
    its osculating plane (alpha measured anticlockwise from B to n, seen from
    the tip of T).
    """
    check_same_grid(k, alpha, tau)
    s = k.grid
    a = alpha(s)
    kk = k(s)
    base_depth = min(k.depth, alpha.depth)

    k_g = k.with_values(np.cos(a) * kk, depth=base_depth)
    k_n = k.with_values(-np.sin(a) * kk, depth=base_depth)
    tau_r = tau.with_values(tau(s) + alpha(s, 1), depth=min(tau.depth, alpha.depth - 1, base_depth))

    u = n = None
    if frames is not None:
        _, N, B = frames
        u = np.cos(a)[:, None] * N + np.sin(a)[:, None] * B
        n = np.cos(a)[:, None] * B - np.sin(a)[:, None] * N
    return DarbouxData(k_g=k_g, k_n=k_n, tau_r=tau_r, alpha=alpha, u=u, n=n)


def alpha_from_descriptor(k_g: ScalarField, k_n: ScalarField) -> ScalarField:
    check_same_grid(k_g, k_n)
    s = k_g.grid
    g, n = k_g(s), k_n(s)
    radius = np.hypot(g, n)
    if np.any(radius <= np.finfo(float).tiny):
        raise Degenerate("k_g and k_n vanish simultaneously", where=float(s[int(np.argmin(radius))]))
    return ScalarField.angle(
        np.arctan2(-n, g),
        length=k_g.length,
        periodic=k_g.periodic,
        start=k_g.start,
        degree=k_g.degree,
        depth=min(k_g.depth, k_n.depth),
        strict=k_g.strict,
    )
