# pleat/curvekit_test.py

import unittest

import numpy as np
from scipy.special import ellipe

from pleat.errors import Degenerate, DepthExhausted, FrameUndefined, VanishingSpeed
from pleat.geometry.curvekit import (
    ParametricCurve,
    PlanarCurve,
    ScalarField,
    SpaceCurve,
    alpha_from_descriptor,
    arclength_reparametrize,
    check_same_grid,
    darboux_from_alpha,
    frenet,
)


def ellipse(a=2.0, b=1.0):
    def func(t):
        t = np.asarray(t, dtype=float)
        return np.stack([a * np.cos(t), b * np.sin(t)], axis=-1)

    def jet(t):
        t = np.asarray(t, dtype=float)
        c, s = np.cos(t), np.sin(t)
        return (
            np.stack([-a * s, b * c], axis=-1),
            np.stack([-a * c, -b * s], axis=-1),
            np.stack([a * s, -b * c], axis=-1),
        )

    return ParametricCurve(func=func, t_start=0.0, t_end=2.0 * np.pi, closed=True, jet=jet)


def helix(a=1.0, b=0.5, turns=2.0):
    def func(t):
        t = np.asarray(t, dtype=float)
        return np.stack([a * np.cos(t), a * np.sin(t), b * t], axis=-1)

    def jet(t):
        t = np.asarray(t, dtype=float)
        c, s, z = np.cos(t), np.sin(t), np.zeros_like(t)
        return (
            np.stack([-a * s, a * c, b + z], axis=-1),
            np.stack([-a * c, -a * s, z], axis=-1),
            np.stack([a * s, -a * c, z], axis=-1),
        )

    return ParametricCurve(func=func, t_start=0.0, t_end=2.0 * np.pi * turns, closed=False, jet=jet)


class TestScalarField(unittest.TestCase):
    def test_periodic_values_and_derivatives(self):
        f = ScalarField.from_function(np.sin, length=2.0 * np.pi, size=256)
        s = np.linspace(0.1, 6.0, 37)
        np.testing.assert_allclose(f(s), np.sin(s), atol=1e-9)
        np.testing.assert_allclose(f(s, 1), np.cos(s), atol=1e-7)
        np.testing.assert_allclose(f(s + 2.0 * np.pi), np.sin(s), atol=1e-9)

    def test_angle_records_winding(self):
        length = 2.0 * np.pi
        grid = length * np.arange(128) / 128
        wrapped = np.angle(np.exp(1j * (grid + np.pi / 2.0)))
        theta = ScalarField.angle(wrapped, length=length)
        self.assertAlmostEqual(theta.jump, 2.0 * np.pi)
        self.assertAlmostEqual(float(theta(1.0 + length) - theta(1.0)), 2.0 * np.pi, places=10)
        self.assertAlmostEqual(float(theta(0.7, 1)), 1.0, places=8)

    def test_integral_and_cumulative(self):
        f = ScalarField.from_function(lambda s: np.cos(s) ** 2, length=2.0 * np.pi, size=128)
        self.assertAlmostEqual(float(f.integral()), np.pi, places=9)
        g = ScalarField.from_function(lambda s: np.cos(s), length=2.0 * np.pi, size=128)
        np.testing.assert_allclose(g.cumulative(), np.sin(g.grid), atol=1e-9)

    def test_vector_samples(self):
        def circle(s):
            return np.column_stack([np.cos(s), np.sin(s), 0.5 * np.cos(2 * s)])

        f = ScalarField.from_function(circle, length=2.0 * np.pi, size=256)
        s = np.linspace(0.2, 9.0, 23)
        self.assertEqual(f(s).shape, (23, 3))
        np.testing.assert_allclose(f(s), circle(s), atol=1e-9)
        np.testing.assert_allclose(f(s, 1)[:, 0], -np.sin(s), atol=1e-7)
        self.assertEqual(f(1.0).shape, (3,))
        self.assertEqual(f.cumulative().shape, (256, 3))
        np.testing.assert_allclose(f.integral(), [0.0, 0.0, 0.0], atol=1e-9)

    def test_vector_samples_with_winding(self):
        length = 2.0 * np.pi
        f = ScalarField.from_function(
            lambda s: np.column_stack([s + np.sin(s), np.cos(s)]), length=length, size=128, jump=np.array([length, 0.0])
        )
        s = np.array([0.4, 3.0])
        np.testing.assert_allclose(f(s + length) - f(s), [[length, 0.0]] * 2, atol=1e-9)
        np.testing.assert_allclose(f(s, 1)[:, 0], 1.0 + np.cos(s), atol=1e-7)

    def test_open_field(self):
        f = ScalarField.from_function(lambda s: s ** 3, length=2.0, size=41, periodic=False)
        self.assertEqual(f.grid[-1], 2.0)
        self.assertAlmostEqual(float(f(1.3, 1)), 3.0 * 1.3 ** 2, places=9)

    def test_strict_depth(self):
        f = ScalarField.from_function(np.sin, length=2.0 * np.pi, size=64, depth=1, strict=True)
        f(0.3, 1)
        with self.assertRaises(DepthExhausted):
            f(0.3, 2)

    def test_lenient_depth_warns(self):
        f = ScalarField.from_function(np.sin, length=2.0 * np.pi, size=64, depth=0)
        with self.assertLogs("pleat.geometry.curvekit", level="WARNING"):
            f(0.3, 1)

    def test_rejects_non_finite(self):
        values = np.ones(32)
        values[5] = np.nan
        with self.assertRaises(ValueError):
            ScalarField(values=values, length=1.0)

    def test_grid_mismatch(self):
        a = ScalarField.from_function(np.sin, length=2.0 * np.pi, size=64)
        b = ScalarField.from_function(np.sin, length=2.0 * np.pi, size=65)
        with self.assertRaises(ValueError):
            check_same_grid(a, b)


class TestCurves(unittest.TestCase):
    def test_circle_geodesic_curvature(self):
        circle = PlanarCurve.from_circle(2.0, size=256)
        self.assertAlmostEqual(circle.length, 4.0 * np.pi)
        np.testing.assert_allclose(circle.geodesic_curvature.values, 0.5, atol=1e-12)
        self.assertAlmostEqual(circle.total_turning(), 2.0 * np.pi, places=9)

    def test_ellipse_length(self):
        curve = arclength_reparametrize(ellipse(), size=512)
        self.assertIsInstance(curve, PlanarCurve)
        self.assertAlmostEqual(curve.length, 8.0 * ellipe(0.75), places=10)
        self.assertLess(curve.unit_speed_error(), 1e-6)
        self.assertAlmostEqual(curve.total_turning(), 2.0 * np.pi, places=6)
        s = curve.grid
        np.testing.assert_allclose(curve.tangent_angle(s, 1), curve.geodesic_curvature(s), atol=1e-5)

    def test_reparametrize_samples(self):
        t = 2.0 * np.pi * np.arange(400) / 400
        points = np.column_stack([np.cos(t), np.sin(t)])
        curve = arclength_reparametrize(points, closed=True, size=256)
        self.assertAlmostEqual(curve.length, 2.0 * np.pi, places=8)
        np.testing.assert_allclose(np.linalg.norm(curve.positions, axis=1), 1.0, atol=1e-9)

    def test_reparametrize_is_idempotent(self):
        first = arclength_reparametrize(ellipse(), size=1024)
        again = ParametricCurve.from_samples(first.positions, closed=True, t=first.grid, period=first.length)
        second = arclength_reparametrize(again, size=1024)
        self.assertAlmostEqual(second.length, first.length, places=10)
        np.testing.assert_allclose(second.positions, first.positions, atol=1e-10)

    def test_vanishing_speed(self):
        cusp = ParametricCurve(
            func=lambda t: np.stack([np.asarray(t) ** 3, np.asarray(t) ** 2], axis=-1),
            t_start=-1.0,
            t_end=1.0,
            closed=False,
            jet=lambda t: (
                np.stack([3 * np.asarray(t) ** 2, 2 * np.asarray(t)], axis=-1),
                np.stack([6 * np.asarray(t), 2 + 0 * np.asarray(t)], axis=-1),
                np.stack([6 + 0 * np.asarray(t), 0 * np.asarray(t)], axis=-1),
            ),
        )
        with self.assertRaises(VanishingSpeed):
            arclength_reparametrize(cusp, size=64)

    def test_helix_frenet(self):
        a, b = 1.0, 0.5
        curve = arclength_reparametrize(helix(a, b), size=512)
        self.assertIsInstance(curve, SpaceCurve)
        _, _, _, k, tau, defined = curve.frenet_samples
        self.assertTrue(np.all(defined))
        np.testing.assert_allclose(k, a / (a * a + b * b), atol=1e-12)
        np.testing.assert_allclose(tau, b / (a * a + b * b), atol=1e-12)

        s = curve.grid[100:400:50]
        frame = frenet(curve, s)
        np.testing.assert_allclose(frame.k, a / (a * a + b * b), atol=1e-8)
        np.testing.assert_allclose(np.einsum("ij,ij->i", frame.T, frame.N), 0.0, atol=1e-12)

    def test_straight_segment_has_no_frame(self):
        line = ParametricCurve(
            func=lambda t: np.stack([np.asarray(t), 2.0 * np.asarray(t), np.zeros_like(np.asarray(t))], axis=-1),
            t_start=0.0,
            t_end=1.0,
            closed=False,
        )
        curve = arclength_reparametrize(line, size=64)
        self.assertAlmostEqual(curve.length, np.sqrt(5.0), places=10)
        with self.assertRaises(FrameUndefined):
            frenet(curve, [0.5])

    def test_transformed_keeps_invariants(self):
        curve = arclength_reparametrize(helix(), size=256)
        c, s = np.cos(0.4), np.sin(0.4)
        rotation = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        moved = curve.transformed(rotation, shift=(1.0, 2.0, 3.0))
        np.testing.assert_allclose(moved.curvature.values, curve.curvature.values, atol=1e-12)
        np.testing.assert_allclose(moved.torsion.values, curve.torsion.values, atol=1e-12)


class TestDarboux(unittest.TestCase):
    def test_alpha_decomposition(self):
        L = 2.0 * np.pi
        k = ScalarField.from_function(lambda s: 2.0 + 0.3 * np.cos(s), length=L, size=256)
        alpha = ScalarField.from_function(lambda s: 0.5 + 0.2 * np.sin(2 * s), length=L, size=256)
        tau = ScalarField.from_function(lambda s: 0.1 * np.sin(s), length=L, size=256)
        data = darboux_from_alpha(k, alpha, tau)
        s = k.grid
        np.testing.assert_allclose(data.k_g(s) ** 2 + data.k_n(s) ** 2, k(s) ** 2, rtol=1e-12)
        np.testing.assert_allclose(data.tau_r(s), tau(s) + 0.4 * np.cos(2 * s), atol=1e-6)
        np.testing.assert_allclose(alpha_from_descriptor(data.k_g, data.k_n)(s), alpha(s), atol=1e-12)

    def test_constant_alpha(self):
        L = 2.0 * np.pi
        k = ScalarField.from_function(lambda s: 2.0 + 0.0 * s, length=L, size=64)
        tau = ScalarField.from_function(lambda s: 0.5 + 0.0 * s, length=L, size=64)
        flat = darboux_from_alpha(k, k.with_values(np.zeros(64)), tau)
        np.testing.assert_allclose(flat.k_g.values, 2.0)
        np.testing.assert_allclose(flat.k_n.values, 0.0, atol=1e-15)
        np.testing.assert_allclose(flat.tau_r.values, 0.5, atol=1e-12)
        upright = darboux_from_alpha(k, k.with_values(np.full(64, np.pi / 2)), tau)
        np.testing.assert_allclose(upright.k_n.values, -2.0)

    def test_degenerate_descriptor(self):
        zero = ScalarField(values=np.zeros(32), length=1.0)
        with self.assertRaises(Degenerate):
            alpha_from_descriptor(zero, zero)


if __name__ == "__main__":
    unittest.main()
