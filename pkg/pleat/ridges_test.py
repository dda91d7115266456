# pleat/ridges_test.py

import unittest

import numpy as np

from pleat.errors import TooShort
from pleat.geometry.curvekit import ParametricCurve, arclength_reparametrize
from pleat.geometry.ridges import (
    fenchel_gate,
    sphere_paraboloid_curve,
    sphere_paraboloid_seam,
    sphere_ridge,
    torus_curve,
    total_curvature,
)


def great_circle(size=256):
    def func(t):
        t = np.asarray(t, dtype=float)
        return np.stack([np.cos(t), np.sin(t), np.zeros_like(t)], axis=-1)

    return arclength_reparametrize(ParametricCurve(func=func, t_start=0.0, t_end=2.0 * np.pi), size=size)


class TestTorus(unittest.TestCase):
    def test_lies_on_torus(self):
        a = 3.0
        curve = torus_curve(a, 9, 2, size=1024)
        self.assertTrue(curve.closed)
        x, y, z = curve.positions.T
        np.testing.assert_allclose((np.hypot(x, y) - a) ** 2 + z ** 2, 1.0, atol=1e-10)
        self.assertLess(curve.unit_speed_error(), 1e-6)

    def test_passes_fenchel_gate(self):
        curve = torus_curve(3.0, 9, 2, size=1024)
        self.assertGreater(fenchel_gate(curve), 2.0 * np.pi)

    def test_length_grows_with_radius(self):
        lengths = [torus_curve(a, 9, 2, size=512).length for a in (2.0, 3.0, 4.0)]
        self.assertTrue(all(b > a for a, b in zip(lengths, lengths[1:])))

    def test_tight_winding_bends_like_the_tube(self):
        tight = torus_curve(3.0, 9, 200, size=4096)
        loose = torus_curve(3.0, 9, 2, size=1024)
        tight_min = float(np.min(tight.curvature.values))
        self.assertGreater(tight_min, 0.8)
        self.assertGreater(tight_min, float(np.min(loose.curvature.values)))

    def test_rejects_bad_parameters(self):
        with self.assertRaises(ValueError):
            torus_curve(3.0, 4, 2)
        with self.assertRaises(ValueError):
            torus_curve(0.5, 3, 2)
        with self.assertRaises(ValueError):
            torus_curve(3.0, 0, 1)


class TestSphereParaboloid(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.curve = sphere_paraboloid_curve(size=512)

    def test_lies_on_both_surfaces(self):
        x, y, z = self.curve.positions.T
        np.testing.assert_allclose(x * x + y * y + z * z, 1.0, atol=1e-10)
        np.testing.assert_allclose(z, 3.0 * x * y, atol=1e-10)

    def test_quarter_shift_symmetry(self):
        p = self.curve.positions
        mapped = p @ np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, -1.0]]).T
        np.testing.assert_allclose(np.roll(p, -128, axis=0), mapped, atol=1e-8)

    def test_arcs_join_smoothly(self):
        self.assertLess(sphere_paraboloid_seam(), 1e-12)
        with self.assertLogs("pleat.geometry.ridges", level="DEBUG") as logs:
            sphere_paraboloid_curve(size=64)
        self.assertFalse([r for r in logs.records if r.levelname == "WARNING"])
        self.assertIn("arc seam", logs.output[0])

    def test_sphere_ridge_length_and_curvature(self):
        ridge = sphere_ridge(self.curve)
        self.assertAlmostEqual(ridge.length, 2.0 * np.pi, places=9)
        self.assertTrue(np.all(ridge.curvature.values > 1.0))
        self.assertGreater(total_curvature(ridge), 2.0 * np.pi)

    def test_great_circle_is_too_short(self):
        with self.assertRaises(TooShort):
            sphere_ridge(great_circle())

    def test_off_sphere_rejected(self):
        with self.assertRaises(ValueError):
            sphere_ridge(self.curve.scaled(1.5))


if __name__ == "__main__":
    unittest.main()
