# pleat/propagate_test.py

import unittest

import numpy as np

from pleat.errors import NoIntersection
from pleat.geometry.curvekit import PlanarCurve, ScalarField
from pleat.geometry.localfold import FoldDescriptor, flip_side
from pleat.geometry.propagate import (
    Verdict,
    bump,
    bump_scale,
    circle_step,
    next_side_descriptor,
    next_side_descriptor_compact,
    perturb_torsion_bump,
    propagate_chain,
    propagate_direction,
    propagate_step,
    regularity_check,
    ruling_intersect_general,
    step_velocity,
    transport_descriptor,
    transport_via_regression,
)

SIZE = 512


def circle_descriptor(k_n, tau_r, radius=1.0, side=1, size=SIZE):
    """Intrinsic descriptor on a circle, from callables of arc length."""
    foldline = PlanarCurve.from_circle(radius, size=size)
    k_g = foldline.geodesic_curvature
    L = foldline.length
    return FoldDescriptor(
        side=side,
        k_n=ScalarField.from_function(k_n, length=L, size=size),
        tau_r=ScalarField.from_function(tau_r, length=L, size=size),
        k_g=k_g,
        foldline=foldline,
    )


def cone_descriptor(radius=1.0, side=1):
    return circle_descriptor(
        lambda s: np.full_like(s, -0.75 * side / radius),
        lambda s: np.zeros_like(s),
        radius=radius,
        side=side,
    )


def wavy_descriptor():
    return circle_descriptor(lambda s: -(0.8 + 0.1 * np.sin(s)), lambda s: 0.1 * np.cos(2.0 * s))


class TestCircleStep(unittest.TestCase):
    def test_same_circle(self):
        beta = np.linspace(0.2, 2.9, 11)
        v_bar, sin_d, cos_d = circle_step(1.0, 0.0, beta)
        np.testing.assert_allclose(v_bar, 0.0, atol=1e-15)
        np.testing.assert_allclose(sin_d, 0.0, atol=1e-15)
        np.testing.assert_allclose(cos_d, 1.0)

    def test_perpendicular_rulings(self):
        v_bar, sin_d, cos_d = circle_step(2.0, 0.25, np.pi / 2)
        self.assertAlmostEqual(float(v_bar), -0.5)
        self.assertAlmostEqual(float(sin_d), 0.0)
        self.assertAlmostEqual(float(cos_d), 1.0)

    def test_against_direct_construction(self):
        rng = np.random.default_rng(7)
        n = 10_000
        radius = rng.uniform(0.5, 3.0, n)
        c = rng.uniform(-0.3, 0.8, n)
        beta = rng.uniform(0.05, np.pi - 0.05, n) * rng.choice([-1.0, 1.0], n)
        keep = np.sin(beta) ** 2 + c * c + 2.0 * c >= 0.0
        radius, c, beta = radius[keep], c[keep], beta[keep]

        v_bar, sin_d, cos_d = circle_step(1.0, c, beta)
        v_bar = v_bar * radius
        np.testing.assert_allclose(sin_d ** 2 + cos_d ** 2, 1.0, atol=1e-12)

        # start at (R, 0) with tangent (0, 1); the left normal points at the centre
        hit = np.column_stack([radius - v_bar * np.sin(beta), v_bar * np.cos(beta)])
        np.testing.assert_allclose(np.linalg.norm(hit, axis=1), radius * (1.0 + c), rtol=1e-10)
        np.testing.assert_allclose(np.arctan2(sin_d, cos_d), np.arctan2(hit[:, 1], hit[:, 0]), atol=1e-10)

    def test_missed_circle(self):
        with self.assertRaises(NoIntersection):
            circle_step(1.0, -0.5, 0.3)

    def test_rejects_bad_radius(self):
        with self.assertRaises(ValueError):
            circle_step(0.0, 0.1, 1.0)
        with self.assertRaises(ValueError):
            circle_step(1.0, -1.5, 1.0)
        with self.assertRaises(ValueError):
            circle_step(1.0, np.array([0.1, -1.5]), np.array([1.0, 1.0]))
        with self.assertRaises(ValueError):
            circle_step(np.array([1.0, -2.0]), 0.1, 1.0)


class TestTransport(unittest.TestCase):
    def test_two_routes_agree(self):
        rng = np.random.default_rng(11)
        n = 1000
        k1n = -rng.uniform(0.2, 3.0, n)
        beta1 = rng.uniform(0.3, np.pi - 0.3, n)
        tau1r = -k1n / np.tan(beta1)
        beta1_prime = rng.uniform(-1.0, 1.0, n)
        k1g = rng.uniform(-1.0, 1.0, n)
        v_bar = rng.uniform(-0.1, 0.1, n)
        delta = rng.uniform(-0.1, 0.1, n)
        beta2 = beta1 - delta

        velocity = step_velocity(beta1, beta2, beta1_prime, k1g, v_bar)
        self.assertTrue(np.all(velocity > 0.0))
        direct = transport_descriptor(k1n, tau1r, delta, velocity)
        via = transport_via_regression(k1n, beta1, beta1_prime, k1g, beta2, v_bar)
        np.testing.assert_allclose(direct[0], via[0], rtol=1e-10)
        np.testing.assert_allclose(direct[1], via[1], rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(
            direct[0] ** 2 + direct[1] ** 2, (k1n ** 2 + tau1r ** 2) / velocity ** 2, rtol=1e-12
        )

    def test_velocity_matches_tangent_rotation(self):
        rng = np.random.default_rng(5)
        n = 2000
        radius = rng.uniform(0.5, 3.0, n)
        c = rng.uniform(-0.2, 0.3, n)
        beta1 = rng.uniform(0.4, np.pi - 0.4, n)
        beta1_prime = rng.uniform(-0.5, 0.5, n)
        keep = np.sin(beta1) ** 2 + c * c + 2.0 * c > 0.05
        radius, c, beta1, beta1_prime = radius[keep], c[keep], beta1[keep], beta1_prime[keep]
        self.assertGreater(radius.size, 1000)

        def rotation(beta):
            _, sin_d, cos_d = circle_step(radius, c, beta)
            return np.arctan2(sin_d, cos_d)

        h = 1e-5
        delta = rotation(beta1)
        delta_prime = beta1_prime * (rotation(beta1 + h) - rotation(beta1 - h)) / (2.0 * h)
        v_bar = circle_step(radius, c, beta1)[0]
        k1g, k2g = 1.0 / radius, 1.0 / (radius * (1.0 + c))
        velocity = step_velocity(beta1, beta1 - delta, beta1_prime, k1g, v_bar)
        np.testing.assert_allclose(velocity, (delta_prime + k1g) / k2g, rtol=1e-8)

    def test_rejects_backward_velocity(self):
        with self.assertRaises(ValueError):
            transport_descriptor([-1.0], [0.0], [0.0], [0.0])

    def test_compact_form_matches(self):
        rng = np.random.default_rng(3)
        n = 500
        K = -rng.uniform(0.2, 2.0, n)
        T = rng.uniform(-1.0, 1.0, n)
        g1 = rng.uniform(0.5, 1.5, n)
        g1p = rng.uniform(-0.5, 0.5, n)
        G = np.full(n, 0.8)
        delta = rng.uniform(-0.2, 0.2, n)
        delta_prime = rng.uniform(-0.2, 0.2, n)
        delta_second = rng.uniform(-0.5, 0.5, n)
        k1n_prime = rng.uniform(-1.0, 1.0, n)
        tau1r_prime = rng.uniform(-1.0, 1.0, n)

        # a constant k2g keeps the s1 derivative of k2g(s2(s1)) at zero
        velocity = (delta_prime + g1) / G
        acceleration = (delta_second + g1p) / G
        beta1 = np.full(n, 1.2)
        full = next_side_descriptor(
            K, T, velocity, acceleration, g1, G, np.zeros(n), beta1, beta1 - delta, k1n_prime, tau1r_prime
        )
        compact = next_side_descriptor_compact(
            K, T, g1, g1p, G, delta, delta_prime, delta_second, k1n_prime, tau1r_prime
        )
        np.testing.assert_allclose(full[0], compact[0])
        np.testing.assert_allclose(full[1], compact[1], rtol=1e-10, atol=1e-12)


class TestRegularityCheck(unittest.TestCase):
    def test_verdicts(self):
        self.assertEqual(regularity_check([-0.1, -0.1], [1.0, np.inf]).verdict, Verdict.REGULAR)
        self.assertEqual(regularity_check([-0.1], [-0.5]).verdict, Verdict.REGULAR)
        self.assertEqual(regularity_check([-0.1], [-0.05]).verdict, Verdict.CROSSES_REGRESSION)
        self.assertEqual(regularity_check([-0.1], [-0.1]).verdict, Verdict.CROSSES_REGRESSION)
        self.assertEqual(regularity_check([np.nan, -0.1], [1.0, 1.0]).verdict, Verdict.NO_INTERSECTION)
        report = regularity_check([-0.1, -0.1], [1.0, 1.0], tangent=np.array([False, True]))
        self.assertEqual(report.verdict, Verdict.TANGENT_HIT)

    def test_margin_and_worst_sample(self):
        report = regularity_check([-0.1, -0.2, 0.1], [-0.5, -0.25, -1.0], s=[0.0, 1.0, 2.0])
        self.assertTrue(report.regular)
        self.assertEqual(report.worst_index, 1)
        self.assertAlmostEqual(report.margin, 0.05)
        self.assertEqual(list(report.to_frame().columns)[:3], ["s", "v_bar", "d"])


class TestIntersection(unittest.TestCase):
    def test_general_matches_circle_path(self):
        inner = PlanarCurve.from_circle(1.0, size=1024)
        outer = PlanarCurve.from_circle(1.1, size=1024)
        beta = np.pi / 2 + 0.2 * np.sin(inner.grid)
        hit = ruling_intersect_general(inner, beta, outer)
        v_bar, sin_d, cos_d = circle_step(1.0, 0.1, beta)
        np.testing.assert_allclose(hit.v_bar, v_bar, atol=1e-10)
        np.testing.assert_allclose(hit.delta, np.arctan2(sin_d, cos_d), atol=1e-10)
        self.assertFalse(np.any(hit.tangent))
        self.assertTrue(np.all(np.diff(hit.s2) > 0.0))

    def test_same_foldline(self):
        circle = PlanarCurve.from_circle(1.0, size=128)
        hit = ruling_intersect_general(circle, np.full(128, 1.0), circle)
        np.testing.assert_allclose(hit.v_bar, 0.0, atol=1e-10)
        np.testing.assert_allclose(hit.s2, circle.grid, atol=1e-9)


class TestPropagateStep(unittest.TestCase):
    def test_cone(self):
        step = propagate_step(cone_descriptor(), PlanarCurve.from_circle(1.1, size=SIZE))
        self.assertEqual(step.report.verdict, Verdict.REGULAR)
        corr = step.correspondence
        np.testing.assert_allclose(corr.v_bar.values, -0.1, atol=1e-12)
        np.testing.assert_allclose(corr.velocity.values, 1.1, atol=1e-12)
        np.testing.assert_allclose(corr.s2.values, 1.1 * step.descriptor.grid, atol=1e-12)
        np.testing.assert_allclose(step.carried.k_n.values, -0.75 / 1.1, atol=1e-10)
        np.testing.assert_allclose(step.carried.tau_r.values, 0.0, atol=1e-10)
        self.assertEqual(step.next_descriptor.side, -1)
        np.testing.assert_allclose(step.next_descriptor.k_n.values, 0.75 / 1.1, atol=1e-10)
        np.testing.assert_allclose(step.next_descriptor.tau_r.values, 0.0, atol=1e-8)
        self.assertIsNone(step.strip)

    def test_boundary_step_stops(self):
        step = propagate_step(cone_descriptor(), PlanarCurve.from_circle(1.1, size=SIZE), boundary=True)
        self.assertTrue(step.report.regular)
        self.assertIsNotNone(step.correspondence)
        self.assertIsNone(step.next_descriptor)

    def test_next_side_matches_flip(self):
        rng = np.random.default_rng(17)
        checked = 0
        for _ in range(4):
            a = rng.uniform(-0.1, 0.1, 4)
            desc = circle_descriptor(
                lambda s: -(0.8 + a[0] * np.sin(s) + a[1] * np.cos(s)),
                lambda s: a[2] * np.cos(2.0 * s) + a[3] * np.sin(s),
            )
            step = propagate_step(desc, PlanarCurve.from_circle(1.0 + rng.uniform(0.05, 0.15), size=SIZE))
            self.assertTrue(step.report.regular)
            flipped = flip_side(step.carried)
            scale = max(1.0, float(np.max(np.abs(step.next_descriptor.tau_r.values))))
            self.assertLess(flipped.k_n.sup_distance(step.next_descriptor.k_n), 1e-12)
            self.assertLess(flipped.tau_r.sup_distance(step.next_descriptor.tau_r) / scale, 1e-7)
            checked += desc.grid.size
        self.assertGreaterEqual(checked, 1000)

    def test_next_side_forms_agree(self):
        fine = circle_descriptor(lambda s: -(0.8 + 0.1 * np.sin(s)), lambda s: 0.1 * np.cos(2.0 * s), size=2048)
        step = propagate_step(fine, PlanarCurve.from_circle(1.1, size=2048))
        self.assertLess(step.next_side_gap, 1e-8)
        cone = propagate_step(cone_descriptor(), PlanarCurve.from_circle(1.1, size=SIZE))
        self.assertLess(cone.next_side_gap, 1e-10)

    def test_carried_torsion_converges(self):
        desc = wavy_descriptor()
        s = desc.grid
        errors = []
        for c in (1e-2, 1e-3, 1e-4):
            step = propagate_step(desc, PlanarCurve.from_circle(1.0 + c, size=SIZE))
            s2 = step.correspondence.s2(s)
            errors.append(float(np.max(np.abs(step.carried.tau_r(s2) - desc.tau_r(s)))))
        for coarse, fine in zip(errors, errors[1:]):
            self.assertTrue(5.0 <= coarse / fine <= 20.0, errors)

    def test_velocity_from_rotation(self):
        desc = wavy_descriptor()
        step = propagate_step(desc, PlanarCurve.from_circle(1.1, size=SIZE))
        s = desc.grid
        corr = step.correspondence
        expected = (corr.delta(s, 1) + desc.k_g(s)) * 1.1
        np.testing.assert_allclose(corr.velocity(s), expected, atol=1e-7)
        np.testing.assert_allclose(corr.inverse(corr.s2(s)), s, atol=1e-10)

    def test_missed_foldline(self):
        desc = circle_descriptor(lambda s: np.full_like(s, -0.5), lambda s: np.full_like(s, 2.0))
        step = propagate_step(desc, PlanarCurve.from_circle(0.5, size=SIZE))
        self.assertEqual(step.report.verdict, Verdict.NO_INTERSECTION)
        self.assertIsNone(step.correspondence)


class TestChains(unittest.TestCase):
    def test_outward_leg(self):
        foldlines = [PlanarCurve.from_circle(r, size=SIZE) for r in (1.0, 1.1, 1.2)]
        leg = propagate_direction(foldlines, cone_descriptor())
        self.assertTrue(leg.regular)
        self.assertEqual(len(leg.steps), 2)
        self.assertIsNone(leg.steps[-1].next_descriptor)
        self.assertEqual(leg.steps[1].descriptor.side, -1)

    def test_both_directions(self):
        foldlines = [PlanarCurve.from_circle(r, size=SIZE) for r in (0.9, 1.0, 1.1)]
        chain = propagate_chain(foldlines, cone_descriptor(), seed_index=1)
        self.assertTrue(chain.regular)
        self.assertEqual([leg.direction for leg in chain.legs], ["outward", "inward"])
        inward = chain.legs[1].steps[0]
        self.assertEqual(inward.descriptor.side, -1)
        np.testing.assert_allclose(inward.correspondence.v_bar.values, -0.1, atol=1e-12)
        self.assertEqual([label for label, _ in chain.strips()], [])

    def test_reversed_sides(self):
        foldlines = [PlanarCurve.from_circle(r, size=SIZE) for r in (1.0, 1.1)]
        chain = propagate_chain(foldlines, cone_descriptor(), sides="reversed")
        self.assertEqual(chain.seed.side, -1)

    def test_rejects_bad_family(self):
        foldlines = [PlanarCurve.from_circle(r, size=SIZE) for r in (1.0, 0.9)]
        with self.assertRaises(ValueError):
            propagate_chain(foldlines, cone_descriptor())
        with self.assertRaises(ValueError):
            propagate_chain(foldlines[:1], cone_descriptor(), seed_index=3)
        with self.assertRaises(ValueError):
            propagate_chain(foldlines[:1], cone_descriptor(), sides="random")


class TestBump(unittest.TestCase):
    def test_derivatives(self):
        x = np.linspace(-0.99, 0.99, 40001)
        h = x[1] - x[0]
        for nu in (1, 2, 3):
            numeric = np.gradient(bump(x, nu - 1), h)
            np.testing.assert_allclose(bump(x, nu)[5:-5], numeric[5:-5], atol=1e-4 * bump_scale(nu))
        self.assertEqual(float(bump(1.0)), 0.0)
        with self.assertRaises(ValueError):
            bump(0.0, 4)

    def test_zero_magnitude_is_identity(self):
        seed = wavy_descriptor()
        self.assertIs(perturb_torsion_bump(seed, 1.0, 0.0, 0.1), seed)

    def test_perturbation_size(self):
        seed = wavy_descriptor()
        magnitude, width = 1.0, 0.1
        bumped = perturb_torsion_bump(seed, 1.0, magnitude, width, order=3, rho=1e-3)
        change = bumped.tau_r.values - seed.tau_r.values
        bound = magnitude * width ** 3 * bump_scale(0) / bump_scale(3)
        self.assertLessEqual(np.max(np.abs(change)), bound * (1.0 + 1e-9))
        self.assertLess(np.max(np.abs(change)), 1e-3)
        far = np.abs(seed.grid - 1.0) > width
        np.testing.assert_allclose(change[far], 0.0, atol=1e-14)
        self.assertIsNone(bumped.frame)
        self.assertIs(bumped.k_n, seed.k_n)

    def test_rejects_large_bump(self):
        with self.assertRaises(ValueError):
            perturb_torsion_bump(wavy_descriptor(), 1.0, 1e4, 0.3)
        with self.assertRaises(ValueError):
            perturb_torsion_bump(wavy_descriptor(), 1.0, 1.0, 0.0)


if __name__ == "__main__":
    unittest.main()
