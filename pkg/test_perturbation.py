import unittest
from fractions import Fraction

import numpy as np

try:
    from l1_basis.seq_core import DimensionTooLarge, Vector
    from l1_basis.basis_constants import Basis
    from l1_basis.perturbation import (
        LengthMismatch, NotApplicable, bp_criterion, brute_force_min_delta, distance_matrix,
        min_dominating_delta, perturbation_radius, recovery_check, sandwich_check,
    )
except ImportError:
    from seq_core import DimensionTooLarge, Vector
    from basis_constants import Basis
    from perturbation import (
        LengthMismatch, NotApplicable, bp_criterion, brute_force_min_delta, distance_matrix,
        min_dominating_delta, perturbation_radius, recovery_check, sandwich_check,
    )

F = Fraction


def normalized_block_three() -> Basis:
    return Basis.from_vectors([Vector.of("1/3", "1/3", "1/3"), Vector.of("1/2", "1/2", 0),
                               Vector.of("1/2", 0, "1/2")])


def normalized_block(n: int) -> Basis:
    first = Vector((F(1, n),) * n)
    rest = [(Vector.unit(n, 0) + Vector.unit(n, i)).scale(F(1, 2)) for i in range(1, n)]
    return Basis.from_vectors([first] + rest)


class TestPerturbationRadius(unittest.TestCase):
    def test_identical(self):
        x = Basis.standard(3)
        r = perturbation_radius(x, x)
        self.assertEqual(r.m, 0)
        self.assertIsNone(r.dominated)

    def test_single_perturbed_coordinate(self):
        x = Basis.standard(2)
        y = [Vector.of(1, "1/4"), Vector.of(0, 1)]
        self.assertEqual(perturbation_radius(x, y).m, F(1, 4))
        # dominance is strict
        self.assertFalse(perturbation_radius(x, y, "1/4").dominated)
        self.assertTrue(perturbation_radius(x, y, "1/3").dominated)

    def test_against_normalized_block(self):
        r = perturbation_radius(Basis.standard(3), normalized_block_three())
        self.assertEqual(r.per_index_distances, (F(4, 3), 1, 1))
        self.assertEqual(r.m, F(4, 3))

    def test_length_mismatch(self):
        with self.assertRaises(LengthMismatch):
            perturbation_radius(Basis.standard(2), [Vector.of(1, 0)])

    def test_metric_properties(self):
        rng = np.random.default_rng(41)

        def draw(n):
            return [Vector(tuple(F(int(a), int(d)) for a, d in
                                 zip(rng.integers(-5, 6, size=n), rng.integers(1, 5, size=n))))
                    for _ in range(n)]

        for trial in range(30):
            n = 1 + trial % 4
            x, y, z = draw(n), draw(n), draw(n)
            with self.subTest(trial=trial):
                self.assertEqual(perturbation_radius(x, y).m, perturbation_radius(y, x).m)
                self.assertEqual(perturbation_radius(x, x).m, 0)
                self.assertLessEqual(perturbation_radius(x, z).m,
                                     perturbation_radius(x, y).m + perturbation_radius(y, z).m)
                if x != y:
                    self.assertGreater(perturbation_radius(x, y).m, 0)


class TestBPCriterion(unittest.TestCase):
    def test_identical_passes(self):
        x = Basis.standard(3)
        bp = bp_criterion(x, x)
        self.assertEqual(bp.total, 0)
        self.assertTrue(bp.passes)

    def test_small_alternating_shift(self):
        x = Basis.standard(3)
        u = Vector.of("1/3", "-1/3", "1/3")
        y = [v + u.scale("1/6") for v in x.vectors]
        bp = bp_criterion(x, y)
        self.assertEqual(bp.total, F(1, 2))
        self.assertTrue(bp.passes)

    def test_swap_fails_the_sufficient_test(self):
        bp = bp_criterion(Basis.standard(2), [Vector.of(0, 1), Vector.of(1, 0)])
        self.assertEqual(bp.total, 4)
        self.assertFalse(bp.passes)


class TestSandwich(unittest.TestCase):
    def test_identical(self):
        x = Basis.standard(2)
        cert = sandwich_check(x, x)
        self.assertEqual((cert.bound_low, cert.bound_high), (1, 1))
        self.assertEqual((cert.actual_low, cert.actual_high), (1, 1))
        self.assertTrue(cert.holds)

    def test_shift_by_quarter(self):
        x = Basis.standard(2)
        y = Basis.from_vectors([Vector.of("5/4", 0), Vector.of("1/4", 1)])
        cert = sandwich_check(x, y)
        self.assertEqual(cert.m, F(1, 4))
        self.assertEqual((cert.bound_low, cert.bound_high), (F(4, 5), F(4, 3)))
        self.assertEqual((cert.actual_low, cert.actual_high), (F(4, 5), F(6, 5)))
        self.assertTrue(cert.holds)

    def test_construction_block_small_shift(self):
        x = Basis.from_vectors([Vector.of("1/3", "1/3", "1/3"), Vector.of(1, 1, 0), Vector.of(1, 0, 1)])
        w = Vector.of("1/20", "-1/20", "1/20")
        y = Basis.from_vectors([v + w for v in x.vectors])
        cert = sandwich_check(x, y)
        self.assertEqual(cert.k, F(1, 5))
        self.assertEqual(cert.m, F(3, 20))
        self.assertTrue(cert.holds)

    def test_not_applicable(self):
        x = Basis.standard(2)
        y = Basis.from_vectors([Vector.of(2, 0), Vector.of(0, 2)])
        with self.assertRaises(NotApplicable) as ctx:
            sandwich_check(x, y)
        self.assertEqual((ctx.exception.m, ctx.exception.k), (1, 1))


class TestRecovery(unittest.TestCase):
    def test_bound(self):
        x = Basis.standard(2)
        z = Basis.from_vectors([Vector.of(1, 0), Vector.of(1, 1)])
        cert = recovery_check(x, z, 1)
        self.assertEqual(cert.k1, F(1, 2))
        self.assertEqual(cert.bound, 6)
        self.assertEqual(cert.actual, 2)
        self.assertTrue(cert.holds)

    def test_delta_must_be_positive(self):
        with self.assertRaises(ValueError):
            recovery_check(Basis.standard(2), Basis.standard(2), 0)


class TestMinDominatingDelta(unittest.TestCase):
    def test_standard(self):
        res = min_dominating_delta(Basis.standard(3))
        self.assertEqual(res.delta_min, 0)
        self.assertEqual(res.assignment, (0, 1, 2))
        self.assertTrue(res.normalized)

    def test_distance_matrix(self):
        d = distance_matrix(normalized_block_three())
        self.assertEqual([row[0] for row in d], [F(4, 3)] * 3)
        self.assertEqual(d[0][1], 1)
        self.assertEqual(d[1][1], 1)
        self.assertEqual(d[2][1], 2)

    def test_block_three(self):
        res = min_dominating_delta(normalized_block_three())
        self.assertEqual(res.delta_min, F(4, 3))
        self.assertFalse(res.dominated_for(F(4, 3)))
        self.assertTrue(res.dominated_for("3/2"))

    def test_blocks_match_closed_form_and_brute_force(self):
        for n in range(3, 8):
            with self.subTest(n=n):
                b = normalized_block(n)
                res = min_dominating_delta(b)
                self.assertEqual(res.delta_min, F(2 * (n - 1), n))
                self.assertEqual(brute_force_min_delta(b)[0], res.delta_min)
                self.assertLessEqual(res.delta_min, 2)

    def test_reindexing_helps(self):
        res = min_dominating_delta(Basis.from_vectors([Vector.of(0, 1), Vector.of(1, 0)]))
        self.assertEqual(res.delta_min, 0)
        self.assertEqual(res.indexwise_delta, 2)
        self.assertEqual(res.assignment, (1, 0))

    def test_signs_are_not_reindexed(self):
        res = min_dominating_delta(Basis.from_vectors([Vector.of(0, -1), Vector.of(1, 0)]))
        self.assertEqual(res.delta_min, 2)

    def test_unnormalized_warns(self):
        with self.assertLogs(level='WARNING'):
            res = min_dominating_delta(Basis.from_vectors([Vector.of(2, 0), Vector.of(0, 1)]))
        self.assertFalse(res.normalized)
        self.assertEqual(res.delta_min, 1)

    def test_brute_force_limit(self):
        with self.assertRaises(DimensionTooLarge):
            brute_force_min_delta(Basis.standard(9))


if __name__ == '__main__':
    unittest.main()
