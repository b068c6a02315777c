"""
Tests for the degree bounds.

This module tests:
- Input validation
- The Θ index set and its cardinality bound
- The multilinear Bézout sum against coefficient extraction
- Closed-form bounds and the bounds table
"""

import unittest
from itertools import product

from parametric_lmi import BoundInput, delta_bar_star, delta_star, deg_g_bound, mbb_delta, theta_cardinality
from parametric_lmi.bounds import bounds_table, mbb_oracle, multinomial, theta, theta_bound


def grid(max_n=3, min_d=0):
    """Small valid inputs (m, r, d, n, t)."""
    for m, d, n, t in product(range(1, 4), range(min_d, 3), range(0, max_n + 1), range(0, 3)):
        if t > 0 and d < 1:
            continue
        for r in range(m):
            yield BoundInput(m, r, d, n, t)


class TestBoundInput(unittest.TestCase):
    """Test input validation."""

    def test_valid(self):
        """Test derived sizes."""
        inp = BoundInput(m=3, r=1, d=2, n=4, t=1)
        self.assertEqual(inp.m_star, 6)
        self.assertEqual(inp.c, 3)

    def test_invalid(self):
        """Test rejected inputs."""
        with self.assertRaises(ValueError):
            BoundInput(m=0, r=0, d=1, n=1, t=1)
        with self.assertRaises(ValueError):
            BoundInput(m=2, r=2, d=1, n=1, t=1)
        with self.assertRaises(ValueError):
            BoundInput(m=2, r=1, d=-1, n=1, t=0)
        # Parameters need positive degree
        with self.assertRaises(ValueError):
            BoundInput(m=2, r=1, d=0, n=1, t=1)
        BoundInput(m=2, r=1, d=0, n=1, t=0)


class TestTheta(unittest.TestCase):
    """Test the Θ index set."""

    def test_small_case(self):
        """Test Θ for m = 2, r = 1, d = n = t = 1."""
        inp = BoundInput(2, 1, 1, 1, 1)
        self.assertEqual(theta_cardinality(inp), 4)
        for k in theta(inp):
            self.assertEqual(k.alpha_u + k.alpha_y + k.alpha_x, inp.m_star)
            self.assertEqual(k.gamma_y + k.gamma_x + k.gamma_lambda, inp.t)

    def test_cardinality_bound(self):
        """Test |Θ| <= min((t+1)^3, (t+1)(n+1)^2)."""
        for inp in grid():
            self.assertLessEqual(theta_cardinality(inp), theta_bound(inp), inp)
            if inp.t == 0:
                self.assertLessEqual(theta_cardinality(inp), 1, inp)

    def test_empty_when_too_many_variables(self):
        """Test that Θ is empty for n > m* + t."""
        inp = BoundInput(m=1, r=0, d=1, n=3, t=1)
        self.assertEqual(theta_cardinality(inp), 0)
        self.assertEqual(mbb_delta(inp), 0)

    def test_multinomial(self):
        """Test multinomial coefficients."""
        self.assertEqual(multinomial(3, 1, 1, 1), 6)
        self.assertEqual(multinomial(3, 2, 1, 0), 3)
        self.assertEqual(multinomial(3, 2, 2), 0)
        self.assertEqual(multinomial(2, 3, -1), 0)


class TestMultilinearBezout(unittest.TestCase):
    """Test the multilinear Bézout sum."""

    def test_hand_value(self):
        """Test m = 2, r = 1, d = n = t = 1."""
        inp = BoundInput(2, 1, 1, 1, 1)
        self.assertEqual(mbb_delta(inp), 48)
        self.assertEqual(mbb_oracle(inp), 48)

    def test_agrees_with_coefficient_extraction(self):
        """Test the Θ sum against the expanded product on a grid."""
        for inp in grid(max_n=5):
            self.assertEqual(mbb_delta(inp), mbb_oracle(inp), inp)

    def test_closed_form_dominates(self):
        """Test that the closed form is an upper bound."""
        for inp in (BoundInput(2, 1, 1, 1, 1), BoundInput(2, 0, 2, 2, 1), BoundInput(3, 1, 1, 2, 2)):
            self.assertGreaterEqual(delta_bar_star(inp), mbb_delta(inp), inp)

    def test_closed_form_dominates_on_grid(self):
        """Test the closed form against the exact sum for every grid input with d >= 1."""
        for inp in grid(max_n=6, min_d=1):
            self.assertGreaterEqual(delta_bar_star(inp), mbb_delta(inp), inp)

    def test_closed_form_vanishes_without_degree(self):
        """Test that d = 0 zeroes the closed form while the exact sum may stay positive."""
        inp = BoundInput(2, 1, 0, 1, 0)
        self.assertEqual(delta_bar_star(inp), 0)
        self.assertEqual(mbb_delta(inp), mbb_oracle(inp))


class TestClosedForms(unittest.TestCase):
    """Test δ*, the g degree bound and the table."""

    def test_delta_star(self):
        """Test binom(n + m*, n)^3 and the vanishing case."""
        self.assertEqual(delta_star(1, 2), 64)
        self.assertEqual(delta_star(1, 1), 8)
        self.assertEqual(delta_star(0, 3), 1)
        self.assertEqual(delta_star(4, 2), 0)

    def test_deg_g_bound(self):
        """Test m(d + 1)."""
        self.assertEqual(deg_g_bound(2, 1), 4)
        self.assertEqual(deg_g_bound(1, 0), 1)

    def test_bounds_table(self):
        """Test the table fields."""
        table = bounds_table(BoundInput(2, 1, 1, 1, 1))
        self.assertEqual(table["m_star"], 3)
        self.assertEqual(table["c"], 1)
        self.assertEqual(table["delta_star"], 64)
        self.assertEqual(table["deg_g"], 4)
        self.assertEqual(table["theta"], 4)
        self.assertEqual(table["theta_bound"], 8)
        self.assertEqual(table["mbb_delta"], 48)
        self.assertEqual(table["realdet_systems"], 2)
        self.assertIsInstance(table["delta_bar_star"], int)


if __name__ == "__main__":
    unittest.main()
