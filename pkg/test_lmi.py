"""
Tests for linear matrices, branch systems and the two solvers.

This module tests:
- ParamLinearMatrix construction and the PSD coefficient conditions
- Changes of variables and the Gram spectrahedron of a polynomial
- Incidence and Lagrange systems and the RealDet enumeration
- Feasibility decisions without parameters
- Parametric classification end to end
"""

import random
import unittest
from dataclasses import replace
from fractions import Fraction
from math import comb
from pathlib import Path

from parametric_lmi import (
    BadIndexSet,
    ChangeOfVars,
    GenericityFailure,
    NotRepresentable,
    NotSymmetric,
    ParamLinearMatrix,
    PointStatus,
    PolySystem,
    QuotientAlgebra,
    SingularMatrix,
    SolverConfig,
    Verdict,
    branch_keys,
    buchberger,
    change_vars,
    check_point,
    count_nonneg_solutions,
    decide_lmi,
    incidence_system,
    lagrange_system,
    make_ring,
    parametric_solve_lmi,
    parse_poly,
    psd_matrix_cond,
    real_det,
    solve_lmi,
    sos_to_lmi,
    specialize_params,
)
from parametric_lmi.exact_arith import evaluate_poly
from parametric_lmi.incidence_lagrange import (
    choose_randomness,
    expected_system_count,
    saturate_rank_defect,
)
from parametric_lmi.limits import SATURATION_RABINOWITSCH
from parametric_lmi.lmi_decide import STEP_BRANCH, STEP_EXHAUSTED, STEP_ORIGIN, STEP_RANK_SWEEP
from parametric_lmi.lmi_model import gram_polynomial, rank_at
from parametric_lmi.schemas import InstanceFile, load_instance
from parametric_lmi.univariate_real import feasibility_oracle_1d, univariate

CONFIG = SolverConfig(jobs=1)
INSTANCES = Path(__file__).parent / "instances"


def matrix(rows, n=1, t=0):
    return ParamLinearMatrix.from_entries(rows, n, t)


class TestParamLinearMatrix(unittest.TestCase):
    """Test the matrix model."""

    def test_from_upper_triangle(self):
        """Test that full rows and the upper triangle give the same matrix."""
        full = matrix([[1, "x1"], ["x1", "y1"]], 1, 1)
        upper = matrix([[1, "x1"], ["y1"]], 1, 1)
        self.assertEqual(full.entries, upper.entries)
        self.assertEqual(full.digest(), upper.digest())
        self.assertEqual(upper.upper_triangle(), [["1", "x1"], ["y1"]])

    def test_triangle_layout_for_larger_matrices(self):
        """Test that the layout is chosen once for the whole array."""
        upper = matrix([[1, "x1", 2], [3, "x1"], [5]])
        full = matrix([[1, "x1", 2], ["x1", 3, "x1"], [2, "x1", 5]])
        self.assertEqual(upper.entries, full.entries)
        # A 1x1 block is a full row and a triangle row at once
        self.assertEqual(matrix([["x1"]]).upper_triangle(), [["x1"]])
        # Mixed layouts are rejected
        with self.assertRaises(ValueError):
            matrix([[1, "x1", 2], ["x1", 3, "x1"], [5]])
        with self.assertRaises(ValueError):
            matrix([[1, "x1"], ["x1"], [2]])

    def test_bundled_instances_load(self):
        """Test the instance files shipped next to the tests."""
        for name in ("example1.json", "example2.json", "motzkin.json", "motzkin_param.json"):
            document = load_instance((INSTANCES / name).read_text(encoding="utf-8"))
            A = document.to_matrix()
            self.assertEqual((A.m, A.n, A.t), (document.m, document.n, document.t), name)
            reloaded = load_instance(InstanceFile.from_matrix(A).dumps()).to_matrix()
            self.assertEqual(reloaded.entries, A.entries, name)

    def test_rejects_bad_entries(self):
        """Test symmetry and affinity checks."""
        with self.assertRaises(NotSymmetric):
            matrix([[1, "x1"], [0, 1]])
        with self.assertRaises(ValueError):
            matrix([["x1^2"]])
        # Products with parameters stay affine in x
        self.assertEqual(matrix([["x1*y1"]], 1, 1).upper_triangle(), [["x1*y1"]])

    def test_psd_matrix_cond(self):
        """Test the coefficients of det(A + lambda*I)."""
        A = matrix([[1, "x1"], ["y1"]], 1, 1)
        g = psd_matrix_cond(A)
        self.assertEqual(len(g), 3)
        self.assertEqual(g[0], parse_poly("y1 - x1^2", A.ring))
        self.assertEqual(g[1], parse_poly("1 + y1", A.ring))
        self.assertEqual(g[2], parse_poly("1", A.ring))

        A = matrix([["1 + x1", "y1"], ["1 - x1"]], 1, 1)
        g = psd_matrix_cond(A)
        self.assertEqual(g[0], parse_poly("1 - x1^2 - y1^2", A.ring))
        self.assertEqual(g[1], parse_poly("2", A.ring))

        A = ParamLinearMatrix.identity(3)
        g = psd_matrix_cond(A)
        self.assertEqual([evaluate_poly(gi, {}) for gi in g], [comb(3, i) for i in range(4)])

    def test_change_vars(self):
        """Test x <- M*x on polynomials and matrices."""
        ring = make_ring(("x1",), ())
        self.assertEqual(change_vars(parse_poly("x1", ring), ChangeOfVars(((2,),))), parse_poly("2*x1", ring))

        ring = make_ring(("x1", "x2"), ())
        p = parse_poly("x1^2 + x2^2", ring)
        self.assertEqual(change_vars(p, ChangeOfVars(((0, 1), (1, 0)))), p)
        self.assertEqual(change_vars(p, ChangeOfVars.identity(2)), p)

        A = matrix([["x1", 1], ["x1"]])
        moved = change_vars(A, ChangeOfVars(((3,),)))
        self.assertEqual(moved.upper_triangle(), [["3*x1", "1"], ["3*x1"]])

        with self.assertRaises(SingularMatrix):
            ChangeOfVars(((1, 2), (2, 4)))

    def test_specialize_params(self):
        """Test parameter substitution."""
        A = matrix([[1, "x1"], ["y1"]], 1, 1)
        B = specialize_params(A, [4])
        self.assertEqual(B.t, 0)
        self.assertEqual(B.upper_triangle(), [["1", "x1"], ["4"]])
        C = matrix([[1, "x1"], [1]])
        self.assertIs(specialize_params(C, []), C)
        with self.assertRaises(ValueError):
            specialize_params(A, [])

    def test_rank_at(self):
        """Test rank at a point."""
        A = matrix([[1, "x1"], ["y1"]], 1, 1)
        self.assertEqual(rank_at(A, [1], [1]), 1)
        self.assertEqual(rank_at(A, [2], [1]), 2)


class TestSosToLmi(unittest.TestCase):
    """Test Gram spectrahedra."""

    def setUp(self):
        self.ring = make_ring(("x1",), ())

    def test_forced_gram_matrix(self):
        """Test a Gram matrix without free variables."""
        A = sos_to_lmi(parse_poly("x1^4 + 2*x1^2 + 1", self.ring), ["1", "x1^2"])
        self.assertEqual((A.m, A.n), (2, 0))
        self.assertEqual(A.upper_triangle(), [["1", "1"], ["1"]])

        A = sos_to_lmi(parse_poly("x1^2", self.ring), ["x1"])
        self.assertEqual((A.m, A.n), (1, 0))
        self.assertEqual(A.upper_triangle(), [["1"]])

        A = sos_to_lmi(parse_poly("x1^4 + 1", self.ring), ["1", "x1^2"])
        self.assertEqual(A.upper_triangle(), [["1", "0"], ["1"]])

    def test_free_gram_variable(self):
        """Test that repeated products become new variables."""
        p = parse_poly("x1^4 + x1^2 + 1", self.ring)
        beta = ["1", "x1", "x1^2"]
        A = sos_to_lmi(p, beta)
        self.assertEqual((A.m, A.n), (3, 1))
        for x in (0, 1, Fraction(1, 3), -5):
            self.assertEqual(gram_polynomial(A, beta, self.ring, [x]), p)

    def test_parametric_polynomial(self):
        """Test that parameters pass through to the Gram matrix."""
        ring = make_ring(("x1",), ("y1",))
        p = parse_poly("x1^2 + y1", ring)
        A = sos_to_lmi(p, ["1", "x1"])
        self.assertEqual(A.t, 1)
        self.assertEqual(A.upper_triangle(), [["y1", "0"], ["1"]])

    def test_not_representable(self):
        """Test a monomial outside the products of the basis."""
        with self.assertRaises(NotRepresentable):
            sos_to_lmi(parse_poly("x1^3", self.ring), ["1", "x1"])


class TestBranchSystems(unittest.TestCase):
    """Test incidence systems, Lagrange systems and RealDet."""

    def test_branch_keys(self):
        """Test which (r, iota, i) are enumerated."""
        self.assertEqual(branch_keys(2, 1), [(1, (1,), 1), (1, (2,), 1)])
        self.assertEqual(expected_system_count(2, 1), 2)
        self.assertEqual(branch_keys(1, 1), [(0, (1,), 1)])
        self.assertEqual(branch_keys(2, 0), [])
        self.assertEqual(len(branch_keys(2, 3)), expected_system_count(2, 3))

    def test_incidence_system(self):
        """Test the entries of A*U and the pins."""
        A = matrix([[1, "x1"], ["y1"]], 1, 1)
        inc = incidence_system(A, 1, (1,))
        ring = inc.polys.ring
        expected = {parse_poly(s, ring) for s in ("1 + x1*u2_1", "x1 + y1*u2_1", "u1_1 - 1")}
        self.assertEqual(set(inc.polys.generators), expected)
        self.assertEqual(inc.n_pins, 1)

        inc = incidence_system(A, 1, (2,))
        ring = inc.polys.ring
        expected = {parse_poly(s, ring) for s in ("u1_1 + x1", "x1*u1_1 + y1", "u2_1 - 1")}
        self.assertEqual(set(inc.polys.generators), expected)

        # Full pinning gives the entries of A themselves
        inc = incidence_system(A, 0, (1, 2))
        self.assertEqual(inc.n_entries, 3)

    def test_bad_index_set(self):
        """Test index set validation."""
        A = matrix([[1, "x1"], ["y1"]], 1, 1)
        with self.assertRaises(BadIndexSet):
            incidence_system(A, 1, (1, 2))
        with self.assertRaises(BadIndexSet):
            incidence_system(A, 1, (3,))
        with self.assertRaises(BadIndexSet):
            incidence_system(A, 2, ())

    def test_lagrange_on_circle(self):
        """Test critical points of x1 on the unit circle."""
        ring = make_ring(("x1", "x2"), ())
        f = PolySystem.of([parse_poly("x1^2 + x2^2 - 1", ring)])
        lag = lagrange_system(f, 1, ())
        target = lag.polys.ring
        expected = {parse_poly(s, target) for s in ("x1^2 + x2^2 - 1", "2*l1*x1 - 1", "2*l1*x2")}
        self.assertEqual(set(lag.polys.generators), expected)
        algebra = QuotientAlgebra(buchberger(lag.polys))
        self.assertEqual(count_nonneg_solutions(algebra, [], {}), 2)

        # Fixing x1 = 0 leaves x2 = +-1
        lag = lagrange_system(f, 2, (0,))
        self.assertEqual(lag.variable_count, 2)
        algebra = QuotientAlgebra(buchberger(lag.polys))
        self.assertEqual(count_nonneg_solutions(algebra, [], {}), 2)

    def test_lagrange_linear(self):
        """Test the linear case."""
        ring = make_ring(("x1",), ())
        lag = lagrange_system(PolySystem.of([parse_poly("x1 - 1", ring)]), 1, ())
        target = lag.polys.ring
        self.assertEqual(set(lag.polys.generators), {parse_poly("x1 - 1", target), parse_poly("l1 - 1", target)})

    def test_randomness_is_reproducible(self):
        """Test seeded choices of M and tau."""
        self.assertEqual(choose_randomness(0, 3), choose_randomness(0, 3))
        self.assertNotEqual(choose_randomness(0, 3)[0], choose_randomness(1, 3)[0])
        M, tau = choose_randomness(5, 2)
        self.assertEqual(len(set(tau)), 2)

    def test_real_det(self):
        """Test the number of systems produced."""
        A = matrix([[1, "x1"], ["y1"]], 1, 1)
        M, tau = choose_randomness(0, 1)
        out = real_det(A, M, tau)
        self.assertEqual([s.key for s in out.systems], branch_keys(2, 1))
        with self.assertRaises(ValueError):
            real_det(matrix([["x1", "x2"], [1]], 2), ChangeOfVars.identity(2), (1, 1))

    def test_saturation(self):
        """Test that saturation adds one variable and one equation."""
        A = matrix([["x1", 1], ["x1"]])
        inc = incidence_system(A, 1, (1,))
        lag = lagrange_system(inc.polys, 1, ())
        saturated = saturate_rank_defect(lag.polys, A, 1, SATURATION_RABINOWITSCH)
        self.assertEqual(len(saturated), len(lag.polys) + 1)
        self.assertIn("z1", [str(s) for s in saturated.ring.symbols])


class TestDecide(unittest.TestCase):
    """Test feasibility without parameters."""

    def test_check_point(self):
        """Test interior, boundary and outside points."""
        self.assertEqual(check_point(ParamLinearMatrix.identity(2, 1), [0]), PointStatus.INTERIOR)
        A = matrix([["x1", 0], [1]])
        self.assertEqual(check_point(A, [0]), PointStatus.BOUNDARY)
        self.assertEqual(check_point(A, [-1]), PointStatus.OUTSIDE)
        self.assertEqual(check_point(A, ["1/2"]), PointStatus.INTERIOR)
        with self.assertRaises(ValueError):
            check_point(A, [])

    def test_origin_step(self):
        """Test feasibility read off at x = 0."""
        report = decide_lmi(matrix([[1, "x1"], [1]]), CONFIG)
        self.assertTrue(report.feasible)
        self.assertEqual(report.step, STEP_ORIGIN)

    def test_infeasible(self):
        """Test a matrix whose determinant is negative everywhere."""
        report = decide_lmi(matrix([[1, "x1"], [-1]]), CONFIG)
        self.assertFalse(report.feasible)
        self.assertEqual(report.step, STEP_EXHAUSTED)
        self.assertEqual(report.to_dict()["verdict"], "infeasible")

    def test_boundary_witness(self):
        """Test feasibility found on a rank-deficient branch."""
        report = decide_lmi(matrix([["x1", 1], ["x1"]]), CONFIG)
        self.assertTrue(report.feasible)
        self.assertEqual(report.step, STEP_BRANCH)
        self.assertGreater(report.count, 0)
        self.assertEqual(report.to_dict()["branch"]["r"], 1)

    def test_agrees_with_one_variable_oracle(self):
        """Test decide against cell enumeration of the PSD conditions."""
        instances = [
            [["x1", 1], ["x1"]],
            [[1, "x1"], [-1]],
            [["x1 - 2", 1], ["x1 - 2"]],
            [["x1", 0], ["-1 - x1"]],
            [["x1", 0], ["1 - x1"]],
            [["1 - x1", "x1"], ["-2"]],
        ]
        for rows in instances:
            A = matrix(rows)
            gs = [univariate(g, "x1") for g in psd_matrix_cond(A) if g]
            self.assertEqual(solve_lmi(A, CONFIG), feasibility_oracle_1d(gs), rows)

    def test_singular_fiber_point(self):
        """Test feasibility reached only at a point where the fiber is singular."""
        for rows in ([["3 + x1", "3 + 3*x1"], ["0"]], [["1 - 3*x1", "1 + 2*x1"], ["0"]]):
            report = decide_lmi(matrix(rows), CONFIG)
            self.assertTrue(report.feasible, rows)
            self.assertEqual(report.step, STEP_BRANCH, rows)
            self.assertTrue(any(m.fiber_counted for m in report.metrics.branches()), rows)
        self.assertEqual(check_point(matrix([["3 + x1", "3 + 3*x1"], ["0"]]), [-1]), PointStatus.BOUNDARY)

    def test_rank_drops_to_zero(self):
        """Test a spectrahedron whose boundary point has rank below every branch rank."""
        report = decide_lmi(matrix([["x1 - 1", 0], ["2*x1 - 2"]]), CONFIG)
        self.assertTrue(report.feasible)
        self.assertIn(report.step, (STEP_BRANCH, STEP_RANK_SWEEP))

        # A single boundary point of rank zero
        report = decide_lmi(matrix([["x1 - 1", 0], ["1 - x1"]]), CONFIG)
        self.assertTrue(report.feasible)
        self.assertIn(report.step, (STEP_BRANCH, STEP_RANK_SWEEP))

    def test_report_records_randomness(self):
        """Test that reports carry the seed, the change of variables and the genericity flag."""
        report = decide_lmi(matrix([["x1", 1], ["x1"]]), SolverConfig(jobs=1, seed=7))
        data = report.to_dict()
        self.assertEqual(data["seed"], 7)
        self.assertEqual(len(data["M"]), 1)
        self.assertEqual(len(data["tau"]), 1)
        self.assertTrue(data["generic"])
        self.assertEqual(data["caveats"], [])

        report = decide_lmi(matrix([[1, "x1"], [-1]]), CONFIG)
        self.assertTrue(report.generic)
        self.assertIs(report.to_dict()["generic"], True)

        origin = decide_lmi(matrix([[1, "x1"], [1]]), CONFIG).to_dict()
        self.assertIsNone(origin["M"])
        self.assertEqual(origin["tau"], [])

    def test_random_instances_against_oracle(self):
        """Test decide against cell enumeration on seeded random matrices."""
        rng = random.Random(2024)
        grid = [Fraction(k, 2) for k in range(-20, 21)]
        compared = 0
        for case in range(100):
            m = rng.randint(1, 3)
            rows = [[f"{rng.randint(-3, 3)} + {rng.randint(-3, 3)}*x1" for _ in range(m - i)] for i in range(m)]
            A = matrix(rows)
            gs = [g for g in psd_matrix_cond(A) if g]
            expected = feasibility_oracle_1d([univariate(g, "x1") for g in gs])
            try:
                report = decide_lmi(A, CONFIG)
            except GenericityFailure:
                continue
            with self.subTest(case=case, rows=rows):
                if report.feasible:
                    self.assertTrue(expected)
                elif report.generic:
                    compared += 1
                    self.assertFalse(expected)
                    for x in grid:
                        values = [evaluate_poly(g, {"x1": x}) for g in gs]
                        self.assertTrue(any(v < 0 for v in values), x)
                if report.generic:
                    self.assertEqual(report.feasible, expected)
        self.assertGreater(compared, 0)

    def test_parallel_jobs(self):
        """Test that several workers reach the same verdict."""
        A = matrix([["x1 - 2", 1], ["x1 - 2"]])
        self.assertEqual(solve_lmi(A, SolverConfig(jobs=4)), solve_lmi(A, CONFIG))

    def test_rejects_parameters(self):
        """Test the t = 0 precondition."""
        with self.assertRaises(ValueError):
            decide_lmi(matrix([[1, "x1"], ["y1"]], 1, 1), CONFIG)


class TestParametricSolve(unittest.TestCase):
    """Test the parametric classification end to end."""

    def assertMatches(self, rows, truth, points):
        A = matrix(rows, 1, 1)
        result = parametric_solve_lmi(A, CONFIG)
        self.assertTrue(result.sound)
        checked = 0
        for y in points:
            verdict = result.formula.evaluate({"y1": y})
            if verdict is Verdict.EXCEPTION:
                continue
            checked += 1
            self.assertEqual(verdict is Verdict.TRUE, truth(y), y)
            self.assertEqual(solve_lmi(specialize_params(A, [y]), CONFIG), truth(y), y)
        self.assertGreaterEqual(checked, len(points) - 1)
        return result

    def test_positive_parameter(self):
        """Test [[1, x1], [x1, y1]]: feasible iff y1 >= 0."""
        points = [Fraction(-7, 3), Fraction(-1, 2), Fraction(1, 3), Fraction(5, 2)]
        result = self.assertMatches([[1, "x1"], ["y1"]], lambda y: y > 0, points)
        self.assertEqual(len(result.entries), 2)

    def test_structured_records(self):
        """Test the key=value branch records and the closing summary."""
        A = matrix([[1, "x1"], ["y1"]], 1, 1)
        with self.assertLogs("parametric_lmi.run", level="INFO") as logs:
            parametric_solve_lmi(A, CONFIG)
        branch_lines = [line for line in logs.output if "message=branch" in line]
        self.assertGreaterEqual(len(branch_lines), len(branch_keys(A.m, A.n)))
        self.assertTrue(any("message=summary" in line and "total_branches=" in line for line in logs.output))

    def test_disc(self):
        """Test [[1 + x1, y1], [y1, 1 - x1]]: feasible iff -1 <= y1 <= 1."""
        points = [Fraction(-3, 2), Fraction(-1, 2), Fraction(1, 3), Fraction(7, 4)]
        self.assertMatches([["1 + x1", "y1"], ["1 - x1"]], lambda y: -1 < y < 1, points)

    def test_constant_identity(self):
        """Test that the identity is feasible for every parameter."""
        A = ParamLinearMatrix.identity(2, 1, 1)
        result = parametric_solve_lmi(A, CONFIG)
        for y in (-3, 0, 4):
            self.assertEqual(result.formula.evaluate({"y1": y}), Verdict.TRUE)

    def test_options_agree(self):
        """Test that the three output options describe the same set."""
        A = matrix([[1, "x1"], ["y1"]], 1, 1)
        formulas = [parametric_solve_lmi(A, replace(CONFIG, option=o)).formula
                    for o in ("assertion", "minors", "cells")]
        for y in (Fraction(-5, 3), Fraction(7, 2)):
            verdicts = {phi.evaluate({"y1": y}) for phi in formulas}
            verdicts.discard(Verdict.EXCEPTION)
            self.assertLessEqual(len(verdicts), 1)

    def test_reproducible(self):
        """Test that the same seed gives the same output."""
        A = matrix([[1, "x1"], ["y1"]], 1, 1)
        first = parametric_solve_lmi(A, CONFIG)
        second = parametric_solve_lmi(A, CONFIG)
        self.assertEqual(first.formula.to_json(), second.formula.to_json())
        self.assertEqual(first.M, second.M)

    def test_needs_parameters(self):
        """Test the t >= 1 precondition."""
        with self.assertRaises(ValueError):
            parametric_solve_lmi(matrix([[1, "x1"], [1]]), CONFIG)


if __name__ == "__main__":
    unittest.main()
