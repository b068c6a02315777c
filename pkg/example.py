"""
Example script demonstrating parametric_lmi
"""
from dataclasses import replace
from fractions import Fraction

from parametric_lmi import (
    BoundInput,
    ParamLinearMatrix,
    SolverConfig,
    decide_lmi,
    make_ring,
    mbb_delta,
    parametric_solve_lmi,
    parse_poly,
    psd_matrix_cond,
    sos_to_lmi,
    specialize_params,
)
from parametric_lmi.exact_arith import format_poly

def print_separator(title):
    """Print a separator with a title."""
    print("\n" + "=" * 60)
    print(f" {title} ".center(60, "="))
    print("=" * 60 + "\n")

def main():
    config = SolverConfig(jobs=1)

    # A matrix with one variable and one parameter
    print_separator("BUILDING A PARAMETRIC LMI")
    A = ParamLinearMatrix.from_entries([["1 + x1", "y1"], ["1 - x1"]], n=1, t=1)
    print(f"Upper triangle: {A.upper_triangle()}")
    print(f"Instance digest: {A.digest()[:16]}...")

    print_separator("PSD CONDITIONS")
    for i, g in enumerate(psd_matrix_cond(A)):
        print(f"g{i} = {format_poly(g)}")

    # Decide a few specializations
    print_separator("DECIDING SPECIALIZATIONS")
    for y in (Fraction(-3, 2), Fraction(1, 2), Fraction(2)):
        try:
            report = decide_lmi(specialize_params(A, [y]), config)
            print(f"y1 = {y}: {'feasible' if report.feasible else 'infeasible'} (step: {report.step})")
        except Exception as e:
            print(f"Error deciding y1 = {y}: {str(e)}")

    # Classify all parameters at once
    print_separator("CLASSIFYING PARAMETERS")
    try:
        result = parametric_solve_lmi(A, replace(config, option="cells"))
        print(f"Seed {result.seed}, attempts {result.attempts}, sound: {result.sound}")
        print(result.formula.to_json())
        for y in (Fraction(-3, 2), Fraction(1, 2), Fraction(2)):
            print(f"Formula at y1 = {y}: {result.formula.evaluate({'y1': y}).value}")
    except Exception as e:
        print(f"Error classifying: {str(e)}")

    # Gram matrices of a polynomial
    print_separator("SOS TO LMI")
    ring = make_ring(("x1",), ())
    p = parse_poly("x1^4 + x1^2 + 1", ring)
    gram = sos_to_lmi(p, ["1", "x1", "x1^2"])
    print(f"Gram matrix with {gram.n} free variable(s): {gram.upper_triangle()}")
    report = decide_lmi(gram, config)
    print(f"Sum of squares: {report.feasible}")

    print_separator("DEGREE BOUNDS")
    inp = BoundInput(m=2, r=1, d=1, n=1, t=1)
    print(f"Multilinear Bezout bound for {inp}: {mbb_delta(inp)}")

    print_separator("EXAMPLE COMPLETED")

if __name__ == "__main__":
    main()
