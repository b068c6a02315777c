"""
Degree bounds for the branch systems.

The multilinear Bézout bound on the total number of complex solutions of
the Lagrange systems is a sum over the index set Θ, which is parametrized
by the free triple (γ_y, γ_x, δ_y). Exact values are integers; the closed
form upper bound is rounded up.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import ceil, comb, factorial
from typing import Any, Dict, Iterator, NamedTuple

from sympy import ZZ
from sympy.polys.rings import ring

from .incidence_lagrange import expected_system_count

logger = logging.getLogger("parametric_lmi.bounds")

# e rounded up, so the closed form stays an upper bound
E_UPPER = Fraction(27182818285, 10 ** 10)


@dataclass(frozen=True)
class BoundInput:
    """Matrix size m, rank r, parameter degree d, n primal and t parameter variables."""

    m: int
    r: int
    d: int
    n: int
    t: int

    def __post_init__(self):
        for name in ("m", "r", "d", "n", "t"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if not 0 <= self.r <= self.m - 1:
            raise ValueError(f"r must lie in 0..{self.m - 1}")
        if self.t > 0 and self.d < 1:
            raise ValueError("d must be at least 1 when there are parameters")

    @property
    def m_star(self) -> int:
        return self.m * (self.m + 1) // 2

    @property
    def c(self) -> int:
        return comb(self.m - self.r + 1, 2)


class ThetaIndex(NamedTuple):
    alpha_u: int
    alpha_y: int
    alpha_x: int
    beta_u: int
    gamma_y: int
    gamma_x: int
    gamma_lambda: int
    delta_y: int


def multinomial(total: int, *parts: int) -> int:
    if any(p < 0 for p in parts) or sum(parts) != total:
        return 0
    value = factorial(total)
    for p in parts:
        value //= factorial(p)
    return value


def theta(inp: BoundInput) -> Iterator[ThetaIndex]:
    """Tuples of Θ, obtained from the free (γ_y, γ_x, δ_y); tuples with a negative index are dropped."""
    ms, c, n, t = inp.m_star, inp.c, inp.n, inp.t
    for gamma_y, gamma_x, delta_y in product(range(t + 1), range(min(t, n) + 1), range(min(t, n) + 1)):
        index = ThetaIndex(
            alpha_u=gamma_y + delta_y + gamma_x + ms - t - n,
            alpha_y=t - gamma_y - delta_y,
            alpha_x=n - gamma_x,
            beta_u=t + n - c - gamma_y - delta_y - gamma_x,
            gamma_y=gamma_y,
            gamma_x=gamma_x,
            gamma_lambda=t - gamma_y - gamma_x,
            delta_y=delta_y,
        )
        if min(index) >= 0:
            yield index


def theta_cardinality(inp: BoundInput) -> int:
    return sum(1 for _ in theta(inp))


def theta_bound(inp: BoundInput) -> int:
    t, n = inp.t, inp.n
    return min((t + 1) ** 3, (t + 1) * (n + 1) ** 2)


def mbb_delta(inp: BoundInput) -> int:
    """
    Multilinear Bézout bound on the number of solutions of all Lagrange systems of rank r.

    Powers with a zero base and zero exponent count as 1.
    """
    ms, r, d, n, t = inp.m_star, inp.r, inp.d, inp.n, inp.t
    total = 0
    for k in theta(inp):
        total += (
            d ** k.alpha_y * r ** k.beta_u * (d - 1) ** k.gamma_y * d ** k.delta_y
            * multinomial(ms, k.alpha_u, k.alpha_y, k.alpha_x)
            * comb(ms, k.beta_u)
            * multinomial(t, k.gamma_y, k.gamma_x, k.gamma_lambda)
            * comb(n, k.delta_y)
        )
    return (r + 1) ** inp.c * total


def mbb_oracle(inp: BoundInput) -> int:
    """mbb_delta by expanding the product of block-linear forms and reading one coefficient."""
    ms, c, r, d, n, t = inp.m_star, inp.c, inp.r, inp.d, inp.n, inp.t
    _, tu, ty, tx, tl = ring("tu,ty,tx,tl", ZZ)
    P = ((tu + d * ty + tx) ** ms * (r * tu + tl) ** ms
         * ((d - 1) * ty + tx + tl) ** t * (d * ty + tl) ** n)
    coefficient = P.get((ms - c, t, n, c + ms), ZZ.zero)
    return int((r + 1) ** c * coefficient)


def delta_star(n: int, m: int) -> int:
    """Bound on the solution count of one Lagrange system of a generic m×m LMI in n variables."""
    ms = m * (m + 1) // 2
    if n > ms:
        return 0
    return comb(n + ms, n) ** 3


def delta_bar_star(inp: BoundInput) -> int:
    ms, c, r, d, t = inp.m_star, inp.c, inp.r, inp.d, inp.t
    value = (
        Fraction(6 * r + 6) ** ms
        * Fraction(d) ** (2 * t + ms)
        * (E_UPPER * Fraction(ms + c + t, ms + c)) ** (ms + c)
        * 3 ** t
        * theta_bound(inp)
    )
    return ceil(value)


def deg_g_bound(m: int, d: int) -> int:
    """Degree bound on the coefficients of det(A + λ·Id) when entries have degree ≤ d in y."""
    return m * (d + 1)


def bounds_table(inp: BoundInput) -> Dict[str, Any]:
    table = {
        "m": inp.m,
        "r": inp.r,
        "d": inp.d,
        "n": inp.n,
        "t": inp.t,
        "m_star": inp.m_star,
        "c": inp.c,
        "delta_star": delta_star(inp.n, inp.m),
        "deg_g": deg_g_bound(inp.m, inp.d),
        "theta": theta_cardinality(inp),
        "theta_bound": theta_bound(inp),
        "mbb_delta": mbb_delta(inp),
        "delta_bar_star": delta_bar_star(inp),
        "realdet_systems": expected_system_count(inp.m, inp.n),
    }
    logger.debug(f"Bounds for {inp}: {table}")
    return table
