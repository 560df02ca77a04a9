"""Bernoulli numbers, Bernoulli polynomials, and chi-twisted Bernoulli numbers.

Bernoulli numbers are exact rationals (convention B_1 = -1/2).  The twisted
values

    B_n(chi) = f^(n-1) * sum_{a=0}^{f-1} chi(a) * B_n(a/f),

with f the modulus of chi, feed both the closed-form L-value at
parity-matching integer arguments and the chi-Euler-Maclaurin tail.  The
rational inputs B_n(a/f) are evaluated exactly and converted to floating
point only at the very end: the defining polynomial alternates in sign and
exact arithmetic sidesteps the cancellation.  See Cohen, *Number Theory II*
(GTM 240), ch. 9 for the classical background.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, gcd

import mpmath
from mpmath import mp, mpc, mpf

from .mpcore import PrecisionContext, PreconditionError
from .chargroup import Character, _unit_roots


@lru_cache(maxsize=None)
def bernoulli_number(j: int) -> Fraction:
    """Exact Bernoulli number B_j (B_1 = -1/2)."""
    if j < 0:
        raise PreconditionError(f"index must be >= 0, got {j}")
    p, q = mpmath.bernfrac(j)
    return Fraction(int(p), int(q))


def bernoulli_poly_exact(n: int, x: Fraction) -> Fraction:
    """B_n(x) for rational x, evaluated exactly."""
    return sum(
        (bernoulli_number(j) * comb(n, j)) * x ** (n - j) for j in range(n + 1)
    )


def bernoulli_poly(n: int, x, ctx: PrecisionContext) -> mpf:
    """B_n(x) = sum_j C(n,j) B_j x^(n-j) at working precision, 0 <= x <= 1."""
    if n < 0:
        raise PreconditionError(f"degree must be >= 0, got {n}")
    if isinstance(x, Fraction):
        fr = bernoulli_poly_exact(n, x)
        with ctx.workprec():
            return mpf(fr.numerator) / fr.denominator
    with ctx.workprec():
        xv = mpf(x)
        if not 0 <= xv <= 1:
            raise PreconditionError("x must lie in [0, 1]")
        acc = mp.zero
        for j in range(n + 1):
            b = bernoulli_number(j)
            if b:
                acc += mpf(b.numerator * comb(n, j)) / b.denominator * xv ** (n - j)
        return acc


@lru_cache(maxsize=256)
def _bernoulli_row(f: int, n: int) -> tuple[Fraction, ...]:
    """Exact values (B_n(0/f), B_n(1/f), ..., B_n((f-1)/f)).

    With Q the lcm of the Bernoulli denominators up to n,

        Q * f^n * B_n(a/f) = sum_j [C(n,j) * (Q*B_j) * f^j] * a^(n-j)

    has integer coefficients, so the whole row is integer Horner evaluation;
    no rational arithmetic happens until the final division by Q * f^n.
    """
    if n == 0:
        return (Fraction(1),) * f
    bs = [bernoulli_number(j) for j in range(n + 1)]
    q_lcm = 1
    for b in bs:
        q_lcm = q_lcm * b.denominator // gcd(q_lcm, b.denominator)
    coeffs = [
        comb(n, j) * (q_lcm // bs[j].denominator) * bs[j].numerator * f**j
        for j in range(n + 1)
    ]  # coefficient of a^(n-j)
    den = q_lcm * f**n
    row = []
    for a in range(f):
        acc = 0
        for c in coeffs:
            acc = acc * a + c
        row.append(Fraction(acc, den))
    return tuple(row)


_chi_bernoulli_cache: dict[tuple[int, int, int, int], mpc] = {}


def chi_bernoulli(chi: Character, n: int, ctx: PrecisionContext) -> mpc:
    """Twisted Bernoulli number B_n(chi) at working precision.

    The modulus of chi itself plays the role of f in the defining sum (the
    definition makes sense for primitive and imprimitive characters alike).
    Classical vanishing is returned exactly: B_0(chi) = 0 and, whenever
    chi(-1) = (-1)^(n+1), B_n(chi) = 0 for every non-principal chi.
    """
    if n < 0:
        raise PreconditionError(f"degree must be >= 0, got {n}")
    f = chi.modulus
    key = (f, chi.index, n, ctx.prec_bits)
    cached = _chi_bernoulli_cache.get(key)
    if cached is not None:
        return cached
    with ctx.workprec():
        if not chi.is_principal and (n == 0 or (n + chi.parity) % 2 == 1):
            value = mpc(0)
        elif n == 0:
            # Principal character: f^(-1) * #units (equals B_0 = 1 for f = 1).
            value = mpc(mpf(sum(1 for a in range(f) if gcd(a, f) == 1)) / f)
        else:
            row = _bernoulli_row(f, n)
            roots = _unit_roots(chi.order, ctx.prec_bits)
            acc = mpc(0)
            for a in range(f):
                t = chi.value_table[a]
                if t is None:
                    continue
                fr = row[a]
                acc += roots[t] * (mpf(fr.numerator) / fr.denominator)
            value = acc * mpf(f) ** (n - 1)
    _chi_bernoulli_cache[key] = value
    return value
