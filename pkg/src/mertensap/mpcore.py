"""Precision management, fundamental constants, and elementary arithmetic helpers.

Everything downstream works at a fixed *working precision* that carries 30
guard decimal digits on top of the digits the caller asked for.  The guard
absorbs accumulated rounding (the longest sums in the pipeline have a few
times 10^4 terms of comparable size, i.e. at most ~5 digits of drift) plus
the well-conditioned final exponential and phi(q)-th root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

from mpmath import mp, mpf, workprec

GUARD_DIGITS = 30

#: Exponent margin used when deciding that a term is too small to move the
#: working-precision accumulator (see lfunc); 15 digits below working noise.
DROP_GUARD = 15


class MertensError(Exception):
    """Base class for all errors raised by this package."""


class PreconditionError(MertensError, ValueError):
    """An operation was called outside its documented domain."""


class BudgetError(MertensError):
    """No truncation schedule meets the requested error budget."""


class NumericalAssertionError(MertensError):
    """An internal numerical sanity check failed (indicates a bug)."""


def digits_to_bits(digits: int) -> int:
    """Decimal digits -> binary precision, rounded up, with a few spare bits."""
    return int(math.ceil(digits * math.log2(10))) + 4


@dataclass(frozen=True)
class PrecisionContext:
    """Immutable bundle of precision settings and cached constants.

    Attributes
    ----------
    target_digits : decimal digits the caller wants certified
    working_digits : decimal digits used internally (target + 30)
    prec_bits : binary working precision
    pi, euler_gamma, exp_minus_gamma : constants at working precision
    """

    target_digits: int
    working_digits: int
    prec_bits: int
    pi: mpf = field(repr=False)
    euler_gamma: mpf = field(repr=False)
    exp_minus_gamma: mpf = field(repr=False)

    def workprec(self):
        """Context manager switching mpmath to this context's precision."""
        return workprec(self.prec_bits)


def make_context(target_digits: int) -> PrecisionContext:
    """Build a PrecisionContext for ``target_digits`` certified digits.

    Rejects targets below 10: the closed-form error budgets assume a
    nontrivial precision request.
    """
    if target_digits < 10:
        raise PreconditionError(f"target_digits must be >= 10, got {target_digits}")
    working = target_digits + GUARD_DIGITS
    bits = digits_to_bits(working)
    with workprec(bits):
        pi = +mp.pi
        gamma = +mp.euler
        emg = mp.exp(-gamma)
    return PrecisionContext(
        target_digits=target_digits,
        working_digits=working,
        prec_bits=bits,
        pi=pi,
        euler_gamma=gamma,
        exp_minus_gamma=emg,
    )


@lru_cache(maxsize=None)
def _primes_upto_cached(limit: int) -> tuple[int, ...]:
    sieve = bytearray(b"\x01") * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, math.isqrt(limit) + 1):
        if sieve[p]:
            start = p * p
            sieve[start : limit + 1 : p] = b"\x00" * ((limit - start) // p + 1)
    return tuple(i for i, v in enumerate(sieve) if v)


def primes_upto(limit: int) -> list[int]:
    """All primes <= limit, ascending."""
    if limit < 2:
        raise PreconditionError(f"limit must be >= 2, got {limit}")
    return list(_primes_upto_cached(limit))


def moebius(k: int) -> int:
    """Moebius function mu(k) for k >= 1."""
    if k < 1:
        raise PreconditionError(f"k must be >= 1, got {k}")
    result = 1
    m = k
    p = 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            result = -result
        p += 1
    if m > 1:
        result = -result
    return result


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization as ascending (p, exponent) pairs."""
    if n < 1:
        raise PreconditionError(f"n must be >= 1, got {n}")
    out = []
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out.append((p, e))
        p += 1
    if m > 1:
        out.append((m, 1))
    return out


def euler_phi(n: int) -> int:
    """Euler totient phi(n)."""
    result = n
    for p, _ in factorize(n):
        result -= result // p
    return result


def prime_divisors(n: int) -> list[int]:
    return [p for p, _ in factorize(n)]


def divisors(n: int) -> list[int]:
    """All positive divisors of n, ascending."""
    divs = [1]
    for p, e in factorize(n):
        divs = [d * p**i for d in divs for i in range(e + 1)]
    return sorted(divs)


def mpf_to_decimal(x: mpf, frac_digits: int) -> str:
    """Decimal string of ``x`` truncated toward zero at ``frac_digits``
    digits after the point.  Exact: works on the binary mantissa/exponent,
    so equal inputs always produce identical strings.
    """
    if frac_digits < 0:
        raise PreconditionError("frac_digits must be >= 0")
    sign, man, exp, _ = mp.mpf(x)._mpf_
    if man == 0:
        return "0." + "0" * frac_digits if frac_digits else "0"
    scaled = man * 10**frac_digits
    n = scaled << exp if exp >= 0 else scaled >> (-exp)
    s = str(n).rjust(frac_digits + 1, "0")
    int_part, frac_part = s[: len(s) - frac_digits], s[len(s) - frac_digits :]
    body = f"{int_part}.{frac_part}" if frac_digits else int_part
    return "-" + body if sign else body


def mpf_to_decimal_sig(x: mpf, sig_digits: int) -> str:
    """Decimal string of ``x > 0`` truncated toward zero at ``sig_digits``
    significant digits.  Only supports the magnitudes the pipeline produces
    (values of order one); falls back to scientific notation otherwise.
    """
    if x <= 0:
        raise PreconditionError("mpf_to_decimal_sig expects a positive value")
    if x >= 1:
        int_digits = len(str(int(mp.floor(x))))
        if int_digits >= sig_digits:
            return mp.nstr(x, sig_digits)
        return mpf_to_decimal(x, sig_digits - int_digits)
    if x >= mpf("0.001"):
        s = mpf_to_decimal(x, sig_digits + 3)
        stripped = s[2:].lstrip("0")
        leading_zeros = len(s) - 2 - len(stripped)
        return s[: 2 + leading_zeros + sig_digits]
    return mp.nstr(x, sig_digits)


def bound_to_decimal(x: mpf, sig_digits: int = 4) -> str:
    """Scientific-notation string of an error bound, rounded *up* so the
    printed bound never understates the stored one.
    """
    if x == 0:
        return "0"
    if x < 0:
        raise PreconditionError("error bounds must be nonnegative")
    e10 = int(mp.floor(mp.log10(x)))
    mant = x / mpf(10) ** e10
    scale = 10 ** (sig_digits - 1)
    m_int = int(mp.ceil(mant * scale))
    if m_int >= 10 * scale:
        m_int = scale
        e10 += 1
    m_str = str(m_int)
    return f"{m_str[0]}.{m_str[1:]}e{e10:+03d}"
