"""Dirichlet L-functions at positive integer arguments, to working precision.

Evaluation strategy per character chi and integer n >= 1:

* principal chi:  L(chi, n) = zeta(n) * prod_{p | q} (1 - p^-n);
* otherwise reduce to the primitive character chi_f mod f = conductor(chi)
  and multiply the finite correction prod_{p | q} (1 - chi_f(p) p^-n) back:
    - chi_f(-1) = (-1)^n:  closed form via the root number and the twisted
      Bernoulli number B_n(chi_f) (Cohen, *Number Theory II*, Prop. 10.2.4),
    - mismatched parity:  chi-twisted Euler-Maclaurin expansion with an
      explicit remainder bound (op. cit., Cor. 9.4.18).

On top of that, ``log_l_truncated`` returns the Euler-product logarithm of
L_P(chi, n) = L(chi, n) * prod_{p <= P} (1 - chi(p) p^-n), i.e. the prime
tail sum_{p > P} sum_{m >= 1} chi(p)^m / (m p^(mn)).  For n >= 2 that
quantity is bounded by P^(1-n)/(n-1), so the principal branch of the log is
the right one; a hard |log| < 1/2 assertion turns any conceivable branch
slip into a loud failure instead of a silent one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from mpmath import mp, mpc, mpf

from .mpcore import (
    DROP_GUARD,
    MertensError,
    NumericalAssertionError,
    PrecisionContext,
    PreconditionError,
    make_context,
    prime_divisors,
    primes_upto,
)
from .chargroup import Character, _unit_roots, induced_primitive
from .bernoulli import bernoulli_number, chi_bernoulli


class BranchSafetyError(MertensError):
    """A truncated-product logarithm came out suspiciously large."""


@dataclass(frozen=True)
class LogLValue:
    """log of L_P(chi, n) together with how it was obtained.

    ``error_bound`` is the rigorous truncation error of the *method*
    (Euler-Maclaurin remainder over |L|, plus the dropped-term slack);
    floating-point rounding is covered by the guard digits instead.
    ``em_abs`` records |L_{T,N}| when the Euler-Maclaurin path ran, which
    feeds the aggregated L-evaluation error bound downstream.
    """

    char_index: int
    argument: int
    cutoff: int
    value: mpc
    method: str  # "exact-parity" | "euler-maclaurin" | "zeta-principal"
    error_bound: mpf
    em_abs: mpf | None = None


_zeta_cache: dict[tuple[int, int], mpf] = {}
_gauss_cache: dict[tuple[int, int, int], mpc] = {}
_class_sums_cache: dict[tuple[int, int, int, int], tuple] = {}


def zeta_int(n: int, ctx: PrecisionContext) -> mpf:
    """Riemann zeta at an integer n >= 2, working precision."""
    if n < 2:
        raise PreconditionError(f"zeta_int needs n >= 2, got {n}")
    key = (n, ctx.prec_bits)
    val = _zeta_cache.get(key)
    if val is None:
        with ctx.workprec():
            val = +mp.zeta(n)
        _zeta_cache[key] = val
    return val


def tail_log_bound(B: int, n: int) -> mpf:
    """The Euler-product tail bound |log L_B(chi, n)| <= B^(1-n)/(n-1)."""
    if n < 2:
        raise PreconditionError(f"tail bound needs n >= 2, got {n}")
    if B < 1:
        raise PreconditionError(f"cutoff must be >= 1, got {B}")
    return mpf(B) ** (1 - n) / (n - 1)


def gauss_sum(chi: Character, ctx: PrecisionContext) -> mpc:
    """Gauss sum tau(chi) = sum_{r=1}^{q} chi(r) e(r/q), primitive chi only.

    Imprimitive input is rejected: |tau| = sqrt(q) fails there and would
    silently corrupt the closed-form L-values.
    """
    if not chi.primitive:
        raise PreconditionError(f"gauss_sum requires a primitive character, got {chi!r}")
    q = chi.modulus
    key = (q, chi.index, ctx.prec_bits)
    val = _gauss_cache.get(key)
    if val is not None:
        return val
    with ctx.workprec():
        roots_chi = _unit_roots(chi.order, ctx.prec_bits)
        roots_q = _unit_roots(q, ctx.prec_bits)
        acc = mpc(0)
        for r in range(1, q + 1):
            t = chi.value_table[r % q]
            if t is None:
                continue
            acc += roots_chi[t] * roots_q[r % q]
        val = acc
    _gauss_cache[key] = val
    return val


def root_number(chi: Character, ctx: PrecisionContext) -> mpc:
    """Root number W(chi) = tau(chi) / (sqrt(q) i^e) for primitive chi."""
    tau = gauss_sum(chi, ctx)  # also enforces primitivity
    with ctx.workprec():
        w = tau / (mp.sqrt(chi.modulus) * mpc(0, 1) ** chi.parity)
        if abs(abs(w) - 1) >= mpf(10) ** -(ctx.working_digits - 10):
            raise NumericalAssertionError(
                f"|W(chi)| deviates from 1 for {chi!r}: {abs(w)}"
            )
        return w


def root_number_theta(chi: Character, ctx: PrecisionContext) -> mpc:
    """W(chi) by the theta-series route, independent of the Gauss sum.

    The theta function of a primitive chi mod q at the center of its
    functional equation gives, with e the parity,

        c(chi) = sum_{n>=1} chi(n) n^e e^(-pi n^2 / q),   W(chi) = c / conj(c).

    The n-sum is truncated once e^(-pi n^2 / q) drops below
    10^-(working + 10); the series decays so fast that no remainder
    bookkeeping is worthwhile.
    """
    if not chi.primitive:
        raise PreconditionError(
            f"root_number_theta requires a primitive character, got {chi!r}"
        )
    q = chi.modulus
    with ctx.workprec():
        digits = ctx.working_digits + 12
        nmax = math.isqrt(int(q * digits * math.log(10) / math.pi)) + 3
        roots = _unit_roots(chi.order, ctx.prec_bits)
        c = mpc(0)
        for n in range(1, nmax + 1):
            t = chi.value_table[n % q]
            if t is None:
                continue
            term = mp.exp(-ctx.pi * n * n / q)
            if chi.parity:
                term *= n
            c += roots[t] * term
        if abs(c) < mpf(10) ** -(ctx.working_digits // 2):
            raise NumericalAssertionError(
                f"theta series value of {chi!r} too close to zero to normalize"
            )
        return c / mp.conj(c)


def l_exact_matching_parity(chi: Character, n: int, ctx: PrecisionContext) -> mpc:
    """L(chi, n) by the closed form, valid for primitive chi with
    chi(-1) = (-1)^n:

        L(chi, n) = 1/2 * (-1)^(n-1+(n+e)/2) * W(chi) * sqrt(f)
                    * (2 pi / f)^n * conj(B_n(chi)) / n!
    """
    if not chi.primitive:
        raise PreconditionError(f"exact formula requires a primitive character, got {chi!r}")
    if n < 1:
        raise PreconditionError(f"argument must be >= 1, got {n}")
    if chi.is_principal and n == 1:
        raise PreconditionError("L(chi_0, 1) diverges")
    if (n + chi.parity) % 2 != 0:
        raise PreconditionError(
            f"parity mismatch: chi(-1) = (-1)^{chi.parity} but n = {n}"
        )
    f = chi.modulus
    w = root_number(chi, ctx)
    bn = chi_bernoulli(chi, n, ctx)
    with ctx.workprec():
        sign = -1 if (n - 1 + (n + chi.parity) // 2) % 2 else 1
        value = (
            sign
            * w
            * mp.sqrt(f)
            * (2 * ctx.pi / f) ** n
            * mp.conj(bn)
            / (2 * mpf(math.factorial(n)))
        )
        return value


def em_remainder_bound(modulus: int, s: int, N: int, T: int, ctx: PrecisionContext) -> mpf:
    """Closed-form bound for the Euler-Maclaurin remainder at (s, N, T):

        |E| <= (f^T |B_T| / T!) * s (s+1) ... (s+T-2) * N^(1-s-T)

    with f the modulus of the character being expanded."""
    bT = bernoulli_number(T)
    rising = math.prod(range(s, s + T - 1))
    with ctx.workprec():
        numer = abs(bT.numerator) * modulus**T * rising
        denom = bT.denominator * math.factorial(T)
        return mpf(numer) / mpf(denom) * mpf(N) ** (1 - s - T)


def _class_power_sums(f: int, s: int, N: int, ctx: PrecisionContext):
    """Per-residue-class partial power sums shared by all characters mod f:

        H(c) = sum_{0 < r < N, r = c (mod f), gcd(r, f) = 1} r^(-s).

    Terms below 10^-(working + DROP_GUARD) cannot move the accumulator and
    are dropped; the dropped mass (< N * 10^-D) is returned as slack and
    charged to the caller's error bound.
    """
    key = (f, s, N, ctx.working_digits)
    cached = _class_sums_cache.get(key)
    if cached is not None:
        return cached
    with ctx.workprec():
        drop_exp = ctx.working_digits + DROP_GUARD
        r_cut = N
        slack = mp.zero
        if s > 1:
            r_cut = int(math.ceil(10 ** (drop_exp / s))) + 1
            if r_cut >= N:
                r_cut = N
            else:
                slack = mpf(N) * mpf(10) ** -drop_exp
        one = mp.one
        sums = [mp.zero if math.gcd(c, f) == 1 else None for c in range(f)]
        for r in range(1, r_cut):
            c = r % f
            if sums[c] is None:
                continue
            sums[c] += one / r**s
        result = (tuple(sums), slack)
    _class_sums_cache[key] = result
    return result


def l_euler_maclaurin(
    chi: Character, s: int, N: int, T: int, ctx: PrecisionContext
) -> tuple[mpc, mpf]:
    """L(chi, s) for non-principal chi by the chi-twisted Euler-Maclaurin
    expansion of length N (a multiple of the modulus) and order T (even):

        L(chi, s) = sum_{r<N} chi(r)/r^s
                    - (1/N^s) sum_{j=1}^{T} (-1)^(j-1) B_j(chi)/j!
                              * s(s+1)...(s+j-2) / N^(j-1)  + R

    B_0(chi) = 0 for non-principal chi, which removes the (s-1)^-1 pole and
    is what makes the expansion usable down to s = 1.  The asymptotic series
    does not converge; the returned remainder bound is what certifies the
    truncation at j = T.  Returns (value, remainder_bound).
    """
    if chi.is_principal:
        raise PreconditionError("Euler-Maclaurin path requires a non-principal character")
    if s < 1:
        raise PreconditionError(f"argument must be >= 1, got {s}")
    if N % chi.modulus != 0:
        raise PreconditionError(f"N = {N} is not a multiple of the modulus {chi.modulus}")
    if T < 2 or T % 2 != 0:
        raise PreconditionError(f"T must be an even integer >= 2, got {T}")
    f = chi.modulus
    sums, slack = _class_power_sums(f, s, N, ctx)
    with ctx.workprec():
        roots = _unit_roots(chi.order, ctx.prec_bits)
        partial = mpc(0)
        for c in range(f):
            t = chi.value_table[c]
            if t is None or sums[c] is None:
                continue
            partial += roots[t] * sums[c]
        Nf = mpf(N)
        rho = mp.one  # s(s+1)...(s+j-2) / N^(j-1), starting at j = 1
        fact = mp.one
        corr = mpc(0)
        for j in range(1, T + 1):
            fact *= j
            bj = chi_bernoulli(chi, j, ctx)
            if bj != 0:
                term = bj / fact * rho
                corr += term if j % 2 else -term
            rho = rho * (s + j - 1) / Nf
        value = partial - corr / Nf**s
        bound = em_remainder_bound(f, s, N, T, ctx) + slack
    return value, bound


@lru_cache(maxsize=None)
def _em_schedule_for(modulus: int, s: int, working_digits: int) -> tuple[int, int]:
    """Smallest (N, T) on a fixed grid meeting a 10^-(working+5) remainder
    for a standalone Euler-Maclaurin evaluation (pipeline runs pass their
    own schedule instead)."""
    ctx = make_context(max(working_digits - 30, 10))
    target = mpf(10) ** -(working_digits + 5)
    for mult in (48, 64, 88, 120, 168, 232, 320, 448, 624, 864, 1200, 1664):
        N = modulus * mult
        best = None
        for T in range(8, 640, 2):
            b = em_remainder_bound(modulus, s, N, T, ctx)
            if b <= target:
                return N, T
            if best is not None and b > best:
                break  # divergent turnaround; growing T cannot help at this N
            best = b
    raise MertensError(
        f"no Euler-Maclaurin schedule reaches 10^-{working_digits + 5} "
        f"for modulus {modulus}, s = {s}"
    )


def default_em_schedule(modulus: int, s: int, ctx: PrecisionContext) -> tuple[int, int]:
    return _em_schedule_for(modulus, s, ctx.working_digits)


def l_value(
    chi: Character,
    n: int,
    ctx: PrecisionContext,
    schedule: tuple[int, int] | None = None,
) -> mpc:
    """Full L(chi, n): principal route via zeta, otherwise reduction to the
    primitive character followed by the exact-parity or Euler-Maclaurin
    evaluation, with the imprimitivity factors multiplied back."""
    if n < 1:
        raise PreconditionError(f"argument must be >= 1, got {n}")
    q = chi.modulus
    if chi.is_principal:
        if n == 1:
            raise PreconditionError("L(chi_0, 1) diverges")
        with ctx.workprec():
            value = mpc(zeta_int(n, ctx))
            for p in prime_divisors(q):
                value *= 1 - mpf(p) ** -n
            return value
    chif = induced_primitive(chi)
    if (n + chif.parity) % 2 == 0:
        lf = l_exact_matching_parity(chif, n, ctx)
    else:
        if schedule is None:
            schedule = default_em_schedule(chif.modulus, n, ctx)
        N, T = schedule
        lf, _ = l_euler_maclaurin(chif, n, N, T, ctx)
    with ctx.workprec():
        roots = _unit_roots(chif.order, ctx.prec_bits)
        value = mpc(lf)
        for p in prime_divisors(q):
            t = chif.value_table[p % chif.modulus]
            if t is None:
                continue
            value *= 1 - roots[t] * (mp.one / mpf(p) ** n)
        return value


def log_l_truncated(
    chi: Character,
    n: int,
    P: int,
    ctx: PrecisionContext,
    schedule: tuple[int, int] | None = None,
) -> LogLValue:
    """Principal-branch logarithm of L_P(chi, n) = L(chi, n) *
    prod_{p <= P} (1 - chi(p) p^-n), with a rigorous method-error bound.

    The finite product is taken over the primitive character inducing chi:
    for p <= P the two differ only at p | q, where chi(p) = 0 contributes a
    factor 1 while the reduction identity wants (1 - chi_f(p) p^-n); with
    P >= q both corrections merge into one pass over the primes up to P.
    """
    q = chi.modulus
    if P < q:
        raise PreconditionError(f"cutoff P = {P} must be >= modulus {q}")
    if chi.is_principal and n == 1:
        raise PreconditionError("log L_P(chi_0, 1) diverges")
    with ctx.workprec():
        drop_exp = ctx.working_digits + DROP_GUARD
        p_eff = P if n == 1 else min(P, int(10 ** (drop_exp / n)) + 1)
        plist = primes_upto(P) if P >= 2 else []
        method = "zeta-principal"
        em_abs = None
        bound = mp.zero
        if chi.is_principal:
            prod = mpf(zeta_int(n, ctx))
            one = mp.one
            for p in plist:
                if p > p_eff:
                    break
                prod *= 1 - one / mpf(p**n)
            value = mp.log(prod)
        else:
            chif = induced_primitive(chi)
            if (n + chif.parity) % 2 == 0:
                lf = l_exact_matching_parity(chif, n, ctx)
                method = "exact-parity"
            else:
                if schedule is None:
                    schedule = default_em_schedule(chif.modulus, n, ctx)
                N, T = schedule
                lf, em_bound = l_euler_maclaurin(chif, n, N, T, ctx)
                method = "euler-maclaurin"
                em_abs = abs(lf)
                # |log L_P - log(Pi * L_{T,N})| <= |E / L_{T,N}|
                bound += em_bound / em_abs
            roots = _unit_roots(chif.order, ctx.prec_bits)
            fm = chif.modulus
            prod = mpc(lf)
            one = mp.one
            for p in plist:
                if p > p_eff:
                    break
                t = chif.value_table[p % fm]
                if t is None:
                    continue
                prod *= 1 - roots[t] * (one / mpf(p**n))
            value = mp.log(prod)
        if p_eff < P:
            # Skipped factors each shift the log by less than 10^-drop_exp.
            bound += mpf(len(plist)) * mpf(10) ** -drop_exp
        if abs(value) >= mpf("0.5"):
            raise BranchSafetyError(
                f"|log L_P| = {abs(value)} >= 1/2 for chi index {chi.index} "
                f"mod {q} at n = {n}, P = {P}; principal branch not trustworthy"
            )
    return LogLValue(
        char_index=chi.index,
        argument=n,
        cutoff=P,
        value=value,
        method=method,
        error_bound=bound,
        em_abs=em_abs,
    )
