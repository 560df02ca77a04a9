"""Assembly of the Mertens constants C(q, a) with a rigorous error ledger.

C(q, a) is the constant in

    prod_{p <= x, p = a (mod q)} (1 - 1/p)  ~  C(q, a) / (log x)^(1/phi(q)),

and satisfies

    C(q, a)^phi(q) = e^(-gamma) * prod_p (1 - 1/p)^alpha(p; q, a),

with alpha = phi(q) - 1 when p = a (mod q) and -1 otherwise.  Splitting the
product at a prime cutoff P and expanding the tail through Dirichlet
L-functions gives

    phi(q) log C(q, a) = -gamma + log prod_{p <= P} (1 - 1/p)^alpha(p;q,a)
        - sum_{chi != chi_0} conj(chi)(a)
              sum_{m <= M} (1/m) sum_{k <= K} (mu(k)/k) log L_P(chi^k, km)
        - E_1 - E_2,

where E_1 and E_2 are the explicit bounds for the k- and m-truncations and
every log L_P value carries its own method error (aggregated into E_4 for
the Euler-Maclaurin evaluations).  The computed approximation is

    C~(q, a) = exp[(-gamma + F - Re S) / phi(q)],
    |C - C~| <= C~ * (E_1 + E_2 + E_4) / phi(q).

The (m, k) double sum is evaluated directly in that form (not regrouped by
n = km): the truncation bounds are stated for exactly this shape.  All
accumulations run in a fixed order (character index, then m, then k) so
results are bit-identical between runs and cache-sharing setups.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

from mpmath import mp, mpc, mpf

from .mpcore import (
    BudgetError,
    NumericalAssertionError,
    PrecisionContext,
    PreconditionError,
    bound_to_decimal,
    euler_phi,
    make_context,
    moebius,
    mpf_to_decimal_sig,
    primes_upto,
)
from .chargroup import _unit_roots, char_power, character_group
from .bernoulli import bernoulli_number
from .lfunc import LogLValue, log_l_truncated


@dataclass(frozen=True)
class ComputeParams:
    """Truncation schedule: prime cutoff P, Moebius depth K, power depth M,
    Euler-Maclaurin length N (a multiple of q) and order T (even)."""

    P: int
    K: int
    M: int
    N: int
    T: int

    def validate_for(self, q: int) -> None:
        if self.P < q:
            raise PreconditionError(f"P = {self.P} must be >= q = {q}")
        if self.K < 2 or self.M < 2:
            raise PreconditionError("K and M must be >= 2")
        if self.N % q != 0:
            raise PreconditionError(f"N = {self.N} must be a multiple of q = {q}")
        if self.T < 2 or self.T % 2:
            raise PreconditionError(f"T must be an even integer >= 2, got {self.T}")


@dataclass
class LogLCache:
    """Memoized log L_P(chi^k, km) values for one modulus, shared by every
    residue class a, plus the running minimum U of |L_{T,N}| over the
    entries that went through the Euler-Maclaurin path (U feeds E_4)."""

    q: int
    params: ComputeParams
    entries: dict[tuple[int, int], LogLValue] = field(default_factory=dict)
    U: mpf | None = None

    def get(self, char_index: int, n: int) -> LogLValue:
        try:
            return self.entries[(char_index, n)]
        except KeyError:
            raise NumericalAssertionError(
                f"log-L cache miss for character {char_index}, n = {n} "
                f"(mod {self.q}); the cache build is incomplete"
            ) from None


def coprime_residues(q: int) -> list[int]:
    return [a for a in range(1, q + 1) if math.gcd(a, q) == 1]


def alpha(p: int, q: int, a: int) -> int:
    """Exponent of (1 - 1/p) in the product defining C(q,a)^phi(q):
    phi(q) - 1 when p = a (mod q), else -1."""
    if math.gcd(a, q) != 1:
        raise PreconditionError(f"need gcd(a, q) = 1, got a = {a}, q = {q}")
    return euler_phi(q) - 1 if p % q == a % q else -1


def finite_euler_product_log(q: int, a: int, P: int, ctx: PrecisionContext) -> mpf:
    """log prod_{p <= P} (1 - 1/p)^alpha(p; q, a), summed in ascending p."""
    if math.gcd(a, q) != 1:
        raise PreconditionError(f"need gcd(a, q) = 1, got a = {a}, q = {q}")
    if P < 2:
        return mp.zero
    phi_minus_1 = euler_phi(q) - 1
    a_mod = a % q
    with ctx.workprec():
        total = mp.zero
        for p in primes_upto(P):
            coeff = phi_minus_1 if p % q == a_mod else -1
            total += coeff * mp.log(mpf(p - 1) / p)
        return total


def build_l_cache(q: int, params: ComputeParams, ctx: PrecisionContext) -> LogLCache:
    """Compute every log L_P(chi^k, km) the sum S(q, a) needs, once each.

    Keys are (canonical index of chi^k, km); terms with mu(k) = 0 never
    enter S and are skipped.  km = 1 forces k = 1 and a non-principal
    character, so the principal character is never requested at argument 1.
    """
    params.validate_for(q)
    group = character_group(q)
    cache = LogLCache(q=q, params=params)
    schedule = (params.N, params.T)
    for chi in group.characters:
        if chi.is_principal:
            continue
        for m in range(1, params.M + 1):
            for k in range(1, params.K + 1):
                if moebius(k) == 0:
                    continue
                psi = char_power(chi, k)
                key = (psi.index, k * m)
                if key in cache.entries:
                    continue
                entry = log_l_truncated(psi, k * m, params.P, ctx, schedule=schedule)
                cache.entries[key] = entry
                if entry.em_abs is not None:
                    if cache.U is None or entry.em_abs < cache.U:
                        cache.U = entry.em_abs
    return cache


def s_sum(q: int, a: int, cache: LogLCache, ctx: PrecisionContext) -> mpc:
    """S(q, a) = sum_{chi != chi_0} conj(chi)(a) sum_{m <= M} (1/m)
    sum_{k <= K} (mu(k)/k) log L_P(chi^k, km), in fixed (chi, m, k) order.

    The imaginary part should cancel to rounding level because chi and
    conj(chi) contribute conjugate terms; it is returned for diagnostics.
    """
    if math.gcd(a, q) != 1:
        raise PreconditionError(f"need gcd(a, q) = 1, got a = {a}, q = {q}")
    group = character_group(q)
    params = cache.params
    with ctx.workprec():
        total = mpc(0)
        for chi in group.characters:
            if chi.is_principal:
                continue
            t = chi.value_table[a % q]
            conj_chi_a = _unit_roots(chi.order, ctx.prec_bits)[(-t) % chi.order]
            per_chi = mpc(0)
            for m in range(1, params.M + 1):
                per_m = mpc(0)
                for k in range(1, params.K + 1):
                    mu = moebius(k)
                    if mu == 0:
                        continue
                    psi = char_power(chi, k)
                    value = cache.get(psi.index, k * m).value
                    per_m += (mpf(mu) / k) * value
                per_chi += per_m / m
            total += conj_chi_a * per_chi
        return total


def error_e1(q: int, P: int, K: int) -> mpf:
    """Bound for the Moebius-depth truncation:
    |E_1| <= 2 P (phi(q)-1) / (2K (P-1) (P^K - 1))."""
    if P < 2 or K < 2:
        raise PreconditionError("error_e1 needs P >= 2, K >= 2")
    return mpf(2 * P * (euler_phi(q) - 1)) / mpf(2 * K * (P - 1) * (P**K - 1))


def error_e2(q: int, P: int, M: int) -> mpf:
    """Bound for the power-depth truncation:
    |E_2| <= P (phi(q)-1) / (M (M-1) (P-1) P^M)."""
    if P < 2 or M < 2:
        raise PreconditionError("error_e2 needs P >= 2, M >= 2")
    return mpf(P * (euler_phi(q) - 1)) / mpf(M * (M - 1) * (P - 1) * P**M)


def error_e4(q: int, params: ComputeParams, U, ctx: PrecisionContext) -> mpf:
    """Aggregated Euler-Maclaurin evaluation error over all (m, k) pairs:

        |E_4| <= 2 (phi(q)-1) (KM+T-2)^(T-2) q^T |B_T|
                 / ((N-1) U N^(T-1) T!)

    where U is the observed minimum of |L_{T,N}| over the cache entries the
    Euler-Maclaurin path produced.  ``U is None`` (no such entries) gives 0.
    """
    if U is None:
        return mp.zero
    K, M, N, T = params.K, params.M, params.N, params.T
    with ctx.workprec():
        u = mpf(U)
        if u <= 0:
            raise NumericalAssertionError(
                "U <= 0: an Euler-Maclaurin L-value collapsed to zero, "
                "its logarithm is unreliable"
            )
        bT = bernoulli_number(T)
        numer = 2 * (euler_phi(q) - 1) * (K * M + T - 2) ** (T - 2) * q**T * abs(bT.numerator)
        denom = (N - 1) * N ** (T - 1) * math.factorial(T) * bT.denominator
        return mpf(numer) / mpf(denom) / u


def _pessimistic_e4(q: int, params: ComputeParams, ctx: PrecisionContext) -> mpf:
    # A-priori stand-in before any L-value exists: U = 1/2 is mildly
    # pessimistic (observed minima sit between ~0.2 and ~1); the doubled
    # weight in the budget predicate plus the posterior re-check with the
    # true U cover the gap.
    return error_e4(q, params, mpf("0.5"), ctx)


_C_GRID_POINTS = 12


def _geometric_grid(lo: int, hi: int, points: int = _C_GRID_POINTS) -> list[int]:
    ratio = (hi / lo) ** (1 / (points - 1))
    grid = sorted({int(round(lo * ratio**i)) for i in range(points)})
    grid[-1] = hi
    return grid


def param_candidates(q: int, target_digits: int):
    """A-priori truncation schedules, weakest acceptable first.

    At target 100 the cutoff and depths are pinned (P = 9600, K = M = 26)
    and q in {3..10} / {90..100} start from the reference schedules
    N = (floor(16800/q)+1) q, T = 88 and N = (floor(40320/q)+1) q, T = 204.
    Everything else walks (T, N) lexicographically over an even-T ladder and
    a geometric N grid until the budget predicate

        E_1 + E_2 + 2 * E_4[U = 1/2]  <=  phi(q) * 10^-(target+2)

    holds, which makes the final certified digits reach the target with
    margin.  Yields every passing schedule so a caller can escalate if the
    posterior (true-U) check fails.
    """
    if q < 3:
        raise PreconditionError(f"q must be >= 3, got {q}")
    if target_digits < 10:
        raise PreconditionError("target_digits must be >= 10")
    ctx = make_context(target_digits)
    scale = target_digits / 100
    P = max(96 * q, math.ceil(9600 * scale))
    if target_digits == 100:
        K = M = 26
    else:
        budget_km = euler_phi(q) * mpf(10) ** -(target_digits + 2) / 4
        K = next(k for k in range(2, 600) if error_e1(q, P, k) <= budget_km)
        M = next(m for m in range(2, 600) if error_e2(q, P, m) <= budget_km)

    budget = euler_phi(q) * mpf(10) ** -(target_digits + 2)
    e12 = error_e1(q, P, K) + error_e2(q, P, M)

    def passes(params: ComputeParams) -> bool:
        return e12 + 2 * _pessimistic_e4(q, params, ctx) <= budget

    seen = set()
    if target_digits == 100 and (3 <= q <= 10 or 90 <= q <= 100):
        c, T = (16800, 88) if q <= 10 else (40320, 204)
        params = ComputeParams(P=P, K=K, M=M, N=(c // q + 1) * q, T=T)
        seen.add((params.N, params.T))
        yield params

    t_lo = max(8, 2 * math.ceil(88 * scale / 2))
    t_hi = max(208, 4 + 2 * math.ceil(204 * scale / 2))
    c_lo = max(q + 1, math.ceil(16800 * scale))
    c_hi = max(2 * c_lo, math.ceil(40320 * scale))
    for T in range(t_lo, t_hi + 1, 4):
        for c in _geometric_grid(c_lo, c_hi):
            N = (c // q + 1) * q
            if (N, T) in seen:
                continue
            seen.add((N, T))
            params = ComputeParams(P=P, K=K, M=M, N=N, T=T)
            if passes(params):
                yield params


def choose_params(q: int, target_digits: int) -> ComputeParams:
    """First schedule whose a-priori error budget meets the target."""
    for params in param_candidates(q, target_digits):
        return params
    raise BudgetError(
        f"no truncation schedule on the search grid certifies "
        f"{target_digits} digits for q = {q}"
    )


@dataclass(frozen=True)
class MertensResult:
    """One computed constant with its certification metadata.

    ``value`` and ``error_bound`` are decimal strings (value truncated at
    working precision, bound rounded up); ``certified_digits`` counts the
    decimal digits guaranteed correct given the error ledger.
    """

    q: int
    a: int
    value: str
    error_bound: str
    certified_digits: int
    params: ComputeParams
    imag_residue: float
    wall_time: float


def compute_constant(
    q: int,
    a: int,
    params: ComputeParams,
    ctx: PrecisionContext,
    cache: LogLCache | None = None,
) -> MertensResult:
    """C~(q, a) = exp[(-gamma + F - Re S)/phi(q)] with its error bound
    E_final = C~ (E_1 + E_2 + E_4)/phi(q) and certified digit count."""
    if q < 3:
        raise PreconditionError(f"q must be >= 3, got {q}")
    if math.gcd(a, q) != 1:
        raise PreconditionError(f"need gcd(a, q) = 1, got a = {a}, q = {q}")
    params.validate_for(q)
    start = time.perf_counter()
    if cache is None:
        cache = build_l_cache(q, params, ctx)
    phi = euler_phi(q)
    with ctx.workprec():
        F = finite_euler_product_log(q, a, params.P, ctx)
        S = s_sum(q, a, cache, ctx)
        value = mp.exp((-ctx.euler_gamma + F - S.real) / phi)
        e_total = (
            error_e1(q, params.P, params.K)
            + error_e2(q, params.P, params.M)
            + error_e4(q, params, cache.U, ctx)
        )
        error_bound = value * e_total / phi
        imag_residue = abs(S.imag) / phi
        if imag_residue > mpf(10) ** -ctx.target_digits:
            raise NumericalAssertionError(
                f"imaginary residue {mp.nstr(imag_residue, 5)} of S({q}, {a}) "
                f"exceeds the error budget; conjugate pairing is broken"
            )
        certified = int(mp.floor(-mp.log10(e_total / phi))) - 1
        certified = max(0, min(certified, ctx.working_digits))
        value_str = mpf_to_decimal_sig(value, ctx.working_digits)
        error_str = bound_to_decimal(error_bound)
        imag_f = float(imag_residue)
    return MertensResult(
        q=q,
        a=a,
        value=value_str,
        error_bound=error_str,
        certified_digits=certified,
        params=params,
        imag_residue=imag_f,
        wall_time=time.perf_counter() - start,
    )


def compute_all_residues(
    q: int,
    params: ComputeParams,
    ctx: PrecisionContext,
    residues: list[int] | None = None,
) -> list[MertensResult]:
    """Constants for every residue coprime to q (or the subset requested),
    all sharing one log-L cache.  Each result is bit-identical to what a
    standalone compute_constant call produces."""
    if q < 3:
        raise PreconditionError(f"q must be >= 3, got {q}")
    cache = build_l_cache(q, params, ctx)
    targets = residues if residues is not None else coprime_residues(q)
    return [compute_constant(q, a, params, ctx, cache) for a in targets]


def certified_compute(
    q: int,
    target_digits: int,
    residues: list[int] | None = None,
    ctx: PrecisionContext | None = None,
) -> list[MertensResult]:
    """Compute with schedule escalation: walk the a-priori candidate
    schedules until the posterior certified-digit count (which uses the true
    U instead of the 1/2 placeholder) reaches the target."""
    if ctx is None:
        ctx = make_context(target_digits)
    tried = 0
    for params in param_candidates(q, target_digits):
        tried += 1
        results = compute_all_residues(q, params, ctx, residues)
        if all(r.certified_digits >= target_digits for r in results):
            return results
    raise BudgetError(
        f"no schedule certified {target_digits} digits for q = {q} "
        f"({tried} candidates tried)"
    )
