"""Consistency verification of computed constants against closed-form identities.

Two families of identities tie the constants together:

  * product over a residue system:
        prod_{(a,q)=1} C(q, a) = e^(-gamma) * q / phi(q);

  * subprogression refinement, for q1 | q2 with n = q2/q1 and (a, q1) = 1:
        C(q1, a) = prod_{j=0, (a+j*q1, q2)=1}^{n-1} C(q2, a + j*q1)
                   * prod_{p | q2, p = a (mod q1)} (1 - 1/p),
    because the class a mod q1 is the disjoint union of the classes
    a + j*q1 mod q2, up to the primes dividing q2 that the coprimality
    filter drops.

Each check compares against a tolerance propagated to first order from the
participating results' certified error bounds, so a pass is a genuine
certification rather than a fixed-epsilon eyeball.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

from mpmath import mp, mpf

from .mpcore import (
    PrecisionContext,
    PreconditionError,
    bound_to_decimal,
    divisors,
    euler_phi,
    prime_divisors,
    primes_upto,
)
from .mertens import MertensResult, coprime_residues


@dataclass(frozen=True)
class VerificationRecord:
    kind: str  # "product-over-a" | "subprogression"
    subject: tuple
    discrepancy: str
    tolerance: str
    passed: bool


@dataclass(frozen=True)
class VerificationReport:
    records: tuple[VerificationRecord, ...]
    total_checked: int
    passed: int
    failed: int
    enumerated_total: int | None = None
    enumerated_independent: int | None = None

    @property
    def all_passed(self) -> bool:
        return self.failed == 0


def _values_and_rel_errors(results: list[MertensResult], ctx: PrecisionContext):
    vals, rels = [], []
    for r in results:
        v = mpf(r.value)
        vals.append(v)
        rels.append(mpf(r.error_bound) / v)
    return vals, rels


def check_product_over_a(
    results: list[MertensResult], ctx: PrecisionContext
) -> VerificationRecord:
    """Check prod_a C(q, a) = e^(-gamma) q / phi(q) for one modulus."""
    if not results:
        raise PreconditionError("no results supplied")
    q = results[0].q
    covered = sorted(r.a for r in results)
    if covered != coprime_residues(q) or any(r.q != q for r in results):
        raise PreconditionError(
            f"results must cover exactly the residues coprime to {q}, got {covered}"
        )
    ordered = sorted(results, key=lambda r: r.a)
    with ctx.workprec():
        vals, rels = _values_and_rel_errors(ordered, ctx)
        prod = mp.one
        for v in vals:
            prod *= v
        target = ctx.exp_minus_gamma * q / euler_phi(q)
        discrepancy = abs(prod - target)
        tolerance = prod * sum(rels) * mpf("1.01") + mpf(10) ** -(ctx.working_digits - 10)
        passed = discrepancy <= tolerance
        return VerificationRecord(
            kind="product-over-a",
            subject=(q,),
            discrepancy=bound_to_decimal(discrepancy) if discrepancy else "0",
            tolerance=bound_to_decimal(tolerance),
            passed=bool(passed),
        )


def check_subprogression(
    q1: int,
    q2: int,
    a: int,
    results_q1: list[MertensResult],
    results_q2: list[MertensResult],
    ctx: PrecisionContext,
) -> VerificationRecord:
    """Check the refinement of the class a mod q1 into classes mod q2."""
    if q2 % q1 != 0 or not (1 < q1 < q2):
        raise PreconditionError(f"need q1 | q2 with 1 < q1 < q2, got {q1}, {q2}")
    if math.gcd(a, q1) != 1:
        raise PreconditionError(f"need gcd(a, q1) = 1, got a = {a}, q1 = {q1}")
    by_a1 = {r.a: r for r in results_q1 if r.q == q1}
    by_a2 = {r.a: r for r in results_q2 if r.q == q2}
    if a not in by_a1:
        raise PreconditionError(f"missing C({q1}, {a})")
    n = q2 // q1
    members = [a + j * q1 for j in range(n) if math.gcd(a + j * q1, q2) == 1]
    missing = [r for r in members if r not in by_a2]
    if missing:
        raise PreconditionError(f"missing C({q2}, a) for a in {missing}")
    lhs_res = by_a1[a]
    rhs_res = [by_a2[r] for r in members]
    with ctx.workprec():
        lhs = mpf(lhs_res.value)
        lhs_err = mpf(lhs_res.error_bound)
        vals, rels = _values_and_rel_errors(rhs_res, ctx)
        rhs = mp.one
        for v in vals:
            rhs *= v
        for p in prime_divisors(q2):
            if p % q1 == a % q1:
                rhs *= mpf(p - 1) / p
        discrepancy = abs(lhs - rhs)
        tolerance = (
            lhs_err
            + rhs * sum(rels) * mpf("1.01")
            + mpf(10) ** -(ctx.working_digits - 10)
        )
        passed = discrepancy <= tolerance
        return VerificationRecord(
            kind="subprogression",
            subject=(q1, q2, a),
            discrepancy=bound_to_decimal(discrepancy) if discrepancy else "0",
            tolerance=bound_to_decimal(tolerance),
            passed=bool(passed),
        )


def enumerate_identities(qmax: int) -> tuple[int, int, list[tuple[int, int, int]]]:
    """All subprogression identity triples (q1, q2, a) with q2 <= qmax,
    q1 | q2, 1 < q1 < q2 and (a, q1) = 1, plus the two closed-form counts.

    total:       sum_{q=3}^{qmax} (q - 1 - phi(q)), the number of triples
                 (the inner sum over proper divisors d of q of phi(d)).
    independent: the count of prime-ratio relations, each modulus linked to
                 q/p for a prime p | q; the chain is counted all the way
                 down to the trivial modulus, where the relation for a prime
                 q2 = p is the plain Mertens normalization (q1 = 1).  In
                 closed form: sum_{n>=1} pi(qmax/n) phi(n).
    """
    if qmax < 3:
        raise PreconditionError(f"qmax must be >= 3, got {qmax}")
    triples = [
        (q1, q2, a)
        for q2 in range(3, qmax + 1)
        for q1 in divisors(q2)
        if 1 < q1 < q2
        for a in range(1, q1 + 1)
        if math.gcd(a, q1) == 1
    ]
    total = sum(q - 1 - euler_phi(q) for q in range(3, qmax + 1))
    plist = primes_upto(qmax)

    def pi(x: int) -> int:
        return bisect.bisect_right(plist, x)

    independent = sum(pi(qmax // n) * euler_phi(n) for n in range(1, qmax + 1))
    return total, independent, triples


def verify_results(
    grouped: dict[int, list[MertensResult]],
    ctx: PrecisionContext,
    qmax: int | None = None,
) -> VerificationReport:
    """Run every runnable identity over the supplied per-modulus results:
    one product check per fully covered q, and every enumerable
    subprogression triple whose two moduli are both fully covered."""
    full = {
        q: results
        for q, results in grouped.items()
        if sorted(r.a for r in results) == coprime_residues(q)
    }
    records: list[VerificationRecord] = []
    for q in sorted(full):
        records.append(check_product_over_a(full[q], ctx))
    top = qmax if qmax is not None else (max(full) if full else 3)
    top = max(top, 3)
    total_enum, indep_enum, triples = enumerate_identities(top)
    for q1, q2, a in triples:
        if q1 in full and q2 in full:
            records.append(
                check_subprogression(q1, q2, a, full[q1], full[q2], ctx)
            )
    passed = sum(1 for r in records if r.passed)
    return VerificationReport(
        records=tuple(records),
        total_checked=len(records),
        passed=passed,
        failed=len(records) - passed,
        enumerated_total=total_enum,
        enumerated_independent=indep_enum,
    )
