"""Command-line front end with a persistent, append-only results store.

Subcommands
-----------
characters --q Q
    Print the character group mod Q (index, order, conductor, parity,
    primitivity, values on small residues).

compute --q Q [--a A] --digits D [--out PATH] [--params P,K,M,N,T]
    Compute C(Q, A) (or all residues coprime to Q, sharing one L-value
    cache), append the records to the store, and print each value truncated
    to min(40, certified) decimal places.  Re-running with identical
    parameters appends nothing and prints the cached records.

verify --results PATH [--qmax Q] [--report PATH]
    Run the product-over-residues identity for every fully covered modulus
    and every subprogression identity between covered moduli; write a JSON
    report.  Exit 0 iff every check passes.

The store is one JSON object per line with fields
{q, a, value, error_bound, certified_digits, params{P,K,M,N,T},
wall_time_s, tool_version}; values are decimal strings so records are
reproducible bit-for-bit independent of any binary float format.
(q, a, params) is the dedup key.

The MERTENSAP_WORKDIR environment variable overrides the directory used
for default store/report paths.

Exit codes: 0 success; 2 precondition violation; 3 unmeetable error
budget; 4 verification failure; 5 internal numerical assertion.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .mpcore import (
    BudgetError,
    MertensError,
    NumericalAssertionError,
    PreconditionError,
    make_context,
)
from .chargroup import character_group
from .lfunc import BranchSafetyError
from .mertens import (
    ComputeParams,
    MertensResult,
    compute_all_residues,
    coprime_residues,
    param_candidates,
)
from .verify import verify_results

EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_BUDGET = 3
EXIT_VERIFICATION = 4
EXIT_NUMERICAL = 5


def _workdir() -> Path:
    return Path(os.environ.get("MERTENSAP_WORKDIR", "."))


class ResultsStore:
    """Append-only, line-delimited store of computed constants."""

    def __init__(self, path: Path):
        self.path = Path(path)

    def load(self) -> list[MertensResult]:
        if not self.path.exists():
            return []
        results = []
        with self.path.open() as fh:
            for line in fh:
                line = line.strip()
                if line:
                    results.append(result_from_record(json.loads(line)))
        return results

    def has(self, q: int, a: int, params: ComputeParams) -> bool:
        return any(
            r.q == q and r.a == a and r.params == params for r in self.load()
        )

    def append(self, result: MertensResult) -> bool:
        """Append unless an identical (q, a, params) record exists."""
        if self.has(result.q, result.a, result.params):
            return False
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a") as fh:
            fh.write(json.dumps(record_from_result(result)) + "\n")
        return True


def record_from_result(r: MertensResult) -> dict:
    return {
        "q": r.q,
        "a": r.a,
        "value": r.value,
        "error_bound": r.error_bound,
        "certified_digits": r.certified_digits,
        "params": asdict(r.params),
        "wall_time_s": r.wall_time,
        "tool_version": __version__,
    }


def result_from_record(d: dict) -> MertensResult:
    return MertensResult(
        q=d["q"],
        a=d["a"],
        value=d["value"],
        error_bound=d["error_bound"],
        certified_digits=d["certified_digits"],
        params=ComputeParams(**d["params"]),
        imag_residue=0.0,
        wall_time=d["wall_time_s"],
    )


def _truncate_for_display(result: MertensResult) -> str:
    digits = min(40, result.certified_digits)
    head, _, frac = result.value.partition(".")
    return f"{head}.{frac[:digits]}"


def _print_result(result: MertensResult, cached: bool = False) -> None:
    tag = " (cached)" if cached else ""
    print(
        f"C({result.q},{result.a}) = {_truncate_for_display(result)}  "
        f"[certified {result.certified_digits} digits, "
        f"error <= {result.error_bound}]{tag}"
    )


def cmd_characters(args) -> int:
    group = character_group(args.q)
    q = args.q
    show = list(range(min(q, 13))) if q > 1 else [0]
    header = ["index", "order", "conductor", "parity", "primitive"] + [
        f"chi({r})" for r in show
    ]
    rows = []
    for chi in group.characters:
        cells = [
            str(chi.index),
            str(chi.order),
            str(chi.conductor),
            "odd" if chi.parity else "even",
            "yes" if chi.primitive else "no",
        ]
        for r in show:
            t = chi.value_table[r % q] if q > 1 else 0
            if t is None:
                cells.append(".")
            elif t == 0:
                cells.append("1")
            elif 2 * t == chi.order:
                cells.append("-1")
            else:
                cells.append(f"e({t}/{chi.order})")
        rows.append(cells)
    widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(header)]
    print(f"{len(group)} Dirichlet character(s) mod {q}")
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for cells in rows:
        print("  ".join(c.ljust(w) for c, w in zip(cells, widths)))
    return EXIT_OK


def _parse_params(text: str) -> ComputeParams:
    try:
        p, k, m, n, t = (int(x) for x in text.split(","))
    except ValueError as exc:
        raise PreconditionError(
            f"--params expects five comma-separated integers P,K,M,N,T, got {text!r}"
        ) from exc
    return ComputeParams(P=p, K=k, M=m, N=n, T=t)


def cmd_compute(args) -> int:
    q = args.q
    if q < 3:
        raise PreconditionError(f"--q must be >= 3, got {q}")
    if args.a is not None and math.gcd(args.a, q) != 1:
        raise PreconditionError(f"--a must be coprime to q, got a = {args.a}, q = {q}")
    residues = [args.a] if args.a is not None else coprime_residues(q)
    store = ResultsStore(args.out if args.out else _workdir() / "results.jsonl")
    existing = {(r.q, r.a): r for r in store.load()}
    ctx = make_context(args.digits)

    if args.params is not None:
        candidates = [_parse_params(args.params)]
    else:
        candidates = param_candidates(q, args.digits)

    results: list[MertensResult] | None = None
    cached: list[MertensResult] | None = None
    for params in candidates:
        params.validate_for(q)
        hits = [
            existing[(q, a)]
            for a in residues
            if (q, a) in existing and existing[(q, a)].params == params
        ]
        if len(hits) == len(residues):
            # A rerun at these params would reproduce the stored records.
            if args.params is not None or all(
                r.certified_digits >= args.digits for r in hits
            ):
                cached = sorted(hits, key=lambda r: r.a)
                break
            continue  # stored schedule fell short; escalate
        results = compute_all_residues(q, params, ctx, residues)
        if args.params is not None or all(
            r.certified_digits >= args.digits for r in results
        ):
            break
        results = None
    if results is None and cached is None:
        raise BudgetError(
            f"no truncation schedule certified {args.digits} digits for q = {q}"
        )
    for r in cached or []:
        _print_result(r, cached=True)
    for r in results or []:
        store.append(r)
        _print_result(r)
    if results and any(r.certified_digits < args.digits for r in results):
        print(
            f"warning: certified digits below the requested {args.digits}",
            file=sys.stderr,
        )
        return EXIT_BUDGET
    return EXIT_OK


def cmd_verify(args) -> int:
    store = ResultsStore(args.results)
    if not store.path.exists():
        raise PreconditionError(f"results file {store.path} does not exist")
    records = store.load()
    report_path = Path(args.report) if args.report else _workdir() / "verification.json"
    if not records:
        print("warning: results store is empty; nothing to verify", file=sys.stderr)
        report = {
            "summary": {"total_checked": 0, "passed": 0, "failed": 0},
            "records": [],
        }
        report_path.parent.mkdir(parents=True, exist_ok=True)
        report_path.write_text(json.dumps(report, indent=2) + "\n")
        return EXIT_OK

    # Keep the best-certified record per (q, a).
    best: dict[tuple[int, int], MertensResult] = {}
    for r in records:
        key = (r.q, r.a)
        if key not in best or r.certified_digits > best[key].certified_digits:
            best[key] = r
    grouped: dict[int, list[MertensResult]] = {}
    for r in best.values():
        grouped.setdefault(r.q, []).append(r)
    digits = max(50, max(r.certified_digits for r in best.values()) + 10)
    ctx = make_context(digits)
    report = verify_results(grouped, ctx, qmax=args.qmax)
    payload = {
        "summary": {
            "total_checked": report.total_checked,
            "passed": report.passed,
            "failed": report.failed,
            "enumerated_total": report.enumerated_total,
            "enumerated_independent": report.enumerated_independent,
        },
        "records": [
            {
                "kind": rec.kind,
                "subject": list(rec.subject),
                "discrepancy": rec.discrepancy,
                "tolerance": rec.tolerance,
                "passed": rec.passed,
            }
            for rec in report.records
        ],
    }
    report_path.parent.mkdir(parents=True, exist_ok=True)
    report_path.write_text(json.dumps(payload, indent=2) + "\n")
    print(
        f"{report.total_checked} identity check(s): {report.passed} passed, "
        f"{report.failed} failed; report written to {report_path}"
    )
    for rec in report.records:
        if not rec.passed:
            print(
                f"FAIL {rec.kind} {rec.subject}: discrepancy {rec.discrepancy} "
                f"> tolerance {rec.tolerance}",
                file=sys.stderr,
            )
    return EXIT_OK if report.all_passed else EXIT_VERIFICATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mertensap",
        description=(
            "Certified high-precision constants of the Mertens product over "
            "primes in arithmetic progressions"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_chars = sub.add_parser("characters", help="print the character group mod q")
    p_chars.add_argument("--q", type=int, required=True)
    p_chars.set_defaults(func=cmd_characters)

    p_comp = sub.add_parser("compute", help="compute C(q, a) with certified digits")
    p_comp.add_argument("--q", type=int, required=True)
    p_comp.add_argument("--a", type=int, default=None, help="single residue (default: all)")
    p_comp.add_argument("--digits", type=int, default=100, help="certified digits target")
    p_comp.add_argument("--out", type=Path, default=None, help="results store path")
    p_comp.add_argument(
        "--params",
        type=str,
        default=None,
        help="override the truncation schedule as P,K,M,N,T",
    )
    p_comp.set_defaults(func=cmd_compute)

    p_ver = sub.add_parser("verify", help="check identities over stored results")
    p_ver.add_argument("--results", type=Path, required=True)
    p_ver.add_argument("--qmax", type=int, default=None)
    p_ver.add_argument("--report", type=Path, default=None)
    p_ver.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (BranchSafetyError, NumericalAssertionError) as exc:
        print(f"internal numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except MertensError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
