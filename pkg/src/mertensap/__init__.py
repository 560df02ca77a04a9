"""Certified high-precision Mertens product constants for primes in
arithmetic progressions, with Dirichlet characters, L-function special
values and a rigorous truncation-error ledger."""

__version__ = "0.1.0"

from .mpcore import (
    BudgetError,
    MertensError,
    NumericalAssertionError,
    PrecisionContext,
    PreconditionError,
    euler_phi,
    make_context,
    moebius,
    primes_upto,
)
from .chargroup import (
    CharGroup,
    Character,
    char_power,
    character_group,
    conductor,
    eval_char,
    induced_primitive,
)
from .bernoulli import bernoulli_number, bernoulli_poly, chi_bernoulli
from .lfunc import (
    BranchSafetyError,
    LogLValue,
    gauss_sum,
    l_euler_maclaurin,
    l_exact_matching_parity,
    l_value,
    log_l_truncated,
    root_number,
    root_number_theta,
    tail_log_bound,
    zeta_int,
)
from .mertens import (
    ComputeParams,
    LogLCache,
    MertensResult,
    alpha,
    build_l_cache,
    certified_compute,
    choose_params,
    compute_all_residues,
    compute_constant,
    coprime_residues,
    error_e1,
    error_e2,
    error_e4,
    finite_euler_product_log,
    s_sum,
)
from .verify import (
    VerificationRecord,
    VerificationReport,
    check_product_over_a,
    check_subprogression,
    enumerate_identities,
    verify_results,
)

__all__ = [name for name in dir() if not name.startswith("_")]
