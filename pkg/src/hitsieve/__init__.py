"""Certified mod-p sieving for specializations f(a^n, X) of integer polynomials."""

from .arith import FactoredInteger, factorize, is_prime, multiplicative_order, phi_tail_sum, pow_mod, prime_range
from .lemmas import LemmaCheckResult, many_primes_check, one_prime_check, phi_tail_check, zariski_check
from .pipeline import (
    CliqueResult,
    Disqualified,
    PrimeSite,
    clique_extract,
    d_ell_estimate,
    qualify,
    schedule_parameters,
    select_sites,
)
from .polymod import IntMultiPoly, PolyModP, degree_pattern, extract_root, has_root, specialize
from .sieve import (
    Certificate,
    DensityReport,
    Mode,
    SieveConfig,
    Verdict,
    brute_oracle,
    certify,
    density_sweep,
    irreducible_status,
    no_root_status,
)

__version__ = "0.1.0"
