"""Reproducible numerical checks of the reduction lemmas.

Each check measures a quantity exactly (or by seeded sampling where
exhaustive enumeration is out of reach) and compares it with a bound whose
implied constant is a configured tolerance.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .arith import phi_tail_sum
from .pipeline import PrimeSite
from .polymod import IntMultiPoly, PolyModP, eval_t_mod, has_root

ONE_PRIME_CTOL = 3.0
MANY_PRIMES_CTOL = 5.0
ZARISKI_CTOL = 10.0
PHI_TAIL_FACTOR = 4.0

ONE_PRIME_MAX_P = {1: 10**4, 2: 2 * 10**3}
MANY_PRIMES_MAX_M = 10**7
MANY_PRIMES_DRAWS = 10**6


class EnumerationTooLarge(ValueError):
    pass


@dataclass
class LemmaCheckResult:
    lemma_id: str
    params: dict
    measured: float
    bound: float
    passed: bool
    details: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return self.bound - self.measured

    def to_json(self) -> str:
        return json.dumps({**asdict(self), "slack": self.slack}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> LemmaCheckResult:
        data = json.loads(text)
        data.pop("slack")
        return cls(**data)

    CSV_HEADER = ("lemma_id", "params", "measured", "bound", "slack", "pass", "details")

    def csv_row(self) -> list[str]:
        return [
            self.lemma_id,
            json.dumps(self.params, sort_keys=True),
            repr(self.measured),
            repr(self.bound),
            repr(self.slack),
            str(self.passed).lower(),
            json.dumps(self.details, sort_keys=True),
        ]

    @classmethod
    def from_csv_row(cls, row: Sequence[str]) -> LemmaCheckResult:
        lemma_id, params, measured, bound, _slack, passed, details = row
        return cls(lemma_id, json.loads(params), float(measured), float(bound), passed == "true", json.loads(details))


def results_csv(results: Sequence[LemmaCheckResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(LemmaCheckResult.CSV_HEADER)
    for res in results:
        w.writerow(res.csv_row())
    return buf.getvalue()


def _root_and_unit_lead(f: IntMultiPoly, y: Sequence[int], p: int) -> bool:
    coeffs = [eval_t_mod(part, y, p) for part in f.by_x_power]
    return coeffs[-1] != 0 and has_root(PolyModP(p, coeffs))


def root_fraction(f: IntMultiPoly, p: int) -> tuple[int, int]:
    """(#y in (F_p^*)^r with f(y, X) rooted and g_d(y) != 0, (p-1)^r)."""
    count = sum(_root_and_unit_lead(f, y, p) for y in itertools.product(range(1, p), repeat=f.r))
    return count, (p - 1) ** f.r


def one_prime_check(f: IntMultiPoly, site: PrimeSite | int, C_tol: float = ONE_PRIME_CTOL) -> LemmaCheckResult:
    """Exhaustive root fraction at one prime against 1 - 1/d + C_tol / sqrt(p)."""
    p = site.p if isinstance(site, PrimeSite) else int(site)
    cap = ONE_PRIME_MAX_P.get(f.r)
    if cap is None or p > cap:
        raise EnumerationTooLarge(f"exhaustive scan refused for r = {f.r}, p = {p} (cap {cap})")
    count, total = root_fraction(f, p)
    frac = count / total
    bound = 1 - 1 / f.d + C_tol / math.sqrt(p)
    return LemmaCheckResult(
        "one_prime",
        {"poly": str(f), "p": p, "C_tol": C_tol},
        frac,
        bound,
        frac <= bound,
        {"count": count, "total": total, "main_term": 1 - 1 / f.d},
    )


def event_table(f: IntMultiPoly, a: Sequence[int], p: int) -> np.ndarray:
    """Boolean table over (Z/(p-1))^r: does n land in A_p?"""
    shape = (p - 1,) * f.r
    powers = [[pow(ai, k, p) for k in range(p - 1)] for ai in a]
    cache: dict[tuple[int, ...], bool] = {}
    table = np.zeros(shape, dtype=bool)
    for n in np.ndindex(*shape):
        y = tuple(row[k] for row, k in zip(powers, n))
        if y not in cache:
            cache[y] = _root_and_unit_lead(f, y, p)
        table[n] = cache[y]
    return table


def many_primes_check(
    f: IntMultiPoly,
    a: Sequence[int],
    sites: Sequence[PrimeSite],
    C_tol: float = MANY_PRIMES_CTOL,
    x: int | None = None,
    seed: int = 0,
    draws: int = MANY_PRIMES_DRAWS,
) -> LemmaCheckResult:
    """Probability that n mod M lies in every A_p, against (1 - 1/d)^t + C_tol / sqrt(x).

    Exhaustive over n mod M for r = 1; seeded uniform sampling for r >= 2.
    ``x`` defaults to the smallest value with every p in (x, 2x].
    """
    ps = [s.p for s in sites]
    if not ps:
        raise ValueError("need at least one site")
    M = math.lcm(*(p - 1 for p in ps))
    if M > MANY_PRIMES_MAX_M:
        raise EnumerationTooLarge(f"M = lcm(p - 1) = {M} exceeds {MANY_PRIMES_MAX_M}")
    if x is None:
        x = -(-max(ps) // 2)
    if not all(x < p <= 2 * x for p in ps):
        raise ValueError(f"sites {ps} do not all lie in ({x}, {2 * x}]")
    tables = [event_table(f, a, p) for p in ps]
    marginals = [float(t.mean()) for t in tables]
    t = len(ps)
    details: dict = {"M": M, "marginals": marginals, "product_of_marginals": math.prod(marginals)}
    if f.r == 1:
        n = np.arange(M)
        hit = np.ones(M, dtype=bool)
        for p, table in zip(ps, tables):
            hit &= table[n % (p - 1)]
        prob = float(hit.mean())
        details["method"] = "exhaustive"
    else:
        rng = np.random.default_rng(seed)
        n = rng.integers(0, M, size=(draws, f.r))
        hit = np.ones(draws, dtype=bool)
        for p, table in zip(ps, tables):
            hit &= table[tuple((n % (p - 1)).T)]
        prob = float(hit.mean())
        details["method"] = "sampled"
        details["draws"] = draws
        details["stderr"] = math.sqrt(prob * (1 - prob) / draws)
    bound = (1 - 1 / f.d) ** t + C_tol / math.sqrt(x)
    details["deviation_from_product"] = abs(prob - details["product_of_marginals"])
    details["pairwise_gcd_max"] = max((math.gcd(p - 1, q - 1) for i, p in enumerate(ps) for q in ps[i + 1 :]), default=0)
    return LemmaCheckResult(
        "many_primes",
        {"poly": str(f), "a": list(a), "primes": ps, "x": x, "C_tol": C_tol, "seed": seed},
        prob,
        bound,
        prob <= bound,
        details,
    )


def _class_sizes(N: int, m: int) -> list[int]:
    """How many n in [-N, N] fall in each residue class mod m."""
    return [len(range((c - (-N)) % m + (-N), N + 1, m)) for c in range(m)]


def zariski_check(
    f: IntMultiPoly, a: Sequence[int], site: PrimeSite | int, N: int, C_tol: float = ZARISKI_CTOL
) -> LemmaCheckResult:
    """Exact share of n in [-N, N]^r with g_d(a^n) = 0 mod p, against C_tol * (1/p + p/N)."""
    p = site.p if isinstance(site, PrimeSite) else int(site)
    if N < p:
        raise ValueError(f"need N >= p, got N = {N}, p = {p}")
    params = {"poly": str(f), "a": list(a), "p": p, "N": N, "C_tol": C_tol}
    bound = C_tol * (1 / p + p / N)
    total = (2 * N + 1) ** f.r
    lead = f.lead
    if all(not any(texps) for texps in lead):
        return LemmaCheckResult("zariski", params, 0.0, bound, True, {"count": 0, "total": total, "vacuous": True})
    sizes = _class_sizes(N, p - 1)
    powers = [[pow(ai, k, p) for k in range(p - 1)] for ai in a]
    count = 0
    for c in np.ndindex(*(p - 1,) * f.r):
        y = [row[k] for row, k in zip(powers, c)]
        if eval_t_mod(lead, y, p) == 0:
            count += math.prod(sizes[k] for k in c)
    frac = count / total
    return LemmaCheckResult("zariski", params, frac, bound, frac <= bound, {"count": count, "total": total})


def phi_tail_check(z_grid: Sequence[int], D: int, factor: float = PHI_TAIL_FACTOR) -> LemmaCheckResult:
    """z * sum_{z < d <= D} 1/phi(d)^2 should be roughly constant in z.

    Passes when every normalized value is within ``factor`` of the geometric
    mean; the measured value is the worst ratio to that mean.
    """
    if max(z_grid) > D // 10:
        raise ValueError(f"largest z must be <= D/10 = {D // 10}")
    values = [z * phi_tail_sum(z, D) for z in z_grid]
    gmean = math.exp(sum(math.log(v) for v in values) / len(values))
    worst = max(max(v / gmean, gmean / v) for v in values)
    return LemmaCheckResult(
        "phi_tail",
        {"z_grid": list(z_grid), "D": D, "factor": factor},
        worst,
        factor,
        worst <= factor,
        {"normalized": values, "geometric_mean": gmean, "spread": max(values) / min(values)},
    )
