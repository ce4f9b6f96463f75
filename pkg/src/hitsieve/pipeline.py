"""Prime qualification, order densities, and gcd-graph cliques.

A prime p qualifies for (f, a, ell) when it divides no base, the leading
coefficient g_d(t) and the discriminant of f stay nonzero as polynomials
mod p, and every base has order at least (p-1)/ell in F_p^*.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
import sympy

from .arith import (
    FactoredInteger,
    factor_with_spf,
    factorize,
    multiplicative_order,
    prime_range,
    primes_upto,
    spf_table,
)
from .polymod import IntMultiPoly, reduces_to_zero

log = logging.getLogger(__name__)


class Disqualified(Exception):
    """A prime failed qualification; ``reason`` names the first failed condition."""

    def __init__(self, p: int, reason: str):
        super().__init__(f"p = {p}: {reason}")
        self.p = p
        self.reason = reason


def check_bases(a: Sequence[int]) -> tuple[int, ...]:
    a = tuple(int(ai) for ai in a)
    bad = [ai for ai in a if ai in (0, 1, -1)]
    if bad:
        raise ValueError(f"bases must lie in Z \\ {{0, +1, -1}}; got {bad}")
    return a


@dataclass(frozen=True)
class PrimeSite:
    p: int
    p_minus_1: FactoredInteger
    orders: tuple[int, ...]
    indices: tuple[int, ...]
    disc_ok: bool = True
    lead_ok: bool = True

    def __post_init__(self):
        if self.p_minus_1.value != self.p - 1:
            raise ValueError("p_minus_1 does not factor p - 1")
        for o, m in zip(self.orders, self.indices):
            if o * m != self.p - 1:
                raise ValueError(f"order {o} and index {m} do not multiply to p - 1 = {self.p - 1}")


def qualify(f: IntMultiPoly, a: Sequence[int], p: int, ell: int) -> PrimeSite:
    """Build the PrimeSite for p, or raise Disqualified naming the first failed condition."""
    a = check_bases(a)
    if ell < 1:
        raise ValueError(f"ell must be positive, got {ell}")
    if any(ai % p == 0 for ai in a):
        raise Disqualified(p, "divides a base")
    if reduces_to_zero(f.lead, p):
        raise Disqualified(p, "leading coefficient vanishes mod p")
    if reduces_to_zero(f.discriminant, p):
        raise Disqualified(p, "discriminant vanishes mod p")
    pm1 = factorize(p - 1)
    orders = tuple(multiplicative_order(ai, p, pm1) for ai in a)
    if any(o * ell < p - 1 for o in orders):
        raise Disqualified(p, "order too small")
    return PrimeSite(p, pm1, orders, tuple((p - 1) // o for o in orders))


@dataclass
class SiteSelection:
    sites: list[PrimeSite]
    tested: int
    accepted: int
    rejections: Counter = field(default_factory=Counter)

    @property
    def rate(self) -> float:
        return self.accepted / self.tested if self.tested else 0.0


def select_sites(f: IntMultiPoly, a: Sequence[int], ell: int, x: int, want: int | None = None) -> SiteSelection:
    """Qualified sites with p in (x, 2x], ascending.

    ``want=None`` keeps every qualified prime.  The qualification rate is
    measured over the whole interval regardless of ``want``.
    """
    sites: list[PrimeSite] = []
    rejections: Counter = Counter()
    primes = prime_range(x)
    for p in primes:
        try:
            site = qualify(f, a, p, ell)
        except Disqualified as exc:
            rejections[exc.reason] += 1
            continue
        if want is None or len(sites) < want:
            sites.append(site)
    accepted = len(primes) - sum(rejections.values())
    if not accepted:
        log.warning("no qualified primes in (%d, %d] for ell = %d; try a larger ell or x", x, 2 * x, ell)
    return SiteSelection(sites, len(primes), accepted, rejections)


@lru_cache(maxsize=4)
def _indices_upto(a: int, limit: int) -> tuple[np.ndarray, np.ndarray]:
    """(primes p <= limit with p not dividing a, index (p-1)/ord_p(a))."""
    spf = spf_table(limit)
    ps, idx = [], []
    for p in primes_upto(limit):
        if a % p == 0:
            continue
        order = multiplicative_order(a, p, factor_with_spf(p - 1, spf))
        ps.append(p)
        idx.append((p - 1) // order)
    return np.array(ps, dtype=np.int64), np.array(idx, dtype=np.int64)


def d_ell_estimate(a: int, ell: int, limit: int) -> Fraction:
    """Fraction of primes p <= limit, p not dividing a, with ord_p(a) >= (p-1)/ell."""
    check_bases([a])
    if limit < 10:
        raise ValueError(f"limit must be >= 10, got {limit}")
    _, idx = _indices_upto(a, limit)
    return Fraction(int(np.count_nonzero(idx <= ell)), len(idx))


def d_ell_curve(a: int, ells: Sequence[int], limit: int) -> list[tuple[int, Fraction]]:
    return [(ell, d_ell_estimate(a, ell, limit)) for ell in ells]


def _gcd_matrix(values: np.ndarray, rows: slice) -> np.ndarray:
    return np.gcd(values[rows, None], values[None, :])


@dataclass(frozen=True)
class CliqueResult:
    sites: tuple[PrimeSite, ...]
    z: int
    x: int
    n_vertices: int
    n_edges: int
    edge_density: Fraction
    turan_bound: int

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(s.p for s in self.sites)

    @property
    def meets_turan(self) -> bool:
        return len(self.sites) >= self.turan_bound

    def max_pair_gcd(self) -> int:
        ps = self.primes
        return max((math.gcd(p - 1, q - 1) for i, p in enumerate(ps) for q in ps[i + 1 :]), default=0)


def clique_extract(sites: Sequence[PrimeSite], z: int, x: int | None = None) -> CliqueResult:
    """Greedy clique in the graph joining p != q when gcd(p-1, q-1) <= z.

    Repeatedly takes the candidate of largest degree inside the current
    candidate set (ties to the smaller prime) and shrinks the candidates to
    its neighbours.  Recomputing degrees inside the candidate set is what
    makes the result at least ceil(1/(1-delta)) with delta = 2e/n**2.
    """
    if not sites:
        raise ValueError("need at least one site")
    ps = np.array([s.p for s in sites], dtype=np.int64)
    if len(set(ps.tolist())) != len(ps):
        raise ValueError("sites must be distinct primes")
    order = np.argsort(ps, kind="stable")
    sites = [sites[i] for i in order]
    values = ps[order] - 1
    n = len(sites)
    adj = np.zeros((n, n), dtype=bool)
    block = max(1, (1 << 22) // n)
    for start in range(0, n, block):
        rows = slice(start, min(start + block, n))
        adj[rows] = _gcd_matrix(values, rows) <= z
    np.fill_diagonal(adj, False)
    n_edges = int(adj.sum()) // 2

    chosen: list[int] = []
    cand = np.arange(n)
    deg = adj.sum(axis=1)
    while cand.size:
        v = int(cand[np.argmax(deg[cand])])  # first maximum = smallest prime
        chosen.append(v)
        keep = adj[v, cand]
        removed = cand[~keep]
        cand = cand[keep]
        if cand.size:
            deg[cand] -= adj[np.ix_(cand, removed)].sum(axis=1)

    delta = Fraction(2 * n_edges, n * n)
    bound = -(-n * n // (n * n - 2 * n_edges))
    if x is None:
        x = int(values.max() + 1) // 2
    return CliqueResult(tuple(sites[i] for i in sorted(chosen)), z, x, n, n_edges, delta, bound)


@dataclass(frozen=True)
class GcdStats:
    histogram: dict[int, int]
    fraction_at_most: dict[int, Fraction]

    @property
    def pairs(self) -> int:
        return sum(self.histogram.values())


def gcd_pair_stats(primes: Sequence[int], z_grid: Sequence[int] = ()) -> GcdStats:
    """Exact histogram of gcd(p-1, q-1) over unordered pairs."""
    ps = sorted(int(p) for p in primes)
    if len(ps) < 2:
        raise ValueError("need at least two primes")
    values = np.array(ps, dtype=np.int64) - 1
    n = len(values)
    counts: Counter = Counter()
    block = max(1, (1 << 22) // n)
    for start in range(0, n, block):
        stop = min(start + block, n)
        g = _gcd_matrix(values, slice(start, stop))
        upper = np.triu(np.ones((stop - start, n), dtype=bool), k=start + 1)
        vals, cnts = np.unique(g[upper], return_counts=True)
        counts.update(dict(zip(vals.tolist(), cnts.tolist())))
    hist = dict(sorted(counts.items()))
    total = sum(hist.values())
    fractions = {z: Fraction(sum(c for g, c in hist.items() if g <= z), total) for z in z_grid}
    return GcdStats(hist, fractions)


@dataclass(frozen=True)
class Schedule:
    N: int
    t: int
    z: int
    x: int
    c: float
    slack: dict[str, float]
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def schedule_parameters(N: int, c: float = 1.0) -> Schedule:
    """Choose (t, z, x) for a sweep bound N and report slack on each constraint.

    t = max(1, floor(sqrt(log log N))), x = floor(N**(1/(2t))),
    z = max(ceil(c*t), floor(log x)); the constraints checked are
    c*t <= z <= log x, t*x < N and (2x)**t < N.
    """
    if N < 1000:
        raise ValueError(f"N must be >= 1000, got {N}")
    t = max(1, math.floor(math.sqrt(math.log(math.log(N)))))
    x = int(sympy.integer_nthroot(N, 2 * t)[0])
    z = max(math.ceil(c * t), math.floor(math.log(x)))
    slack = {
        "cons1_lower": z - c * t,
        "cons1_upper": math.log(x) - z,
        "cons2": N - t * x,
        "cons3": N - (2 * x) ** t,
    }
    names = {
        "cons1_lower": "c*t <= z",
        "cons1_upper": "z <= log x",
        "cons2": "t*x < N",
        "cons3": "(2x)^t < N",
    }
    violations = tuple(names[k] for k, v in slack.items() if (v < 0 if k.startswith("cons1") else v <= 0))
    return Schedule(N, t, z, x, c, slack, violations)


# --- CSV emitters -------------------------------------------------------------


def _csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def sites_csv(sites: Sequence[PrimeSite]) -> str:
    r = len(sites[0].orders) if sites else 0
    header = ["p"] + [f"ord_{i + 1}" for i in range(r)] + [f"m_{i + 1}" for i in range(r)]
    return _csv(header, ([s.p, *s.orders, *s.indices] for s in sites))


def d_ell_csv(curve: Sequence[tuple[int, Fraction]]) -> str:
    return _csv(["ell", "fraction"], ((ell, f"{float(fr):.12g}") for ell, fr in curve))


def gcd_hist_csv(stats: GcdStats) -> str:
    return _csv(["value", "count"], stats.histogram.items())


def clique_csv(res: CliqueResult) -> str:
    ps = res.primes
    rows = []
    for p in ps:
        others = [math.gcd(p - 1, q - 1) for q in ps if q != p]
        rows.append(
            [p, max(others, default=0), res.z, res.x, res.n_vertices, f"{float(res.edge_density):.12g}", res.turan_bound, len(ps)]
        )
    header = ["p", "max_pair_gcd", "z", "x", "vertices", "edge_density", "turan_bound", "clique_size"]
    return _csv(header, rows)
