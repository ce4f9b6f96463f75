"""Per-exponent certificates for f(a^n, X) and density sweeps over [-N, N]^r.

The mod-p stage walks the sites in ascending p.  A site whose reduction
of g_d(a^n) vanishes is skipped (a type-I event); otherwise the
specialization is tested for roots (no_root mode) or its factor-degree
pattern is intersected into the set of achievable factor degrees
(irreducible mode).  Anything the mod-p stage cannot settle goes to the
exact path: build the primitive integer polynomial F_n, Hensel-lift its
roots modulo an auxiliary prime q and reconstruct rational roots.
"""

from __future__ import annotations

import csv
import enum
import io
import itertools
import json
import math
import random
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import sympy

from .arith import is_prime
from .pipeline import PrimeSite, check_bases
from .polymod import (
    IntMultiPoly,
    PolyModP,
    achievable_degrees,
    all_roots,
    degree_pattern,
    eval_t_mod,
    has_root,
    is_separable,
)

AUX_PRIME_FLOOR = 2**20
DEFAULT_FALLBACK_BITS = 1 << 16
POWER_TABLE_LIMIT = 1 << 16
ORACLE_MAX_EXPONENT = 12


class Mode(str, enum.Enum):
    NO_ROOT = "no_root"
    IRREDUCIBLE = "irreducible"


class Verdict(str, enum.Enum):
    NO_ROOT = "NoRootCertified"
    ROOT_FOUND = "RootFound"
    IRREDUCIBLE = "IrreducibleCertified"
    REDUCIBLE = "ReducibleCertified"
    INCONCLUSIVE = "Inconclusive"


class BudgetExceeded(Exception):
    pass


@dataclass(frozen=True)
class Certificate:
    """Verdict for one exponent vector.

    ``witness_primes`` holds the certifying site for a mod-p NoRootCertified,
    or the sites whose factor-degree patterns jointly rule out every proper
    factor degree for IrreducibleCertified.  When the exact path decided the
    case ``fallback`` is set and ``aux_prime`` is the Hensel prime.
    """

    n: tuple[int, ...]
    verdict: Verdict
    witness_primes: tuple[int, ...] = ()
    root: Fraction | None = None
    sites_consulted: int = 0
    skipped_leading_zero: tuple[int, ...] = ()
    fallback: bool = False
    aux_prime: int | None = None
    detail: str = ""

    @property
    def witness(self):
        if self.root is not None:
            return str(self.root)
        if self.verdict is Verdict.NO_ROOT and self.fallback:
            return f"exact:q={self.aux_prime}"
        if self.verdict is Verdict.NO_ROOT:
            return self.witness_primes[0]
        if self.verdict is Verdict.IRREDUCIBLE and not self.witness_primes:
            return self.detail
        if self.verdict is Verdict.IRREDUCIBLE:
            return list(self.witness_primes)
        return self.detail

    def to_json(self) -> dict:
        return {
            "n": list(self.n),
            "verdict": self.verdict.value,
            "witness": self.witness,
            "sites_consulted": self.sites_consulted,
        }


@dataclass
class SieveConfig:
    f: IntMultiPoly
    a: tuple[int, ...]
    N: int
    sites: Sequence[PrimeSite]
    mode: Mode = Mode.NO_ROOT
    fallback_budget: int = DEFAULT_FALLBACK_BITS
    rng_seed: int = 0
    _powers: list = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.a = check_bases(self.a)
        self.mode = Mode(self.mode)
        if len(self.a) != self.f.r:
            raise ValueError(f"f has {self.f.r} t-variables but {len(self.a)} bases were given")
        if not self.sites:
            raise ValueError("at least one site is required")
        self.sites = sorted(self.sites, key=lambda s: s.p)
        for s in self.sites:
            if not (s.lead_ok and s.disc_ok):
                raise ValueError(f"site {s.p} fails the leading-coefficient/discriminant condition")
            if any(ai % s.p == 0 for ai in self.a):
                raise ValueError(f"site {s.p} divides a base")
        self._powers = [
            [[pow(ai, k, s.p) for k in range(s.p - 1)] for ai in self.a] if s.p < POWER_TABLE_LIMIT else None
            for s in self.sites
        ]


def residue_of_power(a_i: int, n_i: int, site: PrimeSite | int) -> int:
    """a_i**(n_i mod (p-1)) mod p."""
    p = site.p if isinstance(site, PrimeSite) else site
    if a_i % p == 0:
        raise ValueError(f"{p} divides the base {a_i}")
    return pow(a_i, n_i % (p - 1), p)


def _site_point(cfg: SieveConfig, idx: int, n: Sequence[int]) -> tuple[int, ...]:
    site = cfg.sites[idx]
    table = cfg._powers[idx]
    if table is not None:
        return tuple(row[ni % (site.p - 1)] for row, ni in zip(table, n))
    return tuple(residue_of_power(ai, ni, site) for ai, ni in zip(cfg.a, n))


@dataclass(frozen=True)
class StageOutcome:
    """What the mod-p sites alone say about one exponent vector."""

    certified: bool
    witness_primes: tuple[int, ...]
    consulted: int
    skipped: tuple[int, ...]
    degrees: frozenset[int]


def mod_p_stage(cfg: SieveConfig, n: Sequence[int]) -> StageOutcome:
    f, d = cfg.f, cfg.f.d
    skipped: list[int] = []
    used: list[int] = []
    degrees = frozenset(range(d + 1))
    proper = frozenset(range(1, d))
    for idx, site in enumerate(cfg.sites):
        p = site.p
        y = _site_point(cfg, idx, n)
        coeffs = [eval_t_mod(part, y, p) for part in f.by_x_power]
        if coeffs[-1] == 0:
            skipped.append(p)
            continue
        F = PolyModP(p, coeffs)
        if cfg.mode is Mode.NO_ROOT:
            if not has_root(F):
                return StageOutcome(True, (p,), idx + 1, tuple(skipped), frozenset())
            continue
        if not is_separable(F):
            continue
        used.append(p)
        degrees = degrees & achievable_degrees(degree_pattern(F))
        if not degrees & proper:
            return StageOutcome(True, tuple(used), idx + 1, tuple(skipped), degrees)
    return StageOutcome(False, tuple(used), len(cfg.sites), tuple(skipped), degrees)


# --- exact path ---------------------------------------------------------------


def exact_specialization(f: IntMultiPoly, a: Sequence[int], n: Sequence[int], budget: int | None = None) -> list[int]:
    """Primitive integer coefficients of f(a^n, X), constant term first, trimmed.

    Negative exponents are cleared by multiplying through by
    prod a_i**(|n_i| * deg_{t_i} f), a unit factor over Q.  The leading
    coefficient is made positive; the zero polynomial comes back as [].
    """
    if budget is not None:
        est = max(abs(c) for c in f.terms.values()).bit_length() + len(f.terms).bit_length()
        est += sum(abs(ni) * e * abs(ai).bit_length() for ai, ni, e in zip(a, n, f.t_degrees))
        if est > budget:
            raise BudgetExceeded(f"coefficients need about {est} bits, budget is {budget}")
    shift = [abs(ni) * e if ni < 0 else 0 for ni, e in zip(n, f.t_degrees)]
    coeffs = [0] * (f.d + 1)
    for (texps, k), c in f.terms.items():
        v = c
        for ai, ni, e, s in zip(a, n, texps, shift):
            v *= ai ** (ni * e + s)
        coeffs[k] += v
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    if not coeffs:
        return []
    g = 0
    for c in coeffs:
        g = math.gcd(g, c)
    sign = -1 if coeffs[-1] < 0 else 1
    return [sign * c // g for c in coeffs]


def _eval_mod(coeffs: Sequence[int], x: int, m: int) -> int:
    v = 0
    for c in reversed(coeffs):
        v = (v * x + c) % m
    return v


def _is_rational_root(coeffs: Sequence[int], u: int, v: int) -> bool:
    deg = len(coeffs) - 1
    return sum(c * u**i * v ** (deg - i) for i, c in enumerate(coeffs)) == 0


def _rational_reconstruct(r: int, m: int, bound: int) -> tuple[int, int] | None:
    """u/v with u = r*v mod m and |u|, |v| <= bound, if it exists."""
    r0, r1 = m, r % m
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    if s1 < 0:
        return -r1, -s1
    return r1, s1


def _separable_mod(coeffs: Sequence[int], q: int) -> bool:
    if coeffs[-1] % q == 0:
        return False
    return is_separable(PolyModP(q, coeffs))


def _aux_prime(coeffs: Sequence[int], start: int, tries: int = 64) -> int | None:
    q = start
    for _ in range(tries):
        q += 1
        while not is_prime(q):
            q += 1
        if _separable_mod(coeffs, q):
            return q
    return None


def _squarefree_part(coeffs: Sequence[int]) -> list[int]:
    X = sympy.Symbol("X")
    poly = sympy.Poly(list(reversed(coeffs)), X, domain="ZZ").sqf_part().primitive()[1]
    out = [int(c) for c in reversed(poly.all_coeffs())]
    return [-c for c in out] if out[-1] < 0 else out


def rational_roots(coeffs: Sequence[int], q_floor: int = AUX_PRIME_FLOOR, rng_seed: int = 0) -> tuple[list[Fraction], int | None]:
    """All rational roots of a nonzero integer polynomial, and the Hensel prime used.

    Any rational root u/v of the primitive polynomial has v | lead, so it
    reduces to a root modulo an auxiliary prime q not dividing the leading
    coefficient.  Lifting every root mod q past 2*H**2 (H bounds |u| and
    |v|) and reconstructing therefore finds all of them.
    """
    coeffs = list(coeffs)
    if not coeffs:
        raise ValueError("the zero polynomial has every rational number as a root")
    roots: list[Fraction] = []
    if coeffs[0] == 0:
        roots.append(Fraction(0))
        while coeffs[0] == 0:
            coeffs.pop(0)
    if len(coeffs) == 1:
        return roots, None
    q = _aux_prime(coeffs, q_floor)
    if q is None:
        coeffs = _squarefree_part(coeffs)
        if len(coeffs) == 1:
            return roots, None
        q = _aux_prime(coeffs, q_floor)
        if q is None:
            raise RuntimeError("no admissible auxiliary prime for a squarefree polynomial")
    lead, const = abs(coeffs[-1]), abs(coeffs[0])
    cauchy = lead + max(abs(c) for c in coeffs[:-1])  # |u| <= |v| * (1 + max|c_i|/|c_d|)
    H = max(lead, min(const, cauchy))
    deriv = [i * c for i, c in enumerate(coeffs)][1:]
    for r in all_roots(PolyModP(q, coeffs), rng_seed):
        m = q
        while m <= 2 * H * H:
            m2 = m * m
            r = (r - _eval_mod(coeffs, r, m2) * pow(_eval_mod(deriv, r, m2), -1, m2)) % m2
            m = m2
        uv = _rational_reconstruct(r, m, H)
        if uv is not None and _is_rational_root(coeffs, *uv):
            roots.append(Fraction(*uv))
    return sorted(set(roots)), q


def exact_rational_root(
    f: IntMultiPoly,
    a: Sequence[int],
    n: Sequence[int],
    budget: int = DEFAULT_FALLBACK_BITS,
    q_floor: int = AUX_PRIME_FLOOR,
    rng_seed: int = 0,
) -> Fraction | None:
    """Largest rational root of f(a^n, X), or None when there is none.

    Raises BudgetExceeded when the exact coefficients would exceed ``budget`` bits.
    """
    coeffs = exact_specialization(f, a, n, budget)
    if not coeffs:
        return Fraction(0)
    roots, _ = rational_roots(coeffs, q_floor, rng_seed)
    return roots[-1] if roots else None


def no_root_status(cfg: SieveConfig, n: Sequence[int]) -> Certificate:
    n = tuple(n)
    stage = mod_p_stage(cfg, n)
    if stage.certified:
        return Certificate(n, Verdict.NO_ROOT, stage.witness_primes, None, stage.consulted, stage.skipped)
    try:
        coeffs = exact_specialization(cfg.f, cfg.a, n, cfg.fallback_budget)
    except BudgetExceeded as exc:
        return Certificate(n, Verdict.INCONCLUSIVE, (), None, stage.consulted, stage.skipped, True, None, str(exc))
    if not coeffs:
        return Certificate(n, Verdict.ROOT_FOUND, (), Fraction(0), stage.consulted, stage.skipped, True, None, "zero polynomial")
    roots, q = rational_roots(coeffs, rng_seed=cfg.rng_seed)
    if roots:
        return Certificate(n, Verdict.ROOT_FOUND, (), roots[-1], stage.consulted, stage.skipped, True, q)
    return Certificate(n, Verdict.NO_ROOT, (), None, stage.consulted, stage.skipped, True, q)


def irreducible_status(cfg: SieveConfig, n: Sequence[int]) -> Certificate:
    """Irreducibility verdict for f(a^n, X) over Q.

    The mod-p stage certifies when no proper factor degree survives.  If
    degree 1 survives, the exact path looks for a rational root; for
    specializations of degree at most 3 the absence of a root settles
    irreducibility.  Everything else is Inconclusive.
    """
    n = tuple(n)
    if cfg.mode is not Mode.IRREDUCIBLE:
        raise ValueError("irreducible_status needs mode = irreducible")
    stage = mod_p_stage(cfg, n)
    base = dict(sites_consulted=stage.consulted, skipped_leading_zero=stage.skipped)
    if stage.certified:
        return Certificate(n, Verdict.IRREDUCIBLE, stage.witness_primes, **base)
    if 1 not in stage.degrees:
        left = sorted(stage.degrees - {0, cfg.f.d})
        return Certificate(n, Verdict.INCONCLUSIVE, detail=f"factor degrees {left} not excluded", **base)
    try:
        coeffs = exact_specialization(cfg.f, cfg.a, n, cfg.fallback_budget)
    except BudgetExceeded as exc:
        return Certificate(n, Verdict.INCONCLUSIVE, fallback=True, detail=str(exc), **base)
    deg = len(coeffs) - 1
    if deg < 0:
        return Certificate(n, Verdict.REDUCIBLE, root=Fraction(0), fallback=True, detail="zero polynomial", **base)
    if deg == 0:
        return Certificate(n, Verdict.REDUCIBLE, fallback=True, detail="constant specialization", **base)
    if deg == 1:
        return Certificate(n, Verdict.IRREDUCIBLE, fallback=True, detail="linear specialization", **base)
    roots, q = rational_roots(coeffs, rng_seed=cfg.rng_seed)
    if roots:
        return Certificate(n, Verdict.REDUCIBLE, root=roots[-1], fallback=True, aux_prime=q, **base)
    if deg <= 3:
        return Certificate(
            n, Verdict.IRREDUCIBLE, fallback=True, aux_prime=q, detail=f"degree {deg}, no rational root", **base
        )
    return Certificate(n, Verdict.INCONCLUSIVE, fallback=True, aux_prime=q, detail="no rational root; degree >= 4", **base)


def certify(cfg: SieveConfig, n: Sequence[int]) -> Certificate:
    if cfg.mode is Mode.NO_ROOT:
        return no_root_status(cfg, n)
    return irreducible_status(cfg, n)


# --- brute-force oracle -------------------------------------------------------


@dataclass(frozen=True)
class OracleVerdict:
    degree: int  # -1 for the zero polynomial
    roots: tuple[Fraction, ...]
    irreducible: bool | None  # None: undecided (degree >= 4 without a rational root)

    @property
    def has_root(self) -> bool:
        return bool(self.roots) or self.degree < 0


def _divisors(m: int) -> list[int]:
    return [int(d) for d in sympy.divisors(abs(m))]


def brute_oracle(f: IntMultiPoly, a: Sequence[int], n: Sequence[int]) -> OracleVerdict:
    """Decide rational roots of f(a^n, X) by enumerating u/v with u | c_low, v | c_top.

    Built on exact rational arithmetic and divisor enumeration only; shares
    nothing with the Hensel path.  Irreducibility is decided outright for
    specializations of degree at most 3.
    """
    if any(abs(ni) > ORACLE_MAX_EXPONENT for ni in n):
        raise ValueError(f"brute_oracle only handles |n_i| <= {ORACLE_MAX_EXPONENT}")
    rat = [Fraction(0)] * (f.d + 1)
    for (texps, k), c in f.terms.items():
        v = Fraction(c)
        for ai, ni, e in zip(a, n, texps):
            v *= Fraction(ai) ** (ni * e)
        rat[k] += v
    while rat and rat[-1] == 0:
        rat.pop()
    if not rat:
        return OracleVerdict(-1, (), False)
    den = math.lcm(*(c.denominator for c in rat))
    ints = [int(c * den) for c in rat]
    deg = len(ints) - 1
    roots = set()
    low = 0
    while ints[low] == 0:
        roots.add(Fraction(0))
        low += 1
    if low < deg:
        for u in _divisors(ints[low]):
            for v in _divisors(ints[-1]):
                for cand in (Fraction(u, v), Fraction(-u, v)):
                    if sum(c * cand**i for i, c in enumerate(ints)) == 0:
                        roots.add(cand)
    roots = tuple(sorted(roots))
    if deg == 0:
        irreducible = False
    elif deg == 1:
        irreducible = True
    elif roots:
        irreducible = False
    elif deg <= 3:
        irreducible = True
    else:
        irreducible = None
    return OracleVerdict(deg, roots, irreducible)


# --- sweeps --------------------------------------------------------------------


@dataclass
class DensityRow:
    N: int
    total: int
    favorable: int = 0
    fallbacks: int = 0
    inconclusive: int = 0
    skips: int = 0
    site_tallies: Counter = field(default_factory=Counter)
    skip_tallies: Counter = field(default_factory=Counter)

    @property
    def density(self) -> Fraction:
        return Fraction(self.favorable, self.total)

    def add(self, cert: Certificate, mode: Mode):
        favorable = Verdict.NO_ROOT if mode is Mode.NO_ROOT else Verdict.IRREDUCIBLE
        self.favorable += cert.verdict is favorable
        self.fallbacks += cert.fallback
        self.inconclusive += cert.verdict is Verdict.INCONCLUSIVE
        self.skips += len(cert.skipped_leading_zero)
        self.skip_tallies.update(cert.skipped_leading_zero)
        if not cert.fallback:
            self.site_tallies.update(cert.witness_primes)


@dataclass
class DensityReport:
    mode: Mode
    r: int
    rows: list[DensityRow]
    sampled: bool = False

    def row(self, N: int) -> DensityRow:
        return next(r for r in self.rows if r.N == N)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["mode", "N", "total", "favorable", "density_num", "density_den", "fallbacks", "inconclusive", "skips"])
        for row in self.rows:
            dens = row.density
            w.writerow(
                [self.mode.value, row.N, row.total, row.favorable, dens.numerator, dens.denominator,
                 row.fallbacks, row.inconclusive, row.skips]
            )
        return buf.getvalue()

    def telemetry_csv(self) -> str:
        """Per-site certificate and skip tallies, one row per (N, p)."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "p", "certificates", "skips"])
        for row in self.rows:
            for p in sorted(set(row.site_tallies) | set(row.skip_tallies)):
                w.writerow([row.N, p, row.site_tallies[p], row.skip_tallies[p]])
        return buf.getvalue()


def box(N: int, r: int):
    return itertools.product(range(-N, N + 1), repeat=r)


def _certify_chunk(args) -> list[Certificate]:
    cfg, ns = args
    return [certify(cfg, n) for n in ns]


def certify_many(cfg: SieveConfig, ns: Sequence[tuple[int, ...]], workers: int = 1, chunk: int = 2048) -> list[Certificate]:
    """Certificates for every n, in input order; ``workers > 1`` fans out to processes."""
    ns = list(ns)
    if workers <= 1 or len(ns) <= chunk:
        return [certify(cfg, n) for n in ns]
    pieces = [(cfg, ns[i : i + chunk]) for i in range(0, len(ns), chunk)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return [c for part in pool.map(_certify_chunk, pieces) for c in part]


def density_sweep(
    cfg: SieveConfig,
    N_grid: Sequence[int],
    workers: int = 1,
    sample: int | None = None,
    seed: int = 0,
) -> DensityReport:
    """Exact counts over the full cube [-N, N]^r for each N in the grid.

    With ``sample`` set, draws that many n uniformly from the largest cube
    instead; each row then counts the draws falling inside its cube.
    """
    grid = sorted(set(N_grid))
    if not grid or grid[0] < 0:
        raise ValueError("N grid must be nonempty and nonnegative")
    top, r = grid[-1], cfg.f.r
    if sample is None:
        ns = list(box(top, r))
    else:
        rng = random.Random(seed)
        ns = [tuple(rng.randint(-top, top) for _ in range(r)) for _ in range(sample)]
    certs = certify_many(cfg, ns, workers)
    rows = [DensityRow(N, (2 * N + 1) ** r if sample is None else 0) for N in grid]
    for cert in certs:
        height = max((abs(ni) for ni in cert.n), default=0)
        for row in rows:
            if height <= row.N:
                if sample is not None:
                    row.total += 1
                row.add(cert, cfg.mode)
    return DensityReport(cfg.mode, r, rows, sample is not None)


def certificates_json(certs: Sequence[Certificate]) -> str:
    return json.dumps([c.to_json() for c in certs], indent=None, separators=(",", ":")) + "\n"


def certificates_csv(certs: Sequence[Certificate]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "verdict", "witness", "sites_consulted", "fallback", "skipped"])
    for c in certs:
        witness = c.witness
        if isinstance(witness, list):
            witness = " ".join(map(str, witness))
        w.writerow([" ".join(map(str, c.n)), c.verdict.value, witness, c.sites_consulted, int(c.fallback),
                    " ".join(map(str, c.skipped_leading_zero))])
    return buf.getvalue()
