"""Integer and modular arithmetic on native-size integers.

Everything here works on values below 2**63 and is a pure function of its
arguments.  Primality is decided by a deterministic Miller-Rabin witness
set, so nothing in that range rests on a probabilistic test.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import sympy

INT64_MAX = 2**63 - 1
TRIAL_DIVISION_LIMIT = 10**6
DEFAULT_RHO_SEED = 0x5EED

# The first twelve primes are a complete witness set for n < 3.3e24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_EXACT_BELOW = 3317044064679887385961981


@dataclass(frozen=True)
class FactoredInteger:
    """A positive integer together with its prime factorization."""

    value: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.value < 1:
            raise ValueError(f"value must be positive, got {self.value}")
        prod = 1
        last = 1
        for q, e in self.factors:
            if q <= last or e < 1:
                raise ValueError(f"factors must be strictly increasing primes with positive exponents: {self.factors}")
            last = q
            prod *= q**e
        if prod != self.value:
            raise ValueError(f"factors {self.factors} multiply to {prod}, not {self.value}")

    @classmethod
    def from_dict(cls, factors: dict[int, int]) -> FactoredInteger:
        items = tuple(sorted((int(q), int(e)) for q, e in factors.items()))
        return cls(math.prod(q**e for q, e in items), items)

    def as_dict(self) -> dict[int, int]:
        return dict(self.factors)

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.factors)

    def divisors(self) -> list[int]:
        divs = [1]
        for q, e in self.factors:
            divs = [d * q**k for d in divs for k in range(e + 1)]
        return sorted(divs)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin below 3.3e24; BPSW (sympy) above."""
    if n < 2:
        return False
    for q in _MR_WITNESSES:
        if n % q == 0:
            return n == q
    if n >= _MR_EXACT_BELOW:
        return bool(sympy.isprime(n))
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@lru_cache(maxsize=8)
def _small_prime_array(limit: int) -> np.ndarray:
    """All primes <= limit (plain sieve of Eratosthenes)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    sieve[4::2] = False
    for q in range(3, math.isqrt(limit) + 1, 2):
        if sieve[q]:
            sieve[q * q :: 2 * q] = False
    return np.flatnonzero(sieve).astype(np.int64)


@lru_cache(maxsize=1)
def _trial_primes() -> tuple[int, ...]:
    return tuple(int(q) for q in _small_prime_array(TRIAL_DIVISION_LIMIT))


def iter_prime_segments(lo: int, hi: int, segment: int = 1 << 20):
    """Yield numpy arrays of the primes in [lo, hi], one segment at a time."""
    lo = max(lo, 2)
    if hi < lo:
        return
    base = _small_prime_array(math.isqrt(hi))
    start = lo
    while start <= hi:
        stop = min(start + segment - 1, hi)
        mask = np.ones(stop - start + 1, dtype=bool)
        for q in base:
            q = int(q)
            if q * q > stop:
                break
            first = max(q * q, -(-start // q) * q)
            mask[first - start :: q] = False
        yield np.flatnonzero(mask).astype(np.int64) + start
        start = stop + 1


def prime_range(x: int, factor: int = 2) -> list[int]:
    """Primes p with x < p <= factor * x, ascending.

    >>> prime_range(10)
    [11, 13, 17, 19]
    """
    if x < 2:
        raise ValueError(f"x must be >= 2, got {x}")
    hi = math.floor(x * factor)
    if hi > INT64_MAX:
        raise OverflowError(f"upper end {factor}*{x} exceeds the 64-bit budget")
    out: list[int] = []
    for seg in iter_prime_segments(x + 1, hi):
        out.extend(seg.tolist())
    return out


def primes_upto(limit: int) -> list[int]:
    return _small_prime_array(limit).tolist()


def pow_mod(base: int, exp: int, p: int) -> int:
    """base**exp mod p; negative exponents go through exponent reduction mod p-1."""
    if exp < 0:
        if base % p == 0:
            raise ValueError(f"non-invertible base: {p} divides {base}")
        exp %= p - 1
    return pow(base, exp, p)


def _pollard_brent(n: int, rng: random.Random) -> int:
    """A nontrivial factor of the odd composite n."""
    while True:
        y = rng.randrange(1, n)
        c = rng.randrange(1, n)
        m = 128
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def factorize(m: int, seed: int = DEFAULT_RHO_SEED) -> FactoredInteger:
    """Complete factorization: trial division to 10**6, then Brent's rho."""
    if m < 1:
        raise ValueError(f"can only factor positive integers, got {m}")
    counts: dict[int, int] = {}
    rest = m
    for q in _trial_primes():
        if q * q > rest:
            break
        if rest % q == 0:
            e = 0
            while rest % q == 0:
                rest //= q
                e += 1
            counts[q] = e
    if rest > 1:
        rng = random.Random(seed)
        stack = [rest]
        while stack:
            n = stack.pop()
            if is_prime(n):
                counts[n] = counts.get(n, 0) + 1
                continue
            g = _pollard_brent(n, rng)
            stack.extend((g, n // g))
    return FactoredInteger.from_dict(counts)


def multiplicative_order(a: int, p: int, p_minus_1: FactoredInteger | None = None) -> int:
    """Least e > 0 with a**e == 1 mod p.

    Starts from p-1 and strips prime factors while the power stays 1.
    """
    if a % p == 0:
        raise ValueError(f"{p} divides {a}; no multiplicative order")
    if p_minus_1 is None:
        p_minus_1 = factorize(p - 1)
    elif p_minus_1.value != p - 1:
        raise ValueError(f"factorization of {p_minus_1.value} supplied for p-1 = {p - 1}")
    a %= p
    order = p - 1
    for q, e in p_minus_1.factors:
        for _ in range(e):
            if pow(a, order // q, p) != 1:
                break
            order //= q
    return order


@lru_cache(maxsize=2)
def totients(limit: int) -> np.ndarray:
    """phi(0..limit) as an int64 array (phi(0) set to 0)."""
    phi = np.arange(limit + 1, dtype=np.int64)
    for q in _small_prime_array(limit):
        q = int(q)
        phi[q::q] -= phi[q::q] // q
    return phi


@lru_cache(maxsize=2)
def _inverse_phi_squares(limit: int) -> np.ndarray:
    phi = totients(limit).astype(np.float64)
    out = np.zeros(limit + 1)
    out[1:] = 1.0 / (phi[1:] * phi[1:])
    return out


def phi_tail_sum(z: int, D: int) -> float:
    """sum_{z < d <= D} 1/phi(d)**2.

    Pairwise summation inside 64k blocks, fsum across blocks; relative
    error stays near 1e-15.
    """
    if z < 1:
        raise ValueError(f"z must be >= 1, got {z}")
    if z >= D:
        return 0.0
    terms = _inverse_phi_squares(D)[z + 1 :]
    block = 1 << 16
    return math.fsum(float(terms[i : i + block].sum()) for i in range(0, len(terms), block))


def spf_table(limit: int) -> np.ndarray:
    """Smallest prime factor of every integer up to limit (spf[0] = spf[1] = 0)."""
    spf = np.zeros(limit + 1, dtype=np.int64)
    for q in _small_prime_array(math.isqrt(limit)):
        q = int(q)
        block = spf[q * q :: q]
        block[block == 0] = q
    idx = np.flatnonzero(spf == 0)
    spf[idx] = idx
    spf[:2] = 0
    return spf


def factor_with_spf(m: int, spf: np.ndarray) -> FactoredInteger:
    counts: dict[int, int] = {}
    while m > 1:
        q = int(spf[m])
        counts[q] = counts.get(q, 0) + 1
        m //= q
    return FactoredInteger.from_dict(counts)
