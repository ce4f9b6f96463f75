"""Integer polynomials f(t1..tr, X) and univariate polynomial arithmetic over F_p.

Univariate polynomials over F_p are dense coefficient tuples, constant
term first, with the leading coefficient nonzero (the zero polynomial is
the empty tuple).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import sympy

BRUTE_FORCE_PRIME_LIMIT = 1000

Monomial = tuple[tuple[int, ...], int]  # (t-exponents, X-exponent)


@dataclass(frozen=True)
class IntMultiPoly:
    """f(t, X) with exact integer coefficients, stored sparsely."""

    r: int
    terms: Mapping[Monomial, int] = field(hash=False)

    def __post_init__(self):
        clean = {}
        for (texps, k), c in self.terms.items():
            texps = tuple(int(e) for e in texps)
            if len(texps) != self.r or any(e < 0 for e in texps) or k < 0:
                raise ValueError(f"bad monomial {(texps, k)} for r = {self.r}")
            if c:
                clean[(texps, int(k))] = int(c)
        if not clean:
            raise ValueError("zero polynomial")
        if max(k for _, k in clean) < 1:
            raise ValueError("deg_X f ≥ 1 violated")
        object.__setattr__(self, "terms", dict(sorted(clean.items())))

    def __hash__(self):
        return hash((self.r, tuple(self.terms.items())))

    def __eq__(self, other):
        return isinstance(other, IntMultiPoly) and self.r == other.r and self.terms == other.terms

    @cached_property
    def d(self) -> int:
        return max(k for _, k in self.terms)

    def x_coefficient(self, k: int) -> dict[tuple[int, ...], int]:
        """The coefficient of X**k as a sparse polynomial in t."""
        return {texps: c for (texps, j), c in self.terms.items() if j == k}

    @cached_property
    def lead(self) -> dict[tuple[int, ...], int]:
        """g_d(t), the coefficient of X**d."""
        return self.x_coefficient(self.d)

    @cached_property
    def by_x_power(self) -> tuple[tuple[tuple[tuple[int, ...], int], ...], ...]:
        return tuple(tuple(self.x_coefficient(k).items()) for k in range(self.d + 1))

    @cached_property
    def t_degrees(self) -> tuple[int, ...]:
        """Largest exponent of each t_i appearing in f."""
        return tuple(max(texps[i] for texps, _ in self.terms) for i in range(self.r))

    def pullback(self, m: Sequence[int]) -> IntMultiPoly:
        """f(t1**m1, ..., tr**mr, X)."""
        if len(m) != self.r or any(mi < 1 for mi in m):
            raise ValueError(f"need {self.r} positive exponents, got {m}")
        return IntMultiPoly(
            self.r, {(tuple(e * mi for e, mi in zip(texps, m)), k): c for (texps, k), c in self.terms.items()}
        )

    def to_sympy(self):
        ts = sympy.symbols(f"t1:{self.r + 1}") if self.r else ()
        X = sympy.Symbol("X")
        expr = sympy.Integer(0)
        for (texps, k), c in self.terms.items():
            mono = sympy.Integer(c) * X**k
            for ti, e in zip(ts, texps):
                mono *= ti**e
            expr += mono
        return expr, ts, X

    @cached_property
    def discriminant(self) -> dict[tuple[int, ...], int]:
        """disc_X f as a sparse integer polynomial in t."""
        if self.d == 1:
            return {(0,) * self.r: 1}
        expr, ts, X = self.to_sympy()
        disc = sympy.expand(sympy.discriminant(expr, X))
        if not ts:
            return {(): int(disc)} if disc else {}
        poly = sympy.Poly(disc, *ts)
        return {tuple(int(e) for e in mon): int(c) for mon, c in poly.terms() if c}

    def evaluate(self, y: Sequence[int], x: int) -> int:
        """Exact value f(y, x) for integer y, x."""
        total = 0
        for (texps, k), c in self.terms.items():
            v = c * x**k
            for yi, e in zip(y, texps):
                v *= yi**e
            total += v
        return total

    def __str__(self):
        return format_poly(self)


def format_poly(f: IntMultiPoly) -> str:
    """Canonical text form, highest X power first, e.g. 'X^3 + t1*X + t2'."""

    def mono_key(item):
        (texps, k), _ = item
        return (-k, tuple(-e for e in texps))

    pieces = []
    for (texps, k), c in sorted(f.terms.items(), key=mono_key):
        factors = [f"t{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(texps) if e]
        if k:
            factors.append("X" + (f"^{k}" if k > 1 else ""))
        mag = abs(c)
        if not factors:
            body = str(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = f"{mag}*" + "*".join(factors)
        if not pieces:
            pieces.append(("-" if c < 0 else "") + body)
        else:
            pieces.append(("- " if c < 0 else "+ ") + body)
    return " ".join(pieces)


def eval_t_mod(coeff: Sequence[tuple[tuple[int, ...], int]] | Mapping, y: Sequence[int], p: int) -> int:
    """Evaluate a sparse t-polynomial at y modulo p."""
    items = coeff.items() if isinstance(coeff, Mapping) else coeff
    total = 0
    for texps, c in items:
        v = c
        for yi, e in zip(y, texps):
            if e:
                v = v * pow(yi, e, p) % p
        total += v
    return total % p


def reduces_to_zero(coeff: Mapping[tuple[int, ...], int], p: int) -> bool:
    """True when every coefficient of the sparse t-polynomial vanishes mod p."""
    return all(c % p == 0 for c in coeff.values())


# --- dense arithmetic over F_p ---------------------------------------------


def _trim(c: list[int]) -> list[int]:
    while c and c[-1] == 0:
        c.pop()
    return c


def _sub(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    n = max(len(a), len(b))
    out = [((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p for i in range(n)]
    return _trim(out)


def _mul(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return _trim([v % p for v in out])


def _divmod(a: Sequence[int], b: Sequence[int], p: int) -> tuple[list[int], list[int]]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(a)
    db = len(b) - 1
    if len(rem) - 1 < db:
        return [], _trim(rem)
    inv = pow(b[-1], -1, p)
    quo = [0] * (len(rem) - db)
    for i in range(len(rem) - 1, db - 1, -1):
        c = rem[i] * inv % p
        if c:
            quo[i - db] = c
            for j in range(db + 1):
                rem[i - db + j] = (rem[i - db + j] - c * b[j]) % p
    return _trim(quo), _trim(rem[:db])


def _mod(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    return _divmod(a, b, p)[1]


def _monic(a: Sequence[int], p: int) -> list[int]:
    if not a:
        return []
    inv = pow(a[-1], -1, p)
    return [v * inv % p for v in a]


def _gcd(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, _mod(a, b, p)
    return _monic(a, p)


def _powmod(base: Sequence[int], e: int, modulus: Sequence[int], p: int) -> list[int]:
    result = [1]
    base = _mod(base, modulus, p)
    while e:
        if e & 1:
            result = _mod(_mul(result, base, p), modulus, p)
        e >>= 1
        if e:
            base = _mod(_mul(base, base, p), modulus, p)
    return _mod(result, modulus, p)


def _derivative(a: Sequence[int], p: int) -> list[int]:
    return _trim([i * a[i] % p for i in range(1, len(a))])


def _horner(a: Sequence[int], x: int, p: int) -> int:
    v = 0
    for c in reversed(a):
        v = (v * x + c) % p
    return v


@dataclass(frozen=True)
class PolyModP:
    """A univariate polynomial over F_p, dense, constant term first."""

    p: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(_trim([int(c) % self.p for c in self.coeffs])))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x: int) -> int:
        return _horner(self.coeffs, x, self.p)


@dataclass(frozen=True)
class Specialization:
    """f(y, X) mod p and whether the X**d coefficient survived."""

    poly: PolyModP
    lead_nonzero: bool


def specialize(f: IntMultiPoly, y: Sequence[int], p: int) -> Specialization:
    coeffs = [eval_t_mod(part, y, p) for part in f.by_x_power]
    return Specialization(PolyModP(p, coeffs), coeffs[-1] != 0)


def _require_positive_degree(F: PolyModP):
    if F.degree < 1:
        raise ValueError(f"need degree >= 1, got {F.degree}")


def is_separable(F: PolyModP) -> bool:
    _require_positive_degree(F)
    return len(_gcd(F.coeffs, _derivative(F.coeffs, F.p), F.p)) == 1


def _linear_part(F: PolyModP) -> list[int]:
    """gcd(X**p - X, F): the product of the distinct linear factors of F."""
    xp = _powmod([0, 1], F.p, F.coeffs, F.p)
    return _gcd(F.coeffs, _sub(xp, [0, 1], F.p), F.p)


def has_root(F: PolyModP) -> bool:
    _require_positive_degree(F)
    if F.p < BRUTE_FORCE_PRIME_LIMIT:
        return any(F(x) == 0 for x in range(F.p))
    return len(_linear_part(F)) > 1


def _split_roots(g: list[int], p: int, rng: random.Random) -> list[int]:
    """All roots of g, a monic product of distinct linear factors."""
    if len(g) == 1:
        return []
    if len(g) == 2:
        return [(-g[0]) % p]
    if p == 2:
        return [x for x in (0, 1) if _horner(g, x, p) == 0]
    while True:
        delta = rng.randrange(p)
        h = _powmod([delta, 1], (p - 1) // 2, g, p)
        part = _gcd(g, _sub(h, [1], p), p)
        if 1 < len(part) < len(g):
            rest, _ = _divmod(g, part, p)
            return _split_roots(part, p, rng) + _split_roots(_monic(rest, p), p, rng)


def all_roots(F: PolyModP, rng_seed: int = 0) -> list[int]:
    """Every root of F in F_p, ascending."""
    _require_positive_degree(F)
    if F.p < BRUTE_FORCE_PRIME_LIMIT:
        return [x for x in range(F.p) if F(x) == 0]
    return sorted(_split_roots(_linear_part(F), F.p, random.Random(rng_seed)))


def extract_root(F: PolyModP, rng_seed: int = 0) -> int | None:
    """Some root of F in F_p, or None; deterministic given the seed."""
    _require_positive_degree(F)
    if F.p < BRUTE_FORCE_PRIME_LIMIT:
        return next((x for x in range(F.p) if F(x) == 0), None)
    g = _linear_part(F)
    if len(g) == 1:
        return None
    rng = random.Random(rng_seed)
    while len(g) > 2:
        delta = rng.randrange(F.p)
        h = _powmod([delta, 1], (F.p - 1) // 2, g, F.p) if F.p > 2 else [delta, 1]
        part = _gcd(g, _sub(h, [1], F.p), F.p)
        if 1 < len(part) < len(g):
            g = part
    return (-g[0]) % F.p


def degree_pattern(F: PolyModP) -> tuple[int, ...]:
    """Degrees of the irreducible factors of a separable F (distinct-degree factorization)."""
    _require_positive_degree(F)
    if not is_separable(F):
        raise ValueError("pattern undefined: polynomial is not separable")
    p = F.p
    rest = _monic(F.coeffs, p)
    pattern: list[int] = []
    h = [0, 1]
    i = 0
    while len(rest) - 1 >= 2 * (i + 1):
        i += 1
        h = _powmod(h, p, rest, p)
        g = _gcd(rest, _sub(h, [0, 1], p), p)
        if len(g) > 1:
            pattern.extend([i] * ((len(g) - 1) // i))
            rest = _monic(_divmod(rest, g, p)[0], p)
            h = _mod(h, rest, p)
    if len(rest) > 1:
        pattern.append(len(rest) - 1)
    return tuple(sorted(pattern))


def achievable_degrees(pattern: Sequence[int]) -> frozenset[int]:
    """All subset sums of a multiset of factor degrees."""
    sums = 1
    for k in pattern:
        sums |= sums << k
    return frozenset(i for i in range(sums.bit_length()) if sums >> i & 1)
