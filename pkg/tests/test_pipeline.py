import itertools
import math
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from hitsieve.arith import factorize, prime_range
from hitsieve.pipeline import (
    Disqualified,
    PrimeSite,
    clique_csv,
    clique_extract,
    d_ell_curve,
    d_ell_estimate,
    gcd_pair_stats,
    qualify,
    schedule_parameters,
    select_sites,
)


def brute_order(a, p):
    return next(e for e in range(1, p) if pow(a, e, p) == 1)


def bare_site(p):
    return PrimeSite(p, factorize(p - 1), (p - 1,), (1,))


def test_qualify_examples(poly):
    f = poly("X^2 - t1 - 1")
    site = qualify(f, [2], 7, 2)
    assert site.orders == (3,) and site.indices == (2,)
    with pytest.raises(Disqualified, match="order too small"):
        qualify(f, [2], 7, 1)
    with pytest.raises(Disqualified, match="divides a base"):
        qualify(f, [2], 2, 8)


def test_qualify_rejection_paths(poly):
    # leading coefficient 3*t1 vanishes mod 3
    with pytest.raises(Disqualified) as exc:
        qualify(poly("3*t1*X^2 + X + t1"), [2], 3, 8)
    assert exc.value.reason == "leading coefficient vanishes mod p"
    # disc of X^2 + 5*t1 is -20*t1, zero mod 5
    with pytest.raises(Disqualified) as exc:
        qualify(poly("X^2 + 5*t1"), [2], 5, 8)
    assert exc.value.reason == "discriminant vanishes mod p"


def test_qualify_rejects_bad_bases(poly):
    for bad in (0, 1, -1):
        with pytest.raises(ValueError):
            qualify(poly("X^2 - t1"), [bad], 7, 2)


def test_select_sites_examples(poly):
    f = poly("X^2 - t1 - 1")
    sel = select_sites(f, [2], 4, 100, 5)
    assert len(sel.sites) == 5
    assert [s.p for s in sel.sites] == sorted(s.p for s in sel.sites)
    for s in sel.sites:
        assert 100 < s.p <= 200
        assert brute_order(2, s.p) * 4 >= s.p - 1
        assert qualify(f, [2], s.p, 4) == s
    assert select_sites(f, [2], 4, 100, 0).sites == []


def test_select_sites_square_base_never_primitive(poly):
    sel = select_sites(poly("X^2 - t1 - 1"), [4], 1, 100)
    assert sel.sites == [] and sel.rate == 0.0


def test_d_ell_examples():
    d1 = d_ell_estimate(2, 1, 10**6)
    assert 0.35 < d1 < 0.40
    assert d_ell_estimate(2, 10**6, 10**6) == 1
    assert d_ell_estimate(4, 1, 10**4) == 0


def test_d_ell_brute_small():
    ps = [p for p in sympy.primerange(3, 2001)]
    for ell in (1, 2, 3, 8):
        want = Fraction(sum(brute_order(2, p) * ell >= p - 1 for p in ps), len(ps))
        assert d_ell_estimate(2, ell, 2000) == want


def test_d_ell_monotone():
    curve = d_ell_curve(3, [1, 2, 3, 4, 6, 8, 12, 16], 50000)
    vals = [v for _, v in curve]
    assert vals == sorted(vals)


def test_clique_examples():
    res = clique_extract([bare_site(p) for p in (5, 7, 13)], 2)
    assert res.primes == (5, 7)
    odd = [bare_site(p) for p in prime_range(100)]
    assert len(clique_extract(odd, 1).sites) == 1


def test_clique_fifty_sites_turan(poly):
    sel = select_sites(poly("X^2 - t1 - 1"), [2], 8, 10**5, 50)
    res = clique_extract(sel.sites, 20, 10**5)
    ps = res.primes
    assert all(math.gcd(p - 1, q - 1) <= 20 for p, q in itertools.combinations(ps, 2))
    edges = sum(math.gcd(p.p - 1, q.p - 1) <= 20 for p, q in itertools.combinations(sel.sites, 2))
    assert res.n_edges == edges
    n = len(sel.sites)
    assert res.edge_density == Fraction(2 * edges, n * n)
    assert len(ps) >= math.ceil(1 / (1 - res.edge_density))
    assert res.meets_turan


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from(list(sympy.primerange(3, 400))), min_size=1, max_size=40, unique=True),
       st.integers(1, 30))
def test_clique_is_clique_and_meets_turan(ps, z):
    res = clique_extract([bare_site(p) for p in ps], z)
    assert all(math.gcd(p - 1, q - 1) <= z for p, q in itertools.combinations(res.primes, 2))
    assert res.meets_turan
    assert res == clique_extract([bare_site(p) for p in reversed(ps)], z)


def test_clique_csv_header():
    res = clique_extract([bare_site(p) for p in (5, 7, 13)], 2)
    head = clique_csv(res).splitlines()[0]
    assert head == "p,max_pair_gcd,z,x,vertices,edge_density,turan_bound,clique_size"


def test_gcd_pair_stats_examples():
    assert gcd_pair_stats([3, 5]).histogram == {2: 1}
    assert gcd_pair_stats([5, 13, 17]).histogram == {4: 3}
    stats = gcd_pair_stats(prime_range(1000), [20])
    ps = prime_range(1000)
    brute = sum(math.gcd(p - 1, q - 1) <= 20 for p, q in itertools.combinations(ps, 2))
    assert stats.fraction_at_most[20] == Fraction(brute, math.comb(len(ps), 2))
    assert stats.fraction_at_most[20] > 0.9


def test_schedule():
    s = schedule_parameters(10**3)
    assert s.t == 1 and s.ok
    s = schedule_parameters(10**6)
    assert (s.t, s.x) == (1, 1000)
    for N in (10**3, 10**6, 10**9, 10**12, 10**30, 10**100):
        s = schedule_parameters(N)
        assert s.t * s.x < N and (2 * s.x) ** s.t < N
        assert s.x ** (2 * s.t) <= N < (s.x + 1) ** (2 * s.t)
    with pytest.raises(ValueError):
        schedule_parameters(999)
