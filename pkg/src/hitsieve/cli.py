"""Command-line front end: polynomial parsing, subcommands, CSV/JSON output.

Exit codes: 0 success, 1 contract violation (bad input), 2 internal error.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import re
import sys
from dataclasses import dataclass
from typing import Sequence

from . import lemmas, pipeline, sieve
from .polymod import IntMultiPoly

log = logging.getLogger("hitsieve")

SUBCOMMANDS = ("density", "sieve", "primes", "clique", "orders", "lemmas", "gcdstats", "schedule")


class ContractViolation(Exception):
    pass


class PolySyntaxError(ContractViolation):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


_TOKEN = re.compile(r"\s*(?:(\d+)|(t\d+|X)|([-+*^()]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            bad = len(text[pos:]) - len(text[pos:].lstrip()) + pos
            raise PolySyntaxError(f"unexpected character {text[bad]!r}", bad)
        start = m.start(m.lastindex)
        kind = ("int", "var", "op")[m.lastindex - 1]
        tokens.append((kind, m.group(m.lastindex), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


# Sparse polynomials during parsing: {((var, exp), ...): coeff} with var 0 = X, i = t_i.
def _padd(a: dict, b: dict, sign: int = 1) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + sign * v
    return {k: v for k, v in out.items() if v}


def _pmul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            exps = dict(ka)
            for var, e in kb:
                exps[var] = exps.get(var, 0) + e
            key = tuple(sorted(exps.items()))
            out[key] = out.get(key, 0) + va * vb
    return {k: v for k, v in out.items() if v}


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expr(self) -> dict:
        acc = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            sign = 1 if self.take()[1] == "+" else -1
            acc = _padd(acc, self.term(), sign)
        return acc

    def term(self) -> dict:
        acc = self.unary()
        while self.peek()[:2] == ("op", "*"):
            self.take()
            acc = _pmul(acc, self.unary())
        return acc

    def unary(self) -> dict:
        if self.peek()[0] == "op" and self.peek()[1] in ("+", "-"):
            sign = 1 if self.take()[1] == "+" else -1
            return {k: sign * v for k, v in self.unary().items()}
        return self.power()

    def power(self) -> dict:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            kind, val, pos = self.take()
            if kind != "int":
                raise PolySyntaxError("expected a nonnegative integer exponent", pos)
            out = {(): 1}
            for _ in range(int(val)):
                out = _pmul(out, base)
            return out
        return base

    def atom(self) -> dict:
        kind, val, pos = self.take()
        if kind == "int":
            return {(): int(val)} if int(val) else {}
        if kind == "var":
            var = 0 if val == "X" else int(val[1:])
            if var == 0 and val != "X":
                raise PolySyntaxError("variables are t1, t2, ...; t0 is not allowed", pos)
            return {((var, 1),): 1}
        if (kind, val) == ("op", "("):
            inner = self.expr()
            kind, val, pos2 = self.take()
            if (kind, val) != ("op", ")"):
                raise PolySyntaxError("expected ')'", pos2)
            return inner
        raise PolySyntaxError(f"unexpected {val or 'end of input'!r}", pos)


def parse_poly(text: str) -> IntMultiPoly:
    """Parse e.g. 'X^3 + t1*X + t2' into an IntMultiPoly (r = largest t index used)."""
    parser = _Parser(text)
    sparse = parser.expr()
    kind, val, pos = parser.peek()
    if kind != "end":
        raise PolySyntaxError(f"unexpected {val!r}", pos)
    if not sparse:
        raise ContractViolation("zero polynomial")
    r = max((var for key in sparse for var, _ in key), default=0)
    terms = {}
    for key, c in sparse.items():
        exps = dict(key)
        terms[(tuple(exps.get(i, 0) for i in range(1, r + 1)), exps.get(0, 0))] = c
    if max(k for _, k in terms) < 1:
        raise ContractViolation("deg_X f ≥ 1 violated: the polynomial does not involve X")
    return IntMultiPoly(r, terms)


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


@dataclass
class RunConfig:
    command: str
    poly: IntMultiPoly | None
    base: tuple[int, ...]
    args: argparse.Namespace

    @classmethod
    def from_args(cls, args: argparse.Namespace, needs_poly: bool) -> RunConfig:
        poly = parse_poly(args.poly) if args.poly else None
        if needs_poly and poly is None:
            raise ContractViolation(f"{args.command} needs --poly, e.g. --poly 'X^2 - t1 - 1'")
        base = tuple(args.base or ())
        bad = [b for b in base if b in (0, 1, -1)]
        if bad:
            raise ContractViolation(f"--base entries {bad} not allowed: bases must satisfy a ∈ (ℤ ∖ {{0, ±1}})^r")
        if poly is not None and len(base) != poly.r:
            raise ContractViolation(f"polynomial uses t1..t{poly.r} but --base gives {len(base)} values")
        return cls(args.command, poly, base, args)


class _Parser_(argparse.ArgumentParser):
    def error(self, message):
        raise ContractViolation(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser_(add_help=False)
    common.add_argument("--poly", help="polynomial in t1..tr and X, e.g. 'X^3 + t1*X + t2'")
    common.add_argument("--base", type=_int_list, help="comma-separated bases a1,..,ar with |a_i| >= 2")
    common.add_argument("--mode", choices=[m.value for m in sieve.Mode], default="no_root")
    common.add_argument("--N", type=_int_list, help="comma-separated sweep bounds")
    common.add_argument("--ell", type=_int_list, help="order-index bound(s)")
    common.add_argument("--x", type=int, help="interval anchor: primes in (x, 2x]")
    common.add_argument("--z", type=_int_list, help="gcd threshold(s)")
    common.add_argument("--t", type=int, help="number of sites")
    common.add_argument("--limit", type=int, help="prime bound / site cap / summation limit")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--out", help="output file (default: standard output)")
    common.add_argument("--json", metavar="PATH", help="also write a JSON dump to PATH")
    common.add_argument("--ctol", type=float, help="tolerance constant for lemma checks")
    common.add_argument("--c", type=float, default=1.0, help="constant c in c*t <= z (schedule)")
    common.add_argument("--check", default="all", choices=["all", "one_prime", "many_primes", "zariski", "phi_tail"])
    common.add_argument("--sample", type=int, help="density: draw this many random n instead of the full cube")
    common.add_argument("--budget", type=int, default=sieve.DEFAULT_FALLBACK_BITS, help="max bits for exact fallback")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser_(prog="hitsieve", description="Certified mod-p sieving of f(a^n, X)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser_)
    helps = {
        "density": "density of favorable n over [-N, N]^r",
        "sieve": "per-n certificate dump",
        "primes": "qualified prime sites",
        "clique": "Turan clique in the gcd(p-1, q-1) graph",
        "orders": "order-density curve d_ell",
        "lemmas": "numerical lemma checks",
        "gcdstats": "histogram of gcd(p-1, q-1)",
        "schedule": "(t, z, x) parameter schedule with constraint slack",
    }
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def _one(values: Sequence[int] | None, default: int, flag: str) -> int:
    if not values:
        return default
    if len(values) != 1:
        raise ContractViolation(f"{flag} takes a single value here")
    return values[0]


def _sieve_config(cfg: RunConfig) -> sieve.SieveConfig:
    a = cfg.args
    ell = _one(a.ell, 8, "--ell")
    x = a.x or 100
    want = a.t or 12
    sel = pipeline.select_sites(cfg.poly, cfg.base, ell, x, want)
    if not sel.sites:
        raise ContractViolation(f"no qualified primes in ({x}, {2 * x}] with ell = {ell}; raise --ell or --x")
    N = max(a.N or [0])
    log.info("sites %s (qualification rate %.3f)", [s.p for s in sel.sites], sel.rate)
    return sieve.SieveConfig(cfg.poly, cfg.base, N, sel.sites, a.mode, a.budget, a.seed)


def cmd_density(cfg: RunConfig) -> str:
    if not cfg.args.N:
        raise ContractViolation("density needs --N, e.g. --N 20,50,100")
    sc = _sieve_config(cfg)
    report = sieve.density_sweep(sc, cfg.args.N, workers=cfg.args.threads, sample=cfg.args.sample, seed=cfg.args.seed)
    if cfg.args.json:
        top = max(cfg.args.N)
        certs = sieve.certify_many(sc, list(sieve.box(top, sc.f.r)), cfg.args.threads)
        _write(cfg.args.json, sieve.certificates_json(certs))
    log.info("telemetry:\n%s", report.telemetry_csv())
    return report.to_csv()


def cmd_sieve(cfg: RunConfig) -> str:
    N = _one(cfg.args.N, 0, "--N") if cfg.args.N else None
    if N is None:
        raise ContractViolation("sieve needs --N (the cube [-N, N]^r to certify)")
    sc = _sieve_config(cfg)
    certs = sieve.certify_many(sc, list(sieve.box(N, sc.f.r)), cfg.args.threads)
    if cfg.args.json:
        _write(cfg.args.json, sieve.certificates_json(certs))
    return sieve.certificates_csv(certs)


def cmd_primes(cfg: RunConfig) -> str:
    ell = _one(cfg.args.ell, 8, "--ell")
    x = cfg.args.x or 100
    sel = pipeline.select_sites(cfg.poly, cfg.base, ell, x, cfg.args.limit)
    log.info("tested %d, accepted %d (rate %.4f); rejections %s", sel.tested, sel.accepted, sel.rate, dict(sel.rejections))
    return pipeline.sites_csv(sel.sites)


def cmd_clique(cfg: RunConfig) -> str:
    ell = _one(cfg.args.ell, 8, "--ell")
    z = _one(cfg.args.z, 20, "--z")
    x = cfg.args.x or 10**5
    sel = pipeline.select_sites(cfg.poly, cfg.base, ell, x, cfg.args.limit)
    if not sel.sites:
        raise ContractViolation(f"no qualified primes in ({x}, {2 * x}] with ell = {ell}")
    res = pipeline.clique_extract(sel.sites, z, x)
    log.info(
        "clique of size %d on %d vertices; edge density %.6f; Turan bound %d (%s)",
        len(res.sites), res.n_vertices, float(res.edge_density), res.turan_bound,
        "met" if res.meets_turan else "NOT met",
    )
    return pipeline.clique_csv(res)


def cmd_orders(cfg: RunConfig) -> str:
    if len(cfg.base) != 1:
        raise ContractViolation("orders takes a single base, e.g. --base 2")
    ells = cfg.args.ell or [1, 2, 4, 8, 16, 32, 64]
    limit = cfg.args.limit or 10**6
    return pipeline.d_ell_csv(pipeline.d_ell_curve(cfg.base[0], ells, limit))


def cmd_gcdstats(cfg: RunConfig) -> str:
    x = cfg.args.x or 1000
    if cfg.poly is not None:
        ell = _one(cfg.args.ell, 8, "--ell")
        primes = [s.p for s in pipeline.select_sites(cfg.poly, cfg.base, ell, x, cfg.args.limit).sites]
    else:
        primes = pipeline.prime_range(x)[: cfg.args.limit]
    stats = pipeline.gcd_pair_stats(primes, cfg.args.z or [])
    for z, frac in stats.fraction_at_most.items():
        log.info("fraction of pairs with gcd <= %d: %.6f", z, float(frac))
    return pipeline.gcd_hist_csv(stats)


def cmd_schedule(cfg: RunConfig) -> str:
    rows = [pipeline.schedule_parameters(N, cfg.args.c) for N in (cfg.args.N or [10**6])]
    lines = ["N,t,z,x,c,slack_cons1_lower,slack_cons1_upper,slack_cons2,slack_cons3,violations"]
    for s in rows:
        sl = s.slack
        lines.append(
            f"{s.N},{s.t},{s.z},{s.x},{s.c:g},{sl['cons1_lower']:.6g},{sl['cons1_upper']:.6g},"
            f"{sl['cons2']},{sl['cons3']},{';'.join(s.violations)}"
        )
    violated = [s for s in rows if not s.ok]
    if violated:
        _write(cfg.args.out, "\n".join(lines) + "\n")
        raise ContractViolation(
            "schedule constraints violated: " + "; ".join(f"N={s.N}: {', '.join(s.violations)}" for s in violated)
        )
    return "\n".join(lines) + "\n"


def cmd_lemmas(cfg: RunConfig) -> str:
    a = cfg.args
    which = a.check
    results: list[lemmas.LemmaCheckResult] = []
    if which in ("one_prime", "many_primes", "zariski") and cfg.poly is None:
        raise ContractViolation(f"--check {which} needs --poly and --base")
    if cfg.poly is not None and which != "phi_tail":
        ell = _one(a.ell, 8, "--ell")
        x = a.x or 1000
        sel = pipeline.select_sites(cfg.poly, cfg.base, ell, x, None)
        if not sel.sites:
            raise ContractViolation(f"no qualified primes in ({x}, {2 * x}] with ell = {ell}")
        if which in ("all", "one_prime"):
            ctol = a.ctol if a.ctol is not None else lemmas.ONE_PRIME_CTOL
            results += [lemmas.one_prime_check(cfg.poly, s, ctol) for s in sel.sites[: a.t or 20]]
        if which in ("all", "many_primes"):
            ctol = a.ctol if a.ctol is not None else lemmas.MANY_PRIMES_CTOL
            z = _one(a.z, 20, "--z")
            clique = pipeline.clique_extract(sel.sites, z, x)
            chosen, M = [], 1
            for s in clique.sites:
                if len(chosen) == 2:
                    break
                if math.lcm(M, s.p - 1) <= lemmas.MANY_PRIMES_MAX_M:
                    chosen.append(s)
                    M = math.lcm(M, s.p - 1)
            results.append(lemmas.many_primes_check(cfg.poly, cfg.base, chosen, ctol, x=x, seed=a.seed))
        if which in ("all", "zariski"):
            ctol = a.ctol if a.ctol is not None else lemmas.ZARISKI_CTOL
            N = max(a.N or [10**3 * 4])
            results.append(lemmas.zariski_check(cfg.poly, cfg.base, sel.sites[0], max(N, sel.sites[0].p), ctol))
    if which in ("all", "phi_tail"):
        results.append(lemmas.phi_tail_check([10, 100, 1000], a.limit or 10**7))
    if a.json:
        _write(a.json, "".join(r.to_json() + "\n" for r in results))
    return lemmas.results_csv(results)


COMMANDS = {
    "density": (cmd_density, True),
    "sieve": (cmd_sieve, True),
    "primes": (cmd_primes, True),
    "clique": (cmd_clique, True),
    "orders": (cmd_orders, False),
    "lemmas": (cmd_lemmas, False),
    "gcdstats": (cmd_gcdstats, False),
    "schedule": (cmd_schedule, False),
}


def _write(path: str | None, text: str):
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def run(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s", stream=sys.stderr)
        func, needs_poly = COMMANDS[args.command]
        cfg = RunConfig.from_args(args, needs_poly)
        _write(args.out, func(cfg))
        return 0
    except (ContractViolation, pipeline.Disqualified, lemmas.EnumerationTooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        # downstream reader (e.g. head) closed early; not an error of ours
        sys.stderr.close()
        return 0
    except ValueError as exc:
        # IntMultiPoly / SieveConfig validation
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - reported, not swallowed
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())
