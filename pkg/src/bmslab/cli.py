"""Command-line workbench: ``bmslab <subcommand> ...``.

Exit status is 0 on success, 1 when a mathematical comparison fails and 2 on
usage errors.  Rationals are always printed as ``p/q`` strings.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import os
import random
import sys
import threading
import time
from fractions import Fraction
from pathlib import Path
from typing import Callable

from . import __version__
from .exactmath import MPoly, T_direct, T_poly, T_tilde_poly, parse_rat, rat_str

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2
ROUTES = ("brute", "fock", "genus0", "unstable")


class UsageError(Exception):
    """Arguments are well-formed but do not fit the requested operation."""


# ---------------------------------------------------------------------------
# Result cache (JSON lines)
# ---------------------------------------------------------------------------


class ResultCache:
    """Append-only JSON-lines store of computed values keyed by ``(route, m, g, mu)``."""

    def __init__(self, path: str | os.PathLike | None):
        self.path = Path(path) if path else None
        self._lock = threading.Lock()

    @staticmethod
    def key(route: str, m: int, g: int, mu) -> dict:
        return {"route": route, "m": m, "g": g, "mu": list(mu)}

    @staticmethod
    def _key_str(key: dict) -> str:
        return json.dumps(key, sort_keys=True)

    def entries(self) -> list[dict]:
        if self.path is None or not self.path.exists():
            return []
        out = []
        with self.path.open() as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    out.append(json.loads(line))
                except json.JSONDecodeError:
                    continue
        return out

    def lookup(self, key: dict) -> str | None:
        ks = self._key_str(key)
        found = None
        for e in self.entries():
            if self._key_str(e.get("key", {})) == ks:
                found = e.get("value")
        return found

    def write(self, key: dict, value: Fraction) -> None:
        if self.path is None:
            return
        entry = {"key": key, "value": rat_str(value), "version": __version__, "timestamp": time.time()}
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a") as fh:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")

    def rewrite(self, entries: list[dict]) -> None:
        if self.path is None:
            return
        with self._lock:
            tmp = self.path.with_suffix(self.path.suffix + ".tmp")
            with tmp.open("w") as fh:
                for e in entries:
                    fh.write(json.dumps(e, sort_keys=True) + "\n")
            tmp.replace(self.path)


def _cache_from_args(args) -> ResultCache:
    return ResultCache(args.cache_path or os.environ.get("BMSLAB_CACHE"))


# ---------------------------------------------------------------------------
# Routes
# ---------------------------------------------------------------------------


def _route_fn(route: str, m: int, g: int, mu: tuple[int, ...]) -> Callable[[], Fraction]:
    from . import fockspace, permoracle

    if not mu:
        raise UsageError("--mu must list at least one part")
    if route == "brute":
        return lambda: permoracle.bms_connected_bruteforce(m, g, mu)
    if route == "fock":
        return lambda: fockspace.bms_fock(m, g, mu)
    if route == "genus0":
        if g != 0:
            raise UsageError("route genus0 requires --g 0")
        return lambda: permoracle.genus0_formula(m, mu)
    if route == "unstable":
        if g != 0 or len(mu) not in (1, 2):
            raise UsageError("route unstable requires --g 0 and one or two parts")
        if len(mu) == 1:
            return lambda: permoracle.unstable_onepoint(m, mu[0])
        return lambda: permoracle.unstable_twopoint(m, mu[0], mu[1])
    raise UsageError(f"unknown route {route!r}")


def _applicable_routes(m: int, g: int, mu: tuple[int, ...]) -> list[str]:
    from .permoracle import DEFAULT_BUDGET

    out = ["fock"]
    if sum(mu) <= DEFAULT_BUDGET.get(m, 3):
        out.insert(0, "brute")
    if g == 0:
        out.append("genus0")
        if len(mu) <= 2:
            out.append("unstable")
    return out


def compute_value(route: str, m: int, g: int, mu: tuple[int, ...], cache: ResultCache, verify: bool) -> Fraction:
    """Evaluate one route, consulting and feeding the cache."""
    fn = _route_fn(route, m, g, mu)
    key = ResultCache.key(route, m, g, mu)
    cached = cache.lookup(key)
    if cached is not None and not verify:
        return parse_rat(cached)
    value = fn()
    if cached is not None:
        if rat_str(value) != cached:
            raise MismatchError(f"cache entry {key} holds {cached}, recomputation gives {rat_str(value)}")
        return value
    cache.write(key, value)
    return value


class MismatchError(Exception):
    """A mathematical comparison failed."""


def _parse_mu(text: str) -> tuple[int, ...]:
    from .permoracle import Partition

    try:
        return Partition.parse(text).parts
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _emit(obj, as_json: bool, text: str | None = None) -> None:
    if as_json or text is None:
        print(json.dumps(obj, sort_keys=True, indent=2))
    else:
        print(text)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_compute(args) -> int:
    mu = _parse_mu(args.mu)
    cache = _cache_from_args(args)
    if args.cross_check:
        routes = _applicable_routes(args.m, args.g, mu)
        values = {r: compute_value(r, args.m, args.g, mu, cache, args.verify_cache) for r in routes}
        agree = len(set(values.values())) == 1
        report = {
            "m": args.m,
            "g": args.g,
            "mu": list(mu),
            "values": {r: rat_str(v) for r, v in values.items()},
            "agree": agree,
        }
        text = "\n".join(f"{r}: {rat_str(v)}" for r, v in values.items()) + ("\nagree" if agree else "\nMISMATCH")
        _emit(report, args.json, text)
        return EXIT_OK if agree else EXIT_MISMATCH
    value = compute_value(args.route, args.m, args.g, mu, cache, args.verify_cache)
    _emit({"route": args.route, "m": args.m, "g": args.g, "mu": list(mu), "value": rat_str(value)}, args.json, rat_str(value))
    return EXIT_OK


def cmd_table(args) -> int:
    from .permoracle import partitions_of

    cache = _cache_from_args(args)
    rows = []
    for size in range(args.n, args.n * args.mu_max + 1):
        for p in partitions_of(size, args.mu_max):
            if p.length != args.n:
                continue
            v = compute_value(args.route, args.m, args.g, p.parts, cache, args.verify_cache)
            rows.append({"mu": list(p.parts), "value": rat_str(v)})
    if args.json:
        _emit({"m": args.m, "g": args.g, "n": args.n, "route": args.route, "rows": rows}, True)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["mu", "value"])
        for r in rows:
            w.writerow([" ".join(map(str, r["mu"])), r["value"]])
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def cmd_fit(args) -> int:
    from .quasipoly import FitFailure, fit_poly

    try:
        form = fit_poly(args.m, args.g, args.n, degree_cap=args.degree_cap, jobs=args.jobs)
    except FitFailure as exc:
        _emit({"m": args.m, "g": args.g, "n": args.n, "ok": False, "error": str(exc)}, True)
        return EXIT_MISMATCH
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit(form.to_json(), True)
    return EXIT_OK


def _parse_poly(text: str) -> MPoly:
    coeffs = [parse_rat(t) for t in text.split(",") if t.strip()]
    return MPoly.from_univariate(coeffs, "k") if coeffs else MPoly.const(0, ("k",))


def cmd_xi(args) -> int:
    from .spectral import XiMismatch, xi_from_poly

    P = _parse_poly(args.poly)
    try:
        elem = xi_from_poly(args.m, args.d, P)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    except XiMismatch as exc:
        _emit({"ok": False, "error": str(exc)}, True)
        return EXIT_MISMATCH
    series = elem.series(args.order)
    out = elem.to_json()
    out["P"] = str(P)
    out["series"] = [rat_str(c) for c in series.coeffs]
    _emit(out, True)
    return EXIT_OK


def cmd_wcheck(args) -> int:
    from .fockspace import bms_fock
    from .quasipoly import fit_poly
    from .spectral import w_assemble

    form = fit_poly(args.m, args.g, args.n, jobs=args.jobs)
    W = w_assemble(form)
    rows = []
    for mu in itertools.combinations_with_replacement(range(1, args.mu_max + 1), args.n):
        mu = tuple(sorted(mu, reverse=True))
        w = W.coefficient(mu)
        b = bms_fock(args.m, args.g, mu)
        rows.append({"mu": list(mu), "w_value": rat_str(w), "fock_value": rat_str(b), "equal": w == b})
    ok = all(r["equal"] for r in rows)
    _emit({"m": args.m, "g": args.g, "n": args.n, "d": W.d, "minimal_d": W.minimal_d, "ok": ok, "rows": rows}, True)
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_trcheck(args) -> int:
    from .toporec import TRError, expand_and_compare

    if args.m != 2:
        raise UsageError("the recursion is implemented for m = 2 only")
    try:
        report = expand_and_compare(args.g, args.n, args.mu_max)
    except TRError as exc:
        raise UsageError(str(exc)) from exc
    _emit(report, True)
    return EXIT_OK if report["ok"] else EXIT_MISMATCH


def cmd_identities(args) -> int:
    report = run_identities(quick=args.quick, seed=args.seed)
    _emit(report, True)
    return EXIT_OK if all(v["pass"] for v in report["results"].values()) else EXIT_MISMATCH


def cmd_cache(args) -> int:
    cache = _cache_from_args(args)
    if cache.path is None:
        raise UsageError("no cache configured: pass --cache-path or set BMSLAB_CACHE")
    entries = cache.entries()
    if args.action == "verify":
        bad = []
        for e in entries:
            k = e["key"]
            try:
                v = _route_fn(k["route"], k["m"], k["g"], tuple(k["mu"]))()
            except UsageError:
                bad.append({"key": k, "reason": "invalid key"})
                continue
            if rat_str(v) != e["value"]:
                bad.append({"key": k, "cached": e["value"], "recomputed": rat_str(v)})
        _emit({"entries": len(entries), "ok": not bad, "mismatches": bad}, True)
        return EXIT_OK if not bad else EXIT_MISMATCH
    # gc: keep the last entry per key and drop unparseable lines
    latest: dict[str, dict] = {}
    for e in entries:
        if "key" in e and "value" in e:
            latest[ResultCache._key_str(e["key"])] = e
    kept = list(latest.values())
    cache.rewrite(kept)
    _emit({"before": len(entries), "after": len(kept)}, True)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Identity suite
# ---------------------------------------------------------------------------


def _check(fn: Callable[[], tuple[bool, dict]]) -> dict:
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash in a check is a failed check
        ok, detail = False, {"error": f"{type(exc).__name__}: {exc}"}
    return {"pass": bool(ok), "detail": detail, "seconds": round(time.perf_counter() - t0, 3)}


def run_identities(quick: bool = False, seed: int = 0) -> dict:
    """Exact checks of the operator calculus, the xi-space solve and the Faulhaber identities."""
    from . import aops, fockspace, spectral

    rng = random.Random(seed)
    ms = (2, 3)
    kmax = 3 if quick else 4
    pmax = 1 if quick else 2
    ls = [Fraction(x, 2) for x in range(-5, 6, 2)]
    H = Fraction(1, 2)

    def check_delta_power():
        bad = [(t, k) for k in range(1, 6) for t in range(k + 1, k + 3) if not aops.delta_power_p_check(t, k)]
        return not bad, {"failures": bad}

    def check_e_coefficients():
        bad = []
        for m in ms:
            for k in range(1, kmax + 1):
                oracle = fockspace.windowed_conjugation_oracle(m, k, 8)
                for q in range(-k, 4):
                    for p in range(pmax + 1):
                        for l in ls:
                            val = aops.acheck_E_coeff(m, k, q, p, l)
                            if val != oracle.entry(l - q, l)[p + q]:
                                bad.append([m, k, q, p, rat_str(l)])
        return not bad, {"failures": bad}

    def check_r_polynomial():
        bad = []
        for m in ms:
            for p in range(pmax + 1):
                R = aops.r_poly(p, m)
                Q = aops.q_coeffs(p, m)
                # Q^0 is the constant 1, so divisibility only makes sense from p = 1
                if p >= 1 and not Q[(0,) * m].divisible_by_linear("k", 0):
                    bad.append(["Q0 not divisible by k", m, p])
                for _ in range(4):
                    k = rng.randint(1, 5)
                    i = [rng.randint(0, k) for _ in range(m)]
                    l = Fraction(rng.randint(-7, 7), 2)
                    v = aops.r_value(p, m, k, l, i)
                    pv = R.subs({"k": k, "l": l, **{f"i{j + 1}": i[j] for j in range(m)}})
                    if v != pv:
                        bad.append(["value", m, p, k, i, rat_str(l)])
                    if R.total_degree() > 2 * p:
                        bad.append(["degree", m, p, R.total_degree()])
                for k in range(1, 4):
                    if aops.r_value(p, m, k, -H, [k] * m) != int(p == 0):
                        bad.append(["corner", m, p, k])
        return not bad, {"failures": bad}

    def check_s_degree():
        rows = []
        for m in ms:
            for p in range(3 if not quick else 2):
                for q in (1, 2):
                    S = aops.s_numerator(m, p, q)
                    deg = S.degree("k")
                    rows.append({"m": m, "p": p, "q": q, "degree": deg, "bound": 6 * p + q, "within": deg <= 6 * p + q})
        return all(r["within"] for r in rows), {"rows": rows}

    def check_id_coefficients():
        bad = []
        for m in ms:
            for k in range(1, kmax + 1):
                oracle = fockspace.windowed_conjugation_oracle(m, k, 8)
                for p in range(-1, pmax + 1):
                    if aops.acheck_Id_coeff(m, k, p) != oracle.identity[p]:
                        bad.append([m, k, p])
        return not bad, {"failures": bad}

    def check_s_id_from_rho():
        bad = []
        for m in (2, 3, 4):
            for p in range(3):
                S = aops.s_id_numerator(m, p)
                if aops.RatFun(S.with_vars(("k",))) != aops.s_id_from_rho(p + 1, m):
                    bad.append([m, p])
        return not bad, {"failures": bad}

    def check_backward_difference():
        bad = []
        for m in (1, 2, 3):
            for k in range(1, 4):
                for i in itertools.product(range(k + 1), repeat=m):
                    for j in range(1, m + 1):
                        if i[j - 1] >= 1 and not aops.delta_r_check(m, k, i, j):
                            bad.append([m, k, list(i), j])
        return not bad, {"failures": bad}

    def check_euler():
        bad = []
        for m in range(1, 6):
            for p in range(4):
                E = aops.euler_identity_symbolic(m, p)
                K = MPoly.var("k")
                want = K * K * Fraction(m * (m - 1), 2) if p == 1 else MPoly.const(0, ("k",))
                if E != want.with_vars(("k",)):
                    bad.append([m, p])
        return not bad, {"failures": bad}

    def check_s_id_divisibility():
        bad = []
        for m in (2, 3, 4):
            for p in range(4):
                r = aops.rho(p, m)
                if r(0) != int(p == 0) or r(Fraction(1, 1 - m)) != int(p == 0):
                    bad.append(["rho", m, p])
                S = aops.s_id_numerator(m, p)
                if not S.divisible_by_linear("k", 0):
                    bad.append(["k", m, p])
                else:
                    q1, _ = S.divmod_linear("k", 0)
                    if not q1.divisible_by_linear("k", 0):
                        bad.append(["k^2", m, p])
                if not S.divisible_by_linear("k", Fraction(1, 1 - m)):
                    bad.append(["mk-k+1", m, p])
        return not bad, {"failures": bad}

    def check_dagger():
        bad = []
        for m in ms:
            for r in range(1, 4):
                for q in range(r, r + 3):
                    for p in range(pmax + 1):
                        for l in (-H, H, Fraction(3, 2)):
                            try:
                                aops.adagger_E_coeff(m, r, q, p, l)
                            except aops.ConsistencyError:
                                bad.append([m, r, q, p, rat_str(l)])
        return not bad, {"failures": bad}

    def check_tilde():
        bad = []
        for m in ms:
            for p in range(pmax + 1):
                R = aops.r_poly(p, m)
                Rt = aops.r_tilde_poly(p, m)
                if Rt != R.subs({"k": -MPoly.var("k", R.vars)}).with_vars(Rt.vars):
                    bad.append([m, p])
        return not bad, {"failures": bad}

    def check_residue():
        rows = []
        for m in ms:
            for r in range(1, 4):
                for q in range(1, 5):
                    for p in range(pmax + 1):
                        ok, lhs, rhs = aops.residue_relation_check(m, r, q, p, H)
                        ok2, _, rhs2 = aops.residue_relation_check(m, r, q, p, H, constant="observed")
                        rows.append(
                            {"m": m, "r": r, "q": q, "p": p, "residue": rat_str(lhs), "c_times_dagger": rat_str(rhs),
                             "equal": ok, "equal_with_minus_r_c": ok2}
                        )
        return all(x["equal"] for x in rows), {
            "rows": rows,
            "all_equal_with_minus_r_c": all(x["equal_with_minus_r_c"] for x in rows),
        }

    def check_xi():
        bad = []
        for m in ms:
            for d in range(3):
                N = m * (d + 1)
                for _ in range(5 if quick else 20):
                    P = MPoly.from_univariate([Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(N)], "k")
                    try:
                        e = spectral.xi_from_poly(m, d, P)
                        if spectral.xi_poly_of(e) != P:
                            bad.append([m, d, str(P)])
                    except Exception as exc:
                        bad.append([m, d, str(P), str(exc)])
        return not bad, {"failures": bad}

    def check_t_direct():
        bad = [(d, x, k) for d in range(6) for x in range(-3, 4) for k in range(0, 7)
               if T_poly(d).subs({"x": x, "k": k}) != T_direct(d, x, k)]
        return not bad, {"failures": bad}

    def check_t_reflection():
        bad = []
        for d in range(9):
            T = T_poly(d)
            refl = T.subs({"k": -MPoly.var("k", T.vars)}).with_vars(T.vars)
            if T_tilde_poly(d).with_vars(T.vars) != refl:
                bad.append(d)
        return not bad, {"failures": bad}

    def check_t_divisibility():
        bad = [d for d in range(1, 9) if not T_poly(d).divisible_by_linear("k", 0) or T_poly(d).total_degree() != 2 * d]
        return not bad, {"failures": bad}

    checks = {
        "delta_power": check_delta_power,
        "e_coefficients": check_e_coefficients,
        "r_polynomial": check_r_polynomial,
        "s_degree_bound": check_s_degree,
        "id_coefficients": check_id_coefficients,
        "s_id_from_rho": check_s_id_from_rho,
        "backward_difference": check_backward_difference,
        "euler_operator": check_euler,
        "s_id_divisibility": check_s_id_divisibility,
        "dagger_coefficients": check_dagger,
        "tilde_reflection": check_tilde,
        "residue_relation": check_residue,
        "xi_normal_form": check_xi,
        "t_poly_direct": check_t_direct,
        "t_reflection": check_t_reflection,
        "t_divisibility": check_t_divisibility,
    }
    results = {name: _check(fn) for name, fn in checks.items()}
    return {"quick": quick, "seed": seed, "results": results}


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bmslab", description="Exact BMS number workbench.")
    parser.add_argument("--version", action="version", version=f"bmslab {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit JSON")
    common.add_argument("--cache-path", default=None, help="JSON-lines cache (default: $BMSLAB_CACHE)")
    common.add_argument("--verify-cache", action="store_true", help="recompute cached values and compare")
    common.add_argument("--jobs", type=_positive, default=os.cpu_count() or 1, help="worker processes")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", parents=[common], help="one BMS number")
    p.add_argument("--m", type=_positive, required=True)
    p.add_argument("--g", type=_nonneg, default=0)
    p.add_argument("--mu", required=True, help="comma-separated parts, e.g. 3,1")
    p.add_argument("--route", choices=ROUTES, default="fock")
    p.add_argument("--cross-check", action="store_true", help="run every applicable route and compare")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("table", parents=[common], help="all partitions with n parts up to --mu-max")
    p.add_argument("--m", type=_positive, required=True)
    p.add_argument("--g", type=_nonneg, default=0)
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--mu-max", type=_positive, default=4)
    p.add_argument("--route", choices=ROUTES, default="fock")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("fit", parents=[common], help="fit the quasi-polynomial numerator")
    p.add_argument("--m", type=_positive, required=True)
    p.add_argument("--g", type=_nonneg, default=0)
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--degree-cap", type=_nonneg, default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("xi", parents=[common], help="element of Xi^d for a numerator polynomial")
    p.add_argument("--m", type=_positive, required=True)
    p.add_argument("--d", type=_nonneg, default=0)
    p.add_argument("--poly", default="1", help="coefficients of P(k), constant term first")
    p.add_argument("--order", type=_positive, default=8)
    p.set_defaults(func=cmd_xi)

    p = sub.add_parser("w-check", parents=[common], help="compare the assembled W with BMS numbers")
    p.add_argument("--m", type=_positive, required=True)
    p.add_argument("--g", type=_nonneg, default=0)
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--mu-max", type=_positive, default=4)
    p.set_defaults(func=cmd_wcheck)

    p = sub.add_parser("tr-check", parents=[common], help="topological recursion versus the fock route (m = 2)")
    p.add_argument("--m", type=_positive, default=2)
    p.add_argument("--g", type=_nonneg, default=0)
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--mu-max", type=_positive, default=4)
    p.set_defaults(func=cmd_trcheck)

    p = sub.add_parser("identities", parents=[common], help="run the identity suite")
    p.add_argument("--quick", action="store_true", help="smaller parameter ranges")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser("cache", parents=[common], help="cache maintenance")
    p.add_argument("action", choices=("verify", "gc"))
    p.set_defaults(func=cmd_cache)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits with status 2
    except MismatchError as exc:
        print(f"mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except Exception as exc:
        from .permoracle import BudgetError

        if isinstance(exc, BudgetError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        raise


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
