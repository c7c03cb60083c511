"""The thirteen acceptance checks, shared by ``hofa selftest`` and the test suite.

Each check draws its instances from a SplitMix64 stream derived from the run
seed and its own number, so the checks can run in any order or alone. A check
returns a ``CriterionResult`` holding a per-instance table; tables contain no
timings, which keeps the output tree byte-identical between runs.
"""

from __future__ import annotations

import filecmp
import tempfile
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import additive, brackets, equidist, fourier, gowers, linalg, rbpl
from .brackets import FracProd, elementary, eval_mod1, is_periodic_phase
from .nilmani import ElemNilmanifold, PolySeq, nil_phase
from .parallel import pmap
from .ratmod import Poly, fmt, frac, has_denominator, int_part
from .rng import SplitMix64
from .tables import emit_table

DEFAULT_SEED = 20240601
FLOAT_TOL = 1e-12


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    summary: str
    columns: list[str] = field(default_factory=list)
    rows: list[dict[str, Any]] = field(default_factory=list)
    # set when the checked statement is itself false; the FAIL is expected
    known_failure: str | None = None
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} [{self.number:02d}] {self.title}: {self.summary}"


def _rng(seed: int, number: int) -> SplitMix64:
    return SplitMix64(seed * 1_000_003 + number)


def _num(rng: SplitMix64, N: int, span: int = 2) -> Fraction:
    """Random element of (1/N)Z in [-span, span]."""
    return Fraction(rng.randint(-span * N, span * N), N)


# 1 and 2: periodic elementary quadratics -----------------------------------------

def periodic_corpus(seed: int, per_n: int = 200, moduli=(7, 31, 101)) -> list[tuple[int, PolySeq]]:
    rng = _rng(seed, 1)
    out = []
    for N in moduli:
        for _ in range(per_n):
            d = rng.randint(1, 3)
            alpha = [_num(rng, N) for _ in range(d)]
            beta = [_num(rng, N) for _ in range(d)]
            q = brackets.periodic_quadratic_base(alpha, beta, N) + Fraction(rng.randint(-2 * N, 2 * N), 2 * N)
            b = brackets.periodic_linear_base(q, N) + Fraction(rng.randint(-N, N), N)
            c = Fraction(rng.randint(-12, 12), rng.randint(1, 12))
            out.append((N, PolySeq(tuple(alpha), tuple(beta), Poly.of(c, b, q))))
    return out


def _phase_agreement(item: tuple[int, PolySeq]) -> dict:
    N, g = item
    M = ElemNilmanifold(g.d)
    expr = g.phase_expr(M)
    mismatches = sum(1 for n in range(N) if nil_phase(M, g, n) != eval_mod1(expr, n))
    return {"N": N, "d": g.d, "quadratic": g.P.coeff(2), "linear": g.P.coeff(1),
            "periodic": is_periodic_phase(expr, N), "mismatches": mismatches}


def criterion_1(seed: int) -> CriterionResult:
    t0 = time.perf_counter()
    rows = pmap(_phase_agreement, periodic_corpus(seed))
    elapsed = time.perf_counter() - t0
    bad = sum(r["mismatches"] for r in rows)
    nonper = sum(1 for r in rows if not r["periodic"])
    ok = bad == 0 and nonper == 0 and elapsed < 60
    return CriterionResult(1, "bracket phase equals nilsequence phase", ok,
                           f"{len(rows)} instances, {bad} mismatching points, {nonper} non-periodic inputs",
                           ["N", "d", "quadratic", "linear", "periodic", "mismatches"], rows, seconds=elapsed)


def nonconforming_corpus(seed: int, count: int = 50) -> list[tuple[int, str, PolySeq]]:
    """Three kinds: linear coefficient off by 1/(2N), quadratic off by 1/(4N), alpha off the 1/N grid."""
    rng = _rng(seed, 2)
    out = []
    moduli = (7, 31, 101)
    for i in range(count):
        N = moduli[i % 3]
        d = rng.randint(1, 3)
        alpha = [_num(rng, N) for _ in range(d)]
        beta = [_num(rng, N) for _ in range(d)]
        kind = ("linear", "quadratic", "alpha")[i % 3]
        q = brackets.periodic_quadratic_base(alpha, beta, N) + Fraction(rng.randint(0, 2 * N - 1), 2 * N)
        b = brackets.periodic_linear_base(q, N)
        if kind == "linear":
            b += Fraction(1, 2 * N)
        elif kind == "quadratic":
            q += Fraction(1, 4 * N)
        else:
            p = 2 if N != 2 else 3
            alpha[0] = Fraction(2 * rng.randint(0, N - 1) + 1, N * p)
        out.append((N, kind, PolySeq(tuple(alpha), tuple(beta), Poly.of(0, b, q))))
    return out


def criterion_2(seed: int) -> CriterionResult:
    t0 = time.perf_counter()
    rows = []
    bad_den = 0
    example = None
    for N, g in periodic_corpus(seed):
        den = brackets.denominator_flags(g.alpha, g.beta, g.P, N)
        ok = den["alpha_beta_denominator_N"] and den["quadratic_denominator_2N"]
        if not ok:
            bad_den += 1
            if example is None:
                example = (N, g)
        rows.append({"kind": "periodic", "N": N, "d": g.d, "quadratic": g.P.coeff(2),
                     "alpha_beta_den_N": den["alpha_beta_denominator_N"],
                     "quadratic_den_2N": den["quadratic_denominator_2N"],
                     "quadratic_den_2N2": den["quadratic_denominator_2N2"], "periodic": True})
    accepted = 0
    for N, kind, g in nonconforming_corpus(seed):
        per = is_periodic_phase(g.phase_expr(), N)
        accepted += per
        rows.append({"kind": kind, "N": N, "d": g.d, "quadratic": g.P.coeff(2), "periodic": per})
    ok = bad_den == 0 and accepted == 0
    summary = (f"{bad_den}/600 periodic instances have a quadratic coefficient outside (1/2N)Z; "
               f"{accepted}/50 non-conforming instances reported periodic")
    known = None
    if bad_den and example is not None:
        N, g = example
        known = (f"periodicity only forces the quadratic coefficient into sum(A_i B_i)/(2N^2) + (1/2N)Z; "
                 f"first counterexample N={N}, alpha={[fmt(x) for x in g.alpha]}, beta={[fmt(x) for x in g.beta]}, "
                 f"quadratic={fmt(g.P.coeff(2))}")
    cols = ["kind", "N", "d", "quadratic", "alpha_beta_den_N", "quadratic_den_2N", "quadratic_den_2N2", "periodic"]
    return CriterionResult(2, "denominators of periodic phases", ok, summary, cols, rows, known,
                           time.perf_counter() - t0)


# 3: difference identity ---------------------------------------------------------------

def _vdc_case(case: tuple[Fraction, Fraction, int, int]) -> dict:
    alpha, beta, h, N = case
    top, lower = brackets.vdc_expand(alpha, beta, h)
    bad = 0
    for n in range(N):
        lhs = alpha * (n + h) * int_part(beta * (n + h)) - alpha * n * int_part(beta * n)
        rhs = top.value(n) + sum((t.value(n) for t in lower), Fraction(0))
        bad += frac(lhs - rhs) != 0
    return {"alpha": alpha, "beta": beta, "h": h, "lower_terms": len(lower), "failures": bad}


def criterion_3(seed: int, count: int = 1000, N: int = 31) -> CriterionResult:
    t0 = time.perf_counter()
    rng = _rng(seed, 3)
    cases = [(_num(rng, N), _num(rng, N), rng.randint(-N, N), N) for _ in range(count)]
    rows = pmap(_vdc_case, cases)
    bad = sum(r["failures"] for r in rows)
    return CriterionResult(3, "difference identity mod 1", bad == 0,
                           f"{count} (alpha, beta, h) at N={N}, {bad} failing points",
                           ["alpha", "beta", "h", "lower_terms", "failures"], rows, seconds=time.perf_counter() - t0)


# 4: Fourier expansions ---------------------------------------------------------------------

def _fourier_case(case) -> dict:
    kind, payload, N, delta = case
    if kind == "product":
        e = fourier.expand_frac_product(payload, N, delta)
    elif kind == "bilinear":
        e = fourier.expand_bilinear(payload, N, N, delta)
    else:
        e = fourier.expand_trivial(payload[0], payload[1], N, delta)
    dens_ok = all(has_denominator(fn, N) and has_denominator(fh, N) for _, fn, fh in e.terms)
    return {"expansion": kind, "factors": len(payload) if kind != "trivial" else len(payload[0]),
            "l1_error": e.measured_l1_error, "within_delta": e.measured_l1_error <= delta + FLOAT_TOL,
            "terms": len(e.terms), "l1_bound": e.l1_bound, "radius": e.radius, "denominators_ok": dens_ok}


def fourier_corpus(seed: int, per_kind: int = 50, N: int = 31) -> list:
    rng = _rng(seed, 4)
    cases = []
    unit = lambda: Fraction(rng.randint(1, N - 1), N)
    for _ in range(per_kind):
        terms = [FracProd(Fraction(rng.randint(-2, 2)), unit(), unit()) for _ in range(rng.randint(1, 3))]
        cases.append(("product", terms, N, 0.05))
    for _ in range(per_kind):
        terms = [FracProd(Fraction(rng.randint(-2, 2)), unit(), unit(), rng.choice("nh"), rng.choice("nh"))
                 for _ in range(rng.randint(1, 2))]
        cases.append(("bilinear", terms, N, 0.05))
    for _ in range(per_kind):
        m = rng.randint(1, 3)
        cases.append(("trivial", ([_num(rng, N) for _ in range(m)], [unit() for _ in range(m)]), N, 0.05))
    return cases


def criterion_4(seed: int) -> CriterionResult:
    t0 = time.perf_counter()
    rows = pmap(_fourier_case, fourier_corpus(seed))
    over = sum(not r["within_delta"] for r in rows)
    dens = sum(not r["denominators_ok"] for r in rows)
    worst = max(r["l1_error"] for r in rows)
    cols = ["expansion", "factors", "l1_error", "within_delta", "terms", "l1_bound", "radius", "denominators_ok"]
    return CriterionResult(4, "Fourier expansions of periodic bracket phases", over == 0 and dens == 0,
                           f"{len(rows)} expansions at N=31, worst L1 error {worst:.4f}, {over} over 0.05, "
                           f"{dens} with bad denominators", cols, rows, seconds=time.perf_counter() - t0)


# 5 and 6: bracket-linear solver ---------------------------------------------------------------

def _rbpl_case(inst: rbpl.RBPLInstance) -> dict:
    cert = rbpl.solve(inst)
    row = {"N": inst.N, "d": inst.d, "H": len(inst.H)}
    if isinstance(cert, rbpl.DegenerateReport):
        row.update(verified=False, r=None, eta="degenerate", brute_force="skipped", same_kernel=None)
        return row
    rep = rbpl.verify(inst, cert)
    row.update(verified=rep.ok, r=cert.r, eta=" ".join(str(list(e)) for e in cert.eta))
    if inst.d <= 3 and inst.N <= 53:
        bf = rbpl.brute_force(inst, max(cert.max_entry(), 1))
        row["brute_force"] = "found" if bf is not None else "none"
        row["same_kernel"] = bf is not None and linalg.same_span(bf.eta, cert.eta, inst.d)
    else:
        row["brute_force"] = "skipped"
        row["same_kernel"] = None
    return row


def criterion_5(seed: int, count: int = 100) -> CriterionResult:
    t0 = time.perf_counter()
    rng = _rng(seed, 5)
    insts = []
    for _ in range(count):
        d = rng.randint(1, 4)
        N = rng.choice([31, 53, 101, 211])
        insts.append(rbpl.planted_instance(rng, d, N, extra=rng.randint(0, max(0, d - 2))))
    rows = pmap(_rbpl_case, insts)
    elapsed = time.perf_counter() - t0
    unver = sum(not r["verified"] for r in rows)
    compared = [r for r in rows if r["brute_force"] != "skipped"]
    mism = sum(not r["same_kernel"] for r in compared)
    ok = unver == 0 and mism == 0 and elapsed < 300
    return CriterionResult(5, "bracket-linear solver on planted instances", ok,
                           f"{count} instances, {unver} failing verification, {len(compared)} brute-force "
                           f"comparisons, {mism} kernel mismatches",
                           ["N", "d", "H", "verified", "r", "eta", "brute_force", "same_kernel"], rows,
                           seconds=elapsed)


def criterion_6(seed: int, count: int = 100, N: int = 31) -> CriterionResult:
    t0 = time.perf_counter()
    rng = _rng(seed, 6)
    rows = []
    for i in range(count):
        branch = "nu" if i % 2 == 0 else "zero"
        d = rng.randint(1, 4)
        r = rng.randint(1 if branch == "zero" else 0, d)
        inst, cert, big = rbpl.random_affine_certificate(rng, d, N, r, branch)
        valid_in = rbpl.verify(big, cert).ok
        out = rbpl.extend_affine(cert)
        rep = rbpl.verify(inst, out)
        rows.append({"branch": branch, "d": d, "r_in": r, "input_valid": valid_in, "r_out": out.r,
                     "verified": rep.ok, "violations": "; ".join(rep.violations)})
    bad = sum(not (x["input_valid"] and x["verified"]) for x in rows)
    return CriterionResult(6, "affine extension of certificates", bad == 0,
                           f"{count} certificates ({count - count // 2} with a nonzero last eta entry, "
                           f"{count // 2} with all zero), {bad} failing",
                           ["branch", "d", "r_in", "input_valid", "r_out", "verified", "violations"], rows,
                           seconds=time.perf_counter() - t0)


# 7: equidistribution dichotomy ---------------------------------------------------------------------

def _dichotomy_case(case) -> dict:
    N, g = case
    M = ElemNilmanifold(g.d)
    mean = equidist.mean_correlation(M, g, N)
    delta = min(0.1, mean)
    res = equidist.run_dichotomy(M, g, N, delta)
    rep = equidist.verify_dichotomy(M, g, res, N)
    return {"kind": "planted", "N": N, "d": g.d, "mean": mean, "delta": delta, "branch": res.branch,
            "r": res.r, "eta_count": len(res.eta), "verified": rep.ok, "violations": "; ".join(rep.violations)}


def _control_case(case) -> dict:
    N, g = case
    mean = equidist.mean_correlation(ElemNilmanifold(g.d), g, N)
    return {"kind": "control", "N": N, "d": g.d, "mean": mean, "delta": 0.1, "below_delta": mean < 0.1}


def criterion_7(seed: int, count: int = 25, control_n: int = 1009) -> CriterionResult:
    t0 = time.perf_counter()
    rng = _rng(seed, 7)
    planted = []
    for i in range(count):
        N = (101, 211)[i % 2]
        g, _ = equidist.planted_isotropic(rng, rng.randint(1, 3), N)
        planted.append((N, g))
    controls = [(control_n, equidist.random_periodic(rng, rng.randint(1, 3), control_n)) for _ in range(count)]
    rows = pmap(_dichotomy_case, planted) + pmap(_control_case, controls)
    certs = sum(r.get("branch") == "Certificate" and r.get("verified") for r in rows if r["kind"] == "planted")
    below = sum(r["below_delta"] for r in rows if r["kind"] == "control")
    ok = certs == count and below == count
    cols = ["kind", "N", "d", "mean", "delta", "branch", "r", "eta_count", "verified", "below_delta", "violations"]
    return CriterionResult(7, "equidistribution dichotomy", ok,
                           f"{certs}/{count} planted instances certified and verified; "
                           f"{below}/{count} random controls at N={control_n} below 0.1",
                           cols, rows, seconds=time.perf_counter() - t0)


# 8 and 9: Gowers norms and the counting averages ------------------------------------------------------

def criterion_8(seed: int, count: int = 100, sets: int = 50) -> CriterionResult:
    t0 = time.perf_counter()
    rng = _rng(seed, 8)
    fs = []
    for _ in range(count):
        N = rng.randint(2, 64)
        fs.append(gowers.random_one_bounded(rng, N))

    def one(f):
        norms = [gowers.gowers_norm(f, s) for s in (1, 2, 3, 4)]
        gap = abs(norms[1] - gowers.u2_direct(f))
        mono = all(norms[i] <= norms[i + 1] + 1e-9 for i in range(3))
        return {"kind": "function", "N": len(f), "u1": norms[0], "u2": norms[1], "u3": norms[2], "u4": norms[3],
                "route_gap": gap, "ok": gap <= 1e-9 and mono}

    rows = pmap(one, fs)
    N = 61
    As = [rng.subset(N, rng.random()) for _ in range(sets)]

    def ident(A):
        ind = np.zeros(N)
        ind[A] = 1.0
        l1 = gowers.lam1(ind, ind, ind, ind)
        gap = abs(l1 - gowers.gowers_norm(ind, 2) ** 4)
        return {"kind": "indicator", "N": N, "size": len(A), "route_gap": gap, "ok": gap <= 1e-10}

    rows += pmap(ident, As)
    bad = sum(not r["ok"] for r in rows)
    worst = max(r["route_gap"] for r in rows)
    return CriterionResult(8, "Gowers norms", bad == 0,
                           f"{count} functions and {sets} indicators, worst gap {worst:.2e}, {bad} failing",
                           ["kind", "N", "size", "u1", "u2", "u3", "u4", "route_gap", "ok"], rows,
                           seconds=time.perf_counter() - t0)


def criterion_9(seed: int, count: int = 100, N: int = 31) -> CriterionResult:
    t0 = time.perf_counter()
    rng = _rng(seed, 9)
    triples = [tuple(gowers.random_one_bounded(rng, N) for _ in range(3)) for _ in range(count)]
    pairs = {"y,2y": ([0, 1], [0, 2]), "y^2,y": ([0, 0, 1], [0, 1])}

    def one(case):
        name, (f, g, k) = case
        P, Q = pairs[name]
        D = gowers.dual_D(f, g, k, P, Q)
        lhs = float(np.mean(np.abs(D) ** 2))
        rhs = gowers.lam(np.conj(f), np.conj(g), np.conj(k), D, P, Q)
        gap = abs(lhs - rhs)
        return {"polys": name, "lhs": lhs, "gap": gap, "ok": gap <= 1e-10}

    rows = pmap(one, [(name, t) for name in pairs for t in triples])
    bad = sum(not r["ok"] for r in rows)
    worst = max(r["gap"] for r in rows)
    return CriterionResult(9, "dual function identity", bad == 0,
                           f"{len(rows)} cases at N={N}, worst gap {worst:.2e}, {bad} failing",
                           ["polys", "lhs", "gap", "ok"], rows, seconds=time.perf_counter() - t0)


# 10 to 12: additive combinatorics ------------------------------------------------------------------------

def criterion_10(seed: int, count: int = 1000, N: int = 101) -> CriterionResult:
    t0 = time.perf_counter()
    rng = _rng(seed, 10)
    cases = [[rng.subset(N, rng.random()) for _ in range(4)] for _ in range(count)]

    def one(sets):
        e4 = additive.energy4(*sets, N)
        prod = Fraction(1)
        for A in sets:
            prod *= additive.energy(A, A, N)
        return {"sizes": " ".join(str(len(A)) for A in sets), "energy4": e4, "holds": e4**4 <= prod}

    rows = pmap(one, cases)
    bad = sum(not r["holds"] for r in rows)
    return CriterionResult(10, "energy Cauchy-Schwarz", bad == 0, f"{count} quadruples of sets mod {N}, {bad} failing",
                           ["sizes", "energy4", "holds"], rows, seconds=time.perf_counter() - t0)


def criterion_11(seed: int, per_n: int = 2, delta: Fraction = Fraction(1, 2)) -> CriterionResult:
    t0 = time.perf_counter()
    rng = _rng(seed, 11)
    rows = []
    for N in (31, 61):
        for _ in range(per_n):
            H, chi, f1, f2 = additive.planted_linear_family(rng, N, density=0.3 + 0.5 * rng.random())
            rep = additive.additive_quadruple_count(H, chi, N, delta, f1, f2)
            rows.append({"N": N, "H": len(H), "delta": delta, "count": rep.count, "bound": rep.bound,
                         "hypothesis_ok": rep.hypothesis_ok, "pass": bool(rep.threshold_pass)})
    elapsed = time.perf_counter() - t0
    bad = sum(not r["pass"] for r in rows)
    return CriterionResult(11, "additive-quadruple lower bound", bad == 0 and elapsed < 120,
                           f"{len(rows)} planted families at N in (31, 61), {bad} failing",
                           ["N", "H", "delta", "count", "bound", "hypothesis_ok", "pass"], rows, seconds=elapsed)


def criterion_12(seed: int, count: int = 20) -> CriterionResult:
    t0 = time.perf_counter()
    rng = _rng(seed, 12)
    rows = []
    for _ in range(count):
        N = rng.choice([101, 509])
        S = [Fraction(rng.randint(1, N - 1), N) for _ in range(rng.randint(1, 4))]
        rho = Fraction(rng.randint(1, 100), 400)
        try:
            rp = additive.find_regular_radius(S, rho, N)
            fails = additive.regularity_failures(S, rp, N, additive.epsilon_grid(len(S)))
            ok = rho / 2 <= rp <= rho and fails == 0
        except additive.RegularRadiusNotFound as exc:
            rp, fails, ok = exc.best, exc.failures, False
        rows.append({"N": N, "S": " ".join(fmt(x) for x in S), "rho": rho, "radius": rp, "grid_failures": fails, "ok": ok})
    bad = sum(not r["ok"] for r in rows)
    return CriterionResult(12, "regular Bohr radius", bad == 0, f"{count} (S, rho) pairs, {bad} failing",
                           ["N", "S", "rho", "radius", "grid_failures", "ok"], rows, seconds=time.perf_counter() - t0)


CHECKS: dict[int, Callable[[int], CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6,
    7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10, 11: criterion_11, 12: criterion_12,
}


# output tree and determinism --------------------------------------------------------------------------

def write_tree(results: list[CriterionResult], out: Path, format: str = "csv") -> None:
    out.mkdir(parents=True, exist_ok=True)
    for res in results:
        emit_table(res.rows, res.columns, format, out / f"criterion_{res.number:02d}.{format}")
    lines = [r.line() for r in results]
    lines += [f"  expected: {r.known_failure}" for r in results if r.known_failure]
    (out / "summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def run_checks(seed: int, numbers=None, out: Path | None = None, format: str = "csv",
               progress: Callable[[CriterionResult], None] | None = None) -> list[CriterionResult]:
    results = []
    for n in numbers or sorted(CHECKS):
        res = CHECKS[n](seed)
        results.append(res)
        if progress is not None:
            progress(res)
    if out is not None:
        write_tree(results, Path(out), format)
    return results


def trees_identical(a: Path, b: Path) -> list[str]:
    """Relative paths that differ or exist on one side only; empty when byte-identical."""
    diffs = []
    cmp = filecmp.dircmp(a, b)
    stack = [(cmp, Path("."))]
    while stack:
        c, rel = stack.pop()
        diffs += [str(rel / x) for x in c.left_only + c.right_only]
        _, mismatch, errors = filecmp.cmpfiles(c.left, c.right, c.common_files, shallow=False)
        diffs += [str(rel / x) for x in mismatch + errors]
        stack += [(sub, rel / name) for name, sub in c.subdirs.items()]
    return sorted(diffs)


def criterion_13(seed: int, first: Path, numbers=None, format: str = "csv") -> CriterionResult:
    """Rerun the checks into a scratch directory and compare with an existing tree."""
    t0 = time.perf_counter()
    with tempfile.TemporaryDirectory() as tmp:
        run_checks(seed, numbers, Path(tmp), format)
        diffs = trees_identical(Path(first), Path(tmp))
        files = sum(1 for p in Path(tmp).rglob("*") if p.is_file())
    rows = [{"path": p} for p in diffs]
    return CriterionResult(13, "selftest determinism", not diffs,
                           f"second run of {files} files, {len(diffs)} differing",
                           ["path"], rows, seconds=time.perf_counter() - t0)
