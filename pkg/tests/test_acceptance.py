"""Acceptance criteria, one test per criterion.

Each criterion prints a single PASS/FAIL line with its measured numbers and
runtime.  Run ``python tests/test_acceptance.py`` to get just those lines.
"""

from __future__ import annotations

import time

import numpy as np
import pytest

from pshlab import certify
from pshlab.direct_integral import (approximate_simple, decomposition_check, embed_component,
                                    family, random_section, section_norm_p)
from pshlab.harness import SuiteConfig, run_suite, jensen_polynomials
from pshlab.maps import DiscMap, random_disc
from pshlab.means import (ScalarFunction, ZeroProfile, circle_clearance, circle_mean,
                          jensen_formula_residual, log_norm, psh_gap)
from pshlab.spaces import INF, lp_space, random_vector, weighted_lp_space


def _line(number: int, passed: bool, detail: str, elapsed: float, limit: float) -> str:
    status = "PASS" if passed else "FAIL"
    return f"ACCEPTANCE {number:2d} {status}  {detail}  [{elapsed:.2f}s / limit {limit:g}s]"


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def criterion_1():
    def run():
        identity = DiscMap([[0], [1]])
        worst = 0.0
        for k in range(1, 101):
            f = ScalarFunction("re_power", lambda v, k=k: np.real(v[..., 0] ** k))
            worst = max(worst, abs(circle_mean(f, identity, 512)))
        return worst
    worst, dt = _timed(run)
    return worst <= 1e-13 and dt < 1, f"max |mean Re z^k|, k=1..100: {worst:.2e} (tol 1e-13)", dt, 1


def criterion_2():
    def run():
        worst = 0.0
        for gamma, zeros in jensen_polynomials(seed=0, count=100):
            worst = max(worst, jensen_formula_residual(gamma, zeros, 512))
        worked = DiscMap(np.poly([0.3, 0.5])[::-1])
        mean = circle_mean(log_norm(lp_space(1, 1, "complex")), worked, 512)
        res = jensen_formula_residual(worked, ZeroProfile.simple([0.3, 0.5]), 512)
        return worst, mean, res
    (worst, mean, res), dt = _timed(run)
    ok = worst <= 1e-8 and abs(mean) <= 1e-8 and res <= 1e-8 and dt < 5
    return ok, (f"max residual over 100 polynomials {worst:.2e}; worked quadratic mean {mean:.2e}, "
                f"residual {res:.2e} (tol 1e-8)"), dt, 5


CATALOG_COMPLEX = (lp_space(2, 1, "complex"), lp_space(1, 2, "complex"),
                   lp_space(2, 3, "complex"), lp_space(INF, 2, "complex"))


def criterion_3():
    def run():
        rng = np.random.default_rng(0)
        worst, count, rejected = np.inf, 0, 0
        while count < 500:
            space = CATALOG_COMPLEX[count % 4]
            gamma = random_disc(space.dim, int(rng.integers(1, 6)), rng)
            if circle_clearance(space, gamma) < 0.05:
                rejected += 1
                continue
            worst = min(worst, psh_gap(log_norm(space), gamma, 512))
            count += 1
        return worst, rejected
    (worst, rejected), dt = _timed(run)
    ok = worst >= -1e-8 and dt < 10
    return ok, f"min log-norm gap over 500 discs {worst:.3e} (tol -1e-8; {rejected} near-singular redrawn)", dt, 10


def criterion_4():
    def run():
        out = {}
        for p in (1, INF, 2, 3):
            out[p] = certify.strict_verdict(lp_space(p, 2), "convex", restarts=100, seed=0)
        return out
    v, dt = _timed(run)
    ok = (all(v[p].witness_found and v[p].flatness <= 1e-9 for p in (1, INF))
          and all(not v[p].witness_found and v[p].flatness >= 1e-3 for p in (2, 3)) and dt < 30)
    detail = "; ".join(f"l{'inf' if p is INF else p}: {v[p].outcome} flat={v[p].flatness:.2e}" for p in v)
    return ok, detail, dt, 30


def criterion_5():
    def run():
        linf = certify.strict_verdict(lp_space(INF, 2, "complex"), "psh", restarts=100, seed=0)
        l1 = certify.strict_verdict(lp_space(1, 2, "complex"), "psh", restarts=200, degree_cap=3, seed=0)
        return linf, l1
    (linf, l1), dt = _timed(run)
    expected = np.array([[1, 0], [0, 1]], dtype=complex)
    is_1z = linf.witness is not None and linf.witness.coeffs.shape == (2, 2) and np.array_equal(
        linf.witness.coeffs, expected)
    ok = (linf.witness_found and is_1z and linf.flatness <= 1e-12 and not l1.witness_found
          and l1.flatness >= 1e-3 and dt < 60)
    return ok, (f"complex linf: {linf.outcome} z->(1,z)={is_1z} flat={linf.flatness:.1e}; "
                f"complex l1 (200 restarts, degree 3): {l1.outcome} min flat={l1.flatness:.3e}"), dt, 60


def _integral_criterion(name, limit):
    res, dt = _timed(lambda: run_suite(SuiteConfig(name)))
    recs = res.records
    transports = [r for r in recs if r["method"] == "transport"]
    both = {r["expected"] for r in recs} == {"witness_found", "no_witness"}
    flat_ok = all(r["flatness"] <= 1e-9 for r in transports)
    ok = res.passed and len(recs) == 12 and both and flat_ok and dt < limit
    exps = sorted({r["family"]["p"] for r in recs}, key=str)
    detail = (f"{sum(r['passed'] for r in recs)}/12 families match the conjunction; "
              f"{len(transports)} transported witnesses, max flatness "
              f"{max(r['flatness'] for r in transports):.1e}; exponents {exps}")
    return ok, detail, dt, limit


def criterion_6():
    return _integral_criterion("conv-int", 120)


def criterion_7():
    return _integral_criterion("psh-int", 180)


def criterion_8():
    res, dt = _timed(lambda: certify.counterexample_suite(seed=0, samples=1000))
    ok = abs(res.equality_gap) <= 1e-12 and res.min_affine_gap > 0 and dt < 10
    return ok, (f"gap on (z,-z^2) {res.equality_gap:.1e}; min gap over {res.affine_samples} affine "
                f"discs {res.min_affine_gap:.3e}"), dt, 10


def criterion_9():
    res, dt = _timed(lambda: run_suite(SuiteConfig("day")))
    asserted = [r for r in res.records if r.get("asserted", True)]
    agree = sum(r["passed"] for r in asserted)
    ok = len(asserted) == 60 and agree == 60 and dt < 60
    return ok, f"radial-profile and direct verdicts agree on {agree}/{len(asserted)} maps", dt, 60


def _families_for_algebra(rng):
    pool_r = [lp_space(2, 2), lp_space(1, 2), lp_space(INF, 3), lp_space(3, 1),
              weighted_lp_space(1.5, [1.0, 2.0])]
    pool_c = [lp_space(2, 1, "complex"), lp_space(1, 2, "complex"), lp_space(INF, 2, "complex")]
    pool = pool_r if rng.uniform() < 0.5 else pool_c
    size = int(rng.integers(1, 4))
    comps = [pool[int(k)] for k in rng.integers(len(pool), size=size)]
    p = [1, 1.5, 2, 3, INF][int(rng.integers(5))]
    return family(p, rng.uniform(0.2, 5.0, size), comps)


def criterion_10():
    def run():
        rng = np.random.default_rng(10)
        iso = 0.0
        for _ in range(200):
            fam = _families_for_algebra(rng)
            s = int(rng.integers(len(fam.components)))
            comp = fam.components[s]
            v = random_vector(comp, rng) * 10.0 ** rng.uniform(-2, 2)
            iso = max(iso, abs(section_norm_p(fam, embed_component(fam, s, v)) - comp.norm(v)))
        c = lp_space(2, 1, "complex")
        decomp = [decomposition_check(fam, 100, seed=k) for k, fam in enumerate([
            family(2, [1, 2, 0.5], [c, c, lp_space(1, 2, "complex")]),
            family(1.5, [1, 1], [lp_space(3, 2)] * 2),
            family(3, [0.3, 0.7, 2.0], [lp_space(2, 2), lp_space(1, 2), lp_space(2, 2)]),
            family(INF, [1, 2], [lp_space(2, 2), lp_space(2, 2)])])]
        worst_decomp = max(d.max_discrepancy for d in decomp)
        mono, strict_mono = 0, 0
        for _ in range(100):
            fam = _families_for_algebra(rng)
            sigma = random_section(fam, rng)
            cands = []
            for _k in range(12):
                s = int(rng.integers(len(fam.components)))
                q = rng.integers(-8, 9) / rng.integers(1, 9)
                cands.append((q * sigma.values[s] if q else sigma.values[s], fam.components[s]))
            dists = np.array([[comp.norm(a - b) for comp, a, b in zip(
                fam.components, sigma.values, approximate_simple(fam, sigma, cands, n).values)]
                for n in range(len(cands))])
            nonempty = np.array([[any(sp == comp and comp.norm(v) <= comp.norm(x)
                                      for v, sp in cands[:n + 1])
                                  for comp, x in zip(fam.components, sigma.values)]
                                 for n in range(len(cands))])
            ok_inst = True
            for s in range(dists.shape[1]):
                started = np.flatnonzero(nonempty[:, s])
                before = dists[: started[0] if started.size else len(cands), s]
                ok_inst &= bool(np.allclose(before, fam.components[s].norm(sigma.values[s]), rtol=0, atol=0))
                if started.size:
                    tail = dists[started[0]:, s]
                    ok_inst &= bool(np.all(np.diff(tail) <= 0))
            mono += ok_inst
            strict_mono += bool(np.all(np.diff(dists, axis=0) <= 0))
        return iso, worst_decomp, mono, strict_mono
    (iso, dec, mono, strict_mono), dt = _timed(run)
    ok = iso <= 1e-12 and dec <= 1e-12 and mono == 100 and dt < 10
    return ok, (f"isometry error {iso:.1e}; decomposition discrepancy {dec:.1e}; monotone "
                f"{mono}/100 once admissible candidates exist ({strict_mono}/100 from n=0)"), dt, 10


def criterion_11():
    res, dt = _timed(lambda: run_suite(SuiteConfig("involution")))
    by = {r["check"]: r for r in res.records}
    convex_ok = all(by[k]["passed"] and by[k]["min_gap"] >= -1e-8 for k in ("l1-norm", "linf-norm"))
    strict = by["sq-euclidean"]
    ok = convex_ok and strict["passed"] and strict["min_gap_nonconstant"] > 1e-6 and dt < 10
    return ok, (f"convex pullbacks min gap {min(by[k]['min_gap'] for k in ('l1-norm', 'linf-norm')):.2e}; "
                f"strict pullback min gap {strict['min_gap_nonconstant']:.3e} on 200 discs"), dt, 10


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11]


@pytest.mark.parametrize("number", range(1, len(CRITERIA) + 1))
def test_acceptance(number, capsys):
    ok, detail, dt, limit = CRITERIA[number - 1]()
    with capsys.disabled():
        print("\n" + _line(number, ok, detail, dt, limit))
    assert ok, detail


if __name__ == "__main__":
    failures = 0
    for i, crit in enumerate(CRITERIA, 1):
        ok, detail, dt, limit = crit()
        failures += not ok
        print(_line(i, ok, detail, dt, limit), flush=True)
    raise SystemExit(1 if failures else 0)
