"""Desk-scale experiment suites and the radial-profile pipeline.

Each suite returns a flat list of records (plain dicts) with a ``passed``
flag, the seed used, and the gaps or witnesses behind the decision.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import warnings
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import certify
from .certify import Verdict
from .direct_integral import (MeasurableFamily, build_space, embed_linear, family,
                              pointwise_norms)
from .maps import DiscMap, SegmentMap
from .means import (EPS_EQ, EXP2, ZeroProfile, circle_mean, circle_nodes, jensen_extended_check,
                    jensen_formula_residual, log_norm, midpoint_gap, norm_function, norm_power,
                    psh_gap)
from .spaces import INF, NormedSpace, exponent_to_json, lp_combine, lp_space, random_unit_vector, \
    random_vector

SUITES = ("conv-int", "psh-int", "day", "counterexample", "edge-p", "jensen", "involution")


@dataclasses.dataclass
class SuiteConfig:
    name: str
    seed: int = 0
    nodes: int = 512
    restarts: int = 100
    degree_cap: int = 6
    eps_eq: float = EPS_EQ
    eps_flat: float = certify.EPS_FLAT
    output: str | None = None
    format: str | None = None          # None writes both json and csv
    workers: int = 1

    def __post_init__(self):
        if self.name not in SUITES:
            raise ValueError(f"unknown suite {self.name!r}; expected one of {SUITES}")
        if self.format not in (None, "json", "csv"):
            raise ValueError(f"unknown report format {self.format!r}")


def derived_seed(seed: int, *path: int) -> int:
    """Independent per-check seed, stable under reordering of other checks."""
    return int(np.random.SeedSequence([int(seed), *path]).generate_state(1)[0])


def _record(suite: str, check: str, passed: bool, seed: int, **fields) -> dict:
    return {"suite": suite, "check": check, "passed": bool(passed), "seed": int(seed), **fields}


def _fields(report) -> dict:
    return {k: v for k, v in dataclasses.asdict(report).items() if k != "passed"}


def _parallel(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1:
        return [fn(x) for x in items]
    with concurrent.futures.ThreadPoolExecutor(workers) as pool:
        return list(pool.map(fn, items))


# -- radial profile and the two pipelines -----------------------------------

@dataclasses.dataclass
class RadialProfile:
    """rho(param)(s) = ||gamma(param)_s|| in E_s; values have shape (params, |S|)."""

    params: np.ndarray
    values: np.ndarray
    weights: tuple[float, ...]
    p: float

    def __post_init__(self):
        if np.any(self.values < 0):
            raise ValueError("profile values must be nonnegative")
        if self.values.shape != (len(self.params), len(self.weights)):
            raise ValueError("profile shape must be (params, points)")

    def norms(self) -> np.ndarray:
        """||rho(param)||_p in L^p(S; R) for every parameter."""
        return lp_combine(self.values, self.p, self.weights)

    def lp(self, row: np.ndarray) -> float:
        return float(lp_combine(row, self.p, self.weights))


def radial_profile(fam: MeasurableFamily, gamma, params) -> RadialProfile:
    params = np.asarray(params)
    return RadialProfile(params, pointwise_norms(fam, gamma(params)), fam.base.weights, fam.p)


def _nonconstant_blocks(fam: MeasurableFamily, gamma) -> tuple[int, ...]:
    if isinstance(gamma, SegmentMap):
        moving = gamma.direction
    else:
        moving = gamma.coeffs[1:]
    return tuple(i for i, s in enumerate(fam.slices()) if np.any(moving[..., s] != 0))


def _check_map(fam: MeasurableFamily, gamma) -> None:
    if gamma.dim != fam.dim:
        raise ValueError(f"map has dimension {gamma.dim}, family has dimension {fam.dim}")
    if isinstance(gamma, SegmentMap) and fam.field.value != "real":
        raise ValueError("segments need a real family")
    if isinstance(gamma, DiscMap) and fam.field.value != "complex":
        raise ValueError("discs need a complex family")


@dataclasses.dataclass
class DirectReport:
    verdict: str                       # strict | constant | witness | inconsistent
    gap: float
    point_gaps: tuple[float, ...]
    offending: tuple[int, ...]

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


def direct_pipeline(fam: MeasurableFamily, gamma, nodes: int = 512, eps: float = EPS_EQ) -> DirectReport:
    """Mean-value gap of ||.||_p^p on the whole space, split by measure point."""
    _check_map(fam, gamma)
    if fam.p is INF:
        raise ValueError("the direct method needs a finite exponent")
    p, w = fam.p, np.asarray(fam.base.weights)
    f = norm_power(build_space(fam), p)
    if isinstance(gamma, SegmentMap):
        gap = midpoint_gap(f, gamma)
        rho = pointwise_norms(fam, gamma(np.array([-1.0, 0.0, 1.0]))) ** p
        point = w * ((rho[0] + rho[2]) / 2 - rho[1])
        scale = max(1.0, float(w @ (rho[0] + rho[2]) / 2))
    else:
        gap = psh_gap(f, gamma, nodes)
        rim = pointwise_norms(fam, gamma(circle_nodes(nodes))) ** p
        centre = pointwise_norms(fam, gamma(0.0)) ** p
        point = w * (rim.mean(axis=0) - centre)
        scale = max(1.0, float(w @ rim.mean(axis=0)))
    moving = _nonconstant_blocks(fam, gamma)
    if not moving:
        verdict, offending = "constant", ()
    elif gap > eps * scale:
        verdict, offending = "strict", ()
    else:
        offending = tuple(i for i in moving if point[i] <= eps * scale)
        verdict = "witness" if offending else "inconsistent"
    return DirectReport(verdict, float(gap), tuple(float(x) for x in point), offending)


@dataclasses.dataclass
class DayReport:
    kind: str
    p: object
    links: tuple[float, float, float]
    slacks: tuple[float, float]
    sphere_deviation: float
    chain_equal: bool
    per_point_equal: bool | None
    verdict: str
    offending: tuple[int, ...]
    direct: DirectReport
    agree: bool
    warning: str | None = None

    def to_json(self) -> dict:
        d = dataclasses.asdict(self)
        d["p"] = exponent_to_json(self.p)
        return d


P1_WARNING = ("radial-profile argument at p=1: L^1(S) is not strictly convex, "
              "so chain equalities do not force per-point equality")


def day_pipeline(fam: MeasurableFamily, gamma, nodes: int = 512, eps: float = EPS_EQ) -> DayReport:
    """Strictness through the radial profile rho in the scalar space L^p(S; R).

    The chain ||rho(0)||_p <= ||mean rho||_p <= mean ||rho||_p is evaluated
    link by link.  When both links are equalities and the map stays on a
    sphere, per-point equality rho(param)(s) = rho(0)(s) is checked directly
    and the non-constant blocks are reported as the offending points.
    """
    _check_map(fam, gamma)
    p = fam.p
    segment = isinstance(gamma, SegmentMap)
    warning = None
    if segment and (p is INF or p <= 1):
        raise ValueError("the segment radial-profile argument needs 1 < p < inf")
    if not segment:
        if p is INF:
            raise ValueError("the disc radial-profile argument needs p < inf")
        if p == 1:
            warning = P1_WARNING
            warnings.warn(warning, stacklevel=2)

    params = np.array([-1.0, 1.0]) if segment else circle_nodes(nodes)
    rim = radial_profile(fam, gamma, params)
    rho0 = pointwise_norms(fam, gamma(0.0))
    l0 = rim.lp(rho0)
    l1 = rim.lp(rim.values.mean(axis=0))
    rim_norms = rim.norms()
    l2 = float(rim_norms.mean())
    scale = max(1.0, l2)
    sphere = float(np.abs(rim_norms - l0).max())
    chain_equal = (l1 - l0) <= eps * scale and (l2 - l1) <= eps * scale

    moving = _nonconstant_blocks(fam, gamma)
    per_point, offending = None, ()
    if not moving:
        verdict = "constant"
    elif chain_equal and sphere <= eps * scale:
        dev = np.abs(rim.values - rho0).max(axis=0)
        per_point = bool(np.all(dev <= eps * scale))
        offending = moving if per_point else ()
        verdict = "witness" if per_point else "inconsistent"
    else:
        verdict = "strict"
    direct = direct_pipeline(fam, gamma, nodes, eps)
    agree = verdict == direct.verdict and offending == direct.offending
    return DayReport("segment" if segment else "disc", p, (l0, l1, l2), (l1 - l0, l2 - l1),
                     sphere, bool(chain_equal), per_point, verdict, offending, direct, agree, warning)


# -- suites -----------------------------------------------------------------

REAL_L1 = lp_space(1, 2, "real")
REAL_L2 = lp_space(2, 2, "real")
REAL_L3 = lp_space(3, 2, "real")
SCALAR_C = lp_space(2, 1, "complex")
COMPLEX_L2 = lp_space(2, 2, "complex")
COMPLEX_LINF = lp_space(INF, 2, "complex")


def _desk_families(seed: int, exponents, strict_pool, flat_space, tag: int,
                   fixed: Sequence[MeasurableFamily] = ()) -> list[MeasurableFamily]:
    """Six families of strict components plus six copies with one component made flat."""
    rng = np.random.default_rng([seed, tag])
    strict = list(fixed)
    while len(strict) < 6:
        size = int(rng.integers(2, 4))
        comps = [strict_pool[int(k)] for k in rng.integers(len(strict_pool), size=size)]
        weights = np.round(rng.uniform(0.5, 2.0, size), 3)
        strict.append(family(exponents[len(strict) % len(exponents)], weights, comps))
    swapped = []
    for fam in strict:
        k = int(rng.integers(len(fam.components)))
        comps = list(fam.components)
        comps[k] = flat_space
        swapped.append(family(fam.p, fam.base.weights, comps))
    return strict + swapped


def transport_witness(fam: MeasurableFamily, s: int, witness):
    """Embed a component's flat map at point s, zero elsewhere."""
    if isinstance(witness, SegmentMap):
        return SegmentMap(embed_linear(fam, s, witness.base), embed_linear(fam, s, witness.direction))
    return DiscMap(embed_linear(fam, s, witness.coeffs), witness.radius)


def certify_family(fam: MeasurableFamily, mode: str, restarts: int = 100, degree_cap: int = 6,
                   seed: int = 0, tol: float = certify.EPS_FLAT,
                   cache: dict | None = None) -> tuple[Verdict, list[Verdict], str]:
    """Verdict for the direct integral from verdicts on its components.

    A component witness is transported into the whole space and replayed;
    otherwise the whole space is searched directly.  Returns the verdict,
    the component verdicts and the method used ("transport" or "search").
    """
    mode = certify.normalize_mode(mode)
    cache = {} if cache is None else cache
    comps = []
    for space in fam.components:
        if space not in cache:
            cache[space] = certify.strict_verdict(space, mode, restarts, degree_cap, seed, tol=tol)
        comps.append(cache[space])
    found = [s for s, v in enumerate(comps) if v.witness_found]
    if found:
        s = found[0]
        gamma = transport_witness(fam, s, comps[s].witness)
        flat = certify.flatness(build_space(fam), gamma)
        ok = flat <= tol and not gamma.is_constant()
        whole = Verdict(mode, "witness_found" if ok else "no_witness", flat, gamma if ok else None,
                        restarts, degree_cap if mode == "strict_psh" else None, seed)
        return whole, comps, "transport"
    whole = certify.strict_verdict(build_space(fam), mode, restarts, degree_cap, seed, tol=tol)
    return whole, comps, "search"


def _integral_suite(cfg: SuiteConfig, mode: str, families: list[MeasurableFamily]) -> list[dict]:
    cache: dict[NormedSpace, Verdict] = {}
    for space in dict.fromkeys(c for fam in families for c in fam.components):
        cache[space] = certify.strict_verdict(space, mode, cfg.restarts, cfg.degree_cap, cfg.seed,
                                              tol=cfg.eps_flat)

    def run(item):
        idx, fam = item
        seed = derived_seed(cfg.seed, idx)
        whole, comps, method = certify_family(fam, mode, cfg.restarts, cfg.degree_cap, seed,
                                              cfg.eps_flat, cache)
        expected = "no_witness" if all(not v.witness_found for v in comps) else "witness_found"
        return _record(cfg.name, f"family-{idx}", whole.outcome == expected, seed,
                       family=fam.to_json(), components=[v.outcome for v in comps],
                       expected=expected, outcome=whole.outcome, method=method,
                       flatness=whole.flatness, label="witness" if whole.witness_found else "evidence",
                       witness=None if whole.witness is None else whole.witness.to_json())

    return _parallel(run, list(enumerate(families)), cfg.workers)


def suite_conv_int(cfg: SuiteConfig) -> list[dict]:
    fams = _desk_families(cfg.seed, (1.5, 2.0, 3.0), (REAL_L2, REAL_L3), REAL_L1, 101)
    return _integral_suite(cfg, "strict_convex", fams)


def suite_psh_int(cfg: SuiteConfig) -> list[dict]:
    example = family(1, (1.0, 2.0), (SCALAR_C, SCALAR_C))
    fams = _desk_families(cfg.seed, (1.0, 1.5, 2.0), (SCALAR_C, COMPLEX_L2), COMPLEX_LINF, 202,
                          fixed=[example])
    return _integral_suite(cfg, "strict_psh", fams)


def day_maps(p, seed: int) -> list[tuple[str, MeasurableFamily, object]]:
    """Twenty labelled maps for one exponent: random, embedded flat, constant."""
    rng = np.random.default_rng([seed, 303, int(round(float(p) * 100))])
    w = lambda k: np.round(rng.uniform(0.5, 2.0, k), 3)
    real = family(p, w(2), (REAL_L2, REAL_L3))
    cplx = family(p, w(2), (SCALAR_C, COMPLEX_L2))
    flat_real = family(p, w(2), (REAL_L2, REAL_L1))
    flat_cplx = family(p, w(2), (SCALAR_C, COMPLEX_LINF))
    space_r, space_c = build_space(real), build_space(cplx)
    maps = []
    for _ in range(6):
        maps.append(("random-segment", real,
                     SegmentMap(random_vector(space_r, rng), random_vector(space_r, rng))))
    for _ in range(6):
        d = int(rng.integers(1, 4))
        c = rng.standard_normal((d + 1, cplx.dim)) + 1j * rng.standard_normal((d + 1, cplx.dim))
        maps.append(("random-disc", cplx, DiscMap(c)))
    for k in range(2):
        offset = embed_linear(flat_real, 0, k * random_vector(REAL_L2, rng))
        seg = SegmentMap(offset + embed_linear(flat_real, 1, [0.5, 0.5]),
                         embed_linear(flat_real, 1, [0.5, -0.5]))
        maps.append(("flat-segment", flat_real, seg))
    for k in range(2):
        c = complex(rng.uniform(0.5, 2.0)) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        offset = embed_linear(flat_cplx, 0, k * random_vector(SCALAR_C, rng))
        coeffs = np.array([offset + embed_linear(flat_cplx, 1, [c, 0]),
                           embed_linear(flat_cplx, 1, [0, c])])
        maps.append(("flat-disc", flat_cplx, DiscMap(coeffs)))
    for _ in range(2):
        maps.append(("constant-segment", real, SegmentMap(random_vector(space_r, rng), np.zeros(real.dim))))
    for _ in range(2):
        maps.append(("constant-disc", cplx, DiscMap(random_vector(space_c, rng)[None, :])))
    return maps


DAY_EXPONENTS = (1.5, 2.0, 4.0)
_EXPECTED_CLASS = {"random-segment": "strict", "random-disc": "strict", "flat-segment": "witness",
                   "flat-disc": "witness", "constant-segment": "constant", "constant-disc": "constant"}


def suite_day(cfg: SuiteConfig) -> list[dict]:
    items = [(p, i, label, fam, g) for p in DAY_EXPONENTS
             for i, (label, fam, g) in enumerate(day_maps(p, cfg.seed))]

    def run(item):
        p, i, label, fam, gamma = item
        rep = day_pipeline(fam, gamma, cfg.nodes, cfg.eps_eq)
        return _record(cfg.name, f"p={p:g}/{i}-{label}", rep.agree, cfg.seed, p=p, kind=rep.kind,
                       expected=_EXPECTED_CLASS[label], day=rep.verdict, direct=rep.direct.verdict,
                       offending=list(rep.offending), slacks=list(rep.slacks),
                       sphere_deviation=rep.sphere_deviation, gap=rep.direct.gap)

    records = _parallel(run, items, cfg.workers)
    # p = 1 is logged, not asserted: the radial-profile argument has no grip there.
    fam = family(1, (1.0, 2.0), (SCALAR_C, COMPLEX_L2))
    rng = np.random.default_rng([cfg.seed, 304])
    for i in range(5):
        c = rng.standard_normal((3, fam.dim)) + 1j * rng.standard_normal((3, fam.dim))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rep = day_pipeline(fam, DiscMap(c), cfg.nodes, cfg.eps_eq)
        records.append(_record(cfg.name, f"p=1/log-{i}", True, cfg.seed, p=1, kind="disc",
                               asserted=False, day=rep.verdict, direct=rep.direct.verdict,
                               agree=rep.agree, slacks=list(rep.slacks), warning=rep.warning))
    return records


def suite_counterexample(cfg: SuiteConfig) -> list[dict]:
    rep = certify.counterexample_suite(cfg.seed, 1000, cfg.nodes)
    passed = abs(rep.equality_gap) <= cfg.eps_eq and rep.min_affine_gap > 0
    return [_record(cfg.name, "equality-disc-vs-affine", passed, cfg.seed,
                    **_fields(rep))]


def suite_edge_p(cfg: SuiteConfig) -> list[dict]:
    rng = np.random.default_rng([cfg.seed, 505])
    records = []
    cases = [(1, "real"), (INF, "real"), (INF, "complex")]
    for p, field in cases:
        comps = (REAL_L2, REAL_L3) if field == "real" else (SCALAR_C, COMPLEX_L2)
        fam = family(p, np.round(rng.uniform(0.5, 2.0, 2), 3), comps)
        x = embed_linear(fam, 0, random_unit_vector(comps[0], rng))
        y = embed_linear(fam, 1, random_unit_vector(comps[1], rng))
        if field == "complex":
            gamma = DiscMap(np.array([x, y]))
        elif p == 1:
            gamma = SegmentMap((x + y) / 2, (x - y) / 2)
        else:
            gamma = SegmentMap(x, y)
        flat = certify.flatness(build_space(fam), gamma)
        records.append(_record(cfg.name, f"p={exponent_to_json(p)}-{field}",
                               flat <= cfg.eps_flat and not gamma.is_constant(), cfg.seed,
                               family=fam.to_json(), flatness=flat, witness=gamma.to_json()))
    return records


def jensen_polynomials(seed: int, count: int = 100) -> list[tuple[DiscMap, ZeroProfile]]:
    """Seeded polynomials of degree <= 5 with all roots in 0.05 < |z| < 0.95."""
    rng = np.random.default_rng([seed, 606])
    out = []
    for _ in range(count):
        d = int(rng.integers(1, 6))
        roots = rng.uniform(0.05, 0.95, d) * np.exp(2j * np.pi * rng.uniform(size=d))
        lead = complex(rng.standard_normal(), rng.standard_normal())
        out.append((DiscMap(lead * np.poly(roots)[::-1]), ZeroProfile.simple(roots)))
    return out


def suite_jensen(cfg: SuiteConfig) -> list[dict]:
    records = []
    worst = 0.0
    for gamma, zeros in jensen_polynomials(cfg.seed):
        worst = max(worst, jensen_formula_residual(gamma, zeros, cfg.nodes))
    records.append(_record(cfg.name, "formula-residual", worst <= 1e-8, cfg.seed,
                           polynomials=100, max_residual=worst))
    worked = DiscMap(np.poly([0.3, 0.5])[::-1])
    mean = circle_mean(log_norm(lp_space(1, 1, "complex")), worked, cfg.nodes)
    res = jensen_formula_residual(worked, ZeroProfile.simple([0.3, 0.5]), cfg.nodes)
    records.append(_record(cfg.name, "worked-quadratic", abs(mean) <= 1e-8 and res <= 1e-8,
                           cfg.seed, circle_mean=mean, residual=res))
    for name, values, weights, flag in [
            ("finite-distinct", [0.0, 1.0], [0.5, 0.5], True),
            ("one-minus-inf", [-np.inf, 0.0], [0.5, 0.5], True),
            ("all-minus-inf", [-np.inf, -np.inf], [0.5, 0.5], True)]:
        chk = jensen_extended_check(values, weights, EXP2)
        ok = chk.gap >= -1e-12 and chk.constant is flag
        records.append(_record(cfg.name, f"extended-{name}", ok, cfg.seed,
                               lhs=chk.lhs, rhs=chk.rhs, gap=chk.gap, constant=chk.constant))
    return records


def suite_involution(cfg: SuiteConfig) -> list[dict]:
    records = []
    for name, f_real, strict in [("l1-norm", norm_function(REAL_L1), False),
                                 ("linf-norm", norm_function(lp_space(INF, 2)), False),
                                 ("sq-euclidean", norm_power(REAL_L2, 2), True)]:
        rep = certify.pullback_conv_psh_check(f_real, 2, 200, cfg.seed, strict, nodes=cfg.nodes)
        records.append(_record(cfg.name, name, rep.passed, cfg.seed, **_fields(rep)))
    return records


_RUNNERS = {"conv-int": suite_conv_int, "psh-int": suite_psh_int, "day": suite_day,
            "counterexample": suite_counterexample, "edge-p": suite_edge_p,
            "jensen": suite_jensen, "involution": suite_involution}


@dataclasses.dataclass
class SuiteResult:
    name: str
    records: list[dict]
    paths: list[Path]

    @property
    def passed(self) -> bool:
        return all(r["passed"] for r in self.records)


def run_suite(cfg: SuiteConfig) -> SuiteResult:
    from .report import emit_report
    records = _RUNNERS[cfg.name](cfg)
    paths = []
    if cfg.output:
        out = Path(cfg.output)
        if cfg.format:
            paths.append(emit_report(records, out, cfg.format))
        else:
            paths.append(emit_report(records, out.with_suffix(".json"), "json"))
            paths.append(emit_report(records, out.with_suffix(".csv"), "csv"))
    return SuiteResult(cfg.name, records, paths)
