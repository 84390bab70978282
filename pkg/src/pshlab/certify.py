"""Strictness verdicts for finite-dimensional normed spaces.

A real space fails to be strictly convex exactly when its unit sphere
contains a non-constant segment; a complex space fails to be strictly psh
exactly when the sphere contains a non-constant holomorphic disc.  The
searches below look for such maps (witnesses) by minimising a flatness
objective.  A ``no_witness`` verdict is evidence, not proof.
"""

from __future__ import annotations

import dataclasses
import functools
import itertools
import time
from typing import Callable

import numpy as np

from .maps import DiscMap, PolySelfMap, SegmentMap, random_disc
from .means import (EPS_EQ, EXP2, SQUARE, ScalarFunction, circle_nodes, log_norm,
                    midpoint_gap, norm_function, pullback, psh_gap, real_pullback,
                    reshaped, robust_psh_gap, sq_modulus_poly)
from .spaces import NormedSpace, random_unit_vector, random_vector

EPS_FLAT = 1e-9

MODES = ("strict_convex", "strict_psh")
_MODE_ALIASES = {"convex": "strict_convex", "psh": "strict_psh"}

SEGMENT_GRID = np.linspace(-1.0, 1.0, 33)


def _disc_grid() -> np.ndarray:
    rim = np.exp(2j * np.pi * np.arange(64) / 64)
    ring = np.exp(2j * np.pi * np.arange(32) / 32)
    return np.concatenate([rim, ring / 3, 2 * ring / 3, [0.0]])


DISC_GRID = _disc_grid()

# Exact lattice probed before random restarts; witnesses of polyhedral
# norms have simple coordinates.
_REAL_LATTICE = np.array([0.0, 1.0, -1.0, 0.5, -0.5])
_COMPLEX_LATTICE = np.array([0, 1, -1, 1j, -1j])
PROBE_BUDGET = 20000


def normalize_mode(mode: str) -> str:
    mode = _MODE_ALIASES.get(mode, mode)
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return mode


# -- flatness objective -----------------------------------------------------

def _segment_params_flatness(space: NormedSpace, x: np.ndarray) -> np.ndarray:
    n = space.dim
    base, d = x[:, :n], x[:, n:]
    dn = space.norms(d)
    ok = dn > 0
    d = d / np.where(ok, dn, 1.0)[:, None]
    vals = base[:, None, :] + SEGMENT_GRID[None, :, None] * d[:, None, :]
    out = np.abs(space.norms(vals) - 1).max(axis=1)
    return np.where(ok, out, np.inf)


def _split_disc_params(space: NormedSpace, x: np.ndarray, degree: int) -> tuple[np.ndarray, np.ndarray]:
    c = x.reshape(x.shape[0], degree + 1, space.dim, 2)
    c = c[..., 0] + 1j * c[..., 1]
    total = space.norms(c[:, 1:, :]).sum(axis=1)
    ok = total > 0
    c[:, 1:, :] /= np.where(ok, total, 1.0)[:, None, None]
    return c, ok


@functools.lru_cache(maxsize=None)
def _vandermonde(degree: int) -> np.ndarray:
    return DISC_GRID[:, None] ** np.arange(degree + 1)[None, :]


def _disc_coeffs_flatness(space: NormedSpace, c: np.ndarray) -> np.ndarray:
    batch, terms, n = c.shape
    # one matrix product, laid out (grid, batch, coordinate)
    vals = (_vandermonde(terms - 1) @ c.transpose(1, 0, 2).reshape(terms, batch * n)).reshape(-1, batch, n)
    return np.abs(space.norms(vals) - 1).max(axis=0)


def _disc_params_flatness(space, x, degree):
    c, ok = _split_disc_params(space, x, degree)
    return np.where(ok, _disc_coeffs_flatness(space, c), np.inf)


def segment_flatness(space: NormedSpace, gamma: SegmentMap) -> float:
    vals = gamma(SEGMENT_GRID)
    return float(np.abs(space.norms(vals) - 1).max())


def disc_flatness(space: NormedSpace, gamma: DiscMap) -> float:
    return float(_disc_coeffs_flatness(space, np.asarray(gamma.coeffs)[None])[0])


def flatness(space: NormedSpace, gamma) -> float:
    """Max deviation of ||gamma|| from 1 over the segment or disc grid."""
    if isinstance(gamma, SegmentMap):
        return segment_flatness(space, gamma)
    return disc_flatness(space, gamma)


# -- verdicts ---------------------------------------------------------------

@dataclasses.dataclass
class Verdict:
    mode: str
    outcome: str                       # "witness_found" | "no_witness"
    flatness: float                    # witness flatness, or min flatness seen
    witness: SegmentMap | DiscMap | None
    restarts: int
    degree_cap: int | None
    seed: int
    elapsed: float = 0.0
    crosscheck: CrosscheckReport | None = None

    @property
    def witness_found(self) -> bool:
        return self.outcome == "witness_found"

    def to_json(self) -> dict:
        d = {"mode": self.mode, "outcome": self.outcome, "flatness": self.flatness,
             "witness": None if self.witness is None else self.witness.to_json(),
             "restarts": self.restarts, "degree_cap": self.degree_cap, "seed": self.seed,
             "label": "witness" if self.witness_found else "evidence"}
        if self.crosscheck is not None:
            d["crosscheck"] = dataclasses.asdict(self.crosscheck)
        return d

    @classmethod
    def from_json(cls, data: dict) -> Verdict:
        w = data.get("witness")
        if w is not None:
            w = SegmentMap.from_json(w) if "base" in w else DiscMap.from_json(w)
        return cls(data["mode"], data["outcome"], float(data["flatness"]), w,
                   int(data["restarts"]), data.get("degree_cap"), int(data["seed"]))


def replay(space: NormedSpace, verdict: Verdict) -> float:
    """Re-evaluate the flatness of a verdict's witness."""
    if verdict.witness is None:
        raise ValueError("verdict carries no witness")
    return flatness(space, verdict.witness)


# -- search machinery -------------------------------------------------------

def pattern_search(objective: Callable[[np.ndarray], np.ndarray], x0: np.ndarray,
                   step: float = 0.25, shrink: float = 0.5, iterations: int = 200,
                   min_step: float = 1e-14, target: float = 0.0) -> tuple[np.ndarray, float]:
    """Coordinate pattern search: poll +-step along every axis, shrink on failure."""
    x = np.array(x0, dtype=float)
    fx = float(objective(x[None])[0])
    dirs = np.vstack([np.eye(x.size), -np.eye(x.size)])
    for _ in range(iterations):
        if fx <= target:
            break
        trial = x + step * dirs
        ft = objective(trial)
        k = int(np.argmin(ft))
        if ft[k] < fx:
            x, fx = trial[k], float(ft[k])
        else:
            step *= shrink
            if step < min_step:
                break
    return x, fx


def _lattice_candidates(values: np.ndarray, positions: int, budget: int):
    """All lattice points, simplest first; None when over budget."""
    if len(values) ** positions > budget:
        return None
    idx = np.array(list(itertools.product(range(len(values)), repeat=positions)))
    nz = idx != 0
    keys = [nz.sum(axis=1)] + [~nz[:, j] for j in range(positions)] + [idx[:, j] for j in range(positions)]
    order = np.lexsort(keys[::-1])
    return values[idx[order]]


def _first_below(objective, candidates: np.ndarray, tol: float, chunk: int = 4096):
    best = (np.inf, None)
    for start in range(0, len(candidates), chunk):
        block = candidates[start:start + chunk]
        vals = objective(block)
        hit = np.flatnonzero(vals <= tol)
        if hit.size:
            return float(vals[hit[0]]), block[hit[0]]
        k = int(np.argmin(vals))
        if vals[k] < best[0]:
            best = (float(vals[k]), block[k])
    return best


def _snap(objective, x: np.ndarray, tol: float):
    """Round to dyadic grids of increasing resolution; return the first flat rounding."""
    trials = np.array([np.round(x * 2.0 ** k) / 2.0 ** k for k in range(1, 31)])
    vals = objective(trials)
    hit = np.flatnonzero(vals <= tol)
    if hit.size:
        return float(vals[hit[0]]), trials[hit[0]]
    return None


def _restart_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def _run_search(objective, canonical, start, lattice, restarts, seed, iterations, tol):
    best_f, best_x = np.inf, None
    if lattice is not None:
        best_f, best_x = _first_below(objective, lattice, tol)
        if best_f <= tol:
            return best_f, canonical(best_x)
    for r in range(restarts):
        x, fx = pattern_search(objective, start(_restart_rng(seed, r)),
                               iterations=iterations, target=tol)
        if tol < fx < 1e-4:
            snapped = _snap(objective, canonical(x), tol)
            if snapped is not None:
                fx, x = snapped
        if fx < best_f:
            best_f, best_x = fx, x
        if best_f <= tol:
            break
    return best_f, (None if best_x is None else canonical(best_x))


def flat_segment_search(space: NormedSpace, restarts: int = 100, seed: int = 0,
                        iterations: int = 200, tol: float = EPS_FLAT) -> Verdict:
    """Look for a non-constant segment in the unit sphere of a real space."""
    if space.is_complex:
        raise ValueError("flat segment search needs a real space")
    t0 = time.perf_counter()
    n = space.dim

    def objective(x):
        return _segment_params_flatness(space, np.atleast_2d(x))

    def canonical(x):
        d = x[n:] / space.norms(x[n:])
        return np.concatenate([x[:n], d])

    def start(rng):
        return np.concatenate([random_unit_vector(space, rng), random_vector(space, rng)])

    lattice = _lattice_candidates(_REAL_LATTICE, 2 * n, PROBE_BUDGET)
    f, x = _run_search(objective, canonical, start, lattice, restarts, seed, iterations, tol)
    witness = None
    if f <= tol:
        witness = SegmentMap(x[:n], x[n:])
        f = segment_flatness(space, witness)
    outcome = "witness_found" if witness is not None and not witness.is_constant() else "no_witness"
    return Verdict("strict_convex", outcome, float(f), witness if outcome == "witness_found" else None,
                   restarts, None, seed, time.perf_counter() - t0)


def flat_disc_search(space: NormedSpace, degree_cap: int = 6, restarts: int = 100,
                     seed: int = 0, iterations: int = 200, tol: float = EPS_FLAT) -> Verdict:
    """Look for a non-constant polynomial disc in the unit sphere of a complex space."""
    if not space.is_complex:
        raise ValueError("flat disc search needs a complex space")
    if degree_cap < 1:
        raise ValueError("degree_cap must be >= 1")
    t0 = time.perf_counter()
    n, d = space.dim, degree_cap

    def objective(x):
        return _disc_params_flatness(space, np.atleast_2d(x), d)

    def to_params(c):
        return np.stack([c.real, c.imag], axis=-1).ravel()

    def canonical(x):
        c, _ = _split_disc_params(space, np.atleast_2d(x), d)
        return to_params(c[0])

    def start(rng):
        c = np.zeros((d + 1, n), dtype=complex)
        c[0] = random_unit_vector(space, rng)
        for k in range(1, d + 1):
            c[k] = random_vector(space, rng) * 0.5 ** (k - 1)
        return to_params(c)

    lattice = None
    lin = _lattice_candidates(_COMPLEX_LATTICE, 2 * n, PROBE_BUDGET)
    if lin is not None:
        lattice = np.zeros((len(lin), d + 1, n), dtype=complex)
        lattice[:, 0], lattice[:, 1] = lin[:, :n], lin[:, n:]
        lattice = np.stack([lattice.real, lattice.imag], axis=-1).reshape(len(lin), -1)
    f, x = _run_search(objective, canonical, start, lattice, restarts, seed, iterations, tol)
    witness = None
    if f <= tol:
        c = x.reshape(d + 1, n, 2)
        witness = DiscMap(c[..., 0] + 1j * c[..., 1])
        f = disc_flatness(space, witness)
    outcome = "witness_found" if witness is not None and not witness.is_constant() else "no_witness"
    return Verdict("strict_psh", outcome, float(f), witness if outcome == "witness_found" else None,
                   restarts, degree_cap, seed, time.perf_counter() - t0)


def strict_verdict(space: NormedSpace, mode: str, restarts: int = 100, degree_cap: int = 6,
                   seed: int = 0, iterations: int = 200, crosscheck: bool = False,
                   crosscheck_samples: int = 200, tol: float = EPS_FLAT) -> Verdict:
    mode = normalize_mode(mode)
    if (mode == "strict_psh") != space.is_complex:
        raise ValueError(f"mode {mode} does not match a {space.field.value} space")
    if mode == "strict_convex":
        v = flat_segment_search(space, restarts, seed, iterations, tol)
    else:
        v = flat_disc_search(space, degree_cap, restarts, seed, iterations, tol)
    if crosscheck:
        v.crosscheck = equivalence_crosscheck(space, mode, crosscheck_samples, seed, verdict=v)
    return v


# -- equivalence cross-check -------------------------------------------------

@dataclasses.dataclass
class CrosscheckReport:
    consistent: bool
    witness_found: bool
    min_gap: float
    samples: int
    reshaper: str


def equivalence_crosscheck(space: NormedSpace, mode: str, samples: int = 200, seed: int = 0,
                           verdict: Verdict | None = None, degree: int = 2,
                           **search) -> CrosscheckReport:
    """Compare the flat-map verdict with strictness of a reshaped norm.

    Convex mode reshapes the norm by t -> t^2 and samples midpoint gaps on
    segments; psh mode reshapes the log-norm by t -> exp(2t) and samples
    disc gaps.  The witness map, if any, is included in the sample.
    """
    mode = normalize_mode(mode)
    if verdict is None:
        verdict = strict_verdict(space, mode, seed=seed, **search)
    rng = np.random.default_rng([seed, 7])
    gaps = []
    if mode == "strict_convex":
        f = reshaped(SQUARE, norm_function(space))
        for _ in range(samples):
            seg = SegmentMap(random_vector(space, rng), random_unit_vector(space, rng))
            gaps.append(midpoint_gap(f, seg))
        if verdict.witness is not None:
            gaps.append(midpoint_gap(f, verdict.witness))
        reshaper = "square"
    else:
        f = reshaped(EXP2, log_norm(space))
        for k in range(samples):
            gaps.append(robust_psh_gap(f, random_disc(space.dim, degree, rng), seed=k))
        if verdict.witness is not None:
            gaps.append(psh_gap(f, verdict.witness))
        reshaper = "exp2"
    min_gap = float(min(gaps))
    found = verdict.witness_found
    return CrosscheckReport(found == (min_gap <= EPS_EQ), found, min_gap, len(gaps), reshaper)


# -- maximum modulus ---------------------------------------------------------

@dataclasses.dataclass
class MMPReport:
    violation: bool
    nonconstant: bool
    interior_max: float
    overall_max: float


def strong_mmp_check(space: NormedSpace, eta: DiscMap, nodes: int = 64) -> MMPReport:
    """Does ||eta|| reach its grid maximum at some |z| <= 2/3 while eta is non-constant?"""
    radii = np.array([0, 1 / 6, 1 / 3, 1 / 2, 2 / 3, 5 / 6, 1.0])
    pts = radii[:, None] * circle_nodes(nodes)[None, :]
    norms = space.norms(eta(pts))
    inner = norms[radii <= 2 / 3 + 1e-15].max()
    overall = norms.max()
    nonconstant = not eta.is_constant()
    return MMPReport(bool(nonconstant and inner >= overall - EPS_EQ), nonconstant,
                     float(inner), float(overall))


def has_strict_interior_max(f: ScalarFunction, gamma, nodes: int = 64, tol: float = 1e-12) -> bool:
    """f(gamma(0)) strictly above every boundary value of the segment or circle."""
    centre = float(f(gamma(0.0)))
    if isinstance(gamma, SegmentMap):
        rim = np.atleast_1d(f(gamma(np.array([-1.0, 1.0]))))
    else:
        rim = np.atleast_1d(f(gamma(circle_nodes(nodes))))
    return centre > rim.max() + tol * max(1.0, abs(centre))


# -- pullbacks and the counterexample ---------------------------------------

@dataclasses.dataclass
class PullbackReport:
    passed: bool
    discs: int
    min_gap: float
    strict: bool
    min_gap_nonconstant: float


def sample_discs(dim: int, count: int, seed: int, degree: int = 3,
                 min_higher: float = 0.1) -> list[DiscMap]:
    """Random non-constant discs whose higher coefficients have total norm >= min_higher."""
    rng = np.random.default_rng([seed, 11])
    out = []
    while len(out) < count:
        g = random_disc(dim, int(rng.integers(1, degree + 1)), rng)
        higher = np.linalg.norm(g.coeffs[1:], axis=1).sum()
        if higher >= min_higher:
            out.append(g)
    return out


def pullback_conv_psh_check(f_real: ScalarFunction, dim: int, discs: int = 200, seed: int = 0,
                            strictly_convex: bool = False, degree: int = 3,
                            nodes: int = 512) -> PullbackReport:
    """f = f_real o Re on C^n: psh on every sampled disc, strictly so when f_real is."""
    f = real_pullback(f_real)
    gaps, strict_gaps = [], []
    grid = circle_nodes(nodes)
    for g in sample_discs(dim, discs, seed, degree):
        gap = psh_gap(f, g, nodes)
        gaps.append(gap)
        re = np.real(g(grid))
        if np.ptp(re, axis=0).max() > 1e-12:
            strict_gaps.append(gap)
    min_gap = float(min(gaps))
    min_strict = float(min(strict_gaps)) if strict_gaps else np.inf
    passed = min_gap >= -1e-8
    if strictly_convex:
        passed = passed and min_strict > 1e-6
    return PullbackReport(passed, discs, min_gap, strictly_convex, min_strict)


def counterexample_map() -> tuple[ScalarFunction, DiscMap]:
    """g = |z1^2 + z2|^2 and the non-constant disc z -> (z, -z^2) on which g vanishes."""
    phi2 = PolySelfMap(2, [{(2, 0): 1, (0, 1): 1}])
    g = sq_modulus_poly(phi2)
    return g, DiscMap([[0, 0], [1, 0], [0, -1]])


@dataclasses.dataclass
class CounterexampleReport:
    passed: bool
    equality_gap: float
    affine_samples: int
    min_affine_gap: float


def counterexample_suite(seed: int = 0, samples: int = 1000, nodes: int = 512) -> CounterexampleReport:
    """g is strict on every non-constant affine disc yet has an equality disc."""
    g, disc = counterexample_map()
    eq_gap = psh_gap(g, disc, nodes)
    rng = np.random.default_rng([seed, 13])
    min_gap = np.inf
    done = 0
    while done < samples:
        c = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        affine = DiscMap(c)
        if affine.is_constant():
            continue
        min_gap = min(min_gap, psh_gap(g, affine, nodes))
        done += 1
    return CounterexampleReport(bool(abs(eq_gap) <= EPS_EQ and min_gap > 0), float(eq_gap),
                                samples, float(min_gap))


def composition_gap(f: ScalarFunction, phi: PolySelfMap, gamma: DiscMap, nodes: int = 512) -> float:
    """psh gap of f o phi along gamma."""
    return psh_gap(pullback(f, phi), gamma, nodes)
