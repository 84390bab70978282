"""L^p direct integrals over finite measure spaces.

With finitely many points of positive weight every family is measurable
and discrete, every section is simple, and the quotient by null sections
is trivial, so the direct integral is the weighted l^p combination of the
component norms.  It is realised as a ``block`` space, so every other tool
in the package applies to it unchanged.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Sequence

import numpy as np

from .spaces import INF, NormedSpace, block_space, exponent_to_json, lp_combine, make_space, \
    parse_exponent, random_vector


@dataclasses.dataclass(frozen=True)
class MeasureSpace:
    """Finite set of points, each with a strictly positive weight."""

    weights: tuple[float, ...]

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if not w:
            raise ValueError("a measure space needs at least one point")
        if not all(math.isfinite(x) and x > 0 for x in w):
            raise ValueError(f"weights must be strictly positive, got {w}")
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return len(self.weights)


@dataclasses.dataclass(frozen=True)
class MeasurableFamily:
    base: MeasureSpace
    components: tuple[NormedSpace, ...]
    p: object = 2.0

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) != len(self.base):
            raise ValueError("one component space per measure point")
        if any(c.field is not comps[0].field for c in comps):
            raise ValueError("all components must share one scalar field")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "p", parse_exponent(self.p))

    @property
    def field(self):
        return self.components[0].field

    @property
    def dim(self) -> int:
        return sum(c.dim for c in self.components)

    def slices(self) -> list[slice]:
        out, start = [], 0
        for c in self.components:
            out.append(slice(start, start + c.dim))
            start += c.dim
        return out

    def to_json(self) -> dict:
        return {"p": exponent_to_json(self.p),
                "points": [{"weight": w, "space": c.descriptor()}
                           for w, c in zip(self.base.weights, self.components)]}

    @classmethod
    def from_json(cls, data: dict) -> MeasurableFamily:
        points = data.get("points") or []
        if not points:
            raise ValueError("family needs at least one point")
        return cls(MeasureSpace(tuple(pt["weight"] for pt in points)),
                   tuple(make_space(pt["space"]) for pt in points), data.get("p", 2))


def family(p, weights: Sequence[float], components: Sequence[NormedSpace]) -> MeasurableFamily:
    return MeasurableFamily(MeasureSpace(tuple(weights)), tuple(components), p)


@dataclasses.dataclass(frozen=True, eq=False)
class Section:
    """One vector per measure point.  ``flags`` records construction caveats."""

    values: tuple[np.ndarray, ...]
    flags: tuple[str, ...] = ()

    def pack(self) -> np.ndarray:
        return np.concatenate([np.asarray(v) for v in self.values])


def unpack(fam: MeasurableFamily, vector) -> Section:
    v = np.asarray(vector)
    if v.shape[-1] != fam.dim:
        raise ValueError(f"expected a vector of dimension {fam.dim}")
    return Section(tuple(v[..., s] for s in fam.slices()))


def _check_section(fam: MeasurableFamily, sigma: Section) -> None:
    if len(sigma.values) != len(fam.components):
        raise ValueError("section has the wrong number of points")
    for v, c in zip(sigma.values, fam.components):
        c.check_vector(v)


def pointwise_norms(fam: MeasurableFamily, vectors) -> np.ndarray:
    """s -> ||sigma(s)||_{E_s} for packed sections; shape (..., |S|)."""
    v = np.asarray(vectors)
    return np.stack([c.norms(v[..., s]) for c, s in zip(fam.components, fam.slices())], axis=-1)


def section_norm_p(fam: MeasurableFamily, sigma: Section) -> float:
    _check_section(fam, sigma)
    norms = np.array([c.norms(v) for c, v in zip(fam.components, sigma.values)])
    return float(lp_combine(norms, fam.p, fam.base.weights))


def build_space(fam: MeasurableFamily) -> NormedSpace:
    """The direct integral as a normed space under canonical coordinate packing."""
    return block_space(fam.p, fam.components, fam.base.weights)


def embedding_scale(fam: MeasurableFamily, s: int) -> float:
    return 1.0 if fam.p is INF else fam.base.weights[s] ** (-1.0 / fam.p)


def embed_component(fam: MeasurableFamily, s: int, v) -> Section:
    """v -> mu(s)^(-1/p) v placed at s, zero elsewhere (isometric).

    At p = inf the unscaled indicator section is used instead; it is still
    isometric for the max norm, and the section carries a flag saying so.
    """
    comp = fam.components[s]
    v = comp.check_vector(v)
    values = tuple(embedding_scale(fam, s) * v if i == s else c.zero()
                   for i, c in enumerate(fam.components))
    flags = ("unscaled_sup_embedding",) if fam.p is INF else ()
    return Section(values, flags)


def embed_linear(fam: MeasurableFamily, s: int, coeffs) -> np.ndarray:
    """Apply embed_component to each row of a coefficient array, returning packed rows."""
    coeffs = np.asarray(coeffs)
    out = np.zeros(coeffs.shape[:-1] + (fam.dim,), dtype=fam.components[s].dtype)
    out[..., fam.slices()[s]] = embedding_scale(fam, s) * coeffs
    return out


def random_section(fam: MeasurableFamily, rng: np.random.Generator) -> Section:
    scales = 10.0 ** rng.uniform(-1, 1, len(fam.components))
    return Section(tuple(k * random_vector(c, rng) for k, c in zip(scales, fam.components)))


@dataclasses.dataclass(frozen=True)
class DecompositionReport:
    groups: tuple[tuple[int, ...], ...]
    trials: int
    max_discrepancy: float


def decomposition_check(fam: MeasurableFamily, trials: int = 100, seed: int = 0) -> DecompositionReport:
    """Compare the direct-integral norm with the l^p norm of per-space Bochner norms."""
    groups: dict[NormedSpace, list[int]] = {}
    for i, c in enumerate(fam.components):
        groups.setdefault(c, []).append(i)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        sigma = random_section(fam, rng)
        direct = section_norm_p(fam, sigma)
        bochner = []
        for idx in groups.values():
            norms = [fam.components[i].norms(sigma.values[i]) for i in idx]
            bochner.append(float(lp_combine(np.array(norms), fam.p,
                                            [fam.base.weights[i] for i in idx])))
        two_stage = float(lp_combine(np.array(bochner), fam.p))
        worst = max(worst, abs(direct - two_stage))
    return DecompositionReport(tuple(tuple(v) for v in groups.values()), trials, worst)


def approximate_simple(fam: MeasurableFamily, sigma: Section, candidates, n: int) -> Section:
    """Simple section built from the first n+1 candidates.

    ``candidates`` is an ordered list of ``(vector, space)`` pairs.  At each
    point s the admissible indices are those k <= n whose space is E_s and
    whose norm does not exceed ||sigma(s)||; the smallest admissible index
    minimising ||sigma(s) - v_k|| is chosen, and 0 when none is admissible.
    """
    _check_section(fam, sigma)
    out = []
    pool = list(candidates)[: n + 1]
    for comp, value in zip(fam.components, sigma.values):
        bound = comp.norms(value)
        best, best_dist = None, np.inf
        for vec, space in pool:
            if space != comp:
                continue
            vec = np.asarray(vec, dtype=comp.dtype)
            if comp.norms(vec) > bound:
                continue
            d = comp.norms(value - vec)
            if d < best_dist:
                best, best_dist = vec, d
        out.append(comp.zero() if best is None else best)
    return Section(tuple(out))
