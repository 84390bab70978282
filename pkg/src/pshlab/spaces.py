"""Finite-dimensional real and complex normed spaces.

A space is an immutable value carrying its scalar field, its dimension and
a norm drawn from a small closed grammar: (weighted) l^p norms on
coordinates, and l^p combinations of sub-space norms over consecutive
blocks of coordinates.  Everything except ``custom`` norms round-trips
through a JSON descriptor.

Vectors are plain numpy arrays whose last axis has length ``dim``; norm
evaluation broadcasts over any leading axes.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from typing import Callable, Sequence

import numpy as np


class ScalarField(enum.Enum):
    REAL = "real"
    COMPLEX = "complex"


class _Infinity(enum.Enum):
    INF = "inf"

    def __repr__(self):
        return "INF"


#: The exponent p = infinity.  Kept as an enum member so it never enters
#: floating-point arithmetic.
INF = _Infinity.INF

KINDS = ("lp", "weighted_lp", "block", "custom")


def parse_exponent(p) -> float | _Infinity:
    """Normalise an exponent given as a number, ``"inf"`` or :data:`INF`."""
    if p is INF:
        return INF
    if isinstance(p, str):
        if p.strip().lower() in ("inf", "infinity", "oo"):
            return INF
        try:
            p = float(p)
        except ValueError:
            raise ValueError(f"invalid exponent {p!r}") from None
    if isinstance(p, bool) or not isinstance(p, (int, float, np.integer, np.floating)):
        raise ValueError(f"invalid exponent {p!r}")
    p = float(p)
    if math.isinf(p) and p > 0:
        return INF
    if not math.isfinite(p) or p < 1:
        raise ValueError(f"exponent must lie in [1, inf], got {p}")
    return p


def exponent_to_json(p):
    return "inf" if p is INF else p


# Reductions over a short last axis are much faster as a matrix product or
# an unrolled elementwise maximum than as ufunc.reduce.

def _weighted_sum(a, w):
    return a @ (np.ones(a.shape[-1]) if w is None else w)


def _last_max(a):
    if a.shape[-1] > 16:
        return a.max(axis=-1)
    out = a[..., 0]
    for i in range(1, a.shape[-1]):
        out = np.maximum(out, a[..., i])
    return out


def lp_combine(values, p, weights=None):
    """Weighted l^p combination of nonnegative values along the last axis.

    For p = INF the weights are irrelevant (every weight is positive) and
    the result is the maximum.
    """
    a = np.asarray(values, dtype=float)
    if p is INF:
        return _last_max(a)
    w = None if weights is None else np.asarray(weights, dtype=float)
    if p == 1:
        return _weighted_sum(a, w)
    with np.errstate(over="ignore", under="ignore"):
        if p == 2:
            plain = np.sqrt(_weighted_sum(a * a, w))
        else:
            plain = _weighted_sum(a ** p, w) ** (1.0 / p)
    return _rescaled(a, p, w, plain)


def _rescaled(a, p, w, plain):
    """Redo the sum, scaled by the row maximum, wherever it left the safe range."""
    bad = ~((plain >= 1e-150) & (plain < 1e150))
    if not np.any(bad):
        return plain
    out = np.array(plain, ndmin=1)
    bad = bad.reshape(out.shape)
    sub = a.reshape(out.shape + a.shape[-1:])[bad]
    scale = sub.max(axis=-1, keepdims=True)
    safe = np.where(scale > 0, scale, 1.0)
    out[bad] = safe[:, 0] * _weighted_sum((sub / safe) ** p, w) ** (1.0 / p)
    return out.reshape(np.shape(plain))


@dataclasses.dataclass(frozen=True)
class NormedSpace:
    """A finite-dimensional normed space over R or C."""

    field: ScalarField
    dim: int
    kind: str
    p: float | _Infinity = 2.0
    weights: tuple[float, ...] | None = None
    blocks: tuple[NormedSpace, ...] = ()
    custom: Callable | None = None

    @property
    def is_complex(self) -> bool:
        return self.field is ScalarField.COMPLEX

    @property
    def dtype(self):
        return np.complex128 if self.is_complex else np.float64

    def zero(self) -> np.ndarray:
        return np.zeros(self.dim, dtype=self.dtype)

    def block_slices(self) -> list[slice]:
        out, start = [], 0
        for b in self.blocks:
            out.append(slice(start, start + b.dim))
            start += b.dim
        return out

    def norms(self, v) -> np.ndarray:
        """Norms of a batch of vectors (last axis = coordinates); no validation."""
        v = np.asarray(v)
        if self.kind == "custom":
            return np.asarray(self.custom(v), dtype=float)
        if self.kind == "block":
            parts = [b.norms(v[..., s]) for b, s in zip(self.blocks, self.block_slices())]
            return lp_combine(np.stack(parts, axis=-1), self.p, self.weights)
        return lp_combine(np.abs(v), self.p, self.weights)

    def check_vector(self, v) -> np.ndarray:
        v = np.asarray(v)
        if v.ndim == 0 or v.shape[-1] != self.dim:
            raise ValueError(f"expected vectors of dimension {self.dim}, got shape {v.shape}")
        if np.iscomplexobj(v) and not self.is_complex:
            raise ValueError("real space rejects complex coordinates")
        return v.astype(self.dtype, copy=False)

    def norm(self, v):
        """Norm of one vector, or of each vector in a batch."""
        out = self.norms(self.check_vector(v))
        return float(out) if np.ndim(out) == 0 else out

    def descriptor(self) -> dict:
        if self.kind == "custom":
            raise ValueError("custom norms have no JSON descriptor")
        d = {"field": self.field.value, "kind": self.kind, "dim": self.dim,
             "p": exponent_to_json(self.p)}
        if self.weights is not None:
            d["weights"] = list(self.weights)
        if self.kind == "block":
            d["blocks"] = [b.descriptor() for b in self.blocks]
        return d

    def __str__(self):
        if self.kind == "custom":
            return f"custom({self.field.value}, dim={self.dim})"
        p = "inf" if self.p is INF else f"{self.p:g}"
        if self.kind == "block":
            inner = ", ".join(str(b) for b in self.blocks)
            return f"l{p}[{inner}]"
        f = "R" if self.field is ScalarField.REAL else "C"
        w = "w" if self.kind == "weighted_lp" else ""
        return f"{w}l{p}({f}^{self.dim})"


def _field(value) -> ScalarField:
    if isinstance(value, ScalarField):
        return value
    try:
        return ScalarField(str(value).lower())
    except ValueError:
        raise ValueError(f"field must be 'real' or 'complex', got {value!r}") from None


def _positive_weights(weights, n) -> tuple[float, ...]:
    w = tuple(float(x) for x in weights)
    if len(w) != n:
        raise ValueError(f"expected {n} weights, got {len(w)}")
    if not all(math.isfinite(x) and x > 0 for x in w):
        raise ValueError(f"weights must be strictly positive, got {w}")
    return w


def _dimension(dim) -> int:
    if isinstance(dim, bool) or int(dim) != dim or int(dim) < 1:
        raise ValueError(f"dimension must be a positive integer, got {dim!r}")
    return int(dim)


def lp_space(p, dim, field="real") -> NormedSpace:
    return NormedSpace(_field(field), _dimension(dim), "lp", parse_exponent(p))


def weighted_lp_space(p, weights, field="real") -> NormedSpace:
    w = tuple(weights)
    dim = _dimension(len(w))
    return NormedSpace(_field(field), dim, "weighted_lp", parse_exponent(p),
                       _positive_weights(w, dim))


def block_space(p, blocks: Sequence[NormedSpace], weights=None) -> NormedSpace:
    """l^p combination of the norms of consecutive coordinate blocks."""
    blocks = tuple(blocks)
    if not blocks:
        raise ValueError("a block space needs at least one block")
    field = blocks[0].field
    if any(b.field is not field for b in blocks):
        raise ValueError("all blocks must share one scalar field")
    w = None if weights is None else _positive_weights(weights, len(blocks))
    return NormedSpace(field, sum(b.dim for b in blocks), "block", parse_exponent(p), w, blocks)


def custom_space(field, dim, norm: Callable) -> NormedSpace:
    """Wrap an arbitrary (possibly broken) norm; used to exercise the axiom checker."""
    return NormedSpace(_field(field), _dimension(dim), "custom", custom=norm)


def make_space(descriptor: dict) -> NormedSpace:
    """Build a space from its JSON descriptor, rejecting invalid input."""
    if isinstance(descriptor, NormedSpace):
        return descriptor
    if not isinstance(descriptor, dict):
        raise ValueError("space descriptor must be a JSON object")
    kind = descriptor.get("kind", "lp")
    field = descriptor.get("field", "real")
    p = descriptor.get("p", 2)
    if kind == "lp":
        return lp_space(p, descriptor.get("dim"), field)
    if kind == "weighted_lp":
        weights = descriptor.get("weights")
        if weights is None:
            raise ValueError("weighted_lp needs weights")
        space = weighted_lp_space(p, weights, field)
        if "dim" in descriptor and _dimension(descriptor["dim"]) != space.dim:
            raise ValueError("dim does not match the number of weights")
        return space
    if kind == "block":
        blocks = [make_space(b) for b in descriptor.get("blocks", [])]
        space = block_space(p, blocks, descriptor.get("weights"))
        if _field(field) is not space.field:
            raise ValueError("block field does not match its sub-spaces")
        if "dim" in descriptor and _dimension(descriptor["dim"]) != space.dim:
            raise ValueError("dim does not match the sum of block dimensions")
        return space
    raise ValueError(f"unknown space kind {kind!r}; expected one of lp, weighted_lp, block")


def random_vector(space: NormedSpace, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(space.dim)
    if space.is_complex:
        v = v + 1j * rng.standard_normal(space.dim)
    return v


def random_unit_vector(space: NormedSpace, seed) -> np.ndarray:
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    while True:
        v = random_vector(space, rng)
        n = space.norms(v)
        if n > 0:
            return v / n


@dataclasses.dataclass(frozen=True)
class NormAxiomReport:
    passed: bool
    trials: int
    failure: str | None = None
    detail: str = ""


def check_norm_axioms(space: NormedSpace, trials: int = 1000, seed: int = 0,
                      rtol: float = 1e-12) -> NormAxiomReport:
    """Sample the norm axioms; report the first violated axiom, if any.

    Axioms are checked one at a time across all samples, in the order
    nonnegativity/definiteness, homogeneity, triangle inequality.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    scales = 10.0 ** rng.uniform(-2, 2, size=(trials, 1))
    u = np.array([random_vector(space, rng) for _ in range(trials)]) * scales
    v = np.array([random_vector(space, rng) for _ in range(trials)]) * scales[::-1]
    c = rng.standard_normal(trials) * 10.0 ** rng.uniform(-2, 2, trials)
    if space.is_complex:
        c = c * np.exp(2j * np.pi * rng.uniform(size=trials))

    def fail(axiom, detail):
        return NormAxiomReport(False, trials, axiom, detail)

    z = float(space.norms(space.zero()))
    if z != 0:
        return fail("nonnegativity", f"norm(0) = {z!r}")
    nu, nv = space.norms(u), space.norms(v)
    for k in range(trials):
        if not nu[k] > 0:
            return fail("nonnegativity", f"trial {k}: norm(u) = {nu[k]!r} for nonzero u")
    ncu = space.norms(c[:, None] * u)
    expect = np.abs(c) * nu
    for k in range(trials):
        if abs(ncu[k] - expect[k]) > rtol * expect[k]:
            return fail("homogeneity", f"trial {k}: norm(c u) = {ncu[k]!r}, |c| norm(u) = {expect[k]!r}")
    nsum = space.norms(u + v)
    for k in range(trials):
        bound = nu[k] + nv[k]
        if nsum[k] > bound + rtol * bound:
            return fail("triangle", f"trial {k}: norm(u+v) = {nsum[k]!r} > {bound!r}")
    return NormAxiomReport(True, trials)
