"""Affine segments, polynomial disc maps and polynomial maps between K^m and K^n."""

from __future__ import annotations

import dataclasses
from typing import Mapping, Sequence

import numpy as np

DEFAULT_RADIUS = 1.25


def _frozen(a) -> np.ndarray:
    a = np.array(a)
    a.flags.writeable = False
    return a


@dataclasses.dataclass(frozen=True, eq=False)
class SegmentMap:
    """The affine map t -> base + t * direction on [-1, 1]."""

    base: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        base = np.asarray(self.base)
        direction = np.asarray(self.direction)
        if np.iscomplexobj(base) or np.iscomplexobj(direction):
            raise ValueError("segment maps take values in a real space")
        if base.ndim != 1 or base.shape != direction.shape:
            raise ValueError("base and direction must be vectors of equal length")
        object.__setattr__(self, "base", _frozen(base.astype(float)))
        object.__setattr__(self, "direction", _frozen(direction.astype(float)))

    @property
    def dim(self) -> int:
        return self.base.size

    def is_constant(self) -> bool:
        return not np.any(self.direction != 0)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.base + t[..., None] * self.direction

    def to_json(self) -> dict:
        return {"base": self.base.tolist(), "direction": self.direction.tolist()}

    @classmethod
    def from_json(cls, data: Mapping) -> SegmentMap:
        return cls(np.asarray(data["base"], float), np.asarray(data["direction"], float))


def eval_segment(gamma: SegmentMap, t: float) -> np.ndarray:
    if abs(t) > 1:
        raise ValueError(f"segment parameter must lie in [-1, 1], got {t}")
    return gamma(t)


def _trim(coeffs: np.ndarray) -> np.ndarray:
    d = coeffs.shape[0] - 1
    while d > 0 and not np.any(coeffs[d] != 0):
        d -= 1
    return coeffs[: d + 1]


@dataclasses.dataclass(frozen=True, eq=False)
class DiscMap:
    """Polynomial map z -> sum_k coeffs[k] z^k into C^n.

    ``coeffs`` has shape (degree + 1, n).  Polynomials are entire, so the
    declared radius only bounds where evaluation is accepted.
    """

    coeffs: np.ndarray
    radius: float = DEFAULT_RADIUS

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128)
        if c.ndim == 1:
            c = c[:, None]
        if c.ndim != 2 or c.shape[0] == 0 or c.shape[1] == 0:
            raise ValueError("coefficients must form a (degree+1, dim) array")
        if not self.radius > 1:
            raise ValueError(f"declared radius must exceed 1, got {self.radius}")
        object.__setattr__(self, "coeffs", _frozen(_trim(c)))
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    def is_constant(self) -> bool:
        return self.degree == 0

    def __call__(self, z):
        """Horner evaluation; broadcasts over the shape of ``z``."""
        z = np.asarray(z, dtype=np.complex128)[..., None]
        acc = np.broadcast_to(self.coeffs[-1], z.shape[:-1] + (self.dim,)).copy()
        for c in self.coeffs[-2::-1]:
            acc = acc * z + c
        return acc

    def derivative(self) -> DiscMap:
        if self.degree == 0:
            return DiscMap(np.zeros((1, self.dim)), self.radius)
        k = np.arange(1, self.degree + 1)[:, None]
        return DiscMap(k * self.coeffs[1:], self.radius)

    def to_json(self) -> dict:
        return {"radius": self.radius,
                "coeffs": [[[float(c.real), float(c.imag)] for c in row] for row in self.coeffs]}

    @classmethod
    def from_json(cls, data: Mapping) -> DiscMap:
        raw = np.asarray(data["coeffs"], dtype=float)
        if raw.ndim != 3 or raw.shape[-1] != 2:
            raise ValueError("coeffs must be nested as [power][coordinate][re, im]")
        return cls(raw[..., 0] + 1j * raw[..., 1], data.get("radius", DEFAULT_RADIUS))


def _check_radius(gamma: DiscMap, z) -> None:
    if np.any(np.abs(z) > gamma.radius):
        raise ValueError(f"|z| exceeds the declared radius {gamma.radius}")


def eval_disc(gamma: DiscMap, z) -> np.ndarray:
    _check_radius(gamma, z)
    return gamma(z)


def disc_derivative_at(gamma: DiscMap, z) -> np.ndarray:
    _check_radius(gamma, z)
    return gamma.derivative()(z)


def random_disc(dim: int, degree: int, rng: np.random.Generator, scale: float = 1.0,
                radius: float = DEFAULT_RADIUS) -> DiscMap:
    shape = (degree + 1, dim)
    c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return DiscMap(scale * c, radius)


class PolySelfMap:
    """Coordinatewise polynomial map K^m -> K^n.

    Each output coordinate is a table ``{exponent tuple: coefficient}``
    with exponent tuples of length m.
    """

    def __init__(self, in_dim: int, tables: Sequence[Mapping[tuple, complex]]):
        self.in_dim = int(in_dim)
        terms = []
        for table in tables:
            row = []
            for exps, coef in table.items():
                exps = tuple(int(e) for e in exps)
                if len(exps) != self.in_dim or min(exps) < 0:
                    raise ValueError(f"bad exponent tuple {exps} for input dimension {self.in_dim}")
                if coef != 0:
                    row.append((exps, complex(coef)))
            terms.append(tuple(sorted(row)))
        self.terms = tuple(terms)

    @property
    def out_dim(self) -> int:
        return len(self.terms)

    @property
    def degree(self) -> int:
        return max((sum(e) for row in self.terms for e, _ in row), default=0)

    @classmethod
    def linear(cls, matrix) -> PolySelfMap:
        a = np.asarray(matrix)
        m = a.shape[1]
        tables = []
        for row in a:
            tables.append({tuple(int(j == i) for j in range(m)): row[i] for i in range(m)})
        return cls(m, tables)

    @classmethod
    def identity(cls, n: int) -> PolySelfMap:
        return cls.linear(np.eye(n))

    def __call__(self, v):
        v = np.asarray(v, dtype=np.complex128)
        if v.shape[-1] != self.in_dim:
            raise ValueError(f"expected input dimension {self.in_dim}")
        out = np.zeros(v.shape[:-1] + (self.out_dim,), dtype=np.complex128)
        for i, row in enumerate(self.terms):
            for exps, coef in row:
                term = np.full(v.shape[:-1], coef, dtype=np.complex128)
                for j, e in enumerate(exps):
                    if e:
                        term = term * v[..., j] ** e
                out[..., i] += term
        return out


def compose_with_poly_map(phi: PolySelfMap, gamma: DiscMap) -> DiscMap:
    """Coefficients of phi o gamma by exact polynomial multiplication."""
    if phi.in_dim != gamma.dim:
        raise ValueError(f"map expects dimension {phi.in_dim}, disc has dimension {gamma.dim}")
    coords = [gamma.coeffs[:, j] for j in range(gamma.dim)]
    powers = {}

    def power(j, e):
        if (j, e) not in powers:
            powers[(j, e)] = np.array([1.0 + 0j]) if e == 0 else np.convolve(power(j, e - 1), coords[j])
        return powers[(j, e)]

    outputs = []
    for row in phi.terms:
        acc = np.zeros(1, dtype=np.complex128)
        for exps, coef in row:
            term = np.array([coef])
            for j, e in enumerate(exps):
                if e:
                    term = np.convolve(term, power(j, e))
            if term.size > acc.size:
                acc = np.concatenate([acc, np.zeros(term.size - acc.size, complex)])
            acc[: term.size] += term
        outputs.append(acc)
    width = max(a.size for a in outputs)
    coeffs = np.zeros((width, phi.out_dim), dtype=np.complex128)
    for i, a in enumerate(outputs):
        coeffs[: a.size, i] = a
    return DiscMap(coeffs, gamma.radius)
