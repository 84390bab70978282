"""Mean-value gaps on segments and discs, Jensen checks and supporting minorants."""

from __future__ import annotations

import dataclasses
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .maps import DiscMap, PolySelfMap, SegmentMap
from .spaces import NormedSpace, lp_space, random_unit_vector

DEFAULT_NODES = 512
EPS_EQ = 1e-9

_SCALAR = lp_space(1, 1, "complex")


# -- reshaping maps ---------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class ConvexReshaper:
    """Increasing convex map psi used to reshape a norm or a log-norm.

    ``square`` is t -> t^2 on [0, inf); ``exp2`` is t -> exp(2t) on
    R u {-inf} with exp2(-inf) = 0; ``affine`` is t -> slope*t + intercept.
    """

    kind: str
    slope: float = 1.0
    intercept: float = 0.0

    def __post_init__(self):
        if self.kind not in ("square", "exp2", "affine"):
            raise ValueError(f"unknown reshaper {self.kind!r}")
        if self.kind == "affine" and self.slope < 0:
            raise ValueError("reshapers are increasing; slope must be >= 0")

    @property
    def strict(self) -> bool:
        return self.kind != "affine"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "square":
            if np.any(t < 0):
                raise ValueError("square reshaper is defined on [0, inf)")
            out = t * t
        elif self.kind == "exp2":
            out = np.exp(2 * t)
        elif self.slope == 0:
            out = np.full_like(t, self.intercept)
        else:
            out = self.slope * t + self.intercept
        return float(out) if out.ndim == 0 else out


SQUARE = ConvexReshaper("square")
EXP2 = ConvexReshaper("exp2")


# -- scalar functions -------------------------------------------------------

class ScalarFunction:
    """Vectorised evaluation oracle V -> R u {-inf}.

    ``fn`` maps an array of shape (..., n) to shape (...).
    """

    def __init__(self, tag: str, fn: Callable[[np.ndarray], np.ndarray], **params):
        self.tag = tag
        self.params = params
        self._fn = fn

    def __call__(self, v):
        out = np.asarray(self._fn(np.asarray(v)), dtype=float)
        return float(out) if out.ndim == 0 else out

    def __repr__(self):
        return f"ScalarFunction({self.tag})"


def norm_function(space: NormedSpace) -> ScalarFunction:
    return ScalarFunction("norm", space.norms, space=space)


def log_norm(space: NormedSpace) -> ScalarFunction:
    def fn(v):
        with np.errstate(divide="ignore"):
            return np.log(space.norms(v))
    return ScalarFunction("log_norm", fn, space=space)


def norm_power(space: NormedSpace, p: float) -> ScalarFunction:
    return ScalarFunction("norm_power", lambda v: space.norms(v) ** p, space=space, p=p)


def reshaped(psi: ConvexReshaper, inner: ScalarFunction) -> ScalarFunction:
    return ScalarFunction("reshaped", lambda v: psi(inner(v)), psi=psi, inner=inner)


def sq_modulus_poly(poly: PolySelfMap) -> ScalarFunction:
    """v -> |P(v)|^2 for a scalar polynomial P."""
    if poly.out_dim != 1:
        raise ValueError("sq_modulus_poly needs a scalar-valued polynomial")
    return ScalarFunction("sq_modulus_poly", lambda v: np.abs(poly(v)[..., 0]) ** 2, poly=poly)


def pullback(f: ScalarFunction, phi: PolySelfMap) -> ScalarFunction:
    return ScalarFunction("pullback", lambda v: f(phi(v)), f=f, phi=phi)


def projection(f: ScalarFunction, indices: Sequence[int]) -> ScalarFunction:
    idx = list(indices)
    return ScalarFunction("projection", lambda v: f(v[..., idx]), f=f, indices=tuple(idx))


def real_part(index: int = 0) -> ScalarFunction:
    return ScalarFunction("real_part", lambda v: np.real(v[..., index]), index=index)


def affine_function(linear, constant: float = 0.0) -> ScalarFunction:
    """x -> <linear, Re x> + constant (a real-affine function)."""
    a = np.asarray(linear, dtype=float)
    return ScalarFunction("affine", lambda v: np.real(v) @ a + constant,
                          linear=a, constant=constant)


def real_pullback(f_real: ScalarFunction) -> ScalarFunction:
    """f = f_real o Re on C^n, i.e. composition with the conjugation-fixed projection."""
    return ScalarFunction("real_pullback", lambda v: f_real(np.real(v)), f_real=f_real)


# -- quadrature -------------------------------------------------------------

def circle_nodes(nodes: int) -> np.ndarray:
    if nodes < 16 or nodes & (nodes - 1):
        raise ValueError(f"nodes must be a power of two >= 16, got {nodes}")
    return np.exp(2j * np.pi * np.arange(nodes) / nodes)


class CircleMean(NamedTuple):
    value: float
    singular: bool
    singular_nodes: int


def circle_quadrature(f: ScalarFunction, gamma: DiscMap, nodes: int = DEFAULT_NODES) -> CircleMean:
    """Trapezoid rule for (1/2pi) int f(gamma(e^{it})) dt.

    A node where f is -inf makes the mean -inf and sets ``singular``.
    """
    vals = np.atleast_1d(f(gamma(circle_nodes(nodes))))
    bad = int(np.count_nonzero(np.isneginf(vals)))
    if bad:
        return CircleMean(-np.inf, True, bad)
    return CircleMean(float(vals.mean()), False, 0)


def circle_mean(f: ScalarFunction, gamma: DiscMap, nodes: int = DEFAULT_NODES) -> float:
    return circle_quadrature(f, gamma, nodes).value


def midpoint_gap(f: ScalarFunction, gamma: SegmentMap) -> float:
    if not isinstance(gamma, SegmentMap):
        raise ValueError("midpoint_gap needs a segment in a real space")
    lo, mid, hi = np.atleast_1d(f(gamma(np.array([-1.0, 0.0, 1.0]))))
    return float((lo + hi) / 2 - mid)


def psh_gap(f: ScalarFunction, gamma: DiscMap, nodes: int = DEFAULT_NODES) -> float:
    """circle mean minus centre value; -inf when the quadrature hits a singular node."""
    mean = circle_quadrature(f, gamma, nodes)
    if mean.singular:
        return -np.inf
    centre = f(gamma(0.0))
    if centre == -np.inf:
        return np.inf
    return mean.value - float(centre)


def circle_clearance(space: NormedSpace, gamma: DiscMap, samples: int = 4096) -> float:
    """min over the circle of ||gamma||, relative to the total coefficient norm.

    Small values flag discs passing close to the origin, where the
    trapezoid rule for log-norms converges slowly.
    """
    total = float(space.norms(gamma.coeffs).sum())
    if total == 0:
        return 0.0
    return float(space.norms(gamma(circle_nodes(samples))).min()) / total


def perturb_disc(gamma: DiscMap, seed, scale: float = 1e-9) -> DiscMap:
    """Shift the constant term by ``scale`` in a random direction."""
    rng = np.random.default_rng(seed)
    d = rng.standard_normal(gamma.dim) + 1j * rng.standard_normal(gamma.dim)
    coeffs = np.array(gamma.coeffs)
    coeffs[0] += scale * d / np.linalg.norm(d)
    return DiscMap(coeffs, gamma.radius)


def robust_psh_gap(f: ScalarFunction, gamma: DiscMap, nodes: int = DEFAULT_NODES,
                   seed: int = 0, attempts: int = 8) -> float:
    """psh_gap, perturbing gamma by 1e-9 and retrying while a node is singular."""
    g = gamma
    for k in range(attempts):
        if not circle_quadrature(f, g, nodes).singular:
            return psh_gap(f, g, nodes)
        g = perturb_disc(gamma, (seed, k))
    return -np.inf


# -- Jensen ---------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class ZeroProfile:
    """Zeros of a scalar disc map inside the open unit disc, with multiplicities."""

    zeros: tuple[complex, ...] = ()
    multiplicities: tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.zeros) != len(self.multiplicities):
            raise ValueError("one multiplicity per zero")
        if any(m < 1 for m in self.multiplicities):
            raise ValueError("multiplicities must be positive")

    @classmethod
    def simple(cls, zeros: Sequence[complex]) -> ZeroProfile:
        return cls(tuple(complex(z) for z in zeros), (1,) * len(zeros))

    def count_below(self, r: float) -> int:
        """N(r): number of zeros of modulus < r, with multiplicity."""
        return sum(m for z, m in zip(self.zeros, self.multiplicities) if abs(z) < r)

    def validate(self, gamma: DiscMap) -> None:
        tol = 1e-9 * (1 + np.abs(gamma.coeffs).max())
        for z in self.zeros:
            if abs(z) >= 1:
                raise ValueError(f"listed zero {z} does not lie in the open unit disc")
            if abs(gamma(z)[0]) > tol:
                raise ValueError(f"{z} is not a zero: |gamma(z)| = {abs(gamma(z)[0]):.3e}")


def zero_profile(gamma: DiscMap, cluster: float = 1e-6) -> ZeroProfile:
    """Zeros of a one-dimensional disc map inside the unit disc."""
    if gamma.dim != 1:
        raise ValueError("zero profiles are defined for scalar disc maps")
    if gamma.is_constant():
        return ZeroProfile()
    roots = np.roots(gamma.coeffs[::-1, 0])
    clusters: list[list[complex]] = []
    for r in roots[np.abs(roots) < 1]:
        for members in clusters:
            if abs(members[0] - r) < cluster:
                members.append(complex(r))
                break
        else:
            clusters.append([complex(r)])
    # a root of multiplicity m splits by about eps^(1/m); the cluster mean does not
    zeros = [complex(np.mean(m)) for m in clusters]
    mult = [len(m) for m in clusters]
    profile = ZeroProfile(tuple(zeros), tuple(mult))
    profile.validate(gamma)
    return profile


def jensen_formula_residual(gamma: DiscMap, zeros: ZeroProfile, nodes: int = DEFAULT_NODES) -> float:
    """|log|gamma(0)| - mean log|gamma| + sum m log(1/|a|)| over listed zeros a."""
    if gamma.dim != 1:
        raise ValueError("Jensen's formula needs a scalar disc map")
    centre = abs(gamma(0.0)[0])
    if centre == 0:
        raise ValueError("gamma(0) = 0")
    for z in zeros.zeros:
        if abs(z) >= 1:
            raise ValueError(f"listed zero {z} has modulus >= 1")
    mean = circle_quadrature(log_norm(_SCALAR), gamma, nodes)
    if mean.singular:
        raise ValueError("gamma vanishes at a quadrature node on the unit circle")
    counting = sum(m * -np.log(abs(z)) for z, m in zip(zeros.zeros, zeros.multiplicities))
    return float(abs(np.log(centre) - mean.value + counting))


class JensenCheck(NamedTuple):
    lhs: float
    rhs: float
    gap: float


def _probability(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
        raise ValueError("weights must be a probability vector")
    return w


def jensen_vector_check(f: ScalarFunction, weights, points) -> JensenCheck:
    """f(sum w_i x_i) against sum w_i f(x_i)."""
    w = _probability(weights)
    x = np.asarray(points)
    lhs = float(f(w @ x))
    rhs = float(w @ np.atleast_1d(f(x)))
    return JensenCheck(lhs, rhs, rhs - lhs)


class ExtendedJensenCheck(NamedTuple):
    lhs: float
    rhs: float
    gap: float
    constant: bool | None


def jensen_extended_check(values, weights, psi: ConvexReshaper) -> ExtendedJensenCheck:
    """Jensen's inequality for psi on R u {-inf}.

    ``constant`` is the truth of "equality with both sides finite implies
    the values are all equal"; it is None when both sides are -inf.
    """
    w = _probability(weights)
    v = np.asarray(values, dtype=float)
    keep = w > 0
    w, v = w[keep], v[keep]
    m = -np.inf if np.any(np.isneginf(v)) else float(w @ v)
    lhs = float(psi(m))
    rhs = float(w @ np.asarray(psi(v), dtype=float))
    if lhs == -np.inf and rhs == -np.inf:
        return ExtendedJensenCheck(lhs, rhs, np.nan, None)
    gap = rhs - lhs
    if gap <= 1e-10 and np.isfinite(lhs) and np.isfinite(rhs):
        all_neg_inf = bool(np.all(np.isneginf(v)))
        finite = np.all(np.isfinite(v))
        equal = all_neg_inf or (finite and float(v.max() - v.min()) <= 1e-8)
        return ExtendedJensenCheck(lhs, rhs, gap, bool(equal))
    return ExtendedJensenCheck(lhs, rhs, gap, True)


# -- supporting affine minorant --------------------------------------------

@dataclasses.dataclass(frozen=True, eq=False)
class AffineMinorant:
    """alpha(x) = constant + <linear, x>, checked to lie below f."""

    linear: np.ndarray
    constant: float
    touch: np.ndarray
    valid: bool
    max_excess: float
    kink: bool

    def __call__(self, x):
        return np.asarray(x, dtype=float) @ self.linear + self.constant


def supporting_affine(f: ScalarFunction, x0, space: NormedSpace, h: float = 1e-5,
                      radius: float = 4.0, samples: int = 1000, seed: int = 0,
                      tol: float = 1e-8) -> AffineMinorant:
    """Affine minorant touching f at x0, from a central-difference gradient.

    ``valid`` is False when alpha exceeds f by more than ``tol`` somewhere in
    the ball of the given radius; ``kink`` flags one-sided differences that
    disagree, i.e. a non-smooth point.
    """
    if space.is_complex:
        raise ValueError("supporting minorants are computed on real spaces")
    x0 = np.asarray(x0, dtype=float)
    f0 = float(f(x0))
    if not np.isfinite(f0):
        raise ValueError("f must be finite at x0")
    eye = np.eye(x0.size) * h
    fp = np.atleast_1d(f(x0 + eye))
    fm = np.atleast_1d(f(x0 - eye))
    g = (fp - fm) / (2 * h)
    kink = bool(np.any(np.abs((fp - f0) / h - (f0 - fm) / h) > 1e-3 * (1 + np.abs(g))))
    constant = f0 - float(g @ x0)

    rng = np.random.default_rng(seed)
    pts = np.array([random_unit_vector(space, rng) for _ in range(samples)])
    pts = x0 + pts * (radius * rng.uniform(size=(samples, 1)) ** (1 / x0.size))
    excess = pts @ g + constant - np.atleast_1d(f(pts))
    max_excess = float(max(excess.max(), abs(g @ x0 + constant - f0)))
    return AffineMinorant(g, constant, x0, max_excess <= tol, max_excess, kink)
