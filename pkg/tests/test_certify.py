import json

import numpy as np
import pytest

from pshlab import certify
from pshlab.certify import (Verdict, equivalence_crosscheck, flat_disc_search, flat_segment_search,
                            flatness, has_strict_interior_max, pattern_search, replay,
                            strict_verdict, strong_mmp_check)
from pshlab.maps import DiscMap, PolySelfMap, SegmentMap, random_disc
from pshlab.means import (EPS_EQ, affine_function, log_norm, norm_function, norm_power,
                          real_pullback, reshaped, EXP2)
from pshlab.spaces import INF, block_space, lp_space, weighted_lp_space


def test_flatness_grid_sizes():
    assert certify.SEGMENT_GRID.size == 33
    assert certify.DISC_GRID.size == 64 + 32 + 32 + 1


def test_flatness_zero_on_sphere_maps():
    assert flatness(lp_space(1, 2), SegmentMap([0.5, 0.5], [0.5, -0.5])) == 0.0
    assert flatness(lp_space(INF, 2), SegmentMap([1.0, 0.0], [0.0, 1.0])) == 0.0
    # |exp(i theta)| is 1 only up to rounding
    assert flatness(lp_space(INF, 2, "complex"), DiscMap([[1, 0], [0, 1]])) <= 4e-16
    # a chord of the Euclidean circle dips to 1/sqrt(2) at its midpoint
    chord = SegmentMap([0.5, 0.5], [0.5, -0.5])
    assert flatness(lp_space(2, 2), chord) == pytest.approx(1 - np.sqrt(0.5))


def test_pattern_search_minimises_a_quadratic():
    target = np.array([0.3, -1.2, 2.0])
    x, fx = pattern_search(lambda x: ((x - target) ** 2).sum(axis=1), np.zeros(3), iterations=200)
    assert fx < 1e-12
    np.testing.assert_allclose(x, target, atol=1e-6)


@pytest.mark.parametrize("p", [1, INF])
def test_polyhedral_real_planes_have_flat_segments(p):
    v = flat_segment_search(lp_space(p, 2), restarts=10, seed=0)
    assert v.witness_found and v.flatness < 1e-12
    assert not v.witness.is_constant()
    assert replay(lp_space(p, 2), v) <= certify.EPS_FLAT


def test_euclidean_plane_has_no_flat_segment():
    v = flat_segment_search(lp_space(2, 2), restarts=100, seed=0)
    assert v.outcome == "no_witness" and v.flatness > 1e-3
    assert v.witness is None and v.restarts == 100
    # dense grid oracle: every chord of length 2 leaves the circle by >= 1 - sqrt(1 - 1/4) ... at least
    # its midpoint dips below 1, so the best flatness is bounded away from 0
    theta = np.linspace(0, 2 * np.pi, 721)
    best = np.inf
    for a in theta[::6]:
        base = np.array([np.cos(a), np.sin(a)])
        for b in theta[::6]:
            d = np.array([np.cos(b), np.sin(b)])
            vals = np.linalg.norm(base + certify.SEGMENT_GRID[:, None] * d, axis=1)
            best = min(best, np.abs(vals - 1).max())
    assert best > 1e-3


def test_flat_disc_in_complex_linf_plane():
    v = flat_disc_search(lp_space(INF, 2, "complex"), degree_cap=6, restarts=10, seed=0)
    assert v.witness_found and v.flatness < 1e-12
    np.testing.assert_array_equal(v.witness.coeffs, [[1, 0], [0, 1]])


def test_scalar_complex_line_has_no_flat_disc():
    v = flat_disc_search(lp_space(2, 1, "complex"), degree_cap=4, restarts=30, seed=0)
    assert v.outcome == "no_witness" and v.flatness > 1e-3


def test_strict_verdict_examples():
    assert strict_verdict(lp_space(1, 2), "strict_convex", restarts=5).witness_found
    assert strict_verdict(lp_space(INF, 2, "complex"), "strict_psh", restarts=5).witness_found
    v = strict_verdict(lp_space(3, 3), "convex", restarts=20)
    assert v.outcome == "no_witness"


def test_strict_verdict_rejects_mode_field_mismatch():
    with pytest.raises(ValueError):
        strict_verdict(lp_space(2, 2), "psh")
    with pytest.raises(ValueError):
        strict_verdict(lp_space(2, 2, "complex"), "convex")
    with pytest.raises(ValueError):
        strict_verdict(lp_space(2, 2), "holomorphic")
    with pytest.raises(ValueError):
        flat_disc_search(lp_space(2, 2, "complex"), degree_cap=0)


def test_verdicts_are_deterministic():
    sp = weighted_lp_space(3, [1.0, 2.0])
    a = strict_verdict(sp, "convex", restarts=10, seed=5)
    b = strict_verdict(sp, "convex", restarts=10, seed=5)
    assert a.to_json() == b.to_json()
    c = strict_verdict(lp_space(1.5, 2, "complex"), "psh", restarts=4, degree_cap=2, seed=1)
    d = strict_verdict(lp_space(1.5, 2, "complex"), "psh", restarts=4, degree_cap=2, seed=1)
    assert c.to_json() == d.to_json()


def test_verdict_json_round_trip_and_replay():
    sp = lp_space(INF, 2, "complex")
    v = strict_verdict(sp, "psh", restarts=3)
    data = json.loads(json.dumps(v.to_json()))
    assert set(data) >= {"mode", "outcome", "flatness", "witness", "restarts", "degree_cap", "seed"}
    assert data["label"] == "witness"
    back = Verdict.from_json(data)
    assert replay(sp, back) <= certify.EPS_FLAT
    ev = strict_verdict(lp_space(2, 2), "convex", restarts=3)
    assert ev.to_json()["label"] == "evidence" and ev.to_json()["witness"] is None
    with pytest.raises(ValueError):
        replay(lp_space(2, 2), ev)


def test_witness_found_in_hidden_polyhedral_block():
    # an l1 block inside a larger space: lattice probing finds the face segment
    sp = block_space(INF, [lp_space(1, 2)])
    v = strict_verdict(sp, "convex", restarts=5)
    assert v.witness_found and replay(sp, v) <= certify.EPS_FLAT


def test_crosscheck_examples():
    rep = equivalence_crosscheck(lp_space(1, 2), "convex", samples=100, restarts=5)
    assert rep.consistent and rep.witness_found and rep.min_gap <= EPS_EQ
    rep = equivalence_crosscheck(lp_space(2, 2), "convex", samples=100, restarts=20)
    assert rep.consistent and not rep.witness_found and rep.min_gap > 1e-6
    rep = equivalence_crosscheck(lp_space(INF, 2, "complex"), "psh", samples=50, restarts=5)
    assert rep.consistent and rep.witness_found and rep.reshaper == "exp2"
    rep = equivalence_crosscheck(lp_space(2, 2, "complex"), "psh", samples=50, restarts=5,
                                 degree_cap=2)
    assert rep.consistent and not rep.witness_found


def test_strong_mmp_examples():
    assert strong_mmp_check(lp_space(INF, 2, "complex"), DiscMap([[1, 0], [0, 1]])).violation
    assert not strong_mmp_check(lp_space(2, 1, "complex"), DiscMap([0, 1])).violation
    rep = strong_mmp_check(lp_space(1, 3, "complex"), DiscMap([[1, 2j, 3]]))
    assert not rep.violation and not rep.nonconstant


def test_pullback_examples():
    sq = norm_power(lp_space(2, 1), 2)
    f = real_pullback(sq)
    from pshlab.means import psh_gap
    assert psh_gap(f, DiscMap([0, 1]), 512) == pytest.approx(0.5, abs=1e-14)
    assert psh_gap(f, DiscMap([0, 1j]), 512) == pytest.approx(0.5, abs=1e-14)
    rep = certify.pullback_conv_psh_check(affine_function([1.0, -2.0], 3.0), 2, 50)
    assert rep.passed and abs(rep.min_gap) <= 1e-12
    rep = certify.pullback_conv_psh_check(norm_power(lp_space(2, 2), 2), 2, 50, strictly_convex=True)
    assert rep.passed and rep.min_gap_nonconstant > 1e-6


def test_counterexample_examples():
    from pshlab.means import psh_gap
    g, disc = certify.counterexample_map()
    assert psh_gap(g, disc, 512) == 0.0
    assert psh_gap(g, DiscMap([[0, 0], [1, 0]]), 512) == pytest.approx(1.0, abs=1e-14)
    assert psh_gap(g, DiscMap([[1, 2]]), 512) == 0.0
    rep = certify.counterexample_suite(seed=3, samples=200)
    assert rep.passed and rep.min_affine_gap > 0


def test_affine_disc_gap_matches_closed_form():
    # on (a z + b, c z + d): z1^2 + z2 = a^2 z^2 + (2ab + c) z + (b^2 + d)
    g, _ = certify.counterexample_map()
    from pshlab.means import psh_gap
    rng = np.random.default_rng(8)
    for _ in range(20):
        a, b, c, d = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        gap = psh_gap(g, DiscMap([[b, d], [a, c]]), 512)
        assert gap == pytest.approx(abs(a) ** 4 + abs(2 * a * b + c) ** 2, rel=1e-12)


def test_composition_with_injective_linear_map_stays_strict():
    f = norm_power(lp_space(2, 2, "complex"), 2)
    P = PolySelfMap.linear(np.diag([2.0, 0.5j]))
    rng = np.random.default_rng(9)
    for _ in range(50):
        g = random_disc(2, int(rng.integers(1, 4)), rng)
        assert certify.composition_gap(f, P, g) > EPS_EQ


CONVEX_CATALOG = [norm_function(lp_space(p, 2)) for p in (1, 2, 3, INF)]
CONVEX_CATALOG += [norm_power(lp_space(2, 2), 2), affine_function([1.0, -1.0], 2.0)]
PSH_CATALOG = [log_norm(lp_space(p, 2, "complex")) for p in (1, 2, INF)]
PSH_CATALOG += [reshaped(EXP2, log_norm(lp_space(1.5, 2, "complex"))),
                norm_function(lp_space(3, 2, "complex"))]


@pytest.mark.parametrize("f", CONVEX_CATALOG, ids=repr)
def test_no_strict_interior_max_on_segments(f):
    rng = np.random.default_rng(11)
    for _ in range(200):
        assert not has_strict_interior_max(f, SegmentMap(rng.standard_normal(2), rng.standard_normal(2)))


@pytest.mark.parametrize("f", PSH_CATALOG, ids=repr)
def test_no_strict_interior_max_on_discs(f):
    rng = np.random.default_rng(12)
    for _ in range(100):
        assert not has_strict_interior_max(f, random_disc(2, int(rng.integers(1, 4)), rng), nodes=256)


def test_interior_max_detector_fires_on_concave_function():
    concave = norm_function(lp_space(2, 2))
    neg = type(concave)("neg_norm", lambda v: -concave(v))
    assert has_strict_interior_max(neg, SegmentMap([0.0, 0.0], [1.0, 0.0]))
