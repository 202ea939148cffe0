"""Tests for the intersection criterion and its constructive witnesses."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thickgap.ballsystem import (
    CornerFamilyParams,
    GapList1D,
    corner_family,
    explicit_tree,
    from_gaps_1d,
    similarity_image,
    translate,
)
from thickgap.gaplemma import (
    bridge_ball,
    check_hypotheses,
    directional_distance_certificate,
    distance_interval,
    find_point_in,
    intersect,
)
from thickgap.geometry import Ball, NormKind, ball_contains, ball_scale, norm_distance
from thickgap.metrics import dist_to_set

R_BENCH = 0.19556


def bench_pair():
    s1 = corner_family(CornerFamilyParams(n=10, ell=0.19, d=2))
    s2 = translate(s1, (0.05, 0.02))
    return s1, s2


# hypothesis checking


def test_hypotheses_proven_on_overlapping_thick_pair():
    s1, s2 = bench_pair()
    rep = check_hypotheses(s1, s2, R_BENCH)
    assert rep.all_proven
    assert rep.r == R_BENCH

    assert rep.hyp_tau.status == "proven"
    assert rep.hyp_tau.rhs == pytest.approx(1.0 / (1.0 - 2 * R_BENCH) ** 2, rel=1e-12)
    # both factors are 17.1, so the product encloses 292.41
    assert rep.hyp_tau.lhs.lo > 292.0
    assert rep.hyp_tau.lhs.hi < 292.9
    assert rep.hyp_tau.lhs.lo >= rep.hyp_tau.rhs

    assert rep.hyp_meet.status == "proven"
    assert rep.hyp_meet.word is not None
    named = s1.ball(rep.hyp_meet.word)
    target = ball_scale(s2.root, 1.0 - 2 * R_BENCH)
    assert ball_contains(target, named, NormKind.LINF)

    assert rep.hyp_radii.status == "proven"
    assert rep.hyp_radii.first_vs_second and rep.hyp_radii.second_vs_first
    assert rep.hyp_dense[0].verdict == "proven"
    assert rep.hyp_dense[1].verdict == "proven"


def test_hypotheses_refuted_on_thin_pair():
    mid3 = corner_family(CornerFamilyParams(n=2, ell=2 / 3, d=1))
    rep = check_hypotheses(mid3, mid3, 0.4)
    assert not rep.all_proven
    assert rep.hyp_tau.status == "refuted"
    # thickness 1 on each side against a large right hand side
    assert rep.hyp_tau.lhs.hi < rep.hyp_tau.rhs
    assert rep.hyp_tau.rhs == pytest.approx(25.0, rel=1e-12)


def test_hypotheses_meet_refuted_when_far_apart():
    s1, _ = bench_pair()
    far = translate(s1, (10.0, 0.0))
    rep = check_hypotheses(s1, far, R_BENCH)
    assert rep.hyp_meet.status == "refuted"
    assert rep.hyp_meet.word is None
    assert not rep.all_proven


def test_hypotheses_validation():
    s1, s2 = bench_pair()
    with pytest.raises(ValueError):
        check_hypotheses(s1, s2, 0.0)
    with pytest.raises(ValueError):
        check_hypotheses(s1, s2, 0.5)
    l2_tree = explicit_tree(NormKind.L2, 2, [((), Ball((0.0, 0.0), 1.0))])
    with pytest.raises(ValueError):
        check_hypotheses(s1, l2_tree, 0.2)
    one_d = corner_family(CornerFamilyParams(n=10, ell=0.19, d=1))
    with pytest.raises(ValueError):
        check_hypotheses(s1, one_d, 0.2)


# bridge construction


def test_bridge_returns_inner_ball_when_contained():
    sk = Ball((0.1,), 0.3)
    sl = Ball((0.0,), 1.0)
    out = bridge_ball(sk, sl, 0.25, NormKind.LINF)
    assert out is sk


def test_bridge_concentric_when_centers_coincide():
    sk = Ball((0.0,), 1.5)
    sl = Ball((0.0,), 1.0)
    out = bridge_ball(sk, sl, 0.25, NormKind.LINF)
    assert out.center == sl.center
    assert out.radius == pytest.approx(0.25, rel=1e-12)
    assert out.radius >= 0.25 * sl.radius - 1e-12
    assert ball_contains(sl, out, NormKind.LINF)
    assert ball_contains(sk, out, NormKind.LINF)


def test_bridge_offset_example():
    sk = Ball((1.1, 0.0), 0.6)
    sl = Ball((0.0, 0.0), 1.0)
    out = bridge_ball(sk, sl, 0.25, NormKind.LINF)
    assert out.center[0] == pytest.approx(0.75, rel=1e-12)
    assert out.center[1] == pytest.approx(0.0, abs=1e-15)
    assert out.radius == pytest.approx(0.25, rel=1e-12)
    assert out.radius >= 0.25 * sl.radius - 1e-12
    assert ball_contains(sl, out, NormKind.LINF)
    assert ball_contains(sk, out, NormKind.LINF)


def test_bridge_validation():
    sl = Ball((0.0,), 1.0)
    with pytest.raises(ValueError):
        bridge_ball(Ball((0.0,), 0.1), sl, 0.25, NormKind.LINF)
    with pytest.raises(ValueError):
        bridge_ball(Ball((2.0,), 0.3), sl, 0.25, NormKind.LINF)
    with pytest.raises(ValueError):
        bridge_ball(Ball((0.0,), 0.5), sl, 0.6, NormKind.LINF)


@settings(max_examples=40, deadline=None)
@given(
    d=st.sampled_from([1, 2]),
    rad_l=st.floats(0.5, 2.0),
    r=st.floats(0.05, 0.45),
    size=st.floats(1.02, 2.0),
    frac=st.floats(0.0, 0.98),
    angle=st.floats(0.0, 2 * math.pi),
)
def test_bridge_contains_both_and_keeps_radius(d, rad_l, r, size, frac, angle):
    rad_k = size * r * rad_l
    gap = frac * ((1 - 2 * r) * rad_l + rad_k)
    if d == 1:
        direction = (1.0,) if angle < math.pi else (-1.0,)
    else:
        raw = (math.cos(angle), math.sin(angle))
        scale = max(abs(raw[0]), abs(raw[1]))
        direction = (raw[0] / scale, raw[1] / scale)
    center_l = (0.0,) * d
    center_k = tuple(gap * u for u in direction)
    out = bridge_ball(Ball(center_k, rad_k), Ball(center_l, rad_l), r, NormKind.LINF)
    assert ball_contains(Ball(center_l, rad_l), out, NormKind.LINF)
    assert ball_contains(Ball(center_k, rad_k), out, NormKind.LINF)
    assert out.radius >= r * rad_l - 1e-12


# point location


def test_find_point_in_root_ball():
    s = corner_family(CornerFamilyParams(n=4, ell=2 / 5, d=1))
    p = find_point_in(s, s.root, 1e-6)
    assert norm_distance(p, s.root.center, NormKind.LINF) <= s.root.radius
    assert dist_to_set(p, s, 1e-7).hi <= 1.2e-6


def test_find_point_in_corner_box_2d():
    s = corner_family(CornerFamilyParams(n=4, ell=2 / 5, d=2))
    target = Ball((-0.8, -0.8), 0.25)
    p = find_point_in(s, target, 1e-6)
    assert norm_distance(p, target.center, NormKind.LINF) <= target.radius
    assert dist_to_set(p, s, 1e-7).hi <= 1.2e-6


def test_find_point_in_gap_exhausts():
    s = from_gaps_1d(GapList1D(hull=(0.0, 1.0), gaps=(((0.4, 0.6)),)))
    with pytest.raises(RuntimeError):
        find_point_in(s, Ball((0.5,), 0.04), 1e-6)
    with pytest.raises(ValueError):
        find_point_in(s, Ball((0.2,), 0.1), 0.0)


# intersection construction


def assert_contracting(trace, r):
    radii = [step.radius for step in trace]
    assert len(radii) >= 2
    for prev, cur in zip(radii, radii[1:]):
        assert cur <= r * prev * (1 + 1e-12)


def test_intersect_overlapping_translates_2d():
    s1, s2 = bench_pair()
    cert = intersect(s1, s2, R_BENCH, 1e-6, 60)
    assert cert.residual1.hi <= 1e-6
    assert cert.residual2.hi <= 1e-6
    # the witness must survive an independent distance query on both sets
    assert dist_to_set(cert.witness, s1, 1e-7).hi <= 1e-6
    assert dist_to_set(cert.witness, s2, 1e-7).hi <= 1e-6
    assert cert.trace[0].case == "Init"
    assert all(step.case in ("Case1", "Case2") for step in cert.trace[1:])
    assert_contracting(cert.trace, R_BENCH)


def test_intersect_identical_systems():
    s1, _ = bench_pair()
    cert = intersect(s1, s1, R_BENCH, 1e-6, 60)
    assert cert.residual1.hi <= 1e-6
    assert cert.residual2.hi <= 1e-6


def test_intersect_translate_1d():
    s1 = corner_family(CornerFamilyParams(n=10, ell=0.19, d=1))
    s2 = translate(s1, (0.03,))
    cert = intersect(s1, s2, R_BENCH, 1e-6, 60)
    assert cert.residual1.hi <= 1e-6
    assert cert.residual2.hi <= 1e-6
    assert_contracting(cert.trace, R_BENCH)


def test_intersect_takes_large_ball_branch_on_scale_mismatch():
    # the second system is a small copy, so the located ball stays large
    # relative to the other side's ball and the bridge branch must fire
    s1 = corner_family(CornerFamilyParams(n=10, ell=0.13, d=1))
    s2 = similarity_image(s1, 0.065 / 0.3, (0.01,))
    rep = check_hypotheses(s1, s2, 0.17)
    assert rep.all_proven
    cert = intersect(s1, s2, 0.17, 1e-6, 80)
    assert cert.residual1.hi <= 1e-6
    assert cert.residual2.hi <= 1e-6
    assert any(step.case == "Case1" for step in cert.trace)
    assert_contracting(cert.trace, 0.17)


def test_intersect_validation_and_step_budget():
    s1, s2 = bench_pair()
    with pytest.raises(ValueError):
        intersect(s1, s2, 0.5, 1e-6, 60)
    with pytest.raises(ValueError):
        intersect(s1, s2, R_BENCH, 0.0, 60)
    with pytest.raises(ValueError):
        intersect(s1, s2, R_BENCH, 1e-6, 0)
    with pytest.raises(RuntimeError):
        intersect(s1, s2, R_BENCH, 1e-6, 1)


# realized distances

def test_distance_interval_values():
    assert distance_interval(0.25) == pytest.approx(1.0, rel=1e-12)
    val = distance_interval(0.19556)
    assert val == pytest.approx(0.6423597424779924, rel=1e-12)
    assert abs(val - 0.64237) < 2e-5
    assert distance_interval(1 / 3) == pytest.approx(2.0, rel=1e-12)
    assert distance_interval(1e-6) == pytest.approx(2e-6, rel=1e-5)


def test_distance_interval_validation():
    with pytest.raises(ValueError):
        distance_interval(0.0)
    with pytest.raises(ValueError):
        distance_interval(0.34)


def test_directional_certificate_2d():
    s = corner_family(CornerFamilyParams(n=10, ell=0.19, d=2))
    v = (1.0, 0.0)
    cert = directional_distance_certificate(s, v, 0.3, 1e-6, r=R_BENCH)
    assert cert.v == v
    assert cert.t == 0.3
    assert cert.residual <= 1e-6
    moved = tuple(a - b for a, b in zip(cert.e1, cert.e2))
    assert norm_distance(moved, (0.3, 0.0), NormKind.LINF) <= cert.residual
    assert dist_to_set(cert.e1, s, 1e-7).hi <= 1e-6
    assert dist_to_set(cert.e2, s, 1e-7).hi <= 1e-6


def test_directional_certificate_zero_distance():
    s = corner_family(CornerFamilyParams(n=10, ell=0.19, d=1))
    cert = directional_distance_certificate(s, (1.0,), 0.0, 1e-6, r=R_BENCH)
    assert cert.e1 == cert.e2
    assert cert.residual <= 1e-6


def test_directional_certificate_validation():
    s = corner_family(CornerFamilyParams(n=10, ell=0.19, d=2))
    with pytest.raises(ValueError):
        directional_distance_certificate(s, (1.0, 0.0), 0.65, 1e-6, r=R_BENCH)
    with pytest.raises(ValueError):
        directional_distance_certificate(s, (2.0, 0.0), 0.1, 1e-6, r=R_BENCH)
    with pytest.raises(ValueError):
        directional_distance_certificate(s, (1.0, 0.0), 0.1, 0.0, r=R_BENCH)
