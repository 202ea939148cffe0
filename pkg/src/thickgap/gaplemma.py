"""Intersection criterion for two ball systems, with constructive witnesses.

check_hypotheses certifies the four sufficient conditions (thickness
product, overlap of the shrunken roots, root radius comparability, and
uniform denseness). intersect then runs the inductive construction those
conditions power: it maintains a point of one set deep inside a shrunken
ball of the other, alternating or repeating sides, with ball radii
contracting by a factor of r each step. The certificate it returns is
re-checkable from scratch: a witness point together with certified
distance enclosures to both sets and the full step trace.

directional_distance_certificate applies the same machinery to a set and
its own translate to certify one realized distance in a given direction.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .ballsystem import ROOT, BallSystem, Word, translate
from .geometry import (
    Ball,
    IntervalBound,
    NormKind,
    Point,
    ball_contains,
    ball_scale,
    norm_distance,
)
from .metrics import DensenessReport, denseness_check, dist_to_set, hole_radius, thickness

_FIND_BUDGET = 100_000
_SLACK = 1e-12


@dataclass(frozen=True)
class TauHypothesis:
    status: str
    lhs: IntervalBound
    rhs: float


@dataclass(frozen=True)
class MeetHypothesis:
    status: str
    word: Optional[Word] = None


@dataclass(frozen=True)
class RadiiHypothesis:
    status: str
    first_vs_second: bool
    second_vs_first: bool


@dataclass(frozen=True)
class GapHypothesesReport:
    r: float
    hyp_tau: TauHypothesis
    hyp_meet: MeetHypothesis
    hyp_radii: RadiiHypothesis
    hyp_dense: Tuple[DensenessReport, DensenessReport]
    all_proven: bool


@dataclass(frozen=True)
class TraceStep:
    step: int
    side: int
    word: Word
    radius: float
    case: str


@dataclass(frozen=True)
class IntersectionCertificate:
    witness: Point
    residual1: IntervalBound
    residual2: IntervalBound
    trace: Tuple[TraceStep, ...]


@dataclass(frozen=True)
class DirectionalDistanceCertificate:
    v: Point
    t: float
    e1: Point
    e2: Point
    residual: float


def check_hypotheses(
    sys1: BallSystem,
    sys2: BallSystem,
    r: float,
    *,
    depth: int = 5,
    tol: float = 1e-3,
    meet_depth: int = 6,
    grid_step: float = 1e-3,
    dense_depth: int = 3,
) -> GapHypothesesReport:
    """Certify the four sufficient conditions for a nonempty intersection.

    Every sub-check is one-sided sound: "proven" is backed by enclosure
    ends or exact arithmetic, "refuted" by a verified counterexample, and
    anything undecided at the configured depths is "unknown".
    """
    if not 0 < r < 0.5:
        raise ValueError("r must lie in (0, 1/2)")
    if sys1.norm is not sys2.norm:
        raise ValueError("systems must share a norm")
    if sys1.dimension != sys2.dimension:
        raise ValueError("systems must share a dimension")

    rhs = 1.0 / (1.0 - 2 * r) ** 2
    t1 = thickness(sys1, depth, tol)
    t2 = thickness(sys2, depth, tol)
    lhs = IntervalBound(
        t1.overall.lo * t2.overall.lo,
        t1.overall.hi * t2.overall.hi,
        tol,
        t1.overall.converged and t2.overall.converged,
    )
    if lhs.lo >= rhs:
        tau_status = "proven"
    elif lhs.hi < rhs:
        tau_status = "refuted"
    else:
        tau_status = "unknown"
    hyp_tau = TauHypothesis(tau_status, lhs, rhs)

    hyp_meet = _meet_status(sys1, sys2, r, meet_depth)

    ok12 = sys1.root.radius >= r * sys2.root.radius
    ok21 = sys2.root.radius >= r * sys1.root.radius
    hyp_radii = RadiiHypothesis("proven" if ok12 and ok21 else "refuted", ok12, ok21)

    dense1 = denseness_check(sys1, r, grid_step, dense_depth)
    dense2 = denseness_check(sys2, r, grid_step, dense_depth)

    all_proven = (
        tau_status == "proven"
        and hyp_meet.status == "proven"
        and hyp_radii.status == "proven"
        and dense1.verdict == "proven"
        and dense2.verdict == "proven"
    )
    return GapHypothesesReport(r, hyp_tau, hyp_meet, hyp_radii, (dense1, dense2), all_proven)


def _meet_status(sys1: BallSystem, sys2: BallSystem, r: float, meet_depth: int) -> MeetHypothesis:
    """Search for a ball of the first set inside the shrunken root of the second.

    A contained ball proves the overlap; a level on which no ball even
    intersects the target refutes it, since the set lives in that level.
    """
    target = ball_scale(sys2.root, 1.0 - 2 * r)
    norm = sys1.norm
    frontier: List[Word] = [ROOT]
    for _ in range(meet_depth + 1):
        keep: List[Word] = []
        for word in frontier:
            ball = sys1.ball(word)
            if norm_distance(ball.center, target.center, norm) > ball.radius + target.radius:
                continue
            if ball_contains(target, ball, norm):
                return MeetHypothesis("proven", word)
            keep.append(word)
        if not keep:
            return MeetHypothesis("refuted")
        frontier = [w + (j,) for w in keep for j in range(len(sys1.children(w)))]
    return MeetHypothesis("unknown")


def bridge_ball(sk: Ball, sl: Ball, r: float, norm: NormKind) -> Ball:
    """Ball of radius about r * rad(sl) inside both sk and sl.

    Mirrors the constructive claim behind the intersection step: either sk
    already fits in sl, or the centers coincide, or the ball sits at the
    midpoint between the boundary of the shrunken sl and the boundary of
    sl along the line of centers. The radius is backed off by a relative
    1e-13 so the exact containment predicate passes despite rounding.
    """
    if not 0 < r < 0.5:
        raise ValueError("r must lie in (0, 1/2)")
    if sk.radius < r * sl.radius * (1 - _SLACK):
        raise ValueError("sk must have radius at least r * rad(sl)")
    gap = norm_distance(sk.center, sl.center, norm)
    if gap > (1 - 2 * r) * sl.radius + sk.radius + _SLACK * sl.radius:
        raise ValueError("sk must meet the shrunken sl")
    if ball_contains(sl, sk, norm):
        return sk
    radius = r * sl.radius * (1 - 1e-13)
    if gap == 0.0:
        return Ball(sl.center, radius)
    unit = tuple((a - b) / gap for a, b in zip(sk.center, sl.center))
    reach = (1 - r) * sl.radius
    center = tuple(b + reach * u for b, u in zip(sl.center, unit))
    out = Ball(center, radius)
    if not (ball_contains(sl, out, norm) and ball_contains(sk, out, norm)):
        raise ValueError("bridge construction failed its containment check")
    return out


def _locate(sys: BallSystem, target: Ball, tol: float) -> Tuple[Point, Word]:
    """Point of the set inside target, as (deep node center, its word).

    Best-first over how far each node ball sticks out of the target; the
    first fully contained node is descended along one branch until its
    radius drops to tol, so the returned center is within tol of the set.
    """
    norm = sys.norm
    root = sys.root
    heap: List[Tuple[float, int, Word]] = [
        (
            norm_distance(root.center, target.center, norm) + root.radius - target.radius,
            0,
            ROOT,
        )
    ]
    counter = 0
    pops = 0
    while heap:
        pops += 1
        if pops > _FIND_BUDGET:
            break
        _, _, word = heapq.heappop(heap)
        ball = sys.ball(word)
        if ball_contains(target, ball, norm):
            while ball.radius > tol:
                kids = sys.children(word)
                if not kids:
                    break
                j = min(
                    range(len(kids)),
                    key=lambda i: (
                        norm_distance(kids[i].center, target.center, norm),
                        i,
                    ),
                )
                word = word + (j,)
                ball = kids[j]
            return ball.center, word
        for j, kid in enumerate(sys.children(word)):
            if (
                norm_distance(kid.center, target.center, norm)
                <= kid.radius + target.radius
            ):
                counter += 1
                heapq.heappush(
                    heap,
                    (
                        norm_distance(kid.center, target.center, norm)
                        + kid.radius
                        - target.radius,
                        counter,
                        word + (j,),
                    ),
                )
    raise RuntimeError(
        f"no node ball certifiably inside target B[{target.center}, {target.radius}] "
        f"at tolerance {tol}"
    )


def find_point_in(sys: BallSystem, target: Ball, tol: float) -> Point:
    """Point inside target and within tol of the set; raises on exhaustion."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    return _locate(sys, target, tol)[0]


def _hole_hi(sys: BallSystem, word: Word, rel_tol: float = 1e-2) -> IntervalBound:
    rad = sys.ball(word).radius
    return hole_radius(word, sys, max(rel_tol * rad, 1e-12))


def intersect(
    sys1: BallSystem,
    sys2: BallSystem,
    r: float,
    tol: float,
    max_steps: int,
) -> IntersectionCertificate:
    """Construct a common point of the two sets, certified to tolerance tol.

    Runs the inductive two-case loop: each step picks the deepest ball of
    the side holding the current point whose shrinkage still dominates the
    hole radius of the other side's ball, then either pushes the point
    into a child of the other side (large ball case) or hands the point
    over to the other side (small ball case). Ball radii contract by a
    factor of r per step, and the final witness carries distance
    enclosures to both sets at tolerance tol.
    """
    if not 0 < r < 0.5:
        raise ValueError("r must lie in (0, 1/2)")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    systems: Dict[int, BallSystem] = {1: sys1, 2: sys2}
    norm = sys1.norm
    shrink = 1.0 - 2 * r

    # start: a point of the first set inside the shrunken root of the second
    j = 1
    l_word: Word = ROOT
    l_ball = systems[2].root
    target = ball_scale(l_ball, shrink)
    h0 = _hole_hi(systems[2], ROOT)
    delta = tol / 10
    if h0.hi > 0:
        delta = min(delta, h0.hi / 2)
    point, point_word = _locate(systems[1], target, delta)
    trace: List[TraceStep] = [TraceStep(0, 1, ROOT, l_ball.radius, "Init")]

    for step in range(1, max_steps + 1):
        if l_ball.radius <= tol / 4:
            res1 = dist_to_set(point, sys1, tol / 10)
            res2 = dist_to_set(point, sys2, tol / 10)
            if res1.hi <= tol and res2.hi <= tol:
                return IntersectionCertificate(point, res1, res2, tuple(trace))
        side_a = systems[j]
        side_b = systems[3 - j]
        h_l = _hole_hi(side_b, l_word)

        # deepest prefix of the point's word whose shrunken ball still
        # dominates the hole radius of the other side's current ball
        k = 0
        for i in range(len(point_word) + 1):
            if shrink * side_a.ball(point_word[:i]).radius >= h_l.hi:
                k = i
            else:
                break
        k_word = point_word[:k]
        k_ball = side_a.ball(k_word)

        if k_ball.radius >= r * l_ball.radius:
            # large ball case: bridge into a child of the other side
            bridge = bridge_ball(k_ball, l_ball, r, norm)
            kids = side_b.children(l_word)
            min_child = min(kid.radius for kid in kids)
            h_k = _hole_hi(side_a, k_word)
            if not h_k.hi < shrink * min_child:
                raise RuntimeError(
                    f"step {step}: hole bound {h_k.hi:.6g} of the located ball is "
                    f"not below {shrink:.6g} * min child radius {min_child:.6g}"
                )
            child_idx = next(
                (
                    i
                    for i, kid in enumerate(kids)
                    if ball_contains(bridge, kid, norm)
                ),
                None,
            )
            if child_idx is None:
                raise RuntimeError(
                    f"step {step}: no child of word {l_word} fits in the bridge "
                    "ball; the denseness hypothesis fails here"
                )
            child_ball = kids[child_idx]
            if child_ball.radius > r * l_ball.radius * (1 + _SLACK):
                raise RuntimeError(
                    f"step {step}: child radius {child_ball.radius:.6g} exceeds "
                    f"r * rad = {r * l_ball.radius:.6g}"
                )
            next_word = l_word + (child_idx,)
            target = ball_scale(child_ball, shrink)
            margin = shrink * child_ball.radius - h_k.hi
            next_h = _hole_hi(side_b, next_word)
            delta = min(tol / 10, margin / 4)
            if next_h.hi > 0:
                delta = min(delta, next_h.hi / 2)
            point, point_word = _locate(side_a, target, delta)
            l_word, l_ball = next_word, child_ball
            trace.append(TraceStep(step, j, l_word, l_ball.radius, "Case1"))
        else:
            # small ball case: hand the point over to the other side
            if k == 0:
                raise RuntimeError(
                    f"step {step}: root ball smaller than r * rad of the other "
                    "side's ball; radius comparability fails here"
                )
            if (
                norm_distance(k_ball.center, l_ball.center, norm) + k_ball.radius
                > l_ball.radius * (1 + _SLACK)
            ):
                raise RuntimeError(
                    f"step {step}: located ball is not inside the other side's "
                    "ball; the contraction invariant fails here"
                )
            target = ball_scale(k_ball, shrink)
            margin = shrink * k_ball.radius - h_l.hi
            next_h = _hole_hi(side_a, k_word)
            delta = tol / 10
            if margin > 0:
                delta = min(delta, margin / 4)
            if next_h.hi > 0:
                delta = min(delta, next_h.hi / 2)
            point, point_word = _locate(side_b, target, delta)
            j = 3 - j
            l_word, l_ball = k_word, k_ball
            trace.append(TraceStep(step, j, l_word, l_ball.radius, "Case2"))

    raise RuntimeError(
        f"no certified witness after {max_steps} steps; last ball radius "
        f"{l_ball.radius:.6g} vs tolerance {tol:.6g}"
    )


def distance_interval(r: float) -> float:
    """Endpoint a of the guaranteed distance interval [0, a] for unit root radius."""
    if not 0 < r <= 1 / 3:
        raise ValueError("r must lie in (0, 1/3]")
    return 2 * r / (1 - 2 * r)


def directional_distance_certificate(
    sys: BallSystem, v: Point, t: float, tol: float, *, r: float, max_steps: int = 400
) -> DirectionalDistanceCertificate:
    """Certify that distance t is realized between two points of the set along v.

    Builds the translate of the set by t*v, intersects it with the
    original at a finer tolerance, then anchors the witness to a verified
    point e1 of the set; e2 = e1 - t*v is checked against the set as well,
    so the pair realizes the distance t in direction v up to the residual.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if abs(norm_distance(v, (0.0,) * len(v), sys.norm) - 1.0) > _SLACK:
        raise ValueError("v must be a unit vector in the workspace norm")
    limit = distance_interval(r) * sys.root.radius
    if not 0 <= t <= limit * (1 + _SLACK):
        raise ValueError(f"t must lie in [0, {limit:.6g}] for r = {r:.6g}")

    shifted = translate(sys, tuple(t * c for c in v))
    cert = intersect(sys, shifted, r, tol / 8, max_steps)
    x = cert.witness
    e1 = find_point_in(sys, Ball(x, tol / 2), tol / 40)
    e2 = tuple(a - t * c for a, c in zip(e1, v))
    r1 = dist_to_set(e1, sys, tol / 10)
    r2 = dist_to_set(e2, sys, tol / 10)
    gap = norm_distance(tuple(a - b for a, b in zip(e1, e2)), tuple(t * c for c in v), sys.norm)
    residual = max(r1.hi, r2.hi, gap)
    if residual > tol:
        raise RuntimeError(
            f"directional witness residual {residual:.6g} exceeds tolerance {tol:.6g}"
        )
    return DirectionalDistanceCertificate(v, t, e1, e2, residual)
