"""Dimension lower bounds and the natural measure on a ball system.

The closed-form bound depends only on the thickness and the maximum
branching count. The Moran solver and the natural measure implement the
mass-distribution argument behind it: each node splits its mass among
children in proportion to a power of the radius ratios, with the power
chosen so the proportions sum to one.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

from .ballsystem import ROOT, BallSystem, Word
from .geometry import Ball, norm_distance

_BISECT_LO = 1e-9
_BISECT_ITERS = 200


@dataclass(frozen=True)
class MoranSolve:
    """Root of sum(ratios^exponent) = 1 with the achieved residual.

    A single-child ratio list forces exponent 0; degenerate marks that case.
    """

    ratios: Tuple[float, ...]
    d: int
    exponent: float
    residual: float
    degenerate: bool = False


@dataclass(frozen=True)
class NaturalMeasure:
    depth: int
    masses: Dict[Word, float] = field(default_factory=dict)

    def mass(self, word: Word) -> float:
        return self.masses[word]


@dataclass(frozen=True)
class MeasureBoundReport:
    """Sampled check of the mass-of-a-ball inequality."""

    c: float
    beta: float
    samples: int
    violations: int
    worst_ratio: float


def dim_lower_bound(d: int, tau: float, m0: int) -> float:
    """Closed-form Hausdorff dimension lower bound from thickness tau.

    Evaluates d / (1 + log(1 + 1/tau) / log m0) exactly as stated; for
    d >= 2 the value can exceed the Moran exponent of concrete systems,
    so callers comparing the two should surface that caveat.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    if m0 < 2:
        raise ValueError("m0 must be >= 2")
    if d < 1:
        raise ValueError("d must be >= 1")
    return d / (1 + math.log(1 + 1 / tau) / math.log(m0))


def moran_exponent(ratios: Sequence[float], d: int) -> MoranSolve:
    """Solve sum(ratios^s) = 1 for s by bisection; s is the product d*beta."""
    rats = tuple(float(r) for r in ratios)
    if not rats:
        raise ValueError("ratios must be nonempty")
    if any(not 0 < r < 1 for r in rats):
        raise ValueError("ratios must lie in (0, 1)")
    if d < 1:
        raise ValueError("d must be >= 1")
    if len(rats) == 1:
        return MoranSolve(rats, d, 0.0, 0.0, degenerate=True)

    def total(s: float) -> float:
        return math.fsum(r**s for r in rats)

    lo, hi = _BISECT_LO, 64.0 * d
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if total(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    exponent = 0.5 * (lo + hi)
    return MoranSolve(rats, d, exponent, abs(total(exponent) - 1.0))


def natural_measure(sys: BallSystem, depth: int) -> NaturalMeasure:
    """Unit mass at the root, split by per-parent Moran proportions."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    masses: Dict[Word, float] = {ROOT: 1.0}
    cache: Dict[Tuple[float, ...], float] = {}
    frontier: List[Word] = [ROOT]
    for _ in range(depth):
        nxt: List[Word] = []
        for word in frontier:
            kids = sys.children(word)
            if not kids:
                continue
            parent_rad = sys.ball(word).radius
            rats = tuple(k.radius / parent_rad for k in kids)
            if rats not in cache:
                cache[rats] = moran_exponent(rats, sys.dimension).exponent
            s = cache[rats]
            parent_mass = masses[word]
            for j, k in enumerate(kids):
                child = word + (j,)
                masses[child] = parent_mass * rats[j] ** s
                nxt.append(child)
        frontier = nxt
    return NaturalMeasure(depth, masses)


def _verify_separation(sys: BallSystem, c: float) -> None:
    root = sys.root
    kids = sys.children(ROOT)
    slack = 1e-12 * root.radius
    for i in range(len(kids)):
        for j in range(i + 1, len(kids)):
            gap = (
                norm_distance(kids[i].center, kids[j].center, sys.norm)
                - kids[i].radius
                - kids[j].radius
            )
            if gap < c * root.radius - slack:
                raise ValueError(
                    f"separation hypothesis fails at the root: gap {gap:.6g} "
                    f"< c * radius = {c * root.radius:.6g}"
                )


def _mass_in_ball(
    sys: BallSystem,
    word: Word,
    node: Ball,
    mass: float,
    query: Ball,
    cutoff: float,
    depth_left: int,
) -> float:
    dist = norm_distance(node.center, query.center, sys.norm)
    if dist > node.radius + query.radius:
        return 0.0
    if dist + node.radius <= query.radius:
        return mass
    if depth_left == 0 or node.radius <= cutoff:
        return mass
    kids = sys.children(word)
    if not kids:
        return mass
    rats = tuple(k.radius / node.radius for k in kids)
    s = moran_exponent(rats, sys.dimension).exponent
    return math.fsum(
        _mass_in_ball(
            sys, word + (j,), k, mass * rats[j] ** s, query, cutoff, depth_left - 1
        )
        for j, k in enumerate(kids)
    )


def measure_ball_bound_check(
    sys: BallSystem, c: float, beta: float, samples: int, *, seed: int = 0
) -> MeasureBoundReport:
    """Sample balls and test mass(ball) <= (2/c)^(d*beta) * radius^(d*beta).

    The mass of a ball is over-approximated by truncating the tree once
    nodes are much smaller than the ball, so a passing sample is sound.
    Raises if the sibling separation constant c fails at the root.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if not 0 < c:
        raise ValueError("c must be positive")
    if beta <= 0:
        raise ValueError("beta must be positive")
    _verify_separation(sys, c)
    rng = random.Random(seed)
    root = sys.root
    exponent = sys.dimension * beta
    const = (2.0 / c) ** exponent
    violations = 0
    worst = 0.0
    for _ in range(samples):
        center = tuple(
            rc + root.radius * rng.uniform(-1.0, 1.0) for rc in root.center
        )
        radius = root.radius * rng.uniform(0.05, 1.0)
        query = Ball(center, radius)
        mass_ub = _mass_in_ball(
            sys, ROOT, root, 1.0, query, cutoff=radius / 64.0, depth_left=12
        )
        bound = const * radius**exponent
        ratio = mass_ub / bound if bound > 0 else math.inf
        worst = max(worst, ratio)
        if mass_ub > bound * (1 + 1e-9):
            violations += 1
    return MeasureBoundReport(c, beta, samples, violations, worst)
