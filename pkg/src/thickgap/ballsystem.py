"""Systems of balls: recursive trees of closed norm balls generating compact sets.

A system is a rooted tree. Every node is a closed ball, children lie inside
their parent, and radii shrink along every infinite path, so the nested
intersections generate a compact set C. Generators:

  corner family     n^d equidistant sub-cubes of relative radius ell/2 per node
  homothetic IFS    node at word (i1..ik) is the composed map image of the root
  1-D gap list      finite binary tree obtained by splitting at listed gaps
  explicit tree     caller-supplied finite node table
  transforms        translate / similarity / inflated smooth-map image of a base

Trees are expanded lazily and memoized; finite generators (gap lists, explicit
tables) terminate in leaves and represent the set at that truncation, meaning
C is the union of the leaf balls.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from .geometry import Ball, NormKind, Point, as_point, ball_contains, balls_disjoint, norm_distance

Word = Tuple[int, ...]

ROOT: Word = ()

_CONTAIN_SLACK = 1e-12  # relative float allowance in validation-only containment


class SpecError(ValueError):
    """Malformed set-spec input."""


def word_str(word: Word) -> str:
    return ".".join(str(i) for i in word)


def parse_word(text: str) -> Word:
    text = text.strip()
    if not text:
        return ()
    return tuple(int(part) for part in text.split("."))


@dataclass(frozen=True)
class HomotheticIFS:
    """Maps x -> lam*x + t with 0 < lam < 1, each sending the unit ball into itself."""

    maps: Tuple[Tuple[float, Point], ...]

    def __post_init__(self) -> None:
        if not self.maps:
            raise ValueError("an IFS needs at least one map")
        fixed = []
        d = None
        for lam, t in self.maps:
            lam = float(lam)
            t = as_point(t)
            if d is None:
                d = len(t)
            elif len(t) != d:
                raise ValueError("all translation parts must share one dimension")
            if not 0 < lam < 1:
                raise ValueError("contraction ratio must lie in (0, 1)")
            fixed.append((lam, t))
        object.__setattr__(self, "maps", tuple(fixed))

    @property
    def dimension(self) -> int:
        return len(self.maps[0][1])


@dataclass(frozen=True)
class CornerFamilyParams:
    """Equidistant corner construction: n cells of relative radius ell/2 per axis."""

    n: int
    ell: float
    d: int

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError("corner family needs n >= 2")
        if not 0 < self.ell < 2 / self.n:
            raise ValueError("ell must lie in (0, 2/n)")
        if self.d < 1:
            raise ValueError("dimension must be >= 1")

    @property
    def g(self) -> float:
        # derived gap; n*ell + (n-1)*g = 2
        return (2 - self.n * self.ell) / (self.n - 1)


@dataclass(frozen=True)
class GapList1D:
    """A closed hull interval and finitely many disjoint open gaps inside it."""

    hull: Tuple[float, float]
    gaps: Tuple[Tuple[float, float], ...]

    def __post_init__(self) -> None:
        a, b = (float(self.hull[0]), float(self.hull[1]))
        if not a < b:
            raise ValueError("hull must be a nondegenerate interval")
        object.__setattr__(self, "hull", (a, b))
        fixed = []
        for lo, hi in self.gaps:
            lo, hi = float(lo), float(hi)
            if not lo < hi:
                raise ValueError(f"zero-length gap ({lo}, {hi})")
            if lo < a or hi > b:
                raise ValueError(f"gap ({lo}, {hi}) escapes the hull")
            fixed.append((lo, hi))
        fixed.sort()
        for (l1, h1), (l2, h2) in zip(fixed, fixed[1:]):
            if l2 < h1:
                raise ValueError(f"overlapping gaps ({l1},{h1}) and ({l2},{h2})")
        object.__setattr__(self, "gaps", tuple(fixed))


@dataclass(frozen=True)
class ExplicitTree:
    """Finite caller-supplied tree; adjacency derived from the word table."""

    nodes: Tuple[Tuple[Word, Ball], ...]


@dataclass(frozen=True)
class TransformedSystem:
    kind: str  # translate | similarity | perturbed
    base: "BallSystem"
    shift: Optional[Point] = None
    scale: float = 1.0
    eps: float = 0.0
    fmap: Optional[Callable[[Point], Sequence[float]]] = None


class BallSystem:
    """Lazy, memoized, immutable-after-construction tree of closed balls."""

    def __init__(
        self,
        norm: NormKind,
        dimension: int,
        root: Ball,
        generator,
        max_children: Optional[int],
        decay: Optional[float],
    ) -> None:
        self.norm = norm
        self.dimension = dimension
        self.root = root
        self.generator = generator
        self.max_children = max_children
        self.decay = decay
        self._kids: Dict[Word, Tuple[Ball, ...]] = {}
        self._balls: Dict[Word, Ball] = {ROOT: root}
        self._lock = threading.Lock()
        # finite-tree adjacency, filled by the gap/explicit constructors
        self._finite_children: Optional[Dict[Word, Tuple[Word, ...]]] = None
        self._leaf_intervals: Optional[Tuple[Tuple[float, float], ...]] = None
        self._split_gaps: Optional[Dict[Word, Tuple[float, float]]] = None

    # -- tree access -------------------------------------------------------

    def ball(self, word: Word) -> Ball:
        b = self._balls.get(word)
        if b is not None:
            return b
        parent = self.ball(word[:-1])  # fills caches along the path
        kids = self.children(word[:-1])
        if not 0 <= word[-1] < len(kids):
            raise KeyError(f"no node at word {word}")
        del parent
        return self._balls[word]

    def children(self, word: Word) -> Tuple[Ball, ...]:
        kids = self._kids.get(word)
        if kids is not None:
            return kids
        with self._lock:
            kids = self._kids.get(word)
            if kids is None:
                kids = self._make_children(word)
                for i, child in enumerate(kids):
                    self._balls[word + (i,)] = child
                self._kids[word] = kids
        return kids

    def is_leaf(self, word: Word) -> bool:
        return len(self.children(word)) == 0

    def walk(self, max_depth: int) -> Iterator[Tuple[Word, Ball]]:
        """Depth-first, child-order traversal down to max_depth inclusive."""
        stack: List[Tuple[Word, Ball]] = [(ROOT, self.root)]
        while stack:
            word, ball = stack.pop()
            yield word, ball
            if len(word) < max_depth:
                kids = self.children(word)
                for i in range(len(kids) - 1, -1, -1):
                    stack.append((word + (i,), kids[i]))

    def words_at_depth(self, depth: int) -> Iterator[Word]:
        for word, _ in self.walk(depth):
            if len(word) == depth:
                yield word

    # -- structure queries ---------------------------------------------------

    @property
    def is_finite(self) -> bool:
        return self._finite_children is not None

    def base_generator(self):
        gen = self.generator
        while isinstance(gen, TransformedSystem):
            gen = gen.base.generator
        return gen

    def is_homothetic(self) -> bool:
        """True when every node repeats the root's relative child layout."""
        gen = self.generator
        while isinstance(gen, TransformedSystem):
            if gen.kind == "perturbed":
                return False
            gen = gen.base.generator
        return isinstance(gen, (CornerFamilyParams, HomotheticIFS))

    def child_ratios(self) -> Optional[Tuple[float, ...]]:
        """Child/parent radius ratios, identical at every node, if the system has them."""
        # transforms rescale every radius by one factor, so ratios pass through
        gen = self.base_generator()
        if isinstance(gen, CornerFamilyParams):
            return (gen.ell / 2,) * (gen.n**gen.d)
        if isinstance(gen, HomotheticIFS):
            return tuple(lam for lam, _ in gen.maps)
        return None

    def uniform_level_ratio(self) -> Optional[float]:
        ratios = self.child_ratios()
        if ratios is None:
            return None
        if max(ratios) - min(ratios) > 1e-15:
            return None
        return ratios[0]

    def corner_axes(self) -> Optional[Tuple["CornerAxis", ...]]:
        """Per-axis 1-D corner descriptions when the system is an axis-aligned
        affine image of a corner family under the Linf norm, else None."""
        if self.norm is not NormKind.LINF:
            return None
        # accumulate outermost-first: acc(y) = scale*y + shift applied on top
        # of the transforms still to be visited
        scale = 1.0
        shift = [0.0] * self.dimension
        gen = self.generator
        while isinstance(gen, TransformedSystem):
            if gen.kind == "translate":
                shift = [s + scale * v for s, v in zip(shift, gen.shift)]
            elif gen.kind == "similarity":
                shift = [s + scale * w for s, w in zip(shift, gen.shift)]
                scale = scale * gen.scale
            else:
                return None
            gen = gen.base.generator
        if not isinstance(gen, CornerFamilyParams):
            return None
        return tuple(
            CornerAxis(gen.n, gen.ell, offset=shift[i], scale=scale)
            for i in range(self.dimension)
        )

    def siblings_disjoint_at_root(self) -> bool:
        kids = self.children(ROOT)
        return all(
            balls_disjoint(kids[i], kids[j], self.norm)
            for i in range(len(kids))
            for j in range(i + 1, len(kids))
        )

    def leaf_intervals(self) -> Tuple[Tuple[float, float], ...]:
        """Sorted closed intervals whose union is C, for finite 1-D systems."""
        if self._leaf_intervals is not None:
            return self._leaf_intervals
        if not (self.is_finite and self.dimension == 1):
            raise ValueError("leaf intervals exist only for finite 1-D systems")
        leaves = []
        stack = [ROOT]
        while stack:
            w = stack.pop()
            kids = self._finite_children.get(w, ())
            if kids:
                stack.extend(kids)
            else:
                b = self.ball(w)
                leaves.append((b.center[0] - b.radius, b.center[0] + b.radius))
        leaves.sort()
        self._leaf_intervals = tuple(leaves)
        return self._leaf_intervals

    def split_gap(self, word: Word) -> Optional[Tuple[float, float]]:
        """The gap a finite 1-D node splits at, None for leaves."""
        if self._split_gaps is None:
            raise ValueError("split gaps exist only for gap-derived systems")
        return self._split_gaps.get(word)

    # -- expansion ----------------------------------------------------------

    def _make_children(self, word: Word) -> Tuple[Ball, ...]:
        gen = self.generator
        if self._finite_children is not None:
            kid_words = self._finite_children.get(word, ())
            return tuple(self._balls[w] for w in kid_words)
        if isinstance(gen, CornerFamilyParams):
            return self._corner_children(word, gen)
        if isinstance(gen, HomotheticIFS):
            parent = self.ball(word)
            return tuple(
                Ball(
                    tuple(c + parent.radius * t_j for c, t_j in zip(parent.center, t)),
                    parent.radius * lam,
                )
                for lam, t in gen.maps
            )
        if isinstance(gen, TransformedSystem):
            return tuple(self._map_ball(b, gen) for b in gen.base.children(word))
        raise TypeError(f"cannot expand generator {type(gen).__name__}")

    def _corner_children(self, word: Word, gen: CornerFamilyParams) -> Tuple[Ball, ...]:
        parent = self.ball(word)
        rel = _corner_axis_offsets(gen.n, gen.ell)
        out = []
        for k in range(gen.n**gen.d):
            digits = _corner_digits(k, gen.n, gen.d)
            center = tuple(
                c + parent.radius * rel[dig] for c, dig in zip(parent.center, digits)
            )
            out.append(Ball(center, parent.radius * gen.ell / 2))
        return tuple(out)

    @staticmethod
    def _map_ball(b: Ball, t: TransformedSystem) -> Ball:
        if t.kind == "translate":
            return Ball(tuple(c + v for c, v in zip(b.center, t.shift)), b.radius)
        if t.kind == "similarity":
            return Ball(
                tuple(t.scale * c + w for c, w in zip(b.center, t.shift)),
                t.scale * b.radius,
            )
        if t.kind == "perturbed":
            img = as_point(t.fmap(b.center))
            if len(img) != len(b.center):
                raise ValueError("perturbation map changed the dimension")
            return Ball(img, (1 + t.eps) * b.radius)
        raise ValueError(f"unknown transform kind {t.kind}")

    # -- validation ---------------------------------------------------------

    def validate(self, depth: int) -> None:
        """Hard-errors unless every expanded child sits inside its parent and
        radii decay by the recorded factor along paths."""
        for word, ball in self.walk(depth):
            if len(word) >= depth:
                continue
            for i, child in enumerate(self.children(word)):
                slack = _CONTAIN_SLACK * ball.radius
                d = norm_distance(ball.center, child.center, self.norm)
                if d + child.radius > ball.radius + slack:
                    raise ValueError(
                        f"child {word + (i,)} escapes its parent by "
                        f"{d + child.radius - ball.radius:.3e}"
                    )
                if self.decay is not None and child.radius > ball.radius * (
                    self.decay + _CONTAIN_SLACK
                ):
                    raise ValueError(f"radius decay violated at {word + (i,)}")


@dataclass(frozen=True)
class CornerAxis:
    """One axis of an axis-aligned corner product: offset + scale * K(n, ell)."""

    n: int
    ell: float
    offset: float
    scale: float

    @property
    def g(self) -> float:
        return (2 - self.n * self.ell) / (self.n - 1)


def _corner_axis_offsets(n: int, ell: float) -> Tuple[float, ...]:
    g = (2 - n * ell) / (n - 1)
    return tuple(-1 + ell / 2 + k * (ell + g) for k in range(n))


def _corner_digits(k: int, n: int, d: int) -> Tuple[int, ...]:
    return tuple((k // n**i) % n for i in range(d))


def corner_child_index(digits: Sequence[int], n: int) -> int:
    return sum(dig * n**i for i, dig in enumerate(digits))


# -- constructors ------------------------------------------------------------


def corner_family(params: CornerFamilyParams) -> BallSystem:
    """Axis-aligned corner construction on the unit cube; Linf by design."""
    root = Ball((0.0,) * params.d, 1.0)
    return BallSystem(
        norm=NormKind.LINF,
        dimension=params.d,
        root=root,
        generator=params,
        max_children=params.n**params.d,
        decay=params.ell / 2,
    )


def from_ifs(ifs: HomotheticIFS, norm: NormKind) -> BallSystem:
    """System whose node at word (i1..ik) is the composed map image of the unit ball."""
    d = ifs.dimension
    for lam, t in ifs.maps:
        reach = norm_distance(t, (0.0,) * d, norm) + lam
        if reach > 1 + _CONTAIN_SLACK:
            raise ValueError(
                f"map (lam={lam}, t={t}) escapes the unit ball by {reach - 1:.3e}"
            )
    return BallSystem(
        norm=norm,
        dimension=d,
        root=Ball((0.0,) * d, 1.0),
        generator=ifs,
        max_children=len(ifs.maps),
        decay=max(lam for lam, _ in ifs.maps),
    )


def from_gaps_1d(gl: GapList1D, norm: NormKind = NormKind.LINF) -> BallSystem:
    """Finite binary tree: each node splits at the largest listed gap it contains,
    longest first and leftmost on ties; gapless nodes are leaves."""

    def interval_ball(a: float, b: float) -> Ball:
        if not b > a:
            raise ValueError(
                f"gap arrangement produces a degenerate piece [{a}, {b}]"
            )
        return Ball(((a + b) / 2,), (b - a) / 2)

    order = sorted(gl.gaps, key=lambda g: (-(g[1] - g[0]), g[0]))
    children: Dict[Word, Tuple[Word, ...]] = {}
    balls: Dict[Word, Ball] = {}
    split_gaps: Dict[Word, Tuple[float, float]] = {}
    leaf_ivs: List[Tuple[float, float]] = []
    max_ratio = 0.0

    def build(word: Word, a: float, b: float, inside: List[Tuple[float, float]]) -> None:
        nonlocal max_ratio
        balls[word] = interval_ball(a, b)
        if not inside:
            children[word] = ()
            leaf_ivs.append((a, b))
            return
        gap = min(inside, key=lambda g: (-(g[1] - g[0]), g[0]))
        split_gaps[word] = gap
        lo, hi = gap
        left = [g for g in inside if g[1] <= lo]
        right = [g for g in inside if g[0] >= hi]
        if len(left) + len(right) != len(inside) - 1:
            raise ValueError("inconsistent gap containment")  # unreachable for valid input
        children[word] = (word + (0,), word + (1,))
        for piece in ((a, lo), (hi, b)):
            max_ratio = max(max_ratio, (piece[1] - piece[0]) / (b - a))
        build(word + (0,), a, lo, left)
        build(word + (1,), hi, b, right)

    build(ROOT, gl.hull[0], gl.hull[1], list(order))
    sys = BallSystem(
        norm=norm,
        dimension=1,
        root=balls[ROOT],
        generator=gl,
        max_children=2,
        decay=max_ratio if max_ratio > 0 else None,
    )
    sys._balls.update(balls)
    sys._finite_children = children
    sys._split_gaps = split_gaps
    sys._leaf_intervals = tuple(sorted(leaf_ivs))
    return sys


def explicit_tree(
    norm: NormKind, dimension: int, entries: Sequence[Tuple[Word, Ball]]
) -> BallSystem:
    """Finite system from a (word, ball) table; children must be indexed 0..m-1."""
    balls = dict(entries)
    if ROOT not in balls:
        raise ValueError("explicit tree needs a root entry at the empty word")
    children: Dict[Word, List[Word]] = {w: [] for w in balls}
    for w in balls:
        if w == ROOT:
            continue
        parent = w[:-1]
        if parent not in balls:
            raise ValueError(f"node {w} has no parent entry")
        children[parent].append(w)
    fixed: Dict[Word, Tuple[Word, ...]] = {}
    max_children = 0
    max_ratio = 0.0
    for w, kids in children.items():
        kids.sort(key=lambda k: k[-1])
        if [k[-1] for k in kids] != list(range(len(kids))):
            raise ValueError(f"children of {w} are not indexed 0..m-1")
        fixed[w] = tuple(kids)
        max_children = max(max_children, len(kids))
        for k in kids:
            max_ratio = max(max_ratio, balls[k].radius / balls[w].radius)
    sys = BallSystem(
        norm=norm,
        dimension=dimension,
        root=balls[ROOT],
        generator=ExplicitTree(tuple(sorted(balls.items()))),
        max_children=max_children or None,
        decay=max_ratio if 0 < max_ratio < 1 else None,
    )
    sys._balls.update(balls)
    sys._finite_children = fixed
    return sys


def translate(sys: BallSystem, v: Sequence[float]) -> BallSystem:
    v = as_point(v)
    if len(v) != sys.dimension:
        raise ValueError("translation vector dimension mismatch")
    gen = TransformedSystem(kind="translate", base=sys, shift=v)
    root = BallSystem._map_ball(sys.root, gen)
    out = BallSystem(sys.norm, sys.dimension, root, gen, sys.max_children, sys.decay)
    out._finite_children = sys._finite_children
    if sys._finite_children is not None:
        out._balls.update(
            {w: BallSystem._map_ball(b, gen) for w, b in sys._balls.items()}
        )
    return out


def similarity_image(sys: BallSystem, scale: float, shift: Sequence[float]) -> BallSystem:
    if not scale > 0:
        raise ValueError("similarity scale must be positive")
    shift = as_point(shift)
    if len(shift) != sys.dimension:
        raise ValueError("shift dimension mismatch")
    gen = TransformedSystem(kind="similarity", base=sys, shift=shift, scale=float(scale))
    root = BallSystem._map_ball(sys.root, gen)
    out = BallSystem(sys.norm, sys.dimension, root, gen, sys.max_children, sys.decay)
    out._finite_children = sys._finite_children
    if sys._finite_children is not None:
        out._balls.update(
            {w: BallSystem._map_ball(b, gen) for w, b in sys._balls.items()}
        )
    return out


def perturbed_image(
    sys: BallSystem, f: Callable[[Point], Sequence[float]], eps: float
) -> BallSystem:
    """Image system under a near-identity map: centers pushed through f, radii
    inflated by (1+eps). The caller certifies that f moves directions by less
    than eps over the root cube; that bound is what makes the image a valid system."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if sys.norm is not NormKind.LINF:
        raise ValueError("perturbed images are defined for the Linf norm")
    r = sys.root.radius
    if any(abs(c) + r > 1 + _CONTAIN_SLACK for c in sys.root.center):
        raise ValueError("root must sit inside the unit cube")
    gen = TransformedSystem(kind="perturbed", base=sys, eps=float(eps), fmap=f)
    root = BallSystem._map_ball(sys.root, gen)
    return BallSystem(sys.norm, sys.dimension, root, gen, sys.max_children, sys.decay)


# -- classical 1-D gap quantity ----------------------------------------------


def newhouse_thickness(gl: GapList1D) -> float:
    """inf over listed gaps, taken in decreasing length (leftmost on ties), of
    min(left bridge, right bridge) / gap length."""
    intervals = [gl.hull]
    tau = math.inf
    for lo, hi in sorted(gl.gaps, key=lambda g: (-(g[1] - g[0]), g[0])):
        host = None
        for iv in intervals:
            if iv[0] <= lo and hi <= iv[1]:
                host = iv
                break
        if host is None:
            raise ValueError(f"gap ({lo}, {hi}) is not inside a remaining interval")
        left = lo - host[0]
        right = host[1] - hi
        tau = min(tau, min(left, right) / (hi - lo))
        intervals.remove(host)
        intervals.extend([(host[0], lo), (hi, host[1])])
    return tau


# -- JSON set-spec ------------------------------------------------------------

_NORMS = {"linf": NormKind.LINF, "l2": NormKind.L2, "l1": NormKind.L1}


def parse_set_spec(obj: dict) -> BallSystem:
    """Build a system from the JSON set-spec wire format."""
    if not isinstance(obj, dict):
        raise SpecError("set-spec must be a JSON object")
    try:
        norm_tag = obj["norm"]
        dimension = obj["dimension"]
        gen = obj["generator"]
    except (KeyError, TypeError) as exc:
        raise SpecError(f"missing set-spec field: {exc}") from exc
    if norm_tag not in _NORMS:
        raise SpecError(f"unknown norm {norm_tag!r}")
    norm = _NORMS[norm_tag]
    if not isinstance(dimension, int) or dimension < 1:
        raise SpecError("dimension must be a positive integer")
    if not isinstance(gen, dict) or "type" not in gen:
        raise SpecError("generator must be an object with a type")
    kind = gen["type"]
    try:
        if kind == "corner":
            if norm is not NormKind.LINF:
                raise SpecError("corner generator requires the linf norm")
            return corner_family(
                CornerFamilyParams(n=int(gen["n"]), ell=float(gen["ell"]), d=dimension)
            )
        if kind == "ifs":
            maps = tuple(
                (float(m["lambda"]), tuple(float(x) for x in m["t"]))
                for m in gen["maps"]
            )
            ifs = HomotheticIFS(maps)
            if ifs.dimension != dimension:
                raise SpecError("ifs map dimension disagrees with the spec dimension")
            return from_ifs(ifs, norm)
        if kind == "gaps1d":
            if dimension != 1:
                raise SpecError("gaps1d requires dimension 1")
            hull = tuple(float(x) for x in gen["hull"])
            gaps = tuple((float(a), float(b)) for a, b in gen["gaps"])
            return from_gaps_1d(GapList1D(hull=hull, gaps=gaps), norm)
    except SpecError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"invalid {kind} generator: {exc}") from exc
    raise SpecError(f"unknown generator type {kind!r}")
