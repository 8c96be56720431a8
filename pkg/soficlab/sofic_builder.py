"""
Special quasi-actions of graph products, built by induction on the vertex count.

For one vertex the construction is the input quasi-action itself. For n
vertices the carrier is a product of n coordinates, the k-th being
D_k x A_k x V_k where D_k carries the construction for the graph with k
removed, A_k carries the input for vertex k, and V_k is a group with no
short relators whose elements are stored as reduced words.

Every V_k component starts at the empty word. Each map moves that component
by right multiplication with a word that does not depend on it, so agreement
and fixed points can be measured on the "effective" points: tuples of leaf
carrier indices with every word empty.
"""

import itertools
import logging
import math
import threading
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from soficlab.ball_group import EMPTY_WORD, ReducedWord, words_equal_bounded
from soficlab.core_groups import Partition, VertexGroup
from soficlab.errors import (
    BadVertex,
    InputAxiomViolation,
    MissingProvenance,
    RadiusExceeded,
    SchemaError,
    UnregisteredClass,
)
from soficlab.graph_products import (
    GPContext,
    GPElement,
    enumerate_ball,
    is_in_GJ,
    k_normal_form,
    max_right_divisor_in,
)
from soficlab.quasi_actions import ConditionReport, QuasiActionTable, render_key, verify_special
from soficlab.utils import DEFAULT_BUDGET, format_rational, make_rng, spawn_seeds

logger = logging.getLogger(__name__)

EXACT = "exact"
GENERAL = "general"


def f_bound(n: int) -> int:
    """The defect multiplier: f(1) = 1, f(n) = n(n f(n-1) + 1)."""
    if n < 1:
        raise ValueError(f"f is defined for n >= 1, got {n}")
    value = 1
    for m in range(2, n + 1):
        value = m * (m * value + 1)
    return value


def default_radius(N: int) -> int:
    return 2 * N + 4


@dataclass(frozen=True)
class VertexAction:
    """Input for one vertex: its group, a quasi-action table and the finite set F_i."""

    group: VertexGroup
    table: QuasiActionTable
    F: Tuple[int, ...]

    def __post_init__(self):
        F = set(int(g) for g in self.F)
        F.add(self.group.identity)
        object.__setattr__(self, "F", tuple(sorted(F)))


@dataclass(frozen=True)
class CoordinatePoint:
    """A point (d, a, w) of D_k x A_k x V_k; trail and origin record how d was reached."""

    d: Any
    a: int
    w: ReducedWord
    trail: Optional[GPElement] = field(default=None, compare=False, repr=False)
    origin: Any = field(default=None, compare=False, repr=False)


class LeafConstruction:
    """One vertex: the input quasi-action on A_i with the all-related partition."""

    is_leaf = True

    def __init__(self, context: GPContext, vertex: int, action: VertexAction):
        self.context = context
        self.vertex = vertex
        self.vertices = (vertex,)
        self.action = action
        self.relation = Partition.indiscrete(action.table.carrier_size)

    @property
    def carrier(self) -> int:
        return self.action.table.carrier_size

    def act(self, g: GPElement, point: int) -> int:
        if g.is_identity():
            return point
        if g.support != {self.vertex}:
            raise BadVertex(f"{g} is not in the vertex group at {self.vertex}")
        (syllable,) = g.syllables
        return self.action.table.act(syllable.elt, point)

    def related(self, p: int, q: int, J: Iterable[int]) -> bool:
        if self.vertex in J:
            return self.relation.same_class(p, q)
        return p == q

    def related_single(self, p: int, q: int, j: int) -> bool:
        return self.related(p, q, (j,))

    def class_key(self, point: int, J: Iterable[int]):
        return 0 if self.vertex in frozenset(J) else point

    def neighbours(self, point: int, i: int) -> Iterator[int]:
        if i == self.vertex:
            yield from (x for x in range(self.carrier) if x != point)

    def effective_count(self) -> int:
        return self.carrier

    def basepoints(self) -> List[int]:
        return list(range(self.carrier))

    def random_basepoint(self, rng: np.random.Generator) -> int:
        return int(rng.integers(self.carrier))

    def coordinate_structures(self) -> Iterator["CoordinateStructure"]:
        return iter(())


class _LabelRegistry:
    """
    Class labels for general mode: a new point shares the label of the first
    registered point reachable by a bounded breadth-first walk over single
    relation moves, and gets a fresh label otherwise.
    """

    def __init__(self, D, L: FrozenSet[int], budget: int):
        self.D = D
        self.L = sorted(L)
        self.budget = budget
        self.labels: Dict[Any, int] = {}
        self.exhausted = 0
        self.sealed = False
        self._lock = threading.RLock()

    def label(self, d) -> int:
        with self._lock:
            if d in self.labels:
                return self.labels[d]
            if self.sealed:
                raise UnregisteredClass(f"no class label registered for {d!r}")
            found = self._search(d)
            if found is None:
                found = len(set(self.labels.values()))
            self.labels[d] = found
            return found

    def _search(self, d) -> Optional[int]:
        seen = {d}
        queue = deque([d])
        moves = 0
        while queue:
            current = queue.popleft()
            for i in self.L:
                for neighbour in self.D.neighbours(current, i):
                    moves += 1
                    if neighbour in self.labels:
                        return self.labels[neighbour]
                    if neighbour not in seen:
                        seen.add(neighbour)
                        queue.append(neighbour)
                    if moves >= self.budget:
                        self.exhausted += 1
                        return None
        return None


class CoordinateStructure:
    """
    The k-th coordinate C_k = D_k x A_k x V_k of a product construction.

    Args:
        k: the vertex this coordinate is built around
        L: neighbours of k inside the current vertex set
        D: construction for the current vertex set minus k
        action: input quasi-action of vertex k
        R: bound on stored word length. Words are compared at 2R + 2: an
            α-class test appends one letter to each side, so both sides stay
            within R + 1 and V_k is free on all such pairs.
        mode: "exact" or "general" class labelling
        bfs_moves: move budget of general-mode labelling
    """

    def __init__(self, context: GPContext, k: int, L: FrozenSet[int], D, action: VertexAction,
                 R: int, mode: str, bfs_moves: int):
        self.context = context
        self.k = k
        self.L = frozenset(L)
        self.I_k = tuple(D.vertices)
        self.D = D
        self.action = action
        self.R = R
        self.compare_radius = 2 * R + 2
        self.mode = mode
        self._registry = _LabelRegistry(D, self.L, bfs_moves) if mode == GENERAL and self.needs_coset_labels else None

    @property
    def needs_coset_labels(self) -> bool:
        """Whether labels are neither the point itself (L empty) nor a single class (leaf D)."""
        return bool(self.L) and not self.D.is_leaf

    @property
    def carrier(self) -> int:
        return self.action.table.carrier_size

    @property
    def identity(self) -> int:
        return self.action.group.identity

    def label(self, d, trail: Optional[GPElement] = None, origin: Any = None):
        if not self.L:
            return d
        if self.D.is_leaf:
            return 0
        if self.mode == EXACT:
            if trail is None or origin is None:
                raise MissingProvenance(f"exact labelling at vertex {self.k} needs the origin and H-element of {d!r}")
            rest, _ = max_right_divisor_in(trail, self.L)
            return (self.D.class_key(origin, self.L), rest.syllables)
        return self._registry.label(d)

    def u_parts(self, g: GPElement, p: CoordinatePoint):
        """Walk the k-normal form of g from p: returns (u letters, d', a', trail')."""
        form = k_normal_form(g, self.k)
        d, a, trail = p.d, p.a, p.trail
        letters = []
        for x, y in form.blocks:
            if not x.is_identity():
                d = self.D.act(x, d)
                trail = None if trail is None else trail * x
            if y != self.identity:
                label = self.label(d, trail, p.origin)
                moved = self.action.table.act(y, a)
                letters.append(((label, a), -1))
                letters.append(((label, moved), 1))
                a = moved
        return letters, d, a, trail

    def act(self, g: GPElement, p: CoordinatePoint) -> CoordinatePoint:
        letters, d, a, trail = self.u_parts(g, p)
        w = p.w * ReducedWord(tuple(letters))
        if len(w) > self.R:
            raise RadiusExceeded(len(w), self.R)
        return CoordinatePoint(d, a, w, trail, p.origin)

    def words_equal(self, u: ReducedWord, v: ReducedWord) -> bool:
        return words_equal_bounded(u, v, self.compare_radius)

    def alpha_related(self, p: CoordinatePoint, q: CoordinatePoint) -> bool:
        """Same α-class: equal d and w·(π(d), a)⁻¹ equal on both sides."""
        if p.d != q.d:
            return False
        label = self.label(p.d, p.trail, p.origin)
        left = p.w * ReducedWord((((label, p.a), -1),))
        right = q.w * ReducedWord((((label, q.a), -1),))
        return self.words_equal(left, right)

    def related(self, p: CoordinatePoint, q: CoordinatePoint, J: Iterable[int]) -> bool:
        """∼_J for J not containing k, on points of one orbit."""
        J = frozenset(J)
        if self.k in J:
            raise ValueError(f"join over {sorted(J)} contains vertex {self.k}; use alpha_related")
        return p.a == q.a and self.words_equal(p.w, q.w) and self.D.related(p.d, q.d, J)

    def related_single(self, p: CoordinatePoint, q: CoordinatePoint, j: int) -> bool:
        if j == self.k:
            return self.alpha_related(p, q)
        return p.a == q.a and self.words_equal(p.w, q.w) and self.D.related_single(p.d, q.d, j)

    def neighbours(self, p: CoordinatePoint, i: int) -> Iterator[CoordinatePoint]:
        if i == self.k:
            label = self.label(p.d, p.trail, p.origin)
            for b in range(self.carrier):
                if b == p.a:
                    continue
                w = p.w * ReducedWord((((label, p.a), -1), ((label, b), 1)))
                if len(w) <= self.R:
                    yield CoordinatePoint(p.d, b, w, p.trail, p.origin)
        elif i in self.I_k:
            for d in self.D.neighbours(p.d, i):
                yield CoordinatePoint(d, p.a, p.w)

    def effective_count(self) -> int:
        return self.D.effective_count() * self.carrier

    def basepoints(self) -> List[CoordinatePoint]:
        identity = self.context.identity
        return [
            CoordinatePoint(d, a, EMPTY_WORD, identity, d)
            for d in self.D.basepoints()
            for a in range(self.carrier)
        ]

    def random_basepoint(self, rng: np.random.Generator) -> CoordinatePoint:
        d = self.D.random_basepoint(rng)
        return CoordinatePoint(d, int(rng.integers(self.carrier)), EMPTY_WORD, self.context.identity, d)

    def label_budget_exhausted(self) -> int:
        return 0 if self._registry is None else self._registry.exhausted

    def seal(self) -> None:
        if self._registry is not None:
            self._registry.sealed = True


class ProductConstruction:
    """n >= 2 vertices: the product C_1 x ... x C_n acted on coordinatewise."""

    is_leaf = False

    def __init__(self, context: GPContext, vertices: Tuple[int, ...], coordinates: Sequence[CoordinateStructure]):
        self.context = context
        self.vertices = vertices
        self.coordinates = tuple(coordinates)
        self._index = {c.k: i for i, c in enumerate(self.coordinates)}

    def coordinate(self, k: int) -> CoordinateStructure:
        try:
            return self.coordinates[self._index[k]]
        except KeyError:
            raise BadVertex(f"vertex {k} is not a coordinate of this construction") from None

    def act(self, g: GPElement, point: Tuple[CoordinatePoint, ...]) -> Tuple[CoordinatePoint, ...]:
        return tuple(c.act(g, p) for c, p in zip(self.coordinates, point))

    def related(self, p, q, J: Iterable[int]) -> bool:
        """
        ∼_J on two points of one orbit, decided on the coordinate of the
        least vertex outside J.
        """
        J = frozenset(J)
        outside = [v for v in self.vertices if v not in J]
        if not outside:
            return True
        k = min(outside)
        i = self._index[k]
        return self.coordinates[i].related(p[i], q[i], J)

    def related_single(self, p, q, j: int) -> bool:
        return all(c.related_single(x, y, j) for c, x, y in zip(self.coordinates, p, q))

    def class_key(self, point, J: Iterable[int]):
        """
        Identifier of the ∼_J class of a basepoint: two basepoints get equal
        keys exactly when related() holds between them.
        """
        J = frozenset(J)
        outside = [v for v in self.vertices if v not in J]
        if not outside:
            return 0
        i = self._index[min(outside)]
        p = point[i]
        return (p.a, self.coordinates[i].D.class_key(p.d, J))

    def neighbours(self, point, i: int) -> Iterator[tuple]:
        for idx, c in enumerate(self.coordinates):
            for moved in c.neighbours(point[idx], i):
                yield point[:idx] + (moved,) + point[idx + 1:]

    def effective_count(self) -> int:
        return math.prod(c.effective_count() for c in self.coordinates)

    def basepoints(self) -> List[tuple]:
        return list(itertools.product(*(c.basepoints() for c in self.coordinates)))

    def random_basepoint(self, rng: np.random.Generator) -> tuple:
        return tuple(c.random_basepoint(rng) for c in self.coordinates)

    def coordinate_structures(self) -> Iterator[CoordinateStructure]:
        for c in self.coordinates:
            yield c
            if not c.D.is_leaf:
                yield from c.D.coordinate_structures()


def _build(context: GPContext, vertices: Tuple[int, ...], actions: Sequence[VertexAction],
           R: int, mode: str, bfs_moves: int):
    if len(vertices) == 1:
        (v,) = vertices
        return LeafConstruction(context, v, actions[v])
    members = set(vertices)
    coordinates = []
    for k in vertices:
        rest = tuple(v for v in vertices if v != k)
        L = context.graph.neighbors(k) & members
        D = _build(context, rest, actions, R, mode, bfs_moves)
        coordinates.append(CoordinateStructure(context, k, L, D, actions[k], R, mode, bfs_moves))
    return ProductConstruction(context, vertices, coordinates)


@dataclass
class ConstructionOutput:
    context: GPContext
    root: Any
    F: List[GPElement]
    N: int
    radius: int
    eps_in: Fraction
    mode: str
    input_reports: List[ConditionReport]
    budget: Dict[str, Optional[int]]
    seed: int = 0
    workers: int = 1
    _views: Optional[list] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.context.n

    @property
    def bound(self) -> Fraction:
        return f_bound(self.n) * self.eps_in

    @property
    def coordinate_bound(self) -> Fraction:
        """ε'' = (n f(n-1) + 1) ε for each coordinate map; the input itself when n = 1."""
        if self.n == 1:
            return self.eps_in
        return (self.n * f_bound(self.n - 1) + 1) * self.eps_in

    @property
    def labels_heuristic(self) -> bool:
        return self.mode == GENERAL and any(c.needs_coset_labels for c in self.root.coordinate_structures())

    def apply(self, g: GPElement, point):
        return self.root.act(g, point)

    def seal(self) -> None:
        """Freeze general-mode label registries; unseen points then raise UnregisteredClass."""
        for c in self.root.coordinate_structures():
            c.seal()

    def coordinate(self, k: int) -> CoordinateStructure:
        if self.root.is_leaf:
            raise BadVertex("a one-vertex construction has no coordinates")
        return self.root.coordinate(k)


def _input_reports(actions: Sequence[VertexAction]) -> List[ConditionReport]:
    reports = []
    for i, action in enumerate(actions):
        report = verify_special(action.table, action.F, 0, action.group)
        if not report.axioms_hold():
            raise InputAxiomViolation(i, report.to_dict())
        reports.append(report)
    return reports


def build_construction(
    context: GPContext,
    actions: Sequence[VertexAction],
    N: int,
    mode: str = EXACT,
    radius: Optional[int] = None,
    budget: Optional[Mapping[str, Optional[int]]] = None,
    seed: int = 0,
    workers: int = 1,
) -> ConstructionOutput:
    """
    Build the quasi-action of the graph product on the recursive carrier.

    Args:
        context: the graph product
        actions: one VertexAction per vertex
        N: syllable-length bound of F
        mode: "exact" (coset labels from provenance) or "general" (bounded search)
        radius: bound on stored V-words, default 2N+4
        budget: enumeration caps, see soficlab.utils.DEFAULT_BUDGET
        seed: seed for sampled measurement
        workers: threads used by measure_conditions

    Returns:
        ConstructionOutput
    """
    if len(actions) != context.n:
        raise BadVertex(f"{len(actions)} vertex actions for {context.n} vertices")
    if mode not in (EXACT, GENERAL):
        raise SchemaError(f"unknown labelling mode {mode!r}", "/mode")
    budget = {**DEFAULT_BUDGET, **(budget or {})}
    input_reports = _input_reports(actions)
    eps_in = max(r.cond_d_max_defect for r in input_reports)
    R = radius if radius is not None else default_radius(N)
    bfs_moves = budget["bfs_moves"] or 4 * N * context.n

    root = _build(context, tuple(range(context.n)), actions, R, mode, bfs_moves)
    if mode == EXACT and eps_in > 0 and any(c.needs_coset_labels for c in root.coordinate_structures()):
        raise SchemaError(
            f"exact labelling needs genuine input actions but the measured input defect is {format_rational(eps_in)}; "
            "use general mode",
            "/mode",
        )

    F = enumerate_ball(context, range(context.n), {i: a.F for i, a in enumerate(actions)}, N, budget["f_size"])
    logger.info("built construction: n=%d N=%d |F|=%d eps_in=%s mode=%s", context.n, N, len(F),
                format_rational(eps_in), mode)
    return ConstructionOutput(context, root, F, N, R, eps_in, mode, input_reports, budget, seed, workers)


def apply_phi_k(kstruct: CoordinateStructure, g: GPElement, p: CoordinatePoint) -> CoordinatePoint:
    """The coordinate map ϕ_k(g) applied to one point (d, a, w)."""
    return kstruct.act(g, p)


def u_word(kstruct: CoordinateStructure, g: GPElement, p: CoordinatePoint) -> List[Tuple[Any, int]]:
    """The unreduced word u appended to w by ϕ_k(g) at p."""
    return kstruct.u_parts(g, p)[0]


def pi_label(kstruct: CoordinateStructure, d, provenance: Optional[Tuple[Any, GPElement]] = None):
    """Class label of d ∈ D_k; provenance is (origin, h) with d = origin^θ(h)."""
    origin, trail = provenance if provenance is not None else (None, None)
    return kstruct.label(d, trail, origin)


def equivalence_check(out: ConstructionOutput, k: int, j: int, p: CoordinatePoint, q: CoordinatePoint) -> bool:
    """Whether p ∼^k_j q in coordinate k."""
    return out.coordinate(k).related_single(p, q, j)


def u_word_violations(letters: Sequence[Tuple[Any, int]]) -> List[int]:
    """Positions where a letter cancels against its successor."""
    return [
        i for i in range(len(letters) - 1)
        if letters[i][0] == letters[i + 1][0] and letters[i][1] == -letters[i + 1][1]
    ]


@dataclass
class _View:
    """One measured coordinate: its map, relation and effective points."""

    vertex: int
    act: Callable
    related: Callable
    points: List[Any]
    effective: int
    sampled: bool
    structure: Optional[CoordinateStructure] = None
    cache: Dict[Tuple[GPElement, Any], Any] = field(default_factory=dict)

    def image(self, g: GPElement, p) -> Any:
        key = (g, p)
        if key not in self.cache:
            self.cache[key] = self.act(g, p)
        return self.cache[key]


def _views(out: ConstructionOutput) -> List[_View]:
    if out._views is not None:
        return out._views
    cap = out.budget["effective_points"]
    samples = out.budget["samples"]
    if out.root.is_leaf:
        leaf = out.root
        units = [(leaf.vertex, leaf, leaf.act, lambda p, q, J: p == q, None)]
    else:
        units = [(c.k, c, c.act, c.related, c) for c in out.root.coordinates]
    seeds = spawn_seeds(out.seed, len(units))
    views = []
    for (vertex, unit, act, related, structure), seed in zip(units, seeds):
        effective = unit.effective_count()
        if effective <= cap:
            points, sampled = unit.basepoints(), False
        else:
            rng = make_rng(seed)
            points, sampled = [unit.random_basepoint(rng) for _ in range(samples)], True
            logger.warning("vertex %d: %d effective points exceed %d, sampling %d", vertex, effective, cap, samples)
        views.append(_View(vertex, act, related, points, effective, sampled, structure))
    out._views = views
    return views


def check_condition2(out: ConstructionOutput, g: GPElement, J: Iterable[int]) -> bool:
    """
    Whether c^ϕ(g) ∼_J c ⟺ g ∈ G_J at every effective point.

    J equal to the whole vertex set holds trivially; otherwise the relation
    is decided on the coordinate of the least vertex outside J.
    """
    J = frozenset(J)
    outside = [v for v in range(out.n) if v not in J]
    if not outside:
        return True
    view = _views(out)[min(outside)]
    expected = is_in_GJ(g, J)
    return all(view.related(view.image(g, p), p, J) == expected for p in view.points)


def check_condition2_prime(out: ConstructionOutput, k: int, g: GPElement, J: Iterable[int]) -> bool:
    """
    Condition (2') on coordinate k: g ∈ G_J implies c^ϕ_k(g) ∼^k_J c for every J,
    and the converse for J not containing k.

    The forward direction is witnessed by the chain of block moves of the
    k-normal form of g: x-blocks stay in one ∼_{J∖k} class, y-blocks stay in
    one α-class.
    """
    J = frozenset(J)
    c = out.coordinate(k)
    view = _views(out)[k]
    in_GJ = is_in_GJ(g, J)
    form = k_normal_form(g, k)
    for p in view.points:
        if in_GJ and not _chain_related(c, form, p, J):
            return False
        if k not in J and not in_GJ and c.related(view.image(g, p), p, J):
            return False
    return True


def _chain_related(c: CoordinateStructure, form, p: CoordinatePoint, J: FrozenSet[int]) -> bool:
    inner = J - {c.k}
    current = p
    for x, y in form.blocks:
        if not x.is_identity():
            moved = c.act(x, current)
            if not (moved.a == current.a and c.words_equal(moved.w, current.w)
                    and c.D.related(current.d, moved.d, inner)):
                return False
            current = moved
        if y != c.identity:
            moved = c.act(c.context.syllable(c.k, y), current)
            if not c.alpha_related(current, moved):
                return False
            current = moved
    return True


def _cross_pairs(out: ConstructionOutput) -> List[Tuple[GPElement, GPElement, GPElement]]:
    members = set(out.F)
    singles = [g for g in out.F if g.syllable_length == 1]
    pairs = []
    for x in singles:
        for y in singles:
            if x.syllables[0].vertex == y.syllables[0].vertex:
                continue
            xy = x * y
            if xy in members:
                pairs.append((x, y, xy))
    return pairs


def check_condition1(out: ConstructionOutput) -> List[Dict[str, Any]]:
    """
    ϕ(xy) = ϕ(x)ϕ(y) for x, y in distinct vertex groups with xy ∈ F, and
    ϕ(x)ϕ(y) = ϕ(y)ϕ(x) when the two vertices are adjacent.
    """
    views = _views(out)
    rows = []
    for x, y, xy in _cross_pairs(out):
        u, v = x.syllables[0].vertex, y.syllables[0].vertex
        commuting = out.context.commute(u, v)
        product_ok, commute_ok = True, True
        for view in views:
            for p in view.points:
                xy_image = view.image(xy, p)
                composed = view.image(y, view.image(x, p))
                if xy_image != composed:
                    product_ok = False
                if commuting and view.image(x, view.image(y, p)) != composed:
                    commute_ok = False
        rows.append({
            "x": render_key(x),
            "y": render_key(y),
            "product": product_ok,
            "commuting": commute_ok if commuting else None,
            "holds": product_ok and commute_ok,
        })
    return rows


@dataclass
class CoordinateMeasurement:
    vertex: int
    effective_points: int
    points_measured: int
    sampled: bool
    max_defect: Fraction
    worst_pair: Optional[Tuple[GPElement, GPElement]]
    agreement: Dict[Tuple[GPElement, GPElement], Fraction] = field(repr=False)
    fixed: Dict[GPElement, bool] = field(repr=False)
    inverse_failures: List[GPElement]
    identity_ok: bool
    u_word_violations: int
    condition2_prime_failures: List[Tuple[GPElement, Tuple[int, ...]]]
    label_budget_exhausted: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "vertex": self.vertex,
            "effective_points": self.effective_points,
            "points_measured": self.points_measured,
            "estimate": self.sampled,
            "max_defect": format_rational(self.max_defect),
            "worst_pair": None if self.worst_pair is None else [render_key(g) for g in self.worst_pair],
            "inverse_failures": [render_key(g) for g in self.inverse_failures],
            "u_word_violations": self.u_word_violations,
            "condition2_prime_failures": [
                {"g": render_key(g), "J": list(J)} for g, J in self.condition2_prime_failures
            ],
            "label_budget_exhausted": self.label_budget_exhausted,
        }


@dataclass
class MeasurementReport:
    conditions: ConditionReport
    coordinates: List[CoordinateMeasurement]
    condition1: List[Dict[str, Any]]
    condition2: List[Dict[str, Any]]
    eps_in: Fraction
    bound: Fraction
    coordinate_bound: Fraction
    f_of_n: int
    F_size: int
    labels_heuristic: bool
    seconds: float
    pair_defects: Dict[Tuple[GPElement, GPElement], Fraction] = field(default_factory=dict, repr=False)

    @property
    def bound_holds(self) -> bool:
        return self.conditions.cond_d_max_defect <= self.bound

    @property
    def coordinate_bounds_hold(self) -> bool:
        return all(c.max_defect <= self.coordinate_bound for c in self.coordinates)

    @property
    def condition1_holds(self) -> bool:
        return all(row["holds"] for row in self.condition1)

    @property
    def condition2_holds(self) -> bool:
        return all(row["holds"] for row in self.condition2)

    @property
    def passed(self) -> bool:
        return (self.conditions.passed and self.coordinate_bounds_hold
                and self.condition1_holds and self.condition2_holds
                and not any(c.condition2_prime_failures or c.u_word_violations for c in self.coordinates))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "conditions": self.conditions.to_dict(),
            "coordinates": [c.to_dict() for c in self.coordinates],
            "condition1": self.condition1,
            "condition2": self.condition2,
            "eps_in": format_rational(self.eps_in),
            "f_n": self.f_of_n,
            "bound": format_rational(self.bound),
            "coordinate_bound": format_rational(self.coordinate_bound),
            "bound_holds": self.bound_holds,
            "coordinate_bounds_hold": self.coordinate_bounds_hold,
            "F_size": self.F_size,
            "labels_heuristic": self.labels_heuristic,
            "estimate": any(c.sampled for c in self.coordinates),
            "seconds": round(self.seconds, 4),
            "passed": self.passed,
        }


def _subsets(vertices: Sequence[int]) -> List[Tuple[int, ...]]:
    return [s for r in range(len(vertices) + 1) for s in itertools.combinations(vertices, r)]


def _measure_view(out: ConstructionOutput, view: _View, pairs) -> CoordinateMeasurement:
    total = len(view.points)
    identity = out.context.identity

    agreement = {}
    worst, worst_pair = Fraction(0), None
    for g1, g2, product in pairs:
        agree = sum(1 for p in view.points if view.image(product, p) == view.image(g2, view.image(g1, p)))
        agreement[(g1, g2)] = Fraction(agree, total)
        if worst_pair is None or 1 - agreement[(g1, g2)] > worst:
            worst, worst_pair = 1 - agreement[(g1, g2)], (g1, g2)

    fixed = {}
    inverse_failures = []
    u_violations = 0
    for g in out.F:
        if not g.is_identity():
            fixed[g] = any(view.image(g, p) == p for p in view.points)
        inverse = ~g
        if any(view.image(inverse, view.image(g, p)) != p for p in view.points):
            inverse_failures.append(g)
        if view.structure is not None:
            for p in view.points:
                if u_word_violations(u_word(view.structure, g, p)):
                    u_violations += 1
    identity_ok = all(view.image(identity, p) == p for p in view.points)

    prime_failures = []
    if view.structure is not None:
        for g in out.F:
            for J in _subsets(range(out.n)):
                if not check_condition2_prime(out, view.vertex, g, J):
                    prime_failures.append((g, J))

    logger.debug("vertex %d: %d points, max defect %s", view.vertex, total, format_rational(worst))
    return CoordinateMeasurement(
        vertex=view.vertex,
        effective_points=view.effective,
        points_measured=total,
        sampled=view.sampled,
        max_defect=worst,
        worst_pair=worst_pair,
        agreement=agreement,
        fixed=fixed,
        inverse_failures=inverse_failures,
        identity_ok=identity_ok,
        u_word_violations=u_violations,
        condition2_prime_failures=prime_failures,
        label_budget_exhausted=0 if view.structure is None else view.structure.label_budget_exhausted(),
    )


def measure_conditions(out: ConstructionOutput) -> MeasurementReport:
    """
    Measure conditions (a)-(d), (1) and (2) of the built quasi-action.

    Agreement over C is the product of the per-coordinate agreements, so
    the total defect of a pair is 1 - ∏_k agree_k; a product point is fixed
    exactly when every coordinate has a fixed point.
    """
    start = time.perf_counter()
    views = _views(out)
    pairs = [(g1, g2, g1 * g2) for g1 in out.F for g2 in out.F]

    if out.workers > 1 and len(views) > 1:
        with ThreadPoolExecutor(max_workers=out.workers) as pool:
            coordinates = list(pool.map(lambda v: _measure_view(out, v, pairs), views))
    else:
        coordinates = [_measure_view(out, v, pairs) for v in views]

    worst, worst_pair = Fraction(0), None
    pair_defects = {}
    for g1, g2, _ in pairs:
        agree = math.prod((c.agreement[(g1, g2)] for c in coordinates), start=Fraction(1))
        pair_defects[(g1, g2)] = 1 - agree
        if worst_pair is None or 1 - agree > worst:
            worst, worst_pair = 1 - agree, (g1, g2)

    cond_c = [g for g in out.F if not g.is_identity() and all(c.fixed[g] for c in coordinates)]
    inverse_failures = sorted({g for c in coordinates for g in c.inverse_failures}, key=GPElement.sort_key)
    conditions = ConditionReport(
        cond_a=all(c.identity_ok for c in coordinates),
        cond_b=not inverse_failures,
        cond_c=cond_c,
        cond_d_max_defect=worst,
        cond_d_worst_pair=worst_pair,
        epsilon=out.bound,
        inverse_failures=inverse_failures,
    )

    condition2 = []
    for g in out.F:
        for J in _subsets(range(out.n)):
            condition2.append({"g": render_key(g), "J": list(J), "in_GJ": is_in_GJ(g, J),
                               "holds": check_condition2(out, g, J)})

    report = MeasurementReport(
        conditions=conditions,
        coordinates=coordinates,
        condition1=check_condition1(out),
        condition2=condition2,
        eps_in=out.eps_in,
        bound=out.bound,
        coordinate_bound=out.coordinate_bound,
        f_of_n=f_bound(out.n),
        F_size=len(out.F),
        labels_heuristic=out.labels_heuristic,
        seconds=time.perf_counter() - start,
        pair_defects=pair_defects,
    )
    if report.labels_heuristic:
        logger.warning("general-mode class labels are heuristic; condition (2) results inherit that caveat")
    logger.info("measured: defect %s (bound %s), passed=%s", format_rational(worst),
                format_rational(out.bound), report.passed)
    return report
