"""
Graph products of groups: syllable normal forms and block decompositions.

An element is stored as a reduced syllable sequence in canonical order:
the lexicographically least (by vertex) ordering among all orderings
reachable by swapping adjacent syllables at adjacent vertices. Equality of
elements is then equality of syllable tuples.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import networkx as nx

from soficlab.core_groups import VertexGroup
from soficlab.errors import BadElement, BadVertex, BudgetExceeded, ContextMismatch, KMismatch

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimpleGraph:
    """A loopless graph on vertices 0..n-1; edges are stored as sorted pairs."""

    n: int
    edges: FrozenSet[Tuple[int, int]] = frozenset()

    def __post_init__(self):
        if self.n < 1:
            raise BadVertex(f"a graph needs at least one vertex, got n={self.n}")
        normalized = set()
        for u, v in self.edges:
            if u == v:
                raise BadVertex(f"simple graphs forbid loops: edge ({u}, {v})")
            for w in (u, v):
                if not 0 <= w < self.n:
                    raise BadVertex(f"edge ({u}, {v}) uses vertex {w} outside 0..{self.n - 1}")
            normalized.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(normalized))
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(normalized)
        object.__setattr__(self, "_adjacency", tuple(frozenset(graph.neighbors(v)) for v in range(self.n)))

    @classmethod
    def from_edge_list(cls, n: int, edges: Iterable[Sequence[int]]) -> "SimpleGraph":
        """Build a graph, rejecting duplicate pairs as well as loops."""
        seen = set()
        for edge in edges:
            u, v = edge
            key = (min(u, v), max(u, v))
            if key in seen:
                raise BadVertex(f"duplicate edge {tuple(edge)}")
            seen.add(key)
        return cls(n, frozenset(tuple(e) for e in edges))

    @property
    def vertices(self) -> range:
        return range(self.n)

    def neighbors(self, v: int) -> FrozenSet[int]:
        return self._adjacency[v]

    def adjacent(self, u: int, v: int) -> bool:
        return v in self._adjacency[u]

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.edges)
        return graph


class Syllable(NamedTuple):
    vertex: int
    elt: int


@dataclass(frozen=True, eq=False)
class GPContext:
    """
    A graph product: a simple graph with one vertex group per vertex.

    Also serves as the multiplication oracle for quasi-action tables keyed
    by GPElements.
    """

    graph: SimpleGraph
    groups: Tuple[VertexGroup, ...]

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(self.groups))
        if len(self.groups) != self.graph.n:
            raise BadVertex(f"{len(self.groups)} vertex groups for a graph on {self.graph.n} vertices")

    @property
    def n(self) -> int:
        return self.graph.n

    def commute(self, u: int, v: int) -> bool:
        return self.graph.adjacent(u, v)

    @property
    def identity(self) -> "GPElement":
        return GPElement((), self)

    def element(self, word: Iterable[Sequence[int]]) -> "GPElement":
        return normalize(self, word)

    def syllable(self, vertex: int, elt: int) -> "GPElement":
        return normalize(self, [(vertex, elt)])

    def multiply(self, g: "GPElement", h: "GPElement") -> "GPElement":
        return multiply(g, h)

    def inverse(self, g: "GPElement") -> "GPElement":
        return inverse(g)

    def contains(self, g) -> bool:
        return isinstance(g, GPElement) and g.context is self

    @lru_cache(maxsize=1 << 16)
    def _normal(self, word: Tuple[Syllable, ...]) -> Tuple[Syllable, ...]:
        return _canonical(self, _reduce(self, word))

    @lru_cache(maxsize=1 << 16)
    def _k_normal(self, g: "GPElement", k: int) -> "KNormalForm":
        return _k_normal_form(g, k)

    def __repr__(self) -> str:
        return f"GPContext(n={self.n}, edges={sorted(self.graph.edges)})"


@dataclass(frozen=True)
class GPElement:
    """A graph-product element in canonical syllable normal form."""

    syllables: Tuple[Syllable, ...]
    context: GPContext = field(compare=False, repr=False, hash=False)

    @property
    def syllable_length(self) -> int:
        return len(self.syllables)

    @property
    def support(self) -> FrozenSet[int]:
        return frozenset(s.vertex for s in self.syllables)

    def is_identity(self) -> bool:
        return not self.syllables

    def sort_key(self) -> Tuple:
        return (len(self.syllables), self.syllables)

    def __mul__(self, other: "GPElement") -> "GPElement":
        return multiply(self, other)

    def __invert__(self) -> "GPElement":
        return inverse(self)

    def __str__(self) -> str:
        if not self.syllables:
            return "1"
        return "".join(f"[{v}:{e}]" for v, e in self.syllables)


def _check_word(context: GPContext, word: Iterable[Sequence[int]]) -> Tuple[Syllable, ...]:
    checked = []
    for item in word:
        vertex, elt = item
        if not isinstance(vertex, int) or not 0 <= vertex < context.n:
            raise BadVertex(f"vertex {vertex!r} outside 0..{context.n - 1}")
        if not context.groups[vertex].contains(elt):
            raise BadElement(f"{elt!r} is not an element of the group at vertex {vertex}")
        checked.append(Syllable(vertex, int(elt)))
    return tuple(checked)


def _append(context: GPContext, out: List[Syllable], s: Syllable) -> None:
    """Append a syllable to a reduced sequence, merging where commuting allows."""
    group = context.groups[s.vertex]
    if s.elt == group.identity:
        return
    for i in range(len(out) - 1, -1, -1):
        w = out[i].vertex
        if w == s.vertex:
            product = group.multiply(out[i].elt, s.elt)
            if product == group.identity:
                del out[i]
                out[:] = _reduce(context, tuple(out))
            else:
                out[i] = Syllable(w, product)
            return
        if not context.commute(w, s.vertex):
            break
    out.append(s)


def _reduce(context: GPContext, word: Tuple[Syllable, ...]) -> List[Syllable]:
    out: List[Syllable] = []
    for s in word:
        _append(context, out, s)
    return out


def _canonical(context: GPContext, syllables: Sequence[Syllable]) -> Tuple[Syllable, ...]:
    """Lexicographically least reordering: repeatedly take the smallest movable syllable."""
    adjacency = context.graph._adjacency
    remaining = list(syllables)
    result = []
    while remaining:
        seen: set = set()
        best = None
        for idx, s in enumerate(remaining):
            if seen <= adjacency[s.vertex] and (best is None or s.vertex < remaining[best].vertex):
                best = idx
            seen.add(s.vertex)
        result.append(remaining.pop(best))
    return tuple(result)


def normalize(context: GPContext, word: Iterable[Sequence[int]]) -> GPElement:
    """
    Canonical normal form of a word of (vertex, elt) pairs.

    Args:
        context: the graph product
        word: sequence of (vertex, element) pairs, identities allowed

    Returns:
        GPElement: the reduced, canonically ordered element
    """
    return GPElement(context._normal(_check_word(context, word)), context)


def _same_context(g: GPElement, h: GPElement) -> GPContext:
    if g.context is not h.context:
        raise ContextMismatch("elements belong to different graph products")
    return g.context


def multiply(g: GPElement, h: GPElement) -> GPElement:
    context = _same_context(g, h)
    if not h.syllables:
        return g
    if not g.syllables:
        return h
    return GPElement(context._normal(g.syllables + h.syllables), context)


def inverse(g: GPElement) -> GPElement:
    context = g.context
    word = tuple(Syllable(v, context.groups[v].inverse(e)) for v, e in reversed(g.syllables))
    return GPElement(context._normal(word), context)


def syllable_length(g: GPElement) -> int:
    return g.syllable_length


def support(g: GPElement) -> FrozenSet[int]:
    return g.support


def is_in_GJ(g: GPElement, J: Iterable[int]) -> bool:
    """Membership in the subgroup generated by the vertex groups in J."""
    return g.support <= frozenset(J)


def max_left_divisor_in(g: GPElement, L: Iterable[int]) -> Tuple[GPElement, GPElement]:
    """
    Split g = z * rest with z the longest left divisor of g lying in G_L.

    Returns:
        (z, rest)
    """
    L = frozenset(L)
    context = g.context
    adjacency = context.graph._adjacency
    taken, rest = [], []
    blocked: set = set()
    for s in g.syllables:
        if s.vertex in L and blocked <= adjacency[s.vertex]:
            taken.append(s)
        else:
            rest.append(s)
            blocked.add(s.vertex)
    return (GPElement(context._normal(tuple(taken)), context),
            GPElement(context._normal(tuple(rest)), context))


def max_right_divisor_in(g: GPElement, L: Iterable[int]) -> Tuple[GPElement, GPElement]:
    """
    Split g = rest * z with z the longest right divisor of g lying in G_L.

    Returns:
        (rest, z)
    """
    L = frozenset(L)
    context = g.context
    adjacency = context.graph._adjacency
    taken, rest = [], []
    blocked: set = set()
    for s in reversed(g.syllables):
        if s.vertex in L and blocked <= adjacency[s.vertex]:
            taken.append(s)
        else:
            rest.append(s)
            blocked.add(s.vertex)
    return (GPElement(context._normal(tuple(reversed(rest))), context),
            GPElement(context._normal(tuple(reversed(taken))), context))


@dataclass(frozen=True)
class KNormalForm:
    """
    g = x_1 y_1 ... x_m y_m with x_i in H_k and y_i in G_k.

    x_1 and y_m may be trivial; every other block is non-trivial, and x_i
    has no non-trivial left divisor in G_{L_k} for i > 1.
    """

    k: int
    blocks: Tuple[Tuple[GPElement, int], ...]

    @property
    def m(self) -> int:
        return len(self.blocks)

    @property
    def context(self) -> GPContext:
        return self.blocks[0][0].context

    @property
    def xs(self) -> Tuple[GPElement, ...]:
        return tuple(x for x, _ in self.blocks)

    @property
    def ys(self) -> Tuple[int, ...]:
        return tuple(y for _, y in self.blocks)

    def is_identity(self) -> bool:
        return self.m == 1 and self.blocks[0][0].is_identity() and self.blocks[0][1] == 0

    def violations(self) -> List[str]:
        """Invariant failures, empty when the decomposition is a valid normal form."""
        context = self.context
        L = context.graph.neighbors(self.k)
        problems = []
        for i, (x, y) in enumerate(self.blocks, start=1):
            if self.k in x.support:
                problems.append(f"x_{i} contains a syllable at vertex {self.k}")
            if i > 1 and x.is_identity():
                problems.append(f"x_{i} is trivial")
            if i < self.m and y == 0:
                problems.append(f"y_{i} is trivial")
            if i > 1 and not max_left_divisor_in(x, L)[0].is_identity():
                problems.append(f"x_{i} has a left divisor in G_L")
        return problems


def assemble_blocks(context: GPContext, k: int, blocks: Sequence[Tuple[GPElement, int]]) -> GPElement:
    word: List[Syllable] = []
    for x, y in blocks:
        word.extend(x.syllables)
        word.append(Syllable(k, y))
    return GPElement(context._normal(tuple(word)), context)


def assemble(form: KNormalForm) -> GPElement:
    """Multiply the blocks of a k-normal form back together."""
    return assemble_blocks(form.context, form.k, form.blocks)


def k_normal_form(g: GPElement, k: int) -> KNormalForm:
    """
    The unique decomposition g = x_1 y_1 ... x_m y_m relative to vertex k.

    Each syllable outside k goes to the earliest x-block its dependence
    order allows.
    """
    if not 0 <= k < g.context.n:
        raise BadVertex(f"vertex {k} outside 0..{g.context.n - 1}")
    return g.context._k_normal(g, k)


def _k_normal_form(g: GPElement, k: int) -> KNormalForm:
    context = g.context
    syllables = g.syllables
    levels: List[int] = []
    ys: List[int] = []
    placed: Dict[int, List[Syllable]] = {}
    for idx, s in enumerate(syllables):
        if s.vertex == k:
            ys.append(s.elt)
            levels.append(len(ys))
            continue
        level = 0
        for j in range(idx):
            if not context.commute(syllables[j].vertex, s.vertex) and levels[j] > level:
                level = levels[j]
        levels.append(level)
        placed.setdefault(level, []).append(s)

    def block(level: int) -> GPElement:
        return GPElement(context._normal(tuple(placed.get(level, ()))), context)

    q = len(ys)
    if q == 0:
        return KNormalForm(k, ((g, 0),))
    blocks = [(block(i), ys[i]) for i in range(q)]
    if placed.get(q):
        blocks.append((block(q), 0))
    return KNormalForm(k, tuple(blocks))


class _ConcatRewriter:
    """
    Rewrites the concatenation of two k-normal forms by block moves,
    counting reducing mergers.

    H_k mergers count when syllable length drops; G_k mergers count when
    both blocks and their product are non-trivial (a cancellation is not a
    merger).
    """

    def __init__(self, context: GPContext, k: int):
        self.context = context
        self.k = k
        self.group = context.groups[k]
        self.L = context.graph.neighbors(k)
        self.h_reducing = 0
        self.g_reducing = 0

    def in_GL(self, x: GPElement) -> bool:
        return x.support <= self.L

    def merge_h(self, a: GPElement, b: GPElement) -> GPElement:
        product = a * b
        if product.syllable_length < a.syllable_length + b.syllable_length:
            self.h_reducing += 1
        return product

    def merge_g(self, a: int, b: int) -> int:
        product = self.group.multiply(a, b)
        if a != 0 and b != 0 and product != 0:
            self.g_reducing += 1
        return product

    def concat(self, left: list, right: list) -> list:
        y_m = left[-1][1]
        x1 = right[0][0]
        if y_m == 0:
            return self.case2(left, right)
        if self.in_GL(x1):
            return self.case3(left, right)
        return self.case1(left, right)

    def case1(self, left: list, right: list) -> list:
        """y_m != 1 and x'_1 outside G_L: push the G_L prefix of x'_1 leftwards."""
        x1, y1 = right[0]
        z1, z2 = max_left_divisor_in(x1, self.L)
        right = [(z2, y1)] + right[1:]
        if z1.is_identity():
            return left + right
        return self.push(left, z1) + right

    def push(self, left: list, z: GPElement) -> list:
        x_m, y_m = left[-1]
        if len(left) == 1:
            return [(self.merge_h(x_m, z), y_m)]
        around = x_m.support
        passing = {v for v in self.L if v not in around and around <= self.context.graph.neighbors(v)}
        z11, z12 = max_left_divisor_in(z, passing)
        x_new = x_m if z12.is_identity() else self.merge_h(x_m, z12)
        head = left[:-1] if z11.is_identity() else self.push(left[:-1], z11)
        return head + [(x_new, y_m)]

    def case2(self, left: list, right: list) -> list:
        """y_m == 1: x_m meets x'_1."""
        x_m = left[-1][0]
        x1, y1 = right[0]
        if len(left) == 1:
            return [(self.merge_h(x_m, x1), y1)] + right[1:]
        if not self.in_GL(x_m * x1):
            z = self.merge_h(x_m, x1)
            return self.case1(left[:-1], [(z, y1)] + right[1:])
        # only cancellation and commuting moves: not a merger
        return self.case3(left[:-1], [(x_m * x1, y1)] + right[1:])

    def case3(self, left: list, right: list) -> list:
        """y_m != 1 and x'_1 in G_L: x'_1 slides past y_m."""
        x_m, y_m = left[-1]
        x1, y1 = right[0]
        y = self.merge_g(y_m, y1)
        if y != 0:
            x = self.merge_h(x_m, x1)
            if len(left) == 1:
                return [(x, y)] + right[1:]
            return self.case1(left[:-1], [(x, y)] + right[1:])
        if len(right) == 1:
            x = self.merge_h(x_m, x1)
            if len(left) == 1:
                return [(x, 0)]
            return self.case1(left[:-1], [(x, 0)])
        x2, y2 = right[1]
        merged = self.merge_h(x1, x2)
        return self.case2(left[:-1] + [(x_m, 0)], [(merged, y2)] + right[2:])


def rewrite_concat_counting(g1: KNormalForm, g2: KNormalForm) -> Tuple[KNormalForm, int, int]:
    """
    Normal form of a product, with the number of reducing block mergers.

    Returns:
        (product normal form, reducing H_k mergers, reducing G_k mergers)
    """
    if g1.k != g2.k:
        raise KMismatch(f"normal forms are relative to vertices {g1.k} and {g2.k}")
    context = g1.context
    if g2.context is not context:
        raise ContextMismatch("normal forms belong to different graph products")
    if g1.is_identity() or g2.is_identity():
        product = assemble(g1) * assemble(g2)
        return k_normal_form(product, g1.k), 0, 0
    rewriter = _ConcatRewriter(context, g1.k)
    blocks = rewriter.concat(list(g1.blocks), list(g2.blocks))
    return KNormalForm(g1.k, tuple(blocks)), rewriter.h_reducing, rewriter.g_reducing


def enumerate_ball(
    context: GPContext,
    vertices: Iterable[int],
    generators: Mapping[int, Iterable[int]],
    N: int,
    max_size: Optional[int] = None,
) -> List[GPElement]:
    """
    All elements of syllable length at most N whose syllables are drawn from
    `generators[v]` for v in `vertices`, sorted by (length, syllables).
    """
    vertices = sorted(set(vertices))
    letters = [
        Syllable(v, int(e))
        for v in vertices
        for e in sorted(set(generators[v]))
        if e != context.groups[v].identity
    ]
    identity = context.identity
    seen = {identity}
    frontier = [identity]
    for depth in range(1, N + 1):
        grown = []
        for g in frontier:
            for s in letters:
                h = GPElement(context._normal(g.syllables + (s,)), context)
                if h.syllable_length == depth and h not in seen:
                    seen.add(h)
                    grown.append(h)
                    if max_size is not None and len(seen) > max_size:
                        raise BudgetExceeded(f"F exceeds {max_size} elements at syllable length {depth}")
        frontier = grown
        if not frontier:
            break
    logger.debug("enumerated %d elements of syllable length <= %d on vertices %s", len(seen), N, vertices)
    return sorted(seen, key=GPElement.sort_key)
