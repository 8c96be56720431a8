"""
Graphs of groups at the symbolic level.

Vertex and edge groups are either finite groups (Cayley tables) or finite
presentations. Nothing here solves word problems: presentations are built,
rendered and decomposed, and edge maps are checked only where a finite
group makes the check exhaustive.
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx

from soficlab.core_groups import FiniteGroup
from soficlab.errors import BadHomomorphism, BadRange, BadTree, Disconnected, MultipleEdges, SchemaError

logger = logging.getLogger(__name__)

Word = Tuple[Tuple[str, int], ...]

_TOKEN = re.compile(r"^([A-Za-z_][A-Za-z0-9_.]*)(?:\^(-?\d+))?$")


def parse_word(text: Union[str, Sequence], generators: Iterable[str] = ()) -> Word:
    """
    Parse "a^2 b^-1 t" (tokens separated by spaces or '*') into unit letters.

    "1" or an empty string is the empty word. When `generators` is given,
    every symbol must be one of them.
    """
    allowed = set(generators)
    if not isinstance(text, str):
        text = " ".join(str(t) for t in text)
    letters: List[Tuple[str, int]] = []
    for token in text.replace("*", " ").split():
        if token == "1":
            continue
        match = _TOKEN.match(token)
        if not match:
            raise SchemaError(f"cannot parse {token!r} in word {text!r}")
        symbol, power = match.group(1), int(match.group(2) or 1)
        if allowed and symbol not in allowed:
            raise SchemaError(f"undeclared generator {symbol!r} in word {text!r}")
        sign = 1 if power > 0 else -1
        letters.extend([(symbol, sign)] * abs(power))
    return tuple(letters)


def invert_word(word: Word) -> Word:
    return tuple((s, -e) for s, e in reversed(word))


def render_word(word: Word) -> str:
    """Render with runs collapsed to powers: a a b^-1 -> "a^2 b^-1"."""
    if not word:
        return "1"
    parts = []
    i = 0
    while i < len(word):
        symbol, sign = word[i]
        j = i
        while j < len(word) and word[j] == (symbol, sign):
            j += 1
        power = (j - i) * sign
        parts.append(symbol if power == 1 else f"{symbol}^{power}")
        i = j
    return " ".join(parts)


def rename_word(word: Word, names: Mapping[str, str]) -> Word:
    return tuple((names.get(s, s), e) for s, e in word)


@dataclass(frozen=True)
class Relator:
    """lhs = rhs; an empty rhs means lhs = 1."""

    lhs: Word
    rhs: Word = ()

    def render(self) -> str:
        if not self.rhs:
            return render_word(self.lhs)
        return f"{render_word(self.lhs)} = {render_word(self.rhs)}"


@dataclass(frozen=True)
class Presentation:
    generators: Tuple[str, ...]
    relators: Tuple[Relator, ...] = ()

    def __post_init__(self):
        declared = set(self.generators)
        if len(declared) != len(self.generators):
            raise SchemaError(f"repeated generator in {list(self.generators)}")
        for relator in self.relators:
            for symbol, _ in relator.lhs + relator.rhs:
                if symbol not in declared:
                    raise SchemaError(f"relator {relator.render()!r} uses undeclared generator {symbol!r}")

    @classmethod
    def parse(cls, generators: Sequence[str], relators: Sequence[str] = ()) -> "Presentation":
        parsed = []
        for text in relators:
            lhs, _, rhs = text.partition("=")
            parsed.append(Relator(parse_word(lhs, generators), parse_word(rhs, generators)))
        return cls(tuple(generators), tuple(parsed))


def render_presentation(presentation: Presentation) -> str:
    """Human-readable form "<a, b | a^2 = b^3>"."""
    gens = ", ".join(presentation.generators)
    if not presentation.relators:
        return f"<{gens}>"
    return f"<{gens} | {', '.join(r.render() for r in presentation.relators)}>"


def finite_group_presentation(group: FiniteGroup, prefix: str = "g") -> Presentation:
    """Every non-identity element a generator, every table entry a relator."""
    names = {g: f"{prefix}{g}" for g in group.elements() if g != group.identity}

    def word(g: int) -> Word:
        return () if g == group.identity else ((names[g], 1),)

    relators = [
        Relator(word(a) + word(b), word(group.multiply(a, b)))
        for a in names
        for b in names
    ]
    return Presentation(tuple(names.values()), tuple(relators))


GroupData = Union[FiniteGroup, Presentation]


@dataclass
class GroupNode:
    """A vertex or edge group with its presentation view."""

    name: str
    group: GroupData
    prefix: str = "g"
    presentation: Presentation = field(init=False)

    def __post_init__(self):
        if isinstance(self.group, FiniteGroup):
            self.presentation = finite_group_presentation(self.group, self.prefix)
        else:
            self.presentation = self.group

    @property
    def is_finite(self) -> bool:
        return isinstance(self.group, FiniteGroup)

    def evaluate(self, word: Word) -> int:
        """Evaluate a word over this finite group's element generators."""
        index = {f"{self.prefix}{g}": g for g in self.group.elements() if g != self.group.identity}
        value = self.group.identity
        for symbol, sign in word:
            if symbol not in index:
                raise BadHomomorphism(f"{symbol!r} is not a generator of {self.name}")
            element = index[symbol] if sign == 1 else self.group.inverse(index[symbol])
            value = self.group.multiply(value, element)
        return value


@dataclass
class Edge:
    """An edge {v1, v2} (possibly a loop) with edge group and the two embeddings."""

    ends: Tuple[int, int]
    group: GroupNode
    theta1: Dict[str, Word]
    theta2: Dict[str, Word]
    amenable: bool = False
    status: str = "unchecked"


@dataclass
class GraphOfGroups:
    vertices: List[GroupNode]
    edges: List[Edge]

    def __post_init__(self):
        seen = set()
        for i, edge in enumerate(self.edges):
            u, v = edge.ends
            for w in (u, v):
                if not 0 <= w < len(self.vertices):
                    raise BadTree(f"edge {i} uses vertex {w} outside 0..{len(self.vertices) - 1}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise MultipleEdges(f"edge {i} repeats {key}; graphs of groups here have no multiple edges")
            seen.add(key)
        for i, edge in enumerate(self.edges):
            edge.status = _check_edge_maps(self, i)

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(len(self.vertices)))
        graph.add_edges_from(e.ends for e in self.edges if e.ends[0] != e.ends[1])
        return graph


def _check_edge_map(edge: Edge, theta: Dict[str, Word], target: GroupNode, label: str) -> str:
    source = edge.group
    missing = set(source.presentation.generators) - set(theta)
    if missing:
        raise BadHomomorphism(f"{label} gives no image for {sorted(missing)}")
    for symbol, image in theta.items():
        for letter, _ in image:
            if letter not in target.presentation.generators:
                raise BadHomomorphism(f"{label} sends {symbol} to a word using {letter!r}, not a generator of {target.name}")
    if not target.is_finite:
        return "trusted"

    if source.is_finite:
        images = {source.group.identity: target.group.identity}
        for g in source.group.elements():
            if g != source.group.identity:
                images[g] = target.evaluate(theta[f"{source.prefix}{g}"])
        for a in source.group.elements():
            for b in source.group.elements():
                if images[source.group.multiply(a, b)] != target.group.multiply(images[a], images[b]):
                    raise BadHomomorphism(f"{label} is not multiplicative")
        if len(set(images.values())) != len(images):
            raise BadHomomorphism(f"{label} is not injective")
        return "verified"

    for relator in source.presentation.relators:
        lhs = target.evaluate(_substitute(relator.lhs, theta))
        rhs = target.evaluate(_substitute(relator.rhs, theta))
        if lhs != rhs:
            raise BadHomomorphism(f"{label} does not respect relator {relator.render()!r}")
    return "relators verified"


def _substitute(word: Word, theta: Mapping[str, Word]) -> Word:
    out: List[Tuple[str, int]] = []
    for symbol, sign in word:
        out.extend(theta[symbol] if sign == 1 else invert_word(theta[symbol]))
    return tuple(out)


def _check_edge_maps(gog: GraphOfGroups, i: int) -> str:
    edge = gog.edges[i]
    u, v = edge.ends
    first = _check_edge_map(edge, edge.theta1, gog.vertices[u], f"edge {i} theta1")
    second = _check_edge_map(edge, edge.theta2, gog.vertices[v], f"edge {i} theta2")
    if "trusted" in (first, second):
        return "trusted"
    return first if first == second else "relators verified"


def spanning_tree(gog: GraphOfGroups) -> Tuple[int, ...]:
    """
    Edge indices of the breadth-first spanning tree from vertex 0, visiting
    neighbours in increasing order. Loops never belong to the tree.
    """
    graph = gog.to_networkx()
    if not nx.is_connected(graph):
        raise Disconnected(f"the underlying graph has {nx.number_connected_components(graph)} components")
    index = {}
    for i, e in enumerate(gog.edges):
        index.setdefault((min(e.ends), max(e.ends)), i)
    tree = [index[(min(u, v), max(u, v))] for u, v in nx.bfs_edges(graph, 0, sort_neighbors=sorted)]
    return tuple(sorted(tree))


def _check_tree(gog: GraphOfGroups, T: Iterable[int]) -> Tuple[int, ...]:
    T = tuple(sorted(set(T)))
    for i in T:
        if not 0 <= i < len(gog.edges):
            raise BadTree(f"edge index {i} outside 0..{len(gog.edges) - 1}")
        if gog.edges[i].ends[0] == gog.edges[i].ends[1]:
            raise BadTree(f"edge {i} is a loop")
    tree = nx.Graph()
    tree.add_nodes_from(range(len(gog.vertices)))
    tree.add_edges_from(gog.edges[i].ends for i in T)
    if not nx.is_tree(tree):
        raise BadTree(f"edges {list(T)} do not form a spanning tree")
    return T


def _generator_names(gog: GraphOfGroups) -> List[Dict[str, str]]:
    """Per-vertex renaming that keeps names unique across vertices."""
    counts: Dict[str, int] = {}
    for node in gog.vertices:
        for g in node.presentation.generators:
            counts[g] = counts.get(g, 0) + 1
    return [
        {g: (g if counts[g] == 1 else f"{node.name}.{g}") for g in node.presentation.generators}
        for node in gog.vertices
    ]


def _stable_letters(gog: GraphOfGroups, T: Sequence[int]) -> Dict[int, str]:
    outside = [i for i in range(len(gog.edges)) if i not in set(T)]
    if len(outside) == 1:
        return {outside[0]: "t"}
    return {i: f"t{i}" for i in outside}


def fundamental_presentation(gog: GraphOfGroups, T: Optional[Iterable[int]] = None) -> Presentation:
    """
    Presentation of the fundamental group relative to the spanning tree T.

    Generators are the vertex generators plus one stable letter per edge
    outside T; each edge-group generator x contributes t⁻¹θ1(x)t = θ2(x),
    with t deleted on tree edges.
    """
    T = spanning_tree(gog) if T is None else _check_tree(gog, T)
    names = _generator_names(gog)
    letters = _stable_letters(gog, T)

    generators: List[str] = []
    relators: List[Relator] = []
    for node, rename in zip(gog.vertices, names):
        generators.extend(rename[g] for g in node.presentation.generators)
        relators.extend(
            Relator(rename_word(r.lhs, rename), rename_word(r.rhs, rename)) for r in node.presentation.relators
        )
    generators.extend(letters[i] for i in sorted(letters))

    for i, edge in enumerate(gog.edges):
        u, v = edge.ends
        for x in edge.group.presentation.generators:
            left = rename_word(edge.theta1[x], names[u])
            right = rename_word(edge.theta2[x], names[v])
            if i in letters:
                t = letters[i]
                left = ((t, -1),) + left + ((t, 1),)
            relators.append(Relator(left, right))
    logger.debug("fundamental group: %d generators, %d relators, tree edges %s", len(generators), len(relators), list(T))
    return Presentation(tuple(generators), tuple(relators))


@dataclass
class Decomposition:
    """A multiple HNN extension of a tree amalgam, recorded symbolically."""

    base_vertices: List[str]
    identifications: List[Dict[str, object]]
    stable_letters: List[Dict[str, object]]

    def to_dict(self) -> Dict[str, object]:
        return {
            "base_vertices": self.base_vertices,
            "identifications": self.identifications,
            "stable_letters": self.stable_letters,
        }


def hnn_amalgam_decomposition(gog: GraphOfGroups, T: Optional[Iterable[int]] = None) -> Decomposition:
    T = spanning_tree(gog) if T is None else _check_tree(gog, T)
    names = _generator_names(gog)
    letters = _stable_letters(gog, T)

    def embeddings(i: int) -> Dict[str, object]:
        edge = gog.edges[i]
        u, v = edge.ends
        return {
            "edge": i,
            "ends": [gog.vertices[u].name, gog.vertices[v].name],
            "edge_group": edge.group.name,
            "theta1": {x: render_word(rename_word(w, names[u])) for x, w in edge.theta1.items()},
            "theta2": {x: render_word(rename_word(w, names[v])) for x, w in edge.theta2.items()},
        }

    return Decomposition(
        base_vertices=[node.name for node in gog.vertices],
        identifications=[embeddings(i) for i in T],
        stable_letters=[{"letter": letters[i], **embeddings(i)} for i in sorted(letters)],
    )


def hypotheses_recorded(gog: GraphOfGroups) -> bool:
    """Whether every edge group is asserted amenable (an input flag, not a check)."""
    return all(edge.amenable for edge in gog.edges)


@dataclass
class ChainDescription:
    vertices: List[str]
    edges: List[Tuple[str, str, str, str]]
    expression: str

    def to_dict(self) -> Dict[str, object]:
        return {
            "vertices": self.vertices,
            "edges": [{"ends": [a, b], "left": left, "right": right} for a, b, left, right in self.edges],
            "expression": self.expression,
        }


def integer_line_chain(H: str, K: str, lo: int, hi: int, L: str = "L") -> ChainDescription:
    """
    The chain of conjugates H_lo .. H_hi, the edge between H_i and H_{i+1}
    identifying L_i with K_{i+1}.
    """
    if lo > hi:
        raise BadRange(f"empty range [{lo}, {hi}]")
    vertices = [f"{H}_{i}" for i in range(lo, hi + 1)]
    edges = [(f"{H}_{i}", f"{H}_{i + 1}", f"{L}_{i}", f"{K}_{i + 1}") for i in range(lo, hi)]
    expression = vertices[0]
    for (_, right, left_label, right_label) in edges:
        expression += f" *_{{{left_label}={right_label}}} {right}"
    return ChainDescription(vertices, edges, expression)
