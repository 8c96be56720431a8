"""
Tests for graphs of groups, fundamental-group presentations and chains.
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from soficlab.bass_serre import (
    Edge,
    GraphOfGroups,
    GroupNode,
    Presentation,
    fundamental_presentation,
    hnn_amalgam_decomposition,
    hypotheses_recorded,
    integer_line_chain,
    parse_word,
    render_presentation,
    render_word,
    spanning_tree,
)
from soficlab.core_groups import cyclic_group
from soficlab.errors import BadHomomorphism, BadRange, BadTree, Disconnected, MultipleEdges, SchemaError


def infinite_cyclic(name, generator):
    return GroupNode(name, Presentation.parse([generator]))


def z_edge(u, v, left, right, amenable=True):
    return Edge((u, v), infinite_cyclic("Z", "x"), {"x": parse_word(left)}, {"x": parse_word(right)}, amenable)


def trivial_edge(u, v):
    return Edge((u, v), GroupNode("1", Presentation(())), {}, {})


def test_parse_and_render_words():
    word = parse_word("a^2 b^-1 * t")
    assert word == (("a", 1), ("a", 1), ("b", -1), ("t", 1))
    assert render_word(word) == "a^2 b^-1 t"
    assert parse_word("1") == ()
    assert render_word(()) == "1"
    with pytest.raises(SchemaError):
        parse_word("a^x")
    with pytest.raises(SchemaError):
        parse_word("c", ["a", "b"])


def test_amalgamated_product_presentation():
    gog = GraphOfGroups(
        [infinite_cyclic("A", "a"), infinite_cyclic("B", "b")],
        [z_edge(0, 1, "a^2", "b^3")],
    )
    assert spanning_tree(gog) == (0,)
    assert render_presentation(fundamental_presentation(gog)) == "<a, b | a^2 = b^3>"
    assert gog.edges[0].status == "trusted"


def test_hnn_extension_presentation():
    gog = GraphOfGroups([infinite_cyclic("A", "a")], [z_edge(0, 0, "a^2", "a^3")])
    assert spanning_tree(gog) == ()
    assert render_presentation(fundamental_presentation(gog)) == "<a, t | t^-1 a^2 t = a^3>"
    decomposition = hnn_amalgam_decomposition(gog).to_dict()
    assert decomposition["identifications"] == []
    assert decomposition["stable_letters"][0]["letter"] == "t"
    assert decomposition["stable_letters"][0]["theta2"] == {"x": "a^3"}


def test_triangle_uses_breadth_first_tree():
    nodes = [infinite_cyclic(name, name.lower()) for name in "ABC"]
    gog = GraphOfGroups(nodes, [z_edge(0, 1, "a", "b"), z_edge(1, 2, "b", "c"), z_edge(0, 2, "a", "c")])
    assert spanning_tree(gog) == (0, 2)
    presentation = fundamental_presentation(gog)
    assert presentation.generators == ("a", "b", "c", "t")
    assert render_presentation(presentation) == "<a, b, c, t | a = b, t^-1 b t = c, a = c>"


def test_spanning_tree_is_breadth_first_from_vertex_zero():
    nodes = [infinite_cyclic(name, name.lower()) for name in "ABCD"]
    edges = [
        z_edge(2, 3, "c", "d"),
        z_edge(0, 3, "a", "d"),
        z_edge(0, 1, "a", "b"),
        z_edge(1, 2, "b", "c"),
        z_edge(3, 3, "d", "d^-1"),
    ]
    # depth first would take edge 0 (2-3) instead of edge 1 (0-3)
    assert spanning_tree(GraphOfGroups(nodes, edges)) == (1, 2, 3)


def test_explicit_tree_is_checked():
    nodes = [infinite_cyclic(name, name.lower()) for name in "ABC"]
    gog = GraphOfGroups(nodes, [z_edge(0, 1, "a", "b"), z_edge(1, 2, "b", "c"), z_edge(0, 2, "a", "c")])
    assert fundamental_presentation(gog, [0, 1]).generators == ("a", "b", "c", "t")
    with pytest.raises(BadTree):
        fundamental_presentation(gog, [0])
    with pytest.raises(BadTree):
        fundamental_presentation(gog, [0, 5])


def test_finite_vertex_groups_are_renamed_apart():
    z2 = cyclic_group(2)
    gog = GraphOfGroups([GroupNode("A", z2), GroupNode("B", z2)], [trivial_edge(0, 1)])
    presentation = fundamental_presentation(gog)
    assert presentation.generators == ("A.g1", "B.g1")
    assert render_presentation(presentation) == "<A.g1, B.g1 | A.g1^2, B.g1^2>"


def test_finite_edge_maps_are_verified():
    z2, z4 = cyclic_group(2), cyclic_group(4)
    edge = Edge((0, 1), GroupNode("E", z2), {"g1": parse_word("g2")}, {"g1": parse_word("g2")})
    gog = GraphOfGroups([GroupNode("A", z4), GroupNode("B", z4)], [edge])
    assert gog.edges[0].status == "verified"


def test_bad_homomorphism():
    z2, z3 = cyclic_group(2), cyclic_group(3)
    edge = Edge((0, 1), GroupNode("E", z2), {"g1": parse_word("g1")}, {"g1": parse_word("g1")})
    with pytest.raises(BadHomomorphism):
        GraphOfGroups([GroupNode("A", z3), GroupNode("B", z3)], [edge])


def test_missing_edge_image():
    edge = Edge((0, 1), infinite_cyclic("Z", "x"), {}, {"x": parse_word("b")})
    with pytest.raises(BadHomomorphism):
        GraphOfGroups([infinite_cyclic("A", "a"), infinite_cyclic("B", "b")], [edge])


def test_multiple_edges_and_disconnected_graphs():
    nodes = [infinite_cyclic("A", "a"), infinite_cyclic("B", "b")]
    with pytest.raises(MultipleEdges):
        GraphOfGroups(nodes, [z_edge(0, 1, "a", "b"), z_edge(1, 0, "b", "a")])
    with pytest.raises(Disconnected):
        spanning_tree(GraphOfGroups(nodes, []))


def test_amenability_is_recorded_not_checked():
    nodes = [infinite_cyclic("A", "a"), infinite_cyclic("B", "b")]
    assert hypotheses_recorded(GraphOfGroups(nodes, [z_edge(0, 1, "a", "b")]))
    assert not hypotheses_recorded(GraphOfGroups(nodes, [z_edge(0, 1, "a", "b", amenable=False)]))


@pytest.mark.parametrize(
    "lo, hi, expression",
    [
        (0, 0, "H_0"),
        (3, 4, "H_3 *_{L_3=K_4} H_4"),
        (0, 2, "H_0 *_{L_0=K_1} H_1 *_{L_1=K_2} H_2"),
    ],
)
def test_integer_line_chain(lo, hi, expression):
    chain = integer_line_chain("H", "K", lo, hi)
    assert chain.expression == expression
    assert len(chain.vertices) == hi - lo + 1


def test_chain_edge_labels():
    chain = integer_line_chain("H", "K", 0, 2).to_dict()
    assert chain["vertices"] == ["H_0", "H_1", "H_2"]
    assert [(e["left"], e["right"]) for e in chain["edges"]] == [("L_0", "K_1"), ("L_1", "K_2")]


def test_chain_bad_range():
    with pytest.raises(BadRange):
        integer_line_chain("H", "K", 2, 1)


@st.composite
def graphs_of_groups(draw):
    n = draw(st.integers(1, 5))
    gens = [draw(st.integers(1, 3)) for _ in range(n)]
    nodes = [GroupNode(f"V{i}", Presentation(tuple(f"v{i}x{j}" for j in range(gens[i])))) for i in range(n)]
    pairs = [(u, v) for u in range(n) for v in range(u, n)]
    chosen = set(draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs))))
    chosen |= {(i - 1, i) for i in range(1, n)}
    edges = [
        Edge((u, v), infinite_cyclic("Z", "x"), {"x": ((f"v{u}x0", 1),)}, {"x": ((f"v{v}x0", 1),)})
        for u, v in sorted(chosen)
    ]
    return GraphOfGroups(nodes, edges), sum(gens)


@settings(max_examples=50, deadline=None)
@given(graphs_of_groups())
def test_generator_count(case):
    gog, vertex_generators = case
    presentation = fundamental_presentation(gog)
    n, e = len(gog.vertices), len(gog.edges)
    assert len(presentation.generators) == vertex_generators + e - (n - 1)
    assert len(presentation.relators) == e
