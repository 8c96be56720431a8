"""
Shared fixtures: small vertex groups and graph-product contexts.
"""

import pytest

from soficlab.core_groups import cyclic_group, regular_action, symmetric_group
from soficlab.graph_products import GPContext, SimpleGraph
from soficlab.quasi_actions import QuasiActionTable
from soficlab.sofic_builder import VertexAction


def regular_vertex_action(group):
    return VertexAction(group, QuasiActionTable(group.order, regular_action(group)), tuple(group.elements()))


@pytest.fixture
def z2():
    return cyclic_group(2)


@pytest.fixture
def z3():
    return cyclic_group(3)


@pytest.fixture
def s3():
    return symmetric_group(3)


@pytest.fixture
def path_context(z2):
    """Path 0-1-2 with Z/2 at every vertex; a, b, c are the generators at 0, 1, 2."""
    return GPContext(SimpleGraph(3, frozenset({(0, 1), (1, 2)})), (z2, z2, z2))


@pytest.fixture
def free_context(z2):
    """Z/2 * Z/2."""
    return GPContext(SimpleGraph(2), (z2, z2))


@pytest.fixture
def direct_context(z2):
    """Z/2 x Z/2."""
    return GPContext(SimpleGraph(2, frozenset({(0, 1)})), (z2, z2))
