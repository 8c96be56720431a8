"""
Tests for finite groups, permutations and partitions.
"""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from soficlab.core_groups import (
    IntegerGroup,
    Partition,
    Permutation,
    compose,
    cyclic_group,
    group_from_cayley_json,
    group_from_cayley_table,
    identity_permutation,
    invert,
    partition_join,
    regular_action,
    similarity_defect,
    symmetric_group,
)
from soficlab.errors import NotAGroup, NotAPermutation, SizeBudgetExceeded, SizeMismatch

# smallest non-associative loop: identity 0, every element self-inverse
LOOP_5 = [
    [0, 1, 2, 3, 4],
    [1, 0, 3, 4, 2],
    [2, 4, 0, 1, 3],
    [3, 2, 4, 0, 1],
    [4, 3, 1, 2, 0],
]


def test_trivial_table():
    group = group_from_cayley_table([[0]])
    assert group.order == 1
    assert group.inverse(0) == 0


def test_z2_table():
    group = group_from_cayley_table([[0, 1], [1, 0]])
    assert group.order == 2
    assert group.inv.tolist() == [0, 1]


def test_identity_is_relabelled_to_zero():
    group = group_from_cayley_table([[1, 0], [0, 1]])
    assert group.mult[0].tolist() == [0, 1]
    assert group.mult[1].tolist() == [1, 0]


def test_non_associative_loop_reports_witness():
    with pytest.raises(NotAGroup) as info:
        group_from_cayley_table(LOOP_5)
    a, b, c = info.value.witness
    assert LOOP_5[LOOP_5[a][b]][c] != LOOP_5[a][LOOP_5[b][c]]


@pytest.mark.parametrize(
    "table",
    [
        [[0, 1], [0, 1]],
        [[0, 1, 2], [1, 2, 0]],
        [[1, 2, 0], [2, 0, 1], [0, 2, 1]],
        [[0, 5], [5, 0]],
    ],
)
def test_malformed_tables_are_rejected(table):
    with pytest.raises(NotAGroup):
        group_from_cayley_table(table)


def test_cayley_json_order_mismatch():
    with pytest.raises(NotAGroup):
        group_from_cayley_json({"order": 3, "table": [[0, 1], [1, 0]]})


def test_table_budget():
    with pytest.raises(SizeBudgetExceeded):
        cyclic_group(2000, table_budget=10**6)


def test_cyclic_groups():
    assert cyclic_group(1).order == 1
    z3 = cyclic_group(3)
    assert z3.multiply(1, 2) == 0
    assert z3.inverse(1) == 2
    assert z3.element_order(1) == 3


def test_symmetric_group_of_degree_three(s3):
    assert s3.order == 6
    involutions = [g for g in s3.elements() if g != 0 and s3.multiply(g, g) == 0]
    assert len(involutions) == 3


def test_integer_group():
    z = IntegerGroup()
    assert z.multiply(3, -5) == -2
    assert z.inverse(4) == -4
    assert z.contains(-7)
    assert not z.contains(True)


def test_regular_action_small_cases(z2, z3):
    assert regular_action(z2)[1] == Permutation.from_sequence([1, 0])
    assert regular_action(z3)[1] == Permutation.from_sequence([1, 2, 0])
    assert regular_action(z3)[0].is_identity()


def test_regular_action_is_a_homomorphism(s3):
    action = regular_action(s3)
    for a in s3.elements():
        for b in s3.elements():
            assert action[s3.multiply(a, b)] == action[a].then(action[b])


def test_right_action_convention():
    p = Permutation.from_sequence([1, 2, 0])
    q = Permutation.from_sequence([0, 2, 1])
    pq = compose(p, q)
    for x in range(3):
        assert pq(x) == q(p(x))
    assert compose(p, invert(p)).is_identity()


def test_permutation_validation():
    with pytest.raises(NotAPermutation) as info:
        Permutation.from_sequence([0, 0, 1])
    assert info.value.image == (0, 0, 1)
    assert isinstance(info.value, ValueError)
    with pytest.raises(SizeMismatch):
        identity_permutation(3).then(identity_permutation(4))


@pytest.mark.parametrize(
    "image, expected",
    [
        (list(range(10)), Fraction(0)),
        ([1, 0] + list(range(2, 10)), Fraction(2, 10)),
        ([1, 0, 3, 2] + list(range(4, 10)), Fraction(4, 10)),
    ],
)
def test_similarity_defect(image, expected):
    assert similarity_defect(identity_permutation(10), Permutation.from_sequence(image)) == expected


def test_similarity_defect_size_mismatch():
    with pytest.raises(SizeMismatch):
        similarity_defect(identity_permutation(2), identity_permutation(3))


permutations_of_8 = st.permutations(list(range(8))).map(Permutation.from_sequence)


@given(permutations_of_8, permutations_of_8, permutations_of_8)
def test_similarity_defect_is_conjugation_invariant(p, q, r):
    conjugate = lambda x: r.inverse().then(x).then(r)  # noqa: E731
    assert similarity_defect(p, q) == similarity_defect(q, p)
    assert similarity_defect(p, q) == similarity_defect(conjugate(p), conjugate(q))


@given(permutations_of_8, permutations_of_8, permutations_of_8)
def test_similarity_defect_triangle_inequality(p, q, r):
    assert similarity_defect(p, r) <= similarity_defect(p, q) + similarity_defect(q, r)


def test_empty_join_is_equality():
    joined = partition_join([], size=5)
    assert joined.classes() == [(0,), (1,), (2,), (3,), (4,)]


def test_join_with_discrete_partition():
    P = Partition.from_classes(4, [[0, 2], [1], [3]])
    assert partition_join([Partition.discrete(4), P]) == P


def test_join_is_transitive_closure():
    P = Partition.from_classes(4, [[0, 1], [2], [3]])
    Q = Partition.from_classes(4, [[1, 2], [0], [3]])
    assert partition_join([P, Q]).classes() == [(0, 1, 2), (3,)]


def test_join_size_mismatch():
    with pytest.raises(SizeMismatch):
        partition_join([Partition.discrete(3), Partition.discrete(4)])


partitions_of_6 = st.lists(st.integers(0, 5), min_size=6, max_size=6).map(
    lambda labels: Partition.from_classes(6, [[x for x in range(6) if labels[x] == c] for c in set(labels)])
)


@given(partitions_of_6, partitions_of_6, partitions_of_6)
def test_join_laws(p, q, r):
    assert partition_join([p, q]) == partition_join([q, p])
    assert partition_join([p, p]) == p
    assert partition_join([partition_join([p, q]), r]) == partition_join([p, partition_join([q, r])])
    assert partition_join([p, Partition.indiscrete(6)]) == Partition.indiscrete(6)


def test_partition_classes_and_len():
    P = Partition.from_classes(5, [[4, 1], [2, 3]])
    assert P.find(4) == 1
    assert P.same_class(2, 3)
    assert len(P) == 3
    assert list(P) == [(0,), (1, 4), (2, 3)]


def test_frozen_tables_are_read_only(z3):
    with pytest.raises(ValueError):
        z3.mult[0, 0] = 1
    assert isinstance(z3.mult, np.ndarray)
