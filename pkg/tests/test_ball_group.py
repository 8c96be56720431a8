"""
Tests for the free-ball group and bounded word equality.
"""

import pytest

from soficlab import ball_group
from soficlab.ball_group import (
    EMPTY_WORD,
    BallGroupRep,
    ReducedWord,
    ball_size,
    basepoint_image,
    build_ball_group,
    check_relator_freeness,
    eval_word,
    reduce_word,
    words_equal_bounded,
)
from soficlab.core_groups import Permutation
from soficlab.errors import BadGeneratorIndex, CarrierBudgetExceeded, RadiusExceeded

a, A = (0, 1), (0, -1)
b, B = (1, 1), (1, -1)


@pytest.mark.parametrize("s, R, expected", [(2, 2, 17), (1, 3, 7), (2, 4, 161), (3, 1, 7)])
def test_ball_size(s, R, expected):
    assert ball_size(s, R) == expected
    assert build_ball_group(s, R).size == expected


def test_reduced_words():
    assert reduce_word([a, A, b]) == ReducedWord((b,))
    assert reduce_word([a, b, B, A]) == EMPTY_WORD
    assert reduce_word([a, b]).inverse() == reduce_word([B, A])
    assert str(EMPTY_WORD) == "ε"
    assert str(reduce_word([a, B])) == "0 1^-1"
    with pytest.raises(BadGeneratorIndex):
        reduce_word([(0, 2)])


def test_basepoint_images():
    V = build_ball_group(2, 3, seed=5)
    assert basepoint_image(V, []) == EMPTY_WORD
    assert basepoint_image(V, [a, b]) == reduce_word([a, b])
    assert basepoint_image(V, [a, b, B]) == reduce_word([a])


def test_trivial_words_act_trivially():
    V = build_ball_group(2, 3)
    assert eval_word(V, []).is_identity()
    assert eval_word(V, [a, A]).is_identity()
    assert eval_word(V, [a, b, B, A]).is_identity()
    assert not eval_word(V, [a]).is_identity()


def test_bad_letters_and_budget():
    V = build_ball_group(2, 2)
    with pytest.raises(BadGeneratorIndex):
        eval_word(V, [(2, 1)])
    with pytest.raises(CarrierBudgetExceeded):
        build_ball_group(3, 6, carrier_budget=100)
    with pytest.raises(BadGeneratorIndex):
        build_ball_group(0, 2)


def test_words_equal_bounded():
    assert words_equal_bounded(reduce_word([a, b]), reduce_word([a, b]), 4)
    assert not words_equal_bounded(reduce_word([a, b]), reduce_word([b, a]), 4)
    assert words_equal_bounded(EMPTY_WORD, reduce_word([a, A]), 0)
    with pytest.raises(RadiusExceeded):
        words_equal_bounded(reduce_word([a, b]), reduce_word([b, a]), 3)


def test_construction_is_seeded():
    first = build_ball_group(2, 2, seed=3)
    second = build_ball_group(2, 2, seed=3)
    assert all(first.sigma[k] == second.sigma[k] for k in first.sigma)


def test_exhaustive_check_small_ball():
    report = check_relator_freeness(2, 4, seed=0)
    assert report["mode"] == "exhaustive"
    assert report["carrier"] == 161
    assert report["words_checked"] == sum(4**length for length in range(5))
    assert report["failures"] == []
    assert report["passed"]


def test_sampled_check_runs_through_the_tables():
    report = check_relator_freeness(3, 6, seed=1, samples=2000)
    assert report["mode"] == "sampled"
    assert report["tables"]
    assert report["carrier"] == ball_size(3, 6)
    assert report["words_checked"] == 2000
    assert report["passed"]


def test_sampled_check_catches_a_broken_generator(monkeypatch):
    def broken(s, R, seed=0, carrier_budget=None):
        V = build_ball_group(s, R, seed, carrier_budget)
        image = V.sigma[a].image.copy()
        i, j = V.index[EMPTY_WORD], V.index[ReducedWord((b,))]
        image[[i, j]] = image[[j, i]]
        sigma = dict(V.sigma)
        sigma[a] = Permutation(image)
        sigma[A] = sigma[a].inverse()
        return BallGroupRep(V.gen_count, V.radius, V.seed, V.carrier, V.index, sigma)

    monkeypatch.setattr(ball_group, "build_ball_group", broken)
    report = check_relator_freeness(3, 6, seed=1, samples=2000)
    assert report["tables"]
    assert not report["passed"]


def test_sampled_check_over_budget_runs_without_tables():
    report = check_relator_freeness(3, 6, seed=1, samples=500, carrier_budget=1000)
    assert not report["tables"]
    assert report["passed"]


@pytest.mark.slow
def test_sampled_check_large_ball():
    report = check_relator_freeness(4, 10, seed=0, samples=10**5)
    assert report["words_checked"] == 10**5
    assert report["passed"]
