"""
A finite group with no short relators, realized on a free-group ball.

Each signed generator acts on the set W of reduced words of length <= R by
left multiplication where the product stays in W; the remaining points are
matched to the rest of W by a seeded bijection. Downstream code only needs
reduced-word algebra and `words_equal_bounded`; the explicit permutations
exist to check the relator-freeness property.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from soficlab.core_groups import Permutation, identity_permutation
from soficlab.errors import BadGeneratorIndex, CarrierBudgetExceeded, RadiusExceeded
from soficlab.utils import DEFAULT_BUDGET, make_rng

logger = logging.getLogger(__name__)

EXHAUSTIVE_GENS = 2
EXHAUSTIVE_RADIUS = 4

Letter = Tuple[Hashable, int]


def _free_reduce(letters: Iterable[Letter]) -> Tuple[Letter, ...]:
    out: List[Letter] = []
    for symbol, exp in letters:
        if exp not in (1, -1):
            raise BadGeneratorIndex(f"exponent of {symbol!r} must be 1 or -1, got {exp}")
        if out and out[-1] == (symbol, -exp):
            out.pop()
        else:
            out.append((symbol, exp))
    return tuple(out)


@dataclass(frozen=True)
class ReducedWord:
    """A freely reduced word over opaque symbols; letters are (symbol, ±1)."""

    letters: Tuple[Letter, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", _free_reduce(self.letters))

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: "ReducedWord") -> "ReducedWord":
        return ReducedWord(self.letters + other.letters)

    def inverse(self) -> "ReducedWord":
        return ReducedWord(tuple((s, -e) for s, e in reversed(self.letters)))

    def __str__(self) -> str:
        if not self.letters:
            return "ε"
        return " ".join(f"{s}" if e == 1 else f"{s}^-1" for s, e in self.letters)


EMPTY_WORD = ReducedWord()


def reduce_word(letters: Iterable[Letter]) -> ReducedWord:
    return ReducedWord(tuple(letters))


def words_equal_bounded(u: ReducedWord, v: ReducedWord, R: int) -> bool:
    """
    Equality in V of two words whose quotient has length at most R.

    V has no relators of length <= R, so such words are equal in V exactly
    when they are equal as reduced words.

    Raises:
        RadiusExceeded: if |u| + |v| > R
    """
    if len(u) + len(v) > R:
        raise RadiusExceeded(len(u) + len(v), R)
    return u.letters == v.letters


def ball_size(s: int, R: int) -> int:
    """Number of reduced words of length <= R over s generators."""
    if s == 1:
        return 2 * R + 1
    return 1 + 2 * s * ((2 * s - 1) ** R - 1) // (2 * s - 2)


def signed_generators(s: int) -> List[Letter]:
    return [(i, e) for i in range(s) for e in (1, -1)]


@dataclass(frozen=True, eq=False)
class BallGroupRep:
    gen_count: int
    radius: int
    seed: int
    carrier: Tuple[ReducedWord, ...]
    index: Dict[ReducedWord, int]
    sigma: Dict[Letter, Permutation]

    @property
    def size(self) -> int:
        return len(self.carrier)

    def basepoint(self) -> int:
        return self.index[EMPTY_WORD]


def _enumerate_ball(s: int, R: int) -> List[ReducedWord]:
    letters = signed_generators(s)
    level: List[Tuple[Letter, ...]] = [()]
    words = [EMPTY_WORD]
    for _ in range(R):
        level = [w + (a,) for w in level for a in letters if not w or w[-1] != (a[0], -a[1])]
        words.extend(ReducedWord(w) for w in level)
    return words


def build_ball_group(s: int, R: int, seed: int = 0, carrier_budget: Optional[int] = None) -> BallGroupRep:
    """
    Build V: one permutation of the radius-R ball per signed generator.

    Args:
        s: number of generators
        R: ball radius
        seed: seed of the bijection completing each partial permutation
        carrier_budget: maximum |W|

    Returns:
        BallGroupRep
    """
    if s < 1 or R < 1:
        raise BadGeneratorIndex(f"need s >= 1 and R >= 1, got s={s}, R={R}")
    size = ball_size(s, R)
    budget = carrier_budget if carrier_budget is not None else DEFAULT_BUDGET["carrier"]
    if size > budget:
        raise CarrierBudgetExceeded(f"the ball of radius {R} over {s} generators has {size} words, budget is {budget}")

    carrier = _enumerate_ball(s, R)
    index = {w: i for i, w in enumerate(carrier)}
    rng = make_rng(seed)
    sigma: Dict[Letter, Permutation] = {}
    for g in range(s):
        letter = ReducedWord(((g, 1),))
        image = np.full(size, -1, dtype=np.int64)
        residual = []
        for i, w in enumerate(carrier):
            target = letter * w
            if len(target) <= R:
                image[i] = index[target]
            else:
                residual.append(i)
        free = np.setdiff1d(np.arange(size), image[image >= 0])
        image[residual] = rng.permutation(free)
        sigma[(g, 1)] = Permutation(image)
        sigma[(g, -1)] = sigma[(g, 1)].inverse()
    logger.debug("ball group: s=%d R=%d on %d words", s, R, size)
    return BallGroupRep(s, R, seed, tuple(carrier), index, sigma)


def _check_letters(V: BallGroupRep, word: Sequence[Letter]) -> None:
    for letter in word:
        if tuple(letter) not in V.sigma:
            raise BadGeneratorIndex(f"{letter!r} is not a signed generator of a {V.gen_count}-generator ball group")


def eval_word(V: BallGroupRep, word: Sequence[Letter]) -> Permutation:
    """
    The permutation of a word, acting on words by left multiplication:
    the basepoint goes to the free reduction of a word of length <= R.
    """
    _check_letters(V, word)
    acc = identity_permutation(V.size)
    for letter in reversed(word):
        acc = acc.then(V.sigma[tuple(letter)])
    return acc


def basepoint_image(V: BallGroupRep, word: Sequence[Letter]) -> ReducedWord:
    _check_letters(V, word)
    point = V.basepoint()
    for letter in reversed(word):
        point = V.sigma[tuple(letter)](point)
    return V.carrier[point]


def _lazy_basepoint_image(s: int, R: int, word: Sequence[Letter]) -> Optional[ReducedWord]:
    """Apply a word to the basepoint without tables; None if a suffix leaves the ball."""
    point = EMPTY_WORD
    for symbol, exp in reversed(word):
        if not 0 <= symbol < s:
            raise BadGeneratorIndex(f"generator {symbol} outside 0..{s - 1}")
        point = ReducedWord(((symbol, exp),)) * point
        if len(point) > R:
            return None
    return point


def _all_words(s: int, R: int) -> Iterable[Tuple[Letter, ...]]:
    letters = signed_generators(s)
    level: List[Tuple[Letter, ...]] = [()]
    yield ()
    for _ in range(R):
        level = [w + (a,) for w in level for a in letters]
        yield from level


def check_relator_freeness(
    s: int,
    R: int,
    seed: int = 0,
    exhaustive: Optional[bool] = None,
    samples: Optional[int] = None,
    carrier_budget: Optional[int] = None,
) -> Dict[str, Any]:
    """
    Check that words of length <= R act on the basepoint as their free
    reduction, and that exactly the freely trivial ones act trivially.

    Exhaustive over all (unreduced) words for small s and R. Otherwise a
    seeded sample of random words runs through the built permutations, or
    symbolically on the basepoint when the ball is over the carrier budget;
    `tables` in the result says which.
    """
    if exhaustive is None:
        exhaustive = s <= EXHAUSTIVE_GENS and R <= EXHAUSTIVE_RADIUS
    failures: List[str] = []
    checked = 0
    if exhaustive:
        V = build_ball_group(s, R, seed, carrier_budget)
        for word in _all_words(s, R):
            checked += 1
            expected = ReducedWord(word)
            if basepoint_image(V, word) != expected:
                failures.append(f"{expected} moves the basepoint elsewhere")
            elif not expected.letters and not eval_word(V, word).is_identity():
                failures.append(f"freely trivial word {list(word)} is not the identity")
        carrier = V.size
    else:
        n_samples = samples if samples is not None else DEFAULT_BUDGET["samples"]
        budget = carrier_budget if carrier_budget is not None else DEFAULT_BUDGET["carrier"]
        carrier = ball_size(s, R)
        V = build_ball_group(s, R, seed, carrier_budget) if carrier <= budget else None
        if V is None:
            logger.warning("ball of %d words is over the carrier budget %d; sampled words run without tables", carrier, budget)
        rng = make_rng(seed)
        lengths = rng.integers(0, R + 1, size=n_samples)
        for length in lengths:
            symbols = rng.integers(0, s, size=int(length))
            exps = rng.choice((1, -1), size=int(length))
            word = [(int(a), int(e)) for a, e in zip(symbols, exps)]
            checked += 1
            expected = ReducedWord(tuple(word))
            image = basepoint_image(V, word) if V is not None else _lazy_basepoint_image(s, R, word)
            if image != expected:
                failures.append(f"{word} leaves the ball or lands elsewhere")
            elif V is not None and not expected.letters and not eval_word(V, word).is_identity():
                failures.append(f"freely trivial word {word} is not the identity")
    return {
        "gens": s,
        "radius": R,
        "seed": seed,
        "carrier": carrier,
        "mode": "exhaustive" if exhaustive else "sampled",
        "tables": V is not None,
        "words_checked": checked,
        "failures": failures[:20],
        "passed": not failures,
    }
