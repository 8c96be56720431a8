"""
Finite groups, permutations and partitions.

Permutations act on the right: x^(pq) = (x^p)^q, so `p.then(q)` is the
product pq and regular actions are right multiplication.
"""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from soficlab.errors import NotAGroup, NotAPermutation, SizeBudgetExceeded, SizeMismatch
from soficlab.utils import DEFAULT_BUDGET, make_rng

logger = logging.getLogger(__name__)

EXHAUSTIVE_ASSOCIATIVITY_ORDER = 64
SAMPLED_TRIPLES = 10**5


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=np.int64, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """
    A finite group given by its multiplication table.

    The identity is always element 0. Groups compare by identity: two
    tables describing the same group are still different contexts.
    """

    order: int
    mult: np.ndarray
    inv: np.ndarray
    name: str = "G"

    identity = 0

    def multiply(self, a: int, b: int) -> int:
        return int(self.mult[a, b])

    def inverse(self, a: int) -> int:
        return int(self.inv[a])

    def contains(self, element) -> bool:
        return isinstance(element, (int, np.integer)) and not isinstance(element, bool) and 0 <= element < self.order

    def elements(self) -> range:
        return range(self.order)

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != 0:
            x = self.multiply(x, a)
            k += 1
        return k

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name}, order={self.order})"


@dataclass(frozen=True)
class IntegerGroup:
    """The infinite cyclic group; elements are Python ints under addition."""

    name: str = "Z"

    identity = 0
    order = None

    def multiply(self, a: int, b: int) -> int:
        return a + b

    def inverse(self, a: int) -> int:
        return -a

    def contains(self, element) -> bool:
        return isinstance(element, (int, np.integer)) and not isinstance(element, bool)


VertexGroup = Union[FiniteGroup, IntegerGroup]


@dataclass(frozen=True, eq=False)
class Permutation:
    """A bijection of {0..size-1}, stored as its image array."""

    image: np.ndarray

    def __post_init__(self):
        image = _frozen(self.image)
        if image.ndim != 1 or image.size == 0:
            raise SizeMismatch("a permutation needs a non-empty one-dimensional image")
        if not np.array_equal(np.sort(image), np.arange(image.size)):
            raise NotAPermutation(image.tolist())
        object.__setattr__(self, "image", image)

    @classmethod
    def from_sequence(cls, images: Sequence[int]) -> "Permutation":
        return cls(np.asarray(images, dtype=np.int64))

    @property
    def size(self) -> int:
        return int(self.image.size)

    def __call__(self, x: int) -> int:
        return int(self.image[x])

    def then(self, other: "Permutation") -> "Permutation":
        """The right-action product: first self, then other."""
        if other.size != self.size:
            raise SizeMismatch(f"cannot compose permutations of sizes {self.size} and {other.size}")
        return Permutation(other.image[self.image])

    def inverse(self) -> "Permutation":
        inv = np.empty_like(self.image)
        inv[self.image] = np.arange(self.size)
        return Permutation(inv)

    def fixed_points(self) -> np.ndarray:
        return np.flatnonzero(self.image == np.arange(self.size))

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.image, np.arange(self.size)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Permutation):
            return NotImplemented
        return np.array_equal(self.image, other.image)

    def __hash__(self) -> int:
        return hash(self.image.tobytes())

    def __repr__(self) -> str:
        return f"Permutation({self.image.tolist()})"


def identity_permutation(size: int) -> Permutation:
    return Permutation(np.arange(size))


def compose(p: Permutation, q: Permutation) -> Permutation:
    """pq under the right-action convention: apply p, then q."""
    return p.then(q)


def invert(p: Permutation) -> Permutation:
    return p.inverse()


def similarity_defect(p: Permutation, q: Permutation) -> Fraction:
    """
    Fraction of points on which p and q disagree, as an exact rational.

    p and q are ε-similar exactly when this is at most ε.
    """
    if p.size != q.size:
        raise SizeMismatch(f"permutations act on {p.size} and {q.size} points")
    moved = int(np.count_nonzero(p.image != q.image))
    return Fraction(moved, p.size)


def _check_table_budget(order: int, budget: Optional[int]) -> None:
    cells = budget if budget is not None else DEFAULT_BUDGET["table_cells"]
    if order * order > cells:
        raise SizeBudgetExceeded(f"a group of order {order} needs {order * order} table cells, budget is {cells}")


def group_from_cayley_table(
    table: Sequence[Sequence[int]],
    name: str = "G",
    seed: int = 0,
    table_budget: Optional[int] = None,
) -> FiniteGroup:
    """
    Validate a Cayley table and return it as a FiniteGroup.

    The identity is relabelled to index 0. Associativity is checked on every
    triple up to order 64 and on a seeded sample of triples above that.

    Args:
        table: square table of element indices
        name: label used in reports
        seed: seed for the sampled associativity check
        table_budget: maximum number of table cells

    Returns:
        FiniteGroup: the validated group
    """
    try:
        raw = np.asarray(table, dtype=np.int64)
    except (TypeError, ValueError) as exc:
        raise NotAGroup(f"table is not a rectangular array of integers: {exc}") from exc
    if raw.ndim != 2 or raw.shape[0] != raw.shape[1] or raw.shape[0] == 0:
        raise NotAGroup(f"table must be square and non-empty, got shape {raw.shape}")
    order = raw.shape[0]
    _check_table_budget(order, table_budget)
    if raw.min() < 0 or raw.max() >= order:
        raise NotAGroup(f"table entries must lie in 0..{order - 1}")

    full = np.arange(order)
    for i in range(order):
        if not np.array_equal(np.sort(raw[i]), full):
            raise NotAGroup("row is not a permutation", (i,))
        if not np.array_equal(np.sort(raw[:, i]), full):
            raise NotAGroup("column is not a permutation", (i,))

    identities = [e for e in range(order) if np.array_equal(raw[e], full) and np.array_equal(raw[:, e], full)]
    if not identities:
        raise NotAGroup("no identity element")
    e = identities[0]

    relabel = np.arange(order)
    relabel[[0, e]] = relabel[[e, 0]]
    mult = np.empty_like(raw)
    mult[np.ix_(relabel, relabel)] = relabel[raw]

    inv = np.empty(order, dtype=np.int64)
    for g in range(order):
        right = np.flatnonzero(mult[g] == 0)
        h = int(right[0])
        if mult[h, g] != 0:
            raise NotAGroup("left and right inverses differ", (g, h))
        inv[g] = h

    witness = _associativity_witness(mult, seed)
    if witness is not None:
        raise NotAGroup("multiplication is not associative", witness)

    return FiniteGroup(order=order, mult=_frozen(mult), inv=_frozen(inv), name=name)


def _associativity_witness(mult: np.ndarray, seed: int) -> Optional[Tuple[int, int, int]]:
    order = mult.shape[0]
    if order <= EXHAUSTIVE_ASSOCIATIVITY_ORDER:
        lhs = mult[mult]
        rhs = mult[np.arange(order)[:, None, None], mult[None, :, :]]
        bad = np.argwhere(lhs != rhs)
        if bad.size:
            a, b, c = (int(x) for x in bad[0])
            return a, b, c
        return None
    logger.debug("order %d: sampling %d triples for associativity", order, SAMPLED_TRIPLES)
    rng = make_rng(seed)
    a, b, c = rng.integers(0, order, size=(3, SAMPLED_TRIPLES))
    bad = np.flatnonzero(mult[mult[a, b], c] != mult[a, mult[b, c]])
    if bad.size:
        i = int(bad[0])
        return int(a[i]), int(b[i]), int(c[i])
    return None


def group_from_cayley_json(data: Mapping, name: str = "G") -> FiniteGroup:
    """Ingest {"order": m, "table": [[...], ...]}."""
    table = data["table"]
    if "order" in data and int(data["order"]) != len(table):
        raise NotAGroup(f"declared order {data['order']} does not match table of size {len(table)}")
    return group_from_cayley_table(table, name=name)


def cyclic_group(m: int, table_budget: Optional[int] = None) -> FiniteGroup:
    if m < 1:
        raise NotAGroup(f"cyclic group order must be positive, got {m}")
    _check_table_budget(m, table_budget)
    idx = np.arange(m)
    mult = (idx[:, None] + idx[None, :]) % m
    inv = (-idx) % m
    return FiniteGroup(order=m, mult=_frozen(mult), inv=_frozen(inv), name=f"Z/{m}")


def symmetric_group(m: int, table_budget: Optional[int] = None) -> FiniteGroup:
    """
    The symmetric group on m letters, elements in lexicographic order.

    Element i*j is "first permutation i, then permutation j".
    """
    if m < 1:
        raise NotAGroup(f"symmetric group degree must be positive, got {m}")
    order = 1
    for k in range(2, m + 1):
        order *= k
    _check_table_budget(order, table_budget)
    perms = list(itertools.permutations(range(m)))
    index = {p: i for i, p in enumerate(perms)}
    arr = np.asarray(perms, dtype=np.int64)
    mult = np.empty((order, order), dtype=np.int64)
    for i in range(order):
        composed = arr[:, arr[i]]  # row j: x -> p_j[p_i[x]]
        mult[i] = [index[tuple(row)] for row in composed]
    inv = np.asarray([int(np.flatnonzero(mult[g] == 0)[0]) for g in range(order)], dtype=np.int64)
    return FiniteGroup(order=order, mult=_frozen(mult), inv=_frozen(inv), name=f"S{m}")


def regular_action(group: FiniteGroup) -> Dict[int, Permutation]:
    """
    The right regular action g -> (x -> xg).

    A genuine action, free on every non-identity element.
    """
    return {g: Permutation(group.mult[:, g]) for g in group.elements()}


class UnionFind:
    """Disjoint sets over 0..size-1 with path compression and union by rank."""

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.rank = [0] * size

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> None:
        x, y = self.find(x), self.find(y)
        if x == y:
            return
        if self.rank[x] < self.rank[y]:
            x, y = y, x
        elif self.rank[x] == self.rank[y]:
            self.rank[x] += 1
        self.parent[y] = x


@dataclass(frozen=True)
class Partition:
    """
    An equivalence relation on {0..size-1}.

    `rep[x]` is the least element of the class of x.
    """

    size: int
    rep: Tuple[int, ...] = field(repr=False)

    def __post_init__(self):
        if len(self.rep) != self.size:
            raise SizeMismatch(f"representative map has {len(self.rep)} entries for {self.size} points")
        if any(self.rep[r] != r for r in self.rep):
            raise ValueError("representative map is not idempotent")

    @classmethod
    def discrete(cls, size: int) -> "Partition":
        return cls(size, tuple(range(size)))

    @classmethod
    def indiscrete(cls, size: int) -> "Partition":
        return cls(size, (0,) * size)

    @classmethod
    def from_classes(cls, size: int, classes: Iterable[Iterable[int]]) -> "Partition":
        uf = UnionFind(size)
        for block in classes:
            block = list(block)
            for x in block[1:]:
                uf.union(block[0], x)
        return cls._from_union_find(size, uf)

    @classmethod
    def _from_union_find(cls, size: int, uf: UnionFind) -> "Partition":
        least: Dict[int, int] = {}
        for x in range(size):
            least.setdefault(uf.find(x), x)
        return cls(size, tuple(least[uf.find(x)] for x in range(size)))

    def find(self, x: int) -> int:
        return self.rep[x]

    def same_class(self, x: int, y: int) -> bool:
        return self.rep[x] == self.rep[y]

    def classes(self) -> List[Tuple[int, ...]]:
        blocks: Dict[int, List[int]] = {}
        for x, r in enumerate(self.rep):
            blocks.setdefault(r, []).append(x)
        return [tuple(block) for _, block in sorted(blocks.items())]

    def __iter__(self) -> Iterator[Tuple[int, ...]]:
        return iter(self.classes())

    def __len__(self) -> int:
        return len(set(self.rep))


def partition_join(partitions: Sequence[Partition], size: Optional[int] = None) -> Partition:
    """
    The finest partition coarser than every input.

    The empty join is the discrete partition; pass `size` in that case.
    """
    sizes = {p.size for p in partitions}
    if size is not None:
        sizes.add(size)
    if len(sizes) != 1:
        raise SizeMismatch(f"cannot join partitions over carriers of sizes {sorted(sizes)}")
    (n,) = sizes
    uf = UnionFind(n)
    for p in partitions:
        for x, r in enumerate(p.rep):
            uf.union(x, r)
    return Partition._from_union_find(n, uf)
