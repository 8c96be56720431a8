"""
Finite quasi-action tables.

A table maps group-element keys (FiniteGroup indices, integers of Z, or
GPElements) to permutations of a common carrier {0..m-1}. Verification is
exhaustive over the keys handed in and every defect is an exact rational.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Hashable, Iterable, List, Mapping, NamedTuple, Optional, Protocol, Sequence, Tuple

import numpy as np

from soficlab.core_groups import IntegerGroup, Permutation, identity_permutation, similarity_defect
from soficlab.errors import (
    CannotPreserveFixedpointFreeness,
    CarrierBudgetExceeded,
    KeyDomainMismatch,
    MissingInverseKey,
    MissingKey,
    MissingProductKey,
    SizeMismatch,
)
from soficlab.utils import DEFAULT_BUDGET, RationalLike, format_rational, make_rng, parse_rational, spawn_seeds

logger = logging.getLogger(__name__)

DEGRADE_ATTEMPTS = 32

Key = Hashable


class GroupOracle(Protocol):
    """Anything with an identity, multiply and inverse: FiniteGroup, IntegerGroup, GPContext."""

    identity: Any

    def multiply(self, a, b): ...

    def inverse(self, a): ...


def sorted_keys(keys: Iterable[Key]) -> List[Key]:
    """Deterministic key order: GPElements by (length, syllables), everything else natively."""
    keys = list(keys)
    if keys and hasattr(keys[0], "sort_key"):
        return sorted(keys, key=lambda g: g.sort_key())
    return sorted(keys)


def render_key(key: Key) -> Any:
    """JSON-friendly rendering of a key."""
    if hasattr(key, "syllables"):
        return [[v, e] for v, e in key.syllables]
    return int(key)


@dataclass(frozen=True)
class QuasiActionTable:
    carrier_size: int
    entries: Mapping[Key, Permutation]

    def __post_init__(self):
        if self.carrier_size < 1:
            raise SizeMismatch(f"carrier must be non-empty, got {self.carrier_size}")
        for key, perm in self.entries.items():
            if perm.size != self.carrier_size:
                raise SizeMismatch(f"entry {key!r} acts on {perm.size} points, carrier has {self.carrier_size}")
        object.__setattr__(self, "entries", dict(self.entries))

    def keys(self) -> List[Key]:
        return sorted_keys(self.entries)

    def __contains__(self, key: Key) -> bool:
        return key in self.entries

    def __getitem__(self, key: Key) -> Permutation:
        try:
            return self.entries[key]
        except KeyError:
            raise MissingKey(key) from None

    def act(self, key: Key, point: int) -> int:
        return self[key](point)


@dataclass
class ConditionReport:
    """Outcome of checking conditions (a)-(d) on a finite set F."""

    cond_a: bool
    cond_b: bool
    cond_c: List[Key]
    cond_d_max_defect: Fraction
    cond_d_worst_pair: Optional[Tuple[Key, Key]]
    epsilon: Fraction = Fraction(0)
    inverse_failures: List[Key] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.cond_a and self.cond_b and not self.cond_c and self.cond_d_max_defect <= self.epsilon

    @property
    def verdict(self) -> str:
        if self.passed:
            return "special (F,ε)-quasi-action"
        return "not a special (F,ε)-quasi-action"

    def axioms_hold(self) -> bool:
        """Conditions (a), (b) and (c), ignoring the defect."""
        return self.cond_a and self.cond_b and not self.cond_c

    def to_dict(self) -> Dict[str, Any]:
        return {
            "cond_a": self.cond_a,
            "cond_b": self.cond_b,
            "cond_c": [render_key(g) for g in self.cond_c],
            "cond_d_max_defect": format_rational(self.cond_d_max_defect),
            "cond_d_worst_pair": None
            if self.cond_d_worst_pair is None
            else [render_key(g) for g in self.cond_d_worst_pair],
            "epsilon": format_rational(self.epsilon),
            "verdict": self.verdict,
        }


def agreement(p: Permutation, q: Permutation) -> Fraction:
    """Fraction of points on which p and q agree."""
    return 1 - similarity_defect(p, q)


def _check_keys(table: QuasiActionTable, F: Sequence[Key], group: GroupOracle) -> None:
    for g in F:
        if g not in table.entries:
            raise MissingKey(g)
        if group.inverse(g) not in table.entries:
            raise MissingInverseKey(g)


def _worst_pair(table: QuasiActionTable, F: Sequence[Key], group: GroupOracle) -> Tuple[Fraction, Optional[Tuple[Key, Key]]]:
    worst = Fraction(0)
    pair = None
    m = table.carrier_size
    for g1 in F:
        image1 = table.entries[g1].image
        for g2 in F:
            product = group.multiply(g1, g2)
            if product not in table.entries:
                raise MissingProductKey(g1, g2)
            composed = table.entries[g2].image[image1]
            moved = int(np.count_nonzero(table.entries[product].image != composed))
            if pair is None or moved > worst * m:
                worst = Fraction(moved, m)
                pair = (g1, g2)
    return worst, pair


def verify_special(
    table: QuasiActionTable,
    F: Iterable[Key],
    epsilon: RationalLike,
    group: GroupOracle,
) -> ConditionReport:
    """
    Check that `table` is a special (F, ε)-quasi-action.

    Args:
        table: the quasi-action
        F: finite set of keys; every pairwise product must also be a key
        epsilon: similarity tolerance for condition (d)
        group: multiplication oracle for the key space

    Returns:
        ConditionReport: per-condition results and the verdict
    """
    F = sorted_keys(set(F))
    epsilon = parse_rational(epsilon)
    _check_keys(table, F, group)

    identity = group.identity
    cond_a = identity in table.entries and table.entries[identity].is_identity()
    inverse_failures = [g for g in F if table.entries[group.inverse(g)] != table.entries[g].inverse()]
    cond_c = [g for g in F if g != identity and table.entries[g].fixed_points().size > 0]
    worst, pair = _worst_pair(table, F, group)

    report = ConditionReport(
        cond_a=cond_a,
        cond_b=not inverse_failures,
        cond_c=cond_c,
        cond_d_max_defect=worst,
        cond_d_worst_pair=pair,
        epsilon=epsilon,
        inverse_failures=inverse_failures,
    )
    logger.debug("verified |F|=%d on %d points: %s", len(F), table.carrier_size, report.verdict)
    return report


def defect(table: QuasiActionTable, F: Iterable[Key], group: GroupOracle) -> Fraction:
    """The condition (d) defect alone: max over F x F of the similarity defect."""
    F = sorted_keys(set(F))
    _check_keys(table, F, group)
    return _worst_pair(table, F, group)[0]


def product_quasi_action(
    tables: Sequence[QuasiActionTable],
    carrier_budget: Optional[int] = None,
) -> QuasiActionTable:
    """
    Coordinatewise product of quasi-actions on the Cartesian product of carriers.

    Points are encoded in mixed radix with the first factor most significant.
    """
    if not tables:
        raise KeyDomainMismatch("a product needs at least one factor")
    if len(tables) == 1:
        return tables[0]
    keys = set(tables[0].entries)
    for i, table in enumerate(tables[1:], start=1):
        if set(table.entries) != keys:
            raise KeyDomainMismatch(f"factor {i} has a different key domain from factor 0")

    sizes = tuple(t.carrier_size for t in tables)
    total = math.prod(sizes)
    budget = carrier_budget if carrier_budget is not None else DEFAULT_BUDGET["carrier"]
    if total > budget:
        raise CarrierBudgetExceeded(f"product carrier has {total} points, budget is {budget}")

    coords = np.unravel_index(np.arange(total), sizes)
    entries = {}
    for g in keys:
        images = tuple(t.entries[g].image[c] for t, c in zip(tables, coords))
        entries[g] = Permutation(np.ravel_multi_index(images, sizes))
    logger.debug("product of %d quasi-actions on %d points", len(tables), total)
    return QuasiActionTable(total, entries)


def _random_cycle(size: int, support: int, rng: np.random.Generator) -> Permutation:
    points = rng.choice(size, size=support, replace=False)
    image = np.arange(size)
    image[points] = np.roll(points, -1)
    return Permutation(image)


def degrade(
    table: QuasiActionTable,
    delta: RationalLike,
    seed: int,
    group: GroupOracle,
) -> QuasiActionTable:
    """
    Perturb a table by a controlled amount, keeping conditions (a)-(c).

    Each key pair {g, g⁻¹} with g ≠ g⁻¹ and ϕ(g) fixed-point free gets ϕ(g)
    post-composed with a random cycle on max(2, ⌈δ·m⌉) points and ϕ(g⁻¹)
    reset to the inverse. A perturbation that creates a fixed point is
    redrawn from a fresh derived seed.

    Raises:
        CannotPreserveFixedpointFreeness: a pair still has a fixed point after
            every attempt
    """
    delta = parse_rational(delta)
    if not 0 <= delta < 1:
        raise ValueError(f"degradation fraction must lie in [0, 1), got {format_rational(delta)}")
    if delta == 0:
        return table
    m = table.carrier_size
    support = min(m, max(2, math.ceil(delta * m)))
    if m < 2:
        raise CannotPreserveFixedpointFreeness("a one-point carrier admits no perturbation")

    pairs = []
    seen = set()
    for g in table.keys():
        inv = group.inverse(g)
        if inv == g or g in seen or inv not in table.entries:
            continue
        seen.update((g, inv))
        if table.entries[g].fixed_points().size == 0:
            pairs.append((g, inv))

    entries = dict(table.entries)
    seeds = spawn_seeds(seed, len(pairs))
    for (g, inv), pair_seed in zip(pairs, seeds):
        for attempt, attempt_seed in enumerate(spawn_seeds(pair_seed, DEGRADE_ATTEMPTS)):
            cycle = _random_cycle(m, support, make_rng(attempt_seed))
            candidate = table.entries[g].then(cycle)
            if candidate.fixed_points().size == 0:
                break
            logger.debug("degrade: key %r attempt %d created a fixed point", g, attempt)
        else:
            raise CannotPreserveFixedpointFreeness(
                f"key {g!r} kept a fixed point after {DEGRADE_ATTEMPTS} attempts (support {support} of {m})"
            )
        entries[g] = candidate
        entries[inv] = candidate.inverse()
    logger.info("degraded %d key pairs with support %d of %d points", len(pairs), support, m)
    return QuasiActionTable(m, entries)


def shift_action(carrier: int, reach: int) -> Tuple[QuasiActionTable, IntegerGroup]:
    """The integers acting on Z/carrier by shifts, over keys -reach..reach."""
    points = np.arange(carrier)
    entries = {j: Permutation((points + j) % carrier) for j in range(-reach, reach + 1)}
    return QuasiActionTable(carrier, entries), IntegerGroup()


def identity_table(carrier: int, keys: Iterable[Key]) -> QuasiActionTable:
    return QuasiActionTable(carrier, {g: identity_permutation(carrier) for g in keys})


class WitnessMember(NamedTuple):
    F: Sequence[Key]
    epsilon: RationalLike
    table: QuasiActionTable
    group: GroupOracle


@dataclass
class WitnessReport:
    reports: List[ConditionReport]
    failing: List[int]

    @property
    def passed(self) -> bool:
        return not self.failing


def is_sofic_witness(family: Iterable[WitnessMember]) -> WitnessReport:
    """
    Check a family of (F, ε, ϕ) approximations: each member must be a special
    (F, ε)-quasi-action. Failing members are reported by position.
    """
    reports = [verify_special(m.table, m.F, m.epsilon, m.group) for m in family]
    return WitnessReport(reports, [i for i, r in enumerate(reports) if not r.passed])


def table_from_json(data: Mapping[str, Any]) -> QuasiActionTable:
    """Read {"carrier": m, "entries": [{"key": k, "image": [...]}, ...]} with integer keys."""
    carrier = int(data["carrier"])
    entries = {}
    for item in data["entries"]:
        key = int(item["key"])
        if key in entries:
            raise KeyDomainMismatch(f"key {key} appears twice")
        entries[key] = Permutation.from_sequence(item["image"])
    return QuasiActionTable(carrier, entries)


def table_to_json(table: QuasiActionTable) -> Dict[str, Any]:
    return {
        "carrier": table.carrier_size,
        "entries": [{"key": render_key(g), "image": table.entries[g].image.tolist()} for g in table.keys()],
    }
