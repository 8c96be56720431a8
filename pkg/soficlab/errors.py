"""
Exception hierarchy for soficlab.

Every error raised by the library derives from SoficLabError, which is a
ValueError so that callers catching ValueError keep working.
"""

from typing import Any, Optional, Sequence


class SoficLabError(ValueError):
    """Base class for all soficlab errors."""


# core_groups

class NotAGroup(SoficLabError):
    """A Cayley table failed a group axiom; `witness` names the offending indices."""

    def __init__(self, message: str, witness: Sequence[int] = ()):
        super().__init__(f"{message} (witness {tuple(witness)})" if witness else message)
        self.witness = tuple(witness)


class SizeMismatch(SoficLabError):
    pass


class SizeBudgetExceeded(SoficLabError):
    pass


class NotAPermutation(SoficLabError):
    """An image array that is not a bijection of 0..m-1; `image` keeps it."""

    def __init__(self, image: Sequence[int]):
        super().__init__(f"image {list(image)} is not a bijection")
        self.image = tuple(image)


# graph_products

class BadVertex(SoficLabError):
    pass


class BadElement(SoficLabError):
    pass


class ContextMismatch(SoficLabError):
    pass


class KMismatch(SoficLabError):
    pass


# quasi_actions

class MissingProductKey(SoficLabError):
    def __init__(self, g1: Any, g2: Any):
        super().__init__(f"product of {g1!r} and {g2!r} is not a key of the table")
        self.g1 = g1
        self.g2 = g2


class MissingInverseKey(SoficLabError):
    def __init__(self, g: Any):
        super().__init__(f"inverse of {g!r} is not a key of the table")
        self.g = g


class MissingKey(SoficLabError):
    def __init__(self, g: Any):
        super().__init__(f"{g!r} is not a key of the table")
        self.g = g


class KeyDomainMismatch(SoficLabError):
    pass


class CarrierBudgetExceeded(SoficLabError):
    pass


class CannotPreserveFixedpointFreeness(SoficLabError):
    pass


# ball_group

class RadiusExceeded(SoficLabError):
    def __init__(self, length: int, radius: int):
        super().__init__(f"word length {length} exceeds validity radius {radius}")
        self.length = length
        self.radius = radius


class BadGeneratorIndex(SoficLabError):
    pass


# sofic_builder

class InputAxiomViolation(SoficLabError):
    """An input quasi-action fails condition (a), (b) or (c) on its F_i."""

    def __init__(self, index: int, report: Any):
        super().__init__(f"input quasi-action {index} is not a special quasi-action: {report}")
        self.index = index
        self.report = report


class BudgetExceeded(SoficLabError):
    pass


class MissingProvenance(SoficLabError):
    pass


class UnregisteredClass(SoficLabError):
    pass


# bass_serre

class Disconnected(SoficLabError):
    pass


class BadTree(SoficLabError):
    pass


class BadRange(SoficLabError):
    pass


class MultipleEdges(SoficLabError):
    pass


class BadHomomorphism(SoficLabError):
    pass


# cli_harness

class SchemaError(SoficLabError):
    """Invalid configuration; `pointer` is a JSON pointer to the offending field."""

    def __init__(self, message: str, pointer: Optional[str] = None):
        super().__init__(f"{pointer}: {message}" if pointer else message)
        self.message = message
        self.pointer = pointer
