"""
Utility functions for soficlab: exact rationals, seeding and budgets.
"""

import json
import os
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from soficlab.errors import SchemaError

BUDGET_ENV_VAR = "SOFICLAB_BUDGET"

# Enumeration caps. bfs_moves=None means 4*N*n at construction time.
DEFAULT_BUDGET: Dict[str, Optional[int]] = {
    "effective_points": 10**6,
    "samples": 10**5,
    "f_size": 20000,
    "carrier": 10**7,
    "table_cells": 10**6,
    "bfs_moves": None,
}

RationalLike = Union[str, int, Fraction]


def parse_rational(value: RationalLike) -> Fraction:
    """
    Parse an exact rational from a "p/q" string, an integer or a Fraction.

    Floats are refused: they would smuggle rounding into exact defects.

    Args:
        value: "p/q" or "n" string, int or Fraction

    Returns:
        Fraction: the parsed value
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise ValueError(f"rationals must be given as 'p/q' strings, not {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "." in text or "e" in text.lower():
            raise ValueError(f"rational {value!r} must be written as 'p/q'")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse rational {value!r}") from exc
    raise ValueError(f"cannot parse rational {value!r}")


def format_rational(value: Fraction) -> str:
    """Serialize a rational as "p/q", always with a denominator ("0/1")."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def spawn_seeds(seed: int, count: int) -> List[int]:
    """
    Derive `count` independent child seeds from one seed.

    Uses numpy's SeedSequence so the derivation is deterministic and the
    children do not overlap.
    """
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(child.generate_state(1)[0]) for child in children]


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed))


def parse_budget_override(text: str) -> Dict[str, Optional[int]]:
    """
    Parse the SOFICLAB_BUDGET syntax: a JSON object or `key=value,key=value`.
    """
    text = text.strip()
    if not text:
        return {}
    if text.startswith("{"):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{BUDGET_ENV_VAR} is not valid JSON: {exc}", "/budget") from exc
        if not isinstance(raw, dict):
            raise SchemaError(f"{BUDGET_ENV_VAR} must be a JSON object", "/budget")
    else:
        raw = {}
        for item in text.split(","):
            if "=" not in item:
                raise SchemaError(f"{BUDGET_ENV_VAR} entry {item!r} is not key=value", "/budget")
            key, _, value = item.partition("=")
            raw[key.strip()] = None if value.strip().lower() in ("none", "null") else value.strip()
    parsed: Dict[str, Optional[int]] = {}
    for key, value in raw.items():
        if key not in DEFAULT_BUDGET:
            raise SchemaError(f"unknown budget field {key!r}", f"/budget/{key}")
        if value is None:
            parsed[key] = None
            continue
        try:
            parsed[key] = int(value)
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"budget field {key!r} must be an integer", f"/budget/{key}") from exc
        if parsed[key] < 1:
            raise SchemaError(f"budget field {key!r} must be positive", f"/budget/{key}")
    return parsed


def resolve_budget(overrides: Optional[Dict[str, Optional[int]]] = None) -> Dict[str, Optional[int]]:
    """
    Merge budget layers: defaults, then config overrides, then the environment.

    Args:
        overrides: Optional budget fields from a config file.

    Returns:
        dict: a complete budget mapping
    """
    budget = dict(DEFAULT_BUDGET)
    if overrides:
        budget.update({k: v for k, v in overrides.items() if k in DEFAULT_BUDGET})
    env = os.environ.get(BUDGET_ENV_VAR)
    if env:
        budget.update(parse_budget_override(env))
    return budget


def load_json(path: Union[str, Path]) -> Any:
    """Read a JSON document from disk."""
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def write_json(data: Any, path: Union[str, Path]) -> Path:
    """Write a JSON document, creating parent directories as needed."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=False)
        fh.write("\n")
    return path
