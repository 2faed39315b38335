"""Weighted-multiset datasets over (prompt, response) pairs.

A dataset maps integer (prompt, response) keys to strictly positive
weights; membership is weight > 0, and entries whose weight reaches zero
are removed immediately, so there is never a tolerance question about
what "in the dataset" means.

Two arithmetic modes are supported and must never be mixed:

* ``rational`` -- weights are :class:`fractions.Fraction`; every algebraic
  identity (scaled unions, conditionals summing to one) holds exactly.
* ``float`` -- weights are 64-bit floats, for large sweeps.

Iteration over entries is always sorted by (prompt, response) id, so
results never depend on hash seeds.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Union

RATIONAL = "rational"
FLOAT = "float"
MODES = (RATIONAL, FLOAT)

#: Distinguished scale for weighted unions; only legal next to an empty
#: dataset (the "infinity times nothing is nothing" convention).
INFINITE = math.inf

Weight = Union[Fraction, float]
WeightLike = Union[Fraction, float, int]


class DatasetError(ValueError):
    """A dataset contract was violated (bad weight, mixed modes, ...)."""


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise DatasetError(f"unknown arithmetic mode {mode!r}; expected one of {MODES}")
    return mode


def coerce_weight(value: WeightLike, mode: str) -> Weight:
    """Coerce ``value`` into the weight type of ``mode``.

    Rational mode accepts ints and Fractions; a float is rejected because
    it silently carries the other mode's rounding. Float mode accepts
    ints and floats and rejects Fractions for the symmetric reason.
    """
    if isinstance(value, bool):
        raise DatasetError(f"bool is not a weight: {value!r}")
    if mode == RATIONAL:
        if isinstance(value, Fraction):
            return value
        if isinstance(value, int):
            return Fraction(value)
        raise DatasetError(
            f"rational mode requires int or Fraction weights, got {type(value).__name__}"
        )
    if isinstance(value, Fraction):
        raise DatasetError("float mode cannot accept Fraction weights")
    if isinstance(value, (int, float)):
        return float(value)
    raise DatasetError(f"not a weight: {value!r}")


class WeightedDataset:
    """Immutable multiset over (prompt, response) pairs with positive weights."""

    __slots__ = ("_mode", "_entries", "_prompt_totals", "_total")

    def __init__(
        self,
        entries: Mapping[tuple[int, int], WeightLike] | Iterable[tuple[tuple[int, int], WeightLike]] = (),
        mode: str = FLOAT,
    ):
        check_mode(mode)
        items = entries.items() if isinstance(entries, Mapping) else entries
        store: dict[tuple[int, int], Weight] = {}
        for key, raw in items:
            x, y = key
            w = coerce_weight(raw, mode)
            if w < 0:
                raise DatasetError(f"negative weight {raw!r} for {key!r}")
            if w == 0:
                continue
            store[(int(x), int(y))] = store.get((int(x), int(y)), _zero(mode)) + w
        prompt_totals: dict[int, Weight] = {}
        for (x, _), w in store.items():
            prompt_totals[x] = prompt_totals.get(x, _zero(mode)) + w
        self._mode = mode
        self._entries = store
        self._prompt_totals = prompt_totals
        self._total = sum(store.values(), _zero(mode))

    @classmethod
    def empty(cls, mode: str = FLOAT) -> "WeightedDataset":
        return cls((), mode)

    @property
    def mode(self) -> str:
        return self._mode

    def weight(self, x: int, y: int) -> Weight:
        """Stored weight of (x, y), or exact zero if absent."""
        return self._entries.get((x, y), _zero(self._mode))

    def conditional(self, x: int, y: int) -> Weight:
        """Fraction of prompt x's weight carried by response y; 0 if x absent."""
        denom = self._prompt_totals.get(x)
        if not denom:
            return _zero(self._mode)
        return self._entries.get((x, y), _zero(self._mode)) / denom

    def prompt_total(self, x: int) -> Weight:
        return self._prompt_totals.get(x, _zero(self._mode))

    def total(self) -> Weight:
        """Total weight, the dataset's size in the multiset sense."""
        return self._total

    def entries(self) -> Iterator[tuple[tuple[int, int], Weight]]:
        for key in sorted(self._entries):
            yield key, self._entries[key]

    def prompts(self) -> tuple[int, ...]:
        return tuple(sorted(self._prompt_totals))

    def responses_for(self, x: int) -> tuple[int, ...]:
        return tuple(y for (p, y) in sorted(self._entries) if p == x)

    def __len__(self) -> int:
        return len(self._entries)

    def __bool__(self) -> bool:
        return bool(self._entries)

    def __contains__(self, key: tuple[int, int]) -> bool:
        return key in self._entries

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeightedDataset):
            return NotImplemented
        return self._mode == other._mode and self._entries == other._entries

    def __hash__(self) -> int:
        return hash((self._mode, tuple(sorted(self._entries.items()))))

    def __repr__(self) -> str:
        return f"WeightedDataset({dict(sorted(self._entries.items()))!r}, mode={self._mode!r})"


def _zero(mode: str) -> Weight:
    return Fraction(0) if mode == RATIONAL else 0.0


def weight_of(dataset: WeightedDataset, x: int, y: int) -> Weight:
    """Multiplicity of (x, y) in the dataset (0 when absent)."""
    return dataset.weight(x, y)


def conditional(dataset: WeightedDataset, x: int, y: int) -> Weight:
    """Conditional response weight D(y | x); 0 when x carries no weight."""
    return dataset.conditional(x, y)


def _check_scale(scale: WeightLike, dataset: WeightedDataset, mode: str) -> Weight | None:
    """Validate a union scale; returns None for the INFINITE sentinel."""
    if isinstance(scale, float) and math.isinf(scale):
        if len(dataset) > 0:
            raise DatasetError(
                "INFINITE scale is only defined next to an empty dataset"
            )
        return None
    w = coerce_weight(scale, mode)
    if w < 0:
        raise DatasetError(f"negative scale {scale!r}")
    return w


def weighted_union(
    scale0: WeightLike,
    d0: WeightedDataset,
    scale1: WeightLike,
    d1: WeightedDataset,
) -> WeightedDataset:
    """Scaled multiset union: result(x,y) = scale0*d0(x,y) + scale1*d1(x,y).

    An INFINITE scale is accepted only when its dataset is empty, in which
    case the pair contributes nothing.
    """
    if d0.mode != d1.mode:
        raise DatasetError(f"mode mismatch: {d0.mode} vs {d1.mode}")
    mode = d0.mode
    lam0 = _check_scale(scale0, d0, mode)
    lam1 = _check_scale(scale1, d1, mode)
    merged: dict[tuple[int, int], Weight] = {}
    if lam0 is not None and lam0 != 0:
        for key, w in d0.entries():
            merged[key] = lam0 * w
    if lam1 is not None and lam1 != 0:
        for key, w in d1.entries():
            merged[key] = merged.get(key, _zero(mode)) + lam1 * w
    return WeightedDataset(merged, mode)


class PromptMultiset:
    """Multiset of prompts with non-negative integer counts."""

    __slots__ = ("_counts",)

    def __init__(self, counts: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        items = counts.items() if isinstance(counts, Mapping) else counts
        store: dict[int, int] = {}
        for x, c in items:
            if not isinstance(c, int) or isinstance(c, bool):
                raise DatasetError(f"prompt count must be an int, got {c!r}")
            if c < 0:
                raise DatasetError(f"negative prompt count {c} for {x}")
            if c == 0:
                continue
            store[int(x)] = store.get(int(x), 0) + c
        self._counts = store

    @classmethod
    def from_prompts(cls, prompts: Iterable[int]) -> "PromptMultiset":
        """One count per listed prompt (duplicates accumulate)."""
        return cls((x, 1) for x in prompts)

    def count(self, x: int) -> int:
        return self._counts.get(x, 0)

    def total(self) -> int:
        """Total count, |P| in the multiset sense."""
        return sum(self._counts.values())

    def distinct(self) -> tuple[int, ...]:
        return tuple(sorted(self._counts))

    def items(self) -> Iterator[tuple[int, int]]:
        for x in sorted(self._counts):
            yield x, self._counts[x]

    def __len__(self) -> int:
        return len(self._counts)

    def __bool__(self) -> bool:
        return bool(self._counts)

    def __contains__(self, x: int) -> bool:
        return x in self._counts

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PromptMultiset):
            return NotImplemented
        return self._counts == other._counts

    def __hash__(self) -> int:
        return hash(tuple(sorted(self._counts.items())))

    def __repr__(self) -> str:
        return f"PromptMultiset({dict(sorted(self._counts.items()))!r})"
