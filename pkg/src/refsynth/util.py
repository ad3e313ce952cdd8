"""Small shared helpers: deterministic rng derivation, weighted choice, ordinals."""

from __future__ import annotations

import hashlib
import random
from typing import Sequence, TypeVar

T = TypeVar("T")


def derive_rng(seed: int, *keys: object) -> random.Random:
    """Random stream keyed by (seed, *keys).

    Streams are independent of iteration order and worker layout, so any
    pipeline that keys its randomness this way produces identical output at
    any parallelism level.
    """
    material = "|".join([str(seed), *[str(k) for k in keys]])
    digest = hashlib.sha256(material.encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:16], "big"))


def hash_uniform(seed: int, *keys: object) -> float:
    """Deterministic pseudo-uniform draw in [0, 1) keyed by (seed, *keys)."""
    material = "|".join([str(seed), *[str(k) for k in keys]])
    digest = hashlib.sha256(material.encode("utf-8")).digest()
    return int.from_bytes(digest[:7], "big") / float(1 << 56)


def weighted_choice(rng: random.Random, items: Sequence[T], weights: Sequence[float]) -> T:
    """Pick one item with probability proportional to its weight."""
    if not items:
        raise ValueError("weighted_choice over an empty sequence")
    if len(items) != len(weights):
        raise ValueError("items and weights must have equal length")
    total = float(sum(weights))
    if total <= 0.0 or any(w < 0.0 for w in weights):
        raise ValueError("weights must be non-negative with a positive sum")
    r = rng.random() * total
    acc = 0.0
    for item, w in zip(items, weights):
        acc += w
        if r < acc:
            return item
    return items[-1]


_ORDINAL_WORDS = (
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh",
    "eighth", "ninth", "tenth", "eleventh", "twelfth", "thirteenth",
    "fourteenth", "fifteenth", "sixteenth", "seventeenth", "eighteenth",
    "nineteenth", "twentieth",
)


def ordinal_word(n: int) -> str:
    """English ordinal for a 1-based rank ("first", "second", ...)."""
    if n < 1:
        raise ValueError(f"ordinal rank must be >= 1, got {n}")
    if n <= len(_ORDINAL_WORDS):
        return _ORDINAL_WORDS[n - 1]
    if n % 100 in (11, 12, 13):
        return f"{n}th"
    suffix = {1: "st", 2: "nd", 3: "rd"}.get(n % 10, "th")
    return f"{n}{suffix}"
