"""Hard-negative mining over modular region embeddings.

Region scorers in this setting decompose an embedding into three modules
(subject appearance, location, relationship context).  Training alternates
between a plain ranking objective over in-batch negatives and a mined
objective that, for each module, draws a same-category region whose module
embedding is close to the target's.  Closeness is turned into a sampling
distribution with a softmax over cosine similarities, recomputed on a fixed
refresh schedule as the embeddings drift during training.

Everything here is pure numeric bookkeeping on numpy arrays and float
scores; no model or autograd framework is involved.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import IO, Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DataError,
    DimensionMismatch,
    KeyMismatch,
    NoPeers,
    ZeroNorm,
    EmptyInput,
)

MODULE_NAMES = ("subject", "location", "relation")
DEFAULT_MARGIN = 0.1
DEFAULT_MINE_WEIGHT = 1.0
DEFAULT_REFRESH_INTERVAL = 50


@dataclass
class ModularEmbedding:
    """One region's embedding, split into named module vectors."""

    region_id: str
    category: str
    modules: dict[str, np.ndarray]

    def __post_init__(self) -> None:
        if not self.modules:
            raise DataError(f"region {self.region_id} has no module vectors")
        converted = {}
        for name, vector in self.modules.items():
            arr = np.asarray(vector, dtype=float)
            if arr.ndim != 1 or arr.size == 0:
                raise DimensionMismatch(
                    f"module {name!r} of region {self.region_id} must be a non-empty vector"
                )
            converted[name] = arr
        self.modules = converted

    def to_jsonable(self) -> dict:
        return {
            "category": self.category,
            "modules": {k: self.modules[k].tolist() for k in sorted(self.modules)},
            "region_id": self.region_id,
        }

    @classmethod
    def from_jsonable(cls, data: Mapping) -> "ModularEmbedding":
        try:
            return cls(
                region_id=str(data["region_id"]),
                category=str(data["category"]),
                modules={str(k): np.asarray(v, dtype=float) for k, v in data["modules"].items()},
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed embedding record: {exc}") from exc


def write_embeddings(embeddings: Iterable[ModularEmbedding], sink: IO) -> int:
    """Serialize embeddings as JSON lines; returns the line count."""
    count = 0
    for emb in embeddings:
        sink.write(json.dumps(emb.to_jsonable(), sort_keys=True) + "\n")
        count += 1
    return count


def read_embeddings(source: IO) -> list[ModularEmbedding]:
    out = []
    for lineno, line in enumerate(source, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"embeddings line {lineno} is not valid JSON") from exc
        out.append(ModularEmbedding.from_jsonable(payload))
    return out


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Plain cosine; rejects mismatched shapes and zero-length vectors."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"vector shapes differ: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ZeroNorm("cosine similarity of a zero vector is undefined")
    return float(np.dot(a, b) / (na * nb))


def softmax_row(values: np.ndarray) -> np.ndarray:
    """Standard softmax of a 1-D array, stabilized by max subtraction."""
    values = np.asarray(values, dtype=float)
    shifted = values - values.max()
    exp = np.exp(shifted)
    return exp / exp.sum()


@dataclass
class ProbabilityBlock:
    """Sampling rows for one (category, module) group of regions."""

    region_ids: tuple[str, ...]
    rows: np.ndarray

    def row_for(self, index: int) -> np.ndarray:
        return self.rows[index]


@dataclass
class SamplingTable:
    """Softmax-over-cosine sampling distributions, per category and module.

    Row i of a block holds, for region i, the probability of drawing each
    same-category peer as its hard negative for that module; the self entry
    is zero.  The epoch counter records which refresh produced the table.
    """

    blocks: dict[tuple[str, str], ProbabilityBlock]
    index: dict[str, tuple[str, int]]
    module_names: tuple[str, ...]
    epoch: int = 0

    def peers_of(self, region_id: str) -> tuple[str, ...]:
        if region_id not in self.index:
            raise KeyMismatch(f"region {region_id!r} is not in the sampling table")
        category, position = self.index[region_id]
        block = self.blocks[(category, self.module_names[0])]
        return tuple(r for i, r in enumerate(block.region_ids) if i != position)

    def sample(self, rng: random.Random, region_id: str, module: str) -> str:
        """Draw one hard-negative peer for a region under one module."""
        if region_id not in self.index:
            raise KeyMismatch(f"region {region_id!r} is not in the sampling table")
        if module not in self.module_names:
            raise KeyMismatch(f"unknown module {module!r}")
        category, position = self.index[region_id]
        block = self.blocks[(category, module)]
        if len(block.region_ids) < 2:
            raise NoPeers(f"region {region_id!r} has no same-category peers")
        row = block.row_for(position)
        r = rng.random()
        acc = 0.0
        peer = block.region_ids[0]
        for i, prob in enumerate(row):
            if i == position:
                continue
            peer = block.region_ids[i]
            acc += float(prob)
            if r < acc:
                return peer
        return peer


def build_sampling_table(
    embeddings: Sequence[ModularEmbedding],
    module_names: Sequence[str] = MODULE_NAMES,
    epoch: int = 0,
) -> SamplingTable:
    """Compute every category's sampling rows from scratch.

    Within a category, module vectors are stacked and length-normalized;
    regions whose module vector has zero norm contribute zero similarity
    instead of blowing up, so one degenerate embedding cannot poison its
    whole category.  Each row is the softmax of the similarities to all
    peers, with the self entry forced to zero and the rest renormalized.
    """
    if not embeddings:
        raise EmptyInput("no embeddings to build a sampling table from")
    module_names = tuple(module_names)
    by_category: dict[str, list[ModularEmbedding]] = {}
    for emb in embeddings:
        for name in module_names:
            if name not in emb.modules:
                raise KeyMismatch(f"region {emb.region_id} lacks module {name!r}")
        by_category.setdefault(emb.category, []).append(emb)

    blocks: dict[tuple[str, str], ProbabilityBlock] = {}
    index: dict[str, tuple[str, int]] = {}
    for category in sorted(by_category):
        group = sorted(by_category[category], key=lambda e: e.region_id)
        ids = tuple(e.region_id for e in group)
        for position, emb in enumerate(group):
            if emb.region_id in index:
                raise DataError(f"duplicate region id {emb.region_id!r}")
            index[emb.region_id] = (category, position)
        n = len(group)
        for name in module_names:
            dims = {e.modules[name].shape[0] for e in group}
            if len(dims) > 1:
                raise DimensionMismatch(
                    f"module {name!r} of category {category!r} mixes dimensions {sorted(dims)}"
                )
            stacked = np.stack([e.modules[name] for e in group])
            norms = np.linalg.norm(stacked, axis=1, keepdims=True)
            safe = np.where(norms == 0.0, 1.0, norms)
            unit = stacked / safe
            sims = unit @ unit.T
            if n == 1:
                rows = np.zeros((1, 1))
            else:
                exp = np.exp(sims - sims.max(axis=1, keepdims=True))
                np.fill_diagonal(exp, 0.0)
                rows = exp / exp.sum(axis=1, keepdims=True)
            blocks[(category, name)] = ProbabilityBlock(region_ids=ids, rows=rows)
    return SamplingTable(blocks=blocks, index=index, module_names=module_names, epoch=epoch)


def sample_negatives(
    table: SamplingTable,
    rng: random.Random,
    region_id: str,
) -> dict[str, str]:
    """One hard-negative region per module for the given target region."""
    return {name: table.sample(rng, region_id, name) for name in table.module_names}


def should_refresh(iteration: int, interval: int = DEFAULT_REFRESH_INTERVAL) -> bool:
    """Tables are rebuilt on every interval-th iteration, but not at start."""
    if interval <= 0:
        raise DataError(f"refresh interval must be positive, got {interval}")
    return iteration > 0 and iteration % interval == 0


def hinge(value: float) -> float:
    return value if value > 0.0 else 0.0


def rank_loss(
    positive: float,
    negative_region: float,
    negative_expression: float,
    margin: float = DEFAULT_MARGIN,
) -> float:
    """Two-sided margin ranking loss over in-batch negatives.

    One hinge pushes the true pair above the same expression scored against
    another region, the other pushes it above another expression scored
    against the true region.  With all three scores equal the loss is exactly
    twice the margin.
    """
    return hinge(margin + negative_region - positive) + hinge(
        margin + negative_expression - positive
    )


def mine_loss(
    positive: float,
    mined_region_scores: Mapping[str, float],
    mined_expression_scores: Mapping[str, float],
    margin: float = DEFAULT_MARGIN,
    module_names: Sequence[str] = MODULE_NAMES,
) -> float:
    """Margin loss against per-module mined negatives, two hinges per module.

    Each module contributes one hinge for its mined negative region and one
    for that region's own expression scored against the true region.  Three
    modules make six hinges, so all-equal scores give six times the margin.
    """
    expected = set(module_names)
    if set(mined_region_scores) != expected or set(mined_expression_scores) != expected:
        raise KeyMismatch(
            f"mined scores must cover exactly the modules {sorted(expected)}, got "
            f"{sorted(mined_region_scores)} and {sorted(mined_expression_scores)}"
        )
    total = 0.0
    for name in module_names:
        total += hinge(margin + mined_region_scores[name] - positive)
        total += hinge(margin + mined_expression_scores[name] - positive)
    return total


def total_loss(
    rank: float,
    mined: float,
    mine_weight: float = DEFAULT_MINE_WEIGHT,
) -> float:
    """Combined training objective: ranking term plus weighted mined term."""
    return rank + mine_weight * mined
