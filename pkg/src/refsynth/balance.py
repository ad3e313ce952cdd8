"""Dataset balancing, filtering, splitting, and descriptive statistics.

Relation sampling weights are inversely proportional to corpus frequency so
that rare, contentful predicates get picked over the handful of spatial ones
that dominate raw scene graphs.  Expressions whose evidence is purely
spatial are dropped outright.  Splits are taken at the image level so no
image leaks across partitions.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .distractor import TaskInstance
from .errors import ConfigError, EmptyCorpus, EmptyInput
from .expression import ExpressionRecord
from .reasoning import EDGE_RELATION, LogicForm, ReasoningTree
from .scene_graph import Corpus
from .util import weighted_choice

DEFAULT_SPATIAL_RELATIONS = frozenset({
    "to the left of",
    "to the right of",
    "above",
    "below",
    "behind",
    "in front of",
    "near",
})

DEFAULT_SPLIT_RATIOS = (0.8, 0.11, 0.09)


@dataclass
class RelationWeights:
    """Per-predicate sampling weights, proportional to inverse frequency.

    ``weights[p] = K / frequencies[p]`` with one global constant K chosen so
    the full map sums to 1; sampling over a candidate subset renormalizes on
    the fly.
    """

    weights: dict[str, float]
    frequencies: dict[str, int]

    def sample(self, rng: random.Random, candidates: Sequence[str] | None = None) -> str:
        pool = list(self.weights if candidates is None else candidates)
        if not pool:
            raise EmptyInput("no candidate predicates to sample from")
        return weighted_choice(rng, pool, [self.weights.get(p, 0.0) for p in pool])


def relation_weights(corpus: Corpus) -> RelationWeights:
    """Inverse-frequency weights over every predicate in the corpus."""
    frequencies: Counter[str] = Counter()
    for graph in corpus.graphs.values():
        for edge in graph.edges:
            frequencies[edge.predicate] += 1
    if not frequencies:
        raise EmptyCorpus("corpus has no relations to weight")
    raw = {p: 1.0 / n for p, n in frequencies.items()}
    total = sum(raw.values())
    return RelationWeights(
        weights={p: w / total for p, w in sorted(raw.items())},
        frequencies=dict(sorted(frequencies.items())),
    )


def is_spatial_only(tree: ReasoningTree, spatial: Iterable[str] = DEFAULT_SPATIAL_RELATIONS) -> bool:
    """True when every relation edge is spatial and the form adds no other evidence.

    Order, same, and not trees carry non-relational evidence (rank, shared
    attribute, negation), so they are never spatial-only regardless of any
    attached edge.
    """
    if tree.form in (LogicForm.ORDER, LogicForm.SAME, LogicForm.NOT):
        return False
    spatial = frozenset(spatial)
    edges = [e for e in tree.edges if e.kind == EDGE_RELATION]
    if tree.chain_extension is not None:
        edges.append(tree.chain_extension)
    return all(e.predicate in spatial for e in edges)


def split(
    instances: Sequence[TaskInstance],
    ratios: tuple[float, float, float] = DEFAULT_SPLIT_RATIOS,
    seed: int = 0,
) -> tuple[list[TaskInstance], list[TaskInstance], list[TaskInstance]]:
    """Partition instances into train/val/test by target image.

    All instances of one image land in the same partition.  Image membership
    is decided by a seeded shuffle plus ratio rounding, so partition sizes in
    images are within one of the exact ratios and the split is reproducible
    from the seed alone.
    """
    if len(ratios) != 3 or any(r <= 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigError(f"split ratios must be three positive numbers summing to 1, got {ratios}")
    images = sorted({inst.target_image for inst in instances})
    rng = random.Random(seed)
    rng.shuffle(images)
    n = len(images)
    first = round(n * ratios[0])
    second = round(n * (ratios[0] + ratios[1]))
    assignment: dict[str, int] = {}
    for i, image_id in enumerate(images):
        assignment[image_id] = 0 if i < first else (1 if i < second else 2)
    parts: tuple[list[TaskInstance], ...] = ([], [], [])
    for inst in instances:
        parts[assignment[inst.target_image]].append(inst)
    return parts


@dataclass
class DatasetStats:
    """Descriptive statistics over a corpus and the tasks built from it."""

    image_count: int
    region_count: int
    category_count: int
    attribute_count: int
    relation_count: int
    expression_count: int
    avg_expression_length: float | None
    vocab_size: int
    per_form: dict[str, int]
    avg_candidates: float | None
    avg_same_category_candidates: float | None
    top_categories: list[tuple[str, int]]
    top_attributes: list[tuple[str, int]]
    top_relations: list[tuple[str, int]]

    def to_jsonable(self) -> dict:
        return {
            "image_count": self.image_count,
            "region_count": self.region_count,
            "category_count": self.category_count,
            "attribute_count": self.attribute_count,
            "relation_count": self.relation_count,
            "expression_count": self.expression_count,
            "avg_expression_length": self.avg_expression_length,
            "vocab_size": self.vocab_size,
            "per_form": self.per_form,
            "avg_candidates": self.avg_candidates,
            "avg_same_category_candidates": self.avg_same_category_candidates,
            "top_categories": [list(x) for x in self.top_categories],
            "top_attributes": [list(x) for x in self.top_attributes],
            "top_relations": [list(x) for x in self.top_relations],
        }


def expression_length(text: str) -> int:
    """Whitespace token count; the terminal period rides on its word."""
    return len(text.split())


def compute_stats(
    corpus: Corpus | None = None,
    expressions: Sequence[ExpressionRecord] = (),
    instances: Sequence[TaskInstance] = (),
    top_k: int = 20,
) -> DatasetStats:
    """Aggregate statistics; any of the three inputs may be omitted.

    Raises EmptyInput when nothing at all was provided.  Expression-level
    numbers fall back to the expressions embedded in instances when no
    separate expression list is given.  Candidate counts need instances;
    same-category candidate counts additionally need the corpus.
    """
    if (corpus is None or not corpus.graphs) and not expressions and not instances:
        raise EmptyInput("nothing to compute statistics over")

    image_count = region_count = 0
    categories: Counter[str] = Counter()
    attributes: Counter[str] = Counter()
    relations: Counter[str] = Counter()
    if corpus is not None:
        image_count = len(corpus.graphs)
        for graph in corpus.graphs.values():
            region_count += len(graph.nodes)
            for node in graph.nodes:
                categories[node.category] += 1
                attributes.update(node.attributes)
            for edge in graph.edges:
                relations[edge.predicate] += 1

    records = list(expressions) if expressions else [inst.expression for inst in instances]
    per_form: Counter[str] = Counter(r.form.value for r in records)
    vocabulary = {surface for r in records for surface, _ in r.tokens}
    avg_len = (
        sum(expression_length(r.text) for r in records) / len(records) if records else None
    )

    avg_candidates = avg_same_category = None
    if instances:
        totals = [
            sum(len(regions) for regions in inst.candidate_regions.values())
            for inst in instances
        ]
        avg_candidates = sum(totals) / len(instances)
        if corpus is not None:
            same_totals = []
            for inst in instances:
                target_category = inst.expression.tree.root.category
                count = 0
                for image_id in inst.candidate_regions:
                    count += len(corpus.graphs[image_id].nodes_of_category(target_category))
                same_totals.append(count)
            avg_same_category = sum(same_totals) / len(instances)

    def top(counter: Counter[str]) -> list[tuple[str, int]]:
        return sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]

    return DatasetStats(
        image_count=image_count,
        region_count=region_count,
        category_count=len(categories),
        attribute_count=len(attributes),
        relation_count=len(relations),
        expression_count=len(records),
        avg_expression_length=avg_len,
        vocab_size=len(vocabulary),
        per_form=dict(sorted(per_form.items())),
        avg_candidates=avg_candidates,
        avg_same_category_candidates=avg_same_category,
        top_categories=top(categories),
        top_attributes=top(attributes),
        top_relations=top(relations),
    )


def format_stats_table(stats: DatasetStats) -> str:
    """Human-readable rendering of the headline numbers and top-k lists."""
    lines = [
        f"{'images':<28}{stats.image_count}",
        f"{'regions':<28}{stats.region_count}",
        f"{'categories':<28}{stats.category_count}",
        f"{'attributes':<28}{stats.attribute_count}",
        f"{'relations':<28}{stats.relation_count}",
        f"{'expressions':<28}{stats.expression_count}",
    ]
    if stats.avg_expression_length is not None:
        lines.append(f"{'avg expression length':<28}{stats.avg_expression_length:.2f}")
    lines.append(f"{'vocabulary':<28}{stats.vocab_size}")
    if stats.avg_candidates is not None:
        lines.append(f"{'avg candidates':<28}{stats.avg_candidates:.1f}")
    if stats.avg_same_category_candidates is not None:
        lines.append(f"{'avg same-category cands':<28}{stats.avg_same_category_candidates:.1f}")
    for title, pairs in (
        ("top categories", stats.top_categories),
        ("top attributes", stats.top_attributes),
        ("top relations", stats.top_relations),
    ):
        if pairs:
            lines.append(f"{title}:")
            lines.extend(f"  {name:<26}{count}" for name, count in pairs)
    if stats.per_form:
        lines.append("expressions per form:")
        lines.extend(f"  {form:<26}{count}" for form, count in sorted(stats.per_form.items()))
    return "\n".join(lines)
