"""Controlled distractor discovery for multi-image grounding tasks.

For every expression we look for images that are visually plausible but
provably wrong, graded by how much they share with the target: nothing of
the target's category, the category alone, the category with the described
attributes, or all mentioned categories without the described relations.
Every distractor image must contain no region at all that satisfies the
expression's reasoning tree, so the target stays the unique ground truth
across the whole task instance.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping

from .errors import SchemaViolation
from .expression import ExpressionRecord
from .reasoning import (
    EDGE_RELATION,
    EDGE_SAME,
    LogicForm,
    ReasoningTree,
    TreeEdge,
    match,
    tree_categories,
)
from .scene_graph import BoundingBox, Corpus, SceneGraph

DEFAULT_PER_TYPE = 3


class DistractorType(str, Enum):
    """How a distracting image relates to the expression's content."""

    DIFF_CAT = "DiffCat"
    CAT = "Cat"
    CAT_ATTR = "CatAttr"
    CAT_CAT = "CatCat"


# When one image qualifies for several types, the scan assigns it to the most
# specific unfilled slot, in this order.
_ASSIGNMENT_PRIORITY = (
    DistractorType.CAT_CAT,
    DistractorType.CAT_ATTR,
    DistractorType.CAT,
    DistractorType.DIFF_CAT,
)


def _relation_hop(graph: SceneGraph, subject_id: str, edge: TreeEdge,
                  extension: TreeEdge | None = None) -> bool:
    """Category-level realization of one relation edge (attributes ignored)."""
    for rel in graph.out_edges(subject_id):
        if rel.predicate != edge.predicate:
            continue
        child = graph.node(rel.object)
        if child.category != edge.child.category:
            continue
        if extension is None or _relation_hop(graph, child.id, extension):
            return True
    return False


def _same_hop(graph: SceneGraph, obj_id: str, edge: TreeEdge,
              lexicon: Mapping[str, str] | None) -> bool:
    """Category-level realization of a same-attribute edge (no exclusivity)."""
    if lexicon is None:
        return False
    obj = graph.node(obj_id)
    for peer in graph.nodes_of_category(edge.child.category):
        if peer.id == obj_id:
            continue
        if any(value in peer.attribute_set and lexicon.get(value) == edge.category
               for value in obj.attributes):
            return True
    return False


def skeleton_realized(tree: ReasoningTree, graph: SceneGraph,
                      lexicon: Mapping[str, str] | None = None) -> bool:
    """Does any object realize the tree's category-and-relation skeleton?

    Attributes, ordering, and negations are stripped; only the object
    categories and the relational structure count.  Trees without any
    relational structure realize nothing, so for them this is always False.
    """
    if not tree.edges:
        return False
    for obj in graph.nodes_of_category(tree.root.category):
        hits = []
        for edge in tree.edges:
            if edge.kind == EDGE_RELATION:
                extension = tree.chain_extension if tree.form is LogicForm.CHAIN else None
                hits.append(_relation_hop(graph, obj.id, edge, extension))
            elif edge.kind == EDGE_SAME:
                hits.append(_same_hop(graph, obj.id, edge, lexicon))
        satisfied = any(hits) if tree.form is LogicForm.OR else all(hits)
        if satisfied:
            return True
    return False


def _structural_ok(dtype: DistractorType, graph: SceneGraph, expr: ExpressionRecord,
                   lexicon: Mapping[str, str] | None) -> bool:
    """The per-type condition on image content, excluding the no-match check."""
    tree = expr.tree
    category_objects = graph.nodes_of_category(tree.root.category)
    if dtype is DistractorType.DIFF_CAT:
        return not category_objects
    if not category_objects:
        return False
    if dtype is DistractorType.CAT:
        return True
    if dtype is DistractorType.CAT_ATTR:
        wanted = set(tree.root.attributes)
        return any(wanted <= obj.attribute_set for obj in category_objects)
    # CatCat: every mentioned category present, relational skeleton unrealized.
    for category in tree_categories(tree):
        if not graph.nodes_of_category(category):
            return False
    return not skeleton_realized(tree, graph, lexicon)


def type_predicate(dtype: DistractorType, graph: SceneGraph, expr: ExpressionRecord,
                   lexicon: Mapping[str, str] | None = None) -> bool:
    """Is this image a valid distractor of the given type for this expression?

    All four types additionally demand that no region of the image satisfies
    the expression's tree, which keeps the target unique across the instance.
    """
    if not _structural_ok(dtype, graph, expr, lexicon):
        return False
    return not match(expr.tree, graph, lexicon)


@dataclass
class TaskInstance:
    """An expression plus its candidate image pool for evaluation.

    ``candidate_regions`` holds every ground-truth region of the target image
    and of each distractor image; exactly one region in the whole pool (the
    target) satisfies the expression's tree.
    """

    expression: ExpressionRecord
    target_image: str
    distractors: dict[DistractorType, tuple[str, ...]]
    candidate_regions: dict[str, tuple[tuple[str, BoundingBox], ...]]

    @property
    def images(self) -> tuple[str, ...]:
        ordered = [self.target_image]
        for dtype in DistractorType:
            ordered.extend(self.distractors[dtype])
        return tuple(ordered)

    def to_jsonable(self) -> dict:
        return {
            "expression": self.expression.to_jsonable(),
            "target_image": self.target_image,
            "distractors": {dtype.value: list(ids) for dtype, ids in self.distractors.items()},
            "candidate_regions": {
                image_id: [[obj_id, box.to_jsonable()] for obj_id, box in regions]
                for image_id, regions in self.candidate_regions.items()
            },
        }

    @classmethod
    def from_jsonable(cls, data: Mapping) -> "TaskInstance":
        for key in ("expression", "target_image", "distractors", "candidate_regions"):
            if key not in data:
                raise SchemaViolation(f"task instance missing {key!r}")
        try:
            distractors = {
                DistractorType(name): tuple(ids)
                for name, ids in data["distractors"].items()
            }
        except (ValueError, AttributeError) as exc:
            raise SchemaViolation(f"bad distractor map: {exc}") from exc
        missing = set(DistractorType) - set(distractors)
        if missing:
            raise SchemaViolation(f"distractor map missing types {sorted(t.value for t in missing)}")
        regions = {}
        for image_id, raw in data["candidate_regions"].items():
            regions[image_id] = tuple(
                (obj_id, BoundingBox.from_jsonable(box)) for obj_id, box in raw
            )
        return cls(
            expression=ExpressionRecord.from_jsonable(data["expression"]),
            target_image=data["target_image"],
            distractors=distractors,
            candidate_regions=regions,
        )


def _scan(
    corpus: Corpus,
    expr: ExpressionRecord,
    per_type: int,
    lexicon: Mapping[str, str] | None,
) -> dict[DistractorType, list[str]]:
    """Greedy single pass in ascending image-id order, one slot per image."""
    target_image = expr.image_id
    category_images = corpus.images_with_category(expr.tree.root.category)
    slots: dict[DistractorType, list[str]] = {dtype: [] for dtype in DistractorType}
    for image_id in corpus.image_ids:
        if image_id == target_image:
            continue
        if all(len(ids) >= per_type for ids in slots.values()):
            break
        graph = corpus.graphs[image_id]
        has_category = image_id in category_images
        for dtype in _ASSIGNMENT_PRIORITY:
            if len(slots[dtype]) >= per_type:
                continue
            # Cheap category screen before any matching work.
            if (dtype is DistractorType.DIFF_CAT) == has_category:
                continue
            if not _structural_ok(dtype, graph, expr, lexicon):
                continue
            # Common to every type: no region may satisfy the tree.
            if not match(expr.tree, graph, lexicon):
                slots[dtype].append(image_id)
            break
    return slots


def find_distractors(
    corpus: Corpus,
    expr: ExpressionRecord,
    per_type: int = DEFAULT_PER_TYPE,
    lexicon: Mapping[str, str] | None = None,
) -> TaskInstance | None:
    """Scan the corpus for ``per_type`` distractors of each type.

    Images are visited in ascending image-id order, the target image is
    skipped, and each image fills at most one slot (the most specific type it
    qualifies for that still has room).  The scan is purely deterministic: no
    randomness is involved.  Returns None when any type comes up short; a
    short instance is discarded rather than padded.
    """
    slots = _scan(corpus, expr, per_type, lexicon)
    if any(len(ids) < per_type for ids in slots.values()):
        return None
    instance_images = [expr.image_id]
    for dtype in DistractorType:
        instance_images.extend(slots[dtype])
    regions = {
        image_id: tuple((node.id, node.box) for node in corpus.graphs[image_id].nodes)
        for image_id in instance_images
    }
    return TaskInstance(
        expression=expr,
        target_image=expr.image_id,
        distractors={dtype: tuple(ids) for dtype, ids in slots.items()},
        candidate_regions=regions,
    )


def missing_counts(
    corpus: Corpus,
    expr: ExpressionRecord,
    per_type: int = DEFAULT_PER_TYPE,
    lexicon: Mapping[str, str] | None = None,
) -> dict[DistractorType, int]:
    """How many distractors each type is short by; all zeros means viable."""
    slots = _scan(corpus, expr, per_type, lexicon)
    return {dtype: max(0, per_type - len(ids)) for dtype, ids in slots.items()}
