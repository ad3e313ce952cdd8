"""Scene-graph corpora: loading, validation, canonicalization, target filtering.

The on-disk format is a single JSON document mapping image ids to sized
images with named, boxed objects plus attribute lists and directed relations
(GQA-style scene-graph exports load directly).  Every category, attribute,
and relation term is canonicalized through a synonym table at load time, so
all downstream semantics operate on canonical vocabulary only.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import IO, Iterable, Mapping

from .errors import DanglingEdge, MalformedDocument, SchemaViolation

log = logging.getLogger(__name__)

DEFAULT_MIN_AREA_RATIO = 0.01
DEFAULT_CATEGORY_BLACKLIST = frozenset({"sky", "cloud"})


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned pixel box, (x, y) top-left corner."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self) -> None:
        if self.w <= 0 or self.h <= 0:
            raise SchemaViolation(f"box sides must be positive, got w={self.w} h={self.h}")
        if self.x < 0 or self.y < 0:
            raise SchemaViolation(f"box origin must be non-negative, got x={self.x} y={self.y}")

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def center_x(self) -> float:
        return self.x + self.w / 2.0

    def to_jsonable(self) -> dict:
        return {"x": self.x, "y": self.y, "w": self.w, "h": self.h}

    @classmethod
    def from_jsonable(cls, data: Mapping) -> "BoundingBox":
        try:
            return cls(x=data["x"], y=data["y"], w=data["w"], h=data["h"])
        except (KeyError, TypeError) as exc:
            raise SchemaViolation(f"bad bounding box record: {data!r}") from exc


@dataclass
class ObjectNode:
    """One annotated region: canonical category, attribute set, box."""

    id: str
    category: str
    attributes: tuple[str, ...]
    box: BoundingBox

    def __post_init__(self) -> None:
        # Attributes behave as a set: deduplicated, order-free, stored sorted
        # so that every downstream iteration and sample is deterministic.
        self.attributes = tuple(sorted(set(self.attributes)))

    @cached_property
    def attribute_set(self) -> frozenset[str]:
        return frozenset(self.attributes)


@dataclass(frozen=True)
class RelationEdge:
    """Directed relation: subject --predicate--> object."""

    subject: str
    predicate: str
    object: str

    def __post_init__(self) -> None:
        if self.subject == self.object:
            raise SchemaViolation(f"self-relation on object {self.subject!r} is not allowed")


@dataclass
class SceneGraph:
    """All objects and relations of one image.

    Nodes are kept sorted by object id and edges by (subject, predicate,
    object); the canonical ordering makes serialization round-trips exact
    and seeded sampling reproducible regardless of input key order.
    """

    image_id: str
    width: int
    height: int
    nodes: tuple[ObjectNode, ...]
    edges: tuple[RelationEdge, ...]

    def __post_init__(self) -> None:
        self.nodes = tuple(sorted(self.nodes, key=lambda n: n.id))
        self.edges = tuple(sorted(self.edges, key=lambda e: (e.subject, e.predicate, e.object)))

    @cached_property
    def node_by_id(self) -> dict[str, ObjectNode]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def _by_category(self) -> dict[str, tuple[ObjectNode, ...]]:
        grouped: dict[str, list[ObjectNode]] = {}
        for n in self.nodes:
            grouped.setdefault(n.category, []).append(n)
        return {c: tuple(ns) for c, ns in grouped.items()}

    @cached_property
    def _out_edges(self) -> dict[str, tuple[RelationEdge, ...]]:
        grouped: dict[str, list[RelationEdge]] = {}
        for e in self.edges:
            grouped.setdefault(e.subject, []).append(e)
        return {s: tuple(es) for s, es in grouped.items()}

    def node(self, object_id: str) -> ObjectNode:
        return self.node_by_id[object_id]

    def nodes_of_category(self, category: str) -> tuple[ObjectNode, ...]:
        return self._by_category.get(category, ())

    def out_edges(self, object_id: str) -> tuple[RelationEdge, ...]:
        return self._out_edges.get(object_id, ())

    def category_order(self, category: str) -> tuple[str, ...]:
        """Object ids of a category ordered left to right by box center.

        Ties on center x are broken by ascending object id.  The right-to-left
        ordering used elsewhere is defined as the exact reverse of this one,
        which keeps rank i from the left identical to rank k+1-i from the
        right even under ties.
        """
        ranked = sorted(self.nodes_of_category(category), key=lambda n: (n.box.center_x, n.id))
        return tuple(n.id for n in ranked)


@dataclass
class SynonymTable:
    """Canonical term -> surface synonym list; entry 0 is the canonical term.

    ``canonicalize`` maps any known surface form back to its canonical term
    and leaves unknown terms untouched, which makes it idempotent.
    """

    entries: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        normalized: dict[str, tuple[str, ...]] = {}
        reverse: dict[str, str] = {}
        for canonical, surfaces in self.entries.items():
            forms = tuple(surfaces)
            if not forms or forms[0] != canonical:
                forms = (canonical, *[s for s in forms if s != canonical])
            for surface in forms:
                prior = reverse.get(surface)
                if prior is not None and prior != canonical:
                    raise SchemaViolation(
                        f"synonym {surface!r} maps to both {prior!r} and {canonical!r}"
                    )
                reverse[surface] = canonical
            normalized[canonical] = forms
        self.entries = normalized
        self._reverse = reverse

    @classmethod
    def empty(cls) -> "SynonymTable":
        return cls({})

    def canonicalize(self, term: str) -> str:
        return self._reverse.get(term, term)

    def alternatives(self, term: str) -> tuple[str, ...]:
        """Non-canonical surface forms available for a canonical term."""
        return self.entries.get(term, (term,))[1:]

    def to_jsonable(self) -> dict:
        return {k: list(v) for k, v in sorted(self.entries.items())}


def load_synonyms(source: IO) -> SynonymTable:
    """Read a synonym table from a JSON map of canonical -> [surface, ...]."""
    try:
        data = json.load(source)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"synonym table is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaViolation("synonym table must be a JSON object")
    entries: dict[str, tuple[str, ...]] = {}
    for canonical, surfaces in data.items():
        if not isinstance(canonical, str) or not canonical:
            raise SchemaViolation(f"bad canonical term {canonical!r}")
        if not isinstance(surfaces, list) or not all(isinstance(s, str) and s for s in surfaces):
            raise SchemaViolation(f"synonyms of {canonical!r} must be a list of non-empty strings")
        entries[canonical] = tuple(surfaces)
    return SynonymTable(entries)


@dataclass
class Corpus:
    """A keyed collection of scene graphs plus a category occurrence index."""

    graphs: dict[str, SceneGraph]
    category_index: dict[str, tuple[tuple[str, str], ...]]

    @classmethod
    def build(cls, graphs: Mapping[str, SceneGraph]) -> "Corpus":
        ordered = {k: graphs[k] for k in sorted(graphs)}
        index: dict[str, list[tuple[str, str]]] = {}
        for image_id, graph in ordered.items():
            for node in graph.nodes:
                index.setdefault(node.category, []).append((image_id, node.id))
        return cls(graphs=ordered, category_index={c: tuple(v) for c, v in sorted(index.items())})

    @property
    def image_ids(self) -> tuple[str, ...]:
        return tuple(self.graphs)

    def images_with_category(self, category: str) -> frozenset[str]:
        return frozenset(img for img, _ in self.category_index.get(category, ()))

    def verify_index(self) -> None:
        """Recount the category index from the graphs; raise on divergence."""
        recount = Corpus.build(self.graphs).category_index
        if recount != self.category_index:
            raise SchemaViolation("category index diverges from graph contents")


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise SchemaViolation(message)


def _parse_graph(image_id: str, payload: Mapping, synonyms: SynonymTable) -> SceneGraph:
    _require(isinstance(payload, dict), f"image {image_id!r}: entry must be an object")
    for key in ("width", "height", "objects"):
        _require(key in payload, f"image {image_id!r}: missing {key!r}")
    width, height = payload["width"], payload["height"]
    _require(isinstance(width, int) and width > 0, f"image {image_id!r}: bad width {width!r}")
    _require(isinstance(height, int) and height > 0, f"image {image_id!r}: bad height {height!r}")
    raw_objects = payload["objects"]
    _require(isinstance(raw_objects, dict), f"image {image_id!r}: objects must be a map")

    nodes: list[ObjectNode] = []
    pending_edges: list[tuple[str, str, str]] = []
    for obj_id, raw in raw_objects.items():
        _require(isinstance(obj_id, str) and bool(obj_id), f"image {image_id!r}: bad object id {obj_id!r}")
        _require(isinstance(raw, dict), f"object {image_id!r}/{obj_id!r}: entry must be an object")
        for key in ("name", "x", "y", "w", "h"):
            _require(key in raw, f"object {image_id!r}/{obj_id!r}: missing {key!r}")
        name = raw["name"]
        _require(isinstance(name, str) and bool(name), f"object {image_id!r}/{obj_id!r}: bad name {name!r}")
        for key in ("x", "y", "w", "h"):
            _require(
                isinstance(raw[key], (int, float)) and not isinstance(raw[key], bool),
                f"object {image_id!r}/{obj_id!r}: {key!r} must be a number",
            )
        try:
            box = BoundingBox(x=raw["x"], y=raw["y"], w=raw["w"], h=raw["h"])
        except SchemaViolation as exc:
            raise SchemaViolation(f"object {image_id!r}/{obj_id!r}: {exc}") from exc
        _require(
            box.x + box.w <= width and box.y + box.h <= height,
            f"object {image_id!r}/{obj_id!r}: box exceeds the {width}x{height} image",
        )
        attributes = raw.get("attributes", [])
        _require(
            isinstance(attributes, list) and all(isinstance(a, str) and a for a in attributes),
            f"object {image_id!r}/{obj_id!r}: attributes must be a list of non-empty strings",
        )
        relations = raw.get("relations", [])
        _require(isinstance(relations, list), f"object {image_id!r}/{obj_id!r}: relations must be a list")
        for rel in relations:
            _require(
                isinstance(rel, dict) and isinstance(rel.get("name"), str) and rel["name"]
                and isinstance(rel.get("object"), str) and rel["object"],
                f"object {image_id!r}/{obj_id!r}: bad relation record {rel!r}",
            )
            pending_edges.append((obj_id, synonyms.canonicalize(rel["name"]), rel["object"]))
        nodes.append(
            ObjectNode(
                id=obj_id,
                category=synonyms.canonicalize(name),
                attributes=tuple(synonyms.canonicalize(a) for a in attributes),
                box=box,
            )
        )

    known = {n.id for n in nodes}
    edges: list[RelationEdge] = []
    seen: set[tuple[str, str, str]] = set()
    dropped = 0
    for subject, predicate, obj in pending_edges:
        if obj not in known:
            raise DanglingEdge(
                f"image {image_id!r}: relation {subject!r} -[{predicate}]-> {obj!r} targets a missing object"
            )
        if subject == obj:
            raise SchemaViolation(f"image {image_id!r}: self-relation on object {subject!r}")
        key = (subject, predicate, obj)
        if key in seen:
            dropped += 1
            continue
        seen.add(key)
        edges.append(RelationEdge(subject=subject, predicate=predicate, object=obj))
    if dropped:
        log.warning("image %s: dropped %d duplicate relation(s)", image_id, dropped)

    return SceneGraph(image_id=image_id, width=width, height=height, nodes=tuple(nodes), edges=tuple(edges))


def load_corpus(source: IO, synonyms: SynonymTable | None = None) -> Corpus:
    """Parse, validate, and canonicalize a scene-graph corpus.

    Args:
        source: readable text or byte stream holding the corpus JSON document.
        synonyms: optional synonym table; omitted means identity mapping.

    Raises:
        MalformedDocument: the stream is not valid JSON.
        SchemaViolation: the document deviates from the documented schema.
        DanglingEdge: a relation points at an object id that does not exist.
    """
    synonyms = synonyms or SynonymTable.empty()
    try:
        data = json.load(source)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"corpus is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaViolation("corpus must be a JSON object keyed by image id")
    graphs: dict[str, SceneGraph] = {}
    for image_id, payload in data.items():
        _require(isinstance(image_id, str) and bool(image_id), f"bad image id {image_id!r}")
        graphs[image_id] = _parse_graph(image_id, payload, synonyms)
    return Corpus.build(graphs)


def load_corpus_path(path: str, synonyms: SynonymTable | None = None) -> Corpus:
    with open(path, "r", encoding="utf-8") as handle:
        return load_corpus(handle, synonyms)


def corpus_to_jsonable(corpus: Corpus) -> dict:
    """Serialize a corpus back to the on-disk schema (canonical ordering)."""
    out: dict = {}
    for image_id, graph in corpus.graphs.items():
        objects: dict = {}
        for node in graph.nodes:
            objects[node.id] = {
                "name": node.category,
                "x": node.box.x,
                "y": node.box.y,
                "w": node.box.w,
                "h": node.box.h,
                "attributes": list(node.attributes),
                "relations": [
                    {"name": e.predicate, "object": e.object}
                    for e in graph.out_edges(node.id)
                ],
            }
        out[image_id] = {"width": graph.width, "height": graph.height, "objects": objects}
    return out


def eligible_targets(
    graph: SceneGraph,
    min_area_ratio: float = DEFAULT_MIN_AREA_RATIO,
    blacklist: Iterable[str] = DEFAULT_CATEGORY_BLACKLIST,
) -> tuple[str, ...]:
    """Object ids worth describing, ascending by id.

    A region qualifies when its box covers at least ``min_area_ratio`` of the
    image and its category is not blacklisted.  Tiny regions and backdrop
    categories make degenerate referents, so both are filtered before any
    expression synthesis.
    """
    if not 0.0 <= min_area_ratio <= 1.0:
        raise ValueError(f"min_area_ratio must lie in [0, 1], got {min_area_ratio}")
    return tuple(
        node.id
        for node in graph.nodes
        if target_exclusion_reason(graph, node, min_area_ratio, frozenset(blacklist)) is None
    )


def target_exclusion_reason(
    graph: SceneGraph,
    node: ObjectNode,
    min_area_ratio: float = DEFAULT_MIN_AREA_RATIO,
    blacklist: frozenset[str] = DEFAULT_CATEGORY_BLACKLIST,
) -> str | None:
    """Why a region cannot serve as a target: "area", "blacklist", or None."""
    if node.box.area < min_area_ratio * (graph.width * graph.height):
        return "area"
    if node.category in blacklist:
        return "blacklist"
    return None
