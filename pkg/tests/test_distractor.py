"""Distractor discovery: type predicates, priority, and instance assembly."""

from __future__ import annotations

import random

from refsynth.distractor import (
    DistractorType,
    TaskInstance,
    find_distractors,
    missing_counts,
    skeleton_realized,
    type_predicate,
)
from refsynth.expression import default_attribute_lexicon, default_templates, fill
from refsynth.reasoning import (
    LogicForm,
    OrderSpec,
    ReasoningTree,
    TreeEdge,
    TreeNode,
    match,
    tree_categories,
)
from refsynth.scene_graph import Corpus, SynonymTable

from .conftest import box, build_graph
from .oracles import brute_force_match

LEXICON = default_attribute_lexicon()


def chain_expression():
    """A red cup on a table, rendered from its tree, rooted in image t0."""
    tree = ReasoningTree(
        form=LogicForm.CHAIN,
        root=TreeNode("cup", ("red",)),
        edges=(TreeEdge.relation("on", TreeNode("table")),),
    )
    template = next(
        t
        for t in default_templates()
        if t.form is LogicForm.CHAIN
        and t.pattern == "The <att0> <obj0> that is <rel0> the <att1> <obj1>."
    )
    return fill(
        template,
        tree,
        SynonymTable.empty(),
        random.Random(0),
        expr_id="t0:o1:chain",
        image_id="t0",
        target_id="o1",
    )


def toy_corpus() -> Corpus:
    graphs = {}
    graphs["t0"] = build_graph(
        "t0",
        {
            "o1": ("cup", ("red",), box(x=0)),
            "o2": ("table", (), box(x=100)),
            "o3": ("dog", (), box(x=300)),
        },
        edges=[("o1", "on", "o2")],
    )
    for i in (1, 2, 3):
        # No cup at all.
        graphs[f"d{i}"] = build_graph(f"d{i}", {"o1": ("dog", (), box())})
        # A cup, but not red and no table.
        graphs[f"c{i}"] = build_graph(f"c{i}", {"o1": ("cup", ("blue",), box())})
        # A red cup, still no table.
        graphs[f"a{i}"] = build_graph(f"a{i}", {"o1": ("cup", ("red",), box())})
        # Cup and table both present but unrelated.
        graphs[f"k{i}"] = build_graph(
            f"k{i}",
            {
                "o1": ("cup", ("blue",), box(x=0)),
                "o2": ("table", (), box(x=200)),
            },
        )
    # Poison: satisfies the tree, must never be used as a distractor.
    graphs["p0"] = build_graph(
        "p0",
        {
            "o1": ("cup", ("red",), box(x=0)),
            "o2": ("table", (), box(x=100)),
        },
        edges=[("o1", "on", "o2")],
    )
    return Corpus.build(graphs)


class TestTypePredicates:
    def test_each_image_kind_maps_to_its_type(self):
        corpus = toy_corpus()
        expr = chain_expression()
        cases = {
            "d1": DistractorType.DIFF_CAT,
            "c1": DistractorType.CAT,
            "a1": DistractorType.CAT_ATTR,
            "k1": DistractorType.CAT_CAT,
        }
        for image_id, expected in cases.items():
            graph = corpus.graphs[image_id]
            assert type_predicate(expected, graph, expr, LEXICON), image_id

    def test_satisfying_image_fails_every_type(self):
        corpus = toy_corpus()
        expr = chain_expression()
        poison = corpus.graphs["p0"]
        assert match(expr.tree, poison, LEXICON)
        for dtype in DistractorType:
            assert not type_predicate(dtype, poison, expr, LEXICON)

    def test_edge_free_tree_is_never_skeleton_realized(self):
        tree = ReasoningTree(
            form=LogicForm.ORDER,
            root=TreeNode("cup", order_spec=OrderSpec(index=2, direction="left")),
        )
        graph = build_graph("img", {"o1": ("cup", (), box())})
        assert not skeleton_realized(tree, graph, LEXICON)

    def test_category_presence_promotes_cat_to_cat_cat_for_edge_free_trees(self):
        # One cup cannot be second from the left, so the tree matches nothing
        # here; with no edges to realize, the image qualifies as the
        # every-category-present type rather than plain category-present.
        tree = ReasoningTree(
            form=LogicForm.ORDER,
            root=TreeNode("cup", order_spec=OrderSpec(index=2, direction="left")),
        )
        template = next(
            t for t in default_templates()
            if t.form is LogicForm.ORDER and t.pattern == "The <idx> <obj0> from the <dir>."
        )
        expr = fill(template, tree, SynonymTable.empty(), random.Random(0),
                    expr_id="x:o1:order", image_id="x", target_id="o1")
        graph = build_graph("img", {"o1": ("cup", (), box())})
        assert type_predicate(DistractorType.CAT_CAT, graph, expr, LEXICON)
        assert type_predicate(DistractorType.CAT, graph, expr, LEXICON)


class TestFindDistractors:
    def test_full_instance_from_the_toy_corpus(self):
        corpus = toy_corpus()
        expr = chain_expression()
        instance = find_distractors(corpus, expr, 3, LEXICON)
        assert instance is not None
        assert instance.distractors == {
            DistractorType.DIFF_CAT: ("d1", "d2", "d3"),
            DistractorType.CAT: ("c1", "c2", "c3"),
            DistractorType.CAT_ATTR: ("a1", "a2", "a3"),
            DistractorType.CAT_CAT: ("k1", "k2", "k3"),
        }
        assert instance.images[0] == "t0"
        assert len(instance.images) == 13
        assert "p0" not in instance.images
        assert set(instance.candidate_regions) == set(instance.images)
        assert instance.candidate_regions["t0"] == (
            ("o1", corpus.graphs["t0"].node("o1").box),
            ("o2", corpus.graphs["t0"].node("o2").box),
            ("o3", corpus.graphs["t0"].node("o3").box),
        )

    def test_shortage_discards_the_expression(self):
        corpus = toy_corpus()
        expr = chain_expression()
        pruned = Corpus.build(
            {k: g for k, g in corpus.graphs.items() if k != "a3"}
        )
        assert find_distractors(pruned, expr, 3, LEXICON) is None
        missing = missing_counts(pruned, expr, 3, LEXICON)
        assert missing[DistractorType.CAT_ATTR] == 1
        assert sum(missing.values()) == 1

    def test_one_image_fills_at_most_one_slot(self, corpus, instances):
        for instance in instances:
            all_ids = [i for ids in instance.distractors.values() for i in ids]
            assert len(all_ids) == len(set(all_ids)) == 12
            assert instance.target_image not in all_ids

    def test_every_distractor_image_defeats_the_expression(self, corpus, instances):
        assert len(instances) >= 25
        for instance in instances:
            tree = instance.expression.tree
            for dtype, image_ids in instance.distractors.items():
                for image_id in image_ids:
                    graph = corpus.graphs[image_id]
                    assert brute_force_match(tree, graph, LEXICON) == set()

    def test_type_structure_holds_on_the_fixture(self, corpus, instances):
        for instance in instances:
            tree = instance.expression.tree
            root = tree.root.category
            needed = set(tree_categories(tree))
            for image_id in instance.distractors[DistractorType.DIFF_CAT]:
                assert not corpus.graphs[image_id].nodes_of_category(root)
            for dtype in (DistractorType.CAT, DistractorType.CAT_ATTR, DistractorType.CAT_CAT):
                for image_id in instance.distractors[dtype]:
                    assert corpus.graphs[image_id].nodes_of_category(root)
            for image_id in instance.distractors[DistractorType.CAT_ATTR]:
                wanted = set(tree.root.attributes)
                graph = corpus.graphs[image_id]
                assert any(
                    wanted <= set(n.attributes) for n in graph.nodes_of_category(root)
                )
            for image_id in instance.distractors[DistractorType.CAT_CAT]:
                graph = corpus.graphs[image_id]
                present = {n.category for n in graph.nodes}
                assert needed <= present


class TestSerialization:
    def test_round_trip(self):
        corpus = toy_corpus()
        instance = find_distractors(corpus, chain_expression(), 3, LEXICON)
        payload = instance.to_jsonable()
        again = TaskInstance.from_jsonable(payload)
        assert again == instance
        assert again.to_jsonable() == payload
