"""Templates, surface rendering, record serialization, and bias probes."""

from __future__ import annotations

import io
import json
import random

import pytest

from refsynth.errors import SchemaViolation, SlotMismatch
from refsynth.expression import (
    ExpressionRecord,
    Template,
    TokenRole,
    default_templates,
    fill,
    keep_nouns_adjectives,
    load_attribute_lexicon,
    load_templates,
    render_text,
    select_template,
    shuffle_words,
    template_is_eligible,
)
from refsynth.reasoning import (
    LogicForm,
    OrderSpec,
    ReasoningTree,
    TreeEdge,
    TreeNode,
)
from refsynth.scene_graph import SynonymTable
from refsynth.util import ordinal_word


def template_for(form: LogicForm, pattern: str) -> Template:
    for t in default_templates():
        if t.form is form and t.pattern == pattern:
            return t
    raise AssertionError(f"no default template with pattern {pattern!r}")


def order_tree(index=1, direction="left", attrs=(), edges=()):
    return ReasoningTree(
        form=LogicForm.ORDER,
        root=TreeNode("glass", tuple(attrs), order_spec=OrderSpec(index=index, direction=direction)),
        edges=tuple(edges),
    )


class TestTemplateParsing:
    def test_slots_are_extracted(self):
        t = Template(form=LogicForm.ORDER, pattern="The <idx> <obj0> from the <dir>.")
        assert t.slots == frozenset({"idx", "obj0", "dir"})

    def test_unknown_slot_rejected(self):
        with pytest.raises(SchemaViolation):
            Template(form=LogicForm.CHAIN, pattern="The <bogus> thing.")

    def test_missing_terminal_period_rejected(self):
        with pytest.raises(SchemaViolation):
            Template(form=LogicForm.NOT, pattern="The <obj0> that is not <natt0>")

    def test_requires_must_reference_pattern_slots(self):
        with pytest.raises(SchemaViolation):
            Template(
                form=LogicForm.ORDER,
                pattern="The <idx> <obj0> from the <dir>.",
                requires=("att0",),
            )

    def test_load_templates_from_json(self):
        doc = json.dumps(
            [{"form": "not", "pattern": "The <obj0> that is not <natt0:and>."}]
        )
        templates = load_templates(io.StringIO(doc))
        assert len(templates) == 1
        assert templates[0].form is LogicForm.NOT


class TestRendering:
    def test_render_text_sentence_cases_and_terminates(self):
        tokens = (("the", TokenRole.FUNCTION), ("red", TokenRole.ATTRIBUTE), ("cup", TokenRole.OBJECT_NOUN))
        assert render_text(tokens) == "The red cup."

    def test_empty_attribute_slots_collapse(self):
        t = template_for(
            LogicForm.CHAIN, "The <att0> <obj0> that is <rel0> the <att1> <obj1>."
        )
        tree = ReasoningTree(
            form=LogicForm.CHAIN,
            root=TreeNode("cup"),
            edges=(TreeEdge.relation("on", TreeNode("table")),),
        )
        record = fill(t, tree, SynonymTable.empty(), random.Random(0))
        assert record.text == "The cup that is on the table."
        assert "  " not in record.text

    def test_multi_attribute_and_join(self):
        t = template_for(LogicForm.ORDER, "The <idx> <obj0> from the <dir> that is <att0:and>.")
        record = fill(
            t, order_tree(attrs=("red", "shiny")), SynonymTable.empty(), random.Random(0)
        )
        assert record.text == "The first glass from the left that is red and shiny."

    def test_ordinal_words(self):
        assert ordinal_word(1) == "first"
        assert ordinal_word(3) == "third"
        assert ordinal_word(21) == "21st"
        t = template_for(LogicForm.ORDER, "The <idx> <obj0> from the <dir>.")
        record = fill(t, order_tree(index=2, direction="right"), SynonymTable.empty(), random.Random(0))
        assert record.text == "The second glass from the right."

    def test_attribute_category_surfaces_as_plain_english(self):
        t = template_for(LogicForm.SAME, "The <obj0> that has the same <cat> as the <obj1>.")
        tree = ReasoningTree(
            form=LogicForm.SAME,
            root=TreeNode("bag"),
            edges=(TreeEdge.same("colour", TreeNode("sweater")),),
        )
        record = fill(t, tree, SynonymTable.empty(), random.Random(0))
        assert "color" in record.text
        assert "colour" not in record.text

    def test_form_mismatch_raises(self):
        t = template_for(LogicForm.NOT, "The <obj0> that is not <natt0:and>.")
        with pytest.raises(SlotMismatch):
            fill(t, order_tree(), SynonymTable.empty(), random.Random(0))

    def test_multi_word_predicates_become_one_token_per_word(self):
        t = template_for(
            LogicForm.CHAIN, "The <att0> <obj0> that is <rel0> the <att1> <obj1>."
        )
        tree = ReasoningTree(
            form=LogicForm.CHAIN,
            root=TreeNode("cup"),
            edges=(TreeEdge.relation("to the left of", TreeNode("table")),),
        )
        record = fill(t, tree, SynonymTable.empty(), random.Random(0))
        relation_words = [s for s, role in record.tokens if role is TokenRole.RELATION]
        assert relation_words == ["to", "the", "left", "of"]

    def test_every_token_carries_a_role(self):
        t = template_for(LogicForm.ORDER, "The <idx> <obj0> from the <dir> that is <att0:and>.")
        record = fill(t, order_tree(attrs=("red",)), SynonymTable.empty(), random.Random(0))
        roles = dict(record.tokens)
        assert roles["first"] is TokenRole.ORDINAL
        assert roles["left"] is TokenRole.DIRECTION
        assert roles["glass"] is TokenRole.OBJECT_NOUN
        assert roles["red"] is TokenRole.ATTRIBUTE
        assert roles["The"] is TokenRole.FUNCTION


class TestSynonyms:
    def test_substitution_draws_only_non_canonical_forms(self):
        table = SynonymTable({"glass": ("glass", "tumbler")})
        t = template_for(LogicForm.ORDER, "The <idx> <obj0> from the <dir>.")
        always = fill(
            t, order_tree(), table, random.Random(5), synonym_probability=1.0
        )
        never = fill(
            t, order_tree(), table, random.Random(5), synonym_probability=0.0
        )
        assert "tumbler" in always.text
        assert "glass" in never.text


class TestEligibility:
    def test_relation_slot_needs_relation_edge(self):
        t = template_for(
            LogicForm.ORDER,
            "The <idx> <obj0> from the <dir> that is <rel0> the <att1> <obj1>.",
        )
        bare = order_tree()
        with_edge = order_tree(edges=(TreeEdge.relation("near", TreeNode("cup")),))
        assert not template_is_eligible(t, bare)
        assert template_is_eligible(t, with_edge)

    def test_tree_with_edge_rejects_edgeless_pattern(self):
        t = template_for(LogicForm.ORDER, "The <idx> <obj0> from the <dir>.")
        with_edge = order_tree(edges=(TreeEdge.relation("near", TreeNode("cup")),))
        assert not template_is_eligible(t, with_edge)

    def test_required_attribute_slot_must_be_non_empty(self):
        t = template_for(LogicForm.ORDER, "The <idx> <obj0> from the <dir> that is <att0:and>.")
        assert not template_is_eligible(t, order_tree())
        assert template_is_eligible(t, order_tree(attrs=("red",)))

    def test_non_empty_attributes_need_a_slot(self):
        t = template_for(LogicForm.ORDER, "The <idx> <obj0> from the <dir>.")
        assert template_is_eligible(t, order_tree())
        assert not template_is_eligible(t, order_tree(attrs=("red",)))

    def test_only_index_templates_drop_the_ordinal_for_their_rank(self):
        t = template_for(LogicForm.ORDER, "The <obj0> on the <dir> that is <att0:and>.")
        assert t.only_index == 1
        assert template_is_eligible(t, order_tree(attrs=("red",)))
        assert not template_is_eligible(t, order_tree(index=2, attrs=("red",)))

    def test_select_template_returns_none_when_nothing_fits(self):
        tree = order_tree(index=7, attrs=("red", "shiny", "tall"))
        t = template_for(LogicForm.NOT, "The <obj0> that is not <natt0:and>.")
        assert select_template([t], tree, random.Random(0)) is None


class TestLexicon:
    def test_default_lexicon_covers_the_closed_categories(self, lexicon):
        assert lexicon["red"] == "colour"
        assert lexicon["wooden"] == "material"
        assert lexicon["round"] == "shape"

    def test_color_alias_folds_into_colour(self):
        doc = json.dumps({"teal": "color"})
        loaded = load_attribute_lexicon(io.StringIO(doc))
        assert loaded["teal"] == "colour"

    def test_unknown_category_rejected(self):
        with pytest.raises(SchemaViolation):
            load_attribute_lexicon(io.StringIO(json.dumps({"fast": "speed"})))

    def test_non_string_category_rejected(self):
        with pytest.raises(SchemaViolation):
            load_attribute_lexicon(io.StringIO(json.dumps({"fast": ["speed"]})))


class TestRecordSerialization:
    def test_round_trip(self):
        t = template_for(LogicForm.ORDER, "The <idx> <obj0> from the <dir> that is <att0:and>.")
        record = fill(
            t,
            order_tree(attrs=("red",)),
            SynonymTable.empty(),
            random.Random(0),
            expr_id="img:o1:order",
            image_id="img",
            target_id="o1",
        )
        again = ExpressionRecord.from_jsonable(record.to_jsonable())
        assert again == record

    def test_missing_key_rejected(self):
        with pytest.raises(SchemaViolation):
            ExpressionRecord.from_jsonable({"expr_id": "x"})


class TestGenerate:
    def test_per_region_cap_and_ids(self, corpus, generation_config, expressions):
        assert expressions
        per_region: dict[tuple[str, str], int] = {}
        for record in expressions:
            assert record.expr_id == f"{record.image_id}:{record.target_id}:{record.form.value}"
            assert record.text.endswith(".")
            assert record.word_count == len(record.text.split())
            key = (record.image_id, record.target_id)
            per_region[key] = per_region.get(key, 0) + 1
        assert max(per_region.values()) <= generation_config.max_per_region

    def test_all_forms_appear_in_the_fixture_yield(self, expressions):
        forms = {r.form for r in expressions}
        assert forms == set(LogicForm)


class TestBiasProbes:
    def _record(self):
        t = template_for(LogicForm.NOT, "The <obj0> that is not <natt0:and>.")
        tree = ReasoningTree(
            form=LogicForm.NOT,
            root=TreeNode("apple", negated_attributes=("red",)),
        )
        return fill(t, tree, SynonymTable.empty(), random.Random(0))

    def test_shuffle_keeps_the_token_multiset(self):
        record = self._record()
        shuffled = shuffle_words(record, random.Random(4))
        assert sorted(shuffled.tokens) == sorted(record.tokens)
        assert shuffled.text == render_text(shuffled.tokens)
        again = shuffle_words(record, random.Random(4))
        assert again.text == shuffled.text

    def test_keep_nouns_adjectives_strips_function_words(self):
        record = self._record()
        assert record.text == "The apple that is not red."
        stripped = keep_nouns_adjectives(record)
        assert [s for s, _ in stripped.tokens] == ["apple", "red"]
        assert stripped.text == "Apple red."
