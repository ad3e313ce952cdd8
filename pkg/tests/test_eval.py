"""Selection protocol: scorers, argmax tie-breaking, and accuracy reports."""

from __future__ import annotations

import io
import json
import sys
import textwrap

import pytest

from refsynth.distractor import DistractorType, TaskInstance
from refsynth.errors import DataError, EmptyInput, KeyMismatch, NoCandidates
from refsynth.evaluation import (
    ConstantScorer,
    FileScorer,
    HashRandomScorer,
    OracleScorer,
    Setting,
    SubprocessScorer,
    evaluate,
    format_report,
    length_bucket,
    score_key,
    select_region,
    setting_images,
)

from .oracles import brute_force_select


class TestSettings:
    def test_image_subsets(self, instances):
        instance = instances[0]
        full = setting_images(instance, Setting.FULL)
        assert len(full) == 13
        assert full[0] == instance.target_image
        assert setting_images(instance, Setting.WITHOUT_DIST) == (instance.target_image,)
        only = setting_images(instance, Setting.CAT_ONLY)
        assert len(only) == 4
        assert only[1:] == instance.distractors[DistractorType.CAT]

    def test_length_buckets(self):
        assert length_bucket(9) == "short"
        assert length_bucket(10) == "middle"
        assert length_bucket(20) == "middle"
        assert length_bucket(21) == "long"


class TestOracleScorer:
    def test_perfect_accuracy_everywhere(self, corpus, lexicon, instances):
        report = evaluate(instances, OracleScorer(corpus, lexicon))
        assert report.instance_count == len(instances)
        for setting, result in report.settings.items():
            assert result.overall.accuracy == 1.0, setting
            assert result.overall.total == len(instances)
        for result in report.settings.values():
            for tally in result.per_form.values():
                assert tally.accuracy == 1.0


class TestTieBreaking:
    def test_constant_scores_pick_the_smallest_pair(self, instances):
        instance = instances[0]
        chosen = select_region(instance, ConstantScorer())
        everything = [
            (image_id, object_id)
            for image_id in setting_images(instance, Setting.FULL)
            for object_id, _ in instance.candidate_regions[image_id]
        ]
        assert chosen == min(everything)

    def test_argmax_agrees_with_brute_force(self, instances):
        scorer = HashRandomScorer(seed=11)
        for instance in instances[:10]:
            for setting in (Setting.FULL, Setting.CAT_ONLY, Setting.WITHOUT_DIST):
                triples = [
                    (image_id, object_id,
                     scorer.score(instance.expression, image_id, object_id, b))
                    for image_id in setting_images(instance, setting)
                    for object_id, b in instance.candidate_regions[image_id]
                ]
                assert select_region(instance, scorer, setting) == brute_force_select(triples)

    def test_no_candidates_raises(self, instances):
        bare = TaskInstance(
            expression=instances[0].expression,
            target_image=instances[0].target_image,
            distractors=instances[0].distractors,
            candidate_regions={k: () for k in instances[0].candidate_regions},
        )
        with pytest.raises(NoCandidates):
            select_region(bare, ConstantScorer())


class TestHashRandomScorer:
    def test_reports_are_reproducible(self, instances):
        first = evaluate(instances, HashRandomScorer(seed=5))
        second = evaluate(instances, HashRandomScorer(seed=5))
        assert first.to_jsonable() == second.to_jsonable()

    def test_different_seeds_differ(self, instances):
        a = evaluate(instances, HashRandomScorer(seed=1)).to_jsonable()
        b = evaluate(instances, HashRandomScorer(seed=2)).to_jsonable()
        assert a != b


class TestFileScorer:
    def test_scores_come_from_the_table(self, instances):
        instance = instances[0]
        table = {}
        for image_id in setting_images(instance, Setting.FULL):
            for object_id, _ in instance.candidate_regions[image_id]:
                key = score_key(instance.expression.expr_id, image_id, object_id)
                table[key] = 1.0 if (image_id, object_id) == (
                    instance.target_image, instance.expression.target_id) else 0.0
        scorer = FileScorer(table)
        assert select_region(instance, scorer) == (
            instance.target_image, instance.expression.target_id)

    def test_missing_key_is_fatal(self, instances):
        with pytest.raises(KeyMismatch):
            select_region(instances[0], FileScorer({}))

    def test_load_validates_numbers(self):
        with pytest.raises(DataError):
            FileScorer.load(io.StringIO(json.dumps({"a|b|c": "high"})))
        loaded = FileScorer.load(io.StringIO(json.dumps({"a|b|c": 0.25})))
        assert loaded.table == {"a|b|c": 0.25}


class TestSubprocessScorer:
    def test_line_json_protocol(self, instances):
        child = textwrap.dedent(
            """
            import json, sys
            for line in sys.stdin:
                request = json.loads(line)
                for key in ("box", "expr_id", "image_id", "object_id", "text"):
                    assert key in request, key
                value = (len(request["image_id"]) * 7 + len(request["object_id"])) % 13
                print(json.dumps({"score": value / 13}))
                sys.stdout.flush()
            """
        )
        with SubprocessScorer([sys.executable, "-c", child]) as scorer:
            report = evaluate(instances[:5], scorer, settings=(Setting.FULL,))
        assert report.settings[Setting.FULL].overall.total == 5

    def test_bad_response_raises(self, instances):
        child = "print('not json'); import sys; sys.stdout.flush(); sys.stdin.read()"
        with SubprocessScorer([sys.executable, "-c", child]) as scorer:
            with pytest.raises(DataError):
                evaluate(instances[:1], scorer, settings=(Setting.FULL,))


class TestEvaluate:
    def test_empty_input_rejected(self):
        with pytest.raises(EmptyInput):
            evaluate([], ConstantScorer())

    def test_slices_partition_the_totals(self, corpus, lexicon, instances):
        report = evaluate(instances, OracleScorer(corpus, lexicon), settings=(Setting.FULL,))
        result = report.settings[Setting.FULL]
        assert sum(t.total for t in result.per_form.values()) == len(instances)
        assert sum(t.total for t in result.per_length.values()) == len(instances)

    def test_report_renders_one_row_per_setting(self, corpus, lexicon, instances):
        report = evaluate(instances[:3], OracleScorer(corpus, lexicon))
        text = format_report(report)
        for setting in Setting:
            assert setting.value in text
