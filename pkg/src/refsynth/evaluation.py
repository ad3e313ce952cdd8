"""Multi-image region selection and accuracy reporting.

A task instance pairs one expression with its source image plus twelve
controlled distractor images.  A scorer assigns a real number to every
candidate region across a chosen subset of those images; the region with the
highest score is the model's answer, and the answer is correct when it is
exactly the annotated target region.  Subsets give six evaluation settings:
the full thirteen-image task, four single-distractor-type variants, and the
classic single-image task with no distractors at all.
"""

from __future__ import annotations

import json
import subprocess
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Mapping, Protocol, Sequence

from .distractor import DistractorType, TaskInstance
from .errors import DataError, KeyMismatch, NoCandidates, EmptyInput
from .expression import ExpressionRecord
from .reasoning import match
from .scene_graph import BoundingBox, Corpus
from .util import hash_uniform


class Setting(str, Enum):
    """Which candidate images take part in the selection."""

    FULL = "Full"
    DIFF_CAT_ONLY = "DiffCatOnly"
    CAT_ONLY = "CatOnly"
    CAT_ATTR_ONLY = "CatAttrOnly"
    CAT_CAT_ONLY = "CatCatOnly"
    WITHOUT_DIST = "WithoutDist"


_SETTING_TYPE = {
    Setting.DIFF_CAT_ONLY: DistractorType.DIFF_CAT,
    Setting.CAT_ONLY: DistractorType.CAT,
    Setting.CAT_ATTR_ONLY: DistractorType.CAT_ATTR,
    Setting.CAT_CAT_ONLY: DistractorType.CAT_CAT,
}


def setting_images(instance: TaskInstance, setting: Setting) -> tuple[str, ...]:
    """Candidate image ids for one setting, target image first."""
    if setting is Setting.FULL:
        return instance.images
    if setting is Setting.WITHOUT_DIST:
        return (instance.target_image,)
    return (instance.target_image,) + instance.distractors[_SETTING_TYPE[setting]]


class RegionScorer(Protocol):
    """Anything that can rate how well a region fits an expression."""

    def score(
        self,
        expression: ExpressionRecord,
        image_id: str,
        object_id: str,
        box: BoundingBox,
    ) -> float: ...


class OracleScorer:
    """Perfect scorer: 1 for regions the reasoning tree accepts, else 0.

    On distractor images the tree accepts nothing by construction, so the
    oracle always lands on the annotated target and scores 100% everywhere.
    """

    def __init__(self, corpus: Corpus, lexicon: Mapping[str, str] | None = None) -> None:
        self.corpus = corpus
        self.lexicon = lexicon
        self._cache: dict[tuple[str, str], frozenset[str]] = {}

    def score(self, expression, image_id, object_id, box):
        key = (expression.expr_id, image_id)
        if key not in self._cache:
            graph = self.corpus.graphs[image_id]
            self._cache[key] = frozenset(match(expression.tree, graph, self.lexicon))
        return 1.0 if object_id in self._cache[key] else 0.0


class ConstantScorer:
    """Scores every region the same; selection falls through to tie-breaking."""

    def __init__(self, value: float = 0.0) -> None:
        self.value = value

    def score(self, expression, image_id, object_id, box):
        return self.value


class HashRandomScorer:
    """Deterministic pseudo-random scores keyed on (expression, region).

    Behaves like an i.i.d. uniform scorer but is reproducible from the seed
    and independent of call order, which makes chance-level accuracy exactly
    computable: each candidate region wins with probability 1/n.
    """

    def __init__(self, seed: int = 0) -> None:
        self.seed = seed

    def score(self, expression, image_id, object_id, box):
        return hash_uniform(self.seed, expression.expr_id, image_id, object_id)


def score_key(expr_id: str, image_id: str, object_id: str) -> str:
    return f"{expr_id}|{image_id}|{object_id}"


class FileScorer:
    """Scores precomputed by an external model and serialized to JSON.

    The file maps ``"<expr_id>|<image_id>|<object_id>"`` to a float.  A
    missing key is a hard error: silently defaulting would let a model skip
    the regions it finds hard.
    """

    def __init__(self, table: Mapping[str, float]) -> None:
        self.table = dict(table)

    @classmethod
    def load(cls, source: IO) -> "FileScorer":
        data = json.load(source)
        if not isinstance(data, dict):
            raise DataError("scores file must be a JSON object")
        table = {}
        for key, value in data.items():
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise DataError(f"score for {key!r} is not a number")
            table[key] = float(value)
        return cls(table)

    def score(self, expression, image_id, object_id, box):
        key = score_key(expression.expr_id, image_id, object_id)
        if key not in self.table:
            raise KeyMismatch(f"no score for {key}")
        return self.table[key]


class SubprocessScorer:
    """Bridges to a model running as a child process, one JSON line per query.

    Each request is a single line ``{"box": ..., "expr_id": ..., "image_id":
    ..., "object_id": ..., "text": ...}`` on the child's stdin; the child must
    answer with one line ``{"score": <number>}`` on stdout.  Use as a context
    manager so the child is reaped.
    """

    def __init__(self, command: Sequence[str]) -> None:
        self.command = list(command)
        self._proc: subprocess.Popen | None = None

    def __enter__(self) -> "SubprocessScorer":
        self._proc = subprocess.Popen(
            self.command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
        )
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def close(self) -> None:
        if self._proc is not None:
            if self._proc.stdin:
                self._proc.stdin.close()
            self._proc.wait()
            self._proc = None

    def score(self, expression, image_id, object_id, box):
        if self._proc is None or self._proc.stdin is None or self._proc.stdout is None:
            raise DataError("scorer process is not running")
        request = {
            "box": box.to_jsonable(),
            "expr_id": expression.expr_id,
            "image_id": image_id,
            "object_id": object_id,
            "text": expression.text,
        }
        self._proc.stdin.write(json.dumps(request, sort_keys=True) + "\n")
        self._proc.stdin.flush()
        line = self._proc.stdout.readline()
        if not line:
            raise DataError("scorer process closed its output")
        try:
            payload = json.loads(line)
            value = payload["score"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise DataError(f"bad scorer response: {line!r}") from exc
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise DataError(f"scorer returned a non-number: {value!r}")
        return float(value)


def select_region(
    instance: TaskInstance,
    scorer: RegionScorer,
    setting: Setting = Setting.FULL,
) -> tuple[str, str]:
    """Argmax over every candidate region in the setting's images.

    Ties go to the lexicographically smallest (image id, object id) pair, so
    selection is a pure function of the scores.
    """
    best: tuple[str, str] | None = None
    best_score = float("-inf")
    for image_id in setting_images(instance, setting):
        for object_id, box in instance.candidate_regions[image_id]:
            value = scorer.score(instance.expression, image_id, object_id, box)
            candidate = (image_id, object_id)
            if value > best_score or (value == best_score and (best is None or candidate < best)):
                best = candidate
                best_score = value
    if best is None:
        raise NoCandidates(f"no candidate regions for {instance.expression.expr_id}")
    return best


def length_bucket(word_count: int) -> str:
    """Short is under 10 words, long is over 20, middle is the rest."""
    if word_count < 10:
        return "short"
    if word_count <= 20:
        return "middle"
    return "long"


@dataclass
class Tally:
    """Running correct/total pair with an accuracy view."""

    correct: int = 0
    total: int = 0

    def add(self, hit: bool) -> None:
        self.correct += int(hit)
        self.total += 1

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0

    def to_jsonable(self) -> dict:
        return {"accuracy": self.accuracy, "correct": self.correct, "total": self.total}


@dataclass
class SettingResult:
    """Accuracy for one setting, overall and sliced two ways."""

    overall: Tally = field(default_factory=Tally)
    per_form: dict[str, Tally] = field(default_factory=dict)
    per_length: dict[str, Tally] = field(default_factory=dict)

    def record(self, form: str, bucket: str, hit: bool) -> None:
        self.overall.add(hit)
        self.per_form.setdefault(form, Tally()).add(hit)
        self.per_length.setdefault(bucket, Tally()).add(hit)

    def to_jsonable(self) -> dict:
        return {
            "overall": self.overall.to_jsonable(),
            "per_form": {k: v.to_jsonable() for k, v in sorted(self.per_form.items())},
            "per_length": {k: v.to_jsonable() for k, v in sorted(self.per_length.items())},
        }


@dataclass
class EvaluationReport:
    """Results for every requested setting over one instance collection."""

    settings: dict[Setting, SettingResult]
    instance_count: int

    def to_jsonable(self) -> dict:
        return {
            "instance_count": self.instance_count,
            "settings": {s.value: r.to_jsonable() for s, r in self.settings.items()},
        }


def evaluate(
    instances: Sequence[TaskInstance],
    scorer: RegionScorer,
    settings: Sequence[Setting] = tuple(Setting),
) -> EvaluationReport:
    """Run selection for each instance under each setting and tally hits."""
    if not instances:
        raise EmptyInput("no task instances to evaluate")
    results = {setting: SettingResult() for setting in settings}
    for instance in instances:
        expr = instance.expression
        bucket = length_bucket(expr.word_count)
        answer = (instance.target_image, expr.target_id)
        for setting in settings:
            chosen = select_region(instance, scorer, setting)
            results[setting].record(expr.form.value, bucket, chosen == answer)
    return EvaluationReport(settings=results, instance_count=len(instances))


def format_report(report: EvaluationReport) -> str:
    """Fixed-width table of accuracies, one row per setting."""
    lines = [f"instances: {report.instance_count}", f"{'setting':<16}{'accuracy':>10}{'correct':>10}{'total':>8}"]
    for setting, result in report.settings.items():
        tally = result.overall
        lines.append(f"{setting.value:<16}{tally.accuracy:>10.4f}{tally.correct:>10}{tally.total:>8}")
    return "\n".join(lines)
