"""Command-line entry points for the full synthesis and evaluation pipeline.

Subcommands cover each stage: ``generate`` turns a scene-graph corpus into
referring expressions, ``distract`` attaches controlled distractor images,
``split`` partitions task instances by image, ``stats`` summarizes a
dataset, ``eval`` scores models under the multi-image protocol,
``mine-demo`` exercises the hard-negative sampler and losses, and
``schema-check`` validates a corpus file.

Exit codes: 0 on success, 2 for configuration problems, 3 for malformed
data, 4 when a stage produces nothing.  Logs go to stderr; every command
prints a one-object JSON summary to stdout.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import logging
import os
import shlex
import sys
from typing import Iterable, Sequence

from .balance import compute_stats, format_stats_table, is_spatial_only, relation_weights, split
from .config import load_config
from .distractor import TaskInstance, find_distractors, missing_counts
from .errors import ConfigError, DataError, EmptyCorpus, EmptyInput, EmptyResult
from .evaluation import (
    ConstantScorer,
    FileScorer,
    HashRandomScorer,
    OracleScorer,
    Setting,
    SubprocessScorer,
    evaluate,
    format_report,
)
from .expression import (
    ExpressionRecord,
    GenerationConfig,
    default_attribute_lexicon,
    default_templates,
    generate,
    load_attribute_lexicon,
    load_templates,
)
from .mining import (
    build_sampling_table,
    mine_loss,
    rank_loss,
    sample_negatives,
    should_refresh,
    total_loss,
)
from .scene_graph import (
    SceneGraph,
    SynonymTable,
    eligible_targets,
    load_corpus_path,
    load_synonyms,
    target_exclusion_reason,
)
from .synthgen import embeddings_for_corpus, make_embeddings
from .util import derive_rng, hash_uniform

log = logging.getLogger("refsynth")


def _setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )


def _print_summary(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _write_jsonl(path: str, payloads: Iterable[dict]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for payload in payloads:
            handle.write(json.dumps(payload, sort_keys=True) + "\n")
            count += 1
    return count


def _read_jsonl(path: str) -> list[dict]:
    out = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno} is not valid JSON") from exc
    return out


def _load_synonyms(path: str | None) -> SynonymTable:
    if path is None:
        return SynonymTable.empty()
    with open(path, "r", encoding="utf-8") as handle:
        return load_synonyms(handle)


def _load_lexicon(path: str | None) -> dict[str, str]:
    if path is None:
        return default_attribute_lexicon()
    with open(path, "r", encoding="utf-8") as handle:
        return load_attribute_lexicon(handle)


def _load_templates(path: str | None):
    if path is None:
        return default_templates()
    with open(path, "r", encoding="utf-8") as handle:
        return load_templates(handle)


def _expressions_for_image(
    graph: SceneGraph,
    targets: Sequence[str],
    gen_config: GenerationConfig,
    seed: int,
) -> tuple[str, list[ExpressionRecord]]:
    """Worker body: all expressions for one image, per-target RNG streams.

    Each target gets a stream derived from (seed, image, target), so output
    is identical no matter how targets are distributed across processes.
    """
    records: list[ExpressionRecord] = []
    for target in targets:
        rng = derive_rng(seed, graph.image_id, target)
        records.extend(generate(graph, target, gen_config, rng))
    return graph.image_id, records


def cmd_generate(args: argparse.Namespace) -> int:
    config = load_config(
        args.config,
        seed=args.seed,
        workers=args.workers,
        max_per_region=args.max_per_region,
    )
    synonyms = _load_synonyms(args.synonyms)
    lexicon = _load_lexicon(args.lexicon)
    templates = _load_templates(args.templates)
    corpus = load_corpus_path(args.corpus, synonyms)

    try:
        weights = relation_weights(corpus).weights
    except EmptyCorpus:
        log.warning("corpus has no relations; predicate weighting disabled")
        weights = None

    gen_config = GenerationConfig(
        templates=templates,
        synonyms=synonyms,
        lexicon=lexicon,
        max_per_region=config.max_per_region,
        synonym_probability=config.synonym_probability,
        compose_probability=config.compose_probability,
        parse_budget=config.parse_budget,
        relation_weights=weights,
    )

    excluded = {"area": 0, "blacklist": 0}
    jobs: list[tuple[SceneGraph, tuple[str, ...]]] = []
    total_targets = 0
    blacklist = frozenset(config.category_blacklist)
    for graph in corpus.graphs.values():
        for node in graph.nodes:
            reason = target_exclusion_reason(graph, node, config.min_area_ratio, blacklist)
            if reason is not None:
                excluded[reason] += 1
        targets = eligible_targets(graph, config.min_area_ratio, blacklist)
        total_targets += len(targets)
        jobs.append((graph, targets))

    by_image: dict[str, list[ExpressionRecord]] = {}
    if config.workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = [
                pool.submit(_expressions_for_image, graph, targets, gen_config, config.seed)
                for graph, targets in jobs
            ]
            for future in concurrent.futures.as_completed(futures):
                image_id, records = future.result()
                by_image[image_id] = records
    else:
        for graph, targets in jobs:
            image_id, records = _expressions_for_image(graph, targets, gen_config, config.seed)
            by_image[image_id] = records

    records = [r for image_id in corpus.graphs for r in by_image[image_id]]
    dropped_spatial = 0
    if config.drop_spatial_only:
        kept = [r for r in records if not is_spatial_only(r.tree)]
        dropped_spatial = len(records) - len(kept)
        records = kept

    if not records:
        raise EmptyResult("no expressions were generated")

    count = _write_jsonl(args.out, (r.to_jsonable() for r in records))
    per_form: dict[str, int] = {}
    for record in records:
        per_form[record.form.value] = per_form.get(record.form.value, 0) + 1

    report = {
        "excluded_targets": excluded,
        "expressions": count,
        "images": len(corpus.graphs),
        "out": args.out,
        "per_form": per_form,
        "spatial_only_dropped": dropped_spatial,
        "targets": total_targets,
    }
    if args.log:
        with open(args.log, "w", encoding="utf-8") as handle:
            json.dump({"config": config.to_jsonable(), **report}, handle, indent=2, sort_keys=True)
            handle.write("\n")
    _print_summary(report)
    return 0


def cmd_distract(args: argparse.Namespace) -> int:
    config = load_config(args.config, seed=args.seed, per_type=args.per_type)
    synonyms = _load_synonyms(args.synonyms)
    lexicon = _load_lexicon(args.lexicon)
    corpus = load_corpus_path(args.corpus, synonyms)
    payloads = _read_jsonl(args.expressions)
    if not payloads:
        raise EmptyInput(f"no expressions in {args.expressions}")
    records = [ExpressionRecord.from_jsonable(p) for p in payloads]

    instances: list[TaskInstance] = []
    discarded: list[dict] = []
    for record in records:
        instance = find_distractors(corpus, record, config.per_type, lexicon)
        if instance is None:
            missing = missing_counts(corpus, record, config.per_type, lexicon)
            discarded.append(
                {
                    "expr_id": record.expr_id,
                    "missing": {t.value: n for t, n in missing.items() if n},
                }
            )
            continue
        instances.append(instance)

    if not instances:
        raise EmptyResult("no expression found a full distractor set")

    count = _write_jsonl(args.out, (i.to_jsonable() for i in instances))
    report = {
        "discarded": len(discarded),
        "expressions": len(records),
        "instances": count,
        "out": args.out,
        "per_type": config.per_type,
    }
    if args.log:
        with open(args.log, "w", encoding="utf-8") as handle:
            json.dump({**report, "discard_details": discarded}, handle, indent=2, sort_keys=True)
            handle.write("\n")
    _print_summary(report)
    return 0


def cmd_split(args: argparse.Namespace) -> int:
    ratios = None
    if args.ratios:
        try:
            parts = tuple(float(x) for x in args.ratios.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad --ratios value {args.ratios!r}") from exc
        ratios = parts
    config = load_config(args.config, seed=args.seed, split_ratios=ratios)
    payloads = _read_jsonl(args.instances)
    if not payloads:
        raise EmptyInput(f"no instances in {args.instances}")
    instances = [TaskInstance.from_jsonable(p) for p in payloads]
    train, val, test = split(instances, config.split_ratios, config.seed)

    os.makedirs(args.out_dir, exist_ok=True)
    report: dict = {"out_dir": args.out_dir, "ratios": list(config.split_ratios), "seed": config.seed}
    for name, part in (("train", train), ("val", val), ("test", test)):
        path = os.path.join(args.out_dir, f"{name}.jsonl")
        _write_jsonl(path, (i.to_jsonable() for i in part))
        report[name] = {
            "images": len({i.target_image for i in part}),
            "instances": len(part),
        }
    _print_summary(report)
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    corpus = None
    if args.corpus:
        corpus = load_corpus_path(args.corpus, _load_synonyms(args.synonyms))
    expressions = ()
    if args.expressions:
        expressions = tuple(
            ExpressionRecord.from_jsonable(p) for p in _read_jsonl(args.expressions)
        )
    instances = ()
    if args.instances:
        instances = tuple(TaskInstance.from_jsonable(p) for p in _read_jsonl(args.instances))
    stats = compute_stats(corpus, expressions, instances, top_k=args.top_k)
    if args.json:
        _print_summary(stats.to_jsonable())
    else:
        print(format_stats_table(stats))
    return 0


def _build_scorer(args: argparse.Namespace, corpus, lexicon):
    sources = [s for s in (args.scorer, args.scores_file, args.command) if s]
    if len(sources) > 1:
        raise ConfigError("choose one of --scorer, --scores-file, --command")
    if args.scores_file:
        with open(args.scores_file, "r", encoding="utf-8") as handle:
            return FileScorer.load(handle), None
    if args.command:
        return None, shlex.split(args.command)
    name = args.scorer or "oracle"
    if name == "oracle":
        if corpus is None:
            raise ConfigError("the oracle scorer needs --corpus")
        return OracleScorer(corpus, lexicon), None
    if name == "constant":
        return ConstantScorer(), None
    if name == "hash-random":
        return HashRandomScorer(args.seed or 0), None
    raise ConfigError(f"unknown scorer {name!r}")


def cmd_eval(args: argparse.Namespace) -> int:
    payloads = _read_jsonl(args.instances)
    if not payloads:
        raise EmptyInput(f"no instances in {args.instances}")
    instances = [TaskInstance.from_jsonable(p) for p in payloads]
    corpus = None
    if args.corpus:
        corpus = load_corpus_path(args.corpus, _load_synonyms(args.synonyms))
    lexicon = _load_lexicon(args.lexicon)
    settings = tuple(Setting(s) for s in args.settings) if args.settings else tuple(Setting)

    scorer, command = _build_scorer(args, corpus, lexicon)
    if command is not None:
        with SubprocessScorer(command) as sub:
            report = evaluate(instances, sub, settings)
    else:
        report = evaluate(instances, scorer, settings)

    if args.json:
        _print_summary(report.to_jsonable())
    else:
        print(format_report(report))
    return 0


def cmd_mine_demo(args: argparse.Namespace) -> int:
    config = load_config(args.config, seed=args.seed, margin=args.margin)
    if args.corpus:
        corpus = load_corpus_path(args.corpus, _load_synonyms(args.synonyms))
        embeddings = embeddings_for_corpus(corpus, config.seed, dim=args.dim)
    else:
        embeddings = make_embeddings(
            config.seed, count=args.regions, dim=args.dim, category_count=max(2, args.regions // 16)
        )
    table = build_sampling_table(embeddings)
    usable = sorted(r for r in table.index if table.peers_of(r))
    if not usable:
        raise EmptyResult("every region is alone in its category; nothing to mine")

    rng = derive_rng(config.seed, "mine-demo")
    refreshes = 0
    sums = {"mine": 0.0, "rank": 0.0, "total": 0.0}
    for iteration in range(args.iterations):
        if should_refresh(iteration, config.refresh_interval):
            table = build_sampling_table(embeddings, epoch=table.epoch + 1)
            refreshes += 1
        region = usable[iteration % len(usable)]
        negatives = sample_negatives(table, rng, region)
        tag = str(iteration)
        positive = hash_uniform(config.seed, "pos", tag, region)
        in_batch_region = hash_uniform(config.seed, "neg-region", tag, region)
        in_batch_expression = hash_uniform(config.seed, "neg-expr", tag, region)
        mined_regions = {
            m: hash_uniform(config.seed, "mined-region", tag, m, negatives[m])
            for m in table.module_names
        }
        mined_expressions = {
            m: hash_uniform(config.seed, "mined-expr", tag, m, negatives[m])
            for m in table.module_names
        }
        rank = rank_loss(positive, in_batch_region, in_batch_expression, config.margin)
        mined = mine_loss(positive, mined_regions, mined_expressions, config.margin)
        sums["rank"] += rank
        sums["mine"] += mined
        sums["total"] += total_loss(rank, mined, config.mine_weight)

    _print_summary(
        {
            "epoch": table.epoch,
            "iterations": args.iterations,
            "margin": config.margin,
            "mean_mine_loss": sums["mine"] / args.iterations,
            "mean_rank_loss": sums["rank"] / args.iterations,
            "mean_total_loss": sums["total"] / args.iterations,
            "refreshes": refreshes,
            "regions": len(embeddings),
        }
    )
    return 0


def cmd_schema_check(args: argparse.Namespace) -> int:
    corpus = load_corpus_path(args.corpus, _load_synonyms(args.synonyms))
    corpus.verify_index()
    _print_summary(
        {
            "categories": len(corpus.category_index),
            "images": len(corpus.graphs),
            "ok": True,
            "regions": sum(len(g.nodes) for g in corpus.graphs.values()),
        }
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="refsynth",
        description="Synthesize referring expressions and evaluate region scorers.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, help="overrides the config seed")
        p.add_argument("--synonyms", help="synonym table JSON")

    p = sub.add_parser("generate", help="synthesize expressions from a corpus")
    common(p)
    p.add_argument("--corpus", required=True, help="scene-graph corpus JSON")
    p.add_argument("--out", required=True, help="output expressions JSONL")
    p.add_argument("--lexicon", help="attribute-category lexicon JSON")
    p.add_argument("--templates", help="surface template JSON")
    p.add_argument("--workers", type=int, help="process count (images are the unit of work)")
    p.add_argument("--max-per-region", type=int, dest="max_per_region")
    p.add_argument("--log", help="write a generation log JSON here")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("distract", help="attach distractor images to expressions")
    common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--expressions", required=True, help="expressions JSONL from generate")
    p.add_argument("--out", required=True, help="output task instances JSONL")
    p.add_argument("--lexicon", help="attribute-category lexicon JSON")
    p.add_argument("--per-type", type=int, dest="per_type", help="distractors per type")
    p.add_argument("--log", help="write a discard log JSON here")
    p.set_defaults(func=cmd_distract)

    p = sub.add_parser("split", help="partition instances by target image")
    common(p)
    p.add_argument("--instances", required=True, help="task instances JSONL")
    p.add_argument("--out-dir", required=True, dest="out_dir")
    p.add_argument("--ratios", help="three comma-separated fractions summing to 1")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("stats", help="summarize a corpus and its derived data")
    common(p)
    p.add_argument("--corpus")
    p.add_argument("--expressions")
    p.add_argument("--instances")
    p.add_argument("--top-k", type=int, default=20, dest="top_k")
    p.add_argument("--json", action="store_true", help="JSON instead of a table")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("eval", help="score a model under the selection protocol")
    common(p)
    p.add_argument("--instances", required=True)
    p.add_argument("--corpus", help="needed by the oracle scorer")
    p.add_argument("--lexicon")
    p.add_argument("--scorer", choices=("oracle", "constant", "hash-random"))
    p.add_argument("--scores-file", dest="scores_file", help="precomputed scores JSON")
    p.add_argument("--command", help="scorer subprocess, one JSON line per query")
    p.add_argument("--settings", nargs="+", choices=[s.value for s in Setting])
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("mine-demo", help="run the hard-negative sampler and losses")
    common(p)
    p.add_argument("--corpus", help="embed this corpus; omitted means synthetic regions")
    p.add_argument("--regions", type=int, default=256, help="synthetic region count")
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--iterations", type=int, default=200)
    p.add_argument("--margin", type=float)
    p.set_defaults(func=cmd_mine_demo)

    p = sub.add_parser("schema-check", help="validate a corpus file")
    common(p)
    p.add_argument("--corpus", required=True)
    p.set_defaults(func=cmd_schema_check)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args.verbose)
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("%s", exc)
        return 2
    except EmptyResult as exc:
        log.error("%s", exc)
        return 4
    except (DataError, OSError) as exc:
        log.error("%s", exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())
