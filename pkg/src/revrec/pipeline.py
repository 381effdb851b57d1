"""End-to-end orchestration: staged pipeline with persisted artifacts.

Stages (ingest, train, predict, assign, eval, plus coarsen and
baseline) each read the previous stage's files from the working
directory and write their own, so a run is resumable from any persisted
stage and stage-by-stage execution is byte-identical to one-shot
execution.  A manifest records the config, input digests, corpus
statistics, and artifact digests; identical seed and inputs give a
bit-identical manifest.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from revrec import assign as assign_mod
from revrec import baselines, corpus, metrics, mlc, taxonomy
from revrec.encoder import (
    ModelDims,
    TrainConfig,
    forward,
    load_params,
    save_params,
    train,
)

logger = logging.getLogger(__name__)

ARTIFACTS = (
    "vocabulary.tsv",
    "profiles.jsonl",
    "test_papers.jsonl",
    "corpus_stats.json",
    "model.npz",
    "loss_history.json",
    "features_train.txt",
    "features_test.txt",
    "scores.txt",
    "assignments.tsv",
    "metrics.kv",
    "metrics.txt",
)


class StageError(RuntimeError):
    """A pipeline stage failed; carries the stage name for the CLI."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


@dataclass
class PipelineConfig:
    records: str
    taxonomy: str
    workdir: str
    seed: int = 0
    test_year: int = 2017
    min_papers: int = 15
    min_count: int = 5
    max_sentences: int = 100
    max_tokens: int = 50
    embed_dim: int = 100
    hidden_dim: int = 50
    attn_dim: int = 100
    epochs: int = 10
    batch_size: int = 32
    learning_rate: float = 1e-3
    mlc_kind: str = "network_head"
    knn_k: int = 10
    assign_k: int = assign_mod.DEFAULT_ASSIGN_K
    metric_ks: list[int] = field(default_factory=lambda: list(metrics.DEFAULT_K_GRID))
    exclude_authors: bool = False
    external_scores: str | None = None

    def __post_init__(self):
        positive = (
            "min_papers", "min_count", "max_sentences", "max_tokens", "embed_dim",
            "hidden_dim", "attn_dim", "batch_size", "assign_k", "knn_k",
        )
        for name in positive:
            if getattr(self, name) < 1:
                raise ValueError(f"config field {name} must be >= 1")
        if self.epochs < 0:
            raise ValueError("config field epochs must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("config field learning_rate must be positive")
        if any(k < 1 for k in self.metric_ks):
            raise ValueError("metric_ks entries must be >= 1")
        if self.mlc_kind not in mlc.MLC_KINDS + ("external",):
            raise ValueError(f"unknown mlc_kind {self.mlc_kind!r}")

    @classmethod
    def from_file(cls, path, overrides: dict | None = None) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"{path}: unknown config fields {sorted(unknown)}")
        if overrides:
            data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @property
    def workpath(self) -> Path:
        return Path(self.workdir)


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def require_artifact(config: PipelineConfig, stage: str, filename: str) -> Path:
    path = config.workpath / filename
    if not path.exists():
        raise StageError(stage, f"missing artifact {filename}; run the earlier stages first")
    return path


def validate_inputs(config: PipelineConfig, stage: str = "config") -> None:
    if not Path(config.records).exists():
        raise StageError(stage, f"records: path not found: {config.records}")
    if not Path(config.taxonomy).exists():
        raise StageError(stage, f"taxonomy: path not found: {config.taxonomy}")


def _dump_json(obj, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Stage: ingest
# ---------------------------------------------------------------------------

def stage_ingest(config: PipelineConfig) -> dict:
    validate_inputs(config, "ingest")
    work = config.workpath
    work.mkdir(parents=True, exist_ok=True)

    tree = taxonomy.load_taxonomy_file(config.taxonomy)
    records = corpus.read_records(config.records)
    for rec in records:
        for label in rec.labels:
            try:
                tree.label_id(label)
            except KeyError:
                raise StageError(
                    "ingest", f"record {rec.paper_id!r} carries unknown label {label!r}"
                ) from None

    train_records, test_records = corpus.split_by_year(records, config.test_year)
    vocabulary = corpus.build_vocabulary(
        (corpus.record_sentences(r) for r in train_records), config.min_count
    )
    profiles = corpus.build_reviewer_profiles(
        train_records, tree, vocabulary,
        min_papers=config.min_papers,
        max_sentences=config.max_sentences,
        max_tokens=config.max_tokens,
    )
    if not profiles:
        raise StageError("ingest", f"no authors reach min_papers={config.min_papers}")
    papers = corpus.make_paper_records(
        test_records, tree, vocabulary,
        max_sentences=config.max_sentences,
        max_tokens=config.max_tokens,
    )

    vocabulary.save(work / "vocabulary.tsv")
    with open(work / "profiles.jsonl", "w", encoding="utf-8") as fh:
        for p in profiles:
            fh.write(json.dumps({
                "reviewer_id": p.reviewer_id,
                "publication_count": p.publication_count,
                "labels": sorted(p.label_set),
                "sentences": [list(s) for s in p.document.sentences],
            }, sort_keys=True) + "\n")
    with open(work / "test_papers.jsonl", "w", encoding="utf-8") as fh:
        for p in papers:
            fh.write(json.dumps({
                "paper_id": p.paper_id,
                "year": p.year,
                "authors": list(p.author_ids),
                "labels": sorted(p.label_set),
                "sentences": [list(s) for s in p.document.sentences],
            }, sort_keys=True) + "\n")
    stats = corpus.corpus_statistics(profiles, papers, tree.num_labels)
    _dump_json(stats, work / "corpus_stats.json")
    return stats


def load_profiles(config: PipelineConfig, stage: str) -> list[corpus.ReviewerProfile]:
    path = require_artifact(config, stage, "profiles.jsonl")
    profiles = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            profiles.append(corpus.ReviewerProfile(
                reviewer_id=obj["reviewer_id"],
                document=corpus.Document(
                    owner_id=obj["reviewer_id"],
                    sentences=tuple(tuple(s) for s in obj["sentences"]),
                ),
                label_set=frozenset(obj["labels"]),
                publication_count=obj["publication_count"],
            ))
    return profiles


def load_papers(config: PipelineConfig, stage: str) -> list[corpus.PaperRecord]:
    path = require_artifact(config, stage, "test_papers.jsonl")
    papers = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            papers.append(corpus.PaperRecord(
                paper_id=obj["paper_id"],
                document=corpus.Document(
                    owner_id=obj["paper_id"],
                    sentences=tuple(tuple(s) for s in obj["sentences"]),
                ),
                label_set=frozenset(obj["labels"]),
                year=obj["year"],
                author_ids=tuple(obj["authors"]),
            ))
    return papers


def load_stats(config: PipelineConfig, stage: str) -> dict:
    with open(require_artifact(config, stage, "corpus_stats.json"), encoding="utf-8") as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# Stage: train
# ---------------------------------------------------------------------------

def stage_train(config: PipelineConfig) -> list[float]:
    work = config.workpath
    vocabulary = corpus.Vocabulary.load(require_artifact(config, "train", "vocabulary.tsv"))
    profiles = load_profiles(config, "train")
    stats = load_stats(config, "train")
    dims = ModelDims(
        vocab_size=len(vocabulary),
        embed_dim=config.embed_dim,
        hidden_dim=config.hidden_dim,
        attn_dim=config.attn_dim,
        num_labels=stats["labels"],
    )
    train_config = TrainConfig(
        epochs=config.epochs,
        batch_size=config.batch_size,
        learning_rate=config.learning_rate,
        seed=config.seed,
    )
    try:
        result = train(profiles, dims, train_config)
    except Exception as exc:
        raise StageError("train", str(exc)) from exc
    save_params(result.params, work / "model.npz")
    _dump_json(result.epoch_losses, work / "loss_history.json")
    return result.epoch_losses


# ---------------------------------------------------------------------------
# Stage: predict
# ---------------------------------------------------------------------------

def _write_scores(scores: np.ndarray, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{scores.shape[0]} {scores.shape[1]}\n")
        for row in scores:
            fh.write(" ".join(f"{i}:{float(row[i])!r}" for i in np.flatnonzero(row)) + "\n")


def stage_predict(config: PipelineConfig) -> np.ndarray:
    work = config.workpath
    profiles = load_profiles(config, "predict")
    papers = load_papers(config, "predict")
    stats = load_stats(config, "predict")
    num_labels = stats["labels"]
    params = load_params(require_artifact(config, "predict", "model.npz"))

    reviewer_vectors = np.stack([forward(p.document, params).document_vector for p in profiles])
    paper_vectors = np.stack([forward(p.document, params).document_vector for p in papers])
    mlc.export_sparse_dataset(
        reviewer_vectors, [p.label_set for p in profiles], work / "features_train.txt", num_labels
    )
    mlc.export_sparse_dataset(
        paper_vectors, [p.label_set for p in papers], work / "features_test.txt", num_labels
    )

    if config.mlc_kind == "external":
        scores_file = Path(config.external_scores or (work / "external_scores.txt"))
        if not scores_file.exists():
            raise StageError(
                "predict",
                f"external scores file not found: {scores_file}; run the external "
                "classifier on features_train.txt / features_test.txt first",
            )
        scores = mlc.import_scores(scores_file, num_labels)
        if scores.shape[0] != len(papers):
            raise StageError(
                "predict",
                f"external scores have {scores.shape[0]} rows, expected {len(papers)}",
            )
    else:
        model = mlc.train_mlc(
            config.mlc_kind,
            reviewer_vectors,
            [p.label_set for p in profiles],
            num_labels=num_labels,
            k=config.knn_k,
            encoder_params=params,
        )
        scores = np.stack([mlc.predict_scores(model, vec) for vec in paper_vectors])
    _write_scores(scores, work / "scores.txt")
    return scores


# ---------------------------------------------------------------------------
# Stage: assign
# ---------------------------------------------------------------------------

def stage_assign(config: PipelineConfig) -> list[assign_mod.Recommendation]:
    work = config.workpath
    profiles = load_profiles(config, "assign")
    papers = load_papers(config, "assign")
    stats = load_stats(config, "assign")
    scores = mlc.import_scores(require_artifact(config, "assign", "scores.txt"))
    if scores.shape != (len(papers), stats["labels"]):
        raise StageError("assign", f"scores.txt shape {scores.shape} does not match corpus")

    reviewers = [(p.reviewer_id, p.label_set) for p in profiles]
    k = min(config.assign_k, stats["labels"])
    recommendations = []
    for paper, row in zip(papers, scores):
        excluded = set(paper.author_ids) if config.exclude_authors else set()
        if all(rid in excluded for rid, _ in reviewers):
            rec = assign_mod.Recommendation(
                paper_id=paper.paper_id, predicted_top_k=[], beta_star=0,
                candidates=[], no_overlap=True,
            )
        else:
            rec = assign_mod.mlbra(row, reviewers, k, paper_id=paper.paper_id, excluded=excluded)
        recommendations.append(rec)
    assign_mod.write_assignment_report(recommendations, work / "assignments.tsv")
    return recommendations


# ---------------------------------------------------------------------------
# Stage: eval
# ---------------------------------------------------------------------------

def _assignment_outcomes(config: PipelineConfig, stage: str) -> list[metrics.AssignmentOutcome]:
    profiles = load_profiles(config, stage)
    papers = load_papers(config, stage)
    labels_by_reviewer = {p.reviewer_id: p.label_set for p in profiles}
    rows = assign_mod.read_assignment_report(require_artifact(config, stage, "assignments.tsv"))
    by_paper = {r.paper_id: r for r in rows}
    outcomes = []
    for paper in papers:
        rec = by_paper.get(paper.paper_id)
        if rec is None:
            raise StageError(stage, f"assignments.tsv is missing paper {paper.paper_id!r}")
        top = rec.top_reviewer
        outcomes.append(metrics.AssignmentOutcome(
            paper_id=paper.paper_id,
            true_labels=paper.label_set,
            reviewer_labels=labels_by_reviewer.get(top.reviewer_id) if top else None,
            no_overlap=rec.no_overlap,
        ))
    return outcomes


def stage_eval(config: PipelineConfig) -> metrics.MetricsReport:
    work = config.workpath
    papers = load_papers(config, "eval")
    stats = load_stats(config, "eval")
    scores = mlc.import_scores(require_artifact(config, "eval", "scores.txt"))
    if scores.shape[0] != len(papers):
        raise StageError("eval", f"scores.txt has {scores.shape[0]} rows, expected {len(papers)}")

    rankings = [mlc.top_k(row, stats["labels"]) for row in scores]
    recalls, ndcgs = metrics.aggregate_label_metrics(
        rankings, [p.label_set for p in papers], config.metric_ks
    )
    outcomes = _assignment_outcomes(config, "eval")
    report = metrics.MetricsReport(
        ks=list(config.metric_ks),
        recall=recalls,
        ndcg=ndcgs,
        accuracy_value=metrics.accuracy(outcomes),
        num_papers=len(papers),
    )
    (work / "metrics.kv").write_text(report.as_kv_lines(), encoding="utf-8")
    (work / "metrics.txt").write_text(report.as_table(), encoding="utf-8")
    return report


# ---------------------------------------------------------------------------
# Stage: coarsen / baseline
# ---------------------------------------------------------------------------

def stage_coarsen(config: PipelineConfig, strategy: int) -> float:
    if strategy not in (1, 2):
        raise StageError("coarsen", f"strategy must be 1 or 2, got {strategy}")
    validate_inputs(config, "coarsen")
    tree = taxonomy.load_taxonomy_file(config.taxonomy)
    outcomes = _assignment_outcomes(config, "coarsen")
    value = metrics.coarse_accuracy(outcomes, strategy, tree)
    out = config.workpath / f"coarse_strategy{strategy}.kv"
    out.write_text(
        f"papers={len(outcomes)}\ncoarse_accuracy_strategy{strategy}={value!r}\n",
        encoding="utf-8",
    )
    return value


def stage_baseline(config: PipelineConfig) -> float:
    work = config.workpath
    profiles = load_profiles(config, "baseline")
    papers = load_papers(config, "baseline")
    vocabulary = corpus.Vocabulary.load(require_artifact(config, "baseline", "vocabulary.tsv"))

    model = baselines.fit_tfidf([p.document for p in profiles], len(vocabulary))
    reviewer_vectors = [(p.reviewer_id, baselines.tfidf_vector(p.document, model)) for p in profiles]
    labels_by_reviewer = {p.reviewer_id: p.label_set for p in profiles}
    outcomes = []
    for paper in papers:
        result = baselines.baseline_retrieve(
            baselines.tfidf_vector(paper.document, model), reviewer_vectors
        )
        outcomes.append(metrics.AssignmentOutcome(
            paper_id=paper.paper_id,
            true_labels=paper.label_set,
            reviewer_labels=labels_by_reviewer.get(result.reviewer_id) if result.reviewer_id else None,
            no_overlap=result.failed,
        ))
    value = metrics.accuracy(outcomes)
    (work / "baseline.kv").write_text(
        f"papers={len(outcomes)}\nbaseline_accuracy={value!r}\n", encoding="utf-8"
    )
    return value


# ---------------------------------------------------------------------------
# Full pipeline
# ---------------------------------------------------------------------------

def run_pipeline(config: PipelineConfig) -> dict:
    """Ingest, train, predict, assign, and evaluate; write the run manifest."""
    validate_inputs(config, "run")
    work = config.workpath
    work.mkdir(parents=True, exist_ok=True)

    timings: dict[str, float] = {}
    stages = (
        ("ingest", stage_ingest),
        ("train", stage_train),
        ("predict", stage_predict),
        ("assign", stage_assign),
        ("eval", stage_eval),
    )
    for name, fn in stages:
        started = time.perf_counter()
        fn(config)
        timings[name] = time.perf_counter() - started
        logger.info("stage %s: %.1fs", name, timings[name])

    manifest = {
        "config": config.to_dict(),
        "inputs": {
            "records": _sha256(Path(config.records)),
            "taxonomy": _sha256(Path(config.taxonomy)),
        },
        "statistics": load_stats(config, "run"),
        "artifacts": {
            name: _sha256(work / name) for name in ARTIFACTS if (work / name).exists()
        },
    }
    # timings vary run to run, so they live outside the reproducible manifest
    _dump_json(manifest, work / "manifest.json")
    _dump_json(timings, work / "timings.json")
    return manifest
