"""Planted-topic synthetic corpus for end-to-end verification.

Every label owns a few signature tokens.  Reviewer-authored training
papers mix signature tokens of the paper's labels with shared filler
tokens and author-specific tokens; test papers additionally carry
"distractor" personal tokens of unrelated reviewers, which mislead
surface-similarity retrieval but not label-supervised prediction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from revrec.corpus import RawRecord, write_records
from revrec.taxonomy import format_path

RECORDS_FILE = "records.jsonl"
TAXONOMY_FILE = "taxonomy.txt"
CONFIG_FILE = "config.json"


@dataclass
class SyntheticConfig:
    num_areas: int = 4
    labels_per_area: int = 5
    signature_tokens_per_label: int = 5
    num_reviewers: int = 200
    reviewer_labels_min: int = 2
    reviewer_labels_max: int = 4
    papers_per_reviewer_min: int = 5
    papers_per_reviewer_max: int = 7
    num_test_papers: int = 100
    paper_labels_max: int = 2
    num_filler_tokens: int = 150
    personal_tokens_per_reviewer: int = 3
    sentence_length_min: int = 6
    sentence_length_max: int = 9
    abstract_sentences: int = 3
    train_years: tuple[int, ...] = (2014, 2015, 2016)
    test_year: int = 2017
    seed: int = 13

    @property
    def num_labels(self) -> int:
        return self.num_areas * self.labels_per_area


def label_paths(config: SyntheticConfig) -> list[tuple[str, ...]]:
    """Taxonomy paths of length 3-5 sharing per-area prefixes."""
    paths = []
    for a in range(config.num_areas):
        area = ("cs", f"area{a}")
        for j in range(config.labels_per_area):
            if j % 5 in (0, 1):
                paths.append(area + (f"theme{a}0", f"topic{a}{j}"))
            elif j % 5 in (2, 3):
                paths.append(area + (f"theme{a}1", f"topic{a}{j}", f"detail{a}{j}"))
            else:
                paths.append(area + (f"theme{a}2",))
    return paths


def signature_tokens(config: SyntheticConfig, label: int) -> list[str]:
    return [f"sig{label:02d}w{s}" for s in range(config.signature_tokens_per_label)]


def personal_tokens(config: SyntheticConfig, reviewer: int) -> list[str]:
    return [f"pers{reviewer:03d}n{m}" for m in range(config.personal_tokens_per_reviewer)]


def _sentence(rng, config, labels, sig_share, filler_share, personal_pool=()):
    """One sentence: signature tokens, shared fillers, and personal tokens.

    The remainder mass after sig_share + filler_share draws from
    personal_pool (the author for training papers, label-disjoint
    distractor reviewers for test papers).
    """
    length = int(rng.integers(config.sentence_length_min, config.sentence_length_max + 1))
    tokens = []
    for _ in range(length):
        roll = rng.random()
        if roll >= sig_share + filler_share and personal_pool:
            owner = personal_pool[rng.integers(len(personal_pool))]
            tokens.append(personal_tokens(config, owner)[rng.integers(config.personal_tokens_per_reviewer)])
        elif roll < sig_share:
            label = int(labels[rng.integers(len(labels))])
            tokens.append(signature_tokens(config, label)[rng.integers(config.signature_tokens_per_label)])
        else:
            tokens.append(f"filler{rng.integers(config.num_filler_tokens):03d}")
    return " ".join(tokens)


def _paper_text(rng, config, labels, personal_pool, abstract_sig_share, personal_share):
    # the title spans every topic; each abstract sentence focuses on one
    title = _sentence(rng, config, labels, sig_share=0.70, filler_share=0.30)
    abstract = ". ".join(
        _sentence(rng, config, [labels[i % len(labels)]], sig_share=abstract_sig_share,
                  filler_share=1.0 - abstract_sig_share - personal_share,
                  personal_pool=personal_pool)
        for i in range(config.abstract_sentences)
    )
    return title + ".", abstract + "."


def _disjoint_reviewers(rng, reviewer_labels, paper_labels, count):
    """Reviewers sharing no label with the paper, in random order."""
    paper_set = set(paper_labels)
    picked = []
    for r in rng.permutation(len(reviewer_labels)):
        if paper_set.isdisjoint(reviewer_labels[int(r)]):
            picked.append(int(r))
            if len(picked) == count:
                break
    return picked


def generate_records(config: SyntheticConfig) -> tuple[list[RawRecord], list[tuple[str, ...]]]:
    """All train and test records plus the taxonomy paths."""
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0]))
    paths = label_paths(config)
    records = []
    reviewer_labels = []
    for r in range(config.num_reviewers):
        count = int(rng.integers(config.reviewer_labels_min, config.reviewer_labels_max + 1))
        reviewer_labels.append(sorted(int(l) for l in rng.choice(config.num_labels, size=count, replace=False)))

    seq = 0
    for r in range(config.num_reviewers):
        own = reviewer_labels[r]
        n_papers = int(rng.integers(config.papers_per_reviewer_min, config.papers_per_reviewer_max + 1))
        for i in range(n_papers):
            # cycle through the reviewer's labels so the union covers all of them
            labels = {own[i % len(own)]}
            if len(own) > 1 and rng.random() < 0.4:
                labels.add(int(own[rng.integers(len(own))]))
            labels = sorted(labels)
            title, abstract = _paper_text(rng, config, labels, personal_pool=[r],
                                          abstract_sig_share=0.50, personal_share=0.25)
            records.append(
                RawRecord(
                    paper_id=f"p{seq:05d}",
                    title=title,
                    abstract=abstract,
                    author_ids=(f"r{r:03d}",),
                    year=int(config.train_years[int(rng.integers(len(config.train_years)))]),
                    labels=tuple(format_path(paths[l]) for l in labels),
                )
            )
            seq += 1

    for t in range(config.num_test_papers):
        count = int(rng.integers(1, config.paper_labels_max + 1))
        labels = sorted(int(l) for l in rng.choice(config.num_labels, size=count, replace=False))
        distractors = _disjoint_reviewers(rng, reviewer_labels, labels, count=2)
        title, abstract = _paper_text(rng, config, labels, personal_pool=distractors,
                                      abstract_sig_share=0.55, personal_share=0.15)
        records.append(
            RawRecord(
                paper_id=f"t{t:04d}",
                title=title,
                abstract=abstract,
                author_ids=(f"r{int(rng.integers(config.num_reviewers)):03d}",),
                year=config.test_year,
                labels=tuple(format_path(paths[l]) for l in labels),
            )
        )
    return records, paths


def reference_pipeline_config(
    config: SyntheticConfig, out_dir: Path, seed: int = 7
) -> dict:
    """The bundled end-to-end configuration for the planted corpus."""
    return {
        "records": str(out_dir / RECORDS_FILE),
        "taxonomy": str(out_dir / TAXONOMY_FILE),
        "workdir": str(out_dir / "run"),
        "seed": seed,
        "test_year": config.test_year,
        "min_papers": config.papers_per_reviewer_min,
        "min_count": 1,
        "max_sentences": 60,
        "max_tokens": 30,
        "embed_dim": 32,
        "hidden_dim": 24,
        "attn_dim": 24,
        "epochs": 30,
        "batch_size": 8,
        "learning_rate": 0.02,
        "mlc_kind": "network_head",
        "knn_k": 10,
        "assign_k": 3,
        "metric_ks": [1, 3, 5, 7, 10, 13],
        "exclude_authors": False,
    }


def generate_corpus(config: SyntheticConfig, out_dir) -> dict:
    """Write records, taxonomy, and a ready-to-run pipeline config."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records, paths = generate_records(config)
    write_records(records, out_dir / RECORDS_FILE)
    seen = set()
    with open(out_dir / TAXONOMY_FILE, "w", encoding="utf-8") as fh:
        for path in paths:
            if path not in seen:
                seen.add(path)
                fh.write(format_path(path) + "\n")
    pipeline_config = reference_pipeline_config(config, out_dir)
    with open(out_dir / CONFIG_FILE, "w", encoding="utf-8") as fh:
        json.dump(pipeline_config, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return pipeline_config
