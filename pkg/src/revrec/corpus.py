"""Corpus ingestion: records, tokenization, vocabularies, profiles, splits.

Input records are line-delimited JSON objects with fields
paper_id, title, abstract, authors, year, labels.  All derived
structures (vocabulary order, profile order, encoded documents) are
deterministic functions of the input bytes.
"""

from __future__ import annotations

import json
import re
import warnings
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"
PAD_INDEX = 0
UNK_INDEX = 1

# Sentences end at . ! ? followed by whitespace; tokens are maximal
# alphanumeric runs (underscore excluded) of the lowercased text.
_SENTENCE_BOUNDARY = re.compile(r"(?<=[.!?])\s+")
_TOKEN = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[list[str]]:
    """Split text into sentences of lowercase tokens; empty sentences dropped."""
    sentences = []
    for chunk in _SENTENCE_BOUNDARY.split(text.lower()):
        tokens = _TOKEN.findall(chunk)
        if tokens:
            sentences.append(tokens)
    return sentences


@dataclass(frozen=True)
class RawRecord:
    """One publication as ingested: identifiers, text, authorship, labels."""

    paper_id: str
    title: str
    abstract: str
    author_ids: tuple[str, ...]
    year: int
    labels: tuple[str, ...]

    def __post_init__(self):
        if not self.paper_id:
            raise ValueError("record has empty paper_id")
        if not self.labels:
            raise ValueError(f"record {self.paper_id!r} has no labels")
        if not 1000 <= self.year <= 9999:
            raise ValueError(f"record {self.paper_id!r} has non-4-digit year {self.year}")


@dataclass(frozen=True)
class Document:
    """Encoded text: sentences of vocabulary indices, owned by a paper or reviewer."""

    owner_id: str
    sentences: tuple[tuple[int, ...], ...]

    @property
    def num_sentences(self) -> int:
        return len(self.sentences)

    @property
    def num_tokens(self) -> int:
        return sum(len(s) for s in self.sentences)


@dataclass(frozen=True)
class ReviewerProfile:
    """A reviewer: concatenated publication text plus the union of paper labels."""

    reviewer_id: str
    document: Document
    label_set: frozenset[int]
    publication_count: int


@dataclass(frozen=True)
class PaperRecord:
    """A test paper with its held-out true label set."""

    paper_id: str
    document: Document
    label_set: frozenset[int]
    year: int
    author_ids: tuple[str, ...] = ()


@dataclass
class Vocabulary:
    """Token-to-index map with reserved PAD=0 and UNK=1 entries."""

    token_to_index: dict[str, int] = field(default_factory=dict)
    min_count: int = 1

    def __post_init__(self):
        self.token_to_index.setdefault(PAD_TOKEN, PAD_INDEX)
        self.token_to_index.setdefault(UNK_TOKEN, UNK_INDEX)

    def __len__(self) -> int:
        return len(self.token_to_index)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_index

    def index(self, token: str) -> int:
        return self.token_to_index.get(token, UNK_INDEX)

    def index_to_token(self) -> list[str]:
        out = [""] * len(self.token_to_index)
        for token, idx in self.token_to_index.items():
            out[idx] = token
        return out

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for token in self.index_to_token():
                fh.write(f"{token}\t{self.token_to_index[token]}\n")

    @classmethod
    def load(cls, path, min_count: int = 1) -> "Vocabulary":
        mapping: dict[str, int] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                try:
                    token, idx = line.split("\t")
                    mapping[token] = int(idx)
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: malformed vocabulary line") from exc
        vocab = cls(mapping, min_count)
        indices = sorted(mapping.values())
        if indices != list(range(len(mapping))):
            raise ValueError(f"{path}: vocabulary indices are not dense in [0, V)")
        if mapping.get(PAD_TOKEN) != PAD_INDEX or mapping.get(UNK_TOKEN) != UNK_INDEX:
            raise ValueError(f"{path}: missing reserved PAD/UNK entries")
        return vocab


def build_vocabulary(documents: Iterable[Sequence[Sequence[str]]], min_count: int = 1) -> Vocabulary:
    """Index every token with corpus frequency >= min_count.

    Indices start at 2 (after PAD/UNK) and run in descending frequency,
    ties broken lexicographically.
    """
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    counts: Counter[str] = Counter()
    for doc in documents:
        for sentence in doc:
            counts.update(sentence)
    kept = sorted(
        (t for t, c in counts.items() if c >= min_count),
        key=lambda t: (-counts[t], t),
    )
    mapping = {PAD_TOKEN: PAD_INDEX, UNK_TOKEN: UNK_INDEX}
    for offset, token in enumerate(kept):
        mapping[token] = offset + 2
    return Vocabulary(mapping, min_count)


def encode(
    text,
    vocabulary: Vocabulary,
    max_sentences: int = 100,
    max_tokens: int = 50,
    owner_id: str = "",
) -> Document:
    """Encode raw text (or pre-tokenized sentences) into vocabulary indices.

    Out-of-vocabulary tokens map to UNK; sentences keep their first
    max_tokens tokens and documents their first max_sentences sentences.
    """
    if isinstance(text, str):
        sentences = tokenize(text)
    else:
        sentences = [list(s) for s in text if len(s) > 0]
    encoded = tuple(
        tuple(vocabulary.index(tok) for tok in sentence[:max_tokens])
        for sentence in sentences[:max_sentences]
    )
    if not encoded:
        raise ValueError(f"empty document (owner {owner_id!r})")
    return Document(owner_id=owner_id, sentences=encoded)


def record_sentences(record: RawRecord) -> list[list[str]]:
    """Tokenized title sentences followed by tokenized abstract sentences."""
    return tokenize(record.title) + tokenize(record.abstract)


def build_reviewer_profiles(
    records: Sequence[RawRecord],
    registry,
    vocabulary: Vocabulary,
    min_papers: int = 15,
    max_sentences: int = 100,
    max_tokens: int = 50,
) -> list[ReviewerProfile]:
    """One profile per author with at least min_papers records.

    The profile document concatenates the author's papers' sentences in
    (year, paper_id) order; the label set is the union of the papers'
    labels.  `registry` maps label path strings to dense label ids.
    """
    if min_papers < 1:
        raise ValueError(f"min_papers must be >= 1, got {min_papers}")
    by_author: dict[str, list[RawRecord]] = defaultdict(list)
    for rec in records:
        for author in rec.author_ids:
            by_author[author].append(rec)

    profiles = []
    for author in sorted(by_author):
        recs = sorted(by_author[author], key=lambda r: (r.year, r.paper_id))
        if len(recs) < min_papers:
            continue
        sentences: list[list[str]] = []
        labels: set[int] = set()
        for rec in recs:
            sentences.extend(record_sentences(rec))
            labels.update(registry.label_id(p) for p in rec.labels)
        document = encode(sentences, vocabulary, max_sentences, max_tokens, owner_id=author)
        profiles.append(
            ReviewerProfile(
                reviewer_id=author,
                document=document,
                label_set=frozenset(labels),
                publication_count=len(recs),
            )
        )
    return profiles


def make_paper_records(
    records: Sequence[RawRecord],
    registry,
    vocabulary: Vocabulary,
    max_sentences: int = 100,
    max_tokens: int = 50,
) -> list[PaperRecord]:
    """Encode records as test papers with held-out true label sets."""
    papers = []
    for rec in records:
        document = encode(
            record_sentences(rec), vocabulary, max_sentences, max_tokens, owner_id=rec.paper_id
        )
        papers.append(
            PaperRecord(
                paper_id=rec.paper_id,
                document=document,
                label_set=frozenset(registry.label_id(p) for p in rec.labels),
                year=rec.year,
                author_ids=rec.author_ids,
            )
        )
    return papers


def split_by_year(
    records: Sequence[RawRecord], test_year: int
) -> tuple[list[RawRecord], list[RawRecord]]:
    """Partition records into (train pool, test set with year == test_year)."""
    train = [r for r in records if r.year != test_year]
    test = [r for r in records if r.year == test_year]
    if not test:
        raise ValueError(f"empty test split: no records with year {test_year}")
    if not train:
        warnings.warn(f"all records fall in test year {test_year}; train pool is empty")
    return train, test


def read_records(path) -> list[RawRecord]:
    """Read line-delimited JSON records; paper ids must be unique."""
    records = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: malformed JSON record") from exc
            try:
                record = RawRecord(
                    paper_id=str(obj["paper_id"]),
                    title=obj.get("title", ""),
                    abstract=obj.get("abstract", ""),
                    author_ids=tuple(str(a) for a in obj.get("authors", [])),
                    year=int(obj["year"]),
                    labels=tuple(str(l) for l in obj["labels"]),
                )
            except (KeyError, ValueError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
            if record.paper_id in seen:
                raise ValueError(f"{path}:{lineno}: duplicate paper_id {record.paper_id!r}")
            seen.add(record.paper_id)
            records.append(record)
    return records


def write_records(records: Sequence[RawRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(
                json.dumps(
                    {
                        "paper_id": rec.paper_id,
                        "title": rec.title,
                        "abstract": rec.abstract,
                        "authors": list(rec.author_ids),
                        "year": rec.year,
                        "labels": list(rec.labels),
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def corpus_statistics(
    profiles: Sequence[ReviewerProfile],
    papers: Sequence[PaperRecord],
    num_labels: int,
) -> dict:
    """Descriptive statistics recomputed from the ingested data."""
    mean_labels_reviewer = (
        sum(len(p.label_set) for p in profiles) / len(profiles) if profiles else 0.0
    )
    mean_labels_paper = sum(len(p.label_set) for p in papers) / len(papers) if papers else 0.0
    return {
        "labels": num_labels,
        "reviewers": len(profiles),
        "papers": len(papers),
        "mean_labels_per_reviewer": mean_labels_reviewer,
        "mean_labels_per_paper": mean_labels_paper,
    }
