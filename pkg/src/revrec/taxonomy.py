"""Research-field taxonomy: a rooted tree of category paths.

A label is a full root-to-node path; nodes are keyed by their full
prefix so same-named subcategories under different parents stay
distinct.  Coarsening replaces a label path by one of two prefixes:
strategy 1 keeps the top three categories, strategy 2 drops the most
fine-grained one (never below root + top category).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import AbstractSet, Iterable, Sequence

PATH_SEPARATOR = " > "
MAX_PATH_LENGTH = 7
MIN_PATH_LENGTH = 3

LabelPath = tuple[str, ...]


def parse_path(path_string: str) -> LabelPath:
    parts = tuple(p.strip() for p in path_string.split(PATH_SEPARATOR))
    if any(not p for p in parts):
        raise ValueError(f"malformed taxonomy path: {path_string!r}")
    return parts


def format_path(path: LabelPath) -> str:
    return PATH_SEPARATOR.join(path)


def coarsen(path: Sequence[str], strategy: int) -> LabelPath:
    """Coarse-grained prefix of a label path under the given strategy."""
    if strategy == 1:
        return tuple(path[: min(3, len(path))])
    if strategy == 2:
        return tuple(path[: max(2, len(path) - 1)])
    raise ValueError(f"unknown coarsening strategy {strategy}; expected 1 or 2")


@dataclass
class TaxonomyTree:
    """Category tree plus the dense label-id registry of its full paths."""

    root: str
    nodes: set[LabelPath] = field(default_factory=set)
    parent: dict[LabelPath, LabelPath] = field(default_factory=dict)
    label_paths: list[LabelPath] = field(default_factory=list)
    label_ids: dict[LabelPath, int] = field(default_factory=dict)

    @property
    def num_labels(self) -> int:
        return len(self.label_paths)

    def label_id(self, path) -> int:
        key = parse_path(path) if isinstance(path, str) else tuple(path)
        try:
            return self.label_ids[key]
        except KeyError:
            raise KeyError(f"unknown label path: {format_path(key)!r}") from None

    def path_of(self, label_id: int) -> LabelPath:
        return self.label_paths[label_id]

    def coarse_paths(self, label_ids: Iterable[int], strategy: int) -> set[LabelPath]:
        return {coarsen(self.label_paths[l], strategy) for l in label_ids}

    def coarse_match(
        self,
        paper_labels: AbstractSet[int],
        reviewer_labels: AbstractSet[int],
        strategy: int,
    ) -> bool:
        """True iff the coarsened path sets of both label sets intersect."""
        if not paper_labels or not reviewer_labels:
            raise ValueError("coarse_match requires nonempty label sets")
        paper = self.coarse_paths(paper_labels, strategy)
        return any(coarsen(self.label_paths[l], strategy) in paper for l in reviewer_labels)


def load_taxonomy(path_strings: Iterable[str]) -> TaxonomyTree:
    """Build the tree from full-path strings; ids follow first appearance."""
    paths = [parse_path(s) for s in path_strings]
    if not paths:
        raise ValueError("empty taxonomy: no label paths given")
    root = paths[0][0]
    tree = TaxonomyTree(root=root)
    tree.nodes.add((root,))
    for path in paths:
        if path[0] != root:
            raise ValueError(
                f"taxonomy paths must share one root: {path[0]!r} vs {root!r}"
            )
        if len(path) > MAX_PATH_LENGTH:
            raise ValueError(f"path too long ({len(path)} levels): {format_path(path)!r}")
        if len(path) < MIN_PATH_LENGTH:
            raise ValueError(f"path too short ({len(path)} levels): {format_path(path)!r}")
        for depth in range(2, len(path) + 1):
            prefix = path[:depth]
            if prefix not in tree.nodes:
                tree.nodes.add(prefix)
                tree.parent[prefix] = path[: depth - 1]
        if path not in tree.label_ids:
            tree.label_ids[path] = len(tree.label_paths)
            tree.label_paths.append(path)
    return tree


def load_taxonomy_file(path) -> TaxonomyTree:
    """Read one label path per line (UTF-8, duplicates permitted)."""
    with open(path, encoding="utf-8") as fh:
        lines = [line.strip() for line in fh]
    return load_taxonomy([line for line in lines if line])


def save_taxonomy_file(paths: Iterable[LabelPath], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in paths:
            fh.write(format_path(p) + "\n")
