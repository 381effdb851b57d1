"""Reviewer recommendation toolkit.

Pipeline: ingest publication records, learn a hierarchical attention
representation of reviewer profiles, predict research-field labels for
submitted papers with a pluggable multi-label classifier, and assign
reviewers by label overlap.
"""

__version__ = "0.1.0"
