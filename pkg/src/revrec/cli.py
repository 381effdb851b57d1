"""Command-line surface: one subcommand per pipeline stage.

Configuration comes from a JSON file; command-line flags override file
values.  Exit code 0 on success, 1 with a stage-qualified message on
failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from revrec import pipeline, synthetic
from revrec.corpus import Vocabulary
from revrec.encoder import attention_highlights, format_attention_trace, load_params
from revrec.pipeline import PipelineConfig, StageError

STAGES = {
    "ingest": pipeline.stage_ingest,
    "train": pipeline.stage_train,
    "predict": pipeline.stage_predict,
    "assign": pipeline.stage_assign,
    "eval": pipeline.stage_eval,
    "baseline": pipeline.stage_baseline,
}


def _add_config_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="pipeline config JSON file")
    parser.add_argument("--records", help="override: records JSONL path")
    parser.add_argument("--taxonomy", help="override: taxonomy path file")
    parser.add_argument("--workdir", help="override: artifact directory")
    parser.add_argument("--seed", type=int, help="override: master seed")
    parser.add_argument("--epochs", type=int, help="override: training epochs")
    parser.add_argument("--batch-size", type=int, dest="batch_size")
    parser.add_argument("--learning-rate", type=float, dest="learning_rate")
    parser.add_argument("--test-year", type=int, dest="test_year")
    parser.add_argument("--min-papers", type=int, dest="min_papers")
    parser.add_argument("--min-count", type=int, dest="min_count")
    parser.add_argument("--mlc-kind", dest="mlc_kind", choices=["network_head", "knn", "external"])
    parser.add_argument("--knn-k", type=int, dest="knn_k")
    parser.add_argument("--assign-k", type=int, dest="assign_k")
    parser.add_argument("--external-scores", dest="external_scores")
    parser.add_argument(
        "--exclude-authors", dest="exclude_authors",
        action=argparse.BooleanOptionalAction, default=None,
        help="drop a paper's own authors from its candidate reviewers",
    )


_OVERRIDE_FIELDS = (
    "records", "taxonomy", "workdir", "seed", "epochs", "batch_size", "learning_rate",
    "test_year", "min_papers", "min_count", "mlc_kind", "knn_k", "assign_k",
    "external_scores", "exclude_authors",
)


def _load_config(args: argparse.Namespace) -> PipelineConfig:
    overrides = {name: getattr(args, name, None) for name in _OVERRIDE_FIELDS}
    return PipelineConfig.from_file(args.config, overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="revrec",
        description="Reviewer recommendation pipeline: label prediction and label-overlap assignment.",
    )
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log per-epoch losses and stage timings")
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="generate the bundled planted-topic corpus")
    synth.add_argument("--out", required=True, help="output directory")
    synth.add_argument("--seed", type=int, default=13, help="corpus generator seed")
    synth.add_argument("--reviewers", type=int, default=200)
    synth.add_argument("--test-papers", type=int, dest="test_papers", default=100)

    run = sub.add_parser("run", help="run ingest, train, predict, assign, and eval")
    _add_config_arguments(run)

    for name, help_text in (
        ("ingest", "build vocabulary, reviewer profiles, and the year split"),
        ("train", "fit the attention encoder on reviewer profiles"),
        ("predict", "score research-field labels for the test papers"),
        ("assign", "rank reviewers per paper by label overlap"),
        ("eval", "compute Recall@k, NDCG@k, and assignment accuracy"),
        ("baseline", "TF-IDF retrieval baseline and its accuracy"),
    ):
        stage = sub.add_parser(name, help=help_text)
        _add_config_arguments(stage)

    coarsen = sub.add_parser("coarsen", help="accuracy after label coarsening")
    _add_config_arguments(coarsen)
    coarsen.add_argument("--strategy", type=int, required=True, choices=[1, 2])

    highlight = sub.add_parser("highlight", help="export the attention trace of a test paper")
    _add_config_arguments(highlight)
    highlight.add_argument("--paper", required=True, help="paper id from the test split")
    highlight.add_argument("--threshold", type=float, default=0.1)
    highlight.add_argument("--out", help="trace file (default: <workdir>/trace_<paper>.tsv)")
    return parser


def _cmd_synth(args: argparse.Namespace) -> int:
    config = synthetic.SyntheticConfig(
        seed=args.seed, num_reviewers=args.reviewers, num_test_papers=args.test_papers
    )
    synthetic.generate_corpus(config, args.out)
    print(f"wrote corpus and config under {args.out}")
    print(f"next: revrec run --config {Path(args.out) / synthetic.CONFIG_FILE}")
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    config = _load_config(args)
    manifest = pipeline.run_pipeline(config)
    print(f"pipeline complete; manifest at {config.workpath / 'manifest.json'}")
    for name, digest in manifest["artifacts"].items():
        print(f"  {name}  {digest[:12]}")
    return 0


def _cmd_stage(args: argparse.Namespace) -> int:
    config = _load_config(args)
    result = STAGES[args.command](config)
    if args.command == "eval":
        print(result.as_table(), end="")
    elif args.command == "baseline":
        print(f"baseline_accuracy={result!r}")
    elif args.command == "train":
        print(f"trained {len(result)} epochs; final loss {result[-1]!r}" if result
              else "trained 0 epochs")
    else:
        print(f"{args.command}: done")
    return 0


def _cmd_coarsen(args: argparse.Namespace) -> int:
    config = _load_config(args)
    value = pipeline.stage_coarsen(config, args.strategy)
    print(f"coarse_accuracy_strategy{args.strategy}={value!r}")
    return 0


def _cmd_highlight(args: argparse.Namespace) -> int:
    config = _load_config(args)
    params = load_params(pipeline.require_artifact(config, "highlight", "model.npz"))
    vocabulary = Vocabulary.load(pipeline.require_artifact(config, "highlight", "vocabulary.tsv"))
    papers = pipeline.load_papers(config, "highlight")
    matches = [p for p in papers if p.paper_id == args.paper]
    if not matches:
        raise StageError("highlight", f"paper {args.paper!r} not in the test split")
    document = matches[0].document
    out = Path(args.out) if args.out else config.workpath / f"trace_{args.paper}.tsv"
    out.write_text(format_attention_trace(document, params, vocabulary), encoding="utf-8")
    report = attention_highlights(document, params, args.threshold)
    tokens = vocabulary.index_to_token()
    print(f"trace written to {out}")
    for si, ti, token_id, weight in report.ranked_tokens[:10]:
        flag = "*" if weight > args.threshold else " "
        print(f"{flag} sentence {si} token {tokens[token_id]!r} weight {weight:.4f}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(message)s",
    )
    handlers = {
        "synth": _cmd_synth,
        "run": _cmd_run,
        "coarsen": _cmd_coarsen,
        "highlight": _cmd_highlight,
    }
    handler = handlers.get(args.command, _cmd_stage)
    try:
        return handler(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
