"""Command-line interface.

Subcommands: ``serve`` (HTTP gateway), ``assess`` (one-shot deterministic
meal assessment), ``foods`` (record lookup), ``eval run`` / ``eval
ground-truth`` (the evaluation harness), and ``corpus generate`` (regrow
the bundled corpus). The eval report path writes the delimited output and
an accuracy figure next to it.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from .backend import ChatBackendConfig, HttpChatBackend
from .errors import DietAgentError
from .evalharness import (
    HttpTarget,
    InProcessTarget,
    LlmBaselineTarget,
    load_corpus,
    make_ground_truth,
    render_figure,
    render_report,
    run_eval,
    save_corpus,
)
from .foodkb import ingest, resolve_meal
from .nutrients import GuidelineSet, assess_risk, default_guidelines
from .orchestrator import render_display


def default_db_path() -> str:
    return str(resources.files("dietagent").joinpath("data/foods.jsonl"))


def default_corpus_path() -> str:
    return str(resources.files("dietagent").joinpath("data/corpus.jsonl"))


def _load_guidelines(path: str | None) -> GuidelineSet:
    return GuidelineSet.from_file(path) if path else default_guidelines()


def _add_db_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--db", default=default_db_path(), help="foods.jsonl path")
    parser.add_argument("--guidelines", default=None, help="guidelines.json path")


def cmd_serve(args) -> int:
    import uvicorn

    from .gateway import create_app

    index = ingest(args.db)
    guidelines = _load_guidelines(args.guidelines)
    backend = None
    config = ChatBackendConfig.from_env()
    if args.mode == "llm":
        backend = HttpChatBackend(config)
    app = create_app(
        index,
        guidelines,
        mode=args.mode,
        backend=backend,
        persist_dir=args.persist,
        max_steps=config.max_steps,
    )
    host, _, port = args.listen.rpartition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


def cmd_assess(args) -> int:
    index = ingest(args.db)
    guidelines = _load_guidelines(args.guidelines)
    resolution = resolve_meal(args.meal, index)
    report = assess_risk(resolution.totals, guidelines)
    doc = {
        "risk_report": report.to_dict(),
        "items": [item.summary() for item in resolution.items],
        "warnings": resolution.warnings,
    }
    if args.format == "json":
        print(json.dumps(doc, indent=2))
        return 0
    display = render_display(doc["risk_report"])
    print(f"energy: {display['totals']['energy']} kcal")
    for nutrient, label in display["labels"].items():
        if nutrient in display["percents"]:
            print(f"{nutrient}: {display['percents'][nutrient]}% of energy -> {label}")
        else:
            print(f"{nutrient}: {display['totals'][nutrient]} -> {label}")
    for warning in resolution.warnings:
        print(f"warning: {warning}")
    return 0


def cmd_foods(args) -> int:
    from .mealparse import normalize_name

    index = ingest(args.db)
    record = index.get(normalize_name(args.q))
    if record is None:
        print(f"no food record for {args.q!r}", file=sys.stderr)
        return 1
    print(record.to_line())
    return 0


def cmd_eval_run(args) -> int:
    questions = load_corpus(args.corpus)
    if args.url:
        target = HttpTarget(args.url)
    else:
        target = InProcessTarget(ingest(args.db), _load_guidelines(args.guidelines))
    reports = [run_eval(questions, target)]
    if args.baseline:
        backend = HttpChatBackend(ChatBackendConfig.from_env())
        reports.append(run_eval(questions, LlmBaselineTarget(backend)))

    rendered = render_report(reports, args.format)
    if args.out:
        Path(args.out).write_text(rendered, encoding="utf-8")
        figure_path = args.figure or str(Path(args.out).with_suffix(".png"))
        render_figure(reports, figure_path)
        print(f"wrote {args.out} and {figure_path}")
    elif args.figure:
        render_figure(reports, args.figure)
    print(render_report(reports, "table"))
    return 0


def cmd_eval_ground_truth(args) -> int:
    raw = []
    with open(args.corpus, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                doc = json.loads(line)
                raw.append({"id": doc["id"], "question": doc["question"]})
    index = ingest(args.db)
    questions, flagged = make_ground_truth(raw, index.records)
    for item in flagged:
        print(f"flagged {item['id']}: {item['reason']}", file=sys.stderr)
    if args.out:
        save_corpus(questions, args.out)
        print(f"wrote {len(questions)} questions to {args.out}")
    else:
        for question in questions:
            print(question.to_line())
    return 0


def cmd_corpus_generate(args) -> int:
    from .corpus import generate_corpus

    index = ingest(args.db)
    questions = generate_corpus(index, _load_guidelines(args.guidelines), size=args.size)
    save_corpus(questions, args.out)
    print(f"wrote {len(questions)} questions to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dietagent")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP gateway")
    _add_db_args(serve)
    serve.add_argument("--mode", choices=["deterministic", "llm"], default="deterministic")
    serve.add_argument("--listen", default="127.0.0.1:8080", help="addr:port")
    serve.add_argument("--persist", default=None, help="directory for per-session logs")
    serve.set_defaults(fn=cmd_serve)

    assess = sub.add_parser("assess", help="assess one meal deterministically")
    _add_db_args(assess)
    assess.add_argument("meal", help="meal description text")
    assess.add_argument("--format", choices=["text", "json"], default="text")
    assess.set_defaults(fn=cmd_assess)

    foods = sub.add_parser("foods", help="look up one food record")
    _add_db_args(foods)
    foods.add_argument("--q", required=True, help="food name")
    foods.set_defaults(fn=cmd_foods)

    evalp = sub.add_parser("eval", help="evaluation harness")
    evalsub = evalp.add_subparsers(dest="eval_command", required=True)

    run = evalsub.add_parser("run", help="score a corpus against a target")
    _add_db_args(run)
    run.add_argument("--corpus", default=default_corpus_path())
    group = run.add_mutually_exclusive_group()
    group.add_argument("--url", default=None, help="gateway base URL")
    group.add_argument("--in-process", action="store_true",
                       help="run the deterministic stack in-process (default)")
    run.add_argument("--out", default=None, help="write the report here")
    run.add_argument("--format", choices=["table", "csv", "json"], default="table")
    run.add_argument("--figure", default=None, help="accuracy chart path (.png)")
    run.add_argument("--baseline", action="store_true",
                     help="also run the env-configured chat model as a baseline row")
    run.set_defaults(fn=cmd_eval_run)

    truth = evalsub.add_parser("ground-truth", help="label questions with the oracle")
    _add_db_args(truth)
    truth.add_argument("--corpus", required=True, help="JSONL with id + question fields")
    truth.add_argument("--out", default=None, help="write the labeled corpus here")
    truth.set_defaults(fn=cmd_eval_ground_truth)

    corpus = sub.add_parser("corpus", help="corpus tools")
    corpussub = corpus.add_subparsers(dest="corpus_command", required=True)
    gen = corpussub.add_parser("generate", help="regrow the synthetic corpus")
    _add_db_args(gen)
    gen.add_argument("--out", required=True)
    gen.add_argument("--size", type=int, default=60)
    gen.set_defaults(fn=cmd_corpus_generate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except DietAgentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
