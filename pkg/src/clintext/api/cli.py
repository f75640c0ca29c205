"""Command-line surface. Machine-readable output goes to stdout,
diagnostics to stderr; exit codes: 0 success, 1 usage error, 2 runtime
error. Query-capable subcommands print the same JSON bytes their HTTP
twins return."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .. import errors
from ..cohort import EligibilityRule, evaluate_cohort, load_events_csv, write_results_csv
from ..deid import DeidConfig, detect_phi, redact
from ..nerl import (build_cdb, evaluate_ner, load_ontology_tsv, train_meta,
                    train_self_supervised, train_supervised, train_word_embeddings)
from ..nerl.serialization import (cdb_from_bytes, cdb_to_bytes, meta_to_bytes,
                                  vocab_from_bytes, vocab_to_bytes)
from ..nerl.training import SupervisedExample
from ..index.analysis import tokenize
from .state import AppState, ServiceConfig, dump_json_bytes


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clintext",
                                     description="clinical free-text analytics toolkit")
    parser.add_argument("--config", help="service config JSON", default=None)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", help="output path", default=None)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("ingest", help="dataflow operations")
    ingest_sub = p.add_subparsers(dest="subcommand")
    p_run = ingest_sub.add_parser("run")
    p_run.add_argument("--flow", required=True, help="flow definition JSON")

    p = sub.add_parser("cdb", help="concept database operations")
    cdb_sub = p.add_subparsers(dest="subcommand")
    p_build = cdb_sub.add_parser("build")
    p_build.add_argument("--ontology", required=True, help="TSV cui<TAB>name<TAB>T|F")
    p_build.add_argument("--out", required=True)

    p = sub.add_parser("vocab", help="word embedding operations")
    vocab_sub = p.add_subparsers(dest="subcommand")
    p_train = vocab_sub.add_parser("train")
    p_train.add_argument("--corpus", required=True, help="text file, one document per line")
    p_train.add_argument("--dim", type=int, default=50)
    p_train.add_argument("--window", type=int, default=5)
    p_train.add_argument("--negatives", type=int, default=5)
    p_train.add_argument("--epochs", type=int, default=5)
    p_train.add_argument("--out", required=True)

    p = sub.add_parser("train", help="model training")
    train_sub = p.add_subparsers(dest="subcommand")
    p_ss = train_sub.add_parser("self-supervised")
    p_ss.add_argument("--cdb", required=True)
    p_ss.add_argument("--vocab", required=True)
    p_ss.add_argument("--corpus", required=True)
    p_ss.add_argument("--out", required=True)
    p_sup = train_sub.add_parser("supervised")
    p_sup.add_argument("--cdb", required=True)
    p_sup.add_argument("--vocab", required=True)
    p_sup.add_argument("--annotations", required=True,
                       help="JSONL {text,start,end,cui,correct}")
    p_sup.add_argument("--lr", type=float, default=0.1)
    p_sup.add_argument("--out", required=True)
    p_meta = train_sub.add_parser("meta")
    p_meta.add_argument("--task", required=True)
    p_meta.add_argument("--vocab", required=True)
    p_meta.add_argument("--examples", required=True,
                        help="JSONL {text,start,end,label}")
    p_meta.add_argument("--epochs", type=int, default=300)
    p_meta.add_argument("--out", required=True)

    p = sub.add_parser("annotate", help="annotation service")
    annotate_sub = p.add_subparsers(dest="subcommand")
    p_serve = annotate_sub.add_parser("serve")
    p_serve.add_argument("--host", default=None)
    p_serve.add_argument("--port", type=int, default=None)

    p = sub.add_parser("search", help="query the document index")
    p.add_argument("query")
    p.add_argument("--size", type=int, default=10)
    p.add_argument("--from", dest="offset", type=int, default=0)
    p.add_argument("--agg-field", default=None)
    p.add_argument("--agg-date", default=None)

    p = sub.add_parser("deid", help="de-identify a text file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--config", dest="deid_config", default=None,
                   help="JSON {name_dictionary, safe_list} file paths")
    p.add_argument("--spans", default=None, help="write detected spans as JSONL")

    p = sub.add_parser("cohort", help="eligibility evaluation")
    cohort_sub = p.add_subparsers(dest="subcommand")
    p_eval = cohort_sub.add_parser("eval")
    p_eval.add_argument("--events", required=True)
    p_eval.add_argument("--rule", required=True)
    p_eval.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="evaluation")
    eval_sub = p.add_subparsers(dest="subcommand")
    p_ner = eval_sub.add_parser("ner")
    p_ner.add_argument("--gold", required=True, help="JSONL {doc_id,start,end,cui}")
    p_ner.add_argument("--pred", required=True)

    return parser


def _state(args) -> AppState:
    config = ServiceConfig.from_file(args.config) if args.config else ServiceConfig()
    return AppState(config)


def _read_jsonl(path):
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            out.append(json.loads(line))
    return out


def _read_corpus(path):
    return [line for line in Path(path).read_text(encoding="utf-8").splitlines()
            if line.strip()]


def _emit(payload: dict) -> None:
    sys.stdout.buffer.write(dump_json_bytes(payload))
    sys.stdout.buffer.write(b"\n")
    sys.stdout.flush()


def _dispatch(args) -> int:
    if args.command == "ingest" and args.subcommand == "run":
        state = _state(args)
        spec = json.loads(Path(args.flow).read_text(encoding="utf-8"))
        flow_id = state.flows.register_flow_dict(spec)
        report = state.flows.run_flow(flow_id)
        state.reindex()
        if state.config.documents:
            state.docs.save()
        _emit(report.to_dict())
        return 0

    if args.command == "cdb" and args.subcommand == "build":
        cdb = build_cdb(load_ontology_tsv(args.ontology))
        Path(args.out).write_bytes(cdb_to_bytes(cdb))
        print(f"wrote {len(cdb.concepts)} concepts to {args.out}", file=sys.stderr)
        return 0

    if args.command == "vocab" and args.subcommand == "train":
        vocab = train_word_embeddings(
            _read_corpus(args.corpus), dim=args.dim, window=args.window,
            negatives=args.negatives, epochs=args.epochs, seed=args.seed)
        Path(args.out).write_bytes(vocab_to_bytes(vocab))
        print(f"trained {len(vocab)} words to {args.out}", file=sys.stderr)
        return 0

    if args.command == "train":
        cdb = None
        vocab = vocab_from_bytes(Path(args.vocab).read_bytes())
        if args.subcommand == "self-supervised":
            cdb = cdb_from_bytes(Path(args.cdb).read_bytes())
            train_self_supervised(_read_corpus(args.corpus), cdb, vocab)
            Path(args.out).write_bytes(cdb_to_bytes(cdb))
            return 0
        if args.subcommand == "supervised":
            cdb = cdb_from_bytes(Path(args.cdb).read_bytes())
            examples = [SupervisedExample(r["text"], r["start"], r["end"],
                                          r["cui"], r["correct"])
                        for r in _read_jsonl(args.annotations)]
            skipped = train_supervised(examples, cdb, vocab, lr=args.lr)
            Path(args.out).write_bytes(cdb_to_bytes(cdb))
            if skipped:
                print(f"skipped {len(skipped)} annotations without context",
                      file=sys.stderr)
            return 0
        if args.subcommand == "meta":
            rows = _read_jsonl(args.examples)
            examples = []
            for r in rows:
                tokens = tokenize(r["text"])
                covered = [i for i, t in enumerate(tokens)
                           if t.start < r["end"] and t.end > r["start"]]
                if covered:
                    examples.append((tokens, (covered[0], covered[-1] + 1), r["label"]))
            model = train_meta(args.task, examples, vocab,
                               epochs=args.epochs, seed=args.seed)
            Path(args.out).write_bytes(meta_to_bytes(model))
            return 0

    if args.command == "annotate" and args.subcommand == "serve":
        import uvicorn
        from .app import create_app
        state = _state(args)
        host, _, port = state.config.listen.partition(":")
        uvicorn.run(create_app(state.config, state),
                    host=args.host or host or "127.0.0.1",
                    port=args.port or int(port or 8000))
        return 0

    if args.command == "search":
        state = _state(args)
        _emit(state.search_payload(args.query, size=args.size, offset=args.offset,
                                   agg_field=args.agg_field, agg_date=args.agg_date))
        return 0

    if args.command == "deid":
        if args.deid_config:
            spec = json.loads(Path(args.deid_config).read_text(encoding="utf-8"))
            config = DeidConfig.from_files(spec.get("name_dictionary"),
                                           spec.get("safe_list"))
        else:
            config = DeidConfig()
        text = Path(args.infile).read_text(encoding="utf-8")
        spans = detect_phi(text, config)
        Path(args.outfile).write_text(redact(text, spans, config), encoding="utf-8")
        if args.spans:
            with Path(args.spans).open("w", encoding="utf-8") as fh:
                for s in spans:
                    fh.write(json.dumps({"start": s.start, "end": s.end,
                                         "category": s.category, "matched": s.matched}))
                    fh.write("\n")
        print(f"redacted {len(spans)} spans", file=sys.stderr)
        return 0

    if args.command == "cohort" and args.subcommand == "eval":
        events = load_events_csv(args.events)
        rule = EligibilityRule.from_dict(
            json.loads(Path(args.rule).read_text(encoding="utf-8")))
        results = evaluate_cohort(events, rule)
        write_results_csv(results, args.out)
        print(f"evaluated {len(results)} patients", file=sys.stderr)
        return 0

    if args.command == "eval" and args.subcommand == "ner":
        gold = [(r["doc_id"], r["start"], r["end"], r["cui"])
                for r in _read_jsonl(args.gold)]
        pred = [(r["doc_id"], r["start"], r["end"], r["cui"])
                for r in _read_jsonl(args.pred)]
        _emit(evaluate_ner(gold, pred))
        return 0

    print("error: no subcommand given", file=sys.stderr)
    return 1


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return _dispatch(args)
    except errors.ClintextError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
