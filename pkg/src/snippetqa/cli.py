"""Command-line front end over the documented file formats.

Subcommands: ingest, clean, index-bm25, retrieve, eval-retrieval, read,
score-vqa, odeval, ground. Every command is rerunnable: fixed inputs produce
byte-identical outputs (floats capped at six significant digits).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus as corpus_mod
from . import metrics as metrics_mod
from . import odeval as odeval_mod
from . import reader as reader_mod
from . import retriever as retriever_mod
from .jsonio import dump_report, read_jsonl, write_jsonl
from .odeval import OdEvalError
from .provider import OP_EMBED_QUERY, OP_ENTAIL, ProviderClient, ProviderError


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the contract is exit 1 with usage text
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="snippetqa", description="Snippet-knowledge retrieval and QA evaluation engine.")
    parser.add_argument("--seed", type=int, default=0, help="seed for any sampling a command performs")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("ingest", parents=[], help="build a corpus from raw search-result JSONL")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("clean", help="remove objectionable/boilerplate entries")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--badwords", required=True)
    p.set_defaults(func=_cmd_clean)

    p = sub.add_parser("index-bm25", help="build and save a BM25 index")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--k1", type=float, default=1.2)
    p.add_argument("--b", type=float, default=0.75)
    p.set_defaults(func=_cmd_index_bm25)

    p = sub.add_parser("retrieve", help="rank knowledge for each query")
    p.add_argument("--mode", choices=("bm25", "dense"), required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--index", help="bm25: saved index file")
    p.add_argument("--corpus", help="bm25: build the index on the fly from this corpus")
    p.add_argument("--k1", type=float, default=1.2)
    p.add_argument("--b", type=float, default=0.75)
    p.add_argument("--embeddings", help="dense: knowledge vectors (binary OKEM or JSONL)")
    p.add_argument("--query-embeddings", dest="query_embeddings", help="dense: JSONL {qid, vec} query vectors")
    p.add_argument("--provider", help="dense: provider command used to embed query text")
    p.set_defaults(func=_cmd_retrieve)

    p = sub.add_parser("eval-retrieval", help="precision*/recall* of a retrieval run")
    p.add_argument("--hits", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--instances", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--substring", action="store_true", help="substring answer matching instead of token-boundary")
    p.add_argument("--out", dest="output")
    p.set_defaults(func=_cmd_eval_retrieval)

    p = sub.add_parser("read", help="decode and aggregate answers for retrieved knowledge")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--scores", help="token score-matrix JSONL")
    src.add_argument("--candidates", help="precomputed candidate JSONL")
    p.add_argument("--hits", required=True)
    p.add_argument("--strategy", choices=reader_mod.STRATEGIES, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--max-span-len", dest="max_span_len", type=int, default=reader_mod.DEFAULT_MAX_SPAN_LEN)
    p.add_argument("--out", dest="output", required=True)
    p.set_defaults(func=_cmd_read)

    p = sub.add_parser("score-vqa", help="soft accuracy of predictions")
    p.add_argument("--preds", required=True)
    p.add_argument("--instances", required=True)
    p.add_argument("--out", dest="output")
    p.set_defaults(func=_cmd_score_vqa)

    p = sub.add_parser("odeval", help="open-domain (entailment-based) accuracy")
    p.add_argument("--preds", required=True)
    p.add_argument("--instances", required=True)
    p.add_argument("--provider", required=True, help="entailment provider command")
    p.add_argument("--out", dest="output", required=True)
    p.set_defaults(func=_cmd_odeval)

    p = sub.add_parser("ground", help="rewrite questions into slotted statements")
    p.add_argument("--in", dest="input", required=True, help="JSONL with qid and question fields")
    p.add_argument("--out", dest="output", required=True)
    p.set_defaults(func=_cmd_ground)

    return parser


def _cmd_ingest(args) -> int:
    data = Path(args.input).read_bytes()
    built, stats = corpus_mod.ingest_search_results(data)
    corpus_mod.save_corpus(built, args.output)
    print(
        f"ingested {stats.results} results, {stats.items} items -> {len(built)} entries "
        f"(skipped items: {stats.skipped_items}, rejected: {stats.rejected}, "
        f"duplicates: {stats.duplicates_removed})",
        file=sys.stderr,
    )
    return 0


def _cmd_clean(args) -> int:
    loaded = corpus_mod.load_corpus(args.input)
    bad_words = corpus_mod.load_bad_words(args.badwords)
    cleaned, removed = corpus_mod.clean_corpus(loaded, bad_words)
    corpus_mod.save_corpus(cleaned, args.output)
    print(f"removed {removed} of {len(loaded)} entries", file=sys.stderr)
    return 0


def _cmd_index_bm25(args) -> int:
    loaded = corpus_mod.load_corpus(args.corpus)
    index = retriever_mod.bm25_build(loaded, k1=args.k1, b=args.b)
    index.save(args.output)
    print(f"indexed {index.n_docs} documents, {len(index.postings)} terms", file=sys.stderr)
    return 0


def _cmd_retrieve(args) -> int:
    queries = retriever_mod.load_queries(args.queries)
    results = []
    if args.mode == "bm25":
        if args.index:
            index = retriever_mod.Bm25Index.load(args.index)
        elif args.corpus:
            index = retriever_mod.bm25_build(corpus_mod.load_corpus(args.corpus), k1=args.k1, b=args.b)
        else:
            raise UsageError("bm25 mode needs --index or --corpus")
        for qid, query in queries:
            results.append(index.search(query.text, args.k, query_id=qid))
    else:
        if not args.embeddings:
            raise UsageError("dense mode needs --embeddings")
        ids, vectors = retriever_mod.load_embeddings(args.embeddings)
        index = retriever_mod.DenseIndex(ids, vectors)
        if args.query_embeddings:
            qvecs = _load_query_vectors(args.query_embeddings)
            for qid, _query in queries:
                if qid not in qvecs:
                    raise ValueError(f"no query vector for qid {qid!r}")
                results.append(index.search(qvecs[qid], args.k, query_id=qid))
        elif args.provider:
            with ProviderClient(args.provider, required_caps=(OP_EMBED_QUERY,)) as client:
                if client.dim != index.dim:
                    raise ProviderError(f"provider dimension {client.dim} != index dimension {index.dim}")
                for qid, query in queries:
                    vector = client.embed_query(query.text)
                    results.append(index.search(vector, args.k, query_id=qid))
        else:
            raise UsageError("dense mode needs --query-embeddings or --provider")
    retriever_mod.save_hits(args.output, results)
    print(f"retrieved top-{args.k} for {len(results)} queries", file=sys.stderr)
    return 0


def _load_query_vectors(path):
    out = {}
    for _lineno, obj in read_jsonl(path):
        out[str(obj["qid"])] = [float(x) for x in obj["vec"]]
    return out


def _cmd_eval_retrieval(args) -> int:
    hits = retriever_mod.load_hits(args.hits)
    loaded = corpus_mod.load_corpus(args.corpus)
    instances = metrics_mod.load_instances(args.instances)
    report = metrics_mod.evaluate_retrieval(instances, hits, loaded, k=args.k, substring=args.substring)
    text = dump_report(report.to_dict(), path=args.output)
    if not args.output:
        sys.stdout.write(text)
    return 0


def _cmd_read(args) -> int:
    if args.scores:
        source = reader_mod.ScoreMatrixSource.from_file(args.scores, max_span_len=args.max_span_len)
    else:
        source = reader_mod.CandidateFileSource.from_file(args.candidates)
    hits = retriever_mod.load_hits(args.hits)
    answers = []
    failures = 0
    for qid in hits:
        try:
            answer = reader_mod.read_pipeline(hits[qid], source, args.strategy, args.k)
        except reader_mod.ReaderError as exc:
            failures += 1
            print(f"warning: {exc}", file=sys.stderr)
            continue
        answers.append({"qid": qid, "answer": answer})
    write_jsonl(args.output, answers)
    print(f"answered {len(answers)} questions ({failures} unanswerable)", file=sys.stderr)
    return 0


def _cmd_score_vqa(args) -> int:
    preds = metrics_mod.load_predictions(args.preds)
    instances = metrics_mod.load_instances(args.instances)
    report = metrics_mod.evaluate_run(preds, instances)
    text = dump_report(report.to_dict(), path=args.output)
    if not args.output:
        sys.stdout.write(text)
    return 0


def _cmd_odeval(args) -> int:
    preds = metrics_mod.load_predictions(args.preds)
    instances = metrics_mod.load_instances(args.instances)
    with ProviderClient(args.provider, required_caps=(OP_ENTAIL,)) as client:
        report = odeval_mod.evaluate_open(preds, instances, client.entail)
    dump_report(report.to_dict(), path=args.output)
    print(
        f"open accuracy {report.accuracy:.4f} over {report.n_evaluated} questions "
        f"(coverage {report.coverage:.1%})",
        file=sys.stderr,
    )
    return 0


def _cmd_ground(args) -> int:
    records = []
    seen_questions = 0
    for lineno, obj in read_jsonl(args.input):
        if "qid" not in obj or "question" not in obj:
            raise UsageError(f"{args.input}: line {lineno} missing qid/question")
        seen_questions += 1
        outcome = odeval_mod.ground_question(str(obj["question"]), qid=str(obj["qid"]))
        if isinstance(outcome, odeval_mod.GroundedStatement):
            records.append({"qid": outcome.qid, "template": outcome.template, "rule": outcome.rule})
        else:
            records.append({"qid": outcome.qid, "skipped": outcome.reason})
    write_jsonl(args.output, records)
    grounded = sum(1 for r in records if "template" in r)
    print(f"grounded {grounded}/{seen_questions} questions", file=sys.stderr)
    return 0


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            parser.print_usage(sys.stderr)
            print("error: a subcommand is required", file=sys.stderr)
            return 1
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, OSError, ProviderError, OdEvalError, json.JSONDecodeError) as exc:
        message = str(exc) if not isinstance(exc, KeyError) else exc.args[0]
        print(f"error: {message}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(run())


if __name__ == "__main__":
    entrypoint()
