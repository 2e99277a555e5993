#!/usr/bin/env python3
"""The whole pipeline through the command-line surface: ingest raw search
results, index, retrieve, and evaluate retrieval quality, all on the bundled
sample data. Every step is rerunnable and byte-deterministic.
"""
import json
from pathlib import Path
from tempfile import TemporaryDirectory

from snippetqa import cli

DATA = Path(__file__).parent / "data"

with TemporaryDirectory() as tmp:
    work = Path(tmp)
    corpus = work / "corpus.jsonl"
    index = work / "bm25.json"
    hits = work / "hits.jsonl"
    report = work / "report.json"
    queries = work / "queries.jsonl"

    # query file: one line per question, caption included
    with open(DATA / "instances.jsonl") as src, open(queries, "w") as dst:
        for line in src:
            inst = json.loads(line)
            dst.write(json.dumps({"qid": inst["qid"], "question": inst["question"], "caption": inst["caption"]}) + "\n")

    steps = [
        ["ingest", "--in", str(DATA / "search_results.jsonl"), "--out", str(corpus)],
        ["index-bm25", "--corpus", str(corpus), "--out", str(index), "--k1", "1.2", "--b", "0.75"],
        ["retrieve", "--mode", "bm25", "--k", "3", "--queries", str(queries), "--index", str(index), "--out", str(hits)],
        ["eval-retrieval", "--hits", str(hits), "--corpus", str(corpus), "--instances", str(DATA / "instances.jsonl"), "--k", "3", "--out", str(report)],
    ]
    for argv in steps:
        print("$ snippetqa " + " ".join(argv))
        code = cli.run(argv)
        assert code == 0, f"step failed: {argv}"

    body = json.loads(report.read_text())
    print("\nretrieval report:")
    print(f"  mean precision* = {body['mean_precision']}")
    print(f"  mean recall*    = {body['mean_recall']}")
    for row in body["per_question"]:
        print(f"  {row['qid']}: P*={row['precision']} R*={row['recall']}")
