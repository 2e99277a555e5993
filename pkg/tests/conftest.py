import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from snippetqa.corpus import Corpus, KnowledgeEntry


def pytest_runtest_logreport(report):
    # one visible verdict line per acceptance criterion
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        verdict = "PASS" if report.passed else "FAIL"
        print(f"\n[ACCEPTANCE] {name}: {verdict}")


def make_corpus(texts, urls=None, queries=None) -> Corpus:
    urls = urls or ["" for _ in texts]
    queries = queries or [("", "") for _ in texts]
    entries = tuple(
        KnowledgeEntry(id=i, text=t, source_url=u, source_query=q)
        for i, (t, u, q) in enumerate(zip(texts, urls, queries))
    )
    return Corpus(entries=entries)
