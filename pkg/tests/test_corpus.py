import json
import tempfile
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from snippetqa.corpus import (
    Corpus,
    KnowledgeEntry,
    clean_corpus,
    dedup,
    default_language_filter,
    entry_is_objectionable,
    filter_knowledge,
    ingest_search_results,
    load_bad_words,
    load_corpus,
    parse_search_results,
    prepare_queries,
    save_corpus,
)
from snippetqa.jsonio import JsonlError

from conftest import make_corpus


def _letters(i):
    out = ""
    while True:
        out = chr(ord("a") + i % 26) + out
        i //= 26
        if i == 0:
            return out


def _text(n_words, stem="word"):
    # letter-only words; digit-heavy tokens would trip the language window
    return " ".join(f"{stem}{_letters(i)}" for i in range(n_words))


class TestPrepareQueries:
    def test_four_answers_four_queries(self):
        q = "What is the natural habitat of these animals?"
        answers = ["savannah", "grassland", "plains", "africa"]
        assert prepare_queries(q, answers) == [(q, a) for a in answers]

    def test_single_answer(self):
        assert prepare_queries("q", ["a"]) == [("q", "a")]

    def test_duplicates_collapse_order_preserved(self):
        assert prepare_queries("q", ["a", "a", "b"]) == [("q", "a"), ("q", "b")]

    def test_empty_answers_is_an_error(self):
        with pytest.raises(ValueError, match="no queries derivable"):
            prepare_queries("q", [])

    def test_blank_answer_is_an_error(self):
        with pytest.raises(ValueError):
            prepare_queries("q", ["  "])

    def test_blank_question_is_an_error(self):
        with pytest.raises(ValueError):
            prepare_queries(" ", ["a"])


class TestParseSearchResults:
    def test_roundtrip_fields(self):
        line = {
            "question": "q1",
            "answer": "a1",
            "items": [{"title": "t", "link": "http://x", "snippet": "  padded snippet  "}],
        }
        results, skipped = parse_search_results(json.dumps(line).encode())
        assert skipped == 0
        assert len(results) == 1
        assert results[0].query_question == "q1"
        assert results[0].items[0].snippet == "  padded snippet  "  # verbatim

    def test_malformed_json_reports_line_number(self):
        data = b'{"question": "q", "answer": "a", "items": []}\n{broken\n'
        with pytest.raises(JsonlError, match="line 2"):
            parse_search_results(data)

    def test_missing_snippet_skipped_and_counted(self):
        line = {
            "question": "q",
            "answer": "a",
            "items": [{"title": "t", "link": "l"}, {"title": "t", "link": "l", "snippet": "ok"}],
        }
        results, skipped = parse_search_results(json.dumps(line).encode())
        assert skipped == 1
        assert [i.snippet for i in results[0].items] == ["ok"]

    def test_blank_snippet_skipped(self):
        line = {"question": "q", "answer": "a", "items": [{"title": "", "link": "", "snippet": "   "}]}
        results, skipped = parse_search_results(json.dumps(line).encode())
        assert skipped == 1
        assert results[0].items == ()

    def test_items_capped_at_ten(self):
        items = [{"title": "", "link": "", "snippet": f"s{i}"} for i in range(13)]
        line = {"question": "q", "answer": "a", "items": items}
        results, skipped = parse_search_results(json.dumps(line).encode())
        assert len(results[0].items) == 10
        assert skipped == 3


class TestFilterKnowledge:
    def test_nine_words_rejected_short(self):
        decision = filter_knowledge(_text(9))
        assert not decision.kept and decision.reason == "too_short"

    def test_ten_words_kept(self):
        decision = filter_knowledge(_text(10))
        assert decision.kept and decision.text == _text(10)

    def test_three_hundred_words_kept(self):
        assert filter_knowledge(_text(300)).kept

    def test_three_hundred_one_words_rejected_long(self):
        decision = filter_knowledge(_text(301))
        assert not decision.kept and decision.reason == "too_long"

    def test_fully_non_english_rejected(self):
        decision = filter_knowledge("これは完全に日本語だけで書かれた文章ですから除外されます")
        assert not decision.kept and decision.reason == "non_english"

    def test_non_english_span_removed_from_kept_text(self):
        english = "the quick brown fox jumps over the lazy dog near the quiet river bank today"
        mixed = english + " 日本語のテキストがここにたくさん続いています"
        decision = filter_knowledge(mixed)
        assert decision.kept
        assert "日" not in decision.text
        assert decision.text.startswith("the quick brown fox")

    def test_total_function_on_junk(self):
        for text in ["", "   ", "\x00\x01", "{" * 50]:
            filter_knowledge(text)  # must not raise

    def test_custom_filter_plugs_in(self):
        flag_nothing = lambda text: []
        decision = filter_knowledge("日本語 " + _text(10), language_filter=flag_nothing)
        assert decision.kept and "日本語" in decision.text


class TestDefaultLanguageFilter:
    def test_clean_english_unflagged(self):
        assert default_language_filter("a perfectly ordinary english sentence here") == []

    def test_spans_are_half_open_and_merged(self):
        text = "ab" + "日" * 30 + "cd"
        spans = default_language_filter(text)
        assert len(spans) == 1
        start, end = spans[0]
        assert start <= 2 and end >= 32


class TestDedup:
    def test_exact_duplicate_removed(self):
        entries = [
            KnowledgeEntry(0, "A dog.", "", ("", "")),
            KnowledgeEntry(1, "A dog.", "", ("", "")),
            KnowledgeEntry(2, "A cat.", "", ("", "")),
        ]
        corpus = dedup(entries)
        assert [e.text for e in corpus] == ["A dog.", "A cat."]
        assert [e.id for e in corpus] == [0, 1]

    def test_whitespace_variants_collapse(self):
        entries = [KnowledgeEntry(0, "A  dog.", "", ("", "")), KnowledgeEntry(1, "A dog.", "", ("", ""))]
        corpus = dedup(entries)
        assert len(corpus) == 1
        assert corpus.entries[0].text == "A  dog."  # first occurrence keeps its surface form

    def test_case_variants_collapse(self):
        entries = [KnowledgeEntry(0, "A Dog.", "", ("", "")), KnowledgeEntry(1, "a dog.", "", ("", ""))]
        assert len(dedup(entries)) == 1

    def test_empty(self):
        assert len(dedup([])) == 0

    @given(st.lists(st.sampled_from(["a b", "a  b", "A B", "c d", "e f", "g h"]), max_size=12))
    def test_idempotent(self, texts):
        entries = [KnowledgeEntry(i, t, "", ("", "")) for i, t in enumerate(texts)]
        once = dedup(entries)
        twice = dedup(once.entries)
        assert once == twice


class TestCorpusInvariants:
    def test_ids_must_be_dense(self):
        with pytest.raises(ValueError, match="dense"):
            Corpus(entries=(KnowledgeEntry(1, "x", "", ("", "")),))

    def test_duplicate_normalized_text_rejected(self):
        with pytest.raises(ValueError, match="normalized"):
            make_corpus(["A dog.", "a  dog."])


class TestCleanCorpus:
    BAD = ["badword", "two part"]

    def test_lorem_ipsum_removed(self):
        corpus = make_corpus(["contains lorem ipsum dolor", "a clean sentence"])
        cleaned, removed = clean_corpus(corpus, self.BAD)
        assert removed == 1
        assert cleaned.entries[0].text == "a clean sentence"

    def test_curly_bracket_removed(self):
        corpus = make_corpus(["has f(x) = { inside", "fine text"])
        cleaned, removed = clean_corpus(corpus, self.BAD)
        assert removed == 1

    def test_javascript_substring_removed(self):
        corpus = make_corpus(["Enable JavaScript to continue", "JavaScripty stuff", "fine"])
        cleaned, removed = clean_corpus(corpus, self.BAD)
        # substring rule: both mentions go
        assert removed == 2

    def test_bad_word_token_boundary(self):
        corpus = make_corpus(["that BadWord here", "notbadwordish is fine", "clean"])
        cleaned, removed = clean_corpus(corpus, self.BAD)
        assert removed == 1
        assert [e.text for e in cleaned] == ["notbadwordish is fine", "clean"]

    def test_bad_phrase_matches_across_whitespace(self):
        corpus = make_corpus(["one two  part three", "two parts should stay"])
        cleaned, removed = clean_corpus(corpus, self.BAD)
        assert removed == 1
        assert cleaned.entries[0].text == "two parts should stay"

    def test_ids_renumbered_densely(self):
        corpus = make_corpus(["badword first", "keep one", "keep two"])
        cleaned, _ = clean_corpus(corpus, self.BAD)
        assert [e.id for e in cleaned] == [0, 1]

    def test_clean_entry_kept(self):
        corpus = make_corpus(["a perfectly ordinary sentence"])
        cleaned, removed = clean_corpus(corpus, self.BAD)
        assert removed == 0 and len(cleaned) == 1

    def test_missing_badwords_file_errors(self):
        with pytest.raises(FileNotFoundError):
            load_bad_words("/nonexistent/badwords.txt")


def _brute_force_objectionable(text, bad_words):
    """Independent matcher: scan every position for each rule family."""
    lowered = text.lower()
    if "javascript" in lowered or "lorem ipsum" in lowered or "{" in text:
        return True

    def is_word_char(ch):
        return ch.isalnum() or ch == "_"

    for word in bad_words:
        start = 0
        while True:
            i = lowered.find(word, start)
            if i < 0:
                break
            before_ok = i == 0 or not is_word_char(lowered[i - 1])
            j = i + len(word)
            after_ok = j == len(lowered) or not is_word_char(lowered[j])
            if before_ok and after_ok:
                return True
            start = i + 1
    return False


@settings(max_examples=60)
@given(
    st.lists(
        st.lists(
            st.sampled_from(
                ["the", "cat", "badword", "badwords", "abadword", "lorem", "ipsum", "lorem ipsum",
                 "javascript", "java", "script", "{", "(x)", "dog,", "nasty"]
            ),
            min_size=1,
            max_size=8,
        ),
        min_size=0,
        max_size=15,
    )
)
def test_clean_corpus_matches_brute_force(token_lists):
    bad_words = ["badword", "nasty"]
    corpus = dedup(
        [KnowledgeEntry(i, " ".join(toks), "", ("", "")) for i, toks in enumerate(token_lists)]
    )
    cleaned, removed = clean_corpus(corpus, bad_words)
    expected = [e.text for e in corpus if not _brute_force_objectionable(e.text, bad_words)]
    assert [e.text for e in cleaned] == expected
    assert removed == len(corpus) - len(expected)


class TestSaveLoadRoundTrip:
    def test_simple_roundtrip(self, tmp_path):
        corpus = make_corpus(
            ["first entry text", "second entry text"],
            urls=["http://a", "http://b"],
            queries=[("q1", "a1"), ("q2", "a2")],
        )
        path = tmp_path / "corpus.jsonl"
        save_corpus(corpus, path)
        assert load_corpus(path) == corpus

    def test_bytes_identical_on_double_save(self, tmp_path):
        corpus = make_corpus(["alpha beta", "gamma delta"], urls=["u1", "u2"])
        p1, p2 = tmp_path / "c1.jsonl", tmp_path / "c2.jsonl"
        save_corpus(corpus, p1)
        save_corpus(load_corpus(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_non_dense_ids_rejected_on_load(self, tmp_path):
        path = tmp_path / "gap.jsonl"
        path.write_text(
            '{"id": 0, "text": "a", "url": "", "q": "", "a": ""}\n'
            '{"id": 2, "text": "b", "url": "", "q": "", "a": ""}\n'
        )
        with pytest.raises(ValueError, match="dense"):
            load_corpus(path)

    @settings(max_examples=40)
    @given(
        st.lists(
            st.text(
                alphabet=st.characters(blacklist_categories=("Cs",)),
                min_size=1,
                max_size=40,
            ),
            min_size=0,
            max_size=8,
        )
    )
    def test_roundtrip_arbitrary_text(self, texts):
        entries = [KnowledgeEntry(i, t, f"url{i}", (f"q{i}", f"a{i}")) for i, t in enumerate(texts)]
        corpus = dedup(e for e in entries if e.text.strip())
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "c.jsonl"
            save_corpus(corpus, path)
            loaded = load_corpus(path)
        assert loaded == corpus


class TestIngest:
    def _raw(self):
        lines = [
            {
                "question": "What is the natural habitat of these animals?",
                "answer": "savannah",
                "items": [
                    {"title": "t1", "link": "u1", "snippet": _text(12, "hab")},
                    {"title": "t2", "link": "u2", "snippet": _text(9, "sh")},  # too short
                    {"title": "t3", "link": "u3", "snippet": _text(12, "hab")},  # duplicate
                ],
            },
            {
                "question": "q2",
                "answer": "a2",
                "items": [{"title": "t", "link": "u4", "snippet": _text(11, "other")}],
            },
        ]
        return "\n".join(json.dumps(l) for l in lines).encode()

    def test_ingest_pipeline(self):
        corpus, stats = ingest_search_results(self._raw())
        assert stats.results == 2
        assert stats.rejected["too_short"] == 1
        assert stats.duplicates_removed == 1
        assert [e.id for e in corpus] == [0, 1]
        assert corpus.entries[0].source_url == "u1"
        assert corpus.entries[0].source_query == ("What is the natural habitat of these animals?", "savannah")

    def test_every_kept_entry_passes_filter(self):
        corpus, _ = ingest_search_results(self._raw())
        for entry in corpus:
            assert filter_knowledge(entry.text).kept


class TestEntryIsObjectionable:
    def test_no_pattern_only_families(self):
        assert entry_is_objectionable("lorem ipsum here", None)
        assert not entry_is_objectionable("harmless", None)
