"""snippetqa: snippet-knowledge retrieval, extractive reading, and answer
evaluation for open-knowledge visual question answering."""

from .corpus import (
    Corpus,
    FilterDecision,
    KnowledgeEntry,
    RawSearchResult,
    SearchItem,
    clean_corpus,
    dedup,
    filter_knowledge,
    ingest_search_results,
    load_corpus,
    parse_search_results,
    prepare_queries,
    save_corpus,
)
from .metrics import (
    QAInstance,
    evaluate_retrieval,
    evaluate_run,
    load_instances,
    precision_star,
    recall_star,
    vqa_score,
)
from .odeval import (
    GroundedStatement,
    SkippedQuestion,
    assemble,
    evaluate_open,
    exact_match_entailment,
    ground_question,
    mean_entailment,
    open_score,
)
from .provider import ProviderClient, ProviderError
from .reader import (
    UNANSWERABLE,
    AnswerCandidate,
    SpanScores,
    SpanTarget,
    aggregate,
    decode_span,
    locate_span_targets,
    read_pipeline,
)
from .retriever import (
    Bm25Index,
    DenseIndex,
    Query,
    RetrievalResult,
    TrainingPair,
    bm25_build,
    bm25_search,
    build_query_text,
    build_training_pairs,
    dense_search,
    in_batch_nll,
    label_relevance,
    load_embeddings,
    save_embeddings_binary,
    save_embeddings_jsonl,
)

__version__ = "0.1.0"
