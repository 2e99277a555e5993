"""The stdio protocol loop.

One JSON object per line. The provider writes the handshake first
({"dim", "caps"}), then answers every request line with exactly one response
line carrying the request's id. Malformed input produces an error response,
never a crash: the session must survive anything the engine sends.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import IO, Optional

from .backends import make_embedder, make_entailer

OPS_EMBED = ("embed_query", "embed_context")
OP_ENTAIL = "entail"


def _error(request_id, message: str) -> dict:
    return {"id": request_id, "error": message}


def handle_request(line: str, embedder, entailer) -> dict:
    """Map one raw request line to one response object."""
    try:
        request = json.loads(line)
    except json.JSONDecodeError:
        return _error(None, "malformed request: not valid JSON")
    if not isinstance(request, dict):
        return _error(None, "malformed request: expected an object")

    request_id = request.get("id")
    if not isinstance(request_id, int) or isinstance(request_id, bool):
        return _error(None, "malformed request: missing integer id")

    op = request.get("op")
    if op in OPS_EMBED:
        if embedder is None:
            return _error(request_id, f"capability {op!r} not available")
        text = request.get("text")
        if not isinstance(text, str):
            return _error(request_id, "embed request needs a string 'text' field")
        try:
            return {"id": request_id, "vector": embedder.embed(text)}
        except Exception as exc:  # backend failure must not kill the session
            return _error(request_id, f"embedding failed: {exc}")
    if op == OP_ENTAIL:
        if entailer is None:
            return _error(request_id, "capability 'entail' not available")
        premise = request.get("premise")
        hypothesis = request.get("hypothesis")
        if not isinstance(premise, str) or not isinstance(hypothesis, str):
            return _error(request_id, "entail request needs string 'premise' and 'hypothesis' fields")
        try:
            score = float(entailer.score(premise, hypothesis))
        except Exception as exc:
            return _error(request_id, f"entailment failed: {exc}")
        return {"id": request_id, "score": min(max(score, 0.0), 1.0)}
    return _error(request_id, f"unknown op {op!r}")


def serve(embedder, entailer, stdin: Optional[IO[str]] = None, stdout: Optional[IO[str]] = None) -> None:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    caps = []
    if embedder is not None:
        caps.extend(OPS_EMBED)
    if entailer is not None:
        caps.append(OP_ENTAIL)
    dim = getattr(embedder, "dim", 0)
    stdout.write(json.dumps({"dim": dim, "caps": caps}) + "\n")
    stdout.flush()
    for line in stdin:
        if not line.strip():
            continue
        response = handle_request(line, embedder, entailer)
        stdout.write(json.dumps(response) + "\n")
        stdout.flush()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="snippetqa-provider",
        description="Reference embedding/entailment provider (stdio JSON lines).",
    )
    parser.add_argument("--dim", type=int, default=256, help="dimension of the hash embedder")
    parser.add_argument(
        "--embed-model",
        default="hash",
        help='embedding backend: "hash", "st:<sentence-transformers model>", or "none"',
    )
    parser.add_argument(
        "--nli-model",
        default="lexical",
        help='entailment backend: "lexical", "hf:<NLI model>", or "none"',
    )
    args = parser.parse_args(argv)
    try:
        embedder = make_embedder(args.embed_model, args.dim)
        entailer = make_entailer(args.nli_model)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if embedder is None and entailer is None:
        print("error: at least one backend is required", file=sys.stderr)
        return 1
    serve(embedder, entailer)
    return 0


def entrypoint() -> None:
    sys.exit(main())
