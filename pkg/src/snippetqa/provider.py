"""Client for external embedding/entailment providers.

A provider is a subprocess speaking newline-delimited JSON over stdio. It
announces itself first ({"dim": int, "caps": [op, ...]}), then answers one
request per line with exactly one response carrying the same id. Requests are
strictly sequential per connection.
"""
from __future__ import annotations

import json
import shlex
import subprocess
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

OP_EMBED_QUERY = "embed_query"
OP_EMBED_CONTEXT = "embed_context"
OP_ENTAIL = "entail"


class ProviderError(RuntimeError):
    pass


@dataclass(frozen=True)
class Handshake:
    dim: int
    caps: Tuple[str, ...]


class ProviderClient:
    """Spawns a provider command and exchanges protocol lines with it."""

    def __init__(self, command: Union[str, Sequence[str]], required_caps: Sequence[str] = ()):
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise ProviderError(f"cannot start provider {argv!r}: {exc}") from exc
        self._next_id = 0
        self.handshake = self._read_handshake()
        missing = [cap for cap in required_caps if cap not in self.handshake.caps]
        if missing:
            self.close()
            raise ProviderError(f"provider lacks required capabilities: {', '.join(missing)}")

    def _read_handshake(self) -> Handshake:
        line = self._proc.stdout.readline()
        if not line:
            self.close()
            raise ProviderError("provider exited before the handshake")
        try:
            obj = json.loads(line)
            dim = int(obj["dim"])
            caps = tuple(str(c) for c in obj["caps"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            self.close()
            raise ProviderError(f"bad handshake line: {line.strip()!r}") from exc
        return Handshake(dim=dim, caps=caps)

    @property
    def dim(self) -> int:
        return self.handshake.dim

    def _call(self, payload: dict) -> dict:
        if self._proc.poll() is not None:
            raise ProviderError("provider process has exited")
        request_id = self._next_id
        self._next_id += 1
        payload = {"id": request_id, **payload}
        try:
            self._proc.stdin.write(json.dumps(payload, ensure_ascii=False) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ProviderError("provider closed its input") from exc
        line = self._proc.stdout.readline()
        if not line:
            raise ProviderError("provider closed the connection mid-request")
        try:
            response = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProviderError(f"unparseable provider response: {line.strip()!r}") from exc
        if response.get("id") != request_id:
            raise ProviderError(f"response id {response.get('id')} does not match request id {request_id}")
        if "error" in response:
            raise ProviderError(f"provider error: {response['error']}")
        return response

    def _embed(self, op: str, text: str) -> List[float]:
        response = self._call({"op": op, "text": text})
        vector = response.get("vector")
        if not isinstance(vector, list):
            raise ProviderError("provider response carries no vector")
        if len(vector) != self.dim:
            raise ProviderError(f"provider returned dimension {len(vector)}, advertised {self.dim}")
        return [float(x) for x in vector]

    def embed_query(self, text: str) -> List[float]:
        return self._embed(OP_EMBED_QUERY, text)

    def embed_context(self, text: str) -> List[float]:
        return self._embed(OP_EMBED_CONTEXT, text)

    def entail(self, premise: str, hypothesis: str) -> float:
        response = self._call({"op": OP_ENTAIL, "premise": premise, "hypothesis": hypothesis})
        if "score" not in response:
            raise ProviderError("provider response carries no score")
        return float(response["score"])

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=3)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()

    def __enter__(self) -> "ProviderClient":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.close()
