"""Client for an external language-model process speaking the stdio bridge protocol.

The bridge is any subprocess that answers newline-delimited JSON frames on
stdout for frames received on stdin.  Requests carry a client-chosen id
which the response must echo; responses arrive in request order.  The
probability vector of a `dist` response is a base64-encoded little-endian
float32 array, which this client re-normalizes in float64 before handing
it to the distribution layer.

Request/response surface (protocol version 1):

    {"id": N, "op": "hello"}                -> {"id": N, "ok": true, "v": V, "model": S, "protocol": 1}
    {"id": N, "op": "tokenize", "text": S}  -> {"id": N, "ok": true, "ids": [..]}
    {"id": N, "op": "detokenize", "ids": L} -> {"id": N, "ok": true, "text": S}
    {"id": N, "op": "dist", "prefix": L}    -> {"id": N, "ok": true, "probs_b64": B64}
    {"id": N, "op": "shutdown"}             -> {"id": N, "ok": true}

Errors come back as {"id": N, "ok": false, "error": S}.
"""

from __future__ import annotations

import base64
import json
import shlex
import subprocess
from typing import Sequence

import numpy as np

from .lm import LanguageModel, LanguageModelError

PROTOCOL_VERSION = 1

# A float32 vector of vocabulary size may drift this far from unit mass
# before the client refuses it.
DIST_SUM_TOLERANCE = 1e-4


class BridgeError(LanguageModelError):
    """The bridge process failed, desynchronized, or refused a request."""


class BridgeModel(LanguageModel):
    """LanguageModel backed by a bridge subprocess.

    One bridge process serves one codec stream; determinism of replies is
    only guaranteed within a single process, so hide and seek against a
    bridge must share the process or a pinned serving stack.
    """

    def __init__(self, command: str | Sequence[str]) -> None:
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise BridgeError(f"could not start bridge {argv!r}: {exc}") from exc
        self._next_id = 0
        hello = self._request("hello")
        self._vocab_size = int(hello["v"])
        self.model_name = str(hello.get("model", ""))
        self.protocol = int(hello.get("protocol", 0))
        if self.protocol != PROTOCOL_VERSION:
            self.close()
            raise BridgeError(
                f"bridge speaks protocol {self.protocol}, client expects {PROTOCOL_VERSION}"
            )

    @property
    def vocab_size(self) -> int:
        return self._vocab_size

    def _request(self, op: str, **fields) -> dict:
        request_id = self._next_id
        self._next_id += 1
        frame = {"id": request_id, "op": op, **fields}
        try:
            self._proc.stdin.write(json.dumps(frame) + "\n")
            self._proc.stdin.flush()
            line = self._proc.stdout.readline()
        except (BrokenPipeError, OSError) as exc:
            raise BridgeError(f"bridge process died during {op!r}: {exc}") from exc
        if not line:
            raise BridgeError(f"bridge process closed its stream during {op!r}")
        try:
            reply = json.loads(line)
        except json.JSONDecodeError as exc:
            raise BridgeError(f"bridge sent an unparseable frame: {line!r}") from exc
        if reply.get("id") != request_id:
            raise BridgeError(
                f"bridge desynchronized: sent id {request_id}, got {reply.get('id')!r}"
            )
        if not reply.get("ok"):
            raise BridgeError(f"bridge refused {op!r}: {reply.get('error')}")
        return reply

    def raw_distribution(self, prefix: Sequence[int]) -> np.ndarray:
        reply = self._request("dist", prefix=[int(t) for t in prefix])
        raw = base64.b64decode(reply["probs_b64"])
        probs = np.frombuffer(raw, dtype="<f4").astype(np.float64)
        if probs.size != self._vocab_size:
            raise BridgeError(
                f"bridge sent {probs.size} probabilities for vocabulary of {self._vocab_size}"
            )
        total = float(np.cumsum(probs)[-1])
        if abs(total - 1.0) > DIST_SUM_TOLERANCE:
            raise BridgeError(f"bridge distribution mass {total!r} is off by more than {DIST_SUM_TOLERANCE}")
        return probs / total

    def tokenize(self, text: str) -> list[int]:
        return [int(t) for t in self._request("tokenize", text=text)["ids"]]

    def detokenize(self, ids: Sequence[int]) -> str:
        return str(self._request("detokenize", ids=[int(t) for t in ids])["text"])

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                self._request("shutdown")
            except BridgeError:
                pass
            try:
                self._proc.wait(timeout=10)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
        if self._proc.stdin:
            self._proc.stdin.close()
        if self._proc.stdout:
            self._proc.stdout.close()

    def __enter__(self) -> "BridgeModel":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
