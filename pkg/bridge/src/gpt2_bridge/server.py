"""Serve GPT-2-family next-token distributions over newline-delimited JSON.

One request frame per stdin line, one response frame per stdout line,
strictly in request order.  The probability vector rides as a base64
little-endian float32 array to keep 50K-entry responses compact and
bit-stable.  See PROTOCOL.md for the exact frame grammar.

Determinism holds within one serving process on one device: the same
prefix always yields the same probability bytes.  Cross-machine replay
additionally requires pinned model weights and serving stack.
"""

from __future__ import annotations

import argparse
import base64
import json
import sys
from typing import TextIO

import numpy as np
import torch

PROTOCOL_VERSION = 1


class BridgeServer:
    """Single-threaded request loop around one loaded model."""

    def __init__(self, model_dir: str) -> None:
        from transformers import AutoTokenizer, GPT2LMHeadModel

        self.tokenizer = AutoTokenizer.from_pretrained(model_dir)
        self.model = GPT2LMHeadModel.from_pretrained(model_dir)
        self.model.eval()
        torch.set_grad_enabled(False)
        self.vocab_size = int(self.model.config.vocab_size)
        self.model_name = str(getattr(self.model.config, "name_or_path", model_dir) or model_dir)
        self.context_window = int(getattr(self.model.config, "n_positions", 1024))
        # Context for the initial-token distribution: the end-of-text id if
        # the tokenizer defines one in range, else token 0.
        start = self.tokenizer.eos_token_id
        if start is None:
            start = getattr(self.model.config, "eos_token_id", None)
        self.start_id = int(start) if start is not None and 0 <= int(start) < self.vocab_size else 0

    def distribution(self, prefix: list[int]) -> bytes:
        for t in prefix:
            if not 0 <= t < self.vocab_size:
                raise ValueError(f"token id {t} out of range [0, {self.vocab_size})")
        context = prefix[-self.context_window:] if prefix else [self.start_id]
        ids = torch.tensor([context], dtype=torch.long)
        logits = self.model(ids).logits[0, -1]
        probs = torch.softmax(logits.to(torch.float64), dim=-1)
        return probs.numpy().astype("<f4").tobytes()

    def handle(self, frame: dict) -> tuple[dict, bool]:
        """Answer one frame; the boolean asks the loop to stop."""
        rid = frame.get("id")
        op = frame.get("op")
        try:
            if op == "hello":
                return {
                    "id": rid, "ok": True, "v": self.vocab_size,
                    "model": self.model_name, "protocol": PROTOCOL_VERSION,
                }, False
            if op == "tokenize":
                text = frame["text"]
                if not isinstance(text, str):
                    raise ValueError("text must be a string")
                ids = self.tokenizer.encode(text)
                return {"id": rid, "ok": True, "ids": [int(t) for t in ids]}, False
            if op == "detokenize":
                ids = frame["ids"]
                if not isinstance(ids, list):
                    raise ValueError("ids must be a list")
                text = self.tokenizer.decode([int(t) for t in ids])
                return {"id": rid, "ok": True, "text": text}, False
            if op == "dist":
                prefix = frame["prefix"]
                if not isinstance(prefix, list):
                    raise ValueError("prefix must be a list")
                raw = self.distribution([int(t) for t in prefix])
                b64 = base64.b64encode(raw).decode("ascii")
                return {"id": rid, "ok": True, "probs_b64": b64}, False
            if op == "shutdown":
                return {"id": rid, "ok": True}, True
            raise ValueError(f"unknown op {op!r}")
        except KeyError as exc:
            return {"id": rid, "ok": False, "error": f"missing field {exc}"}, False
        except (TypeError, ValueError) as exc:
            return {"id": rid, "ok": False, "error": str(exc)}, False

    def serve(self, stdin: TextIO | None = None, stdout: TextIO | None = None) -> None:
        """Answer frames until shutdown or end of input."""
        stdin = stdin if stdin is not None else sys.stdin
        stdout = stdout if stdout is not None else sys.stdout
        for line in stdin:
            line = line.strip()
            if not line:
                continue
            try:
                frame = json.loads(line)
                if not isinstance(frame, dict):
                    raise ValueError("frame must be a JSON object")
            except (json.JSONDecodeError, ValueError) as exc:
                reply = {"id": None, "ok": False, "error": f"malformed frame: {exc}"}
                stdout.write(json.dumps(reply) + "\n")
                stdout.flush()
                continue
            reply, stop = self.handle(frame)
            stdout.write(json.dumps(reply) + "\n")
            stdout.flush()
            if stop:
                break


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="gpt2-bridge",
        description="Serve GPT-2 next-token distributions over stdio JSON frames.",
    )
    parser.add_argument("--model", required=True,
                        help="local directory (or installed model name) with weights and tokenizer")
    args = parser.parse_args(argv)
    try:
        server = BridgeServer(args.model)
    except Exception as exc:  # any load failure must exit before the first frame
        print(f"gpt2-bridge: failed to load model from {args.model!r}: {exc}", file=sys.stderr)
        return 1
    print(f"gpt2-bridge: serving {server.model_name} (V={server.vocab_size})", file=sys.stderr)
    server.serve()
    return 0


if __name__ == "__main__":
    sys.exit(main())
