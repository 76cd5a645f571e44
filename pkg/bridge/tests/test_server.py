from __future__ import annotations

import base64
import json
import subprocess
import sys

import numpy as np
import pytest


class BridgeProc:
    """Minimal line-oriented driver for a bridge subprocess."""

    def __init__(self, argv, env):
        self.proc = subprocess.Popen(
            argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL, text=True, bufsize=1, env=env,
        )

    def send_line(self, line: str) -> dict:
        self.proc.stdin.write(line + "\n")
        self.proc.stdin.flush()
        reply = self.proc.stdout.readline()
        assert reply, "bridge closed its stream"
        return json.loads(reply)

    def request(self, rid, op, **fields) -> dict:
        return self.send_line(json.dumps({"id": rid, "op": op, **fields}))

    def close(self) -> int:
        try:
            self.proc.stdin.close()
        except OSError:
            pass
        return self.proc.wait(timeout=30)


@pytest.fixture()
def bridge(bridge_argv, bridge_env):
    proc = BridgeProc(bridge_argv, bridge_env)
    yield proc
    if proc.proc.poll() is None:
        proc.proc.kill()
        proc.proc.wait()


def _decode_probs(reply: dict) -> np.ndarray:
    return np.frombuffer(base64.b64decode(reply["probs_b64"]), dtype="<f4")


class TestHandshake:
    def test_hello_reports_vocab_and_protocol(self, bridge):
        reply = bridge.request(0, "hello")
        assert reply["ok"] and reply["id"] == 0
        assert reply["protocol"] == 1
        assert reply["v"] > 1
        assert isinstance(reply["model"], str)

    def test_load_failure_exits_nonzero_before_any_frame(self, tmp_path, bridge_env):
        proc = subprocess.Popen(
            [sys.executable, "-m", "gpt2_bridge", "--model", str(tmp_path / "missing")],
            stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL, text=True, env=bridge_env,
        )
        out, _ = proc.communicate(json.dumps({"id": 0, "op": "hello"}) + "\n", timeout=120)
        assert proc.returncode != 0
        assert out == ""


class TestTokenization:
    def test_round_trip_ascii(self, bridge):
        v = bridge.request(0, "hello")["v"]
        for text in ("the cat sat", "a dog ran in the park", "boats moved slowly"):
            ids = bridge.request(1, "tokenize", text=text)["ids"]
            assert ids and all(0 <= t < v for t in ids)
            back = bridge.request(2, "detokenize", ids=ids)["text"]
            assert back == text


class TestDist:
    def test_vector_length_and_mass(self, bridge):
        v = bridge.request(0, "hello")["v"]
        ids = bridge.request(1, "tokenize", text="the cat")["ids"]
        probs = _decode_probs(bridge.request(2, "dist", prefix=ids))
        assert probs.size == v
        assert probs.min() >= 0.0
        assert abs(float(probs.astype(np.float64).sum()) - 1.0) < 1e-4

    def test_empty_prefix_allowed(self, bridge):
        v = bridge.request(0, "hello")["v"]
        probs = _decode_probs(bridge.request(1, "dist", prefix=[]))
        assert probs.size == v

    def test_deterministic_within_process(self, bridge):
        ids = bridge.request(0, "tokenize", text="the cat sat on")["ids"]
        first = bridge.request(1, "dist", prefix=ids)["probs_b64"]
        second = bridge.request(2, "dist", prefix=ids)["probs_b64"]
        assert first == second

    def test_out_of_range_token_refused(self, bridge):
        v = bridge.request(0, "hello")["v"]
        reply = bridge.request(1, "dist", prefix=[v])
        assert reply["ok"] is False and reply["id"] == 1


class TestProtocolDiscipline:
    def test_ids_echoed_in_request_order_under_fuzz(self, bridge):
        rng = np.random.default_rng(5)
        v = bridge.request(0, "hello")["v"]
        for step in range(100):
            rid = int(rng.integers(0, 10_000))
            kind = int(rng.integers(0, 3))
            if kind == 0:
                reply = bridge.request(rid, "hello")
            elif kind == 1:
                reply = bridge.request(rid, "tokenize", text="the river ran")
            else:
                prefix = rng.integers(0, v, size=int(rng.integers(0, 6))).tolist()
                reply = bridge.request(rid, "dist", prefix=prefix)
            assert reply["id"] == rid, f"desync at step {step}"
            assert reply["ok"]

    def test_malformed_frame_gets_error_with_null_id(self, bridge):
        reply = bridge.send_line("this is not json")
        assert reply["ok"] is False and reply["id"] is None
        # the server survives and keeps answering
        assert bridge.request(1, "hello")["ok"]

    def test_unknown_op_echoes_offending_id(self, bridge):
        reply = bridge.request(42, "frobnicate")
        assert reply["ok"] is False and reply["id"] == 42
        assert "unknown op" in reply["error"]

    def test_missing_field_is_error_not_crash(self, bridge):
        reply = bridge.send_line(json.dumps({"id": 3, "op": "tokenize"}))
        assert reply["ok"] is False and reply["id"] == 3
        assert bridge.request(4, "hello")["ok"]

    def test_shutdown_stops_the_process(self, bridge):
        assert bridge.request(0, "shutdown")["ok"]
        assert bridge.close() == 0
