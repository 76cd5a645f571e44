#!/usr/bin/env python3
"""Drive the codecs from a neural model served over the stdio bridge.

Needs the bridge package (bridge/) and a local GPT-2 model directory:

    pip install -e bridge/
    STEG_GPT2_DIR=/path/to/gpt2-117m python demos/05_gpt2_bridge.py

The same script works with the tiny offline test model the bridge test
suite builds; any directory transformers can load is fine.
"""

import os
import sys

from stegotext import BitString, CodecConfig, entropy, hide, next_distribution, seek
from stegotext.bridge_client import BridgeModel


def main() -> None:
    model_dir = os.environ.get("STEG_GPT2_DIR")
    if not model_dir:
        print("set STEG_GPT2_DIR to a local GPT-2 model directory to run this demo")
        return

    command = [sys.executable, "-m", "gpt2_bridge", "--model", model_dir]
    with BridgeModel(command) as model:
        print(f"bridge up: {model.model_name}, V={model.vocab_size}")

        for prompt in ("I like your", "It is on top"):
            dist = next_distribution(model, model.tokenize(prompt))
            print(f"next-token entropy after {prompt!r}: {entropy(dist):.2f} bits")

        payload = BitString.from_bytes(b"hi")
        config = CodecConfig("patient", delta=0.2, divergence_kind="tvd", rng_seed=11)
        seed = model.tokenize("The weather in the valley")
        result = hide(model, config, seed, payload, max_steps=5_000)
        print(f"\nstegotext: {model.detokenize(list(result.stegotext_tokens))!r}")
        bound = result.cumulative_bound()
        print(f"divergence bound after {len(result.stegotext_tokens)} tokens: "
              f"{bound.reported_bound:.4f}")

        recovered = seek(model, config, seed, result.stegotext_tokens,
                         num_bits=len(payload))
        print(f"recovered: {recovered.to_bytes()!r}")
        assert recovered == payload


if __name__ == "__main__":
    main()
