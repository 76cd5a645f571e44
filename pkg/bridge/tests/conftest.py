from __future__ import annotations

import os
import sys

import pytest

torch = pytest.importorskip("torch")
transformers = pytest.importorskip("transformers")

BRIDGE_SRC = os.path.join(os.path.dirname(__file__), "..", "src")

TRAIN_LINES = [
    "the cat sat on the mat and watched the door",
    "a dog ran in the park until the rain came",
    "boats moved slowly along the river past the mill",
    "the baker sold warm bread before the market opened",
    "children counted stones on the bridge at noon",
]


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory) -> str:
    """Small GPT-2 with random weights plus a trained byte-level BPE tokenizer.

    Built entirely offline; exercises the full serving path without the
    released checkpoints.
    """
    from tokenizers import ByteLevelBPETokenizer
    from transformers import GPT2Config, GPT2LMHeadModel, PreTrainedTokenizerFast

    path = tmp_path_factory.mktemp("tiny_gpt2")
    bpe = ByteLevelBPETokenizer()
    bpe.train_from_iterator(TRAIN_LINES * 10, vocab_size=300, min_frequency=1,
                            special_tokens=["<|endoftext|>"])
    tokenizer = PreTrainedTokenizerFast(tokenizer_object=bpe._tokenizer,
                                        eos_token="<|endoftext|>")
    tokenizer.save_pretrained(str(path))

    config = GPT2Config(
        vocab_size=len(tokenizer),
        n_positions=128,
        n_embd=32,
        n_layer=2,
        n_head=2,
        eos_token_id=tokenizer.eos_token_id,
        bos_token_id=tokenizer.eos_token_id,
    )
    torch.manual_seed(1234)
    GPT2LMHeadModel(config).save_pretrained(str(path))
    return str(path)


@pytest.fixture(scope="session")
def bridge_env() -> dict[str, str]:
    env = dict(os.environ)
    env["PYTHONPATH"] = os.pathsep.join(
        [os.path.abspath(BRIDGE_SRC), env.get("PYTHONPATH", "")]
    )
    return env


@pytest.fixture(scope="session")
def bridge_argv(tiny_model_dir) -> list[str]:
    return [sys.executable, "-m", "gpt2_bridge", "--model", tiny_model_dir]
