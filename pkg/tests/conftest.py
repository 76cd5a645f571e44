from __future__ import annotations

import pytest

from helpers import build_model, mixed_regime_model
from stegotext.ngram import NgramModel


@pytest.fixture(scope="session")
def small_model() -> NgramModel:
    """V=16 bigram model used across codec tests."""
    return build_model(16, 2000, seed=11, order=2, alpha=0.5)


@pytest.fixture(scope="session")
def smooth_model() -> NgramModel:
    """V=16 heavily smoothed model: near-uniform steps, tiny Huffman gap."""
    return build_model(16, 800, seed=12, order=1, alpha=50.0)


@pytest.fixture(scope="session")
def model_zoo() -> dict[str, NgramModel]:
    """Models spanning the acceptance grid's vocabulary range."""
    return {
        "v16": build_model(16, 2000, seed=21, order=2, alpha=0.5),
        "v16_smooth": build_model(16, 800, seed=22, order=1, alpha=50.0),
        "mixed_16": mixed_regime_model(),
        "v64": build_model(64, 4000, seed=23, order=2, alpha=1.0, zipf=0.7),
        "v64_smooth": build_model(64, 2000, seed=24, order=1, alpha=80.0),
        "v257": build_model(257, 4000, seed=25, order=1, alpha=0.2, zipf=0.8),
        "v1024": build_model(1024, 6000, seed=26, order=1, alpha=1.0, zipf=0.5),
        "v2000": build_model(2000, 8000, seed=27, order=1, alpha=1.0),
    }
