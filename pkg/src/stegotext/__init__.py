"""Token-level text steganography with exact per-step divergence accounting.

Hide a bitstring inside text generated token-by-token from a language
model, measure exactly how detectable each step made the stream, and
recover the bits by replaying the same model.
"""

from .bits import BitReader, BitString, BitWriter
from .codecs import (
    ALGORITHMS,
    BinPartition,
    CodecConfig,
    EncodingStalledError,
    StallWarning,
    StegoResult,
    TruncatedStegotextError,
    bin_conditional,
    bins_decode_step,
    bins_effective,
    bins_encode_step,
    hide,
    keystream_xor,
    make_partition,
    patient_decode_step,
    patient_encode_step,
    seek,
    vlc_decode_step,
    vlc_encode_step,
)
from .huffman import HuffmanCode, build_huffman, decode_token, encode_token, huffman_distribution
from .lm import (
    PROB_FLOOR,
    LanguageModel,
    LanguageModelError,
    NextTokenDistribution,
    Vocabulary,
    next_distribution,
    sample_token,
)
from .metrics import (
    CumulativeBound,
    StepDiagnostics,
    accumulate,
    entropy,
    kl_divergence,
    partition_entropy,
    pinsker_bound,
    tvd,
)
from .ngram import NgramModel
from .ngram import load as load_model
from .ngram import save as save_model
from .ngram import train as train_ngram

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "BinPartition",
    "BitReader",
    "BitString",
    "BitWriter",
    "CodecConfig",
    "CumulativeBound",
    "EncodingStalledError",
    "HuffmanCode",
    "LanguageModel",
    "LanguageModelError",
    "NextTokenDistribution",
    "NgramModel",
    "PROB_FLOOR",
    "StallWarning",
    "StegoResult",
    "StepDiagnostics",
    "TruncatedStegotextError",
    "Vocabulary",
    "accumulate",
    "bin_conditional",
    "bins_decode_step",
    "bins_effective",
    "bins_encode_step",
    "build_huffman",
    "decode_token",
    "encode_token",
    "entropy",
    "hide",
    "huffman_distribution",
    "keystream_xor",
    "kl_divergence",
    "load_model",
    "make_partition",
    "next_distribution",
    "partition_entropy",
    "patient_decode_step",
    "patient_encode_step",
    "pinsker_bound",
    "sample_token",
    "save_model",
    "seek",
    "train_ngram",
    "tvd",
    "vlc_decode_step",
    "vlc_encode_step",
]
