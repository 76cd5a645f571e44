"""Command-line surface: train a model, hide, seek, analyze.

Exit codes: 0 success, 2 usage error, 3 data error (bad files, mismatched
parameters, truncated stegotext), 4 backend error (model process failures).

Flag resolution: explicit flag > STEG_<NAME> environment variable >
--config JSON file > built-in default.  hide always writes a per-step
diagnostics CSV next to the stegotext unless --no-diagnostics is given,
so every run reports the divergence bound it incurred.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from . import analysis, codecs, ngram
from .bits import BitString
from .bridge_client import BridgeModel
from .codecs import CodecConfig, TruncatedStegotextError, hide, seek
from .lm import LanguageModel, LanguageModelError

DIAG_HEADER = "step,kl_bits,tvd,bits_embedded,encoded"

# Flags that participate in env/config-file resolution: dest -> (cast, default).
_RESOLVABLE = {
    "model": (str, None),
    "bridge_cmd": (str, None),
    "algo": (str, None),
    "k": (int, None),
    "delta": (float, None),
    "divergence": (str, "tvd"),
    "partition_seed": (int, None),
    "rng_seed": (int, None),
    "seed_text": (str, ""),
    "stegotext": (str, "ids"),
    "bits_format": (str, "raw"),
    "trailing_tokens": (int, 0),
}


def _resolve_flags(args: argparse.Namespace) -> None:
    config_data = {}
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            config_data = json.load(fh)
        if not isinstance(config_data, dict):
            raise ValueError("--config file must hold a JSON object")
    for name, (cast, default) in _RESOLVABLE.items():
        if not hasattr(args, name):
            continue
        if getattr(args, name) is not None:
            continue
        env = os.environ.get("STEG_" + name.upper())
        if env is not None:
            setattr(args, name, cast(env))
        elif name in config_data:
            setattr(args, name, cast(config_data[name]))
        else:
            setattr(args, name, default)


def _open_model(args: argparse.Namespace) -> LanguageModel:
    if args.bridge_cmd:
        return BridgeModel(args.bridge_cmd)
    if not args.model:
        raise ValueError("either --model or --bridge-cmd is required")
    return ngram.load(args.model)


def _close_model(model: LanguageModel) -> None:
    close = getattr(model, "close", None)
    if close is not None:
        close()


def _codec_config(args: argparse.Namespace) -> CodecConfig:
    if not args.algo:
        raise ValueError("--algo is required")
    return CodecConfig(
        algorithm=args.algo,
        k=args.k,
        delta=args.delta,
        divergence_kind=args.divergence,
        partition_seed=args.partition_seed,
        rng_seed=args.rng_seed,
        length_mode="header32" if args.length_header else "out_of_band",
        trailing_tokens=args.trailing_tokens,
    )


def _read_bits(path: str, fmt: str, bit_length: int | None) -> BitString:
    if fmt == "hex":
        with open(path, "r", encoding="utf-8") as fh:
            return BitString.from_hex(fh.read(), bit_length)
    with open(path, "rb") as fh:
        return BitString.from_bytes(fh.read(), bit_length)


def _write_bits(path: str, bits: BitString, fmt: str) -> None:
    if fmt == "hex":
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(bits.to_hex() + "\n")
    else:
        with open(path, "wb") as fh:
            fh.write(bits.to_bytes())


def _write_stegotext(path: str, tokens: Sequence[int], mode: str, model: LanguageModel) -> None:
    if mode == "ids":
        text = "".join(f"{t}\n" for t in tokens)
    else:
        text = model.detokenize(list(tokens))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _read_stegotext(path: str, mode: str, model: LanguageModel) -> list[int]:
    with open(path, "r", encoding="utf-8") as fh:
        content = fh.read()
    if mode == "ids":
        return [int(line) for line in content.split()]
    return model.tokenize(content)


def _write_diagnostics(path: str, diagnostics) -> None:
    lines = [DIAG_HEADER]
    for d in diagnostics:
        lines.append(f"{d.step_index},{d.kl_bits!r},{d.tvd!r},{d.bits_embedded},{int(d.encoded)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def cmd_train(args: argparse.Namespace) -> int:
    with open(args.corpus, "r", encoding="utf-8") as fh:
        corpus = fh.read()
    model = ngram.train(corpus, order=args.order, alpha=args.alpha, mode=args.mode)
    ngram.save(model, args.out)
    print(f"trained order-{args.order} model: V={model.vocab_size}, saved to {args.out}",
          file=sys.stderr)
    return 0


def cmd_hide(args: argparse.Namespace) -> int:
    config = _codec_config(args)
    bits = _read_bits(args.bits_in, args.bits_format, args.bits_len)
    model = _open_model(args)
    try:
        seed = model.tokenize(args.seed_text) if args.seed_text else []
        result = hide(model, config, seed, bits, max_steps=args.max_steps)
        _write_stegotext(args.out, result.stegotext_tokens, args.stegotext, model)
        if not args.no_diagnostics:
            diag_path = args.diagnostics_out or args.out + ".diag.csv"
            _write_diagnostics(diag_path, result.diagnostics)
        bound = result.cumulative_bound()
        print(
            f"embedded {result.bits_embedded_total} bits in {len(result.stegotext_tokens)} tokens; "
            f"KL sum {bound.kl_sum_bits:.4f} bits, divergence bound {bound.reported_bound:.4f}",
            file=sys.stderr,
        )
        return 0
    finally:
        _close_model(model)


def cmd_seek(args: argparse.Namespace) -> int:
    config = _codec_config(args)
    if not args.length_header and args.bits_len is None:
        raise ValueError("--bits-len is required unless --length-header is set")
    model = _open_model(args)
    try:
        seed = model.tokenize(args.seed_text) if args.seed_text else []
        tokens = _read_stegotext(args.stegotext_in, args.stegotext, model)
        try:
            bits = seek(model, config, seed, tokens, num_bits=args.bits_len)
        except TruncatedStegotextError as exc:
            raise TruncatedStegotextError(f"{exc} (parameter mismatch suspected)") from exc
        _write_bits(args.bits_out, bits, args.bits_format)
        print(f"recovered {len(bits)} bits from {len(tokens)} tokens", file=sys.stderr)
        return 0
    finally:
        _close_model(model)


def cmd_analyze(args: argparse.Namespace) -> int:
    ks = tuple(int(x) for x in args.ks.split(",")) if args.ks else ()
    spec = analysis.ExperimentSpec(
        num_prefixes=args.prefixes,
        steps_per_prefix=args.steps,
        bins_ks=ks,
        include_vlc=not args.no_vlc,
        partition_seed=args.partition_seed if args.partition_seed is not None else 0,
        rng_seed=args.rng_seed if args.rng_seed is not None else 0,
    )
    model = _open_model(args)
    try:
        rows = analysis.run_experiment(model, spec)
    finally:
        _close_model(model)
    with open(args.out + ".csv", "w", encoding="utf-8") as fh:
        fh.write(analysis.format_table(rows))
    with open(args.out + ".summary.csv", "w", encoding="utf-8") as fh:
        fh.write(analysis.summarize(rows))
    for k in ks:
        values = [r.kl_bits for r in rows if r.algo == "bins" and r.param == str(k)]
        with open(f"{args.out}.hist.bins{k}.csv", "w", encoding="utf-8") as fh:
            fh.write(analysis.emit_histogram(values, args.hist_bins, upper=float(k)))
    if not args.no_vlc:
        values = [r.kl_bits for r in rows if r.algo == "vlc"]
        with open(args.out + ".hist.vlc.csv", "w", encoding="utf-8") as fh:
            fh.write(analysis.emit_histogram(values, args.hist_bins, upper=1.0))
    print(f"recorded {len(rows)} rows over {spec.total_steps} steps", file=sys.stderr)
    return 0


def _add_model_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", help="path to a trained model file")
    parser.add_argument("--bridge-cmd", dest="bridge_cmd",
                        help="command line of an external model process to use instead of --model")
    parser.add_argument("--config", help="JSON file of flag defaults (explicit flags win)")


def _add_codec_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--algo", choices=list(codecs.ALGORITHMS), help="encoding algorithm")
    parser.add_argument("--k", type=int, help="bits per token for bins (2^k bins)")
    parser.add_argument("--delta", type=_positive_float,
                        help="patient divergence threshold (> 0)")
    parser.add_argument("--divergence", choices=list(codecs.DIVERGENCE_KINDS),
                        help="divergence kind gating patient steps (default tvd)")
    parser.add_argument("--partition-seed", dest="partition_seed", type=int,
                        help="shared secret seed for the bins partition")
    parser.add_argument("--rng-seed", dest="rng_seed", type=int,
                        help="sender-side sampling seed")
    parser.add_argument("--seed-text", dest="seed_text",
                        help="shared starting context (tokenized by the model)")
    parser.add_argument("--length-header", dest="length_header", action="store_true",
                        help="embed a 32-bit length header instead of passing --bits-len out of band")
    parser.add_argument("--stegotext", choices=["text", "ids"],
                        help="stegotext file form: rendered text or one token id per line (default ids)")
    parser.add_argument("--trailing-tokens", dest="trailing_tokens", type=int,
                        help="extra cover tokens after the payload (default 0)")


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stegotext",
        description="Hide a bitstring in model-generated text and recover it by replay.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train an n-gram model on a text corpus")
    p_train.add_argument("--corpus", required=True, help="UTF-8 text file")
    p_train.add_argument("--order", type=int, default=2)
    p_train.add_argument("--alpha", type=_positive_float, default=0.01,
                         help="additive smoothing constant")
    p_train.add_argument("--mode", choices=["word", "char"], default="word")
    p_train.add_argument("--out", required=True, help="model file to write")
    p_train.set_defaults(func=cmd_train)

    p_hide = sub.add_parser("hide", help="embed payload bits into generated tokens")
    _add_model_flags(p_hide)
    _add_codec_flags(p_hide)
    p_hide.add_argument("--bits-in", dest="bits_in", required=True, help="payload file")
    p_hide.add_argument("--bits-format", dest="bits_format", choices=["raw", "hex"],
                        help="payload file form (default raw bytes)")
    p_hide.add_argument("--bits-len", dest="bits_len", type=int,
                        help="payload length in bits (default: whole file)")
    p_hide.add_argument("--out", required=True, help="stegotext file to write")
    p_hide.add_argument("--diagnostics-out", dest="diagnostics_out",
                        help="per-step diagnostics CSV (default <out>.diag.csv)")
    p_hide.add_argument("--no-diagnostics", dest="no_diagnostics", action="store_true",
                        help="skip writing the diagnostics CSV")
    p_hide.add_argument("--max-steps", dest="max_steps", type=int,
                        help="abort if the payload is not delivered within this many tokens")
    p_hide.set_defaults(func=cmd_hide)

    p_seek = sub.add_parser("seek", help="recover payload bits from stegotext")
    _add_model_flags(p_seek)
    _add_codec_flags(p_seek)
    p_seek.add_argument("--in", dest="stegotext_in", required=True, help="stegotext file")
    p_seek.add_argument("--bits-out", dest="bits_out", required=True, help="payload file to write")
    p_seek.add_argument("--bits-format", dest="bits_format", choices=["raw", "hex"],
                        help="payload file form (default raw bytes)")
    p_seek.add_argument("--bits-len", dest="bits_len", type=int,
                        help="payload length in bits (required without --length-header)")
    p_seek.set_defaults(func=cmd_seek)

    p_an = sub.add_parser("analyze", help="tabulate per-step divergences over model rollouts")
    _add_model_flags(p_an)
    p_an.add_argument("--prefixes", type=int, default=50, help="number of rollouts")
    p_an.add_argument("--steps", type=int, default=40, help="steps per rollout")
    p_an.add_argument("--ks", default="3", help="comma-separated bins widths (empty to skip bins)")
    p_an.add_argument("--no-vlc", dest="no_vlc", action="store_true")
    p_an.add_argument("--partition-seed", dest="partition_seed", type=int)
    p_an.add_argument("--rng-seed", dest="rng_seed", type=int)
    p_an.add_argument("--hist-bins", dest="hist_bins", type=int, default=30)
    p_an.add_argument("--out", required=True, help="output path prefix")
    p_an.set_defaults(func=cmd_analyze)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _resolve_flags(args)
        return args.func(args)
    except LanguageModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (ngram.ModelFileError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
