#!/usr/bin/env python3
"""Roll a model forward and tabulate per-step divergences for each encoder.

Writes the raw table, a summary, and histogram CSVs next to this script,
then prints the summary.  Swap the trained model for a bridge-backed one
to measure a neural model instead (see 05_gpt2_bridge.py).
"""

import os

from stegotext import train_ngram
from stegotext.analysis import (
    ExperimentSpec,
    emit_histogram,
    format_table,
    run_experiment,
    summarize,
)

HERE = os.path.dirname(__file__)
CORPUS = os.path.join(HERE, "data", "river_town.txt")
OUT = os.path.join(HERE, "measurement")


def main() -> None:
    with open(CORPUS, encoding="utf-8") as fh:
        model = train_ngram(fh.read(), order=2, alpha=0.2)

    spec = ExperimentSpec(
        num_prefixes=25,
        steps_per_prefix=40,
        bins_ks=(3,),
        partition_seed=8,
        rng_seed=8,
    )
    rows = run_experiment(model, spec)
    print(f"recorded {len(rows)} rows over {spec.total_steps} steps\n")

    with open(OUT + ".csv", "w", encoding="utf-8") as fh:
        fh.write(format_table(rows))
    with open(OUT + ".summary.csv", "w", encoding="utf-8") as fh:
        fh.write(summarize(rows))

    bins_kl = [r.kl_bits for r in rows if r.algo == "bins"]
    vlc_kl = [r.kl_bits for r in rows if r.algo == "vlc"]
    with open(OUT + ".hist.bins3.csv", "w", encoding="utf-8") as fh:
        fh.write(emit_histogram(bins_kl, 30, upper=3.0))
    with open(OUT + ".hist.vlc.csv", "w", encoding="utf-8") as fh:
        fh.write(emit_histogram(vlc_kl, 30, upper=1.0))

    print(summarize(rows))
    print(f"tables written to {OUT}.csv / .summary.csv / .hist.*.csv")
    print("bins rows stay in [0, k]; vlc rows stay under 1 bit by construction")


if __name__ == "__main__":
    main()
