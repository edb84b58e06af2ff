#!/usr/bin/env python3
"""Plot mean delay and message counts per scheme from a `swarmsched run` CSV.

Usage: python scripts/plot_sweep.py sweep.csv out.png   (needs matplotlib)
"""
import csv
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main(src, dst):
    means = defaultdict(dict)
    with open(src) as fh:
        for row in csv.DictReader(fh):
            if row["trial"] == "mean":
                means[row["scheme"]][int(row["size"])] = (
                    float(row["delay_slots"]),
                    float(row["messages"]),
                )
    fig, (ax_d, ax_m) = plt.subplots(1, 2, figsize=(10, 4))
    for scheme, by_size in sorted(means.items()):
        sizes = sorted(by_size)
        ax_d.plot(sizes, [by_size[s][0] for s in sizes], marker="o", label=scheme)
        ax_m.plot(sizes, [by_size[s][1] for s in sizes], marker="o", label=scheme)
    ax_d.set(xlabel="UAVs", ylabel="time slots", title="aggregation delay")
    ax_m.set(xlabel="UAVs", ylabel="messages", title="overhead", yscale="log")
    ax_m.legend()
    fig.tight_layout()
    fig.savefig(dst, dpi=120)


if __name__ == "__main__":
    main(*sys.argv[1:3])
