#!/usr/bin/env python3
"""Heat map of a sweep: intervened cells and their safe-sample rate.

usage: plot_sweep.py OUT_DIR
"""
import csv
import os
import sys

import matplotlib.pyplot as plt


def main():
    out = sys.argv[1]
    with open(os.path.join(out, "sweep.csv")) as f:
        rows = list(csv.DictReader(line for line in f if not line.startswith("#")))
    x = [float(r["x"]) for r in rows]
    y = [float(r["y"]) for r in rows]
    hit = [r["intervened"] == "1" for r in rows]
    rate = [float(r["rate"]) for r in rows]
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.scatter([a for a, h in zip(x, hit) if not h], [b for b, h in zip(y, hit) if not h], s=6, color="0.8")
    sc = ax.scatter([a for a, h in zip(x, hit) if h], [b for b, h in zip(y, hit) if h],
                    c=[r for r, h in zip(rate, hit) if h], s=10, cmap="viridis")
    fig.colorbar(sc, label="safe-sample rate at intervention")
    ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig(os.path.join(out, "sweep.png"), dpi=150)


if __name__ == "__main__":
    main()
