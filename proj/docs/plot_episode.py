#!/usr/bin/env python3
"""Plot the xy path of single-robot episodes, marking intervened steps.

usage: plot_episode.py OUT_DIR [CONFIG]
"""
import csv
import glob
import json
import os
import sys

import matplotlib.pyplot as plt


def load(path):
    with open(path) as f:
        rows = [line for line in f if not line.startswith("#")]
    return list(csv.DictReader(rows))


def main():
    out = sys.argv[1]
    fig, ax = plt.subplots(figsize=(6, 4))
    if len(sys.argv) > 2:
        cfg = json.load(open(sys.argv[2]))
        r = cfg["safety"].get("robot_radius", 0.1)
        for o in cfg["safety"]["obstacles"]:
            ax.add_patch(plt.Circle((o["x"], o["y"]), o["r"], color="0.6"))
            ax.add_patch(plt.Circle((o["x"], o["y"]), o["r"] + r, fill=False, ls=":", color="0.6"))
    for path in sorted(glob.glob(os.path.join(out, "episode_*.csv"))):
        rows = load(path)
        xs = [float(r["x"]) for r in rows]
        ys = [float(r["y"]) for r in rows]
        ax.plot(xs, ys, lw=1)
        hit = [(x, y) for x, y, r in zip(xs, ys, rows) if r["intervened"] == "1"]
        if hit:
            ax.scatter(*zip(*hit), s=8, color="red", zorder=3)
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    fig.tight_layout()
    fig.savefig(os.path.join(out, "paths.png"), dpi=150)


if __name__ == "__main__":
    main()
