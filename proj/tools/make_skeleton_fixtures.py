#!/usr/bin/env python3
# Copyright 2026 The Previz Authors
# SPDX-License-Identifier: Apache-2.0
"""Writes the three-person dialogue skeleton fixtures.

dialogue_labeled.skel carries hand-assigned person ids; dialogue_unlabeled.skel
holds the same poses with ids stripped and persons shuffled per frame.
"""
import math
import random
import sys
from pathlib import Path

FPS = 16
FRAMES = 48

# Standing pose in a person-local frame (x right, y down), hip midpoint at 0.
BASE = [(0.00, -0.38), (0.00, -0.30), (-0.05, -0.29), (-0.07, -0.18), (-0.08, -0.07),
        (0.05, -0.29), (0.07, -0.18), (0.08, -0.07), (-0.03, 0.00), (-0.03, 0.14),
        (-0.03, 0.28), (0.03, 0.00), (0.03, 0.14), (0.03, 0.28), (-0.015, -0.40),
        (0.015, -0.40), (-0.03, -0.39), (0.03, -0.39)]


def pose(cx, cy, scale, phase, f):
    wave = math.sin(2 * math.pi * (f / FPS) * 0.8 + phase)
    pts = []
    for j, (x, y) in enumerate(BASE):
        if j in (3, 4):  # right arm gestures
            x -= 0.02 * wave * (j - 2)
            y -= 0.03 * max(0.0, wave) * (j - 2)
        if j in (0, 14, 15, 16, 17):  # head nods
            y += 0.006 * math.sin(2 * math.pi * f / FPS * 1.3 + phase)
        pts.append((cx + x * scale, cy + y * scale, 0.9 + 0.1 * math.cos(j + phase)))
    return pts


def fmt(v):
    return repr(round(v, 6))


def main(out_dir):
    rng = random.Random(7)
    people = [(0, 0.22, 0.55, 1.0, 0.0), (1, 0.50, 0.57, 0.95, 1.7), (2, 0.78, 0.54, 1.05, 3.1)]
    frames = []
    for f in range(FRAMES):
        persons = []
        for pid, cx, cy, s, ph in people:
            if pid == 2 and 20 <= f < 25:  # steps out of frame
                continue
            drift = 0.004 * math.sin(f / 7 + ph)
            persons.append((pid, pose(cx + drift, cy, s, ph, f)))
        frames.append(persons)

    def write(path, labeled):
        lines = ["previz-skel/1", "# three-person dialogue", f"fps {FPS}", "source 1280 720",
                 f"frames {FRAMES}"]
        for f, persons in enumerate(frames):
            order = list(persons)
            if not labeled:
                rng.shuffle(order)
            lines.append(f"frame {f} {len(order)}")
            for pid, pts in order:
                head = str(pid) if labeled else "?"
                lines.append("person " + head + " " + " ".join(
                    f"{fmt(x)} {fmt(y)} {fmt(c)}" for x, y, c in pts))
        Path(path).write_text("\n".join(lines) + "\n")

    write(Path(out_dir) / "dialogue_labeled.skel", True)
    write(Path(out_dir) / "dialogue_unlabeled.skel", False)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures")
