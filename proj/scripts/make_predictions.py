#!/usr/bin/env python3
"""Writes fixtures/predictions.jsonl and fixtures/vqa_predictions.jsonl.

Inputs are the label/generate outputs of the shipped fixture
(out/plan_gt.jsonl, out/qa.jsonl). Plans get seeded drift noise, with every
seventh sample drifting right hard enough to leave the drivable area; VQA
answers are the template answers with seeded word drops and swaps.
"""
import json
import pathlib
import random
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent
SWAPS = {"near": "mid", "left": "right", "two": "three", "red": "green", "slow": "speed"}


def plans(src, dst, rng):
    out = []
    for n, line in enumerate(src.read_text().splitlines()):
        gt = json.loads(line)
        ex, ey = rng.gauss(0.0, 0.12), rng.gauss(0.0, 0.06)
        drift = -2.2 if n % 7 == 3 else 0.0
        wps = []
        for t, x, y in gt["waypoints"]:
            wps.append([t, round(x + ex * t * t, 6), round(y + ey * t * t + drift * t, 6)])
        out.append(json.dumps({"sample_id": gt["sample_id"], "waypoints": wps}))
    dst.write_text("\n".join(out) + "\n")


def answers(src, dst, rng):
    out = []
    for line in src.read_text().splitlines():
        qa = json.loads(line)
        words = qa["answer"]["text"].split()
        kept = [w for w in words if rng.random() > 0.15] or words[:1]
        kept = [SWAPS.get(w, w) if rng.random() < 0.3 else w for w in kept]
        out.append(json.dumps({"id": qa["id"], "answer": " ".join(kept)}))
    dst.write_text("\n".join(out) + "\n")


def main():
    out_dir = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "out"
    rng = random.Random(7)
    plans(out_dir / "plan_gt.jsonl", ROOT / "fixtures" / "predictions.jsonl", rng)
    answers(out_dir / "qa.jsonl", ROOT / "fixtures" / "vqa_predictions.jsonl", rng)


if __name__ == "__main__":
    main()
