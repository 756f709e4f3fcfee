#!/usr/bin/env python3
"""Regenerates the checked-in test fixtures. Output is deterministic."""
import json
import struct
from pathlib import Path

import numpy as np

HERE = Path(__file__).resolve().parent

GRID = 12
DIM = 32
GROUP = 8
PATCH = 4

LAYOUTS = {
    "one_block": [(3, 9, 3, 9)],
    "two_blocks": [(0, 8, 0, 9), (8, 12, 0, 9)],
    "three_blocks": [(0, 8, 0, 9), (8, 12, 0, 9), (3, 9, 9, 12)],
}
COLORS = [(40, 40, 40), (220, 60, 50), (60, 200, 80), (70, 90, 230)]


def write_ctf(path, array):
    array = np.ascontiguousarray(array, dtype="<f4")
    with open(path, "wb") as f:
        f.write(b"CTF1")
        f.write(struct.pack("<BBxx", 0, array.ndim))
        f.write(struct.pack("<%dQ" % array.ndim, *array.shape))
        f.write(array.tobytes())


def write_ppm(path, rgb):
    h, w, _ = rgb.shape
    with open(path, "wb") as f:
        f.write(b"P6\n%d %d\n255\n" % (w, h))
        f.write(rgb.astype(np.uint8).tobytes())


def planted(layout, sigma, rng):
    labels = np.zeros((GRID, GRID), dtype=int)
    for k, (r0, r1, c0, c1) in enumerate(layout, start=1):
        labels[r0:r1, c0:c1] = k
    feats = np.zeros((GRID, GRID, DIM))
    for k in range(len(layout) + 1):
        feats[labels == k, k * GROUP:(k + 1) * GROUP] = 1.0
    feats += sigma * rng.standard_normal(feats.shape)
    return labels, feats


def corpus():
    out_img = HERE / "corpus" / "images"
    out_feat = HERE / "corpus" / "features"
    out_img.mkdir(parents=True, exist_ok=True)
    out_feat.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20240601)
    for name, layout in LAYOUTS.items():
        labels, feats = planted(layout, 0.05, rng)
        write_ctf(out_feat / f"{name}.ctf", feats)
        rgb = np.zeros((GRID * PATCH, GRID * PATCH, 3))
        for k, color in enumerate(COLORS[: len(layout) + 1]):
            mask = np.kron(labels == k, np.ones((PATCH, PATCH))) > 0
            rgb[mask] = color
        rgb += rng.normal(0, 4, rgb.shape)
        write_ppm(out_img / f"{name}.ppm", np.clip(np.rint(rgb), 0, 255))


def encode_rle(mask):
    flat = mask.T.reshape(-1).astype(np.uint8)
    counts, current, run = [], 0, 0
    for v in flat:
        if v != current:
            counts.append(run)
            current, run = v, 0
        run += 1
    counts.append(run)
    return counts


def tight_box(mask):
    ys, xs = np.nonzero(mask)
    return [int(xs.min()), int(ys.min()), int(xs.max() - xs.min() + 1), int(ys.max() - ys.min() + 1)]


def annotation(mask, score, source="maskcut"):
    h, w = mask.shape
    return {
        "bbox": tight_box(mask),
        "score": float(score),
        "segmentation": {"counts": encode_rle(mask), "size": [h, w]},
        "source": source,
        "round": 0,
    }


def ellipse(h, w, cx, cy, rx, ry):
    yy, xx = np.mgrid[0:h, 0:w]
    return ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0


def rect(h, w, x, y, bw, bh):
    m = np.zeros((h, w), dtype=bool)
    m[y:y + bh, x:x + bw] = True
    return m


def eval_fixture():
    rng = np.random.default_rng(7)
    out = HERE / "eval"
    out.mkdir(parents=True, exist_ok=True)
    h, w = 160, 200
    gts, preds = [], []
    shapes = {
        "img_a": [rect(h, w, 10, 10, 20, 20), ellipse(h, w, 120, 80, 50, 40), rect(h, w, 60, 100, 40, 30)],
        "img_b": [rect(h, w, 5, 5, 12, 10), rect(h, w, 150, 10, 30, 60), ellipse(h, w, 60, 110, 30, 25),
                  rect(h, w, 100, 120, 8, 8)],
        "img_c": [ellipse(h, w, 100, 80, 90, 70)],
    }
    for image_id, masks in shapes.items():
        gts.append({"image_id": image_id, "width": w, "height": h, "round": 0,
                    "annotations": [annotation(m, 1.0) for m in masks]})
        dets = []
        for i, m in enumerate(masks):
            if image_id == "img_b" and i == 3:
                continue  # missed instance
            dx, dy = rng.integers(-4, 5, size=2)
            shifted = np.roll(np.roll(m, dy, axis=0), dx, axis=1)
            if i % 2 == 1:
                x, y, bw, bh = tight_box(shifted)
                shifted = rect(h, w, x, y, bw, bh)  # same box, looser mask
            dets.append(annotation(shifted, round(float(rng.uniform(0.3, 0.99)), 2), "prediction"))
        # duplicates, false positives and a score tie
        dets.append(annotation(np.roll(masks[0], 3, axis=1), 0.55, "prediction"))
        dets.append(annotation(rect(h, w, 170, 130, 20, 20), 0.55, "prediction"))
        dets.append(annotation(ellipse(h, w, 30, 130, 15, 12), float(rng.uniform(0.1, 0.9)), "prediction"))
        preds.append({"image_id": image_id, "width": w, "height": h, "round": 1, "annotations": dets})
    (out / "gt.json").write_text(json.dumps(gts, indent=1) + "\n")
    (out / "preds.json").write_text(json.dumps(preds, indent=1) + "\n")


if __name__ == "__main__":
    corpus()
    eval_fixture()
