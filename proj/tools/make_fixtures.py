#!/usr/bin/env python3
"""Regenerate the bundled fixtures under data/fixtures/ (PGM images + JSONL
datasets). Deterministic: rerunning produces byte-identical files."""

import json
import os

HERE = os.path.dirname(os.path.abspath(__file__))
FIX = os.path.normpath(os.path.join(HERE, "..", "data", "fixtures"))


def write_pgm(path, w, h, pix):
    assert len(pix) == w * h
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (w, h))
        f.write(bytes(pix))


def lcg(seed):
    state = seed & 0x7FFFFFFF
    while True:
        state = (1103515245 * state + 12345) & 0x7FFFFFFF
        yield state


def make_images():
    d = os.path.join(FIX, "img")
    os.makedirs(d, exist_ok=True)
    w = h = 64
    checker = [255 if (x + y) % 2 == 0 else 0 for y in range(h) for x in range(w)]
    write_pgm(os.path.join(d, "checkerboard.pgm"), w, h, checker)
    ramp = [round(x * 255 / (w - 1)) for y in range(h) for x in range(w)]
    write_pgm(os.path.join(d, "ramp.pgm"), w, h, ramp)
    write_pgm(os.path.join(d, "flat.pgm"), w, h, [128] * (w * h))
    rng = lcg(20240817)
    noise = [next(rng) % 256 for _ in range(w * h)]
    write_pgm(os.path.join(d, "noise.pgm"), w, h, noise)
    tiny = [255 if (x + y) % 2 == 0 else 0 for y in range(16) for x in range(16)]
    write_pgm(os.path.join(d, "tiny_checker.pgm"), 16, 16, tiny)


IMAGES = ["img/checkerboard.pgm", "img/noise.pgm", "img/ramp.pgm", "img/flat.pgm"]

PLAIN_FORMS = [
    "What is {a} + {b}?",
    "Compute the sum of {a} and {b}.",
    "How much is {a} plus {b} in total?",
    "Why does adding {a} to {b} still give the same total as adding {b} to {a}, and what is it?",
    "A group of {a} marbles sits between two piles, and {b} more arrive. What is the total?",
]

IMAGE_FORMS = [
    "The picture shows {a} circles and {b} squares. How many shapes are shown in the image?",
    "Looking at the figure, both rows hold {a} and {b} items. What is the total in the picture?",
]


def make_e2e(path, count):
    rng = lcg(7120250)
    lines = []
    for i in range(count):
        a = 1 + next(rng) % 50
        b = 1 + next(rng) % 50
        s = {"id": "fx-%03d" % i}
        if i % 12 == 5:
            img = IMAGES[(i // 12) % len(IMAGES)]
            s["image"] = img
            q = IMAGE_FORMS[i % len(IMAGE_FORMS)]
            s["meta"] = {"caption": "a grid of %d and %d simple shapes" % (a, b)}
        else:
            q = PLAIN_FORMS[i % len(PLAIN_FORMS)]
        if i % 25 == 7:
            odd = a if a % 2 == 1 else a + 1
            s["question"] = "What is %d divided by 2?" % odd
            s["gold_answer"] = "%d.5" % (odd // 2)
        else:
            s["question"] = q.format(a=a, b=b)
            s["gold_answer"] = str(a + b)
        if i % 17 == 3:
            s.setdefault("meta", {})["rm_score"] = "5"
        lines.append(json.dumps(s, sort_keys=True))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def make_bad_image(path):
    lines = []
    for i in range(10):
        s = {
            "id": "bad-%d" % i,
            "question": "What is %d + %d?" % (i + 1, i + 2),
            "gold_answer": str(2 * i + 3),
        }
        if i == 3:
            s["image"] = "img/missing.pgm"
        elif i == 6:
            s["image"] = "img/checkerboard.pgm"
        lines.append(json.dumps(s, sort_keys=True))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def main():
    os.makedirs(FIX, exist_ok=True)
    make_images()
    make_e2e(os.path.join(FIX, "e2e_100.jsonl"), 100)
    make_bad_image(os.path.join(FIX, "bad_image_10.jsonl"))
    print("fixtures written to", FIX)


if __name__ == "__main__":
    main()
