#!/usr/bin/env python3
"""Write a small MNIST subset as IDX files.

The source is the 5000-image MNIST sample (500 images per digit) that ships
inside the ``mlxtend`` wheel, so no network access to the MNIST mirrors is
needed. Images are shuffled with a fixed seed and split per class into a
train part and a test part, then written in the standard IDX layout:

    train-images-idx3-ubyte  train-labels-idx1-ubyte
    t10k-images-idx3-ubyte   t10k-labels-idx1-ubyte
"""

import argparse
import gzip
import pathlib
import struct

import numpy as np


def load_source(path):
    if path is None:
        import mlxtend.data.mnist as m

        path = pathlib.Path(m.DATA_PATH)
    raw = np.loadtxt(gzip.open(path, "rt"), delimiter=",")
    images = raw[:, :-1].astype(np.uint8)
    labels = raw[:, -1].astype(np.uint8)
    return images, labels


def write_images(path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        f.write(images.astype(np.uint8).tobytes())


def write_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--source", default=None, help="mnist_5k.csv.gz (defaults to the mlxtend copy)")
    ap.add_argument("--out", default="data/mnist")
    ap.add_argument("--test-per-class", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    images, labels = load_source(args.source)
    rng = np.random.RandomState(args.seed)
    train_idx, test_idx = [], []
    for c in range(10):
        idx = np.flatnonzero(labels == c)
        rng.shuffle(idx)
        test_idx.extend(idx[: args.test_per_class])
        train_idx.extend(idx[args.test_per_class :])
    train_idx = np.array(train_idx)
    test_idx = np.array(test_idx)
    rng.shuffle(train_idx)
    rng.shuffle(test_idx)

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_images(out / "train-images-idx3-ubyte", images[train_idx])
    write_labels(out / "train-labels-idx1-ubyte", labels[train_idx])
    write_images(out / "t10k-images-idx3-ubyte", images[test_idx])
    write_labels(out / "t10k-labels-idx1-ubyte", labels[test_idx])
    print(f"wrote {len(train_idx)} train / {len(test_idx)} test images to {out}")


if __name__ == "__main__":
    main()
