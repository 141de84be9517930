#!/usr/bin/env python3
"""Builds a 10,000-digit MNIST subset in IDX format from the `mnist` npm package.

The npm package (https://www.npmjs.com/package/mnist, MIT) ships 10,000 MNIST
digits as per-class JSON arrays of pixel/255 rounded to three decimals; the
rounding is lossless for 8-bit pixels, so the original bytes are recovered
exactly.  The digits are split with a fixed seed into a training file and a
held-out test file using the standard IDX file names:

    train-images-idx3-ubyte.gz  train-labels-idx1-ubyte.gz
    t10k-images-idx3-ubyte.gz   t10k-labels-idx1-ubyte.gz

Usage:
    npm pack mnist@1.1.0
    python3 tools/make_mnist_subset.py mnist-1.1.0.tgz data/mnist --test 2000
"""

import argparse
import gzip
import json
import random
import struct
import tarfile
from pathlib import Path


def read_digits(tgz_path):
    samples = []
    with tarfile.open(tgz_path) as tar:
        for digit in range(10):
            member = tar.extractfile(f"package/src/digits/{digit}.json")
            values = json.load(member)["data"]
            if len(values) % 784 != 0:
                raise ValueError(f"digit {digit}: payload is not a multiple of 784")
            for start in range(0, len(values), 784):
                pixels = bytes(round(v * 255) for v in values[start:start + 784])
                samples.append((digit, pixels))
    return samples


def write_idx(path, labels, images):
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        for image in images:
            f.write(image)
    label_path = str(path).replace("images-idx3", "labels-idx1")
    with gzip.GzipFile(label_path, "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("package", help="path to mnist-<version>.tgz from `npm pack mnist`")
    parser.add_argument("out_dir")
    parser.add_argument("--test", type=int, default=2000, help="held-out test images")
    parser.add_argument("--seed", type=int, default=20231)
    args = parser.parse_args()

    samples = read_digits(args.package)
    random.Random(args.seed).shuffle(samples)
    test, train = samples[: args.test], samples[args.test:]

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for prefix, split in (("train", train), ("t10k", test)):
        write_idx(out / f"{prefix}-images-idx3-ubyte.gz",
                  [label for label, _ in split], [image for _, image in split])
    print(f"wrote {len(train)} train / {len(test)} test digits to {out}")


if __name__ == "__main__":
    main()
