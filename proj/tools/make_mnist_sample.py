#!/usr/bin/env python3
"""Build the small MNIST sample shipped in data/mnist-sample/.

The sandbox this project was developed in has no route to the official MNIST
mirrors, so the sample is taken from the 5000-image subset bundled with the
mlxtend wheel (500 images per digit, sorted by label). The images are shuffled
with a fixed seed and split 4000/1000 into IDX files with the standard magic
numbers, so the C++ reader treats them exactly like the official files.

Usage: python3 tools/make_mnist_sample.py [OUT_DIR]
"""

import glob
import gzip
import os
import struct
import subprocess
import sys
import tempfile
import zipfile

import numpy as np

SEED = 20200401
N_TRAIN = 4000


def load_mlxtend_csv():
    tmp = tempfile.mkdtemp()
    subprocess.run([sys.executable, "-m", "pip", "download", "mlxtend", "--no-deps",
                    "-d", tmp, "-q"], check=True)
    wheel = zipfile.ZipFile(glob.glob(os.path.join(tmp, "*.whl"))[0])
    text = gzip.decompress(wheel.read("mlxtend/data/data/mnist_5k.csv.gz")).decode()
    rows = [line.split(",") for line in text.splitlines() if line]
    images = np.array([[int(float(v)) for v in r[:-1]] for r in rows], dtype=np.uint8)
    labels = np.array([int(r[-1]) for r in rows], dtype=np.uint8)
    return images, labels


def write_idx_images(path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        f.write(images.tobytes())


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(labels.tobytes())


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
        os.path.dirname(__file__), "..", "data", "mnist-sample")
    os.makedirs(out, exist_ok=True)
    images, labels = load_mlxtend_csv()
    order = np.random.RandomState(SEED).permutation(len(labels))
    images, labels = images[order], labels[order]
    write_idx_images(os.path.join(out, "train-images-idx3-ubyte"), images[:N_TRAIN])
    write_idx_labels(os.path.join(out, "train-labels-idx1-ubyte"), labels[:N_TRAIN])
    write_idx_images(os.path.join(out, "test-images-idx3-ubyte"), images[N_TRAIN:])
    write_idx_labels(os.path.join(out, "test-labels-idx1-ubyte"), labels[N_TRAIN:])
    print("train labels head:", labels[:10].tolist())


if __name__ == "__main__":
    main()
