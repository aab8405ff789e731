#!/usr/bin/env python3
"""Write an MNIST 0/1 subset as IDX files.

Source is a CSV (optionally gzipped) with 784 pixel columns followed by the
label, as shipped in mlxtend's ``mnist_5k.csv.gz``. Pass either that file or
an mlxtend wheel containing it. Rows keep their file order.

    python3 tools/mnist_subset_to_idx.py mlxtend-0.24.0-py3-none-any.whl data/mnist01
"""

import argparse
import csv
import gzip
import io
import struct
import sys
import zipfile
from pathlib import Path

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


def read_rows(source: Path):
    if source.suffix == ".whl":
        with zipfile.ZipFile(source) as wheel:
            raw = gzip.decompress(wheel.read(MEMBER))
    elif source.suffix == ".gz":
        raw = gzip.decompress(source.read_bytes())
    else:
        raw = source.read_bytes()
    for row in csv.reader(io.StringIO(raw.decode("ascii"))):
        if row:
            yield [int(float(v)) for v in row]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("source", type=Path)
    ap.add_argument("outdir", type=Path)
    ap.add_argument("--digits", default="0,1")
    args = ap.parse_args(argv)

    keep = {int(d) for d in args.digits.split(",")}
    pixels = bytearray()
    labels = bytearray()
    for row in read_rows(args.source):
        if len(row) != 785:
            sys.exit(f"expected 785 columns, got {len(row)}")
        if row[-1] in keep:
            pixels.extend(row[:-1])
            labels.append(row[-1])

    n = len(labels)
    args.outdir.mkdir(parents=True, exist_ok=True)
    (args.outdir / "images.idx3-ubyte").write_bytes(struct.pack(">IIII", 0x803, n, 28, 28) + pixels)
    (args.outdir / "labels.idx1-ubyte").write_bytes(struct.pack(">II", 0x801, n) + labels)
    counts = {d: labels.count(d) for d in sorted(keep)}
    print(f"wrote {n} examples to {args.outdir}: {counts}")


if __name__ == "__main__":
    main()
