#!/usr/bin/env python3
"""Build gzipped IDX files of Fashion-MNIST from the `fashion-mnist` npm package.

The package ships one JSON file per class (src/clothes/<label>.json, key "data")
holding rows of 784 raw pixel values. The original train/test split is not
preserved there, so all 70,000 images form a single pool.

    tools/fetch_fashion_mnist.py --out-dir data                      # full pool
    tools/fetch_fashion_mnist.py --out-dir tests/data --subsample 6000 \
        --seed 20240501 --prefix fashion6k                           # test subset
"""

import argparse
import gzip
import json
import pathlib
import subprocess
import sys
import tarfile
import tempfile

import numpy as np

IMAGE_SIDE = 28


def fetch_package(workdir: pathlib.Path) -> pathlib.Path:
    out = subprocess.run(
        ["npm", "pack", "fashion-mnist", "--silent"],
        cwd=workdir, check=True, capture_output=True, text=True,
    )
    tarball = workdir / out.stdout.strip().splitlines()[-1]
    with tarfile.open(tarball) as tar:
        tar.extractall(workdir)
    return workdir / "package"


def load_pool(package: pathlib.Path):
    images, labels = [], []
    for label in range(10):
        with open(package / "src" / "clothes" / f"{label}.json") as f:
            rows = json.load(f)["data"]
        for row in rows:
            if len(row) != IMAGE_SIDE * IMAGE_SIDE:
                continue  # the package carries a few empty rows
            images.append(row)
            labels.append(label)
    return np.asarray(images, dtype=np.uint8), np.asarray(labels, dtype=np.uint8)


def write_idx(path: pathlib.Path, array: np.ndarray, magic: int) -> None:
    header = magic.to_bytes(4, "big") + b"".join(int(d).to_bytes(4, "big") for d in array.shape)
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(header)
        f.write(array.tobytes())


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--out-dir", type=pathlib.Path, required=True)
    parser.add_argument("--package-dir", type=pathlib.Path, help="already extracted npm package")
    parser.add_argument("--subsample", type=int, default=0, help="keep this many images, seeded")
    parser.add_argument("--seed", type=int, default=20240501)
    parser.add_argument("--prefix", default="fashion")
    args = parser.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        package = args.package_dir or fetch_package(pathlib.Path(tmp))
        images, labels = load_pool(package)
    print(f"pool: {len(images)} images", file=sys.stderr)

    if args.subsample:
        rng = np.random.default_rng(args.seed)
        keep = np.sort(rng.choice(len(images), size=args.subsample, replace=False))
        images, labels = images[keep], labels[keep]

    args.out_dir.mkdir(parents=True, exist_ok=True)
    write_idx(args.out_dir / f"{args.prefix}-images-idx3-ubyte.gz",
              images.reshape(-1, IMAGE_SIDE, IMAGE_SIDE), 0x803)
    write_idx(args.out_dir / f"{args.prefix}-labels-idx1-ubyte.gz", labels, 0x801)
    print(f"wrote {len(images)} images to {args.out_dir}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
