#!/usr/bin/env python3
"""Convert a MATLAB hyperspectral scene to the sarstv cube/label formats.

    convert_mat.py Indian_pines_corrected.mat Indian_pines_gt.mat data/indian_pines
    convert_mat.py PaviaU.mat PaviaU_gt.mat data/pavia_u

Writes <out>.json + <out>.raw (f32, band-sequential) and <out>_labels.csv.
"""

import argparse
import json
from pathlib import Path

import numpy as np
import scipy.io


def pick(mat, ndim, key):
    if key:
        return np.asarray(mat[key])
    arrays = [v for k, v in mat.items() if not k.startswith("__") and getattr(v, "ndim", 0) == ndim]
    if len(arrays) != 1:
        raise SystemExit(f"expected exactly one {ndim}-D array, found {len(arrays)}; pass --cube-key/--labels-key")
    return np.asarray(arrays[0])


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("cube_mat")
    ap.add_argument("labels_mat")
    ap.add_argument("out", help="output path without extension")
    ap.add_argument("--cube-key")
    ap.add_argument("--labels-key")
    args = ap.parse_args()

    cube = pick(scipy.io.loadmat(args.cube_mat), 3, args.cube_key).astype(np.float64)
    labels = pick(scipy.io.loadmat(args.labels_mat), 2, args.labels_key).astype(np.int64)
    h, w, b = cube.shape
    if labels.shape != (h, w):
        raise SystemExit(f"label grid {labels.shape} does not match cube grid {(h, w)}")

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    header = {"height": h, "width": w, "bands": b, "dtype": "f32", "interleave": "bsq"}
    out.with_suffix(".json").write_text(json.dumps(header))
    np.ascontiguousarray(cube.transpose(2, 0, 1)).astype("<f4").tofile(out.with_suffix(".raw"))
    np.savetxt(out.parent / (out.name + "_labels.csv"), labels, fmt="%d", delimiter=",")
    print(f"{out}: {h}x{w}x{b}, {int(labels.max())} classes, {int((labels > 0).sum())} labeled pixels")


if __name__ == "__main__":
    main()
