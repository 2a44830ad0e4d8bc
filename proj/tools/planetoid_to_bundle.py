#!/usr/bin/env python3
"""Convert Planetoid raw files (ind.<name>.*) into a bundle directory.

Expects the eight standard files for a dataset, e.g. for cora:
  ind.cora.x  ind.cora.tx  ind.cora.allx
  ind.cora.y  ind.cora.ty  ind.cora.ally
  ind.cora.graph  ind.cora.test.index

Usage:
  python3 tools/planetoid_to_bundle.py --raw /path/to/raw --name cora --out data/cora
"""

import argparse
import json
import pickle
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp


def load_pickle(path: Path):
    with open(path, "rb") as fh:
        return pickle.load(fh, encoding="latin1")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--raw", required=True, help="directory with ind.<name>.* files")
    ap.add_argument("--name", required=True, help="dataset name (cora, citeseer, pubmed)")
    ap.add_argument("--out", required=True, help="bundle output directory")
    ap.add_argument("--val-size", type=int, default=500)
    args = ap.parse_args()

    raw = Path(args.raw)
    parts = {}
    for ext in ("x", "y", "tx", "ty", "allx", "ally", "graph"):
        path = raw / f"ind.{args.name}.{ext}"
        if not path.exists():
            print(f"error: missing {path}", file=sys.stderr)
            return 1
        parts[ext] = load_pickle(path)

    test_idx = np.loadtxt(raw / f"ind.{args.name}.test.index", dtype=np.int64)
    test_sorted = np.sort(test_idx)

    features = sp.vstack((parts["allx"], parts["tx"])).tolil()
    labels_1hot = np.vstack((parts["ally"], parts["ty"]))

    # Citeseer has isolated test nodes missing from tx/ty; pad the gap range.
    full = np.arange(test_sorted.min(), test_sorted.max() + 1)
    if len(full) > len(test_idx):
        fx = sp.lil_matrix((len(full), parts["x"].shape[1]))
        fx[test_sorted - test_sorted.min(), :] = parts["tx"].tolil()
        fy = np.zeros((len(full), parts["y"].shape[1]))
        fy[test_sorted - test_sorted.min(), :] = parts["ty"]
        features = sp.vstack((parts["allx"], fx)).tolil()
        labels_1hot = np.vstack((parts["ally"], fy))

    # Planetoid stores test rows in shuffled order; undo the permutation.
    features[test_idx, :] = features[test_sorted, :]
    labels_1hot[test_idx, :] = labels_1hot[test_sorted, :]

    features = np.asarray(features.todense(), dtype=np.float32)
    labels = labels_1hot.argmax(axis=1).astype(np.int64)

    n, f = features.shape
    c = labels_1hot.shape[1]

    num_train = parts["y"].shape[0]
    train = list(range(num_train))
    val = list(range(num_train, num_train + args.val_size))
    test = [int(i) for i in test_sorted]

    edges = set()
    for u, nbrs in parts["graph"].items():
        for v in nbrs:
            if u == v:
                continue
            a, b = (u, v) if u < v else (v, u)
            if 0 <= a and b < n:
                edges.add((a, b))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    with open(out / "meta.json", "w") as fh:
        json.dump({"num_nodes": int(n), "feature_dim": int(f), "num_classes": int(c)}, fh)
        fh.write("\n")
    with open(out / "edges.txt", "w") as fh:
        for a, b in sorted(edges):
            fh.write(f"{a} {b}\n")
    features.tofile(out / "features.bin")
    with open(out / "labels.txt", "w") as fh:
        for y in labels:
            fh.write(f"{int(y)}\n")
    with open(out / "splits.json", "w") as fh:
        json.dump({"train": train, "val": val, "test": test}, fh)
        fh.write("\n")

    print(f"{args.name}: {n} nodes, {len(edges)} edges, {f} features, {c} classes")
    print(f"splits: train {len(train)}, val {len(val)}, test {len(test)}")
    print(f"wrote bundle to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
