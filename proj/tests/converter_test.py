#!/usr/bin/env python3
"""Fixture tests for tools/convert_datasets.py.

Builds miniature raw dumps in each supported format, runs the converter, and
validates the GraphText output. Run as: converter_test.py <path-to-converter>
"""

import json
import pickle
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np
import scipy.sparse as sp

FAILURES = []


def check(cond, msg):
    if not cond:
        FAILURES.append(msg)
        print(f"FAIL: {msg}")


def read_graphtext(out):
    out = Path(out)
    meta = json.loads((out / "meta.json").read_text())
    edges = [tuple(int(v) for v in line.split())
             for line in (out / "edges.txt").read_text().split("\n") if line.strip()]
    labels = [int(line) for line in (out / "labels.txt").read_text().split("\n")
              if line.strip()]
    features = [[float(v) for v in line.split()]
                for line in (out / "features.txt").read_text().split("\n")
                if line.strip()]
    return meta, edges, labels, features


def run(converter, fmt, name, raw, out):
    proc = subprocess.run([sys.executable, converter, fmt, "--name", name,
                           "--raw", str(raw), "--out", str(out)],
                          capture_output=True, text=True)
    check(proc.returncode == 0, f"{fmt} converter exited {proc.returncode}: {proc.stderr}")
    return proc.stdout


def test_planetoid(converter, tmp):
    # 6 nodes: 0-3 in allx/ally, test nodes live at global ids {4, 6} with a
    # hole at 5 (the citeseer quirk: missing ids become isolated zero rows)
    raw = tmp / "planetoid_raw"
    raw.mkdir()
    rng = np.random.default_rng(0)
    allx = sp.csr_matrix(rng.normal(size=(4, 3)))
    tx = sp.csr_matrix(rng.normal(size=(2, 3)))
    ally = np.eye(2, dtype=int)[[0, 1, 0, 1]]
    ty = np.eye(2, dtype=int)[[1, 0]]
    graph = {0: [1, 4], 1: [0], 2: [6], 4: [0], 6: [2]}
    for suffix, obj in [("x", allx[:2]), ("tx", tx), ("allx", allx),
                        ("y", ally[:2]), ("ty", ty), ("ally", ally),
                        ("graph", graph)]:
        with open(raw / f"ind.mini.{suffix}", "wb") as f:
            pickle.dump(obj, f)
    (raw / "ind.mini.test.index").write_text("6\n4\n")

    out = tmp / "planetoid_out"
    run(converter, "planetoid", "mini", raw, out)
    meta, edges, labels, features = read_graphtext(out)
    check(meta["num_nodes"] == 7, f"planetoid nodes {meta['num_nodes']} != 7")
    check(meta["num_classes"] == 2, "planetoid classes != 2")
    check(meta["feature_dim"] == 3, "planetoid feature_dim != 3")
    # symmetric closure of {0-1, 0-4, 2-6}
    check(sorted(edges) == [(0, 1), (0, 4), (1, 0), (2, 6), (4, 0), (6, 2)],
          f"planetoid edges wrong: {sorted(edges)}")
    # test.index order maps tx rows back to global ids: row for id 6 first
    check(labels[:4] == [0, 1, 0, 1], f"planetoid train labels wrong: {labels}")
    check(labels[4] == 0 and labels[6] == 1, f"planetoid test labels wrong: {labels}")
    check(all(v == 0.0 for v in features[5]), "hole node should have zero features")
    tx_dense = np.asarray(tx.todense())
    check(np.allclose(features[6], tx_dense[0]), "tx row for id 6 misplaced")
    check(np.allclose(features[4], tx_dense[1]), "tx row for id 4 misplaced")


def test_webkb(converter, tmp):
    raw = tmp / "webkb_raw"
    raw.mkdir()
    (raw / "out1_graph_edges.txt").write_text(
        "src\tdst\n0 1\n1 0\n1 2\n2 2\n")  # includes a reverse dup and a self-loop
    # feature/label file carries ids out of order
    (raw / "out1_node_feature_label.txt").write_text(
        "id\tfeat\tlabel\n"
        "1\t0,1,0\t2\n"
        "0\t1,0,0\t0\n"
        "2\t0,0,1\t1\n")
    out = tmp / "webkb_out"
    stdout = run(converter, "webkb", "miniweb", raw, out)
    meta, edges, labels, features = read_graphtext(out)
    check(meta["num_nodes"] == 3, "webkb nodes != 3")
    check(sorted(edges) == [(0, 1), (1, 0), (1, 2), (2, 1)],
          f"webkb edges wrong: {sorted(edges)}")
    check(labels == [0, 2, 1], f"webkb labels not id-ordered: {labels}")
    check(features[0] == [1.0, 0.0, 0.0], "webkb features not id-ordered")
    check("homophily_ratio" in stdout, "converter should report homophily")


def test_linqs(converter, tmp):
    raw = tmp / "linqs_raw"
    raw.mkdir()
    (raw / "mini.content").write_text(
        "paperA 1 0 genetics\n"
        "paperB 0 1 genetics\n"
        "paperC 1 1 theory\n")
    # one citation to an id outside the content file must be dropped
    (raw / "mini.cites").write_text("paperA paperB\npaperB paperC\npaperA ghost\n")
    out = tmp / "linqs_out"
    run(converter, "linqs", "mini", raw, out)
    meta, edges, labels, _ = read_graphtext(out)
    check(meta["num_nodes"] == 3, "linqs nodes != 3")
    check(meta["num_classes"] == 2, "linqs classes != 2")
    check(len(edges) == 4, f"linqs edges {len(edges)} != 4")
    check(labels[0] == labels[1] != labels[2], f"linqs labels wrong: {labels}")


def main():
    if len(sys.argv) != 2:
        print("usage: converter_test.py <convert_datasets.py>")
        return 1
    converter = sys.argv[1]
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        test_planetoid(converter, tmp)
        test_webkb(converter, tmp)
        test_linqs(converter, tmp)
    if FAILURES:
        print(f"{len(FAILURES)} converter checks failed")
        return 1
    print("converter fixtures: all checks passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
