#!/usr/bin/env python3
"""Convert public node-classification dumps into GraphText directories.

Supported inputs:
  planetoid  -- the ind.<name>.{x,tx,allx,y,ty,ally,graph,test.index} pickle
                set (Cora / CiteSeer / PubMed), as shipped in the
                kimiyoung/planetoid repository and consumed by
                torch-geometric.
  webkb      -- the out1_graph_edges.txt / out1_node_feature_label.txt pair
                (Cornell / Texas / Wisconsin / Actor) from the geom-gcn
                repository's new_data folder.
  linqs      -- the <name>.content / <name>.cites pair from the LINQS
                distribution of Cora-style citation networks.

Output layout (one directory per dataset):
  meta.json      {name, num_nodes, num_classes, feature_dim, undirected}
  edges.txt      one "src dst" pair per line, both directions present,
                 deduplicated, self-loops dropped
  features.txt   one row of feature_dim reals per node
  labels.txt     one integer per line

Usage:
  convert_datasets.py planetoid --name cora --raw <dir with ind.cora.*> --out data/cora
  convert_datasets.py webkb --name texas --raw <dir with out1_*> --out data/texas
  convert_datasets.py linqs --name cora --raw <dir with cora.content> --out data/cora
"""

import argparse
import json
import pickle
import sys
from pathlib import Path

import numpy as np

# reference statistics for the common benchmarks (nodes, edges, features,
# classes); a mismatch is reported but does not abort the conversion
REFERENCE_STATS = {
    "cora": (2708, 10556, 1433, 7),
    "citeseer": (3327, 9104, 3703, 6),
    "pubmed": (19717, 88648, 500, 3),
    "cornell": (183, 298, 1703, 5),
    "texas": (183, 325, 1703, 5),
    "wisconsin": (251, 515, 1703, 5),
    "actor": (7600, 30019, 932, 5),
}


def symmetrize(edges, drop_self_loops=True):
    out = set()
    for s, d in edges:
        if drop_self_loops and s == d:
            continue
        out.add((s, d))
        out.add((d, s))
    return sorted(out)


def write_graphtext(out_dir, name, edges, features, labels, undirected=True):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    num_nodes, feature_dim = features.shape
    num_classes = int(labels.max()) + 1
    meta = {
        "name": name,
        "num_nodes": int(num_nodes),
        "num_classes": num_classes,
        "feature_dim": int(feature_dim),
        "undirected": undirected,
    }
    (out_dir / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    with open(out_dir / "edges.txt", "w") as f:
        for s, d in edges:
            f.write(f"{s} {d}\n")
    with open(out_dir / "features.txt", "w") as f:
        for row in features:
            f.write(" ".join(repr(float(v)) for v in row) + "\n")
    with open(out_dir / "labels.txt", "w") as f:
        for y in labels:
            f.write(f"{int(y)}\n")

    stats = (int(num_nodes), len(edges), int(feature_dim), num_classes)
    print(f"{name}: nodes={stats[0]} edges={stats[1]} features={stats[2]} classes={stats[3]}")
    if name in REFERENCE_STATS:
        ref = REFERENCE_STATS[name]
        if stats == ref:
            print(f"{name}: matches the reference statistics")
        else:
            print(f"{name}: WARNING reference statistics are {ref}")
    same = sum(1 for s, d in edges if labels[s] == labels[d])
    print(f"{name}: homophily_ratio={same / len(edges):.4f}")


def load_pickle(path):
    with open(path, "rb") as f:
        return pickle.load(f, encoding="latin1")


def convert_planetoid(name, raw, out):
    raw = Path(raw)

    def p(suffix):
        return raw / f"ind.{name}.{suffix}"

    x, tx, allx = (load_pickle(p(s)) for s in ("x", "tx", "allx"))
    y, ty, ally = (load_pickle(p(s)) for s in ("y", "ty", "ally"))
    graph = load_pickle(p("graph"))
    test_index = np.loadtxt(p("test.index"), dtype=int)

    # allx covers train+unlabeled nodes; tx/ty cover the test nodes, whose
    # global ids come from test.index (CiteSeer has holes: isolated test ids)
    sorted_test = np.sort(test_index)
    full_range = np.arange(sorted_test.min(), sorted_test.max() + 1)
    allx = allx.todense() if hasattr(allx, "todense") else allx
    tx = tx.todense() if hasattr(tx, "todense") else tx
    num_nodes = allx.shape[0] + len(full_range)
    feature_dim = allx.shape[1]

    # tx/ty rows follow the file order of test.index, not sorted order
    features = np.zeros((num_nodes, feature_dim))
    features[: allx.shape[0]] = allx
    tx_full = np.zeros((len(full_range), feature_dim))
    tx_full[test_index - sorted_test.min()] = tx
    features[allx.shape[0]:] = tx_full

    num_classes = ally.shape[1]
    labels = np.zeros(num_nodes, dtype=int)
    labels[: ally.shape[0]] = np.asarray(ally).argmax(axis=1)
    ty_full = np.zeros((len(full_range), num_classes), dtype=int)
    ty_full[test_index - sorted_test.min()] = np.asarray(ty)
    labels[ally.shape[0]:] = ty_full.argmax(axis=1)

    edges = [(int(s), int(d)) for s, nbrs in graph.items() for d in nbrs]
    edges = [(s, d) for s, d in edges if s < num_nodes and d < num_nodes]
    write_graphtext(out, name, symmetrize(edges), features, labels)


def convert_webkb(name, raw, out):
    raw = Path(raw)
    edge_lines = (raw / "out1_graph_edges.txt").read_text().strip().split("\n")[1:]
    edges = [tuple(int(v) for v in line.split()) for line in edge_lines]
    node_lines = (raw / "out1_node_feature_label.txt").read_text().strip().split("\n")[1:]
    ids, feats, labels = [], [], []
    for line in node_lines:
        node_id, feat, label = line.split("\t")
        ids.append(int(node_id))
        feats.append([float(v) for v in feat.split(",")])
        labels.append(int(label))
    order = np.argsort(ids)
    features = np.asarray(feats)[order]
    labels = np.asarray(labels, dtype=int)[order]
    write_graphtext(out, name, symmetrize(edges), features, labels)


def convert_linqs(name, raw, out):
    raw = Path(raw)
    content = (raw / f"{name}.content").read_text().strip().split("\n")
    ids, feats, label_names = [], [], []
    for line in content:
        parts = line.split()
        ids.append(parts[0])
        feats.append([float(v) for v in parts[1:-1]])
        label_names.append(parts[-1])
    id_of = {paper: i for i, paper in enumerate(ids)}
    classes = {name_: i for i, name_ in enumerate(sorted(set(label_names)))}
    labels = np.array([classes[n] for n in label_names], dtype=int)
    features = np.asarray(feats)

    edges = []
    for line in (raw / f"{name}.cites").read_text().strip().split("\n"):
        cited, citing = line.split()
        if cited in id_of and citing in id_of:
            edges.append((id_of[citing], id_of[cited]))
    write_graphtext(out, name, symmetrize(edges), features, labels)


def main():
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("format", choices=["planetoid", "webkb", "linqs"])
    parser.add_argument("--name", required=True, help="dataset name, e.g. cora")
    parser.add_argument("--raw", required=True, help="directory with the raw dump")
    parser.add_argument("--out", required=True, help="GraphText output directory")
    args = parser.parse_args()
    {
        "planetoid": convert_planetoid,
        "webkb": convert_webkb,
        "linqs": convert_linqs,
    }[args.format](args.name.lower(), args.raw, args.out)


if __name__ == "__main__":
    sys.exit(main())
