#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "gbk/tensor.hpp"

namespace gbk {

/// Immutable node/edge store. Edges are directed pairs, stored sorted by
/// (src, dst) with duplicates and self-loops removed; undirected datasets
/// carry both directions. Operators that need a self contribution (the
/// normalized adjacency, the self-kernel term) add it themselves, so no
/// self-loop ever appears in `edges`.
struct Graph {
  std::string name;
  int num_nodes = 0;
  int num_classes = 0;
  int feature_dim = 0;
  bool undirected = false;
  std::vector<std::pair<int, int>> edges;
  Tensor features;          // num_nodes x feature_dim
  std::vector<int> labels;  // in [0, num_classes)
  /// Out-neighbors per node, consistent with `edges`: neighbor_index[i]
  /// lists dst for every stored edge (i, dst), in edge order.
  std::vector<std::vector<int>> neighbor_index;

  int num_edges() const { return static_cast<int>(edges.size()); }
  int degree(int node) const {
    return static_cast<int>(neighbor_index[static_cast<std::size_t>(node)].size());
  }
};

/// Per-node split membership. The three id lists are sorted, pairwise
/// disjoint, and their union is a subset of all nodes.
struct SplitMasks {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;

  /// 0/1 membership vector of length num_nodes for one of the lists.
  static std::vector<char> membership(const std::vector<int>& ids, int num_nodes);
};

/// Gate supervision signal for one stored directed edge whose endpoints are
/// both in the training mask. `edge_pos` indexes into Graph::edges so the
/// target aligns with per-edge gate scores.
struct GateTarget {
  int src = 0;
  int dst = 0;
  int target = 0;  // 1 if labels agree
  int edge_pos = 0;
};

/// Sentinel returned for nodes with no out-neighbors; such nodes are
/// excluded from bucket reports.
inline constexpr double kNhrUndefined = -1.0;

/// Builds a Graph from assembled parts, establishing all invariants
/// (sorting, dedup, self-loop removal, neighbor index, validation).
Graph make_graph(std::string name, int num_nodes, int num_classes,
                 bool undirected, std::vector<std::pair<int, int>> edges,
                 Tensor features, std::vector<int> labels);

/// Reads a GraphText dataset directory: meta.json {name, num_nodes,
/// num_classes, feature_dim, undirected}, edges.txt ("src dst" per line),
/// features.txt (one row of feature_dim reals per node), labels.txt (one
/// integer per line). Malformed input reports the file and line number.
Graph load_graph(const std::filesystem::path& dataset_dir);

/// Writes a Graph as a GraphText directory (the inverse of load_graph).
void save_graph(const Graph& g, const std::filesystem::path& dataset_dir);

/// Fraction of stored directed edges whose endpoints share a label.
/// Throws on an empty edge set.
double homophily_ratio(const Graph& g);

/// Fraction of node i's out-neighbors sharing its label. Requires at least
/// one out-neighbor.
double node_homophily_ratio(const Graph& g, int node);

/// Vectorized node_homophily_ratio; isolated nodes get kNhrUndefined.
std::vector<double> node_homophily_ratios(const Graph& g);

/// Per-class stratified random partition, deterministic for a fixed seed.
/// fractions are (train, val, test), positive, summing to 1; rounding
/// remainders go to train. Classes with fewer than 3 members fill train,
/// then val, then test.
SplitMasks make_splits(const Graph& g, const std::array<double, 3>& fractions,
                       std::uint64_t seed);

/// One GateTarget per stored directed edge with both endpoints in m.train.
/// May be empty; callers must cope with zero gate-supervision edges.
std::vector<GateTarget> gate_targets(const Graph& g, const SplitMasks& m);

/// Gate evaluation edges: stored directed edges with both endpoints in the
/// given mask, same field semantics as gate_targets.
std::vector<GateTarget> gate_eval_edges(const Graph& g, const std::vector<int>& mask);

/// Dense row-normalized adjacency with self-loops, row i = (A+I)_i / (deg_i+1).
/// Every row sums to 1; an isolated node's row is the identity row.
Tensor normalized_adjacency(const Graph& g);

}  // namespace gbk
