#include "gbk/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "gbk/rng.hpp"
#include "json.hpp"

namespace gbk {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

std::ifstream open_or_fail(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) fail("missing or unreadable file: " + p.string());
  return in;
}

// Whitespace-separated tokens of one line, parsed with from_chars so the
// result is locale independent.
template <typename T>
std::vector<T> parse_line(const std::string& line, const std::string& file,
                          int line_no) {
  std::vector<T> out;
  const char* p = line.data();
  const char* end = line.data() + line.size();
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p >= end) break;
    T value{};
    auto [next, ec] = std::from_chars(p, end, value);
    if (ec != std::errc{})
      fail(file + ":" + std::to_string(line_no) + ": malformed value '" +
           std::string(p, std::min<std::size_t>(16, static_cast<std::size_t>(end - p))) + "'");
    out.push_back(value);
    p = next;
  }
  return out;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

std::vector<char> SplitMasks::membership(const std::vector<int>& ids, int num_nodes) {
  std::vector<char> m(static_cast<std::size_t>(num_nodes), 0);
  for (int id : ids) m[static_cast<std::size_t>(id)] = 1;
  return m;
}

Graph make_graph(std::string name, int num_nodes, int num_classes,
                 bool undirected, std::vector<std::pair<int, int>> edges,
                 Tensor features, std::vector<int> labels) {
  if (num_nodes <= 0) fail("graph: num_nodes must be positive");
  if (num_classes <= 0) fail("graph: num_classes must be positive");
  if (features.rows != num_nodes)
    fail("graph: feature rows " + std::to_string(features.rows) +
         " != num_nodes " + std::to_string(num_nodes));
  if (static_cast<int>(labels.size()) != num_nodes)
    fail("graph: label count != num_nodes");
  for (int i = 0; i < num_nodes; ++i)
    if (labels[static_cast<std::size_t>(i)] < 0 ||
        labels[static_cast<std::size_t>(i)] >= num_classes)
      fail("graph: label " + std::to_string(labels[static_cast<std::size_t>(i)]) +
           " of node " + std::to_string(i) + " outside [0, " +
           std::to_string(num_classes) + ")");

  for (auto [s, d] : edges) {
    if (s < 0 || s >= num_nodes || d < 0 || d >= num_nodes)
      fail("graph: edge (" + std::to_string(s) + ", " + std::to_string(d) +
           ") endpoint out of range");
  }
  std::erase_if(edges, [](const std::pair<int, int>& e) { return e.first == e.second; });
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  if (undirected) {
    std::set<std::pair<int, int>> present(edges.begin(), edges.end());
    for (auto [s, d] : edges)
      if (!present.count({d, s}))
        fail("graph: undirected dataset but reverse of (" + std::to_string(s) +
             ", " + std::to_string(d) + ") is absent");
  }

  Graph g;
  g.name = std::move(name);
  g.num_nodes = num_nodes;
  g.num_classes = num_classes;
  g.feature_dim = features.cols;
  g.undirected = undirected;
  g.features = std::move(features);
  g.labels = std::move(labels);
  g.neighbor_index.assign(static_cast<std::size_t>(num_nodes), {});
  for (auto [s, d] : edges) g.neighbor_index[static_cast<std::size_t>(s)].push_back(d);
  g.edges = std::move(edges);
  return g;
}

Graph load_graph(const std::filesystem::path& dir) {
  nlohmann::json meta;
  {
    std::ifstream in = open_or_fail(dir / "meta.json");
    try {
      in >> meta;
    } catch (const nlohmann::json::exception& e) {
      fail((dir / "meta.json").string() + ": " + e.what());
    }
  }
  for (const char* key : {"name", "num_nodes", "num_classes", "feature_dim", "undirected"})
    if (!meta.contains(key)) fail((dir / "meta.json").string() + ": missing key '" + key + "'");
  const int num_nodes = meta.at("num_nodes").get<int>();
  const int num_classes = meta.at("num_classes").get<int>();
  const int feature_dim = meta.at("feature_dim").get<int>();

  std::vector<std::pair<int, int>> edges;
  {
    std::ifstream in = open_or_fail(dir / "edges.txt");
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (blank(line)) continue;
      auto ids = parse_line<int>(line, "edges.txt", line_no);
      if (ids.size() != 2)
        fail("edges.txt:" + std::to_string(line_no) + ": expected 'src dst', got " +
             std::to_string(ids.size()) + " fields");
      edges.emplace_back(ids[0], ids[1]);
    }
  }

  Tensor features(num_nodes, feature_dim);
  {
    std::ifstream in = open_or_fail(dir / "features.txt");
    std::string line;
    int line_no = 0;
    int row = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (blank(line)) continue;
      if (row >= num_nodes)
        fail("features.txt:" + std::to_string(line_no) + ": more rows than num_nodes");
      auto vals = parse_line<double>(line, "features.txt", line_no);
      if (static_cast<int>(vals.size()) != feature_dim)
        fail("features.txt:" + std::to_string(line_no) + ": expected " +
             std::to_string(feature_dim) + " values, got " + std::to_string(vals.size()));
      std::copy(vals.begin(), vals.end(),
                features.data.begin() + static_cast<std::ptrdiff_t>(row) * feature_dim);
      ++row;
    }
    if (row != num_nodes)
      fail("features.txt: expected " + std::to_string(num_nodes) + " rows, got " +
           std::to_string(row));
  }

  std::vector<int> labels;
  {
    std::ifstream in = open_or_fail(dir / "labels.txt");
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (blank(line)) continue;
      auto vals = parse_line<int>(line, "labels.txt", line_no);
      if (vals.size() != 1)
        fail("labels.txt:" + std::to_string(line_no) + ": expected one integer");
      labels.push_back(vals[0]);
    }
  }

  return make_graph(meta.at("name").get<std::string>(), num_nodes, num_classes,
                    meta.at("undirected").get<bool>(), std::move(edges),
                    std::move(features), std::move(labels));
}

void save_graph(const Graph& g, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    nlohmann::ordered_json meta;
    meta["name"] = g.name;
    meta["num_nodes"] = g.num_nodes;
    meta["num_classes"] = g.num_classes;
    meta["feature_dim"] = g.feature_dim;
    meta["undirected"] = g.undirected;
    std::ofstream out(dir / "meta.json");
    out << meta.dump(2) << "\n";
  }
  {
    std::ofstream out(dir / "edges.txt");
    for (auto [s, d] : g.edges) out << s << " " << d << "\n";
  }
  {
    std::ofstream out(dir / "features.txt");
    char buf[32];
    for (int r = 0; r < g.num_nodes; ++r) {
      for (int c = 0; c < g.feature_dim; ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", g.features.at(r, c));
        out << (c ? " " : "") << buf;
      }
      out << "\n";
    }
  }
  {
    std::ofstream out(dir / "labels.txt");
    for (int y : g.labels) out << y << "\n";
  }
}

double homophily_ratio(const Graph& g) {
  if (g.edges.empty()) fail("homophily_ratio: graph has no edges");
  std::size_t same = 0;
  for (auto [s, d] : g.edges)
    if (g.labels[static_cast<std::size_t>(s)] == g.labels[static_cast<std::size_t>(d)]) ++same;
  return static_cast<double>(same) / static_cast<double>(g.edges.size());
}

double node_homophily_ratio(const Graph& g, int node) {
  const auto& nbrs = g.neighbor_index[static_cast<std::size_t>(node)];
  if (nbrs.empty()) fail("node_homophily_ratio: node " + std::to_string(node) + " is isolated");
  int same = 0;
  for (int j : nbrs)
    if (g.labels[static_cast<std::size_t>(j)] == g.labels[static_cast<std::size_t>(node)]) ++same;
  return static_cast<double>(same) / static_cast<double>(nbrs.size());
}

std::vector<double> node_homophily_ratios(const Graph& g) {
  std::vector<double> out(static_cast<std::size_t>(g.num_nodes), kNhrUndefined);
  for (int i = 0; i < g.num_nodes; ++i)
    if (!g.neighbor_index[static_cast<std::size_t>(i)].empty())
      out[static_cast<std::size_t>(i)] = node_homophily_ratio(g, i);
  return out;
}

SplitMasks make_splits(const Graph& g, const std::array<double, 3>& fractions,
                       std::uint64_t seed) {
  for (double f : fractions)
    if (f <= 0.0) fail("make_splits: fractions must be positive");
  const double sum = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(sum - 1.0) > 1e-9) fail("make_splits: fractions must sum to 1");

  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(g.num_classes));
  for (int i = 0; i < g.num_nodes; ++i)
    by_class[static_cast<std::size_t>(g.labels[static_cast<std::size_t>(i)])].push_back(i);
  for (int c = 0; c < g.num_classes; ++c)
    if (by_class[static_cast<std::size_t>(c)].empty())
      fail("make_splits: class " + std::to_string(c) + " has no nodes");

  SplitMasks m;
  for (int c = 0; c < g.num_classes; ++c) {
    auto& nodes = by_class[static_cast<std::size_t>(c)];
    Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(c));
    rng.shuffle(nodes);
    const int n = static_cast<int>(nodes.size());
    int n_train, n_val;
    if (n < 3) {
      // too few members for all three parts: train first, then val
      n_train = 1;
      n_val = n > 1 ? 1 : 0;
    } else {
      // nearest-rounding keeps every part within 1 of its fraction; the
      // leftover goes to train
      n_val = static_cast<int>(fractions[1] * n + 0.5);
      int n_test = static_cast<int>(fractions[2] * n + 0.5);
      n_train = n - n_val - n_test;
      while (n_train < 1) {  // degenerate fractions; train must be populated
        if (n_val >= n_test)
          --n_val;
        else
          --n_test;
        ++n_train;
      }
    }
    for (int i = 0; i < n; ++i) {
      if (i < n_train)
        m.train.push_back(nodes[static_cast<std::size_t>(i)]);
      else if (i < n_train + n_val)
        m.val.push_back(nodes[static_cast<std::size_t>(i)]);
      else
        m.test.push_back(nodes[static_cast<std::size_t>(i)]);
    }
  }
  std::sort(m.train.begin(), m.train.end());
  std::sort(m.val.begin(), m.val.end());
  std::sort(m.test.begin(), m.test.end());
  return m;
}

std::vector<GateTarget> gate_targets(const Graph& g, const SplitMasks& m) {
  return gate_eval_edges(g, m.train);
}

std::vector<GateTarget> gate_eval_edges(const Graph& g, const std::vector<int>& mask) {
  const std::vector<char> in_mask = SplitMasks::membership(mask, g.num_nodes);
  std::vector<GateTarget> out;
  for (std::size_t pos = 0; pos < g.edges.size(); ++pos) {
    const auto [s, d] = g.edges[pos];
    if (!in_mask[static_cast<std::size_t>(s)] || !in_mask[static_cast<std::size_t>(d)]) continue;
    GateTarget t;
    t.src = s;
    t.dst = d;
    t.target = g.labels[static_cast<std::size_t>(s)] == g.labels[static_cast<std::size_t>(d)] ? 1 : 0;
    t.edge_pos = static_cast<int>(pos);
    out.push_back(t);
  }
  return out;
}

Tensor normalized_adjacency(const Graph& g) {
  Tensor a(g.num_nodes, g.num_nodes);
  for (int i = 0; i < g.num_nodes; ++i) {
    const auto& nbrs = g.neighbor_index[static_cast<std::size_t>(i)];
    const double denom = static_cast<double>(nbrs.size()) + 1.0;
    a.at(i, i) = 1.0 / denom;
    for (int j : nbrs) a.at(i, j) += 1.0 / denom;
  }
  return a;
}

}  // namespace gbk
