#include <filesystem>
#include <fstream>
#include <set>
#include <unistd.h>

#include "doctest.h"
#include "gbk/graph.hpp"
#include "test_helpers.hpp"

using namespace gbk;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("gbk_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

void write_two_node_dataset(const fs::path& dir, const std::string& edges = "0 1\n1 0\n") {
  write_file(dir / "meta.json",
             R"({"name":"tiny","num_nodes":2,"num_classes":2,"feature_dim":2,"undirected":true})");
  write_file(dir / "edges.txt", edges);
  write_file(dir / "features.txt", "1 0\n0 1\n");
  write_file(dir / "labels.txt", "0\n1\n");
}

Graph triangle(const std::vector<int>& labels) {
  std::vector<std::pair<int, int>> edges{{0, 1}, {1, 0}, {1, 2}, {2, 1}, {0, 2}, {2, 0}};
  return make_graph("tri", 3, 2, true, edges, Tensor(3, 2, 1.0), labels);
}

}  // namespace

TEST_CASE("load_graph reads a GraphText directory") {
  TempDir dir;
  write_two_node_dataset(dir.path);
  const Graph g = load_graph(dir.path);
  CHECK(g.num_nodes == 2);
  CHECK(g.num_edges() == 2);
  CHECK(g.num_classes == 2);
  CHECK(g.feature_dim == 2);
  CHECK(g.features.at(0, 0) == 1.0);
  CHECK(g.features.at(1, 0) == 0.0);
  CHECK(g.neighbor_index[0] == std::vector<int>{1});
}

TEST_CASE("load_graph deduplicates repeated edges") {
  TempDir dir;
  write_two_node_dataset(dir.path, "0 1\n0 1\n1 0\n");
  const Graph g = load_graph(dir.path);
  CHECK(g.num_edges() == 2);
}

TEST_CASE("load_graph error reporting") {
  SUBCASE("missing file") {
    TempDir dir;
    write_two_node_dataset(dir.path);
    fs::remove(dir.path / "labels.txt");
    CHECK_THROWS_WITH_AS(load_graph(dir.path),
                         doctest::Contains("labels.txt"), std::runtime_error);
  }
  SUBCASE("malformed edge line carries its line number") {
    TempDir dir;
    write_two_node_dataset(dir.path, "0 1\nnot an edge\n");
    CHECK_THROWS_WITH_AS(load_graph(dir.path), doctest::Contains("edges.txt:2"),
                         std::runtime_error);
  }
  SUBCASE("label out of class range") {
    TempDir dir;
    write_two_node_dataset(dir.path);
    write_file(dir.path / "labels.txt", "0\n5\n");
    CHECK_THROWS_AS(load_graph(dir.path), std::runtime_error);
  }
  SUBCASE("edge endpoint out of range") {
    TempDir dir;
    write_two_node_dataset(dir.path, "0 7\n");
    CHECK_THROWS_AS(load_graph(dir.path), std::runtime_error);
  }
  SUBCASE("undirected dataset with a one-way edge") {
    TempDir dir;
    write_two_node_dataset(dir.path, "0 1\n");
    CHECK_THROWS_AS(load_graph(dir.path), std::runtime_error);
  }
}

TEST_CASE("save_graph and load_graph round-trip bit-exactly") {
  const Graph g = test::random_graph(7, 3, 2, 99);
  TempDir dir;
  save_graph(g, dir.path);
  const Graph back = load_graph(dir.path);
  CHECK(back.num_nodes == g.num_nodes);
  CHECK(back.edges == g.edges);
  CHECK(back.labels == g.labels);
  CHECK(back.features.data == g.features.data);  // exact, via %.17g
}

TEST_CASE("homophily ratio") {
  CHECK(homophily_ratio(triangle({0, 0, 1})) == doctest::Approx(2.0 / 6.0).epsilon(1e-12));
  CHECK(homophily_ratio(triangle({1, 1, 1})) == 1.0);
  const Graph isolated = make_graph("iso", 2, 2, false, {}, Tensor(2, 1), {0, 1});
  CHECK_THROWS_AS(homophily_ratio(isolated), std::runtime_error);
}

TEST_CASE("node-level homophily ratio") {
  // node 1 (label 0) sees labels {0, 0, 1}
  std::vector<std::pair<int, int>> edges{{1, 0}, {1, 2}, {1, 3}};
  const Graph g =
      make_graph("star", 4, 2, false, edges, Tensor(4, 1), {0, 0, 0, 1});
  CHECK(node_homophily_ratio(g, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK_THROWS_AS(node_homophily_ratio(g, 0), std::runtime_error);

  const auto all = node_homophily_ratios(g);
  CHECK(all[1] == doctest::Approx(2.0 / 3.0));
  CHECK(all[0] == kNhrUndefined);

  CHECK(node_homophily_ratio(triangle({1, 1, 1}), 0) == 1.0);
}

TEST_CASE("homophily ratio equals the degree-weighted mean of node ratios") {
  const Graph g = test::random_graph(30, 2, 3, 1234, 0.2);
  double weighted = 0.0;
  int total_degree = 0;
  for (int i = 0; i < g.num_nodes; ++i) {
    if (g.degree(i) == 0) continue;
    weighted += node_homophily_ratio(g, i) * g.degree(i);
    total_degree += g.degree(i);
  }
  CHECK(homophily_ratio(g) == doctest::Approx(weighted / total_degree).epsilon(1e-12));
}

TEST_CASE("make_splits basic contract") {
  Tensor features(10, 1, 1.0);
  std::vector<int> labels(10, 0);
  const Graph g = make_graph("ten", 10, 1, false, {{0, 1}, {1, 0}}, features, labels);
  const SplitMasks m = make_splits(g, {0.6, 0.2, 0.2}, 7);
  CHECK(m.train.size() == 6);
  CHECK(m.val.size() == 2);
  CHECK(m.test.size() == 2);

  const SplitMasks again = make_splits(g, {0.6, 0.2, 0.2}, 7);
  CHECK(again.train == m.train);
  CHECK(again.val == m.val);
  CHECK(again.test == m.test);

  std::set<int> seen(m.train.begin(), m.train.end());
  for (int v : m.val) CHECK(!seen.count(v));
  seen.insert(m.val.begin(), m.val.end());
  for (int t : m.test) CHECK(!seen.count(t));
}

TEST_CASE("make_splits per-class sizes stay within one of the fractions") {
  const Graph g = test::random_graph(97, 2, 4, 5);
  const SplitMasks m = make_splits(g, {0.6, 0.2, 0.2}, 3);
  std::vector<int> class_count(4, 0);
  for (int y : g.labels) ++class_count[static_cast<std::size_t>(y)];
  for (const auto& [part, fraction] :
       std::vector<std::pair<const std::vector<int>*, double>>{
           {&m.train, 0.6}, {&m.val, 0.2}, {&m.test, 0.2}}) {
    std::vector<int> count(4, 0);
    for (int node : *part) ++count[static_cast<std::size_t>(g.labels[static_cast<std::size_t>(node)])];
    for (int c = 0; c < 4; ++c) {
      const double expected = fraction * class_count[static_cast<std::size_t>(c)];
      CHECK(std::abs(count[static_cast<std::size_t>(c)] - expected) <= 1.0);
    }
  }
}

TEST_CASE("make_splits with permuted node ids keeps per-class sizes") {
  const Graph g = test::random_graph(40, 2, 3, 8);
  // relabel nodes by reversal; same class populations
  std::vector<int> permuted_labels(g.labels.rbegin(), g.labels.rend());
  const Graph h = make_graph("perm", g.num_nodes, g.num_classes, false, g.edges,
                             g.features, permuted_labels);
  const SplitMasks a = make_splits(g, {0.6, 0.2, 0.2}, 11);
  const SplitMasks b = make_splits(h, {0.6, 0.2, 0.2}, 999);
  CHECK(a.train.size() == b.train.size());
  CHECK(a.val.size() == b.val.size());
  CHECK(a.test.size() == b.test.size());
}

TEST_CASE("make_splits tiny class goes to train then val") {
  Tensor features(5, 1, 1.0);
  // class 1 has two members, class 2 has one
  const Graph g = make_graph("tiny", 5, 3, false, {{0, 1}, {1, 0}}, features,
                             {0, 0, 1, 1, 2});
  const SplitMasks m = make_splits(g, {0.6, 0.2, 0.2}, 1);
  auto count_class = [&](const std::vector<int>& part, int cls) {
    int n = 0;
    for (int node : part)
      if (g.labels[static_cast<std::size_t>(node)] == cls) ++n;
    return n;
  };
  CHECK(count_class(m.train, 1) == 1);
  CHECK(count_class(m.val, 1) == 1);
  CHECK(count_class(m.train, 2) == 1);
  CHECK(count_class(m.val, 2) == 0);
}

TEST_CASE("make_splits rejects bad inputs") {
  const Graph g = test::random_graph(10, 2, 2, 1);
  CHECK_THROWS_AS(make_splits(g, {0.7, 0.2, 0.2}, 0), std::runtime_error);
  CHECK_THROWS_AS(make_splits(g, {1.0, -0.1, 0.1}, 0), std::runtime_error);
}

TEST_CASE("gate_targets keeps only train-train edges") {
  std::vector<std::pair<int, int>> edges{{0, 1}, {1, 2}, {2, 0}};
  const Graph g = make_graph("g", 3, 2, false, edges, Tensor(3, 1), {0, 0, 1});
  SplitMasks m;
  m.train = {0, 1};
  m.test = {2};

  const auto targets = gate_targets(g, m);
  REQUIRE(targets.size() == 1);
  CHECK(targets[0].src == 0);
  CHECK(targets[0].dst == 1);
  CHECK(targets[0].target == 1);
  CHECK(g.edges[static_cast<std::size_t>(targets[0].edge_pos)] ==
        std::pair<int, int>{0, 1});
}

TEST_CASE("gate_targets on an all-same-label graph are all ones") {
  const Graph g = triangle({0, 0, 0});
  SplitMasks m;
  m.train = {0, 1, 2};
  const auto targets = gate_targets(g, m);
  CHECK(targets.size() == g.edges.size());
  for (const auto& t : targets) CHECK(t.target == 1);
}

TEST_CASE("normalized adjacency") {
  SUBCASE("single undirected edge averages both endpoints") {
    const Graph g =
        make_graph("pair", 2, 1, true, {{0, 1}, {1, 0}}, Tensor(2, 1), {0, 0});
    const Tensor a = normalized_adjacency(g);
    for (double v : a.data) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("isolated node keeps the identity row") {
    const Graph g =
        make_graph("iso", 3, 1, false, {{0, 1}}, Tensor(3, 1), {0, 0, 0});
    const Tensor a = normalized_adjacency(g);
    CHECK(a.at(2, 2) == 1.0);
    CHECK(a.at(2, 0) == 0.0);
    CHECK(a.at(2, 1) == 0.0);
  }
  SUBCASE("rows sum to one") {
    const Graph g = test::random_graph(25, 2, 2, 17, 0.3);
    const Tensor a = normalized_adjacency(g);
    for (int r = 0; r < a.rows; ++r) {
      double sum = 0.0;
      for (int c = 0; c < a.cols; ++c) sum += a.at(r, c);
      CHECK(std::abs(sum - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("self-loops in input are not stored") {
  const Graph g =
      make_graph("sl", 3, 1, false, {{0, 0}, {0, 1}, {2, 2}}, Tensor(3, 1), {0, 0, 0});
  CHECK(g.num_edges() == 1);
  CHECK(g.edges[0] == std::pair<int, int>{0, 1});
}
