#include <cmath>

#include "doctest.h"
#include "gbk/analysis.hpp"
#include "test_helpers.hpp"

using namespace gbk;
using test::random_tensor;

namespace {

// independent direct transcription of the scatter/separation/ratio formulas,
// structured differently from the library code (per-sample distance list)
double reference_complexity(const Tensor& reps, const std::vector<int>& labels,
                            int k, int p) {
  const double pd = p;
  std::vector<std::vector<std::vector<double>>> groups(static_cast<std::size_t>(k));
  for (int r = 0; r < reps.rows; ++r) {
    std::vector<double> row;
    for (int c = 0; c < reps.cols; ++c) row.push_back(reps.at(r, c));
    groups[static_cast<std::size_t>(labels[static_cast<std::size_t>(r)])].push_back(row);
  }
  std::vector<std::vector<double>> mu;
  std::vector<double> s;
  for (int i = 0; i < k; ++i) {
    const auto& g = groups[static_cast<std::size_t>(i)];
    std::vector<double> m(static_cast<std::size_t>(reps.cols), 0.0);
    for (const auto& row : g)
      for (std::size_t c = 0; c < row.size(); ++c) m[c] += row[c] / g.size();
    double scatter = 0.0;
    for (const auto& row : g) {
      double dist = 0.0;
      for (std::size_t c = 0; c < row.size(); ++c)
        dist += std::pow(std::abs(row[c] - m[c]), pd);
      scatter += dist / g.size();
    }
    mu.push_back(m);
    s.push_back(std::pow(scatter, 1.0 / pd));
  }
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    double worst = 0.0;
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      double m = 0.0;
      for (std::size_t c = 0; c < mu[static_cast<std::size_t>(i)].size(); ++c)
        m += std::pow(std::abs(mu[static_cast<std::size_t>(i)][c] -
                               mu[static_cast<std::size_t>(j)][c]),
                      pd);
      m = std::pow(m, 1.0 / pd);
      worst = std::max(worst, (s[static_cast<std::size_t>(i)] + s[static_cast<std::size_t>(j)]) / m);
    }
    total += worst;
  }
  return total / k;
}

}  // namespace

TEST_CASE("consistency complexity hand example") {
  // class 0 at {0, 2}, class 1 at {4, 6}: S = 1 each, M = 4, C = 0.5
  const Tensor reps(4, 1, {0.0, 2.0, 4.0, 6.0});
  const ComplexityReport r = consistency_complexity(reps, {0, 0, 1, 1}, 2);
  CHECK(r.scatter[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.scatter[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.separation.at(0, 1) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(r.complexity == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("coincident centroids give the infinity sentinel") {
  const Tensor reps(4, 1, {1.0, -1.0, 1.0, -1.0});
  const ComplexityReport r = consistency_complexity(reps, {0, 0, 1, 1}, 2);
  CHECK(std::isinf(r.complexity));
}

TEST_CASE("consistency complexity rejects degenerate inputs") {
  const Tensor reps(3, 2, 1.0);
  CHECK_THROWS_AS(consistency_complexity(reps, {0, 0, 0}, 1), std::invalid_argument);
  CHECK_THROWS_AS(consistency_complexity(reps, {0, 0, 0}, 2), std::invalid_argument);
}

TEST_CASE("consistency complexity matches the independent reference") {
  Rng rng(7);
  Tensor reps(200, 5);
  std::vector<int> labels;
  for (int r = 0; r < 200; ++r) {
    const int y = r % 2;
    labels.push_back(y);
    for (int c = 0; c < 5; ++c)
      reps.at(r, c) = (y == 0 ? 1.0 : -1.0) + rng.normal();
  }
  const double mine = consistency_complexity(reps, labels, 2).complexity;
  const double reference = reference_complexity(reps, labels, 2, 2);
  CHECK(mine == doctest::Approx(reference).epsilon(1e-10));
}

TEST_CASE("complexity is translation invariant and scale invariant") {
  Rng rng(8);
  Tensor reps = random_tensor(60, 4, rng);
  std::vector<int> labels;
  for (int r = 0; r < 60; ++r) labels.push_back(r % 3);
  const double base = consistency_complexity(reps, labels, 3).complexity;

  Tensor shifted = reps;
  for (int r = 0; r < 60; ++r)
    for (int c = 0; c < 4; ++c) shifted.at(r, c) += 17.5;
  CHECK(consistency_complexity(shifted, labels, 3).complexity ==
        doctest::Approx(base).epsilon(1e-10));

  Tensor scaled = reps;
  for (double& v : scaled.data) v *= 42.0;
  CHECK(consistency_complexity(scaled, labels, 3).complexity ==
        doctest::Approx(base).epsilon(1e-10));
}

TEST_CASE("nhr bucket accuracy") {
  // labels chosen so NHR spans the buckets; node 5 is isolated
  const Graph g = test::random_graph(24, 2, 2, 41, 0.25);
  std::vector<int> test_mask;
  for (int i = 0; i < g.num_nodes; ++i) test_mask.push_back(i);

  SUBCASE("perfect predictions give 1.0 in every non-empty bucket") {
    const BucketReport r = nhr_bucket_accuracy(g, g.labels, test_mask);
    int counted = 0, non_isolated = 0;
    for (int i = 0; i < g.num_nodes; ++i)
      if (g.degree(i) > 0) ++non_isolated;
    for (int b = 0; b < 5; ++b) {
      counted += r.counts[static_cast<std::size_t>(b)];
      if (r.counts[static_cast<std::size_t>(b)] > 0)
        CHECK(r.accuracy[static_cast<std::size_t>(b)] == 1.0);
      else
        CHECK(std::isnan(r.accuracy[static_cast<std::size_t>(b)]));
    }
    CHECK(counted == non_isolated);
  }
  SUBCASE("an NHR of exactly 1.0 lands in the top bucket") {
    const Graph h = make_graph("pair", 2, 2, true, {{0, 1}, {1, 0}}, Tensor(2, 1),
                               {0, 0});
    const BucketReport r = nhr_bucket_accuracy(h, {0, 0}, {0, 1});
    CHECK(r.counts[4] == 2);
    CHECK(r.counts[0] == 0);
  }
}

TEST_CASE("gate accuracy") {
  std::vector<std::pair<int, int>> edges{{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  const Graph g = make_graph("ring", 4, 2, false, edges, Tensor(4, 1), {0, 0, 1, 1});
  std::vector<int> everyone{0, 1, 2, 3};
  const auto eval_edges = gate_eval_edges(g, everyone);
  REQUIRE(eval_edges.size() == 4);

  SUBCASE("exact indicator gates are perfect") {
    std::vector<double> exact;
    for (const auto& e : eval_edges) exact.push_back(static_cast<double>(e.target));
    CHECK(gate_accuracy({exact, exact}, eval_edges) == 1.0);
  }
  SUBCASE("a flat 0.5 gate predicts different everywhere") {
    const std::vector<double> flat(eval_edges.size(), 0.5);
    double hr = 0.0;
    for (const auto& e : eval_edges) hr += e.target;
    hr /= static_cast<double>(eval_edges.size());
    CHECK(gate_accuracy({flat}, eval_edges) == doctest::Approx(1.0 - hr));
  }
  SUBCASE("empty evaluation set is an error") {
    CHECK_THROWS_AS(gate_accuracy({{0.5}}, {}), std::invalid_argument);
  }
}

TEST_CASE("reports serialize empty buckets as the N/A literal and re-emit identically") {
  BucketReport buckets;
  buckets.counts = {3, 0, 2, 0, 9};
  buckets.accuracy = {0.5, std::nan(""), 1.0, std::nan(""), 0.9};
  const double gate = 0.875;
  ReportInputs inputs;
  inputs.config = {{"model", "gbk"}};
  inputs.history = {{"final", {{"test_acc", 0.8}}}};
  inputs.buckets = &buckets;
  inputs.gate_acc = &gate;
  inputs.complexity_series = {{1, 2.5}, {2, std::numeric_limits<double>::infinity()}};

  const auto doc = emit_report(inputs);
  const std::string text = doc.dump();
  CHECK(text.find("\"N/A\"") != std::string::npos);
  CHECK(doc["nhr_buckets"][1]["accuracy"] == "N/A");
  CHECK(doc["nhr_buckets"][0]["accuracy"] == 0.5);
  CHECK(doc["complexity"][1]["value"] == "inf");
  CHECK(doc["sections"].size() == 5);
  CHECK(emit_report(inputs).dump() == text);
}
