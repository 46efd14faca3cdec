#include "gbk/analysis.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace gbk {

ComplexityReport consistency_complexity(const Tensor& reps,
                                        const std::vector<int>& labels,
                                        int num_classes, int p) {
  if (static_cast<int>(labels.size()) != reps.rows)
    throw std::invalid_argument("consistency_complexity: label count != rows");
  if (num_classes < 2)
    throw std::invalid_argument("consistency_complexity: needs >= 2 classes");
  if (p < 1) throw std::invalid_argument("consistency_complexity: p must be >= 1");

  std::vector<int> counts(static_cast<std::size_t>(num_classes), 0);
  for (int y : labels) {
    if (y < 0 || y >= num_classes)
      throw std::invalid_argument("consistency_complexity: label out of range");
    ++counts[static_cast<std::size_t>(y)];
  }
  for (int c = 0; c < num_classes; ++c)
    if (counts[static_cast<std::size_t>(c)] == 0)
      throw std::invalid_argument("consistency_complexity: class " +
                                  std::to_string(c) + " is empty");

  Tensor centroids(num_classes, reps.cols);
  for (int r = 0; r < reps.rows; ++r) {
    const int y = labels[static_cast<std::size_t>(r)];
    for (int c = 0; c < reps.cols; ++c) centroids.at(y, c) += reps.at(r, c);
  }
  for (int y = 0; y < num_classes; ++y)
    for (int c = 0; c < reps.cols; ++c)
      centroids.at(y, c) /= static_cast<double>(counts[static_cast<std::size_t>(y)]);

  const double pd = static_cast<double>(p);
  ComplexityReport report;
  report.p = p;
  report.scatter.assign(static_cast<std::size_t>(num_classes), 0.0);
  for (int r = 0; r < reps.rows; ++r) {
    const int y = labels[static_cast<std::size_t>(r)];
    double dev = 0.0;
    for (int c = 0; c < reps.cols; ++c)
      dev += std::pow(std::abs(reps.at(r, c) - centroids.at(y, c)), pd);
    report.scatter[static_cast<std::size_t>(y)] += dev;
  }
  for (int y = 0; y < num_classes; ++y) {
    auto& s = report.scatter[static_cast<std::size_t>(y)];
    s = std::pow(s / static_cast<double>(counts[static_cast<std::size_t>(y)]), 1.0 / pd);
  }

  report.separation = Tensor(num_classes, num_classes);
  for (int i = 0; i < num_classes; ++i)
    for (int j = i + 1; j < num_classes; ++j) {
      double m = 0.0;
      for (int c = 0; c < reps.cols; ++c)
        m += std::pow(std::abs(centroids.at(i, c) - centroids.at(j, c)), pd);
      m = std::pow(m, 1.0 / pd);
      report.separation.at(i, j) = m;
      report.separation.at(j, i) = m;
    }

  double total = 0.0;
  bool infinite = false;
  for (int i = 0; i < num_classes; ++i) {
    double worst = 0.0;
    for (int j = 0; j < num_classes; ++j) {
      if (j == i) continue;
      const double m = report.separation.at(i, j);
      if (m < 1e-12) {
        infinite = true;
        break;
      }
      worst = std::max(worst, (report.scatter[static_cast<std::size_t>(i)] +
                               report.scatter[static_cast<std::size_t>(j)]) /
                                  m);
    }
    if (infinite) break;
    total += worst;
  }
  report.complexity = infinite ? std::numeric_limits<double>::infinity()
                               : total / static_cast<double>(num_classes);
  return report;
}

BucketReport nhr_bucket_accuracy(const Graph& g, const std::vector<int>& predictions,
                                 const std::vector<int>& test_mask) {
  if (static_cast<int>(predictions.size()) != g.num_nodes)
    throw std::invalid_argument("nhr_bucket_accuracy: predictions must cover all nodes");
  BucketReport report;
  std::array<int, 5> correct{};
  for (int node : test_mask) {
    const auto& nbrs = g.neighbor_index[static_cast<std::size_t>(node)];
    if (nbrs.empty()) continue;  // NHR undefined
    const double h = node_homophily_ratio(g, node);
    // [0,.2) [.2,.4) [.4,.6) [.6,.8) [.8,1]; top bucket closed
    int bucket = static_cast<int>(h * 5.0);
    if (bucket > 4) bucket = 4;
    ++report.counts[static_cast<std::size_t>(bucket)];
    if (predictions[static_cast<std::size_t>(node)] == g.labels[static_cast<std::size_t>(node)])
      ++correct[static_cast<std::size_t>(bucket)];
  }
  for (int b = 0; b < 5; ++b)
    report.accuracy[static_cast<std::size_t>(b)] =
        report.counts[static_cast<std::size_t>(b)] == 0
            ? std::numeric_limits<double>::quiet_NaN()
            : static_cast<double>(correct[static_cast<std::size_t>(b)]) /
                  report.counts[static_cast<std::size_t>(b)];
  return report;
}

double gate_accuracy(const std::vector<std::vector<double>>& per_layer_alphas,
                     const std::vector<GateTarget>& edges) {
  if (edges.empty())
    throw std::invalid_argument("gate_accuracy: empty evaluation edge set");
  if (per_layer_alphas.empty())
    throw std::invalid_argument("gate_accuracy: no gate layers");
  std::size_t correct = 0;
  for (const auto& alphas : per_layer_alphas) {
    if (alphas.size() != edges.size())
      throw std::invalid_argument("gate_accuracy: alpha/edge count mismatch");
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const int predicted_same = alphas[e] > 0.5 ? 1 : 0;  // ties predict "different"
      if (predicted_same == edges[e].target) ++correct;
    }
  }
  return static_cast<double>(correct) /
         static_cast<double>(per_layer_alphas.size() * edges.size());
}

std::string bucket_label(int bucket) {
  static const char* labels[5] = {"0~20", "20~40", "40~60", "60~80", "80~100"};
  return labels[bucket];
}

nlohmann::ordered_json emit_report(const ReportInputs& inputs) {
  nlohmann::ordered_json doc;
  std::vector<std::string> sections;
  doc["config"] = inputs.config;
  sections.push_back("config");
  doc["history"] = inputs.history;
  sections.push_back("history");
  if (inputs.buckets) {
    nlohmann::ordered_json buckets = nlohmann::ordered_json::array();
    for (int b = 0; b < 5; ++b) {
      nlohmann::ordered_json row;
      row["range"] = bucket_label(b);
      row["count"] = inputs.buckets->counts[static_cast<std::size_t>(b)];
      const double acc = inputs.buckets->accuracy[static_cast<std::size_t>(b)];
      if (std::isnan(acc))
        row["accuracy"] = "N/A";
      else
        row["accuracy"] = acc;
      buckets.push_back(row);
    }
    doc["nhr_buckets"] = std::move(buckets);
    sections.push_back("nhr_buckets");
  }
  if (inputs.gate_acc) {
    doc["gate"] = {{"accuracy", *inputs.gate_acc},
                   {"edge_set", "test-test directed edges"}};
    sections.push_back("gate");
  }
  if (!inputs.complexity_series.empty()) {
    nlohmann::ordered_json series = nlohmann::ordered_json::array();
    for (auto [epoch, value] : inputs.complexity_series) {
      nlohmann::ordered_json row;
      row["epoch"] = epoch;
      if (std::isfinite(value))
        row["value"] = value;
      else
        row["value"] = "inf";  // json has no infinity literal
      series.push_back(row);
    }
    doc["complexity"] = std::move(series);
    sections.push_back("complexity");
  }
  doc["sections"] = sections;
  return doc;
}

void write_series_csv(const std::vector<std::pair<int, double>>& series,
                      const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "epoch,value\n";
  char buf[32];
  for (auto [epoch, value] : series) {
    std::snprintf(buf, sizeof buf, "%.17g", value);
    out << epoch << "," << buf << "\n";
  }
}

}  // namespace gbk
