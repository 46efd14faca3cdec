#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "gbk/graph.hpp"
#include "gbk/tensor.hpp"

#include "json.hpp"

namespace gbk {

/// Davies-Bouldin-style representation complexity: per-class scatter S_i
/// (p-th root of the mean p-th-power deviation from the class centroid),
/// pairwise centroid separations M_ij (p-norm), and
/// C = (1/k) sum_i max_{j != i} (S_i + S_j) / M_ij. Lower C predicts better
/// generalization; coincident centroids (M < 1e-12) give the +inf sentinel.
struct ComplexityReport {
  std::vector<double> scatter;  // S_i per class
  Tensor separation;            // M, k x k, symmetric, zero diagonal
  double complexity = 0.0;      // C, or +inf sentinel
  int p = 2;
};

/// Requires at least two classes, each with at least one sample.
ComplexityReport consistency_complexity(const Tensor& reps,
                                        const std::vector<int>& labels,
                                        int num_classes, int p = 2);

/// Classification accuracy of test nodes grouped by node-level homophily
/// ratio into [0,.2), [.2,.4), [.4,.6), [.6,.8), [.8,1]. Isolated nodes are
/// excluded; an empty bucket reports count 0 and a NaN accuracy (serialized
/// as "N/A").
struct BucketReport {
  std::array<int, 5> counts{};
  std::array<double, 5> accuracy{};  // NaN where count == 0
};

BucketReport nhr_bucket_accuracy(const Graph& g, const std::vector<int>& predictions,
                                 const std::vector<int>& test_mask);

/// Accuracy of thresholded gate scores against the label indicator over an
/// evaluation edge set, averaged over (layer, edge) pairs. alpha > 0.5
/// predicts "same"; exactly 0.5 predicts "different". per_layer_alphas[l]
/// aligns with `edges`.
double gate_accuracy(const std::vector<std::vector<double>>& per_layer_alphas,
                     const std::vector<GateTarget>& edges);

/// One aggregated report document: config echo, training history, NHR bucket
/// table, gate accuracy, and complexity series. Re-emission from identical
/// inputs is byte-identical. Parts may be absent (e.g. no gate for a gcn
/// run); `sections` lists what made it in.
struct ReportInputs {
  nlohmann::ordered_json config;                 // run config echo
  nlohmann::ordered_json history;                // metrics document
  const BucketReport* buckets = nullptr;
  const double* gate_acc = nullptr;
  std::vector<std::pair<int, double>> complexity_series;  // (epoch, C)
};

nlohmann::ordered_json emit_report(const ReportInputs& inputs);

/// CSV series (header "epoch,value") for external plotting.
void write_series_csv(const std::vector<std::pair<int, double>>& series,
                      const std::filesystem::path& file);

std::string bucket_label(int bucket);

}  // namespace gbk
