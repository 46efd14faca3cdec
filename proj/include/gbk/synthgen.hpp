#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "gbk/graph.hpp"

namespace gbk {

/// Binary-class synthetic graph family: n/2 nodes per class, every node gets
/// exactly d out-neighbors sampled without replacement (each slot same-class
/// with probability P_{y_i}, target uniform over the chosen class excluding
/// the node itself), Gaussian features mean mu_{y_i}, isotropic std sigma_f.
/// Directed on purpose: the neighbor distribution is per center node.
struct SynthSpec {
  int n = 1000;  // even, split evenly between the two classes
  int d = 20;    // out-degree, requires d < n/2
  double p0 = 0.5;
  double p1 = 0.5;
  std::vector<double> mu0;
  std::vector<double> mu1;
  double sigma_f = 1.0;
  std::uint64_t seed = 0;
};

/// Spec with opposite class means +-c along every axis, scaled so
/// ||mu0 - mu1|| / sigma_f equals `separation` (default 4: cleanly separable
/// raw features).
SynthSpec default_synth_spec(int n, int d, double p0, double p1,
                             int feature_dim = 16, double separation = 4.0,
                             std::uint64_t seed = 0);

Graph generate_synthetic(const SynthSpec& spec);

struct SweepOptions {
  int hidden = 16;
  int num_layers = 2;
  int epochs = 300;
  double lr = 1e-2;
  double weight_decay = 5e-4;
  double lambda = 1.0;
  bool train_models = true;  // complexity columns only when false
};

/// One (P0, P1, seed) evaluation: complexity of a random single-kernel layer
/// output under the proof-form neighbor mean (c_single) and under the
/// self-inclusive mean (c_single_self), complexity of the oracle-gated
/// bi-kernel output with W_s = I, W_d = -I (c_oracle), and test accuracies of
/// trained models.
struct SweepRow {
  double p0 = 0.0;
  double p1 = 0.0;
  double gap = 0.0;  // |p0 + p1 - 1|
  std::uint64_t seed = 0;
  double c_single = 0.0;
  double c_single_self = 0.0;
  double c_oracle = 0.0;
  double acc_gcn = -1.0;
  double acc_mlp = -1.0;
  double acc_gbk = -1.0;
  double acc_gbk_oracle = -1.0;
};

/// Evaluates every (point, seed) pair; per-row failures surface as an
/// all-negative accuracy row plus a rethrow-free log line, so a sweep never
/// dies mid-run.
std::vector<SweepRow> theorem1_sweep(const SynthSpec& base,
                                     const std::vector<std::pair<double, double>>& points,
                                     const std::vector<std::uint64_t>& seeds,
                                     const SweepOptions& options = {});

void write_sweep_csv(const std::vector<SweepRow>& rows,
                     const std::filesystem::path& file);

double median(std::vector<double> values);

}  // namespace gbk
