#include "gbk/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "gbk/analysis.hpp"
#include "gbk/model.hpp"
#include "gbk/rng.hpp"
#include "gbk/tape.hpp"
#include "gbk/train.hpp"

namespace gbk {

SynthSpec default_synth_spec(int n, int d, double p0, double p1, int feature_dim,
                             double separation, std::uint64_t seed) {
  SynthSpec spec;
  spec.n = n;
  spec.d = d;
  spec.p0 = p0;
  spec.p1 = p1;
  spec.sigma_f = 1.0;
  spec.seed = seed;
  const double c = separation / (2.0 * std::sqrt(static_cast<double>(feature_dim)));
  spec.mu0.assign(static_cast<std::size_t>(feature_dim), c);
  spec.mu1.assign(static_cast<std::size_t>(feature_dim), -c);
  return spec;
}

Graph generate_synthetic(const SynthSpec& spec) {
  if (spec.n < 2 || spec.n % 2 != 0)
    throw std::invalid_argument("synthgen: n must be even and >= 2");
  if (spec.d < 1 || spec.d >= spec.n / 2)
    throw std::invalid_argument("synthgen: need 1 <= d < n/2");
  if (spec.p0 < 0.0 || spec.p0 > 1.0 || spec.p1 < 0.0 || spec.p1 > 1.0)
    throw std::invalid_argument("synthgen: probabilities must lie in [0,1]");
  if (spec.mu0.empty() || spec.mu0.size() != spec.mu1.size())
    throw std::invalid_argument("synthgen: feature means must be non-empty, equal length");
  if (spec.sigma_f <= 0.0)
    throw std::invalid_argument("synthgen: sigma_f must be positive");

  const int half = spec.n / 2;
  const int dim = static_cast<int>(spec.mu0.size());
  std::vector<int> labels(static_cast<std::size_t>(spec.n));
  for (int i = half; i < spec.n; ++i) labels[static_cast<std::size_t>(i)] = 1;

  Rng rng(spec.seed);
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(spec.n) * spec.d);
  std::vector<char> taken(static_cast<std::size_t>(spec.n), 0);
  for (int i = 0; i < spec.n; ++i) {
    const double p_same = labels[static_cast<std::size_t>(i)] == 0 ? spec.p0 : spec.p1;
    std::vector<int> chosen;
    chosen.reserve(static_cast<std::size_t>(spec.d));
    for (int slot = 0; slot < spec.d; ++slot) {
      const bool same = rng.uniform() < p_same;
      const int cls = same ? labels[static_cast<std::size_t>(i)]
                           : 1 - labels[static_cast<std::size_t>(i)];
      const int base = cls == 0 ? 0 : half;
      // rejection sampling; the pool always has at least d candidates
      int target;
      do {
        target = base + static_cast<int>(rng.below(static_cast<std::uint64_t>(half)));
      } while (target == i || taken[static_cast<std::size_t>(target)]);
      taken[static_cast<std::size_t>(target)] = 1;
      chosen.push_back(target);
      edges.emplace_back(i, target);
    }
    for (int t : chosen) taken[static_cast<std::size_t>(t)] = 0;
  }

  Tensor features(spec.n, dim);
  for (int i = 0; i < spec.n; ++i) {
    const auto& mu = labels[static_cast<std::size_t>(i)] == 0 ? spec.mu0 : spec.mu1;
    for (int c = 0; c < dim; ++c)
      features.at(i, c) = mu[static_cast<std::size_t>(c)] + spec.sigma_f * rng.normal();
  }

  return make_graph("synth", spec.n, 2, /*undirected=*/false, std::move(edges),
                    std::move(features), std::move(labels));
}

namespace {

double single_kernel_complexity(const Graph& g, const Tensor& kernel, bool include_self) {
  Tape tape;
  const Var x = tape.input(g.features);
  const Var agg = tape.neighbor_mean(x, g.neighbor_index, {}, include_self);
  const Var out = tape.matmul(agg, tape.input(kernel));
  return consistency_complexity(tape.value(out), g.labels, g.num_classes).complexity;
}

double oracle_bikernel_complexity(const Graph& g) {
  Tape tape;
  const Var x = tape.input(g.features);
  Tensor alpha_t(g.num_edges(), 1);
  for (std::size_t e = 0; e < g.edges.size(); ++e)
    alpha_t.data[e] = g.labels[static_cast<std::size_t>(g.edges[e].first)] ==
                              g.labels[static_cast<std::size_t>(g.edges[e].second)]
                          ? 1.0
                          : 0.0;
  const Var alpha = tape.input(std::move(alpha_t));
  const Var ones = tape.input(Tensor(g.num_edges(), 1, 1.0));
  const Var one_minus = tape.add(ones, tape.scale(alpha, -1.0));
  // W_s = I, W_d = -I, W_f = 0
  const Var agg_s = tape.neighbor_mean(x, g.neighbor_index, alpha);
  const Var agg_d = tape.neighbor_mean(tape.scale(x, -1.0), g.neighbor_index, one_minus);
  const Var out = tape.add(agg_s, agg_d);
  return consistency_complexity(tape.value(out), g.labels, g.num_classes).complexity;
}

double train_accuracy(const Graph& g, const SplitMasks& masks, LayerKind kind,
                      GateMode mode, std::uint64_t seed, const SweepOptions& opt) {
  TrainConfig config;
  config.model = kind;
  config.hidden = opt.hidden;
  config.num_layers = opt.num_layers;
  config.epochs = opt.epochs;
  config.lr = opt.lr;
  config.weight_decay = opt.weight_decay;
  config.lambda = opt.lambda;
  config.seed = seed;
  config.gate_mode = mode;
  return train_model(g, masks, config).history.test_acc;
}

}  // namespace

std::vector<SweepRow> theorem1_sweep(const SynthSpec& base,
                                     const std::vector<std::pair<double, double>>& points,
                                     const std::vector<std::uint64_t>& seeds,
                                     const SweepOptions& options) {
  if (points.empty()) throw std::invalid_argument("theorem1_sweep: empty point list");
  if (seeds.empty()) throw std::invalid_argument("theorem1_sweep: empty seed list");

  const int dim = static_cast<int>(base.mu0.size());
  std::vector<SweepRow> rows;
  for (auto [p0, p1] : points) {
    for (std::uint64_t seed : seeds) {
      SweepRow row;
      row.p0 = p0;
      row.p1 = p1;
      row.gap = std::abs(p0 + p1 - 1.0);
      row.seed = seed;
      try {
        SynthSpec spec = base;
        spec.p0 = p0;
        spec.p1 = p1;
        spec.seed = seed;
        const Graph g = generate_synthetic(spec);

        // shared random kernel for the single-kernel columns, same per seed
        // across sweep points so the comparison is paired
        Rng wrng = Rng::derive(seed, 0x5eed);
        Tensor kernel(dim, options.hidden);
        const double bound = std::sqrt(6.0 / static_cast<double>(dim + options.hidden));
        for (double& v : kernel.data) v = wrng.uniform(-bound, bound);

        row.c_single = single_kernel_complexity(g, kernel, /*include_self=*/false);
        row.c_single_self = single_kernel_complexity(g, kernel, /*include_self=*/true);
        row.c_oracle = oracle_bikernel_complexity(g);

        if (options.train_models) {
          const SplitMasks masks = make_splits(g, {0.6, 0.2, 0.2}, seed);
          row.acc_gcn = train_accuracy(g, masks, LayerKind::kGcn, GateMode::kLearned,
                                       seed, options);
          row.acc_mlp = train_accuracy(g, masks, LayerKind::kDense, GateMode::kLearned,
                                       seed, options);
          row.acc_gbk = train_accuracy(g, masks, LayerKind::kGbk, GateMode::kLearned,
                                       seed, options);
          row.acc_gbk_oracle = train_accuracy(g, masks, LayerKind::kGbk,
                                              GateMode::kOracle, seed, options);
        }
      } catch (const std::exception& e) {
        std::cerr << "sweep point (" << p0 << ", " << p1 << ") seed " << seed
                  << " failed: " << e.what() << "\n";
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows,
                     const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "p0,p1,gap,seed,c_single,c_single_self,c_oracle,"
         "acc_gcn,acc_mlp,acc_gbk,acc_gbk_oracle\n";
  char buf[64];
  auto put = [&out, &buf](double v, bool comma = true) {
    std::snprintf(buf, sizeof buf, "%.12g", v);
    out << buf;
    if (comma) out << ",";
  };
  for (const SweepRow& r : rows) {
    put(r.p0);
    put(r.p1);
    put(r.gap);
    out << r.seed << ",";
    put(r.c_single);
    put(r.c_single_self);
    put(r.c_oracle);
    put(r.acc_gcn);
    put(r.acc_mlp);
    put(r.acc_gbk);
    put(r.acc_gbk_oracle, false);
    out << "\n";
  }
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace gbk
