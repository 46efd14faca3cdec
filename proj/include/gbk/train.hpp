#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gbk/graph.hpp"
#include "gbk/model.hpp"

#include "json.hpp"

namespace gbk {

struct TrainConfig {
  LayerKind model = LayerKind::kGcn;
  int hidden = 16;
  int num_layers = 2;
  int gate_hidden = 16;
  int epochs = 500;
  double lr = 1e-3;
  double weight_decay = 1e-3;
  double lambda = 1.0;  // gate-loss weight; 0 disables the gate term
  std::uint64_t seed = 0;
  std::array<double, 3> split{0.6, 0.2, 0.2};
  GateMode gate_mode = GateMode::kLearned;
  bool track_complexity = false;
};

nlohmann::ordered_json config_to_json(const TrainConfig& config);

/// First/second moment estimates per parameter, aligned with param_refs
/// order. beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
struct OptimizerState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::int64_t t = 0;

  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
};

struct LossParts {
  Var total;
  Var task;
  Var gate;  // invalid when the gate term is disabled or unsupervised
};

/// L = task cross-entropy over train_mask + lambda * sum_l BCE(alpha_l on the
/// supervised edges, targets). With lambda = 0 or no targets the returned
/// total IS the task Var, exactly.
LossParts total_loss(Tape& tape, Var logits, const std::vector<int>& labels,
                     const std::vector<int>& train_mask,
                     const std::vector<Var>& alphas,
                     const std::vector<GateTarget>& targets, double lambda);

/// One decoupled-weight-decay Adam update:
///   m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2
///   theta <- theta - lr * mhat/(sqrt(vhat)+eps) - lr * wd * theta
/// Decay applies to weight matrices only (ParamRef::decay). grads follow
/// param_refs order. A non-finite gradient aborts with the parameter name.
void adamw_step(ModelParams& params, const std::vector<Tensor>& grads,
                OptimizerState& state, double lr, double wd);

/// Argmax predictions over logits rows; ties break to the lowest class index.
std::vector<int> predict(const ModelParams& params, const Graph& g,
                         GateMode mode = GateMode::kLearned);

/// Micro accuracy of predict() over the masked nodes. Mask must be non-empty.
double evaluate(const ModelParams& params, const Graph& g,
                const std::vector<int>& mask, GateMode mode = GateMode::kLearned);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double gate_loss = 0.0;  // unweighted sum over layers; 0 when disabled
  double val_acc = 0.0;
  double train_acc = 0.0;
  double complexity = -1.0;  // pre-logit representation complexity, if tracked
};

struct RunHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  double best_val_acc = 0.0;
  double test_acc = 0.0;        // best-validation checkpoint
  double final_test_acc = 0.0;  // last epoch's parameters
  double gate_acc = -1.0;       // test-test edge gate accuracy (gbk only)
  bool diverged = false;
  std::string diagnostic;
};

struct TrainResult {
  ModelParams best_params;
  ModelParams final_params;
  RunHistory history;
};

/// Full-batch training for config.epochs steps. Records per-epoch losses and
/// accuracies, returns the highest-validation-accuracy checkpoint (ties keep
/// the earlier epoch). Deterministic per seed when single-threaded. If the
/// loss turns non-finite the run stops, keeps the last finite checkpoint and
/// reports the epoch in `diagnostic`.
TrainResult train_model(const Graph& g, const SplitMasks& masks,
                        const TrainConfig& config);

struct GridCell {
  TrainConfig config;
  RunHistory history;
  bool failed = false;
  std::string error;
};

struct GridResult {
  std::vector<GridCell> cells;
  int best_index = -1;  // by validation accuracy, ties to the earlier cell
};

/// Trains every (lr, wd, lambda) combination. Per-cell seeds derive from
/// (base.seed, cell index) so results are independent of `jobs`. Cell
/// failures are recorded, not propagated, unless every cell fails.
GridResult grid_search(const Graph& g, const SplitMasks& masks,
                       const TrainConfig& base, const std::vector<double>& lrs,
                       const std::vector<double>& wds,
                       const std::vector<double>& lambdas, int jobs = 1);

/// Metrics history document: config echo, per-epoch records, final block.
/// Stable key order; emission is deterministic for identical inputs.
nlohmann::ordered_json metrics_to_json(const TrainConfig& config,
                                       const RunHistory& history);
void write_metrics(const TrainConfig& config, const RunHistory& history,
                   const std::filesystem::path& file);

}  // namespace gbk
