#include "gbk/train.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "gbk/analysis.hpp"
#include "gbk/rng.hpp"

namespace gbk {

namespace {

std::vector<int> argmax_rows(const Tensor& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows));
  for (int r = 0; r < logits.rows; ++r) {
    int best = 0;
    for (int c = 1; c < logits.cols; ++c)
      if (logits.at(r, c) > logits.at(r, best)) best = c;  // ties keep lowest index
    out[static_cast<std::size_t>(r)] = best;
  }
  return out;
}

double mask_accuracy(const std::vector<int>& predictions,
                     const std::vector<int>& labels, const std::vector<int>& mask) {
  if (mask.empty()) throw std::invalid_argument("evaluate: empty mask");
  std::size_t correct = 0;
  for (int node : mask)
    if (predictions[static_cast<std::size_t>(node)] == labels[static_cast<std::size_t>(node)])
      ++correct;
  return static_cast<double>(correct) / static_cast<double>(mask.size());
}

void validate_config(const TrainConfig& config) {
  if (config.lr <= 0.0) throw std::invalid_argument("config: learning rate must be > 0");
  if (config.lambda < 0.0) throw std::invalid_argument("config: lambda must be >= 0");
  if (config.epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
}

}  // namespace

nlohmann::ordered_json config_to_json(const TrainConfig& config) {
  nlohmann::ordered_json j;
  j["model"] = to_string(config.model);
  j["hidden"] = config.hidden;
  j["layers"] = config.num_layers;
  j["gate_hidden"] = config.gate_hidden;
  j["epochs"] = config.epochs;
  j["lr"] = config.lr;
  j["weight_decay"] = config.weight_decay;
  j["lambda"] = config.lambda;
  j["seed"] = config.seed;
  j["split"] = {config.split[0], config.split[1], config.split[2]};
  j["gate_mode"] = config.gate_mode == GateMode::kOracle ? "oracle" : "learned";
  j["track_complexity"] = config.track_complexity;
  return j;
}

LossParts total_loss(Tape& tape, Var logits, const std::vector<int>& labels,
                     const std::vector<int>& train_mask,
                     const std::vector<Var>& alphas,
                     const std::vector<GateTarget>& targets, double lambda) {
  LossParts out;
  out.task = tape.softmax_cross_entropy(logits, labels, train_mask);
  out.total = out.task;
  if (lambda == 0.0 || alphas.empty() || targets.empty()) return out;

  std::vector<int> positions;
  std::vector<double> target_values;
  positions.reserve(targets.size());
  target_values.reserve(targets.size());
  for (const GateTarget& t : targets) {
    positions.push_back(t.edge_pos);
    target_values.push_back(static_cast<double>(t.target));
  }
  Var gate_sum;
  for (const Var& alpha : alphas) {
    const Var supervised = tape.gather_rows(alpha, positions);
    const Var bce = tape.binary_cross_entropy(supervised, target_values);
    gate_sum = gate_sum.valid() ? tape.add(gate_sum, bce) : bce;
  }
  out.gate = gate_sum;
  out.total = tape.add(out.task, tape.scale(gate_sum, lambda));
  return out;
}

void adamw_step(ModelParams& params, const std::vector<Tensor>& grads,
                OptimizerState& state, double lr, double wd) {
  auto refs = param_refs(params);
  if (grads.size() != refs.size())
    throw std::invalid_argument("adamw_step: gradient count mismatch");
  if (state.m.empty()) {
    for (const ParamRef& r : refs) {
      state.m.emplace_back(r.tensor->rows, r.tensor->cols);
      state.v.emplace_back(r.tensor->rows, r.tensor->cols);
    }
  }
  ++state.t;
  const double b1 = OptimizerState::kBeta1;
  const double b2 = OptimizerState::kBeta2;
  const double m_corr = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double v_corr = 1.0 - std::pow(b2, static_cast<double>(state.t));

  for (std::size_t p = 0; p < refs.size(); ++p) {
    Tensor& theta = *refs[p].tensor;
    const Tensor& g = grads[p];
    if (!g.same_shape(theta))
      throw std::invalid_argument("adamw_step: gradient shape mismatch for " + refs[p].name);
    if (!all_finite(g))
      throw std::runtime_error("adamw_step: non-finite gradient for " + refs[p].name);
    Tensor& m = state.m[p];
    Tensor& v = state.v[p];
    const double decay = refs[p].decay ? wd : 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m.data[i] = b1 * m.data[i] + (1.0 - b1) * g.data[i];
      v.data[i] = b2 * v.data[i] + (1.0 - b2) * g.data[i] * g.data[i];
      const double m_hat = m.data[i] / m_corr;
      const double v_hat = v.data[i] / v_corr;
      theta.data[i] -= lr * (m_hat / (std::sqrt(v_hat) + OptimizerState::kEps)) +
                       lr * decay * theta.data[i];
    }
  }
}

std::vector<int> predict(const ModelParams& params, const Graph& g, GateMode mode) {
  Tape tape;
  const Var features = tape.input(g.features);
  const BoundModel bound = bind_params(tape, params);
  const ForwardResult fwd = model_forward(tape, bound, params, g, features, mode);
  return argmax_rows(tape.value(fwd.logits));
}

double evaluate(const ModelParams& params, const Graph& g,
                const std::vector<int>& mask, GateMode mode) {
  return mask_accuracy(predict(params, g, mode), g.labels, mask);
}

namespace {

/// Gate accuracy on edges whose endpoints both sit in the test mask, averaged
/// over gbk layers. Returns -1 when there is nothing to evaluate.
double test_edge_gate_accuracy(const ModelParams& params, const Graph& g,
                               const std::vector<int>& test_mask, GateMode mode) {
  const std::vector<GateTarget> eval_edges = gate_eval_edges(g, test_mask);
  if (eval_edges.empty()) return -1.0;
  Tape tape;
  const Var features = tape.input(g.features);
  const BoundModel bound = bind_params(tape, params);
  const ForwardResult fwd = model_forward(tape, bound, params, g, features, mode);
  if (fwd.alphas.empty()) return -1.0;
  std::vector<std::vector<double>> per_layer;
  for (const Var& alpha : fwd.alphas) {
    const Tensor& a = tape.value(alpha);
    std::vector<double> vals;
    vals.reserve(eval_edges.size());
    for (const GateTarget& t : eval_edges)
      vals.push_back(a.data[static_cast<std::size_t>(t.edge_pos)]);
    per_layer.push_back(std::move(vals));
  }
  return gate_accuracy(per_layer, eval_edges);
}

}  // namespace

TrainResult train_model(const Graph& g, const SplitMasks& masks,
                        const TrainConfig& config) {
  validate_config(config);
  const GateMode mode = config.gate_mode;
  // oracle gates carry no learnable signal, so the gate loss is moot
  const double lambda = mode == GateMode::kOracle ? 0.0 : config.lambda;

  const std::vector<LayerSpec> specs =
      make_model_specs(config.model, g.feature_dim, config.hidden, g.num_classes,
                       config.num_layers, config.gate_hidden);
  validate_specs(specs, g.feature_dim, g.num_classes);

  ModelParams params = init_params(specs, config.seed);
  OptimizerState opt;
  const std::vector<GateTarget> targets = gate_targets(g, masks);

  TrainResult result;
  result.history.best_epoch = -1;
  result.history.best_val_acc = -1.0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    Tape tape;
    const Var features = tape.input(g.features);
    const BoundModel bound = bind_params(tape, params);
    const ForwardResult fwd = model_forward(tape, bound, params, g, features, mode);
    const LossParts loss =
        total_loss(tape, fwd.logits, g.labels, masks.train, fwd.alphas, targets, lambda);

    const double loss_value = tape.value(loss.total).at(0, 0);
    if (!std::isfinite(loss_value)) {
      result.history.diverged = true;
      result.history.diagnostic =
          "loss became non-finite at epoch " + std::to_string(epoch) +
          "; keeping checkpoint of epoch " + std::to_string(result.history.best_epoch);
      break;
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = tape.value(loss.task).at(0, 0);
    record.gate_loss = loss.gate.valid() ? tape.value(loss.gate).at(0, 0) : 0.0;
    const std::vector<int> predictions = argmax_rows(tape.value(fwd.logits));
    record.train_acc = mask_accuracy(predictions, g.labels, masks.train);
    record.val_acc = mask_accuracy(predictions, g.labels, masks.val);
    if (config.track_complexity) {
      record.complexity =
          consistency_complexity(tape.value(fwd.final_hidden), g.labels, g.num_classes)
              .complexity;
    }
    result.history.epochs.push_back(record);

    if (record.val_acc > result.history.best_val_acc) {  // ties keep earlier epoch
      result.history.best_val_acc = record.val_acc;
      result.history.best_epoch = epoch;
      result.best_params = params;
    }

    tape.backward(loss.total);
    std::vector<Tensor> grads;
    grads.reserve(bound.flat.size());
    for (const Var& v : bound.flat) grads.push_back(tape.grad(v));
    adamw_step(params, grads, opt, config.lr, config.weight_decay);
  }

  if (result.history.best_epoch < 0) {
    // diverged on the very first epoch; surface the initial parameters
    result.best_params = params;
    result.history.best_epoch = 0;
    result.history.best_val_acc = 0.0;
  }
  result.final_params = params;
  result.history.test_acc = evaluate(result.best_params, g, masks.test, mode);
  result.history.final_test_acc = evaluate(result.final_params, g, masks.test, mode);
  if (config.model == LayerKind::kGbk)
    result.history.gate_acc = test_edge_gate_accuracy(result.best_params, g, masks.test, mode);
  return result;
}

GridResult grid_search(const Graph& g, const SplitMasks& masks,
                       const TrainConfig& base, const std::vector<double>& lrs,
                       const std::vector<double>& wds,
                       const std::vector<double>& lambdas, int jobs) {
  if (lrs.empty() || wds.empty() || lambdas.empty())
    throw std::invalid_argument("grid_search: empty grid axis");
  GridResult result;
  for (double lr : lrs)
    for (double wd : wds)
      for (double lambda : lambdas) {
        GridCell cell;
        cell.config = base;
        cell.config.lr = lr;
        cell.config.weight_decay = wd;
        cell.config.lambda = lambda;
        cell.config.seed =
            Rng::derive(base.seed, result.cells.size()).next_u64();
        result.cells.push_back(std::move(cell));
      }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= result.cells.size()) return;
      GridCell& cell = result.cells[idx];
      try {
        cell.history = train_model(g, masks, cell.config).history;
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
      }
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const int n = std::min<int>(jobs, static_cast<int>(result.cells.size()));
    pool.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    const GridCell& cell = result.cells[i];
    if (cell.failed) continue;
    if (result.best_index < 0 ||
        cell.history.best_val_acc >
            result.cells[static_cast<std::size_t>(result.best_index)].history.best_val_acc)
      result.best_index = static_cast<int>(i);
  }
  if (result.best_index < 0) throw std::runtime_error("grid_search: every cell failed");
  return result;
}

nlohmann::ordered_json metrics_to_json(const TrainConfig& config,
                                       const RunHistory& history) {
  nlohmann::ordered_json doc;
  doc["config"] = config_to_json(config);
  nlohmann::ordered_json epochs = nlohmann::ordered_json::array();
  for (const EpochRecord& r : history.epochs) {
    nlohmann::ordered_json e;
    e["epoch"] = r.epoch;
    e["train_loss"] = r.train_loss;
    e["gate_loss"] = r.gate_loss;
    e["val_acc"] = r.val_acc;
    e["train_acc"] = r.train_acc;
    if (r.complexity >= 0.0 || std::isinf(r.complexity))
      e["complexity"] = std::isfinite(r.complexity) ? nlohmann::ordered_json(r.complexity)
                                                    : nlohmann::ordered_json("inf");
    epochs.push_back(std::move(e));
  }
  doc["epochs"] = std::move(epochs);
  nlohmann::ordered_json fin;
  fin["test_acc"] = history.test_acc;
  fin["best_epoch"] = history.best_epoch;
  fin["best_val_acc"] = history.best_val_acc;
  fin["final_test_acc"] = history.final_test_acc;
  if (history.gate_acc >= 0.0) fin["gate_acc"] = history.gate_acc;
  if (history.diverged) {
    fin["diverged"] = true;
    fin["diagnostic"] = history.diagnostic;
  }
  doc["final"] = std::move(fin);
  return doc;
}

void write_metrics(const TrainConfig& config, const RunHistory& history,
                   const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write metrics: " + file.string());
  out << metrics_to_json(config, history).dump(1) << "\n";
}

}  // namespace gbk
