#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cli_config.hpp"
#include "gbk/analysis.hpp"
#include "gbk/graph.hpp"
#include "gbk/model.hpp"
#include "gbk/synthgen.hpp"
#include "gbk/train.hpp"

namespace fs = std::filesystem;
using namespace gbk;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t next = text.find(',', pos);
    if (next == std::string::npos) next = text.size();
    out.push_back(std::stod(text.substr(pos, next - pos)));
    pos = next + 1;
  }
  if (out.empty()) throw std::runtime_error("empty list '" + text + "'");
  return out;
}

std::vector<std::pair<double, double>> parse_pairs(const std::string& text) {
  std::vector<std::pair<double, double>> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t next = text.find(',', pos);
    if (next == std::string::npos) next = text.size();
    const std::string token = text.substr(pos, next - pos);
    const std::size_t colon = token.find(':');
    if (colon == std::string::npos)
      throw std::runtime_error("pair '" + token + "' must look like p0:p1");
    out.emplace_back(std::stod(token.substr(0, colon)), std::stod(token.substr(colon + 1)));
    pos = next + 1;
  }
  return out;
}

void print_kv(const std::string& key, double value) {
  std::printf("%s=%.17g\n", key.c_str(), value);
}

nlohmann::ordered_json bucket_json(const BucketReport& buckets) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (int b = 0; b < 5; ++b) {
    nlohmann::ordered_json row;
    row["range"] = bucket_label(b);
    row["count"] = buckets.counts[static_cast<std::size_t>(b)];
    if (std::isnan(buckets.accuracy[static_cast<std::size_t>(b)]))
      row["accuracy"] = "N/A";
    else
      row["accuracy"] = buckets.accuracy[static_cast<std::size_t>(b)];
    rows.push_back(row);
  }
  return rows;
}

void write_json(const nlohmann::ordered_json& doc, const fs::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << doc.dump(1) << "\n";
}

// per-command flag bundle; CLI11 fills it, handlers consume it
struct Args {
  std::string data;
  std::optional<std::string> config_file;
  std::optional<std::string> out;
  std::string checkpoint;
  cli::Overrides overrides;
  int jobs = 1;

  // synth + sweep
  int n = 1000, d = 20, dim = 20;
  double p0 = 0.5, p1 = 0.5, sep = 4.0;
  std::uint64_t seed = 0;
  std::string gaps = "0.02,0.8";
  std::string pairs;
  int sweep_seeds = 10;
  int sweep_epochs = 300;
  bool no_train = false;

  std::string run_dir;  // report
};

void add_config_flags(CLI::App* cmd, Args& args) {
  cmd->add_option("--config", args.config_file, "JSON config file");
  cmd->add_option("--model", args.overrides.model, "mlp | gcn | sage | gbk");
  cmd->add_option("--hidden", args.overrides.hidden, "hidden width (default 16)");
  cmd->add_option("--layers", args.overrides.layers, "layer count (default 2)");
  cmd->add_option("--gate-hidden", args.overrides.gate_hidden, "gate MLP width");
  cmd->add_option("--epochs", args.overrides.epochs, "epochs (default 500)");
  cmd->add_option("--lr", args.overrides.lr, "learning rate");
  cmd->add_option("--wd", args.overrides.weight_decay, "weight decay");
  cmd->add_option("--lambda", args.overrides.lambda, "gate loss weight in (0, 64]; 0 disables");
  cmd->add_option("--seed", args.overrides.seed, "rng seed (env GBK_SEED overrides the default)");
  cmd->add_option("--split", args.overrides.split, "train,val,test fractions");
  cmd->add_option("--jobs", args.jobs, "worker threads; 1 = fully deterministic");
  cmd->add_flag_callback(
      "--track-complexity",
      [&args] { args.overrides.track_complexity = true; },
      "record per-epoch representation complexity");
}

int cmd_train(const Args& args) {
  Timer timer;
  const TrainConfig config = cli::parse_config(
      args.config_file ? std::optional<fs::path>(*args.config_file) : std::nullopt,
      args.overrides);
  const Graph g = load_graph(args.data);
  const SplitMasks masks = make_splits(g, config.split, config.seed);
  const TrainResult result = train_model(g, masks, config);

  const fs::path out_dir = cli::resolve_output_dir(args.out, "train");
  write_metrics(config, result.history, out_dir / "metrics.json");
  save_checkpoint(result.best_params, out_dir / "checkpoint.json");
  save_checkpoint(result.final_params, out_dir / "final_checkpoint.json");

  cli::Manifest manifest;
  manifest.command = "train";
  manifest.config = config_to_json(config);
  manifest.dataset = args.data;
  manifest.seed = config.seed;
  manifest.output_dir = out_dir;
  manifest.artifacts = {"metrics.json", "checkpoint.json", "final_checkpoint.json"};
  manifest.wall_clock_seconds = timer.seconds();
  cli::write_manifest(manifest);

  print_kv("test_acc", result.history.test_acc);
  print_kv("best_val_acc", result.history.best_val_acc);
  if (result.history.gate_acc >= 0.0) print_kv("gate_acc", result.history.gate_acc);
  std::printf("run_dir=%s\n", out_dir.string().c_str());
  if (result.history.diverged) {
    std::fprintf(stderr, "error: %s\n", result.history.diagnostic.c_str());
    return 1;
  }
  return 0;
}

int cmd_grid(Args& args, const std::string& lrs_text, const std::string& wds_text,
             const std::string& lambdas_text) {
  Timer timer;
  const TrainConfig base = cli::parse_config(
      args.config_file ? std::optional<fs::path>(*args.config_file) : std::nullopt,
      args.overrides);
  const Graph g = load_graph(args.data);
  const SplitMasks masks = make_splits(g, base.split, base.seed);

  // default search grid; the lambda axis only matters for gbk
  const std::vector<double> lrs =
      lrs_text.empty() ? std::vector<double>{1e-3, 1e-4, 1e-5} : parse_list(lrs_text);
  const std::vector<double> wds =
      wds_text.empty() ? std::vector<double>{1e-2, 1e-3, 1e-4} : parse_list(wds_text);
  std::vector<double> lambdas;
  if (!lambdas_text.empty())
    lambdas = parse_list(lambdas_text);
  else if (base.model == LayerKind::kGbk)
    lambdas = {1, 2, 4, 8, 16, 32, 64};
  else
    lambdas = {0.0};

  const GridResult grid = grid_search(g, masks, base, lrs, wds, lambdas, args.jobs);
  const GridCell& best = grid.cells[static_cast<std::size_t>(grid.best_index)];

  const fs::path out_dir = cli::resolve_output_dir(args.out, "grid");
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const GridCell& cell : grid.cells) {
    nlohmann::ordered_json c;
    c["config"] = config_to_json(cell.config);
    if (cell.failed) {
      c["failed"] = true;
      c["error"] = cell.error;
    } else {
      c["best_val_acc"] = cell.history.best_val_acc;
      c["test_acc"] = cell.history.test_acc;
      c["best_epoch"] = cell.history.best_epoch;
      if (cell.history.gate_acc >= 0.0) c["gate_acc"] = cell.history.gate_acc;
    }
    cells.push_back(std::move(c));
  }
  nlohmann::ordered_json doc;
  doc["best_index"] = grid.best_index;
  doc["cells"] = std::move(cells);
  write_json(doc, out_dir / "grid.json");

  // re-run the winning cell to materialize its checkpoint and metrics
  const TrainResult best_run = train_model(g, masks, best.config);
  write_metrics(best.config, best_run.history, out_dir / "metrics.json");
  save_checkpoint(best_run.best_params, out_dir / "checkpoint.json");

  cli::Manifest manifest;
  manifest.command = "grid";
  manifest.config = config_to_json(best.config);
  manifest.dataset = args.data;
  manifest.seed = base.seed;
  manifest.output_dir = out_dir;
  manifest.artifacts = {"grid.json", "metrics.json", "checkpoint.json"};
  manifest.wall_clock_seconds = timer.seconds();
  cli::write_manifest(manifest);

  print_kv("test_acc", best_run.history.test_acc);
  print_kv("best_val_acc", best_run.history.best_val_acc);
  print_kv("best_lr", best.config.lr);
  print_kv("best_wd", best.config.weight_decay);
  print_kv("best_lambda", best.config.lambda);
  if (best_run.history.gate_acc >= 0.0) print_kv("gate_acc", best_run.history.gate_acc);
  std::printf("run_dir=%s\n", out_dir.string().c_str());
  return 0;
}

int cmd_eval(const Args& args, std::optional<std::uint64_t> seed_flag,
             const std::string& split_text) {
  const ModelParams params = load_checkpoint(args.checkpoint);
  const Graph g = load_graph(args.data);
  const std::uint64_t seed = seed_flag.value_or(params.seed);
  const std::array<double, 3> split =
      split_text.empty() ? std::array<double, 3>{0.6, 0.2, 0.2}
                         : cli::parse_split(split_text);
  const SplitMasks masks = make_splits(g, split, seed);
  const double acc = evaluate(params, g, masks.test);
  print_kv("test_acc", acc);
  return 0;
}

int cmd_analyze(const Args& args, std::optional<std::uint64_t> seed_flag,
                const std::string& split_text) {
  Timer timer;
  const Graph g = load_graph(args.data);
  const fs::path out_dir = cli::resolve_output_dir(args.out, "analyze");

  nlohmann::ordered_json doc;
  doc["dataset"] = g.name;
  doc["num_nodes"] = g.num_nodes;
  doc["num_edges"] = g.num_edges();
  doc["feature_dim"] = g.feature_dim;
  doc["num_classes"] = g.num_classes;
  const double hr = homophily_ratio(g);
  doc["homophily_ratio"] = hr;

  // node-level homophily distribution over all non-isolated nodes
  const std::vector<double> nhr = node_homophily_ratios(g);
  std::array<int, 5> counts{};
  int isolated = 0;
  for (double h : nhr) {
    if (h == kNhrUndefined) {
      ++isolated;
      continue;
    }
    int bucket = static_cast<int>(h * 5.0);
    if (bucket > 4) bucket = 4;
    ++counts[static_cast<std::size_t>(bucket)];
  }
  nlohmann::ordered_json dist = nlohmann::ordered_json::array();
  for (int b = 0; b < 5; ++b)
    dist.push_back({{"range", bucket_label(b)},
                    {"count", counts[static_cast<std::size_t>(b)]}});
  doc["nhr_distribution"] = std::move(dist);
  doc["isolated_nodes"] = isolated;

  std::uint64_t seed = seed_flag.value_or(0);
  if (!args.checkpoint.empty()) {
    const ModelParams params = load_checkpoint(args.checkpoint);
    if (!seed_flag) seed = params.seed;
    const std::array<double, 3> split =
        split_text.empty() ? std::array<double, 3>{0.6, 0.2, 0.2}
                           : cli::parse_split(split_text);
    const SplitMasks masks = make_splits(g, split, seed);

    const std::vector<int> predictions = predict(params, g);
    doc["test_acc"] = evaluate(params, g, masks.test);
    doc["nhr_buckets"] = bucket_json(nhr_bucket_accuracy(g, predictions, masks.test));

    bool has_gbk = false;
    for (const LayerSpec& s : params.specs) has_gbk |= s.kind == LayerKind::kGbk;
    if (has_gbk) {
      const auto eval_edges = gate_eval_edges(g, masks.test);
      if (!eval_edges.empty()) {
        Tape tape;
        const Var features = tape.input(g.features);
        const BoundModel bound = bind_params(tape, params);
        const ForwardResult fwd = model_forward(tape, bound, params, g, features);
        std::vector<std::vector<double>> per_layer;
        for (const Var& alpha : fwd.alphas) {
          std::vector<double> vals;
          for (const auto& e : eval_edges)
            vals.push_back(tape.value(alpha).data[static_cast<std::size_t>(e.edge_pos)]);
          per_layer.push_back(std::move(vals));
        }
        doc["gate_acc"] = gate_accuracy(per_layer, eval_edges);
        print_kv("gate_acc", doc["gate_acc"].get<double>());
      }
    }

    Tape tape;
    const Var features = tape.input(g.features);
    const BoundModel bound = bind_params(tape, params);
    const ForwardResult fwd = model_forward(tape, bound, params, g, features);
    const double c =
        consistency_complexity(tape.value(fwd.final_hidden), g.labels, g.num_classes)
            .complexity;
    if (std::isfinite(c))
      doc["complexity"] = c;
    else
      doc["complexity"] = "inf";
  }

  write_json(doc, out_dir / "analysis.json");

  cli::Manifest manifest;
  manifest.command = "analyze";
  manifest.config = {{"data", args.data}, {"checkpoint", args.checkpoint}};
  manifest.dataset = args.data;
  manifest.seed = seed;
  manifest.output_dir = out_dir;
  manifest.artifacts = {"analysis.json"};
  manifest.wall_clock_seconds = timer.seconds();
  cli::write_manifest(manifest);

  print_kv("homophily_ratio", hr);
  std::printf("run_dir=%s\n", out_dir.string().c_str());
  return 0;
}

int cmd_synth(const Args& args) {
  Timer timer;
  SynthSpec spec = default_synth_spec(args.n, args.d, args.p0, args.p1, args.dim,
                                      args.sep, args.seed);
  const Graph g = generate_synthetic(spec);
  const fs::path out_dir = cli::resolve_output_dir(args.out, "synth");
  save_graph(g, out_dir / "dataset");

  cli::Manifest manifest;
  manifest.command = "synth";
  manifest.config = {{"n", args.n},   {"d", args.d},     {"p0", args.p0},
                     {"p1", args.p1}, {"dim", args.dim}, {"separation", args.sep},
                     {"seed", args.seed}};
  manifest.dataset = (out_dir / "dataset").string();
  manifest.seed = args.seed;
  manifest.output_dir = out_dir;
  manifest.artifacts = {"dataset/meta.json", "dataset/edges.txt",
                        "dataset/features.txt", "dataset/labels.txt"};
  manifest.wall_clock_seconds = timer.seconds();
  cli::write_manifest(manifest);

  print_kv("homophily_ratio", homophily_ratio(g));
  std::printf("dataset=%s\n", (out_dir / "dataset").string().c_str());
  return 0;
}

int cmd_sweep(const Args& args) {
  Timer timer;
  const SynthSpec base =
      default_synth_spec(args.n, args.d, 0.5, 0.5, args.dim, args.sep, 0);

  std::vector<std::pair<double, double>> points;
  for (double gap : parse_list(args.gaps)) {
    const double p = (1.0 + gap) / 2.0;
    points.emplace_back(p, p);
  }
  if (!args.pairs.empty())
    for (auto pr : parse_pairs(args.pairs)) points.push_back(pr);

  std::vector<std::uint64_t> seeds;
  for (int s = 1; s <= args.sweep_seeds; ++s)
    seeds.push_back(static_cast<std::uint64_t>(s));

  SweepOptions options;
  options.epochs = args.sweep_epochs;
  options.train_models = !args.no_train;
  const auto rows = theorem1_sweep(base, points, seeds, options);

  const fs::path out_dir = cli::resolve_output_dir(args.out, "sweep-theorem1");
  write_sweep_csv(rows, out_dir / "sweep.csv");

  nlohmann::ordered_json summary = nlohmann::ordered_json::array();
  for (const auto& [p0, p1] : points) {
    std::vector<double> c_single, c_oracle, gcn, mlp, gbk, gbk_oracle;
    for (const auto& r : rows) {
      if (r.p0 != p0 || r.p1 != p1) continue;
      c_single.push_back(r.c_single);
      c_oracle.push_back(r.c_oracle);
      if (r.acc_gcn >= 0) gcn.push_back(r.acc_gcn);
      if (r.acc_mlp >= 0) mlp.push_back(r.acc_mlp);
      if (r.acc_gbk >= 0) gbk.push_back(r.acc_gbk);
      if (r.acc_gbk_oracle >= 0) gbk_oracle.push_back(r.acc_gbk_oracle);
    }
    nlohmann::ordered_json row;
    row["p0"] = p0;
    row["p1"] = p1;
    row["gap"] = std::abs(p0 + p1 - 1.0);
    row["c_single_median"] = median(c_single);
    row["c_oracle_median"] = median(c_oracle);
    if (!gcn.empty()) {
      row["acc_gcn_median"] = median(gcn);
      row["acc_mlp_median"] = median(mlp);
      row["acc_gbk_median"] = median(gbk);
      row["acc_gbk_oracle_median"] = median(gbk_oracle);
    }
    std::printf("gap=%.4g c_single_median=%.6g c_oracle_median=%.6g\n",
                row["gap"].get<double>(), row["c_single_median"].get<double>(),
                row["c_oracle_median"].get<double>());
    summary.push_back(std::move(row));
  }
  write_json(summary, out_dir / "sweep_summary.json");

  cli::Manifest manifest;
  manifest.command = "sweep-theorem1";
  manifest.config = {{"n", args.n},       {"d", args.d},
                     {"dim", args.dim},   {"separation", args.sep},
                     {"gaps", args.gaps}, {"pairs", args.pairs},
                     {"seeds", args.sweep_seeds}, {"epochs", args.sweep_epochs},
                     {"train", !args.no_train}};
  manifest.dataset = "synthetic";
  manifest.seed = 0;
  manifest.output_dir = out_dir;
  manifest.artifacts = {"sweep.csv", "sweep_summary.json"};
  manifest.wall_clock_seconds = timer.seconds();
  cli::write_manifest(manifest);

  std::printf("run_dir=%s\n", out_dir.string().c_str());
  return 0;
}

int cmd_report(const Args& args) {
  Timer timer;
  const fs::path run_dir = args.run_dir;
  const fs::path metrics_file = run_dir / "metrics.json";
  if (!fs::exists(metrics_file))
    throw std::runtime_error("missing input: " + metrics_file.string() +
                             " (report needs a train or grid run directory)");
  nlohmann::ordered_json metrics;
  {
    std::ifstream in(metrics_file);
    in >> metrics;
  }

  ReportInputs inputs;
  inputs.config = metrics.value("config", nlohmann::ordered_json::object());
  inputs.history = metrics;

  BucketReport buckets;
  double gate = -1.0;
  const fs::path analysis_file = run_dir / "analysis.json";
  bool have_buckets = false;
  if (fs::exists(analysis_file)) {
    nlohmann::json analysis;
    std::ifstream in(analysis_file);
    in >> analysis;
    if (analysis.contains("nhr_buckets")) {
      for (int b = 0; b < 5; ++b) {
        const auto& row = analysis["nhr_buckets"][static_cast<std::size_t>(b)];
        buckets.counts[static_cast<std::size_t>(b)] = row.at("count").get<int>();
        buckets.accuracy[static_cast<std::size_t>(b)] =
            row.at("accuracy").is_string()
                ? std::numeric_limits<double>::quiet_NaN()
                : row.at("accuracy").get<double>();
      }
      have_buckets = true;
    }
    if (analysis.contains("gate_acc")) gate = analysis["gate_acc"].get<double>();
  }
  if (have_buckets) inputs.buckets = &buckets;
  if (gate >= 0.0) inputs.gate_acc = &gate;

  std::vector<std::pair<int, double>> series_loss, series_val, series_gate, series_c;
  for (const auto& e : metrics.at("epochs")) {
    const int epoch = e.at("epoch").get<int>();
    series_loss.emplace_back(epoch, e.at("train_loss").get<double>());
    series_val.emplace_back(epoch, e.at("val_acc").get<double>());
    series_gate.emplace_back(epoch, e.at("gate_loss").get<double>());
    if (e.contains("complexity") && !e.at("complexity").is_string())
      series_c.emplace_back(epoch, e.at("complexity").get<double>());
  }
  inputs.complexity_series = series_c;

  write_json(emit_report(inputs), run_dir / "report.json");
  write_series_csv(series_loss, run_dir / "train_loss.csv");
  write_series_csv(series_val, run_dir / "val_acc.csv");
  write_series_csv(series_gate, run_dir / "gate_loss.csv");
  std::vector<std::string> artifacts{"report.json", "train_loss.csv", "val_acc.csv",
                                     "gate_loss.csv"};
  if (!series_c.empty()) {
    write_series_csv(series_c, run_dir / "complexity.csv");
    artifacts.push_back("complexity.csv");
  }

  cli::Manifest manifest;
  manifest.command = "report";
  manifest.config = {{"run", run_dir.string()}};
  manifest.dataset = metrics.value("config", nlohmann::ordered_json::object())
                         .value("data", std::string("?"));
  manifest.output_dir = run_dir;
  manifest.artifacts = artifacts;
  manifest.wall_clock_seconds = timer.seconds();
  std::ofstream out(run_dir / "report_manifest.json");
  nlohmann::ordered_json mdoc;
  mdoc["command"] = manifest.command;
  mdoc["config"] = manifest.config;
  mdoc["artifacts"] = manifest.artifacts;
  mdoc["wall_clock_seconds"] = manifest.wall_clock_seconds;
  out << mdoc.dump(1) << "\n";

  std::printf("report=%s\n", (run_dir / "report.json").string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gated bi-kernel graph network workbench"};
  app.require_subcommand(1);
  Args args;

  auto* train = app.add_subcommand("train", "train one model on a GraphText dataset");
  train->add_option("--data", args.data, "GraphText dataset directory")->required();
  train->add_option("--out", args.out, "output directory (default runs/<stamp>-train)");
  add_config_flags(train, args);

  std::string lrs_text, wds_text, lambdas_text;
  auto* grid = app.add_subcommand("grid", "hyperparameter sweep, selects by validation");
  grid->add_option("--data", args.data)->required();
  grid->add_option("--out", args.out);
  grid->add_option("--lrs", lrs_text, "learning-rate list (default 1e-3,1e-4,1e-5)");
  grid->add_option("--wds", wds_text, "weight-decay list (default 1e-2,1e-3,1e-4)");
  grid->add_option("--lambdas", lambdas_text,
                   "gate-loss weights (default 1,2,...,64 for gbk)");
  add_config_flags(grid, args);

  std::optional<std::uint64_t> seed_flag;
  std::string split_text;
  auto* eval = app.add_subcommand("eval", "accuracy of a checkpoint on the test split");
  eval->add_option("--checkpoint", args.checkpoint)->required();
  eval->add_option("--data", args.data)->required();
  eval->add_option("--seed", seed_flag, "split seed (default: checkpoint seed)");
  eval->add_option("--split", split_text, "fractions (default 0.6,0.2,0.2)");

  auto* analyze = app.add_subcommand(
      "analyze", "dataset homophily stats, plus bucket/gate/complexity for a checkpoint");
  analyze->add_option("--data", args.data)->required();
  analyze->add_option("--checkpoint", args.checkpoint);
  analyze->add_option("--seed", seed_flag);
  analyze->add_option("--split", split_text);
  analyze->add_option("--out", args.out);

  auto* synth = app.add_subcommand("synth", "generate a synthetic GraphText dataset");
  synth->add_option("--n", args.n, "node count (even)")->required();
  synth->add_option("--d", args.d, "out-degree")->required();
  synth->add_option("--p0", args.p0, "same-class neighbor probability, class 0")->required();
  synth->add_option("--p1", args.p1, "same-class neighbor probability, class 1")->required();
  synth->add_option("--dim", args.dim, "feature dimension (default 20)");
  synth->add_option("--sep", args.sep, "||mu0-mu1|| / sigma (default 4)");
  synth->add_option("--seed", args.seed);
  synth->add_option("--out", args.out);

  auto* sweep = app.add_subcommand("sweep-theorem1",
                                   "complexity/accuracy sweep over neighbor probabilities");
  sweep->add_option("--n", args.n);
  sweep->add_option("--d", args.d);
  sweep->add_option("--dim", args.dim);
  sweep->add_option("--sep", args.sep);
  sweep->add_option("--gaps", args.gaps, "|p0+p1-1| values, symmetric points");
  sweep->add_option("--pairs", args.pairs, "extra p0:p1 pairs");
  sweep->add_option("--seeds", args.sweep_seeds, "seeds per point (default 10)");
  sweep->add_option("--epochs", args.sweep_epochs);
  sweep->add_flag("--no-train", args.no_train, "complexity columns only");
  sweep->add_option("--out", args.out);

  auto* report = app.add_subcommand("report", "aggregate a run directory into one report");
  report->add_option("--run", args.run_dir, "run directory with metrics.json")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(args);
    if (grid->parsed()) return cmd_grid(args, lrs_text, wds_text, lambdas_text);
    if (eval->parsed()) return cmd_eval(args, seed_flag, split_text);
    if (analyze->parsed()) return cmd_analyze(args, seed_flag, split_text);
    if (synth->parsed()) return cmd_synth(args);
    if (sweep->parsed()) return cmd_sweep(args);
    if (report->parsed()) return cmd_report(args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
