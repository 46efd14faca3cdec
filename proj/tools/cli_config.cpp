#include "cli_config.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace gbk::cli {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

void check_range(const TrainConfig& config) {
  if (config.lambda < 0.0 || config.lambda > 64.0)
    fail("lambda " + std::to_string(config.lambda) +
         " out of range: the legal search range is (0, 64], with 0 disabling the gate loss");
  if (config.lr <= 0.0) fail("lr must be > 0");
  if (config.epochs < 1) fail("epochs must be >= 1");
  if (config.hidden < 1) fail("hidden must be >= 1");
  if (config.num_layers < 1) fail("layers must be >= 1");
  if (config.gate_hidden < 1) fail("gate_hidden must be >= 1");
  double sum = 0.0;
  for (double f : config.split) {
    if (f <= 0.0) fail("split fractions must be positive");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) fail("split fractions must sum to 1");
}

}  // namespace

std::array<double, 3> parse_split(const std::string& text) {
  std::array<double, 3> out{};
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int i = 0; i < 3; ++i) {
    auto [next, ec] = std::from_chars(p, end, out[static_cast<std::size_t>(i)]);
    if (ec != std::errc{}) fail("cannot parse split '" + text + "'");
    p = next;
    if (i < 2) {
      if (p >= end || *p != ',') fail("split must be three comma-separated fractions");
      ++p;
    }
  }
  if (p != end) fail("trailing characters in split '" + text + "'");
  return out;
}

TrainConfig parse_config(const std::optional<std::filesystem::path>& config_file,
                         const Overrides& overrides) {
  TrainConfig config;  // defaults: gcn, hidden 16, 2 layers, 500 epochs

  if (const char* env_seed = std::getenv("GBK_SEED")) {
    std::uint64_t value = 0;
    const auto [ptr, ec] =
        std::from_chars(env_seed, env_seed + std::strlen(env_seed), value);
    if (ec != std::errc{} || *ptr != '\0') fail("GBK_SEED is not an integer");
    config.seed = value;
  }

  if (config_file) {
    std::ifstream in(*config_file);
    if (!in) fail("cannot read config file: " + config_file->string());
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      fail(config_file->string() + ": " + e.what());
    }
    if (!doc.is_object()) fail("config file must hold a JSON object");
    for (const auto& [key, value] : doc.items()) {
      try {
        if (key == "model")
          config.model = layer_kind_from_string(value.get<std::string>());
        else if (key == "hidden")
          config.hidden = value.get<int>();
        else if (key == "layers")
          config.num_layers = value.get<int>();
        else if (key == "gate_hidden")
          config.gate_hidden = value.get<int>();
        else if (key == "epochs")
          config.epochs = value.get<int>();
        else if (key == "lr")
          config.lr = value.get<double>();
        else if (key == "weight_decay")
          config.weight_decay = value.get<double>();
        else if (key == "lambda")
          config.lambda = value.get<double>();
        else if (key == "seed")
          config.seed = value.get<std::uint64_t>();
        else if (key == "track_complexity")
          config.track_complexity = value.get<bool>();
        else if (key == "gate_mode") {
          const auto mode = value.get<std::string>();
          if (mode == "learned")
            config.gate_mode = GateMode::kLearned;
          else if (mode == "oracle")
            config.gate_mode = GateMode::kOracle;
          else
            fail("gate_mode must be 'learned' or 'oracle'");
        } else if (key == "split") {
          if (value.is_string()) {
            config.split = parse_split(value.get<std::string>());
          } else {
            if (!value.is_array() || value.size() != 3)
              fail("config split must be three fractions");
            for (int i = 0; i < 3; ++i)
              config.split[static_cast<std::size_t>(i)] = value.at(i).get<double>();
          }
        } else {
          fail("unknown config key '" + key + "'");  // fail closed
        }
      } catch (const nlohmann::json::exception& e) {
        fail("config key '" + key + "': " + e.what());
      }
    }
  }

  if (overrides.model) config.model = layer_kind_from_string(*overrides.model);
  if (overrides.hidden) config.hidden = *overrides.hidden;
  if (overrides.layers) config.num_layers = *overrides.layers;
  if (overrides.gate_hidden) config.gate_hidden = *overrides.gate_hidden;
  if (overrides.epochs) config.epochs = *overrides.epochs;
  if (overrides.lr) config.lr = *overrides.lr;
  if (overrides.weight_decay) config.weight_decay = *overrides.weight_decay;
  if (overrides.lambda) config.lambda = *overrides.lambda;
  if (overrides.seed) config.seed = *overrides.seed;
  if (overrides.split) config.split = parse_split(*overrides.split);
  if (overrides.track_complexity) config.track_complexity = *overrides.track_complexity;

  check_range(config);
  return config;
}

void write_manifest(const Manifest& manifest) {
  for (const std::string& artifact : manifest.artifacts)
    if (!std::filesystem::exists(manifest.output_dir / artifact))
      fail("manifest lists missing artifact: " + artifact);
  nlohmann::ordered_json doc;
  doc["command"] = manifest.command;
  doc["config"] = manifest.config;
  doc["dataset"] = manifest.dataset;
  doc["seed"] = manifest.seed;
  doc["output_dir"] = manifest.output_dir.string();
  doc["artifacts"] = manifest.artifacts;
  doc["wall_clock_seconds"] = manifest.wall_clock_seconds;
  std::ofstream out(manifest.output_dir / "manifest.json");
  if (!out) fail("cannot write manifest");
  out << doc.dump(1) << "\n";
}

std::filesystem::path resolve_output_dir(const std::optional<std::string>& out_flag,
                                         const std::string& command) {
  std::filesystem::path dir;
  if (out_flag) {
    dir = *out_flag;
  } else {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", std::localtime(&t));
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        now.time_since_epoch())
                        .count() %
                    1000;
    dir = std::filesystem::path("runs") /
          (std::string(stamp) + "-" + std::to_string(ms) + "-" + command);
  }
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace gbk::cli
