#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gbk/train.hpp"

namespace gbk::cli {

/// Flag-level overrides collected before resolution; unset fields fall back
/// to the config file, then to defaults.
struct Overrides {
  std::optional<std::string> model;
  std::optional<int> hidden;
  std::optional<int> layers;
  std::optional<int> gate_hidden;
  std::optional<int> epochs;
  std::optional<double> lr;
  std::optional<double> weight_decay;
  std::optional<double> lambda;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> split;  // "0.6,0.2,0.2"
  std::optional<bool> track_complexity;
};

/// Resolves defaults (hidden 16, epochs 500, 2 layers) overlaid by the config
/// file, then by flags; the GBK_SEED environment variable overrides the
/// default seed when neither file nor flag sets one. Unknown config keys and
/// out-of-range values fail closed with the legal range in the message.
TrainConfig parse_config(const std::optional<std::filesystem::path>& config_file,
                         const Overrides& overrides);

std::array<double, 3> parse_split(const std::string& text);

/// Run manifest: command, resolved config, dataset path, output directory,
/// artifact list and wall-clock duration. Every listed artifact must exist
/// when the manifest is written.
struct Manifest {
  std::string command;
  nlohmann::ordered_json config;
  std::string dataset;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  std::vector<std::string> artifacts;
  double wall_clock_seconds = 0.0;
};

void write_manifest(const Manifest& manifest);

/// runs/<timestamp>-<command> unless the user picked an explicit directory.
std::filesystem::path resolve_output_dir(const std::optional<std::string>& out_flag,
                                         const std::string& command);

}  // namespace gbk::cli
