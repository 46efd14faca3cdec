#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "cli_config.hpp"
#include "doctest.h"

using namespace gbk;
namespace fs = std::filesystem;

namespace {

fs::path write_config(const std::string& body) {
  const fs::path file = fs::temp_directory_path() /
                        ("gbk_cfg_" + std::to_string(::getpid()) + ".json");
  std::ofstream out(file);
  out << body;
  return file;
}

}  // namespace

TEST_CASE("defaults follow the protocol: hidden 16, 2 layers, 500 epochs") {
  ::unsetenv("GBK_SEED");
  const TrainConfig c = cli::parse_config(std::nullopt, {});
  CHECK(c.hidden == 16);
  CHECK(c.epochs == 500);
  CHECK(c.num_layers == 2);
  CHECK(c.split[0] == 0.6);
  CHECK(c.seed == 0);
}

TEST_CASE("file values overlay defaults, flags overlay the file") {
  const fs::path file = write_config(R"({"model":"gbk","epochs":100,"lambda":8})");
  cli::Overrides flags;
  flags.epochs = 25;
  const TrainConfig c = cli::parse_config(file, flags);
  fs::remove(file);
  CHECK(c.model == LayerKind::kGbk);
  CHECK(c.epochs == 25);  // flag beats file
  CHECK(c.lambda == 8.0);
  CHECK(c.hidden == 16);  // untouched default
}

TEST_CASE("unknown config keys fail closed") {
  const fs::path file = write_config(R"({"epochz":100})");
  CHECK_THROWS_WITH_AS(cli::parse_config(file, {}), doctest::Contains("epochz"),
                       std::runtime_error);
  fs::remove(file);
}

TEST_CASE("type mismatches carry the key name") {
  const fs::path file = write_config(R"({"epochs":"many"})");
  CHECK_THROWS_WITH_AS(cli::parse_config(file, {}), doctest::Contains("epochs"),
                       std::runtime_error);
  fs::remove(file);
}

TEST_CASE("lambda zero disables the gate loss, lambda above 64 is rejected") {
  cli::Overrides flags;
  flags.lambda = 0.0;
  CHECK(cli::parse_config(std::nullopt, flags).lambda == 0.0);
  flags.lambda = 65.0;
  CHECK_THROWS_WITH_AS(cli::parse_config(std::nullopt, flags),
                       doctest::Contains("(0, 64]"), std::runtime_error);
}

TEST_CASE("GBK_SEED provides the default seed only") {
  ::setenv("GBK_SEED", "4242", 1);
  CHECK(cli::parse_config(std::nullopt, {}).seed == 4242);
  cli::Overrides flags;
  flags.seed = 7;
  CHECK(cli::parse_config(std::nullopt, flags).seed == 7);  // flag wins
  ::unsetenv("GBK_SEED");
}

TEST_CASE("split strings parse strictly") {
  CHECK(cli::parse_split("0.6,0.2,0.2") == std::array<double, 3>{0.6, 0.2, 0.2});
  CHECK_THROWS_AS(cli::parse_split("0.6,0.2"), std::runtime_error);
  CHECK_THROWS_AS(cli::parse_split("0.6;0.2;0.2"), std::runtime_error);
  cli::Overrides flags;
  flags.split = "0.5,0.2,0.2";  // sums to 0.9
  CHECK_THROWS_AS(cli::parse_config(std::nullopt, flags), std::runtime_error);
}

TEST_CASE("a manifest config echo round-trips through parse_config") {
  cli::Overrides flags;
  flags.model = "gbk";
  flags.lambda = 16.0;
  flags.seed = 31;
  flags.split = "0.5,0.25,0.25";
  const TrainConfig original = cli::parse_config(std::nullopt, flags);
  const fs::path file = write_config(config_to_json(original).dump());
  const TrainConfig back = cli::parse_config(file, {});
  fs::remove(file);
  CHECK(config_to_json(back).dump() == config_to_json(original).dump());
}
