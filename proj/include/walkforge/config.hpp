#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "walkforge/baselines.hpp"
#include "walkforge/forest.hpp"
#include "walkforge/ingest.hpp"
#include "walkforge/nets.hpp"

namespace walkforge {

/// Every tunable of the pipeline. Keys in config files and CLI flags share
/// one table (see config_keys()).
struct RunConfig {
  std::filesystem::path workdir = "walkforge_out";
  std::filesystem::path input;  // raw CSV; empty means workdir/raw.csv
  std::size_t synthetic = 0;    // usable rows to synthesize in `pipeline`
  ingest::SynthConfig synth;
  ingest::CleanPolicy clean;
  std::vector<std::size_t> windows = {7, 30, 90};

  std::size_t k = 10;
  forest::ForestConfig forest;

  std::size_t train_len = 500;
  std::size_t test_len = 100;
  std::size_t stride = 100;
  std::size_t lookback = 7;

  std::size_t hidden1 = 800;
  std::size_t hidden2 = 1000;
  nets::TrainConfig train;

  baselines::SvrParams svr;
  double ridge = 1e-8;

  std::vector<std::string> models = {"lr", "svr", "lstm", "proposed"};
  std::optional<std::uint64_t> seed;
  std::filesystem::path svg;
  bool mape_percent = false;

  std::uint64_t require_seed() const;
};

struct ConfigKey {
  std::string name;  // key in files; flags use the same name with '-' for '_'
  std::string help;
};

const std::vector<ConfigKey>& config_keys();

/// Applies one key=value setting; throws UnknownKey or InvalidConfig.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Reads a flat key=value file ('#' comments, blank lines ignored).
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

/// Cross-field checks run before any stage touches the disk.
void validate(const RunConfig& config);

/// Current value of every key, in table order.
std::vector<std::pair<std::string, std::string>> effective_config(const RunConfig& config);

}  // namespace walkforge
