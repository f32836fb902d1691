#pragma once

// Experiment configuration: a JSON document with a fixed schema. Unknown keys
// are rejected and every seed must be given explicitly.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "snnens/data_io.hpp"
#include "snnens/lif.hpp"
#include "snnens/stdp.hpp"

namespace snnens {

struct DatasetConfig {
  std::string kind = "idx";  // "idx" or "synthetic"
  std::filesystem::path train_images, train_labels, test_images, test_labels;
  std::optional<std::size_t> train_limit, test_limit;
  // kind == "synthetic": examples per class in each split.
  int synthetic_train_per_class = 250;
  int synthetic_test_per_class = 250;
  SyntheticOptions synthetic;
};

struct DecoderConfig {
  std::string method;  // hmfr | norm_hmfr | bayes | pv | cfr
  double window_ms = 350.0;
  std::string normalization = "softmax";  // norm_hmfr only
  std::string prior = "uniform";          // bayes only

  std::string label() const;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  int n_classes = 10;
  int n_exc = 100;
  NetworkOptions network;
  double max_rate_hz = 63.75;
  double duration_ms = 350.0;
  double dt_ms = 0.5;
  int passes = 1;
  std::vector<std::uint64_t> member_seeds;
  std::uint64_t encode_seed = 0;
  int trials = 1;
  std::vector<DecoderConfig> decoders;
  std::vector<std::string> combiners;
  double r_max = 10.0;
  std::filesystem::path output_dir = "out";

  std::size_t n_members() const { return member_seeds.size(); }
};

// Throws ConfigError with the offending key path.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical JSON of the effective configuration; stable across runs.
std::string canonical_config(const ExperimentConfig& config);
// Hex FNV-1a of canonical_config.
std::string config_hash(const ExperimentConfig& config);

}  // namespace snnens
