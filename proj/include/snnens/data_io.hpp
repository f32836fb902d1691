#pragma once

// File formats: MNIST IDX ingestion, newline-delimited JSON spike records,
// versioned JSON model files, and the synthetic timing-coded dataset.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "snnens/dataset.hpp"
#include "snnens/decode.hpp"
#include "snnens/lif.hpp"
#include "snnens/spike.hpp"

namespace snnens {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

// Throws FormatError on wrong magic, mismatched counts or truncation.
std::vector<LabeledImage> read_idx(const std::filesystem::path& images,
                                   const std::filesystem::path& labels,
                                   std::optional<std::size_t> limit = std::nullopt);

// One JSON object per line. Refuses (DomainError) to write invalid records.
void write_records(const std::filesystem::path& path, std::span<const SpikeRecord> records);
std::string record_to_line(const SpikeRecord& record);

// Throws FormatError naming the 1-based line number of the first bad line.
std::vector<SpikeRecord> read_records(const std::filesystem::path& path);
SpikeRecord record_from_line(const std::string& line, std::size_t line_number = 0);

struct SyntheticOptions {
  int n_per_class = 250;
  int n_neurons = 10;
  double duration_ms = 350.0;
  int trials = 1;
  double high_rate_hz = 60.0;
  double low_rate_hz = 15.0;
  std::uint64_t seed = 0;
};

// Two classes with identical expected spike totals per neuron. Class 0 fires
// at the high rate in the first half of the interval and the low rate in the
// second; class 1 the reverse. Examples alternate class 0, 1, 0, 1, ...
std::vector<SpikeRecord> synthetic_temporal(const SyntheticOptions& options);

// A trained ensemble member: network, post-training class assignment and
// the seed it was initialised from.
struct TrainedMember {
  LifNetwork network;
  PopulationMap populations;
  std::vector<int> silent_neurons;
  std::uint64_t seed = 0;

  bool operator==(const TrainedMember&) const = default;
};

inline constexpr int kModelFormatVersion = 1;

void save_model(const std::filesystem::path& path, const TrainedMember& member);
void save_model(const std::filesystem::path& path, const BayesModel& model);
void save_model(const std::filesystem::path& path, const PvModel& model);

// Throw FormatError on version mismatch, wrong model kind or corrupt payload.
TrainedMember load_member(const std::filesystem::path& path);
BayesModel load_bayes(const std::filesystem::path& path);
PvModel load_pv(const std::filesystem::path& path);

}  // namespace snnens
