#pragma once

// Experiment harness: train ensemble members, record their output spikes,
// decode, combine and report. The CLI is a thin wrapper over these calls.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "snnens/ambiguity.hpp"
#include "snnens/config.hpp"
#include "snnens/data_io.hpp"
#include "snnens/decode.hpp"
#include "snnens/training.hpp"

namespace snnens {

// Runs fn(0..n-1) on up to `threads` workers. Exceptions are rethrown after
// all workers finish (the first one wins).
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

// ---------------------------------------------------------------------------
// Training and recording

struct Splits {
  std::vector<LabeledImage> train;
  std::vector<LabeledImage> test;
};

Splits load_idx_splits(const DatasetConfig& dataset);

EncodeOptions encode_options(const ExperimentConfig& config, std::uint64_t seed);

TrainedMember train_member(const ExperimentConfig& config, std::span<const LabeledImage> train,
                           std::size_t member_index);

enum class Split { kTrain, kTest };
std::string to_string(Split split);

// K trials per example with plasticity off. Example ids are "<split>-<index>".
std::vector<SpikeRecord> record_split(const ExperimentConfig& config, const TrainedMember& member,
                                      std::span<const LabeledImage> images, Split split,
                                      std::size_t member_index);

std::filesystem::path model_path(const std::filesystem::path& dir, std::size_t member);
std::filesystem::path records_path(const std::filesystem::path& dir, std::size_t member, Split split);

// ---------------------------------------------------------------------------
// Evaluation

struct ExampleGroup {
  std::string example_id;
  int label = 0;
  std::vector<SpikeRecord> trials;
};

// Groups trials by example id, keeping first-appearance order.
std::vector<ExampleGroup> group_by_example(std::vector<SpikeRecord> records);

struct MemberData {
  std::vector<ExampleGroup> train;
  std::vector<ExampleGroup> test;
  std::optional<PopulationMap> populations;  // from the model file, if any
};

// One member's decoded view of one test example.
struct MemberOutput {
  Matrix rates;             // C x W class-level scores used by AM and AM&MV
  std::vector<int> votes;   // per-window votes used by MV
  int predicted = 0;
  std::optional<ClassProbabilities> probabilities;
  std::optional<PoissonMeans> means;
};

std::vector<MemberOutput> decode_member(const DecoderConfig& decoder, const MemberData& member,
                                        int n_classes);

struct AdRow {
  std::string example_id;
  std::string decoder;
  AdReport report;
};

struct CellResult {
  std::string decoder;
  std::string combiner;
  std::string status = "ok";  // ok | failed | n/a
  std::string message;
  std::vector<double> member_accuracies;
  double ensemble_accuracy = 0.0;
  bool has_ad = false;
  AdReport ad;                // example-wise average
  std::size_t kl_violations = 0;  // examples with ensemble KL > avg member KL
  std::vector<std::vector<int>> confusion;  // [true][predicted]

  double avg_member_accuracy() const;
};

// Applies one combiner to decoded members. Appends per-example AD rows for
// ngm and gm when `ad_rows` is given.
CellResult combine_cell(const std::string& combiner, const std::string& decoder_label,
                        std::span<const std::vector<MemberOutput>> members,
                        std::span<const ExampleGroup> test, int n_classes, double r_max,
                        std::vector<AdRow>* ad_rows = nullptr);

struct RunReport {
  std::string config_hash;
  std::size_t n_members = 0;
  std::size_t n_test = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<CellResult> cells;
  std::vector<AdRow> ad_rows;

  bool all_completed() const;
};

RunReport evaluate(const ExperimentConfig& config, std::span<const MemberData> members);

void write_report_csv(std::ostream& out, const RunReport& report);
void write_ad_csv(std::ostream& out, std::span<const AdRow> rows);
void write_report_table(std::ostream& out, const RunReport& report);

// ---------------------------------------------------------------------------
// Subcommands. Each returns the process exit code.

struct CommandOptions {
  std::filesystem::path out_dir;
  int threads = 1;
  std::ostream* log = nullptr;
};

int cmd_train(const ExperimentConfig& config, const CommandOptions& options);
int cmd_record(const ExperimentConfig& config, const std::filesystem::path& model_dir,
               Split split, const CommandOptions& options);
int cmd_synth(const ExperimentConfig& config, const CommandOptions& options);
int cmd_evaluate(const ExperimentConfig& config, const std::filesystem::path& records_dir,
                 const CommandOptions& options);
int cmd_ad_report(const ExperimentConfig& config, const std::filesystem::path& records_dir,
                  const CommandOptions& options);
int cmd_validate(std::span<const std::filesystem::path> files, std::ostream& out);

std::vector<MemberData> load_member_data(const ExperimentConfig& config,
                                         const std::filesystem::path& records_dir);

}  // namespace snnens
