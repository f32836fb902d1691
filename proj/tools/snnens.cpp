// snnens: train, record, decode and combine spiking-network ensembles.

#include <chrono>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "snnens/config.hpp"
#include "snnens/errors.hpp"
#include "snnens/pipeline.hpp"
#include "snnens/seeds.hpp"

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::size_t> members;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> limit;
  int threads = 1;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  app->add_option("--out", c.out, "output directory (default: config output_dir)");
  app->add_option("--members", c.members, "use only the first M member seeds")->check(CLI::PositiveNumber);
  app->add_option("--seed", c.seed, "derive all member and encoding seeds from S");
  app->add_option("--limit", c.limit, "cap the number of train and test examples");
  app->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
}

snnens::ExperimentConfig effective_config(const Common& c) {
  auto cfg = snnens::load_config(c.config);
  if (c.seed) {
    const std::size_t m = c.members.value_or(cfg.member_seeds.size());
    cfg.member_seeds.clear();
    for (std::size_t i = 0; i < m; ++i) cfg.member_seeds.push_back(snnens::derive_seed(*c.seed, {i}));
    cfg.encode_seed = snnens::derive_seed(*c.seed, {0xE5C0DEull});
  }
  if (c.members) {
    if (*c.members > cfg.member_seeds.size()) {
      throw snnens::ConfigError("--members " + std::to_string(*c.members) + " exceeds the " +
                                std::to_string(cfg.member_seeds.size()) + " seeds in the config");
    }
    cfg.member_seeds.resize(*c.members);
  }
  if (c.limit) {
    cfg.dataset.train_limit = c.limit;
    cfg.dataset.test_limit = c.limit;
    const int per_class = static_cast<int>(std::max<std::size_t>(1, *c.limit / 2));
    cfg.dataset.synthetic_train_per_class = std::min(cfg.dataset.synthetic_train_per_class, per_class);
    cfg.dataset.synthetic_test_per_class = std::min(cfg.dataset.synthetic_test_per_class, per_class);
  }
  return cfg;
}

snnens::CommandOptions command_options(const Common& c, const snnens::ExperimentConfig& cfg) {
  snnens::CommandOptions o;
  o.out_dir = c.out.empty() ? cfg.output_dir : fs::path(c.out);
  o.threads = c.threads;
  o.log = &std::cout;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spiking neural network ensembles: STDP training, spike decoding, ensemble combination"};
  app.require_subcommand(1);

  Common train_opts, record_opts, eval_opts, ad_opts, synth_opts;
  std::string model_dir, split = "test", records_dir;
  std::vector<std::string> validate_files;

  auto* train = app.add_subcommand("train", "train ensemble members and save one model file each");
  add_common(train, train_opts);

  auto* record = app.add_subcommand("record", "record output spikes of trained members");
  add_common(record, record_opts);
  record->add_option("--models", model_dir, "directory with member_<m>.model.json")->required();
  record->add_option("--split", split, "train or test")->check(CLI::IsMember({"train", "test"}));

  auto* evaluate = app.add_subcommand("evaluate", "decode, combine and score recorded spikes");
  add_common(evaluate, eval_opts);
  evaluate->add_option("--records", records_dir, "directory with member_<m>_<split>.jsonl")->required();

  auto* ad_report = app.add_subcommand("ad-report", "per-example ambiguity decomposition terms");
  add_common(ad_report, ad_opts);
  ad_report->add_option("--records", records_dir, "directory with member_<m>_<split>.jsonl")->required();

  auto* synth = app.add_subcommand("synth", "generate the synthetic temporal dataset as spike records");
  add_common(synth, synth_opts);

  auto* validate = app.add_subcommand("validate", "lint spike record files");
  validate->add_option("files", validate_files, "record files")->required();

  CLI11_PARSE(app, argc, argv);

  const auto start = std::chrono::steady_clock::now();
  int rc = 0;
  try {
    if (*train) {
      const auto cfg = effective_config(train_opts);
      rc = snnens::cmd_train(cfg, command_options(train_opts, cfg));
    } else if (*record) {
      const auto cfg = effective_config(record_opts);
      rc = snnens::cmd_record(cfg, model_dir,
                              split == "train" ? snnens::Split::kTrain : snnens::Split::kTest,
                              command_options(record_opts, cfg));
    } else if (*evaluate) {
      const auto cfg = effective_config(eval_opts);
      rc = snnens::cmd_evaluate(cfg, records_dir, command_options(eval_opts, cfg));
    } else if (*ad_report) {
      const auto cfg = effective_config(ad_opts);
      rc = snnens::cmd_ad_report(cfg, records_dir, command_options(ad_opts, cfg));
    } else if (*synth) {
      const auto cfg = effective_config(synth_opts);
      rc = snnens::cmd_synth(cfg, command_options(synth_opts, cfg));
    } else if (*validate) {
      std::vector<fs::path> files(validate_files.begin(), validate_files.end());
      rc = snnens::cmd_validate(files, std::cout);
    }
  } catch (const snnens::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return 3;
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  std::cout << "wall time " << elapsed.count() << " s\n";
  return rc;
}
