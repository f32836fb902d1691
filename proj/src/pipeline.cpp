#include "snnens/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "snnens/combine.hpp"
#include "snnens/errors.hpp"
#include "snnens/seeds.hpp"
#include "snnens/training.hpp"

namespace snnens {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// Training and recording

Splits load_idx_splits(const DatasetConfig& d) {
  if (d.kind != "idx") throw ConfigError("this command needs an idx dataset");
  return {read_idx(d.train_images, d.train_labels, d.train_limit),
          read_idx(d.test_images, d.test_labels, d.test_limit)};
}

EncodeOptions encode_options(const ExperimentConfig& c, std::uint64_t seed) {
  EncodeOptions o;
  o.max_rate_hz = c.max_rate_hz;
  o.sim.duration_ms = c.duration_ms;
  o.sim.dt_ms = c.dt_ms;
  o.seed = seed;
  return o;
}

TrainedMember train_member(const ExperimentConfig& c, std::span<const LabeledImage> train,
                           std::size_t member_index) {
  const std::uint64_t seed = c.member_seeds.at(member_index);
  TrainedMember m;
  m.seed = seed;
  m.network = build_diehl_cook(kImagePixels, c.n_exc, c.network, seed);
  const auto opts = encode_options(c, derive_seed(c.encode_seed, {member_index, 0}));
  train_unsupervised(m.network, train, c.passes, opts);
  auto assignment = assign_classes(m.network, train, c.n_classes, opts);
  m.populations = std::move(assignment.populations);
  m.silent_neurons = std::move(assignment.silent_neurons);
  return m;
}

std::string to_string(Split split) { return split == Split::kTrain ? "train" : "test"; }

std::vector<SpikeRecord> record_split(const ExperimentConfig& c, const TrainedMember& member,
                                      std::span<const LabeledImage> images, Split split,
                                      std::size_t member_index) {
  LifNetwork net = member.network;
  SimOptions sim;
  sim.duration_ms = c.duration_ms;
  sim.dt_ms = c.dt_ms;
  sim.plasticity = false;
  const std::uint64_t split_code = split == Split::kTrain ? 1 : 2;
  std::vector<SpikeRecord> out;
  out.reserve(images.size() * static_cast<std::size_t>(c.trials));
  for (std::size_t i = 0; i < images.size(); ++i) {
    for (int k = 0; k < c.trials; ++k) {
      const auto seed = derive_seed(c.encode_seed, {member_index, split_code, i, static_cast<std::uint64_t>(k)});
      const auto input = poisson_encode(images[i].pixels, c.max_rate_hz, c.duration_ms, seed);
      SpikeRecord rec = simulate(net, input, sim);
      rec.example_id = to_string(split) + "-" + std::to_string(i);
      rec.trial_index = k;
      rec.label = images[i].label;
      out.push_back(std::move(rec));
    }
  }
  return out;
}

std::filesystem::path model_path(const std::filesystem::path& dir, std::size_t member) {
  return dir / ("member_" + std::to_string(member) + ".model.json");
}

std::filesystem::path records_path(const std::filesystem::path& dir, std::size_t member, Split split) {
  return dir / ("member_" + std::to_string(member) + "_" + to_string(split) + ".jsonl");
}

// ---------------------------------------------------------------------------
// Evaluation

std::vector<ExampleGroup> group_by_example(std::vector<SpikeRecord> records) {
  std::vector<ExampleGroup> out;
  std::map<std::string, std::size_t> index;
  for (auto& r : records) {
    if (!r.label) throw DomainError("record " + r.example_id + " has no label");
    auto [it, inserted] = index.try_emplace(r.example_id, out.size());
    if (inserted) out.push_back({r.example_id, *r.label, {}});
    auto& g = out[it->second];
    if (g.label != *r.label) throw DomainError("example " + r.example_id + " has conflicting labels");
    g.trials.push_back(std::move(r));
  }
  return out;
}

namespace {

std::vector<SpikeRecord> flatten(std::span<const ExampleGroup> groups) {
  std::vector<SpikeRecord> out;
  for (const auto& g : groups) out.insert(out.end(), g.trials.begin(), g.trials.end());
  return out;
}

Matrix column(std::span<const double> v) {
  Matrix m(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
  return m;
}

std::vector<int> window_argmax(const Matrix& class_by_window) {
  std::vector<int> votes(class_by_window.cols());
  std::vector<double> col(class_by_window.rows());
  for (std::size_t w = 0; w < class_by_window.cols(); ++w) {
    for (std::size_t c = 0; c < col.size(); ++c) col[c] = class_by_window(c, w);
    votes[w] = static_cast<int>(argmax(col));
  }
  return votes;
}

}  // namespace

std::vector<MemberOutput> decode_member(const DecoderConfig& d, const MemberData& member,
                                        int n_classes) {
  if (member.train.empty() || member.test.empty()) throw DecodeError("member has no train or test records");
  const WindowSpec windows(d.window_ms, member.train.front().trials.front().duration_ms);

  std::vector<LabeledRates> train;
  train.reserve(member.train.size());
  for (const auto& g : member.train) train.push_back({estimate_rates(g.trials, windows), g.label});

  PopulationMap pop;
  if (d.method == "hmfr" || d.method == "norm_hmfr" || d.method == "cfr") {
    if (member.populations) {
      pop = *member.populations;
    } else {
      const auto records = flatten(member.train);
      pop = assign_from_responses(class_mean_counts(records, n_classes)).populations;
    }
  }
  std::optional<BayesModel> bayes;
  if (d.method == "bayes") {
    bayes = fit_bayes(train, n_classes, d.window_ms,
                      d.prior == "empirical" ? Prior::kEmpirical : Prior::kUniform);
  }
  std::optional<PvModel> pv;
  if (d.method == "pv") pv = fit_pv(train, n_classes);

  std::vector<MemberOutput> out;
  out.reserve(member.test.size());
  for (const auto& g : member.test) {
    const TrialRates observed = estimate_rates(g.trials, windows);
    MemberOutput o;
    if (d.method == "hmfr") {
      o.rates = population_window_means(observed.rates, pop);
      o.votes = window_argmax(o.rates);
      o.predicted = hmfr_decode(observed.rates, pop).predicted;
    } else if (d.method == "norm_hmfr") {
      const auto scores = hmfr_decode(observed.rates, pop).scores;
      auto probs = normalize(scores, parse_normalization(d.normalization));
      o.rates = column(probs.p);
      o.predicted = static_cast<int>(argmax(probs.p));
      o.votes = {o.predicted};
      o.probabilities = std::move(probs);
    } else if (d.method == "bayes") {
      auto res = bayes_decode(observed, *bayes);
      o.rates = column(res.posterior.p);
      o.predicted = res.predicted;
      o.votes = {o.predicted};
      o.probabilities = std::move(res.posterior);
    } else if (d.method == "pv") {
      const auto res = pv_decode(observed.rates, *pv);
      o.rates = column(res.scores);
      o.predicted = res.predicted;
      o.votes = {o.predicted};
    } else if (d.method == "cfr") {
      auto res = cfr_decode(observed.rates, pop);
      o.rates = res.class_means.lambda;
      o.votes = std::move(res.window_votes);
      o.predicted = res.predicted;
      o.means = std::move(res.class_means);
    } else {
      throw DecodeError("unknown decoder '" + d.method + "'");
    }
    out.push_back(std::move(o));
  }
  return out;
}

double CellResult::avg_member_accuracy() const {
  if (member_accuracies.empty()) return 0.0;
  double s = 0.0;
  for (double a : member_accuracies) s += a;
  return s / static_cast<double>(member_accuracies.size());
}

CellResult combine_cell(const std::string& combiner, const std::string& decoder_label,
                        std::span<const std::vector<MemberOutput>> members,
                        std::span<const ExampleGroup> test, int n_classes, double r_max,
                        std::vector<AdRow>* ad_rows) {
  CellResult cell;
  cell.decoder = decoder_label;
  cell.combiner = combiner;
  const auto C = static_cast<std::size_t>(n_classes);
  cell.confusion.assign(C, std::vector<int>(C, 0));
  try {
    if (members.empty()) throw CombinationError("no members");
    const std::size_t n = test.size();
    for (const auto& m : members) {
      if (m.size() != n) throw ShapeError("members decoded different numbers of test examples");
    }
    for (const auto& m : members) {
      std::size_t hits = 0;
      for (std::size_t i = 0; i < n; ++i) hits += m[i].predicted == test[i].label;
      cell.member_accuracies.push_back(n ? static_cast<double>(hits) / static_cast<double>(n) : 0.0);
    }
    const auto weights = MemberWeights::uniform(members.size());
    const bool needs_probs = combiner == "ngm";
    const bool needs_means = combiner == "gm";
    for (const auto& m : members) {
      for (const auto& o : m) {
        if ((needs_probs && !o.probabilities) || (needs_means && !o.means)) {
          cell.status = "n/a";
          cell.message = needs_probs ? "decoder does not produce class probabilities"
                                     : "decoder does not produce Poisson means";
          return cell;
        }
      }
    }

    std::vector<AdReport> reports;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      int predicted = 0;
      if (combiner == "ngm" || combiner == "gm") {
        AdReport ad;
        if (combiner == "ngm") {
          std::vector<ClassProbabilities> qs;
          for (const auto& m : members) qs.push_back(*m[i].probabilities);
          const auto ens = ngm(qs, weights);
          predicted = static_cast<int>(argmax(ens.p));
          ClassProbabilities target{std::vector<double>(C, 0.0)};
          target.p[static_cast<std::size_t>(test[i].label)] = 1.0;
          ad = ad_categorical(target, qs, weights);
        } else {
          std::vector<PoissonMeans> lams;
          for (const auto& m : members) lams.push_back(*m[i].means);
          const auto ens = gm_poisson(lams, weights);
          predicted = majority_vote(window_argmax(ens.lambda), n_classes);
          ad = ad_poisson(encode_targets(test[i].label, n_classes, r_max, ens.n_windows()), lams, weights);
        }
        if (ad.ensemble_error > ad.avg_member_error + 1e-12) ++cell.kl_violations;
        reports.push_back(ad);
        if (ad_rows) ad_rows->push_back({test[i].example_id, decoder_label, ad});
      } else if (combiner == "am" || combiner == "am_mv") {
        std::vector<Matrix> rates;
        for (const auto& m : members) rates.push_back(m[i].rates);
        predicted = combiner == "am" ? am_combine(rates).predicted : am_mv_combine(rates);
      } else if (combiner == "mv") {
        std::vector<std::vector<int>> votes;
        for (const auto& m : members) votes.push_back(m[i].votes);
        predicted = mv_combine(votes, n_classes);
      } else {
        throw CombinationError("unknown combiner '" + combiner + "'");
      }
      hits += predicted == test[i].label;
      ++cell.confusion[static_cast<std::size_t>(test[i].label)][static_cast<std::size_t>(predicted)];
    }
    cell.ensemble_accuracy = n ? static_cast<double>(hits) / static_cast<double>(n) : 0.0;
    if (!reports.empty()) {
      cell.has_ad = true;
      cell.ad = average_reports(reports);
    }
  } catch (const std::exception& e) {
    cell.status = "failed";
    cell.message = e.what();
  }
  return cell;
}

bool RunReport::all_completed() const {
  for (const auto& c : cells) {
    if (c.status == "failed") return false;
  }
  return true;
}

RunReport evaluate(const ExperimentConfig& config, std::span<const MemberData> members) {
  RunReport report;
  report.config_hash = config_hash(config);
  report.n_members = members.size();
  report.seeds = config.member_seeds;
  if (members.empty()) throw DomainError("evaluate: no members");
  const auto& test = members.front().test;
  report.n_test = test.size();
  for (const auto& m : members) {
    if (m.test.size() != test.size()) throw ShapeError("evaluate: members have different test sets");
    for (std::size_t i = 0; i < test.size(); ++i) {
      if (m.test[i].example_id != test[i].example_id || m.test[i].label != test[i].label) {
        throw ShapeError("evaluate: test example " + test[i].example_id + " is not aligned across members");
      }
    }
  }

  for (const auto& d : config.decoders) {
    const std::string label = d.label();
    std::vector<std::vector<MemberOutput>> decoded;
    std::string failure;
    try {
      for (const auto& m : members) decoded.push_back(decode_member(d, m, config.n_classes));
    } catch (const std::exception& e) {
      failure = e.what();
    }
    for (const auto& combiner : config.combiners) {
      if (!failure.empty()) {
        CellResult cell;
        cell.decoder = label;
        cell.combiner = combiner;
        cell.status = "failed";
        cell.message = failure;
        report.cells.push_back(std::move(cell));
        continue;
      }
      report.cells.push_back(combine_cell(combiner, label, decoded, test, config.n_classes,
                                          config.r_max, &report.ad_rows));
    }
  }
  return report;
}

namespace {

std::string num(double v, int precision = 10) {
  std::ostringstream out;
  out << std::setprecision(precision) << v;
  return out.str();
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_report_csv(std::ostream& out, const RunReport& r) {
  out << "decoder,combiner,status,member_accuracies,avg_member_accuracy,ensemble_accuracy,"
         "ensemble_error,avg_member_error,ambiguity,residual,kl_violations,config_hash,message\n";
  for (const auto& c : r.cells) {
    std::string accs;
    for (std::size_t m = 0; m < c.member_accuracies.size(); ++m) {
      if (m) accs += ';';
      accs += num(c.member_accuracies[m]);
    }
    out << csv_escape(c.decoder) << ',' << c.combiner << ',' << c.status << ',' << accs << ',';
    if (c.status == "ok") {
      out << num(c.avg_member_accuracy()) << ',' << num(c.ensemble_accuracy);
    } else {
      out << ',';
    }
    out << ',';
    if (c.has_ad) {
      out << num(c.ad.ensemble_error) << ',' << num(c.ad.avg_member_error) << ','
          << num(c.ad.ambiguity) << ',' << num(c.ad.residual, 3) << ',' << c.kl_violations;
    } else {
      out << ",,,,";
    }
    out << ',' << r.config_hash << ',' << csv_escape(c.message) << '\n';
  }
}

void write_ad_csv(std::ostream& out, std::span<const AdRow> rows) {
  out << "example_id,decoder,ensemble_error,avg_member_error,ambiguity,residual\n";
  for (const auto& row : rows) {
    out << csv_escape(row.example_id) << ',' << csv_escape(row.decoder) << ','
        << num(row.report.ensemble_error, 17) << ',' << num(row.report.avg_member_error, 17) << ','
        << num(row.report.ambiguity, 17) << ',' << num(row.report.residual, 3) << '\n';
  }
}

void write_report_table(std::ostream& out, const RunReport& r) {
  out << "config " << r.config_hash << ", " << r.n_members << " member(s), " << r.n_test
      << " test examples, seeds";
  for (auto s : r.seeds) out << ' ' << s;
  out << "\n\n";
  out << std::left << std::setw(26) << "decoder" << std::setw(8) << "comb" << std::setw(8) << "status"
      << std::right << std::setw(10) << "avg mem" << std::setw(10) << "ensemble" << std::setw(12)
      << "avg err" << std::setw(12) << "ambiguity" << std::setw(11) << "residual" << '\n';
  for (const auto& c : r.cells) {
    out << std::left << std::setw(26) << c.decoder << std::setw(8) << c.combiner << std::setw(8)
        << c.status << std::right << std::fixed << std::setprecision(4);
    if (c.status == "ok") {
      out << std::setw(10) << c.avg_member_accuracy() << std::setw(10) << c.ensemble_accuracy;
    } else {
      out << std::setw(10) << "-" << std::setw(10) << "-";
    }
    if (c.has_ad) {
      out << std::setw(12) << c.ad.avg_member_error << std::setw(12) << c.ad.ambiguity
          << std::scientific << std::setprecision(1) << std::setw(11) << c.ad.residual;
    }
    out.unsetf(std::ios::floatfield);
    if (c.status != "ok" && !c.message.empty()) out << "  (" << c.message << ')';
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Subcommands

namespace {

std::ostream& log_of(const CommandOptions& o) {
  static std::ostringstream sink;
  return o.log ? *o.log : sink;
}

}  // namespace

int cmd_train(const ExperimentConfig& c, const CommandOptions& o) {
  const auto splits = load_idx_splits(c.dataset);
  std::filesystem::create_directories(o.out_dir);
  std::vector<std::string> errors(c.n_members());
  parallel_for(c.n_members(), o.threads, [&](std::size_t m) {
    try {
      const auto member = train_member(c, splits.train, m);
      save_model(model_path(o.out_dir, m), member);
    } catch (const std::exception& e) {
      errors[m] = e.what();
    }
  });
  int rc = 0;
  for (std::size_t m = 0; m < errors.size(); ++m) {
    if (errors[m].empty()) {
      log_of(o) << "member " << m << ": wrote " << model_path(o.out_dir, m).string() << '\n';
    } else {
      log_of(o) << "member " << m << ": FAILED: " << errors[m] << '\n';
      rc = 1;
    }
  }
  return rc;
}

int cmd_record(const ExperimentConfig& c, const std::filesystem::path& model_dir, Split split,
               const CommandOptions& o) {
  const auto splits = load_idx_splits(c.dataset);
  const auto& images = split == Split::kTrain ? splits.train : splits.test;
  std::filesystem::create_directories(o.out_dir);
  std::vector<std::string> errors(c.n_members());
  parallel_for(c.n_members(), o.threads, [&](std::size_t m) {
    try {
      const auto member = load_member(model_path(model_dir, m));
      write_records(records_path(o.out_dir, m, split), record_split(c, member, images, split, m));
    } catch (const std::exception& e) {
      errors[m] = e.what();
    }
  });
  int rc = 0;
  for (std::size_t m = 0; m < errors.size(); ++m) {
    if (errors[m].empty()) {
      log_of(o) << "member " << m << ": wrote " << records_path(o.out_dir, m, split).string() << '\n';
    } else {
      log_of(o) << "member " << m << ": FAILED: " << errors[m] << '\n';
      rc = 1;
    }
  }
  return rc;
}

int cmd_synth(const ExperimentConfig& c, const CommandOptions& o) {
  if (c.dataset.kind != "synthetic") throw ConfigError("synth needs a synthetic dataset config");
  std::filesystem::create_directories(o.out_dir);
  for (std::size_t m = 0; m < c.n_members(); ++m) {
    for (Split split : {Split::kTrain, Split::kTest}) {
      SyntheticOptions opts = c.dataset.synthetic;
      opts.n_per_class = split == Split::kTrain ? c.dataset.synthetic_train_per_class
                                                : c.dataset.synthetic_test_per_class;
      opts.seed = derive_seed(c.dataset.synthetic.seed, {m, split == Split::kTrain ? 1u : 2u});
      auto records = synthetic_temporal(opts);
      for (auto& r : records) r.example_id = to_string(split) + r.example_id.substr(r.example_id.find('-'));
      write_records(records_path(o.out_dir, m, split), records);
      log_of(o) << "member " << m << ": wrote " << records_path(o.out_dir, m, split).string() << '\n';
    }
  }
  return 0;
}

std::vector<MemberData> load_member_data(const ExperimentConfig& c,
                                         const std::filesystem::path& records_dir) {
  std::vector<MemberData> out(c.n_members());
  for (std::size_t m = 0; m < c.n_members(); ++m) {
    out[m].train = group_by_example(read_records(records_path(records_dir, m, Split::kTrain)));
    out[m].test = group_by_example(read_records(records_path(records_dir, m, Split::kTest)));
    if (const auto p = model_path(records_dir, m); std::filesystem::exists(p)) {
      out[m].populations = load_member(p).populations;
    }
  }
  return out;
}

int cmd_evaluate(const ExperimentConfig& c, const std::filesystem::path& records_dir,
                 const CommandOptions& o) {
  const auto data = load_member_data(c, records_dir);
  const auto report = evaluate(c, data);
  std::filesystem::create_directories(o.out_dir);
  {
    std::ofstream csv(o.out_dir / "report.csv", std::ios::binary | std::ios::trunc);
    write_report_csv(csv, report);
    std::ofstream txt(o.out_dir / "report.txt", std::ios::binary | std::ios::trunc);
    write_report_table(txt, report);
    std::ofstream ad(o.out_dir / "ad_terms.csv", std::ios::binary | std::ios::trunc);
    write_ad_csv(ad, report.ad_rows);
  }
  write_report_table(log_of(o), report);
  return report.all_completed() ? 0 : 1;
}

int cmd_ad_report(const ExperimentConfig& c, const std::filesystem::path& records_dir,
                  const CommandOptions& o) {
  ExperimentConfig ad_only = c;
  ad_only.combiners.clear();
  for (const auto& name : c.combiners) {
    if (name == "ngm" || name == "gm") ad_only.combiners.push_back(name);
  }
  if (ad_only.combiners.empty()) ad_only.combiners = {"ngm", "gm"};
  const auto report = evaluate(ad_only, load_member_data(c, records_dir));
  std::filesystem::create_directories(o.out_dir);
  std::ofstream ad(o.out_dir / "ad_terms.csv", std::ios::binary | std::ios::trunc);
  write_ad_csv(ad, report.ad_rows);
  auto& log = log_of(o);
  log << std::left << std::setw(26) << "decoder" << std::setw(8) << "comb" << std::right
      << std::setw(14) << "avg mem err" << std::setw(14) << "ambiguity" << std::setw(14)
      << "ens err" << '\n';
  for (const auto& cell : report.cells) {
    if (!cell.has_ad) continue;
    log << std::left << std::setw(26) << cell.decoder << std::setw(8) << cell.combiner << std::right
        << std::fixed << std::setprecision(4) << std::setw(14) << cell.ad.avg_member_error
        << std::setw(14) << cell.ad.ambiguity << std::setw(14) << cell.ad.ensemble_error << '\n';
    log.unsetf(std::ios::floatfield);
  }
  return report.all_completed() ? 0 : 1;
}

int cmd_validate(std::span<const std::filesystem::path> files, std::ostream& out) {
  int rc = 0;
  for (const auto& path : files) {
    std::ifstream in(path);
    if (!in) {
      out << path.string() << ": cannot open\n";
      rc = 1;
      continue;
    }
    std::string line;
    std::size_t n = 0;
    std::size_t bad = 0;
    std::size_t good = 0;
    while (std::getline(in, line)) {
      ++n;
      if (line.empty()) continue;
      try {
        record_from_line(line, n);
        ++good;
      } catch (const FormatError& e) {
        out << path.string() << ": " << e.what() << '\n';
        ++bad;
      }
    }
    out << path.string() << ": " << good << " valid record(s), " << bad << " invalid\n";
    if (bad) rc = 1;
  }
  return rc;
}

}  // namespace snnens
