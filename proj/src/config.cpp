#include "snnens/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "snnens/errors.hpp"

namespace snnens {

using nlohmann::json;

namespace {

// Reads fields from one JSON object and rejects any key nobody asked for.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }
  Section(const Section&) = delete;
  Section& operator=(const Section&) = delete;

  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(path_ + "." + key + ": unknown key");
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  template <class T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
  }

  template <class T>
  void require(const std::string& key, T& out) {
    if (!has(key)) throw ConfigError(path_ + "." + key + ": required");
    read(key, out);
  }

  const json& at(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string path(const std::string& key) const { return path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_lif(Section& parent, const std::string& key, LifParams& p) {
  if (!parent.has(key)) return;
  Section s(parent.at(key), parent.path(key));
  s.read("tau_m", p.tau_m);
  s.read("v_rest", p.v_rest);
  s.read("v_reset", p.v_reset);
  s.read("v_th", p.v_th);
  s.read("e_exc", p.e_exc);
  s.read("e_inh", p.e_inh);
  s.read("tau_ge", p.tau_ge);
  s.read("tau_gi", p.tau_gi);
  s.read("tau_ref", p.tau_ref);
}

void read_stdp(Section& parent, StdpParams& p) {
  if (!parent.has("stdp")) return;
  Section s(parent.at("stdp"), parent.path("stdp"));
  s.read("eta", p.eta);
  s.read("x_tar", p.x_tar);
  s.read("w_max", p.w_max);
  s.read("mu", p.mu);
  s.read("tau_trace", p.tau_trace);
  s.read("theta_plus", p.theta_plus);
  s.read("tau_theta", p.tau_theta);
}

void read_dataset(Section& root, DatasetConfig& d) {
  if (!root.has("dataset")) throw ConfigError("config.dataset: required");
  Section s(root.at("dataset"), "config.dataset");
  s.read("kind", d.kind);
  auto read_path = [&](const char* key, std::filesystem::path& out) {
    std::string v;
    s.read(key, v);
    if (!v.empty()) out = v;
  };
  read_path("train_images", d.train_images);
  read_path("train_labels", d.train_labels);
  read_path("test_images", d.test_images);
  read_path("test_labels", d.test_labels);
  if (s.has("train_limit")) {
    std::size_t v = 0;
    s.read("train_limit", v);
    d.train_limit = v;
  }
  if (s.has("test_limit")) {
    std::size_t v = 0;
    s.read("test_limit", v);
    d.test_limit = v;
  }
  if (s.has("synthetic")) {
    Section syn(s.at("synthetic"), s.path("synthetic"));
    syn.read("train_per_class", d.synthetic_train_per_class);
    syn.read("test_per_class", d.synthetic_test_per_class);
    syn.read("n_neurons", d.synthetic.n_neurons);
    syn.read("duration_ms", d.synthetic.duration_ms);
    syn.read("trials", d.synthetic.trials);
    syn.read("high_rate_hz", d.synthetic.high_rate_hz);
    syn.read("low_rate_hz", d.synthetic.low_rate_hz);
    syn.require("seed", d.synthetic.seed);
  }
  if (d.kind == "idx") {
    if (d.train_images.empty() || d.train_labels.empty() || d.test_images.empty() || d.test_labels.empty()) {
      throw ConfigError("config.dataset: idx datasets need train/test image and label paths");
    }
  } else if (d.kind == "synthetic") {
    if (!s.has("synthetic")) throw ConfigError("config.dataset.synthetic: required for synthetic datasets");
  } else {
    throw ConfigError("config.dataset.kind: expected 'idx' or 'synthetic'");
  }
}

const std::set<std::string> kMethods = {"hmfr", "norm_hmfr", "bayes", "pv", "cfr"};
const std::set<std::string> kCombiners = {"ngm", "gm", "am", "mv", "am_mv"};

}  // namespace

std::string DecoderConfig::label() const {
  std::ostringstream out;
  out << method;
  if (method == "norm_hmfr") out << '[' << normalization << ']';
  if (method == "bayes" && prior != "uniform") out << '[' << prior << ']';
  out << '@' << window_ms << "ms";
  return out.str();
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  {
    Section root(j, "config");
    read_dataset(root, c.dataset);
    root.read("n_classes", c.n_classes);
    root.read("r_max", c.r_max);
    std::string out_dir;
    root.read("output_dir", out_dir);
    if (!out_dir.empty()) c.output_dir = out_dir;

    if (root.has("network")) {
      Section net(root.at("network"), "config.network");
      net.read("n_exc", c.n_exc);
      read_lif(net, "exc", c.network.exc_params);
      read_lif(net, "inh", c.network.inh_params);
      net.read("init_max_fraction", c.network.init_max_fraction);
      net.read("exc_inh_drive_factor", c.network.exc_inh_drive_factor);
      net.read("w_inh_exc", c.network.w_inh_exc);
    }
    read_stdp(root, c.network.stdp);

    if (!root.has("simulation")) throw ConfigError("config.simulation: required");
    {
      Section sim(root.at("simulation"), "config.simulation");
      sim.read("max_rate_hz", c.max_rate_hz);
      sim.read("duration_ms", c.duration_ms);
      sim.read("dt_ms", c.dt_ms);
      sim.read("passes", c.passes);
      sim.read("trials", c.trials);
      sim.require("encode_seed", c.encode_seed);
    }

    if (!root.has("ensemble")) throw ConfigError("config.ensemble: required");
    {
      Section ens(root.at("ensemble"), "config.ensemble");
      ens.require("seeds", c.member_seeds);
    }

    if (root.has("decoders")) {
      const json& arr = root.at("decoders");
      if (!arr.is_array()) throw ConfigError("config.decoders: expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        Section d(arr[i], "config.decoders[" + std::to_string(i) + "]");
        DecoderConfig dc;
        d.require("method", dc.method);
        d.read("window_ms", dc.window_ms);
        d.read("normalization", dc.normalization);
        d.read("prior", dc.prior);
        if (!kMethods.count(dc.method)) throw ConfigError(d.path("method") + ": unknown method '" + dc.method + "'");
        if (dc.normalization != "softmax" && dc.normalization != "activity" && dc.normalization != "max") {
          throw ConfigError(d.path("normalization") + ": expected softmax, activity or max");
        }
        if (dc.prior != "uniform" && dc.prior != "empirical") {
          throw ConfigError(d.path("prior") + ": expected uniform or empirical");
        }
        c.decoders.push_back(dc);
      }
    }
    root.read("combiners", c.combiners);
  }

  for (const auto& name : c.combiners) {
    if (!kCombiners.count(name)) throw ConfigError("config.combiners: unknown combiner '" + name + "'");
  }
  if (c.member_seeds.empty()) throw ConfigError("config.ensemble.seeds: need at least one member");
  if (c.n_classes <= 0) throw ConfigError("config.n_classes: must be > 0");
  if (c.trials <= 0) throw ConfigError("config.simulation.trials: must be > 0");
  if (c.passes < 0) throw ConfigError("config.simulation.passes: must be >= 0");
  if (!(c.r_max > 0.0)) throw ConfigError("config.r_max: must be > 0");
  try {
    c.network.exc_params.validate();
    c.network.inh_params.validate();
    c.network.stdp.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  ExperimentConfig c = parse_config(buf.str());
  // Relative dataset paths are resolved against the config file's directory.
  const auto base = path.parent_path();
  for (auto* p : {&c.dataset.train_images, &c.dataset.train_labels, &c.dataset.test_images,
                  &c.dataset.test_labels}) {
    if (!p->empty() && p->is_relative()) *p = base / *p;
  }
  return c;
}

std::string canonical_config(const ExperimentConfig& c) {
  auto lif = [](const LifParams& p) {
    return json{{"tau_m", p.tau_m},   {"v_rest", p.v_rest}, {"v_reset", p.v_reset},
                {"v_th", p.v_th},     {"e_exc", p.e_exc},   {"e_inh", p.e_inh},
                {"tau_ge", p.tau_ge}, {"tau_gi", p.tau_gi}, {"tau_ref", p.tau_ref}};
  };
  const auto& s = c.network.stdp;
  json decoders = json::array();
  for (const auto& d : c.decoders) {
    decoders.push_back({{"method", d.method}, {"window_ms", d.window_ms},
                        {"normalization", d.normalization}, {"prior", d.prior}});
  }
  const auto& d = c.dataset;
  // Dataset paths are identified by file name only so that the hash does not
  // depend on where the repository is checked out.
  json j = {
      {"dataset",
       {{"kind", d.kind},
        {"train_images", d.train_images.filename().string()},
        {"train_labels", d.train_labels.filename().string()},
        {"test_images", d.test_images.filename().string()},
        {"test_labels", d.test_labels.filename().string()},
        {"train_limit", d.train_limit ? json(*d.train_limit) : json(nullptr)},
        {"test_limit", d.test_limit ? json(*d.test_limit) : json(nullptr)},
        {"synthetic",
         {{"train_per_class", d.synthetic_train_per_class},
          {"test_per_class", d.synthetic_test_per_class},
          {"n_neurons", d.synthetic.n_neurons},
          {"duration_ms", d.synthetic.duration_ms},
          {"trials", d.synthetic.trials},
          {"high_rate_hz", d.synthetic.high_rate_hz},
          {"low_rate_hz", d.synthetic.low_rate_hz},
          {"seed", d.synthetic.seed}}}}},
      {"n_classes", c.n_classes},
      {"network",
       {{"n_exc", c.n_exc},
        {"exc", lif(c.network.exc_params)},
        {"inh", lif(c.network.inh_params)},
        {"init_max_fraction", c.network.init_max_fraction},
        {"exc_inh_drive_factor", c.network.exc_inh_drive_factor},
        {"w_inh_exc", c.network.w_inh_exc}}},
      {"stdp",
       {{"eta", s.eta}, {"x_tar", s.x_tar}, {"w_max", s.w_max}, {"mu", s.mu},
        {"tau_trace", s.tau_trace}, {"theta_plus", s.theta_plus}, {"tau_theta", s.tau_theta}}},
      {"simulation",
       {{"max_rate_hz", c.max_rate_hz}, {"duration_ms", c.duration_ms}, {"dt_ms", c.dt_ms},
        {"passes", c.passes}, {"trials", c.trials}, {"encode_seed", c.encode_seed}}},
      {"ensemble", {{"seeds", c.member_seeds}}},
      {"decoders", decoders},
      {"combiners", c.combiners},
      {"r_max", c.r_max}};
  return j.dump();
}

std::string config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_config(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace snnens
