#include "snnens/data_io.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "snnens/errors.hpp"
#include "snnens/seeds.hpp"

namespace snnens {

using nlohmann::json;

namespace {

std::uint32_t read_be32(std::istream& in, const std::filesystem::path& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw FormatError("idx: truncated header in " + path.string());
  }
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
         std::uint32_t{b[3]};
}

std::ifstream open_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

}  // namespace

std::vector<LabeledImage> read_idx(const std::filesystem::path& images,
                                   const std::filesystem::path& labels,
                                   std::optional<std::size_t> limit) {
  auto img = open_binary(images);
  auto lab = open_binary(labels);
  if (read_be32(img, images) != kIdxImageMagic) throw FormatError("idx: bad image magic in " + images.string());
  if (read_be32(lab, labels) != kIdxLabelMagic) throw FormatError("idx: bad label magic in " + labels.string());
  const std::uint32_t n_images = read_be32(img, images);
  const std::uint32_t rows = read_be32(img, images);
  const std::uint32_t cols = read_be32(img, images);
  const std::uint32_t n_labels = read_be32(lab, labels);
  if (rows != kImageSide || cols != kImageSide) {
    throw FormatError("idx: expected 28x28 images, got " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  if (n_images != n_labels) {
    throw FormatError("idx: " + std::to_string(n_images) + " images but " + std::to_string(n_labels) + " labels");
  }
  const std::size_t n = std::min<std::size_t>(n_images, limit.value_or(n_images));
  std::vector<LabeledImage> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!img.read(reinterpret_cast<char*>(out[i].pixels.data()), kImagePixels)) {
      throw FormatError("idx: image file truncated at image " + std::to_string(i));
    }
    char label = 0;
    if (!lab.get(label)) throw FormatError("idx: label file truncated at label " + std::to_string(i));
    out[i].label = static_cast<unsigned char>(label);
  }
  return out;
}

std::string record_to_line(const SpikeRecord& r) {
  json trains = json::array();
  for (const auto& t : r.trains) trains.push_back(t.times);
  json j = {{"example_id", r.example_id},
            {"trial", r.trial_index},
            {"duration_ms", r.duration_ms},
            {"label", r.label ? json(*r.label) : json(nullptr)},
            {"trains", std::move(trains)}};
  return j.dump();
}

void write_records(const std::filesystem::path& path, std::span<const SpikeRecord> records) {
  for (const auto& r : records) {
    if (const auto v = validate_record(r); !v.empty()) {
      throw DomainError("write_records: record " + r.example_id + " is invalid: " + v.front().message);
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  for (const auto& r : records) out << record_to_line(r) << '\n';
}

SpikeRecord record_from_line(const std::string& line, std::size_t line_number) {
  const std::string where = "line " + std::to_string(line_number);
  try {
    const json j = json::parse(line);
    for (const auto& [key, _] : j.items()) {
      if (key != "example_id" && key != "trial" && key != "duration_ms" && key != "label" &&
          key != "trains") {
        throw FormatError(where + ": unknown key '" + key + "'");
      }
    }
    SpikeRecord r;
    r.example_id = j.at("example_id").get<std::string>();
    r.trial_index = j.at("trial").get<int>();
    r.duration_ms = j.at("duration_ms").get<double>();
    if (const auto& l = j.at("label"); !l.is_null()) r.label = l.get<int>();
    const auto& trains = j.at("trains");
    if (!trains.is_array()) throw FormatError(where + ": trains must be an array");
    r.trains.resize(trains.size());
    for (std::size_t n = 0; n < trains.size(); ++n) {
      r.trains[n].neuron_id = static_cast<int>(n);
      r.trains[n].times = trains[n].get<std::vector<double>>();
    }
    if (r.trial_index < 0) throw FormatError(where + ": trial must be >= 0");
    if (const auto v = validate_record(r); !v.empty()) {
      throw FormatError(where + ": " + v.front().message);
    }
    return r;
  } catch (const json::exception& e) {
    throw FormatError(where + ": " + e.what());
  }
}

std::vector<SpikeRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<SpikeRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    out.push_back(record_from_line(line, n));
  }
  return out;
}

std::vector<SpikeRecord> synthetic_temporal(const SyntheticOptions& o) {
  if (!(o.duration_ms >= 100.0)) throw DomainError("synthetic_temporal: duration must be >= 100 ms");
  if (o.n_per_class < 0 || o.n_neurons <= 0 || o.trials <= 0) {
    throw DomainError("synthetic_temporal: sizes must be positive");
  }
  const double half = o.duration_ms / 2.0;
  std::vector<SpikeRecord> out;
  out.reserve(static_cast<std::size_t>(2 * o.n_per_class * o.trials));
  for (int e = 0; e < 2 * o.n_per_class; ++e) {
    const int label = e % 2;
    for (int k = 0; k < o.trials; ++k) {
      std::mt19937_64 rng(derive_seed(o.seed, {static_cast<std::uint64_t>(e), static_cast<std::uint64_t>(k)}));
      SpikeRecord r;
      r.example_id = "synth-" + std::to_string(e);
      r.trial_index = k;
      r.duration_ms = o.duration_ms;
      r.label = label;
      r.trains.resize(static_cast<std::size_t>(o.n_neurons));
      for (int j = 0; j < o.n_neurons; ++j) {
        auto& train = r.trains[static_cast<std::size_t>(j)];
        train.neuron_id = j;
        const double first = label == 0 ? o.high_rate_hz : o.low_rate_hz;
        const double second = label == 0 ? o.low_rate_hz : o.high_rate_hz;
        for (int segment = 0; segment < 2; ++segment) {
          const double rate = (segment == 0 ? first : second) / 1000.0;
          const double start = segment * half;
          std::exponential_distribution<double> gap(rate);
          for (double t = start + gap(rng); t < start + half; t += gap(rng)) train.times.push_back(t);
        }
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model files

namespace {

json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

Matrix matrix_from_json(const json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != m.rows() * m.cols()) throw FormatError("model: matrix payload has wrong length");
  m.data() = std::move(data);
  return m;
}

json lif_to_json(const LifParams& p) {
  return {{"tau_m", p.tau_m},   {"v_rest", p.v_rest}, {"v_reset", p.v_reset},
          {"v_th", p.v_th},     {"e_exc", p.e_exc},   {"e_inh", p.e_inh},
          {"tau_ge", p.tau_ge}, {"tau_gi", p.tau_gi}, {"tau_ref", p.tau_ref}};
}

LifParams lif_from_json(const json& j) {
  LifParams p;
  p.tau_m = j.at("tau_m");
  p.v_rest = j.at("v_rest");
  p.v_reset = j.at("v_reset");
  p.v_th = j.at("v_th");
  p.e_exc = j.at("e_exc");
  p.e_inh = j.at("e_inh");
  p.tau_ge = j.at("tau_ge");
  p.tau_gi = j.at("tau_gi");
  p.tau_ref = j.at("tau_ref");
  return p;
}

json stdp_to_json(const StdpParams& p) {
  return {{"eta", p.eta},           {"x_tar", p.x_tar},         {"w_max", p.w_max},
          {"mu", p.mu},             {"tau_trace", p.tau_trace}, {"theta_plus", p.theta_plus},
          {"tau_theta", p.tau_theta}};
}

StdpParams stdp_from_json(const json& j) {
  StdpParams p;
  p.eta = j.at("eta");
  p.x_tar = j.at("x_tar");
  p.w_max = j.at("w_max");
  p.mu = j.at("mu");
  p.tau_trace = j.at("tau_trace");
  p.theta_plus = j.at("theta_plus");
  p.tau_theta = j.at("tau_theta");
  return p;
}

void write_model(const std::filesystem::path& path, const std::string& kind, json payload) {
  json doc = {{"format", "snnens-model"}, {"version", kModelFormatVersion}, {"kind", kind},
              {"payload", std::move(payload)}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << doc.dump() << '\n';
}

json read_model(const std::filesystem::path& path, const std::string& kind) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("model " + path.string() + " is corrupt: " + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != "snnens-model") {
    throw FormatError("model " + path.string() + " is not an snnens model");
  }
  if (doc.value("version", -1) != kModelFormatVersion) {
    throw FormatError("model " + path.string() + " has version " + doc.value("version", json(-1)).dump() +
                      ", expected " + std::to_string(kModelFormatVersion));
  }
  if (doc.value("kind", "") != kind) {
    throw FormatError("model " + path.string() + " holds a '" + doc.value("kind", "") +
                      "' model, expected '" + kind + "'");
  }
  return doc.at("payload");
}

template <class F>
auto guarded(const std::filesystem::path& path, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw FormatError("model " + path.string() + " is corrupt: " + e.what());
  }
}

}  // namespace

void save_model(const std::filesystem::path& path, const TrainedMember& m) {
  const LifNetwork& n = m.network;
  auto state_to_json = [](const std::vector<NeuronState>& states) {
    json a = json::array();
    for (const auto& s : states) a.push_back({s.v, s.g_e, s.g_i, s.refractory_remaining});
    return a;
  };
  json net = {{"n_input", n.n_input},
              {"n_exc", n.n_exc},
              {"n_inh", n.n_inh},
              {"exc_params", lif_to_json(n.exc_params)},
              {"inh_params", lif_to_json(n.inh_params)},
              {"stdp", stdp_to_json(n.stdp)},
              {"w_input_exc", matrix_to_json(n.w_input_exc)},
              {"w_exc_inh", n.w_exc_inh},
              {"w_inh_exc", n.w_inh_exc},
              {"theta", n.theta},
              {"exc_state", state_to_json(n.exc_state)},
              {"inh_state", state_to_json(n.inh_state)}};
  write_model(path, "member",
              {{"network", std::move(net)},
               {"assignment", m.populations.assignment},
               {"n_classes", m.populations.n_classes},
               {"silent_neurons", m.silent_neurons},
               {"seed", m.seed}});
}

TrainedMember load_member(const std::filesystem::path& path) {
  const json p = read_model(path, "member");
  return guarded(path, [&] {
    auto states_from_json = [](const json& a) {
      std::vector<NeuronState> out;
      for (const auto& s : a) out.push_back({s.at(0), s.at(1), s.at(2), s.at(3)});
      return out;
    };
    const json& j = p.at("network");
    TrainedMember m;
    LifNetwork& n = m.network;
    n.n_input = j.at("n_input");
    n.n_exc = j.at("n_exc");
    n.n_inh = j.at("n_inh");
    n.exc_params = lif_from_json(j.at("exc_params"));
    n.inh_params = lif_from_json(j.at("inh_params"));
    n.stdp = stdp_from_json(j.at("stdp"));
    n.w_input_exc = matrix_from_json(j.at("w_input_exc"));
    n.w_exc_inh = j.at("w_exc_inh");
    n.w_inh_exc = j.at("w_inh_exc");
    n.theta = j.at("theta").get<std::vector<double>>();
    n.exc_state = states_from_json(j.at("exc_state"));
    n.inh_state = states_from_json(j.at("inh_state"));
    if (n.w_input_exc.rows() != static_cast<std::size_t>(n.n_input) ||
        n.w_input_exc.cols() != static_cast<std::size_t>(n.n_exc) ||
        n.theta.size() != static_cast<std::size_t>(n.n_exc)) {
      throw FormatError("model " + path.string() + ": network arrays do not match its sizes");
    }
    m.populations.assignment = p.at("assignment").get<std::vector<int>>();
    m.populations.n_classes = p.at("n_classes");
    m.silent_neurons = p.at("silent_neurons").get<std::vector<int>>();
    m.seed = p.at("seed");
    return m;
  });
}

void save_model(const std::filesystem::path& path, const BayesModel& m) {
  write_model(path, "bayes",
              {{"n_neurons", m.n_neurons()},
               {"n_classes", m.n_classes()},
               {"n_windows", m.n_windows()},
               {"window_ms", m.window_ms()},
               {"f", m.values()},
               {"priors", m.priors.p}});
}

BayesModel load_bayes(const std::filesystem::path& path) {
  const json p = read_model(path, "bayes");
  return guarded(path, [&] {
    BayesModel m(p.at("n_neurons").get<std::size_t>(), p.at("n_classes").get<std::size_t>(),
                 p.at("n_windows").get<std::size_t>(), p.at("window_ms").get<double>());
    auto f = p.at("f").get<std::vector<double>>();
    if (f.size() != m.values().size()) throw FormatError("model " + path.string() + ": f has wrong length");
    m.values() = std::move(f);
    m.priors.p = p.at("priors").get<std::vector<double>>();
    if (m.priors.p.size() != m.n_classes()) throw FormatError("model " + path.string() + ": priors have wrong length");
    return m;
  });
}

void save_model(const std::filesystem::path& path, const PvModel& m) {
  write_model(path, "pv", {{"w", matrix_to_json(m.w)}, {"inert", m.inert}});
}

PvModel load_pv(const std::filesystem::path& path) {
  const json p = read_model(path, "pv");
  return guarded(path, [&] {
    PvModel m;
    m.w = matrix_from_json(p.at("w"));
    m.inert = p.at("inert").get<std::vector<int>>();
    return m;
  });
}

}  // namespace snnens
