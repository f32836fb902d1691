#include "snnens/training.hpp"

#include <algorithm>

#include "snnens/errors.hpp"
#include "snnens/seeds.hpp"

namespace snnens {

void apply_stdp_on_postspike(LifNetwork& net, int post, const TraceState& traces) {
  if (post < 0 || post >= net.n_exc) throw DomainError("stdp: postsynaptic index out of range");
  if (traces.x_pre.size() != static_cast<std::size_t>(net.n_input)) {
    throw ShapeError("stdp: trace count does not match input size");
  }
  const auto j = static_cast<std::size_t>(post);
  const StdpParams& p = net.stdp;
  for (std::size_t i = 0; i < traces.x_pre.size(); ++i) {
    double& w = net.w_input_exc(i, j);
    w = std::clamp(w + stdp_delta(w, traces.x_pre[i], p), 0.0, p.w_max);
  }
  net.theta[j] += p.theta_plus;
}

std::uint64_t presentation_seed(std::uint64_t base, std::uint64_t pass, std::uint64_t example,
                                std::uint64_t trial) {
  return derive_seed(base, {pass, example, trial});
}

void train_unsupervised(LifNetwork& network, std::span<const LabeledImage> dataset, int passes,
                        const EncodeOptions& options) {
  if (passes > 0 && dataset.empty()) throw DomainError("train_unsupervised: empty dataset");
  SimOptions sim = options.sim;
  sim.plasticity = true;
  for (int pass = 0; pass < passes; ++pass) {
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      const auto input = poisson_encode(dataset[i].pixels, options.max_rate_hz, sim.duration_ms,
                                        presentation_seed(options.seed, static_cast<std::uint64_t>(pass), i));
      simulate(network, input, sim);
    }
  }
  network.reset_state();
}

Assignment assign_from_responses(const Matrix& mean_response) {
  Assignment out;
  out.mean_response = mean_response;
  out.populations.n_classes = static_cast<int>(mean_response.cols());
  out.populations.assignment.resize(mean_response.rows(), 0);
  for (std::size_t j = 0; j < mean_response.rows(); ++j) {
    const auto row = mean_response.row(j);
    if (std::all_of(row.begin(), row.end(), [](double v) { return v <= 0.0; })) {
      out.silent_neurons.push_back(static_cast<int>(j));
      continue;
    }
    out.populations.assignment[j] = static_cast<int>(argmax(row));
  }
  return out;
}

Matrix class_mean_counts(std::span<const SpikeRecord> records, int n_classes) {
  if (records.empty()) throw DomainError("class_mean_counts: no records");
  const std::size_t n_neurons = records.front().n_neurons();
  Matrix sums(n_neurons, static_cast<std::size_t>(n_classes));
  std::vector<double> seen(static_cast<std::size_t>(n_classes), 0.0);
  for (const auto& rec : records) {
    if (!rec.label || *rec.label < 0 || *rec.label >= n_classes) {
      throw DomainError("class_mean_counts: record " + rec.example_id + " lacks a valid label");
    }
    if (rec.n_neurons() != n_neurons) throw ShapeError("class_mean_counts: neuron count mismatch");
    const auto c = static_cast<std::size_t>(*rec.label);
    seen[c] += 1.0;
    for (std::size_t j = 0; j < n_neurons; ++j) {
      sums(j, c) += static_cast<double>(rec.trains[j].times.size());
    }
  }
  for (std::size_t j = 0; j < n_neurons; ++j) {
    for (std::size_t c = 0; c < seen.size(); ++c) {
      if (seen[c] > 0.0) sums(j, c) /= seen[c];
    }
  }
  return sums;
}

Assignment assign_classes(LifNetwork& network, std::span<const LabeledImage> dataset,
                          int n_classes, const EncodeOptions& options) {
  SimOptions sim = options.sim;
  sim.plasticity = false;
  std::vector<SpikeRecord> records;
  records.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    // Pass index outside any training run keeps these draws independent of training.
    const auto input = poisson_encode(dataset[i].pixels, options.max_rate_hz, sim.duration_ms,
                                      presentation_seed(options.seed, 1u << 20, i));
    auto rec = simulate(network, input, sim);
    rec.label = dataset[i].label;
    records.push_back(std::move(rec));
  }
  network.reset_state();
  return assign_from_responses(class_mean_counts(records, n_classes));
}

}  // namespace snnens
