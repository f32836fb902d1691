#pragma once

// Network-level plasticity: the postsynaptic STDP update, the unsupervised
// training loop and post-training class assignment.

#include <cstdint>
#include <span>
#include <vector>

#include "snnens/dataset.hpp"
#include "snnens/lif.hpp"
#include "snnens/spike.hpp"
#include "snnens/stdp.hpp"

namespace snnens {

// Updates every input weight into excitatory neuron `post` with stdp_delta,
// clamps to [0, w_max] and raises that neuron's threshold by theta_plus.
void apply_stdp_on_postspike(LifNetwork& network, int post, const TraceState& traces);

struct EncodeOptions {
  double max_rate_hz = 63.75;
  SimOptions sim;
  std::uint64_t seed = 0;
};

// Seed for the Poisson encoding of one presentation.
std::uint64_t presentation_seed(std::uint64_t base, std::uint64_t pass, std::uint64_t example,
                                std::uint64_t trial = 0);

// Presents each example `passes` times with plasticity on. Labels are unused.
void train_unsupervised(LifNetwork& network, std::span<const LabeledImage> dataset, int passes,
                        const EncodeOptions& options);

struct Assignment {
  PopulationMap populations;
  Matrix mean_response;            // neuron x class, mean spike count
  std::vector<int> silent_neurons; // no spikes for any class, assigned class 0
};

// Assigns each neuron the class with the highest mean response (lowest
// index on ties). Silent neurons get class 0 and are listed.
Assignment assign_from_responses(const Matrix& mean_response);

// Mean total spike count per (neuron, class) over labelled records.
Matrix class_mean_counts(std::span<const SpikeRecord> records, int n_classes);

// Presents every training example with plasticity off and assigns classes.
Assignment assign_classes(LifNetwork& network, std::span<const LabeledImage> dataset,
                          int n_classes, const EncodeOptions& options);

}  // namespace snnens
