#pragma once

// Trace-based STDP primitives. The network-level training loop lives in
// training.hpp; this header has no dependency on the simulator.

#include <cstddef>
#include <span>
#include <vector>

namespace snnens {

struct StdpParams {
  double eta = 0.01;          // learning rate
  double x_tar = 0.4;         // target presynaptic trace at a postsynaptic spike
  double w_max = 1.0;
  double mu = 1.0;            // weight-dependence exponent, (0, 1]
  double tau_trace = 20.0;    // ms
  double theta_plus = 0.05;   // mV added to the firing threshold per spike
  double tau_theta = 1e7;     // ms

  // Throws DomainError when a field is out of range.
  void validate() const;
  bool operator==(const StdpParams&) const = default;
};

// Presynaptic traces, one per input synapse.
struct TraceState {
  std::vector<double> x_pre;
};

// eta * (x_pre - x_tar) * (w_max - w)^mu. The caller clamps w + dw.
double stdp_delta(double w, double x_pre, const StdpParams& p);

// Exponential decay over dt, then +1 if the presynaptic neuron spiked.
double update_trace(double x, double dt, double tau_trace, bool presyn_spiked);
void update_trace(TraceState& traces, double dt, double tau_trace,
                  std::span<const std::size_t> spiking_inputs);

}  // namespace snnens
