#pragma once

// Conductance-based leaky integrate-and-fire neurons, Poisson rate encoding
// of pixel intensities, and the three-layer winner-take-all network
// (input -> excitatory -> inhibitory -> lateral inhibition).

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "snnens/spike.hpp"
#include "snnens/stdp.hpp"

namespace snnens {

struct LifParams {
  double tau_m = 100.0;     // ms
  double v_rest = -65.0;    // mV
  double v_reset = -65.0;   // mV
  double v_th = -52.0;      // mV
  double e_exc = 0.0;       // mV
  double e_inh = -100.0;    // mV
  double tau_ge = 1.0;      // ms
  double tau_gi = 2.0;      // ms
  double tau_ref = 5.0;     // ms

  static LifParams excitatory() { return {}; }
  static LifParams inhibitory() {
    LifParams p;
    p.tau_m = 10.0;
    p.tau_ref = 2.0;
    return p;
  }

  // Throws DomainError unless E_inh <= v_reset <= v_rest < v_th <= E_exc and
  // every time constant is positive.
  void validate() const;
  bool operator==(const LifParams&) const = default;
};

struct NeuronState {
  double v = -65.0;
  double g_e = 0.0;
  double g_i = 0.0;
  double refractory_remaining = 0.0;

  static NeuronState at_rest(const LifParams& p) { return {p.v_rest, 0.0, 0.0, 0.0}; }
  bool operator==(const NeuronState&) const = default;
};

struct StepResult {
  NeuronState state;
  bool spiked = false;
};

// One integration step. Conductance increments are added first, the membrane
// is advanced by explicit Euler using the incremented conductances, then the
// conductances decay exactly by exp(-dt / tau). `theta` raises the threshold.
StepResult step_neuron(const NeuronState& state, const LifParams& params, double dt,
                       double exc_in, double inh_in, double theta = 0.0);

// One homogeneous Poisson train per pixel at rate intensity / 255 * max_rate_hz.
std::vector<SpikeTrain> poisson_encode(std::span<const std::uint8_t> intensities,
                                       double max_rate_hz, double duration_ms,
                                       std::uint64_t seed);

struct LifNetwork {
  int n_input = 0;
  int n_exc = 0;
  int n_inh = 0;
  LifParams exc_params = LifParams::excitatory();
  LifParams inh_params = LifParams::inhibitory();
  StdpParams stdp;
  Matrix w_input_exc;        // n_input x n_exc, entries in [0, w_max]
  double w_exc_inh = 0.0;    // one-to-one
  double w_inh_exc = 0.0;    // lateral, every exc neuron except the partner
  std::vector<double> theta; // per exc neuron, mV >= 0
  std::vector<NeuronState> exc_state;
  std::vector<NeuronState> inh_state;

  // Number of lateral inhibitory connections (n_exc * (n_exc - 1)).
  std::size_t lateral_connection_count() const;
  void reset_state();
  bool operator==(const LifNetwork&) const = default;
};

struct NetworkOptions {
  LifParams exc_params = LifParams::excitatory();
  LifParams inh_params = LifParams::inhibitory();
  StdpParams stdp;
  double init_max_fraction = 0.3;    // initial weights ~ U(0, fraction * w_max]
  double exc_inh_drive_factor = 10.0;  // multiple of the threshold-crossing pulse
  double w_inh_exc = 1.0;
};

// Conductance pulse that, integrated over one synaptic time constant, lifts a
// resting neuron to threshold.
double threshold_crossing_pulse(const LifParams& p);

LifNetwork build_diehl_cook(int n_input, int n_exc, const NetworkOptions& options,
                            std::uint64_t init_seed);

struct SimOptions {
  double duration_ms = 350.0;
  double dt_ms = 0.5;
  bool plasticity = false;
};

// Runs the network on one input pattern. Neuron state starts at rest;
// weights and thresholds change only when plasticity is on. Returns the
// excitatory-layer spike trains.
SpikeRecord simulate(LifNetwork& network, std::span<const SpikeTrain> input,
                     const SimOptions& options);

}  // namespace snnens
