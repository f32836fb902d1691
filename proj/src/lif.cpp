#include "snnens/lif.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "snnens/errors.hpp"
#include "snnens/training.hpp"

namespace snnens {

void LifParams::validate() const {
  if (!(e_inh <= v_reset && v_reset <= v_rest && v_rest < v_th && v_th <= e_exc)) {
    throw DomainError("lif: require E_inh <= v_reset <= v_rest < v_th <= E_exc");
  }
  if (!(tau_m > 0.0 && tau_ge > 0.0 && tau_gi > 0.0 && tau_ref > 0.0)) {
    throw DomainError("lif: time constants must be positive");
  }
}

StepResult step_neuron(const NeuronState& state, const LifParams& p, double dt, double exc_in,
                       double inh_in, double theta) {
  StepResult out{state, false};
  NeuronState& s = out.state;
  s.g_e += exc_in;
  s.g_i += inh_in;

  if (s.refractory_remaining > 0.0) {
    s.v = p.v_reset;
    s.refractory_remaining -= dt;
    if (s.refractory_remaining < 1e-9) s.refractory_remaining = 0.0;
  } else {
    const double dv =
        (p.v_rest - s.v) + s.g_e * (p.e_exc - s.v) + s.g_i * (p.e_inh - s.v);
    s.v += dt / p.tau_m * dv;
    // A large inhibitory pulse can overshoot the reversal potential under
    // explicit Euler; the true solution never crosses it.
    s.v = std::max(s.v, p.e_inh);
    if (s.v >= p.v_th + theta) {
      out.spiked = true;
      s.v = p.v_reset;
      s.refractory_remaining = p.tau_ref;
    }
  }

  s.g_e *= std::exp(-dt / p.tau_ge);
  s.g_i *= std::exp(-dt / p.tau_gi);

  if (!std::isfinite(s.v) || !std::isfinite(s.g_e) || !std::isfinite(s.g_i)) {
    throw IntegrationError("lif: non-finite neuron state");
  }
  return out;
}

std::vector<SpikeTrain> poisson_encode(std::span<const std::uint8_t> intensities,
                                       double max_rate_hz, double duration_ms,
                                       std::uint64_t seed) {
  if (!(max_rate_hz > 0.0)) throw DomainError("poisson_encode: max_rate_hz must be > 0");
  std::mt19937_64 rng(seed);
  std::vector<SpikeTrain> trains(intensities.size());
  for (std::size_t i = 0; i < intensities.size(); ++i) {
    trains[i].neuron_id = static_cast<int>(i);
    if (intensities[i] == 0) continue;
    const double rate_per_ms = intensities[i] / 255.0 * max_rate_hz / 1000.0;
    std::exponential_distribution<double> gap(rate_per_ms);
    double t = gap(rng);
    while (t < duration_ms) {
      trains[i].times.push_back(t);
      t += gap(rng);
    }
  }
  return trains;
}

std::size_t LifNetwork::lateral_connection_count() const {
  const auto n = static_cast<std::size_t>(n_exc);
  return n * (n > 0 ? n - 1 : 0);
}

void LifNetwork::reset_state() {
  exc_state.assign(static_cast<std::size_t>(n_exc), NeuronState::at_rest(exc_params));
  inh_state.assign(static_cast<std::size_t>(n_inh), NeuronState::at_rest(inh_params));
}

double threshold_crossing_pulse(const LifParams& p) {
  return (p.v_th - p.v_rest) * p.tau_m / (p.tau_ge * (p.e_exc - p.v_rest));
}

LifNetwork build_diehl_cook(int n_input, int n_exc, const NetworkOptions& options,
                            std::uint64_t init_seed) {
  if (n_input <= 0 || n_exc <= 0) throw DomainError("build_diehl_cook: sizes must be > 0");
  options.exc_params.validate();
  options.inh_params.validate();
  options.stdp.validate();

  LifNetwork net;
  net.n_input = n_input;
  net.n_exc = n_exc;
  net.n_inh = n_exc;
  net.exc_params = options.exc_params;
  net.inh_params = options.inh_params;
  net.stdp = options.stdp;
  net.w_input_exc = Matrix(static_cast<std::size_t>(n_input), static_cast<std::size_t>(n_exc));

  // U(0, hi]: draw from [0, hi) and reflect.
  const double hi = options.init_max_fraction * options.stdp.w_max;
  std::mt19937_64 rng(init_seed);
  std::uniform_real_distribution<double> uniform(0.0, hi);
  for (double& w : net.w_input_exc.data()) w = hi - uniform(rng);

  net.w_exc_inh = options.exc_inh_drive_factor * threshold_crossing_pulse(options.inh_params);
  net.w_inh_exc = options.w_inh_exc;
  net.theta.assign(static_cast<std::size_t>(n_exc), 0.0);
  net.reset_state();
  return net;
}

namespace {

// Input spike indices bucketed by the step in which they are delivered.
std::vector<std::vector<std::size_t>> bucket_input(std::span<const SpikeTrain> input,
                                                   std::size_t n_steps, double dt) {
  std::vector<std::vector<std::size_t>> buckets(n_steps);
  for (std::size_t i = 0; i < input.size(); ++i) {
    for (double t : input[i].times) {
      if (t < 0.0) continue;
      const auto k = static_cast<std::size_t>(t / dt);
      if (k < n_steps) buckets[k].push_back(i);
    }
  }
  return buckets;
}

}  // namespace

SpikeRecord simulate(LifNetwork& net, std::span<const SpikeTrain> input, const SimOptions& opt) {
  if (static_cast<int>(input.size()) != net.n_input) {
    throw ShapeError("simulate: input has " + std::to_string(input.size()) +
                     " trains, network expects " + std::to_string(net.n_input));
  }
  if (!(opt.dt_ms > 0.0) || !(opt.duration_ms > 0.0)) {
    throw DomainError("simulate: dt and duration must be positive");
  }
  const auto n_exc = static_cast<std::size_t>(net.n_exc);
  const auto n_steps = static_cast<std::size_t>(std::llround(std::floor(opt.duration_ms / opt.dt_ms + 1e-9)));
  const double dt = opt.dt_ms;

  net.reset_state();
  const auto buckets = bucket_input(input, n_steps, dt);

  SpikeRecord record;
  record.duration_ms = opt.duration_ms;
  record.trains.resize(n_exc);
  for (std::size_t j = 0; j < n_exc; ++j) record.trains[j].neuron_id = static_cast<int>(j);

  TraceState traces;
  if (opt.plasticity) traces.x_pre.assign(static_cast<std::size_t>(net.n_input), 0.0);
  const double theta_decay = std::exp(-dt / net.stdp.tau_theta);

  std::vector<double> exc_drive(n_exc);
  std::vector<char> exc_spiked(n_exc, 0);
  std::vector<char> inh_spiked(n_exc, 0);
  std::vector<int> new_exc_spikes;
  new_exc_spikes.reserve(n_exc);

  for (std::size_t k = 0; k < n_steps; ++k) try {
    std::fill(exc_drive.begin(), exc_drive.end(), 0.0);
    for (std::size_t i : buckets[k]) {
      const auto w = net.w_input_exc.row(i);
      for (std::size_t j = 0; j < n_exc; ++j) exc_drive[j] += w[j];
    }
    if (opt.plasticity) update_trace(traces, dt, net.stdp.tau_trace, buckets[k]);

    // Spikes from the previous step arrive now (one-step synaptic delay).
    std::size_t n_inh_spikes = 0;
    for (char s : inh_spiked) n_inh_spikes += static_cast<std::size_t>(s);

    const double t_end = static_cast<double>(k + 1) * dt;
    new_exc_spikes.clear();
    for (std::size_t j = 0; j < n_exc; ++j) {
      const double lateral =
          net.w_inh_exc * static_cast<double>(n_inh_spikes - static_cast<std::size_t>(inh_spiked[j]));
      const auto r = step_neuron(net.exc_state[j], net.exc_params, dt, exc_drive[j], lateral,
                                 net.theta[j]);
      net.exc_state[j] = r.state;
      if (r.spiked) new_exc_spikes.push_back(static_cast<int>(j));
    }
    for (std::size_t j = 0; j < n_exc; ++j) {
      const double drive = exc_spiked[j] ? net.w_exc_inh : 0.0;
      const auto r = step_neuron(net.inh_state[j], net.inh_params, dt, drive, 0.0);
      net.inh_state[j] = r.state;
      inh_spiked[j] = r.spiked ? 1 : 0;
    }

    std::fill(exc_spiked.begin(), exc_spiked.end(), 0);
    for (int j : new_exc_spikes) {
      exc_spiked[static_cast<std::size_t>(j)] = 1;
      record.trains[static_cast<std::size_t>(j)].times.push_back(t_end);
    }

    if (opt.plasticity) {
      for (double& th : net.theta) th *= theta_decay;
      for (int j : new_exc_spikes) apply_stdp_on_postspike(net, j, traces);
    }
  } catch (const IntegrationError& e) {
    std::ostringstream msg;
    msg << "simulate: step " << k << " (t = " << static_cast<double>(k) * dt << " ms): " << e.what();
    throw IntegrationError(msg.str());
  }
  return record;
}

}  // namespace snnens
