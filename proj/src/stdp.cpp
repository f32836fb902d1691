#include "snnens/stdp.hpp"

#include <cmath>

#include "snnens/errors.hpp"

namespace snnens {

void StdpParams::validate() const {
  if (!(eta >= 0.0)) throw DomainError("stdp: eta must be >= 0");
  if (!(x_tar >= 0.0)) throw DomainError("stdp: x_tar must be >= 0");
  if (!(w_max > 0.0)) throw DomainError("stdp: w_max must be > 0");
  if (!(mu > 0.0 && mu <= 1.0)) throw DomainError("stdp: mu must lie in (0, 1]");
  if (!(tau_trace > 0.0)) throw DomainError("stdp: tau_trace must be > 0");
  if (!(theta_plus >= 0.0)) throw DomainError("stdp: theta_plus must be >= 0");
  if (!(tau_theta > 0.0)) throw DomainError("stdp: tau_theta must be > 0");
}

double stdp_delta(double w, double x_pre, const StdpParams& p) {
  const double headroom = std::max(p.w_max - w, 0.0);
  return p.eta * (x_pre - p.x_tar) * std::pow(headroom, p.mu);
}

double update_trace(double x, double dt, double tau_trace, bool presyn_spiked) {
  x *= std::exp(-dt / tau_trace);
  if (presyn_spiked) x += 1.0;
  return x;
}

void update_trace(TraceState& traces, double dt, double tau_trace,
                  std::span<const std::size_t> spiking_inputs) {
  const double decay = std::exp(-dt / tau_trace);
  for (double& x : traces.x_pre) x *= decay;
  for (std::size_t i : spiking_inputs) traces.x_pre[i] += 1.0;
}

}  // namespace snnens
