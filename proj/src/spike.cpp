#include "snnens/spike.hpp"

#include <cmath>
#include <sstream>

#include "snnens/errors.hpp"

namespace snnens {

WindowSpec::WindowSpec(double window_ms, double duration_ms)
    : window_ms_(window_ms), duration_ms_(duration_ms) {
  if (!(window_ms > 0.0) || !(duration_ms > 0.0)) {
    throw DomainError("window and duration must be positive");
  }
  // Small slack so that e.g. 350 / 10 is not floored to 34 by rounding.
  const double ratio = duration_ms / window_ms;
  n_windows_ = static_cast<std::size_t>(std::floor(ratio + 1e-9));
  exact_fit_ = std::abs(ratio - std::round(ratio)) < 1e-9;
  if (n_windows_ == 0) throw DomainError("window longer than duration");
}

std::optional<std::size_t> WindowSpec::index_of(double t_ms) const {
  if (!(t_ms >= 0.0) || t_ms > duration_ms_) return std::nullopt;
  auto idx = static_cast<std::size_t>(std::floor(t_ms / window_ms_));
  // A spike exactly at the end of the interval belongs to the last window
  // when the windows tile the whole duration.
  if (idx >= n_windows_) {
    if (exact_fit_ && t_ms >= duration_ms_) return n_windows_ - 1;
    return std::nullopt;
  }
  return idx;
}

double RateMatrix::total(std::size_t neuron) const {
  double sum = 0.0;
  for (double v : counts.row(neuron)) sum += v;
  return sum;
}

std::vector<std::vector<std::size_t>> PopulationMap::members() const {
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(n_classes));
  for (std::size_t j = 0; j < assignment.size(); ++j) {
    const int c = assignment[j];
    if (c < 0 || c >= n_classes) throw DomainError("population assignment out of range");
    out[static_cast<std::size_t>(c)].push_back(j);
  }
  return out;
}

std::vector<Violation> validate_record(const SpikeRecord& record) {
  std::vector<Violation> out;
  if (!(record.duration_ms > 0.0) || !std::isfinite(record.duration_ms)) {
    out.push_back({ViolationKind::kBadDuration, -1, "duration_ms must be positive and finite"});
  }
  for (std::size_t j = 0; j < record.trains.size(); ++j) {
    const auto& train = record.trains[j];
    if (train.neuron_id != static_cast<int>(j)) {
      std::ostringstream msg;
      msg << "train " << j << " carries neuron_id " << train.neuron_id;
      out.push_back({ViolationKind::kBadNeuronId, static_cast<int>(j), msg.str()});
    }
    for (std::size_t i = 0; i < train.times.size(); ++i) {
      const double t = train.times[i];
      if (!std::isfinite(t)) {
        out.push_back({ViolationKind::kNonFinite, static_cast<int>(j), "non-finite spike time"});
        continue;
      }
      if (t < 0.0 || t > record.duration_ms) {
        std::ostringstream msg;
        msg << "neuron " << j << ": spike at " << t << " ms out of range [0, "
            << record.duration_ms << "]";
        out.push_back({ViolationKind::kOutOfRange, static_cast<int>(j), msg.str()});
      }
      if (i > 0 && !(train.times[i - 1] < t)) {
        std::ostringstream msg;
        msg << "neuron " << j << ": times not ascending at index " << i;
        out.push_back({ViolationKind::kNotAscending, static_cast<int>(j), msg.str()});
      }
    }
  }
  return out;
}

bool is_distribution(const ClassProbabilities& q, double tol) {
  double sum = 0.0;
  for (double v : q.p) {
    if (!(v >= 0.0) || !std::isfinite(v)) return false;
    sum += v;
  }
  return !q.p.empty() && std::abs(sum - 1.0) <= tol;
}

PoissonMeans floor_means(Matrix lambda, double floor) {
  for (double& v : lambda.data()) {
    if (!(v >= floor)) v = floor;
  }
  return PoissonMeans{std::move(lambda)};
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

int majority_vote(std::span<const int> votes, int n_classes) {
  std::vector<double> tally(static_cast<std::size_t>(n_classes), 0.0);
  for (int v : votes) {
    if (v < 0 || v >= n_classes) throw DomainError("vote is not a valid class index");
    tally[static_cast<std::size_t>(v)] += 1.0;
  }
  return static_cast<int>(argmax(tally));
}

}  // namespace snnens
