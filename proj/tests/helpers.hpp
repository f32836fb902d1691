#pragma once

#include <string>
#include <vector>

#include "snnens/spike.hpp"

namespace testing {

inline snnens::SpikeRecord make_record(std::vector<std::vector<double>> times, double duration_ms = 350.0,
                                       std::optional<int> label = std::nullopt,
                                       std::string id = "ex", int trial = 0) {
  snnens::SpikeRecord r;
  r.example_id = std::move(id);
  r.trial_index = trial;
  r.duration_ms = duration_ms;
  r.label = label;
  for (std::size_t j = 0; j < times.size(); ++j) {
    r.trains.push_back({static_cast<int>(j), std::move(times[j])});
  }
  return r;
}

// n evenly spaced spikes strictly inside [0, duration).
inline std::vector<double> spikes(int n, double duration_ms = 350.0) {
  std::vector<double> t;
  for (int i = 0; i < n; ++i) t.push_back(duration_ms * (i + 0.5) / n);
  return t;
}

inline snnens::RateMatrix rates(std::vector<std::vector<double>> rows) {
  snnens::RateMatrix r;
  r.counts = snnens::Matrix(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (std::size_t w = 0; w < rows[j].size(); ++w) r.counts(j, w) = rows[j][w];
  }
  return r;
}

inline snnens::Matrix matrix(std::vector<std::vector<double>> rows) { return rates(std::move(rows)).counts; }

}  // namespace testing
