#pragma once

// Random instance generators shared by the unit tests and the acceptance suite.

#include <cmath>
#include <random>
#include <vector>

#include "snnens/combine.hpp"
#include "snnens/decode.hpp"
#include "snnens/spike.hpp"

namespace fuzz {

using Rng = std::mt19937_64;

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

// Strictly positive distribution; `sharpness` up to ~8 gives near one-hot vectors.
inline snnens::ClassProbabilities distribution(Rng& rng, std::size_t n, double sharpness) {
  std::normal_distribution<double> g(0.0, sharpness);
  std::vector<double> p(n);
  double z = 0.0;
  for (auto& v : p) z += v = std::exp(g(rng));
  for (auto& v : p) v /= z;
  return {p};
}

inline snnens::MemberWeights weights(Rng& rng, std::size_t m) {
  if (uniform_int(rng, 0, 3) == 0) return snnens::MemberWeights::uniform(m);
  std::vector<double> w(m);
  double z = 0.0;
  for (auto& v : w) z += v = uniform(rng, 0.0, 1.0);
  for (auto& v : w) v /= z;
  return snnens::MemberWeights(w);
}

struct CategoricalInstance {
  snnens::ClassProbabilities target;
  std::vector<snnens::ClassProbabilities> members;
  snnens::MemberWeights weights = snnens::MemberWeights::uniform(1);
};

// M <= 10, C <= 20; the target is one-hot half of the time.
inline CategoricalInstance categorical(Rng& rng) {
  const auto M = static_cast<std::size_t>(uniform_int(rng, 1, 10));
  const auto C = static_cast<std::size_t>(uniform_int(rng, 2, 20));
  CategoricalInstance inst;
  if (uniform_int(rng, 0, 1) == 0) {
    inst.target.p.assign(C, 0.0);
    inst.target.p[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(C) - 1))] = 1.0;
  } else {
    inst.target = distribution(rng, C, uniform(rng, 0.1, 4.0));
  }
  for (std::size_t m = 0; m < M; ++m) inst.members.push_back(distribution(rng, C, uniform(rng, 0.1, 8.0)));
  inst.weights = weights(rng, M);
  return inst;
}

struct PoissonInstance {
  snnens::TargetRates target;
  std::vector<snnens::PoissonMeans> members;
  snnens::MemberWeights weights = snnens::MemberWeights::uniform(1);
};

// M <= 10, C <= 20, W <= 8, member means log-uniform in [lambda_floor, 100].
// Targets are either one-hot rate codes or arbitrary means in [0, 100].
inline PoissonInstance poisson(Rng& rng) {
  const auto M = static_cast<std::size_t>(uniform_int(rng, 1, 10));
  const int C = uniform_int(rng, 1, 20);
  const auto W = static_cast<std::size_t>(uniform_int(rng, 1, 8));
  PoissonInstance inst;
  if (uniform_int(rng, 0, 1) == 0) {
    inst.target = snnens::encode_targets(uniform_int(rng, 0, C - 1), C, uniform(rng, 1.0, 100.0), W);
  } else {
    inst.target.lambda = snnens::Matrix(static_cast<std::size_t>(C), W);
    for (auto& v : inst.target.lambda.data()) v = uniform_int(rng, 0, 4) == 0 ? 0.0 : uniform(rng, 0.0, 100.0);
  }
  const double lo = std::log(snnens::kLambdaFloor), hi = std::log(100.0);
  for (std::size_t m = 0; m < M; ++m) {
    snnens::Matrix lam(static_cast<std::size_t>(C), W);
    for (auto& v : lam.data()) v = std::min(100.0, std::max(snnens::kLambdaFloor, std::exp(uniform(rng, lo, hi))));
    inst.members.push_back({lam});
  }
  inst.weights = weights(rng, M);
  return inst;
}

// Score vector with a unique strictly positive maximum.
inline std::vector<double> scores_with_unique_max(Rng& rng) {
  const auto C = static_cast<std::size_t>(uniform_int(rng, 2, 20));
  const double scale = std::pow(10.0, uniform(rng, -2.0, 3.0));
  std::vector<double> s(C);
  for (auto& v : s) v = uniform_int(rng, 0, 5) == 0 ? 0.0 : uniform(rng, 0.0, scale);
  const auto top = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(C) - 1));
  double best = 0.0;
  for (double v : s) best = std::max(best, v);
  s[top] = best + scale * uniform(rng, 1e-6, 1.0);
  return s;
}

// Valid record with dense trains and strictly ascending in-range times.
inline snnens::SpikeRecord record(Rng& rng, std::size_t index) {
  snnens::SpikeRecord r;
  r.example_id = "fz-" + std::to_string(index) + (uniform_int(rng, 0, 9) == 0 ? "\"q\\ué" : "");
  r.trial_index = uniform_int(rng, 0, 9);
  r.duration_ms = uniform(rng, 1.0, 1000.0);
  if (uniform_int(rng, 0, 4) != 0) r.label = uniform_int(rng, 0, 9);
  const int J = uniform_int(rng, 0, 12);
  for (int j = 0; j < J; ++j) {
    std::vector<double> times;
    const int n = uniform_int(rng, 0, 15);
    for (int k = 0; k < n; ++k) times.push_back(uniform(rng, 0.0, r.duration_ms));
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    r.trains.push_back({j, times});
  }
  return r;
}

}  // namespace fuzz
