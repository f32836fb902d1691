#pragma once

// Ensemble combiners. ngm and gm_poisson minimise the weighted KL divergence
// to the members and therefore carry the ambiguity-decomposition guarantee;
// am, mv and am_mv are the usual arithmetic-mean and voting baselines.

#include <cstddef>
#include <span>
#include <vector>

#include "snnens/decode.hpp"
#include "snnens/spike.hpp"

namespace snnens {

// Per-member weights, non-negative, summing to 1.
class MemberWeights {
 public:
  static MemberWeights uniform(std::size_t n_members);
  // Throws DomainError unless entries are >= 0 and sum to 1 within 1e-12.
  explicit MemberWeights(std::vector<double> w);

  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t m) const { return w_[m]; }
  std::span<const double> values() const { return w_; }

 private:
  std::vector<double> w_;
};

// Entries are floored at this value inside ngm so an exact zero from one
// member cannot annihilate a class.
inline constexpr double kProbabilityFloor = 1e-300;

ClassProbabilities ngm(std::span<const ClassProbabilities> members, const MemberWeights& weights);

PoissonMeans gm_poisson(std::span<const PoissonMeans> members, const MemberWeights& weights);

// M x C x W member rates: members[m] is a C x W matrix.
DecodeResult am_combine(std::span<const Matrix> members);

// votes[m] holds member m's per-window class votes.
int mv_combine(std::span<const std::vector<int>> votes, int n_classes);

int am_mv_combine(std::span<const Matrix> members);

}  // namespace snnens
