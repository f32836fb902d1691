#include "snnens/combine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "snnens/errors.hpp"

namespace snnens {

MemberWeights MemberWeights::uniform(std::size_t n_members) {
  if (n_members == 0) throw DomainError("weights: need at least one member");
  return MemberWeights(std::vector<double>(n_members, 1.0 / static_cast<double>(n_members)));
}

MemberWeights::MemberWeights(std::vector<double> w) : w_(std::move(w)) {
  if (w_.empty()) throw DomainError("weights: need at least one member");
  double sum = 0.0;
  for (double v : w_) {
    if (!(v >= 0.0)) throw DomainError("weights: entries must be >= 0");
    sum += v;
  }
  // 1/M summed M times can miss 1 by a few ulps.
  if (std::abs(sum - 1.0) > 1e-12 * static_cast<double>(w_.size())) {
    throw DomainError("weights: entries must sum to 1");
  }
}

ClassProbabilities ngm(std::span<const ClassProbabilities> members, const MemberWeights& weights) {
  if (members.empty()) throw CombinationError("ngm: no members");
  if (members.size() != weights.size()) throw ShapeError("ngm: one weight per member required");
  const std::size_t n_classes = members.front().size();
  std::vector<double> log_q(n_classes, 0.0);
  for (std::size_t m = 0; m < members.size(); ++m) {
    if (members[m].size() != n_classes) throw ShapeError("ngm: members disagree on class count");
    if (weights[m] == 0.0) continue;
    for (std::size_t c = 0; c < n_classes; ++c) {
      const double q = members[m][c];
      if (!(q >= 0.0)) throw CombinationError("ngm: negative or NaN member probability");
      log_q[c] += weights[m] * std::log(std::max(q, kProbabilityFloor));
    }
  }
  // Normalise in log space; Z is formed relative to the largest term.
  const double hi = *std::max_element(log_q.begin(), log_q.end());
  ClassProbabilities out{std::vector<double>(n_classes)};
  double z = 0.0;
  for (std::size_t c = 0; c < n_classes; ++c) z += out.p[c] = std::exp(log_q[c] - hi);
  if (!(z > 0.0) || !std::isfinite(z)) throw CombinationError("ngm: every class was zeroed");
  for (double& v : out.p) v /= z;
  return out;
}

PoissonMeans gm_poisson(std::span<const PoissonMeans> members, const MemberWeights& weights) {
  if (members.empty()) throw CombinationError("gm_poisson: no members");
  if (members.size() != weights.size()) throw ShapeError("gm_poisson: one weight per member required");
  const std::size_t rows = members.front().n_classes();
  const std::size_t cols = members.front().n_windows();
  Matrix log_sum(rows, cols);
  for (std::size_t m = 0; m < members.size(); ++m) {
    const auto& lam = members[m].lambda;
    if (lam.rows() != rows || lam.cols() != cols) throw ShapeError("gm_poisson: member shapes differ");
    for (std::size_t i = 0; i < lam.data().size(); ++i) {
      const double v = lam.data()[i];
      if (!(v >= kLambdaFloor)) throw DomainError("gm_poisson: mean below the floor");
      log_sum.data()[i] += weights[m] * std::log(v);
    }
  }
  for (double& v : log_sum.data()) v = std::exp(v);
  return PoissonMeans{std::move(log_sum)};
}

namespace {

void check_same_shape(std::span<const Matrix> members, const char* who) {
  if (members.empty()) throw ShapeError(std::string(who) + ": no members");
  for (const auto& m : members) {
    if (m.rows() != members.front().rows() || m.cols() != members.front().cols()) {
      throw ShapeError(std::string(who) + ": member shapes differ");
    }
  }
}

}  // namespace

DecodeResult am_combine(std::span<const Matrix> members) {
  check_same_shape(members, "am_combine");
  const std::size_t n_classes = members.front().rows();
  const std::size_t n_windows = members.front().cols();
  const double scale = 1.0 / static_cast<double>(n_windows * members.size());
  DecodeResult out;
  out.scores.assign(n_classes, 0.0);
  for (const auto& m : members) {
    for (std::size_t c = 0; c < n_classes; ++c) {
      for (double v : m.row(c)) out.scores[c] += v;
    }
  }
  for (double& s : out.scores) s *= scale;
  out.predicted = static_cast<int>(argmax(out.scores));
  out.degenerate = std::count(out.scores.begin(), out.scores.end(),
                              out.scores[static_cast<std::size_t>(out.predicted)]) > 1;
  return out;
}

int mv_combine(std::span<const std::vector<int>> votes, int n_classes) {
  if (votes.empty()) throw ShapeError("mv_combine: no members");
  std::vector<int> member_votes;
  member_votes.reserve(votes.size());
  for (const auto& windows : votes) member_votes.push_back(majority_vote(windows, n_classes));
  return majority_vote(member_votes, n_classes);
}

int am_mv_combine(std::span<const Matrix> members) {
  check_same_shape(members, "am_mv_combine");
  const std::size_t n_classes = members.front().rows();
  const std::size_t n_windows = members.front().cols();
  std::vector<int> window_votes(n_windows);
  std::vector<double> mean(n_classes);
  for (std::size_t w = 0; w < n_windows; ++w) {
    std::fill(mean.begin(), mean.end(), 0.0);
    for (const auto& m : members) {
      for (std::size_t c = 0; c < n_classes; ++c) mean[c] += m(c, w);
    }
    for (double& v : mean) v /= static_cast<double>(members.size());
    window_votes[w] = static_cast<int>(argmax(mean));
  }
  return majority_vote(window_votes, static_cast<int>(n_classes));
}

}  // namespace snnens
