#include "snnens/ambiguity.hpp"

#include <algorithm>
#include <cmath>

#include "snnens/errors.hpp"

namespace snnens {

AdReport make_report(double ensemble_error, double avg_member_error, double ambiguity) {
  return {ensemble_error, avg_member_error, ambiguity,
          std::abs(ensemble_error - (avg_member_error - ambiguity))};
}

AdReport ad_regression(double y, std::span<const double> preds, const MemberWeights& weights) {
  if (preds.empty()) throw DomainError("ad_regression: no members");
  if (preds.size() != weights.size()) throw ShapeError("ad_regression: one weight per member required");
  double ens = 0.0;
  for (std::size_t m = 0; m < preds.size(); ++m) ens += weights[m] * preds[m];
  double avg = 0.0;
  double amb = 0.0;
  for (std::size_t m = 0; m < preds.size(); ++m) {
    avg += weights[m] * (y - preds[m]) * (y - preds[m]);
    amb += weights[m] * (ens - preds[m]) * (ens - preds[m]);
  }
  return make_report((y - ens) * (y - ens), avg, amb);
}

double kl_categorical(const ClassProbabilities& p, const ClassProbabilities& q) {
  if (p.size() != q.size()) throw ShapeError("kl_categorical: size mismatch");
  double kl = 0.0;
  for (std::size_t c = 0; c < p.size(); ++c) {
    if (p[c] <= 0.0) continue;
    kl += p[c] * (std::log(p[c]) - std::log(std::max(q[c], kProbabilityFloor)));
  }
  return kl;
}

AdReport ad_categorical(const ClassProbabilities& target,
                        std::span<const ClassProbabilities> members, const MemberWeights& weights) {
  const ClassProbabilities ensemble = ngm(members, weights);
  double avg = 0.0;
  double amb = 0.0;
  for (std::size_t m = 0; m < members.size(); ++m) {
    avg += weights[m] * kl_categorical(target, members[m]);
    amb += weights[m] * kl_categorical(ensemble, members[m]);
  }
  return make_report(kl_categorical(target, ensemble), avg, amb);
}

double kl_poisson(double lambda, double lambda_hat) {
  if (!(lambda_hat >= kLambdaFloor)) throw DomainError("kl_poisson: estimate below the floor");
  if (!(lambda >= 0.0)) throw DomainError("kl_poisson: target mean must be >= 0");
  if (lambda == 0.0) return lambda_hat;
  return lambda * std::log(lambda / lambda_hat) + lambda_hat - lambda;
}

double kl_poisson(const Matrix& lambda, const Matrix& lambda_hat) {
  if (lambda.rows() != lambda_hat.rows() || lambda.cols() != lambda_hat.cols()) {
    throw ShapeError("kl_poisson: shape mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < lambda.data().size(); ++i) {
    sum += kl_poisson(lambda.data()[i], lambda_hat.data()[i]);
  }
  return sum;
}

AdReport ad_poisson(const TargetRates& target, std::span<const PoissonMeans> members,
                    const MemberWeights& weights) {
  const PoissonMeans ensemble = gm_poisson(members, weights);
  double avg = 0.0;
  double amb = 0.0;
  for (std::size_t m = 0; m < members.size(); ++m) {
    avg += weights[m] * kl_poisson(target.lambda, members[m].lambda);
    amb += weights[m] * kl_poisson(ensemble.lambda, members[m].lambda);
  }
  return make_report(kl_poisson(target.lambda, ensemble.lambda), avg, amb);
}

AdReport average_reports(std::span<const AdReport> reports) {
  AdReport out;
  if (reports.empty()) return out;
  for (const auto& r : reports) {
    out.ensemble_error += r.ensemble_error;
    out.avg_member_error += r.avg_member_error;
    out.ambiguity += r.ambiguity;
  }
  const double n = static_cast<double>(reports.size());
  return make_report(out.ensemble_error / n, out.avg_member_error / n, out.ambiguity / n);
}

}  // namespace snnens
