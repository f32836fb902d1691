#pragma once

// KL divergences and the ambiguity decompositions
//
//   ensemble_error = avg_member_error - ambiguity
//
// for squared error (arithmetic mean), categorical targets (ngm) and Poisson
// targets (gm_poisson). All divergences are in nats.

#include <span>
#include <vector>

#include "snnens/combine.hpp"
#include "snnens/decode.hpp"
#include "snnens/spike.hpp"

namespace snnens {

struct AdReport {
  double ensemble_error = 0.0;
  double avg_member_error = 0.0;
  double ambiguity = 0.0;
  double residual = 0.0;  // |ensemble - (avg_member - ambiguity)|
};

AdReport make_report(double ensemble_error, double avg_member_error, double ambiguity);

AdReport ad_regression(double y, std::span<const double> preds, const MemberWeights& weights);

// sum_c p_c ln(p_c / q_c); q floored at kProbabilityFloor, p_c = 0 terms vanish.
double kl_categorical(const ClassProbabilities& p, const ClassProbabilities& q);

AdReport ad_categorical(const ClassProbabilities& target,
                        std::span<const ClassProbabilities> members, const MemberWeights& weights);

// KL(Poisson(lambda) || Poisson(lambda_hat)) = lambda ln(lambda / lambda_hat) + lambda_hat - lambda,
// with 0 ln 0 = 0. Throws DomainError if lambda_hat < kLambdaFloor.
double kl_poisson(double lambda, double lambda_hat);

// Sum of kl_poisson over every class and window.
double kl_poisson(const Matrix& lambda, const Matrix& lambda_hat);

AdReport ad_poisson(const TargetRates& target, std::span<const PoissonMeans> members,
                    const MemberWeights& weights);

// Example-wise mean of each term; the identity survives by linearity.
AdReport average_reports(std::span<const AdReport> reports);

}  // namespace snnens
