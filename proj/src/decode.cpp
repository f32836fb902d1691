#include "snnens/decode.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "snnens/errors.hpp"

namespace snnens {

TrialRates estimate_rates(std::span<const SpikeRecord> trials, const WindowSpec& windows) {
  if (trials.empty()) throw ShapeError("estimate_rates: no trials");
  const std::size_t n_neurons = trials.front().n_neurons();
  const double duration = trials.front().duration_ms;
  TrialRates out;
  out.n_trials = static_cast<int>(trials.size());
  out.rates.counts = Matrix(n_neurons, windows.n_windows());
  for (const auto& rec : trials) {
    if (rec.n_neurons() != n_neurons || rec.duration_ms != duration) {
      throw ShapeError("estimate_rates: trials of " + rec.example_id +
                       " disagree on duration or neuron count");
    }
    for (std::size_t j = 0; j < n_neurons; ++j) {
      for (double t : rec.trains[j].times) {
        if (auto w = windows.index_of(t)) out.rates.counts(j, *w) += 1.0;
      }
    }
  }
  const double k = static_cast<double>(trials.size());
  for (double& v : out.rates.counts.data()) v /= k;
  return out;
}

Matrix population_window_means(const RateMatrix& rates, const PopulationMap& pop) {
  if (pop.assignment.size() != rates.n_neurons()) {
    throw ShapeError("population map does not cover the rate matrix");
  }
  const auto members = pop.members();
  Matrix out(members.size(), rates.n_windows());
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (members[c].empty()) {
      throw DecodeError("class " + std::to_string(c) + " has no member neurons");
    }
    for (std::size_t w = 0; w < rates.n_windows(); ++w) {
      double sum = 0.0;
      for (std::size_t j : members[c]) sum += rates.counts(j, w);
      out(c, w) = sum / static_cast<double>(members[c].size());
    }
  }
  return out;
}

namespace {

DecodeResult finish(std::vector<double> scores) {
  DecodeResult r;
  r.predicted = static_cast<int>(argmax(scores));
  const double best = scores[static_cast<std::size_t>(r.predicted)];
  r.degenerate = std::count(scores.begin(), scores.end(), best) > 1;
  r.scores = std::move(scores);
  return r;
}

}  // namespace

DecodeResult hmfr_decode(const RateMatrix& rates, const PopulationMap& pop) {
  const Matrix per_window = population_window_means(rates, pop);
  std::vector<double> scores(per_window.rows(), 0.0);
  for (std::size_t c = 0; c < per_window.rows(); ++c) {
    for (double v : per_window.row(c)) scores[c] += v;
  }
  return finish(std::move(scores));
}

Normalization parse_normalization(const std::string& name) {
  if (name == "softmax") return Normalization::kSoftmax;
  if (name == "activity") return Normalization::kActivity;
  if (name == "max") return Normalization::kMax;
  throw DomainError("unknown normalization '" + name + "'");
}

std::string to_string(Normalization method) {
  switch (method) {
    case Normalization::kSoftmax: return "softmax";
    case Normalization::kActivity: return "activity";
    case Normalization::kMax: return "max";
  }
  return "?";
}

std::vector<double> max_ratio(std::span<const double> scores) {
  std::vector<double> out(scores.begin(), scores.end());
  const double hi = scores.empty() ? 0.0 : *std::max_element(scores.begin(), scores.end());
  if (hi > 0.0) {
    for (double& v : out) v /= hi;
  }
  return out;
}

ClassProbabilities normalize(std::span<const double> scores, Normalization method) {
  if (scores.empty()) throw DomainError("normalize: empty score vector");
  for (double s : scores) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("normalize: scores must be finite and >= 0");
  }
  const auto n = scores.size();
  ClassProbabilities out{std::vector<double>(n)};
  if (method == Normalization::kSoftmax) {
    const double hi = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (std::size_t c = 0; c < n; ++c) z += out.p[c] = std::exp(scores[c] - hi);
    for (double& v : out.p) v /= z;
    return out;
  }
  // activity: r / sum r. max: r / r_max, then renormalized, which is the same
  // distribution as activity up to rounding; it is computed as written.
  const std::vector<double> base =
      method == Normalization::kMax ? max_ratio(scores) : std::vector<double>(scores.begin(), scores.end());
  const double z = std::accumulate(base.begin(), base.end(), 0.0);
  if (z <= 0.0) {
    std::fill(out.p.begin(), out.p.end(), 1.0 / static_cast<double>(n));
    return out;
  }
  for (std::size_t c = 0; c < n; ++c) out.p[c] = base[c] / z;
  return out;
}

BayesModel::BayesModel(std::size_t n_neurons, std::size_t n_classes, std::size_t n_windows,
                       double window_ms)
    : n_neurons_(n_neurons),
      n_classes_(n_classes),
      n_windows_(n_windows),
      window_ms_(window_ms),
      f_(n_neurons * n_classes * n_windows, kLambdaFloor) {
  priors.p.assign(n_classes, n_classes ? 1.0 / static_cast<double>(n_classes) : 0.0);
}

namespace {

std::vector<double> class_counts(std::span<const LabeledRates> training, int n_classes,
                                 const char* who) {
  if (n_classes <= 0) throw FitError(std::string(who) + ": need at least one class");
  std::vector<double> seen(static_cast<std::size_t>(n_classes), 0.0);
  for (const auto& ex : training) {
    if (ex.label < 0 || ex.label >= n_classes) {
      throw FitError(std::string(who) + ": label out of range");
    }
    seen[static_cast<std::size_t>(ex.label)] += 1.0;
  }
  for (std::size_t c = 0; c < seen.size(); ++c) {
    if (seen[c] == 0.0) {
      throw FitError(std::string(who) + ": class " + std::to_string(c) + " has no training examples");
    }
  }
  return seen;
}

}  // namespace

BayesModel fit_bayes(std::span<const LabeledRates> training, int n_classes, double window_ms,
                     Prior prior) {
  const auto seen = class_counts(training, n_classes, "fit_bayes");
  const auto& first = training.front().rates.rates;
  const std::size_t n_neurons = first.n_neurons();
  const std::size_t n_windows = first.n_windows();
  BayesModel model(n_neurons, static_cast<std::size_t>(n_classes), n_windows, window_ms);
  std::fill(model.values().begin(), model.values().end(), 0.0);

  for (const auto& ex : training) {
    const auto& r = ex.rates.rates;
    if (r.n_neurons() != n_neurons || r.n_windows() != n_windows) {
      throw ShapeError("fit_bayes: training rate matrices differ in shape");
    }
    const auto c = static_cast<std::size_t>(ex.label);
    for (std::size_t j = 0; j < n_neurons; ++j) {
      for (std::size_t w = 0; w < n_windows; ++w) model.f(j, c, w) += r.counts(j, w);
    }
  }
  for (std::size_t j = 0; j < n_neurons; ++j) {
    for (std::size_t c = 0; c < seen.size(); ++c) {
      for (std::size_t w = 0; w < n_windows; ++w) {
        model.f(j, c, w) = std::max(model.f(j, c, w) / seen[c], kLambdaFloor);
      }
    }
  }
  if (prior == Prior::kEmpirical) {
    const double total = std::accumulate(seen.begin(), seen.end(), 0.0);
    for (std::size_t c = 0; c < seen.size(); ++c) model.priors.p[c] = seen[c] / total;
  }
  return model;
}

BayesResult bayes_decode(const TrialRates& observed, const BayesModel& model) {
  const auto& r = observed.rates;
  if (r.n_neurons() != model.n_neurons() || r.n_windows() != model.n_windows()) {
    throw ShapeError("bayes_decode: rate matrix does not match the model");
  }
  const std::size_t n_classes = model.n_classes();
  BayesResult out;
  out.log_scores.assign(n_classes, 0.0);

  // Terms that do not depend on the class cancel in the posterior but are
  // kept so log_scores are true log joint probabilities.
  double log_factorials = 0.0;
  std::vector<double> counts(r.counts.data());
  if (observed.n_trials > 1) {
    for (double& n : counts) n = std::round(n);
  }
  for (double n : counts) log_factorials += std::lgamma(n + 1.0);

  for (std::size_t c = 0; c < n_classes; ++c) {
    double ll = 0.0;
    for (std::size_t j = 0; j < model.n_neurons(); ++j) {
      for (std::size_t w = 0; w < model.n_windows(); ++w) {
        const double f = model.f(j, c, w);
        ll += counts[j * model.n_windows() + w] * std::log(f) - f;
      }
    }
    out.log_scores[c] = ll - log_factorials + std::log(model.priors.p[c]);
  }

  const double hi = *std::max_element(out.log_scores.begin(), out.log_scores.end());
  out.posterior.p.resize(n_classes);
  double z = 0.0;
  for (std::size_t c = 0; c < n_classes; ++c) z += out.posterior.p[c] = std::exp(out.log_scores[c] - hi);
  for (double& p : out.posterior.p) p /= z;
  out.predicted = static_cast<int>(argmax(out.log_scores));
  return out;
}

PvModel fit_pv(std::span<const LabeledRates> training, int n_classes) {
  const auto seen = class_counts(training, n_classes, "fit_pv");
  const std::size_t n_neurons = training.front().rates.rates.n_neurons();
  PvModel model;
  model.w = Matrix(n_neurons, static_cast<std::size_t>(n_classes));
  for (const auto& ex : training) {
    const auto& r = ex.rates.rates;
    if (r.n_neurons() != n_neurons) throw ShapeError("fit_pv: neuron count mismatch");
    for (std::size_t j = 0; j < n_neurons; ++j) {
      model.w(j, static_cast<std::size_t>(ex.label)) += r.total(j);
    }
  }
  for (std::size_t j = 0; j < n_neurons; ++j) {
    bool any = false;
    for (std::size_t c = 0; c < seen.size(); ++c) {
      model.w(j, c) /= seen[c];
      any = any || model.w(j, c) > 0.0;
    }
    if (!any) model.inert.push_back(static_cast<int>(j));
  }
  return model;
}

DecodeResult pv_decode(const RateMatrix& rates, const PvModel& model) {
  if (rates.n_neurons() != model.w.rows()) throw ShapeError("pv_decode: neuron count mismatch");
  const std::size_t n_classes = model.w.cols();
  double total = 0.0;
  std::vector<double> r(rates.n_neurons());
  for (std::size_t j = 0; j < r.size(); ++j) total += r[j] = rates.total(j);
  if (total <= 0.0) {
    auto res = finish(std::vector<double>(n_classes, 1.0 / static_cast<double>(n_classes)));
    res.degenerate = true;
    return res;
  }
  std::vector<double> scores(n_classes, 0.0);
  for (std::size_t c = 0; c < n_classes; ++c) {
    double s = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) s += model.w(j, c) * r[j];
    scores[c] = s / total;
  }
  return finish(std::move(scores));
}

TargetRates encode_targets(int label, int n_classes, double r_max, std::size_t n_windows) {
  if (label < 0 || label >= n_classes) throw DomainError("encode_targets: label out of range");
  if (!(r_max > 0.0)) throw DomainError("encode_targets: r_max must be > 0");
  TargetRates t{Matrix(static_cast<std::size_t>(n_classes), n_windows, 0.0)};
  for (double& v : t.lambda.row(static_cast<std::size_t>(label))) v = r_max;
  return t;
}

CfrResult cfr_decode(const RateMatrix& rates, const PopulationMap& pop) {
  if (pop.assignment.size() != rates.n_neurons()) {
    throw ShapeError("cfr_decode: population map does not cover the rate matrix");
  }
  const auto members = pop.members();
  const std::size_t n_windows = rates.n_windows();
  Matrix means(members.size(), n_windows);
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (members[c].empty()) throw DecodeError("class " + std::to_string(c) + " has no member neurons");
    const double inv = 1.0 / static_cast<double>(members[c].size());
    for (std::size_t w = 0; w < n_windows; ++w) {
      double log_sum = 0.0;
      for (std::size_t j : members[c]) log_sum += std::log(std::max(rates.counts(j, w), kLambdaFloor));
      means(c, w) = std::exp(log_sum * inv);
    }
  }
  CfrResult out;
  out.window_votes.resize(n_windows);
  std::vector<double> column(members.size());
  for (std::size_t w = 0; w < n_windows; ++w) {
    for (std::size_t c = 0; c < members.size(); ++c) column[c] = means(c, w);
    out.window_votes[w] = static_cast<int>(argmax(column));
  }
  out.predicted = majority_vote(out.window_votes, static_cast<int>(members.size()));
  out.class_means = floor_means(std::move(means));
  return out;
}

CfrResult cfr_decode(std::span<const SpikeRecord> trials, const PopulationMap& pop,
                     const WindowSpec& windows) {
  return cfr_decode(estimate_rates(trials, windows).rates, pop);
}

}  // namespace snnens
