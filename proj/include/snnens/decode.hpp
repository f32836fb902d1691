#pragma once

// Rate-coding interpretations of output spike trains:
//   HMFR          highest mean firing rate over class populations
//   Normalized    HMFR scores mapped to probabilities (softmax/activity/max)
//   Bayes         independent Poisson likelihood per neuron and window
//   PV            population vector, class-weighted average of neuron rates
//   CFR           per-neuron Poisson means fused by geometric mean within a
//                 class population, one vote per window

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "snnens/spike.hpp"

namespace snnens {

// Trial-averaged counts for one example plus the number of trials behind it.
struct TrialRates {
  RateMatrix rates;
  int n_trials = 1;
};

// Entry (j, w) is the mean over trials of neuron j's count in window w.
// Throws ShapeError if the trials disagree on duration or neuron count.
TrialRates estimate_rates(std::span<const SpikeRecord> trials, const WindowSpec& windows);

struct LabeledRates {
  TrialRates rates;
  int label = 0;
};

struct DecodeResult {
  std::vector<double> scores;
  int predicted = 0;
  bool degenerate = false;  // predicted class decided only by the tie rule
};

// Mean over each class population of a per-neuron quantity.
// Throws DecodeError when a class has no members.
Matrix population_window_means(const RateMatrix& rates, const PopulationMap& pop);

DecodeResult hmfr_decode(const RateMatrix& rates, const PopulationMap& pop);

enum class Normalization { kSoftmax, kActivity, kMax };

Normalization parse_normalization(const std::string& name);
std::string to_string(Normalization method);

ClassProbabilities normalize(std::span<const double> scores, Normalization method);

// r_c / r_max before renormalization; kept for diagnostics.
std::vector<double> max_ratio(std::span<const double> scores);

enum class Prior { kUniform, kEmpirical };

class BayesModel {
 public:
  BayesModel() = default;
  BayesModel(std::size_t n_neurons, std::size_t n_classes, std::size_t n_windows,
             double window_ms);

  std::size_t n_neurons() const { return n_neurons_; }
  std::size_t n_classes() const { return n_classes_; }
  std::size_t n_windows() const { return n_windows_; }
  double window_ms() const { return window_ms_; }

  double& f(std::size_t j, std::size_t c, std::size_t w) {
    return f_[(j * n_classes_ + c) * n_windows_ + w];
  }
  double f(std::size_t j, std::size_t c, std::size_t w) const {
    return f_[(j * n_classes_ + c) * n_windows_ + w];
  }
  std::vector<double>& values() { return f_; }
  const std::vector<double>& values() const { return f_; }

  ClassProbabilities priors;

  bool operator==(const BayesModel&) const = default;

 private:
  std::size_t n_neurons_ = 0;
  std::size_t n_classes_ = 0;
  std::size_t n_windows_ = 0;
  double window_ms_ = 0.0;
  std::vector<double> f_;
};

// f[j][c][w] = mean count over class-c examples, floored at kLambdaFloor.
// Throws FitError if any class has no examples.
BayesModel fit_bayes(std::span<const LabeledRates> training, int n_classes, double window_ms,
                     Prior prior = Prior::kUniform);

struct BayesResult {
  ClassProbabilities posterior;
  std::vector<double> log_scores;  // log likelihood + log prior
  int predicted = 0;
};

// Observed counts are rounded to the nearest integer when the rates average
// more than one trial.
BayesResult bayes_decode(const TrialRates& observed, const BayesModel& model);

struct PvModel {
  Matrix w;                 // neuron x class mean total count
  std::vector<int> inert;   // neurons silent for every class

  bool operator==(const PvModel&) const = default;
};

PvModel fit_pv(std::span<const LabeledRates> training, int n_classes);

DecodeResult pv_decode(const RateMatrix& rates, const PvModel& model);

// C x W target means: r_max on the label row, 0 elsewhere (not floored).
struct TargetRates {
  Matrix lambda;
};

TargetRates encode_targets(int label, int n_classes, double r_max, std::size_t n_windows);

struct CfrResult {
  PoissonMeans class_means;        // C x W geometric means over populations
  std::vector<int> window_votes;
  int predicted = 0;
};

CfrResult cfr_decode(const RateMatrix& rates, const PopulationMap& pop);
CfrResult cfr_decode(std::span<const SpikeRecord> trials, const PopulationMap& pop,
                     const WindowSpec& windows);

}  // namespace snnens
