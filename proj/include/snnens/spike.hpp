#pragma once

// Domain types shared by the simulator, the decoders and the combiners.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace snnens {

// Lower bound applied to every Poisson mean (spikes per window) so that
// logarithms, KL divergences and geometric means stay finite.
inline constexpr double kLambdaFloor = 1e-6;

// Dense row-major matrix of doubles. Deliberately minimal: the decoders only
// need indexed access and whole-row views.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct SpikeTrain {
  int neuron_id = 0;
  std::vector<double> times;  // ms, strictly ascending

  bool operator==(const SpikeTrain&) const = default;
};

// Output of one simulation (or one externally produced trial) of one example.
struct SpikeRecord {
  std::string example_id;
  int trial_index = 0;
  double duration_ms = 0.0;
  std::optional<int> label;
  std::vector<SpikeTrain> trains;  // dense, trains[j].neuron_id == j

  std::size_t n_neurons() const { return trains.size(); }
  bool operator==(const SpikeRecord&) const = default;
};

// Contiguous, equally sized counting windows. A trailing remainder shorter
// than window_ms is dropped.
class WindowSpec {
 public:
  WindowSpec(double window_ms, double duration_ms);

  double window_ms() const { return window_ms_; }
  double duration_ms() const { return duration_ms_; }
  std::size_t n_windows() const { return n_windows_; }

  // Window index for a spike time, or nullopt if the time falls in the
  // discarded remainder or outside [0, duration].
  std::optional<std::size_t> index_of(double t_ms) const;

 private:
  double window_ms_;
  double duration_ms_;
  std::size_t n_windows_;
  bool exact_fit_;
};

// J x W mean spike counts per window, averaged over trials.
struct RateMatrix {
  Matrix counts;

  std::size_t n_neurons() const { return counts.rows(); }
  std::size_t n_windows() const { return counts.cols(); }
  double total(std::size_t neuron) const;
};

struct ClassProbabilities {
  std::vector<double> p;

  std::size_t size() const { return p.size(); }
  double operator[](std::size_t c) const { return p[c]; }
  bool operator==(const ClassProbabilities&) const = default;
};

// C x W Poisson means, every entry >= kLambdaFloor.
struct PoissonMeans {
  Matrix lambda;

  std::size_t n_classes() const { return lambda.rows(); }
  std::size_t n_windows() const { return lambda.cols(); }
};

// Output neuron -> class. Members of a class form its population.
struct PopulationMap {
  std::vector<int> assignment;  // indexed by neuron
  int n_classes = 0;

  std::vector<std::vector<std::size_t>> members() const;
  bool operator==(const PopulationMap&) const = default;
};

enum class ViolationKind { kNotAscending, kOutOfRange, kBadNeuronId, kBadDuration, kNonFinite };

struct Violation {
  ViolationKind kind;
  int neuron_id;
  std::string message;
};

// Returns every invariant violation found in the record; empty means valid.
std::vector<Violation> validate_record(const SpikeRecord& record);

// Validity checks for the probability and mean containers.
bool is_distribution(const ClassProbabilities& q, double tol = 1e-9);
PoissonMeans floor_means(Matrix lambda, double floor = kLambdaFloor);

// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

// Majority vote over class indices; ties go to the lowest class index.
int majority_vote(std::span<const int> votes, int n_classes);

}  // namespace snnens
