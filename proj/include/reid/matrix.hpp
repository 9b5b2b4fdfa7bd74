#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "reid/rng.hpp"

namespace reid {

// Row sums (and column sums for prediction rules, and prior weights) may
// drift from 1 by at most this much and still validate.
inline constexpr double kStochasticTol = 1e-9;

// Loaders renormalize rows whose sums drift by at most this much; larger
// drift is rejected as malformed data rather than silently fixed.
inline constexpr double kLoadRenormTol = 1e-6;

class RepresentationMatrix;

// One rule violation found by a validator. Validators collect these and
// never abort, so callers can report every problem at once.
struct MatrixViolation {
  enum class Kind {
    bad_shape,       // zero rows or columns
    negative_entry,
    entry_above_one,
    sum_drift,       // row (or column) sum outside 1 +/- kStochasticTol
  };
  Kind kind;
  std::size_t row = 0;  // for sum_drift on columns, col carries the index
  std::size_t col = 0;
  double value = 0;
  std::string describe() const;
};

// n x m row-stochastic matrix: row i is the distribution of user i's
// observable representation. Immutable after construction.
class RepresentationMatrix {
 public:
  RepresentationMatrix() = default;
  RepresentationMatrix(std::size_t n, std::size_t m, std::vector<double> entries,
                       std::vector<std::string> column_labels = {});

  std::size_t users() const { return n_; }
  std::size_t reps() const { return m_; }
  double operator()(std::size_t i, std::size_t o) const {
    return entries_[i * m_ + o];
  }
  std::span<const double> row(std::size_t i) const {
    return {entries_.data() + i * m_, m_};
  }
  std::span<const double> entries() const { return entries_; }
  // Empty when the source had no labels; io fills in o0, o1, ... on save.
  const std::vector<std::string>& column_labels() const { return labels_; }

 private:
  std::size_t n_ = 0, m_ = 0;
  std::vector<double> entries_;  // row-major
  std::vector<std::string> labels_;
};

// m x n randomized prediction rule: row o is the attacker's distribution
// over users after seeing representation o. Stored row-major.
class PredictionMatrix {
 public:
  PredictionMatrix() = default;
  PredictionMatrix(std::size_t m, std::size_t n, std::vector<double> entries);

  std::size_t reps() const { return m_; }
  std::size_t users() const { return n_; }
  double operator()(std::size_t o, std::size_t i) const {
    return entries_[o * n_ + i];
  }
  std::span<const double> entries() const { return entries_; }

 private:
  std::size_t m_ = 0, n_ = 0;
  std::vector<double> entries_;
};

// One observed representation per user; values index columns of the
// matrix the vector was drawn against.
using ObservationVector = std::vector<std::uint32_t>;

// Finite mixture over candidate representation matrices, all of one shape.
// Models attacker uncertainty about which matrix generated the data.
class FinitePrior {
 public:
  struct Component {
    double weight;
    RepresentationMatrix matrix;
  };

  FinitePrior() = default;
  explicit FinitePrior(std::vector<Component> components);

  std::size_t size() const { return components_.size(); }
  const Component& component(std::size_t j) const { return components_[j]; }
  std::size_t users() const;
  std::size_t reps() const;

 private:
  std::vector<Component> components_;
};

// Validators. A clean result is an empty vector.
std::vector<MatrixViolation> validate_representation_matrix(const RepresentationMatrix&);
std::vector<MatrixViolation> validate_prediction_matrix(const PredictionMatrix&);
std::vector<MatrixViolation> validate_prior(const FinitePrior&);

// Throwing wrappers for the load path: first violation becomes the message.
void require_valid(const RepresentationMatrix&);
void require_valid(const PredictionMatrix&);
void require_valid(const FinitePrior&);

// Draw user i's representation from row i. Consumes exactly one double
// from the stream via an inverse-CDF walk; guards the cumulative sum so
// row sums a hair under 1 still return a valid index.
std::uint32_t sample_observation(const RepresentationMatrix& P, std::size_t user,
                                 Stream& stream);

// One independent draw per user, each from its own stream
// (Purpose::matrix_draw, trial, user), so coordinates can be sampled in
// any order or in parallel without changing the result.
ObservationVector sample_observation_vector(const RepresentationMatrix& P,
                                            std::uint64_t master_seed,
                                            std::uint64_t trial);

// Draw a predicted user from the rule's column for this observation.
// Randomized rules consume exactly one double; deterministic (0/1)
// columns return their single hot user.
std::uint32_t sample_prediction(const PredictionMatrix& rule, std::uint32_t obs,
                                Stream& stream);

// Posterior mean representation matrix given one observation per user:
// mixture components reweighted by the likelihood of W, in log space so
// long observation vectors cannot underflow to an all-zero posterior.
// Throws ValidationError if every component has likelihood zero.
RepresentationMatrix posterior_matrix(const FinitePrior& prior,
                                      const ObservationVector& observed);

}  // namespace reid
