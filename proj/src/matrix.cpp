#include "reid/matrix.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "reid/errors.hpp"

namespace reid {

std::string MatrixViolation::describe() const {
  std::ostringstream s;
  switch (kind) {
    case Kind::bad_shape:
      s << "matrix has no rows or no columns";
      break;
    case Kind::negative_entry:
      s << "entry (" << row << ", " << col << ") is negative: " << value;
      break;
    case Kind::entry_above_one:
      s << "entry (" << row << ", " << col << ") exceeds 1: " << value;
      break;
    case Kind::sum_drift:
      s << "stochastic sum at index " << row << " is " << value
        << " (must be 1 within " << kStochasticTol << ")";
      break;
  }
  return s.str();
}

RepresentationMatrix::RepresentationMatrix(std::size_t n, std::size_t m,
                                           std::vector<double> entries,
                                           std::vector<std::string> column_labels)
    : n_(n), m_(m), entries_(std::move(entries)), labels_(std::move(column_labels)) {
  if (entries_.size() != n_ * m_)
    throw std::invalid_argument("entry count does not match shape");
  if (!labels_.empty() && labels_.size() != m_)
    throw std::invalid_argument("label count does not match column count");
}

PredictionMatrix::PredictionMatrix(std::size_t m, std::size_t n,
                                   std::vector<double> entries)
    : m_(m), n_(n), entries_(std::move(entries)) {
  if (entries_.size() != m_ * n_)
    throw std::invalid_argument("entry count does not match shape");
}

FinitePrior::FinitePrior(std::vector<Component> components)
    : components_(std::move(components)) {}

std::size_t FinitePrior::users() const {
  return components_.empty() ? 0 : components_[0].matrix.users();
}

std::size_t FinitePrior::reps() const {
  return components_.empty() ? 0 : components_[0].matrix.reps();
}

namespace {

void check_entries_and_row_sums(const RepresentationMatrix& p,
                                std::vector<MatrixViolation>& out) {
  for (std::size_t i = 0; i < p.users(); ++i) {
    double sum = 0;
    for (std::size_t o = 0; o < p.reps(); ++o) {
      double v = p(i, o);
      if (v < 0)
        out.push_back({MatrixViolation::Kind::negative_entry, i, o, v});
      else if (v > 1)
        out.push_back({MatrixViolation::Kind::entry_above_one, i, o, v});
      sum += v;
    }
    if (std::abs(sum - 1.0) > kStochasticTol)
      out.push_back({MatrixViolation::Kind::sum_drift, i, 0, sum});
  }
}

}  // namespace

std::vector<MatrixViolation> validate_representation_matrix(
    const RepresentationMatrix& p) {
  std::vector<MatrixViolation> out;
  if (p.users() == 0 || p.reps() == 0) {
    out.push_back({MatrixViolation::Kind::bad_shape, 0, 0, 0});
    return out;
  }
  check_entries_and_row_sums(p, out);
  return out;
}

std::vector<MatrixViolation> validate_prediction_matrix(const PredictionMatrix& a) {
  std::vector<MatrixViolation> out;
  if (a.reps() == 0 || a.users() == 0) {
    out.push_back({MatrixViolation::Kind::bad_shape, 0, 0, 0});
    return out;
  }
  for (std::size_t o = 0; o < a.reps(); ++o) {
    double sum = 0;
    for (std::size_t i = 0; i < a.users(); ++i) {
      double v = a(o, i);
      if (v < 0)
        out.push_back({MatrixViolation::Kind::negative_entry, o, i, v});
      else if (v > 1)
        out.push_back({MatrixViolation::Kind::entry_above_one, o, i, v});
      sum += v;
    }
    if (std::abs(sum - 1.0) > kStochasticTol)
      out.push_back({MatrixViolation::Kind::sum_drift, o, 0, sum});
  }
  return out;
}

std::vector<MatrixViolation> validate_prior(const FinitePrior& prior) {
  std::vector<MatrixViolation> out;
  if (prior.size() == 0) {
    out.push_back({MatrixViolation::Kind::bad_shape, 0, 0, 0});
    return out;
  }
  double weight_sum = 0;
  for (std::size_t j = 0; j < prior.size(); ++j) {
    const auto& c = prior.component(j);
    if (c.weight < 0)
      out.push_back({MatrixViolation::Kind::negative_entry, j, 0, c.weight});
    weight_sum += c.weight;
    if (c.matrix.users() != prior.users() || c.matrix.reps() != prior.reps())
      out.push_back({MatrixViolation::Kind::bad_shape, j, 0, 0});
    auto inner = validate_representation_matrix(c.matrix);
    out.insert(out.end(), inner.begin(), inner.end());
  }
  if (std::abs(weight_sum - 1.0) > kStochasticTol)
    out.push_back({MatrixViolation::Kind::sum_drift, 0, 0, weight_sum});
  return out;
}

namespace {

template <class T>
void throw_if_invalid(const T& value,
                      std::vector<MatrixViolation> (*validate)(const T&)) {
  auto violations = validate(value);
  if (!violations.empty()) throw ValidationError(violations.front().describe());
}

}  // namespace

void require_valid(const RepresentationMatrix& p) {
  throw_if_invalid(p, validate_representation_matrix);
}
void require_valid(const PredictionMatrix& a) {
  throw_if_invalid(a, validate_prediction_matrix);
}
void require_valid(const FinitePrior& prior) {
  throw_if_invalid(prior, validate_prior);
}

std::uint32_t sample_observation(const RepresentationMatrix& p, std::size_t user,
                                 Stream& stream) {
  const double u = stream.next_double();
  double cum = 0;
  auto r = p.row(user);
  std::size_t last_positive = 0;
  bool seen_positive = false;
  for (std::size_t o = 0; o < r.size(); ++o) {
    if (r[o] > 0) {
      last_positive = o;
      seen_positive = true;
    }
    cum += r[o];
    if (u < cum) return static_cast<std::uint32_t>(o);
  }
  if (!seen_positive) throw ValidationError("cannot sample from an all-zero row");
  return static_cast<std::uint32_t>(last_positive);
}

ObservationVector sample_observation_vector(const RepresentationMatrix& p,
                                            std::uint64_t master_seed,
                                            std::uint64_t trial) {
  ObservationVector w(p.users());
  for (std::size_t i = 0; i < p.users(); ++i) {
    Stream s(master_seed, {Purpose::matrix_draw, trial, i, 0, 0});
    w[i] = sample_observation(p, i, s);
  }
  return w;
}

std::uint32_t sample_prediction(const PredictionMatrix& rule, std::uint32_t obs,
                                Stream& stream) {
  if (obs >= rule.reps()) throw ValidationError("observation index out of range");
  const double u = stream.next_double();
  double cum = 0;
  std::size_t last_positive = 0;
  bool seen_positive = false;
  for (std::size_t i = 0; i < rule.users(); ++i) {
    double v = rule(obs, i);
    if (v > 0) {
      last_positive = i;
      seen_positive = true;
    }
    cum += v;
    if (u < cum) return static_cast<std::uint32_t>(i);
  }
  if (!seen_positive)
    throw ValidationError("cannot sample from an all-zero rule column");
  return static_cast<std::uint32_t>(last_positive);
}

RepresentationMatrix posterior_matrix(const FinitePrior& prior,
                                      const ObservationVector& observed) {
  const std::size_t n = prior.users(), m = prior.reps();
  if (observed.size() != n)
    throw ValidationError("observation vector length does not match user count");
  for (auto o : observed)
    if (o >= m) throw ValidationError("observation index out of range");

  // log weight_j = log w_j + sum_i log P_j[i, W_i]; -inf marks a component
  // that cannot have produced W (or had zero prior weight).
  std::vector<double> log_w(prior.size());
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < prior.size(); ++j) {
    const auto& c = prior.component(j);
    double lw = c.weight > 0 ? std::log(c.weight)
                             : -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n && std::isfinite(lw); ++i) {
      double v = c.matrix(i, observed[i]);
      if (v > 0)
        lw += std::log(v);
      else
        lw = -std::numeric_limits<double>::infinity();
    }
    log_w[j] = lw;
    max_log = std::max(max_log, lw);
  }
  if (!std::isfinite(max_log))
    throw ValidationError("observation has zero likelihood under every component");

  std::vector<double> weight(prior.size());
  double total = 0;
  for (std::size_t j = 0; j < prior.size(); ++j) {
    weight[j] = std::exp(log_w[j] - max_log);
    total += weight[j];
  }

  std::vector<double> entries(n * m, 0.0);
  for (std::size_t j = 0; j < prior.size(); ++j) {
    if (weight[j] == 0) continue;
    const double scale = weight[j] / total;
    auto src = prior.component(j).matrix.entries();
    for (std::size_t t = 0; t < entries.size(); ++t) entries[t] += scale * src[t];
  }
  return RepresentationMatrix(n, m, std::move(entries));
}

}  // namespace reid
