#include "reid/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "reid/errors.hpp"

namespace reid::bounds {

namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

BoundReport report(double raw, BoundKind kind, std::string source) {
  return {clamp01(raw), raw, kind, std::move(source)};
}

}  // namespace

double column_max_sum(const RepresentationMatrix& p) {
  double sum = 0;
  for (std::size_t o = 0; o < p.reps(); ++o) {
    double best = 0;
    for (std::size_t i = 0; i < p.users(); ++i) best = std::max(best, p(i, o));
    sum += best;
  }
  return sum;
}

double exact_random_user_accuracy(const RepresentationMatrix& p,
                                  const PredictionMatrix& a) {
  if (a.reps() != p.reps() || a.users() != p.users())
    throw ValidationError("prediction rule shape does not match the matrix");
  double acc = 0;
  for (std::size_t i = 0; i < p.users(); ++i)
    for (std::size_t o = 0; o < p.reps(); ++o) acc += p(i, o) * a(o, i);
  return acc / static_cast<double>(p.users());
}

BoundReport max_accuracy_bound(const RepresentationMatrix& p) {
  if (p.users() == 0 || p.reps() == 0)
    throw ValidationError("empty matrix has no accuracy bound");
  double raw = column_max_sum(p) / static_cast<double>(p.users());
  return report(raw, BoundKind::exact, "column-max-sum");
}

PredictionMatrix optimal_full_info_rule(const RepresentationMatrix& p) {
  const std::size_t n = p.users(), m = p.reps();
  if (n == 0 || m == 0) throw ValidationError("empty matrix has no optimal rule");
  std::vector<double> entries(m * n, 0.0);
  for (std::size_t o = 0; o < m; ++o) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (p(i, o) > p(best, o)) best = i;
    entries[o * n + best] = 1.0;
  }
  return PredictionMatrix(m, n, std::move(entries));
}

BoundReport partial_info_bound(const FinitePrior& prior,
                               const ObservationVector& observed) {
  auto posterior = posterior_matrix(prior, observed);
  double raw = column_max_sum(posterior) / static_cast<double>(posterior.users());
  return report(raw, BoundKind::exact, "posterior-column-max-sum");
}

BoundReport matching_accuracy_bound(const RepresentationMatrix& p) {
  const std::size_t n = p.users(), m = p.reps();
  if (n == 0 || m == 0)
    throw ValidationError("empty matrix has no matching bound");
  double miss = 0;  // sum over columns of P(no user emits this column)
  for (std::size_t o = 0; o < m; ++o) {
    double prod = 1;
    for (std::size_t i = 0; i < n; ++i) prod *= 1.0 - p(i, o);
    miss += prod;
  }
  double raw = (static_cast<double>(m) - miss) / static_cast<double>(n);
  return report(raw, BoundKind::upper_bound, "matching-column-coverage");
}

std::vector<std::uint32_t> LiftedMatchingRule::predict(
    std::span<const std::uint32_t> observed, std::uint64_t master_seed,
    std::uint64_t trial) const {
  std::vector<std::uint32_t> out(observed.size());
  for (std::size_t j = 0; j < observed.size(); ++j) {
    Stream s(master_seed, {Purpose::rule_draw, trial, j, 0, 0});
    out[j] = sample_prediction(rule, observed[j], s);
  }
  return out;
}

LiftedMatchingRule lift_random_user_rule(PredictionMatrix a) {
  require_valid(a);
  return LiftedMatchingRule{std::move(a)};
}

double check_ldp(const RepresentationMatrix& p, double epsilon) {
  if (epsilon < 0) throw ValidationError("epsilon must be nonnegative");
  const double lift = std::exp(epsilon);
  double worst = 0;
  for (std::size_t i = 0; i < p.users(); ++i) {
    for (std::size_t j = 0; j < p.users(); ++j) {
      if (i == j) continue;
      // Tightest event for this ordered pair: the columns where row i
      // exceeds e^eps times row j.
      double excess = 0;
      for (std::size_t o = 0; o < p.reps(); ++o)
        excess += std::max(0.0, p(i, o) - lift * p(j, o));
      worst = std::max(worst, excess);
    }
  }
  return worst;
}

BoundReport ldp_accuracy_bound(double epsilon, double delta, std::size_t n,
                               std::size_t m) {
  if (epsilon < 0) throw ValidationError("epsilon must be nonnegative");
  if (delta < 0 || delta > 1) throw ValidationError("delta must be in [0, 1]");
  if (n == 0 || m == 0) throw ValidationError("n and m must be positive");
  double raw = (std::exp(epsilon) + static_cast<double>(std::min(n, m)) * delta) /
               static_cast<double>(n);
  return report(raw, BoundKind::upper_bound, "indistinguishability");
}

std::size_t check_k_anonymity(const RepresentationMatrix& p) {
  std::map<std::size_t, std::size_t> bucket_count;  // hot column -> rows
  for (std::size_t i = 0; i < p.users(); ++i) {
    std::size_t hot = p.reps();
    for (std::size_t o = 0; o < p.reps(); ++o) {
      double v = p(i, o);
      if (std::abs(v - 1.0) <= kStochasticTol) {
        if (hot != p.reps()) return 0;  // two hot entries in one row
        hot = o;
      } else if (std::abs(v) > kStochasticTol) {
        return 0;  // fractional entry: the release is randomized
      }
    }
    if (hot == p.reps()) return 0;  // no hot entry at all
    ++bucket_count[hot];
  }
  std::size_t k = p.users();
  for (const auto& [col, count] : bucket_count) k = std::min(k, count);
  return k;
}

BoundReport kanon_accuracy_bound(std::size_t k) {
  if (k < 1) throw ValidationError("k must be at least 1");
  double raw = 1.0 / static_cast<double>(k);
  return report(raw, BoundKind::upper_bound, "k-anonymity");
}

BoundReport fano_bound(double mi_nats, std::size_t n) {
  if (n < 2) throw ValidationError("the information bound needs n >= 2");
  if (mi_nats < 0) throw ValidationError("mutual information must be nonnegative");
  double raw = (1.0 + mi_nats) / std::log(static_cast<double>(n));
  return report(raw, BoundKind::upper_bound, "information");
}

RepresentationMatrix construct_ldp_kanon_counterexample(std::size_t n) {
  if (n < 2) throw ValidationError("construction needs n >= 2");
  std::vector<double> entries(n * 2);
  const double step = 1.0 / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    double second = static_cast<double>(i) * step;
    entries[i * 2] = 1.0 - second;
    entries[i * 2 + 1] = second;
  }
  return RepresentationMatrix(n, 2, std::move(entries));
}

RepresentationMatrix construct_matching_gap_instance(std::size_t n) {
  if (n < 2 || n % 2 != 0) throw ValidationError("construction needs even n >= 2");
  const std::size_t m = n + n / 2;
  std::vector<double> entries(n * m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    entries[i * m + i] = 0.5;          // representation unique to user i
    entries[i * m + n + i / 2] = 0.5;  // representation shared by the pair
  }
  return RepresentationMatrix(n, m, std::move(entries));
}

}  // namespace reid::bounds
