#include "reid/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "reid/errors.hpp"

namespace reid::attacks {

namespace {

// Cap fed to the assignment solver in place of infinite or huge scores.
constexpr double kScoreCap = 1e9;

double clamp_popularity(double p) {
  return std::min(1.0, std::max(kPopularityFloor, p));
}

void require_channel_invertible(const topics::TopicsConfig& cfg) {
  if (!(cfg.q_in() > cfg.q_out()))
    throw ValidationError("query channel carries no signal (q_in <= q_out)");
}

}  // namespace

EpochPopularity estimate_popularity(std::span<const std::uint32_t> epoch_topics,
                                    const topics::TopicsConfig& cfg,
                                    double delta) {
  cfg.validate();
  require_channel_invertible(cfg);
  if (!(delta > 0 && delta < 1))
    throw ValidationError("confidence delta must be in (0, 1)");
  if (epoch_topics.empty())
    throw ValidationError("cannot estimate popularity from zero samples");

  const std::size_t n = epoch_topics.size();
  std::vector<std::uint64_t> count(cfg.taxonomy_size, 0);
  for (std::uint32_t t : epoch_topics) {
    if (t >= cfg.taxonomy_size) throw ValidationError("topic index out of range");
    ++count[t];
  }

  EpochPopularity est;
  est.delta = delta;
  est.samples = n;
  const double slope = cfg.q_in() - cfg.q_out();
  est.radius = std::sqrt(std::log(2.0 * cfg.taxonomy_size / delta) / (2.0 * n)) /
               slope;
  est.raw.resize(cfg.taxonomy_size);
  est.value.resize(cfg.taxonomy_size);
  for (std::uint32_t t = 0; t < cfg.taxonomy_size; ++t) {
    double freq = static_cast<double>(count[t]) / static_cast<double>(n);
    est.raw[t] = (freq - cfg.q_out()) / slope;
    est.value[t] = clamp_popularity(est.raw[t]);
  }
  return est;
}

PopularityTable estimate_popularity_table(const topics::SequenceSet& site,
                                          const topics::TopicsConfig& cfg,
                                          double delta, bool pool_epochs) {
  PopularityTable table;
  table.pooled = pool_epochs;
  if (pool_epochs) {
    table.per_epoch.push_back(estimate_popularity(site.topics, cfg, delta));
    return table;
  }
  std::vector<std::uint32_t> column(site.users);
  for (std::uint32_t s = 0; s < site.epochs; ++s) {
    for (std::size_t u = 0; u < site.users; ++u) column[u] = site.topic(u, s);
    table.per_epoch.push_back(estimate_popularity(column, cfg, delta));
  }
  return table;
}

double alpha_from_p(double p, std::uint32_t top_set_size) {
  if (!(p >= 0 && p <= 1)) throw ValidationError("popularity must be in [0, 1]");
  if (top_set_size < 1) throw ValidationError("top set size must be positive");
  if (top_set_size == 1) return 0;  // a mismatching user cannot hold the topic
  const double k = top_set_size;
  return (k - 1) * p / (k - p);
}

double match_weight(double p, const topics::TopicsConfig& cfg) {
  require_channel_invertible(cfg);
  p = clamp_popularity(p);
  const double q_in = cfg.q_in(), q_out = cfg.q_out();
  const double slope = q_in - q_out;
  // P(topic in the top set | the user showed this topic), then the
  // expected query probability under that posterior.
  const double in_set_posterior = q_in * p / (q_out + slope * p);
  return -std::log(q_out + slope * in_set_posterior);
}

double mismatch_weight(double p, const topics::TopicsConfig& cfg) {
  require_channel_invertible(cfg);
  p = clamp_popularity(p);
  const double slope = cfg.q_in() - cfg.q_out();
  return -std::log(cfg.q_out() + slope * alpha_from_p(p, cfg.top_set_size));
}

double weighted_hamming_score(std::span<const std::uint32_t> observed,
                              std::span<const std::uint32_t> candidate,
                              const PopularityTable& pop,
                              const topics::TopicsConfig& cfg) {
  if (observed.size() != candidate.size())
    throw ValidationError("sequences must cover the same epochs");
  double score = 0;
  for (std::uint32_t s = 0; s < observed.size(); ++s) {
    const auto& est = pop.for_epoch(s);
    if (observed[s] >= est.value.size())
      throw ValidationError("topic index out of range");
    double p = est.value[observed[s]];
    score += observed[s] == candidate[s] ? match_weight(p, cfg)
                                         : mismatch_weight(p, cfg);
  }
  return score;
}

std::size_t hamming_attack(const topics::SequenceSet& site1,
                           std::span<const std::uint32_t> observed) {
  if (site1.users == 0) throw ValidationError("empty database");
  if (observed.size() != site1.epochs)
    throw ValidationError("query must cover the database's epochs");
  std::size_t best = 0, best_mismatches = observed.size() + 1;
  for (std::size_t i = 0; i < site1.users; ++i) {
    auto seq = site1.sequence(i);
    std::size_t mismatches = 0;
    for (std::uint32_t s = 0; s < observed.size(); ++s)
      mismatches += seq[s] != observed[s];
    if (mismatches < best_mismatches) {
      best = i;
      best_mismatches = mismatches;
    }
  }
  return best;
}

WeightedAttack::WeightedAttack(const topics::SequenceSet& site1,
                               PopularityTable pop,
                               const topics::TopicsConfig& cfg)
    : site1_(&site1), cfg_(cfg) {
  cfg.validate();
  require_channel_invertible(cfg);
  delta_.resize(static_cast<std::size_t>(site1.epochs) * cfg.taxonomy_size);
  for (std::uint32_t s = 0; s < site1.epochs; ++s) {
    const auto& est = pop.for_epoch(s);
    if (est.value.size() != cfg.taxonomy_size)
      throw ValidationError("popularity size does not match the taxonomy");
    for (std::uint32_t t = 0; t < cfg.taxonomy_size; ++t) {
      double p = est.value[t];
      delta_[static_cast<std::size_t>(s) * cfg.taxonomy_size + t] =
          match_weight(p, cfg_) - mismatch_weight(p, cfg_);
    }
  }
}

double WeightedAttack::ranking_score(std::size_t user,
                                     std::span<const std::uint32_t> observed) const {
  auto seq = site1_->sequence(user);
  double score = 0;
  for (std::uint32_t s = 0; s < observed.size(); ++s)
    if (seq[s] == observed[s])
      score += delta_[static_cast<std::size_t>(s) * cfg_.taxonomy_size + observed[s]];
  return score;
}

std::size_t WeightedAttack::predict(std::span<const std::uint32_t> observed) const {
  if (site1_->users == 0) throw ValidationError("empty database");
  if (observed.size() != site1_->epochs)
    throw ValidationError("query must cover the database's epochs");
  for (std::uint32_t t : observed)
    if (t >= cfg_.taxonomy_size) throw ValidationError("topic index out of range");
  std::size_t best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < site1_->users; ++i) {
    double score = ranking_score(i, observed);
    if (score < best_score) {
      best = i;
      best_score = score;
    }
  }
  return best;
}

std::size_t weighted_hamming_attack(const topics::SequenceSet& site1,
                                    std::span<const std::uint32_t> observed,
                                    const PopularityTable& pop,
                                    const topics::TopicsConfig& cfg) {
  return WeightedAttack(site1, pop, cfg).predict(observed);
}

namespace {

// Assignment by potentials, one row inserted at a time; O(n^3) total.
// cost is row-major n x n; returns the row assigned to each column.
std::vector<std::size_t> hungarian_min(const std::vector<double>& cost,
                                       std::size_t n) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0), v(n + 1, 0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      std::size_t i0 = p[j0], j1 = 0;
      double delta = inf;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_of_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_of_col[j - 1] = p[j] - 1;
  return row_of_col;
}

}  // namespace

std::vector<std::size_t> matching_assignment(const AttackScoreMatrix& scores,
                                             Stream& tie_stream) {
  const std::size_t n = scores.users;
  if (n == 0) throw ValidationError("empty score matrix");
  if (scores.queries != n)
    throw ValidationError("assignment needs a square score matrix");
  if (scores.scores.size() != n * n)
    throw ValidationError("score matrix storage does not match its shape");

  // Random row order decides between equal-cost optima; the solver itself
  // breaks ties by scan order.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, tie_stream);

  std::vector<double> cost(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = scores.at(order[r], j);
      if (std::isnan(s)) throw ValidationError("score matrix contains NaN");
      cost[r * n + j] = std::min(s, kScoreCap);
    }
  }
  auto row_of_col = hungarian_min(cost, n);
  std::vector<std::size_t> assigned(n);
  for (std::size_t j = 0; j < n; ++j) assigned[j] = order[row_of_col[j]];
  return assigned;
}

}  // namespace reid::attacks
