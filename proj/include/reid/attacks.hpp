#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "reid/rng.hpp"
#include "reid/topics.hpp"

namespace reid::attacks {

// Popularity estimates are clamped below by this floor before entering
// any logarithm, and above by 1.
inline constexpr double kPopularityFloor = 1e-6;

// Per-topic popularity (probability that a user's top set contains the
// topic) recovered from one site's observed topics for one epoch.
struct EpochPopularity {
  std::vector<double> value;  // clamped into [kPopularityFloor, 1]
  std::vector<double> raw;    // unclamped estimator output
  double radius = 0;          // all topics are within radius of truth w.p. 1-delta
  double delta = 0;
  std::uint64_t samples = 0;
};

// Inverts the query channel: observed frequency f of a topic satisfies
// f = q_out + (q_in - q_out) * popularity, so the estimate is
// (f - q_out) / (q_in - q_out), with a uniform deviation radius from a
// union bound over the taxonomy at confidence 1 - delta.
EpochPopularity estimate_popularity(std::span<const std::uint32_t> epoch_topics,
                                    const topics::TopicsConfig& cfg, double delta);

// Popularity per epoch; a single pooled estimate when the population is
// time-invariant (pooling multiplies the sample count by the epoch count).
struct PopularityTable {
  std::vector<EpochPopularity> per_epoch;
  bool pooled = false;
  const EpochPopularity& for_epoch(std::uint32_t s) const {
    return pooled ? per_epoch.front() : per_epoch.at(s);
  }
};

PopularityTable estimate_popularity_table(const topics::SequenceSet& site,
                                          const topics::TopicsConfig& cfg,
                                          double delta, bool pool_epochs);

// Probability that a topic of popularity p sits in the top set of a user
// who is known not to have emitted it through the top-set branch:
// (k - 1) * p / (k - p) for top sets of size k.
double alpha_from_p(double p, std::uint32_t top_set_size);

// Per-coordinate weights of the likelihood attack: minus log of the
// expected query probability of the observed topic given that the
// database user showed the same topic (match) or any other (mismatch).
// Popularity p is the estimate for the observed topic.
double match_weight(double p, const topics::TopicsConfig& cfg);
double mismatch_weight(double p, const topics::TopicsConfig& cfg);

// Sum of per-epoch weights for matching the observed sequence against one
// database sequence. Lower is a better match.
double weighted_hamming_score(std::span<const std::uint32_t> observed,
                              std::span<const std::uint32_t> candidate,
                              const PopularityTable& pop,
                              const topics::TopicsConfig& cfg);

// Nearest database sequence by plain mismatch count, ties to the lowest
// user index.
std::size_t hamming_attack(const topics::SequenceSet& site1,
                           std::span<const std::uint32_t> observed);

// Likelihood attack engine. Precomputes per-(epoch, topic) weight deltas
// so each query costs one pass over the database. predict is const and
// safe to call concurrently.
class WeightedAttack {
 public:
  WeightedAttack(const topics::SequenceSet& site1, PopularityTable pop,
                 const topics::TopicsConfig& cfg);

  // argmin of weighted_hamming_score over users, ties to the lowest
  // index. Internally drops a candidate-independent offset per query;
  // the ranking is the same.
  std::size_t predict(std::span<const std::uint32_t> observed) const;

  // Score of one candidate minus the query-only offset. Differences
  // between candidates equal differences of weighted_hamming_score.
  double ranking_score(std::size_t user,
                       std::span<const std::uint32_t> observed) const;

 private:
  const topics::SequenceSet* site1_;
  topics::TopicsConfig cfg_;
  std::vector<double> delta_;  // [epoch * taxonomy + topic]: match - mismatch weight
};

std::size_t weighted_hamming_attack(const topics::SequenceSet& site1,
                                    std::span<const std::uint32_t> observed,
                                    const PopularityTable& pop,
                                    const topics::TopicsConfig& cfg);

// scores[user][query], lower meaning a more plausible pairing.
struct AttackScoreMatrix {
  std::size_t users = 0, queries = 0;
  std::vector<double> scores;  // row-major
  double at(std::size_t user, std::size_t query) const {
    return scores[user * queries + query];
  }
};

// Minimum-total-score perfect assignment between queries and users
// (square matrices only). Returns the assigned user per query. Ties are
// broken by a random row permutation drawn from tie_stream, so equal-cost
// optima are picked uniformly. Scores above 1e9 (including infinities)
// are capped so the potential updates stay finite; NaN is rejected.
std::vector<std::size_t> matching_assignment(const AttackScoreMatrix& scores,
                                             Stream& tie_stream);

}  // namespace reid::attacks
