#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "reid/matrix.hpp"
#include "reid/parallel.hpp"
#include "reid/rng.hpp"

namespace reid::topics {

// Browsing-interest release mechanism: each epoch a user holds a set of
// top_set_size topics out of taxonomy_size; a query returns a uniform
// member of that set, except with probability flip_prob it returns a
// uniform topic from the whole taxonomy.
struct TopicsConfig {
  std::uint32_t taxonomy_size = 350;
  std::uint32_t top_set_size = 5;
  double flip_prob = 0.05;
  std::uint32_t epochs = 1;

  // Per-query probability of each top-set topic / each outside topic.
  double q_in() const {
    return (1.0 - flip_prob) / top_set_size + flip_prob / taxonomy_size;
  }
  double q_out() const { return flip_prob / taxonomy_size; }

  void validate() const;  // throws ValidationError
};

enum class PopulationKind { zipf, uniform, explicit_weights };

// How topic interest is distributed across the population. Weights feed
// the without-replacement draw of each user's top set; they need not be
// normalized.
struct PopulationModel {
  PopulationKind kind = PopulationKind::zipf;
  double zipf_exponent = 1.0;
  // One row per epoch for explicit_weights (a single row when
  // time_invariant); ignored for the closed-form kinds.
  std::vector<std::vector<double>> explicit_epoch_weights;
  // When true the topic distribution is the same every epoch; attackers
  // may then pool samples across epochs.
  bool time_invariant = true;

  std::vector<double> weights_for_epoch(std::uint32_t epoch,
                                        const TopicsConfig& cfg) const;
  void validate(const TopicsConfig& cfg) const;
};

// Per-user, per-epoch top sets, stored sorted so membership is a binary
// search and equal sets compare equal element-wise.
class TopSetTable {
 public:
  TopSetTable() = default;
  TopSetTable(std::size_t users, std::uint32_t epochs, std::uint32_t set_size);

  std::size_t users() const { return users_; }
  std::uint32_t epochs() const { return epochs_; }
  std::uint32_t set_size() const { return set_size_; }

  std::span<const std::uint32_t> set(std::size_t user, std::uint32_t epoch) const {
    return {topics_.data() + (user * epochs_ + epoch) * set_size_, set_size_};
  }
  std::span<std::uint32_t> mutable_set(std::size_t user, std::uint32_t epoch) {
    return {topics_.data() + (user * epochs_ + epoch) * set_size_, set_size_};
  }
  bool contains(std::size_t user, std::uint32_t epoch, std::uint32_t topic) const;

 private:
  std::size_t users_ = 0;
  std::uint32_t epochs_ = 0, set_size_ = 0;
  std::vector<std::uint32_t> topics_;
};

// Draw every user's top set for every epoch. Each (user, epoch) cell uses
// its own stream, so the table is independent of iteration order and of
// the execution policy. Epochs are drawn independently; time invariance
// constrains the weights, not the sets.
TopSetTable generate_population(std::size_t users, const TopicsConfig& cfg,
                                const PopulationModel& model,
                                std::uint64_t master_seed,
                                Exec exec = Exec::parallel);

// The topic user exposes to a site in an epoch. Fixed per (user, site,
// epoch): asking twice returns the same topic.
std::uint32_t get_topic(std::size_t user, std::uint32_t site, std::uint32_t epoch,
                        const TopSetTable& table, const TopicsConfig& cfg,
                        std::uint64_t master_seed);

// Same draw but keyed by trial, for experiments that need a fresh
// observation per trial. get_topic is trial 0.
std::uint32_t sample_topic(std::size_t user, std::uint32_t site,
                           std::uint32_t epoch, std::uint64_t trial,
                           const TopSetTable& table, const TopicsConfig& cfg,
                           std::uint64_t master_seed);

// Row-stochastic matrix of one epoch's query distribution: q_in() at the
// user's top-set columns, q_out() elsewhere.
RepresentationMatrix per_epoch_matrix(const TopSetTable& table,
                                      std::uint32_t epoch,
                                      const TopicsConfig& cfg);

// Log-probability that the given user produces this topic sequence, one
// topic per epoch starting at epoch 0.
double sequence_log_likelihood(std::size_t user,
                               std::span<const std::uint32_t> seq,
                               const TopSetTable& table, const TopicsConfig& cfg);

// One topic per (user, epoch) as observed by a single site.
struct SequenceSet {
  std::size_t users = 0;
  std::uint32_t epochs = 0;
  std::vector<std::uint32_t> topics;  // user-major

  std::uint32_t topic(std::size_t user, std::uint32_t epoch) const {
    return topics[user * epochs + epoch];
  }
  std::span<const std::uint32_t> sequence(std::size_t user) const {
    return {topics.data() + user * epochs, epochs};
  }
};

// What two colluding sites each observe about the same population.
struct TwoSiteSample {
  TopSetTable table;  // ground truth; empty when loaded from a dump
  SequenceSet site1, site2;
};

TwoSiteSample simulate_two_sites(std::size_t users, const TopicsConfig& cfg,
                                 const PopulationModel& model,
                                 std::uint64_t master_seed,
                                 Exec exec = Exec::parallel);

// Sequence dump: CSV with header user,site,epoch,topic, rows sorted by
// (user, site, epoch). Loading recovers the two sequence sets; the top-set
// table is not part of the dump.
void save_sequences_csv(const TwoSiteSample& sample, std::ostream& out);
TwoSiteSample load_sequences_csv(std::istream& in);

}  // namespace reid::topics
