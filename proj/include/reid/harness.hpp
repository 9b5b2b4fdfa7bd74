#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "reid/attacks.hpp"
#include "reid/matrix.hpp"
#include "reid/parallel.hpp"
#include "reid/topics.hpp"

namespace reid::harness {

enum class OutputFormat { csv, json };

struct WilsonInterval {
  double low = 0, high = 0;
};

// 95% score interval for a binomial proportion; {0, 1} when trials = 0.
WilsonInterval wilson95(std::uint64_t successes, std::uint64_t trials);

// Result of one Monte Carlo experiment. trials counts scored predictions
// (a matching round scores every user, so there it is rounds * n);
// accuracy is always successes / trials. canonical_text leaves out the
// wall time, so equal-seed runs serialize byte-identically no matter the
// thread count.
struct ExperimentReport {
  std::string method;
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  double accuracy = 0;
  double ci_low = 0, ci_high = 0;
  std::uint64_t master_seed = 0;
  nlohmann::json config_echo;
  double wall_seconds = 0;

  nlohmann::json to_json(bool include_timing = true) const;
  std::string canonical_text() const;
};

// External experiment configuration; see the README for the JSON schema.
struct SimulationConfig {
  topics::TopicsConfig topics;
  topics::PopulationModel population;
  std::size_t users = 10000;
  std::uint64_t seed = 0;

  static SimulationConfig from_json(const nlohmann::json& j);
  static SimulationConfig load(const std::string& path);
  nlohmann::json to_json() const;
};

enum class AttackMethod { hamming, weighted };
std::string method_name(AttackMethod method);

// Confidence parameter handed to the popularity estimator when an
// experiment builds the weighted attack.
inline constexpr double kEstimatorDelta = 0.01;

// Random-user re-identification against a simulated population: per trial
// a uniform user queries a fresh site, the attack maps the observed
// sequence back to a user, success is exact identity.
ExperimentReport run_random_user_experiment(const SimulationConfig& config,
                                            AttackMethod method,
                                            std::uint64_t trials,
                                            Exec exec = Exec::parallel);

// Same protocol for an explicit representation matrix and prediction
// rule: observe one draw from the target's row, predict from the rule's
// column for that observation.
ExperimentReport run_random_user_experiment(const RepresentationMatrix& p,
                                            const PredictionMatrix& rule,
                                            std::uint64_t trials,
                                            std::uint64_t seed,
                                            Exec exec = Exec::parallel);

// Matching against an explicit matrix: each round samples one observation
// per user, shuffles them, and scores how many the rule pairs correctly.
//   assignment  minimum-cost perfect matching on -log P[user, obs]
//   lifted      the best single-user rule applied slot by slot
//   constant    every slot mapped to user 0 (base line)
enum class MatchingRule { assignment, lifted, constant };
ExperimentReport run_matching_experiment(const RepresentationMatrix& p,
                                         MatchingRule rule,
                                         std::uint64_t rounds,
                                         std::uint64_t seed,
                                         Exec exec = Exec::parallel);

// One random-user experiment per requested epoch count, sharing the
// population, trial users and per-epoch site draws so the curves are
// paired across epoch counts.
std::vector<std::pair<std::uint32_t, ExperimentReport>> run_epoch_sweep(
    const SimulationConfig& config, AttackMethod method,
    const std::vector<std::uint32_t>& epoch_counts, std::uint64_t trials,
    Exec exec = Exec::parallel);

struct CurvePoint {
  std::uint32_t epochs = 0;
  std::string method;
  double accuracy = 0;
  double ci_low = 0, ci_high = 0;
};

std::vector<CurvePoint> curve_from_reports(
    const std::vector<std::pair<std::uint32_t, ExperimentReport>>& reports);

// Accuracy-versus-epochs artifact, rows sorted by (epochs, method).
void emit_accuracy_curve(std::vector<CurvePoint> points, std::ostream& out,
                         OutputFormat format);

// Mutual information (bits) between what two sites observe, for every
// epoch pair; pairwise_bits[s * epochs + t] relates site1's epoch s to
// site2's epoch t, so the diagonal holds the same-epoch values.
struct MiReport {
  std::uint32_t epochs = 0;
  std::uint64_t samples = 0;
  std::vector<double> pairwise_bits;

  double within(std::uint32_t s) const { return pairwise_bits[s * epochs + s]; }
  nlohmann::json to_json() const;
};

// Plug-in estimate with the small-sample occupancy correction
// ((K_a - 1) + (K_b - 1) - (K_ab - 1)) / (2 n ln 2) added, which cancels
// the upward bias that makes independent variables look informative.
double plug_in_mi_bits(std::span<const std::uint32_t> a,
                       std::span<const std::uint32_t> b, std::uint32_t support);

MiReport plug_in_mutual_information(const topics::SequenceSet& site1,
                                    const topics::SequenceSet& site2,
                                    std::uint32_t support);

// Listening histories: one sorted set of distinct liked items per user.
struct SongDataset {
  std::vector<std::vector<std::uint32_t>> liked;
  std::size_t item_count = 0;
  std::vector<std::string> user_keys, item_keys;
};

// Tab-separated triplets (user, item, play count), one per line. With
// skip_malformed unparseable lines are dropped, otherwise they abort the
// load. Duplicate (user, item) pairs collapse to one liked entry.
SongDataset ingest_song_dataset(const std::string& path, bool skip_malformed);

// Two-database sampling attack. Site 1 holds one sample of observed_items
// liked items per user, drawn once up front; each trial draws a fresh
// same-size sample for a uniform user as the site-2 query and guesses the
// user whose site-1 sample has the largest multiset overlap with it, ties
// to the lowest user index.
ExperimentReport run_song_experiment(const SongDataset& dataset,
                                     std::uint32_t observed_items,
                                     std::uint64_t trials, std::uint64_t seed,
                                     bool with_replacement = true,
                                     Exec exec = Exec::parallel);

struct PredictionRecord {
  std::uint64_t trial = 0, true_user = 0, predicted_user = 0;
  bool correct = false;
};

// CSV with header trial,true_user,predicted_user,correct (correct as 0/1).
void save_predictions_csv(std::span<const PredictionRecord> records,
                          std::ostream& out);

}  // namespace reid::harness
