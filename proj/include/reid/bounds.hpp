#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "reid/matrix.hpp"
#include "reid/rng.hpp"

namespace reid::bounds {

enum class BoundKind { exact, upper_bound };

// Every bound is reported clamped into [0, 1] alongside the raw formula
// value and a tag naming the rule that produced it, so downstream output
// never hides that a formula exceeded 1.
struct BoundReport {
  double value = 0;
  double raw = 0;
  BoundKind kind = BoundKind::upper_bound;
  std::string source;
};

// Sum over columns of the per-column maximum entry.
double column_max_sum(const RepresentationMatrix& p);

// Success probability of prediction rule A against P when the target user
// is uniform: (1/n) * sum_{i,o} P[i,o] * A[o,i]. Exact, no sampling.
double exact_random_user_accuracy(const RepresentationMatrix& p,
                                  const PredictionMatrix& a);

// Best attainable random-user accuracy over all prediction rules:
// (1/n) * column_max_sum(P). Tight; optimal_full_info_rule achieves it.
BoundReport max_accuracy_bound(const RepresentationMatrix& p);

// Deterministic 0/1 rule mapping each representation to the user most
// likely to produce it, ties to the lowest user index.
PredictionMatrix optimal_full_info_rule(const RepresentationMatrix& p);

// Best attainable accuracy when the attacker only knows a finite prior
// over matrices plus one observation per user: the max-accuracy bound of
// the posterior mean matrix. Exact for the posterior-optimal attacker.
BoundReport partial_info_bound(const FinitePrior& prior,
                               const ObservationVector& observed);

// Upper bound on the per-user success fraction when an attacker must
// match n fresh observations back to the n users:
// m/n - (1/n) * sum_o prod_i (1 - P[i,o]). Can exceed 1; see raw.
BoundReport matching_accuracy_bound(const RepresentationMatrix& p);

// Single-user rule applied to every slot of an observation vector
// independently. Per-user matching accuracy equals the rule's random-user
// accuracy, since each coordinate is a fresh random-user instance.
struct LiftedMatchingRule {
  PredictionMatrix rule;

  // One prediction per slot, each from its own substream so slot order
  // never shifts another slot's draw.
  std::vector<std::uint32_t> predict(std::span<const std::uint32_t> observed,
                                     std::uint64_t master_seed,
                                     std::uint64_t trial) const;
};

LiftedMatchingRule lift_random_user_rule(PredictionMatrix a);

// Smallest delta for which P's rows satisfy (epsilon, delta)
// indistinguishability: max over ordered user pairs (i, j) of
// sum_o max(0, P[i,o] - e^epsilon * P[j,o]).
double check_ldp(const RepresentationMatrix& p, double epsilon);

// Accuracy ceiling implied by (epsilon, delta) indistinguishability:
// (e^epsilon + min(n, m) * delta) / n.
BoundReport ldp_accuracy_bound(double epsilon, double delta, std::size_t n,
                               std::size_t m);

// Largest k such that P is a k-anonymous release: every row one-hot and
// every realized representation shared by at least k users. Returns 0 if
// any row is not one-hot (within kStochasticTol).
std::size_t check_k_anonymity(const RepresentationMatrix& p);

// Accuracy ceiling 1/k for a k-anonymous release.
BoundReport kanon_accuracy_bound(std::size_t k);

// Accuracy ceiling from the mutual information (in nats) between user
// identity and representation: (1 + mi) / ln(n). Requires n >= 2.
BoundReport fano_bound(double mi_nats, std::size_t n);

// n x 2 matrix whose rows interpolate between (1,0) and (0,1). Satisfies
// no nontrivial indistinguishability (delta = 1 at epsilon = 0) and is not
// k-anonymous for n > 2, yet its max accuracy bound is only 2/n.
RepresentationMatrix construct_ldp_kanon_counterexample(std::size_t n);

// n x 3n/2 matrix (n even) pairing up users on shared representations, so
// matching the whole population succeeds more often per user than
// identifying one user in isolation. Random-user bound 3/4, matching
// bound 7/8.
RepresentationMatrix construct_matching_gap_instance(std::size_t n);

}  // namespace reid::bounds
