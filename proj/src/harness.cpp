#include "reid/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "reid/bounds.hpp"
#include "reid/errors.hpp"
#include "reid/io.hpp"

namespace reid::harness {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t sum_u8(const std::vector<std::uint8_t>& v) {
  std::uint64_t total = 0;
  for (auto b : v) total += b;
  return total;
}

ExperimentReport finish_report(std::string method, std::uint64_t trials,
                               std::uint64_t successes, std::uint64_t seed,
                               json config_echo, Clock::time_point start) {
  ExperimentReport r;
  r.method = std::move(method);
  r.trials = trials;
  r.successes = successes;
  r.accuracy = trials ? static_cast<double>(successes) / trials : 0.0;
  auto ci = wilson95(successes, trials);
  r.ci_low = ci.low;
  r.ci_high = ci.high;
  r.master_seed = seed;
  r.config_echo = std::move(config_echo);
  r.wall_seconds = seconds_since(start);
  return r;
}

}  // namespace

WilsonInterval wilson95(std::uint64_t successes, std::uint64_t trials) {
  if (trials == 0) return {0.0, 1.0};
  const double z = 1.959963984540054;  // standard normal 97.5% quantile
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = p + z2 / (2.0 * n);
  const double spread = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return {std::max(0.0, (center - spread) / denom),
          std::min(1.0, (center + spread) / denom)};
}

json ExperimentReport::to_json(bool include_timing) const {
  json j{{"method", method},       {"trials", trials},
         {"successes", successes}, {"accuracy", accuracy},
         {"ci_low", ci_low},       {"ci_high", ci_high},
         {"seed", master_seed},    {"config", config_echo}};
  if (include_timing) j["wall_seconds"] = wall_seconds;
  return j;
}

std::string ExperimentReport::canonical_text() const {
  return to_json(false).dump(2) + "\n";
}

SimulationConfig SimulationConfig::from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    static const char* known[] = {"taxonomy_size", "top_set_size", "flip_prob",
                                  "epochs",        "population",   "users",
                                  "seed"};
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) {
          return key == k;
        }) == std::end(known))
      throw ValidationError("unknown config key: " + key);
  }

  SimulationConfig c;
  try {
    c.topics.taxonomy_size = j.value("taxonomy_size", 350u);
    c.topics.top_set_size = j.value("top_set_size", 5u);
    c.topics.flip_prob = j.value("flip_prob", 0.05);
    c.topics.epochs = j.value("epochs", 1u);
    c.users = j.value("users", std::size_t{10000});
    c.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("population")) {
      const json& p = j.at("population");
      if (!p.is_object()) throw ValidationError("population must be an object");
      for (const auto& [key, value] : p.items()) {
        if (key != "kind" && key != "exponent" && key != "weights" &&
            key != "time_invariant")
          throw ValidationError("unknown population key: " + key);
      }
      std::string kind = p.value("kind", "zipf");
      if (kind == "zipf")
        c.population.kind = topics::PopulationKind::zipf;
      else if (kind == "uniform")
        c.population.kind = topics::PopulationKind::uniform;
      else if (kind == "explicit")
        c.population.kind = topics::PopulationKind::explicit_weights;
      else
        throw ValidationError("unknown population kind: " + kind);
      c.population.zipf_exponent = p.value("exponent", 1.0);
      c.population.time_invariant = p.value("time_invariant", true);
      if (p.contains("weights")) {
        const json& w = p.at("weights");
        if (!w.is_array() || w.empty())
          throw ValidationError("population weights must be a nonempty array");
        if (w.front().is_array())
          for (const auto& row : w)
            c.population.explicit_epoch_weights.push_back(
                row.get<std::vector<double>>());
        else
          c.population.explicit_epoch_weights.push_back(
              w.get<std::vector<double>>());
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config has a wrongly typed field: ") +
                          e.what());
  }
  c.topics.validate();
  c.population.validate(c.topics);
  if (c.users < 1) throw ValidationError("need at least one user");
  return c;
}

SimulationConfig SimulationConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("malformed JSON: ") + e.what());
  }
  return from_json(j);
}

json SimulationConfig::to_json() const {
  json pop;
  switch (population.kind) {
    case topics::PopulationKind::zipf:
      pop = {{"kind", "zipf"}, {"exponent", population.zipf_exponent}};
      break;
    case topics::PopulationKind::uniform:
      pop = {{"kind", "uniform"}};
      break;
    case topics::PopulationKind::explicit_weights:
      pop = {{"kind", "explicit"}, {"weights", population.explicit_epoch_weights}};
      break;
  }
  pop["time_invariant"] = population.time_invariant;
  return json{{"taxonomy_size", topics.taxonomy_size},
              {"top_set_size", topics.top_set_size},
              {"flip_prob", topics.flip_prob},
              {"epochs", topics.epochs},
              {"population", std::move(pop)},
              {"users", users},
              {"seed", seed}};
}

std::string method_name(AttackMethod method) {
  return method == AttackMethod::hamming ? "hamming" : "weighted";
}

namespace {

// Shared core of the simulated random-user experiments: a database of
// site-1 sequences truncated to `epochs`, fresh site-2 queries per trial.
ExperimentReport run_simulated_trials(const SimulationConfig& config,
                                      const topics::TopSetTable& table,
                                      const topics::SequenceSet& site1_full,
                                      AttackMethod method, std::uint32_t epochs,
                                      std::uint64_t trials, Exec exec,
                                      Clock::time_point start) {
  topics::TopicsConfig cfg = config.topics;
  cfg.epochs = epochs;

  topics::SequenceSet site1;
  site1.users = site1_full.users;
  site1.epochs = epochs;
  site1.topics.resize(site1.users * epochs);
  for (std::size_t u = 0; u < site1.users; ++u)
    for (std::uint32_t s = 0; s < epochs; ++s)
      site1.topics[u * epochs + s] = site1_full.topic(u, s);

  attacks::PopularityTable pop;
  const attacks::WeightedAttack* weighted = nullptr;
  attacks::WeightedAttack engine_storage =
      [&]() -> attacks::WeightedAttack {
    if (method == AttackMethod::weighted) {
      pop = attacks::estimate_popularity_table(site1, cfg, kEstimatorDelta,
                                               config.population.time_invariant);
    } else {
      // hamming needs no popularity; build a throwaway uniform table so
      // the engine type stays uniform across branches
      pop.pooled = true;
      pop.per_epoch.push_back(attacks::EpochPopularity{
          std::vector<double>(cfg.taxonomy_size, 1.0),
          std::vector<double>(cfg.taxonomy_size, 1.0), 0.0, 1.0, 1});
    }
    return attacks::WeightedAttack(site1, pop, cfg);
  }();
  if (method == AttackMethod::weighted) weighted = &engine_storage;

  std::vector<std::uint8_t> correct(trials, 0);
  for_each_index(exec, trials, [&](std::size_t t) {
    Stream pick(config.seed, {Purpose::trial_user, t, 0, 0, 0});
    const std::size_t u = pick.next_below(site1.users);
    std::vector<std::uint32_t> query(epochs);
    for (std::uint32_t s = 0; s < epochs; ++s)
      query[s] = topics::sample_topic(u, 2, s, t, table, cfg, config.seed);
    std::size_t pred = weighted ? weighted->predict(query)
                                : attacks::hamming_attack(site1, query);
    correct[t] = pred == u;
  });

  json echo = config.to_json();
  echo["epochs"] = epochs;
  echo["method"] = method_name(method);
  echo["trials"] = trials;
  return finish_report(method_name(method), trials, sum_u8(correct), config.seed,
                       std::move(echo), start);
}

topics::SequenceSet build_site1(const SimulationConfig& config,
                                const topics::TopSetTable& table, Exec exec) {
  topics::SequenceSet site1;
  site1.users = config.users;
  site1.epochs = config.topics.epochs;
  site1.topics.resize(config.users * config.topics.epochs);
  for_each_index(exec, config.users, [&](std::size_t u) {
    for (std::uint32_t s = 0; s < config.topics.epochs; ++s)
      site1.topics[u * config.topics.epochs + s] =
          topics::get_topic(u, 1, s, table, config.topics, config.seed);
  });
  return site1;
}

}  // namespace

ExperimentReport run_random_user_experiment(const SimulationConfig& config,
                                            AttackMethod method,
                                            std::uint64_t trials, Exec exec) {
  if (trials < 1) throw ValidationError("need at least one trial");
  auto start = Clock::now();
  auto table = topics::generate_population(config.users, config.topics,
                                           config.population, config.seed, exec);
  auto site1 = build_site1(config, table, exec);
  return run_simulated_trials(config, table, site1, method, config.topics.epochs,
                              trials, exec, start);
}

std::vector<std::pair<std::uint32_t, ExperimentReport>> run_epoch_sweep(
    const SimulationConfig& config, AttackMethod method,
    const std::vector<std::uint32_t>& epoch_counts, std::uint64_t trials,
    Exec exec) {
  if (epoch_counts.empty()) throw ValidationError("no epoch counts requested");
  if (trials < 1) throw ValidationError("need at least one trial");
  std::uint32_t max_epochs = 0;
  for (auto r : epoch_counts) {
    if (r < 1) throw ValidationError("epoch counts must be positive");
    max_epochs = std::max(max_epochs, r);
  }

  SimulationConfig full = config;
  full.topics.epochs = max_epochs;
  auto table = topics::generate_population(full.users, full.topics,
                                           full.population, full.seed, exec);
  auto site1 = build_site1(full, table, exec);

  // Population and per-trial streams do not depend on the epoch count, so
  // every curve point sees the same users and the same site draws for the
  // epochs it shares with the others.
  std::vector<std::pair<std::uint32_t, ExperimentReport>> out;
  for (auto r : epoch_counts) {
    auto point_start = Clock::now();
    out.emplace_back(r, run_simulated_trials(full, table, site1, method, r,
                                             trials, exec, point_start));
  }
  return out;
}

ExperimentReport run_random_user_experiment(const RepresentationMatrix& p,
                                            const PredictionMatrix& rule,
                                            std::uint64_t trials,
                                            std::uint64_t seed, Exec exec) {
  require_valid(p);
  require_valid(rule);
  if (rule.reps() != p.reps() || rule.users() != p.users())
    throw ValidationError("prediction rule shape does not match the matrix");
  if (trials < 1) throw ValidationError("need at least one trial");
  auto start = Clock::now();

  std::vector<std::uint8_t> correct(trials, 0);
  for_each_index(exec, trials, [&](std::size_t t) {
    Stream pick(seed, {Purpose::trial_user, t, 0, 0, 0});
    const std::size_t u = pick.next_below(p.users());
    Stream draw(seed, {Purpose::matrix_draw, t, u, 0, 0});
    const std::uint32_t o = sample_observation(p, u, draw);
    Stream rule_stream(seed, {Purpose::rule_draw, t, 0, 0, 0});
    correct[t] = sample_prediction(rule, o, rule_stream) == u;
  });

  json echo{{"n", p.users()}, {"m", p.reps()}, {"trials", trials}};
  return finish_report("matrix-rule", trials, sum_u8(correct), seed,
                       std::move(echo), start);
}

ExperimentReport run_matching_experiment(const RepresentationMatrix& p,
                                         MatchingRule rule, std::uint64_t rounds,
                                         std::uint64_t seed, Exec exec) {
  require_valid(p);
  if (rounds < 1) throw ValidationError("need at least one round");
  const std::size_t n = p.users();

  auto start = Clock::now();
  bounds::LiftedMatchingRule lifted;
  if (rule == MatchingRule::lifted)
    lifted = bounds::lift_random_user_rule(bounds::optimal_full_info_rule(p));

  std::vector<std::uint32_t> round_correct(rounds, 0);
  for_each_index(exec, rounds, [&](std::size_t t) {
    ObservationVector obs = sample_observation_vector(p, seed, t);

    // slot j carries the observation of user slot_user[j]
    std::vector<std::size_t> slot_user(n);
    std::iota(slot_user.begin(), slot_user.end(), 0);
    Stream shuffle_stream(seed, {Purpose::tie_break, t, 0, 1, 0});
    shuffle(slot_user, shuffle_stream);

    std::vector<std::size_t> assigned(n, 0);
    switch (rule) {
      case MatchingRule::assignment: {
        attacks::AttackScoreMatrix scores;
        scores.users = n;
        scores.queries = n;
        scores.scores.resize(n * n);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j)
            scores.scores[i * n + j] = -std::log(p(i, obs[slot_user[j]]));
        Stream tie_stream(seed, {Purpose::tie_break, t, 0, 2, 0});
        assigned = attacks::matching_assignment(scores, tie_stream);
        break;
      }
      case MatchingRule::lifted: {
        std::vector<std::uint32_t> slot_obs(n);
        for (std::size_t j = 0; j < n; ++j) slot_obs[j] = obs[slot_user[j]];
        auto preds = lifted.predict(slot_obs, seed, t);
        for (std::size_t j = 0; j < n; ++j) assigned[j] = preds[j];
        break;
      }
      case MatchingRule::constant:
        break;  // every slot already maps to user 0
    }

    std::uint32_t hits = 0;
    for (std::size_t j = 0; j < n; ++j) hits += assigned[j] == slot_user[j];
    round_correct[t] = hits;
  });

  std::uint64_t successes = 0;
  for (auto c : round_correct) successes += c;
  const char* rule_name = rule == MatchingRule::assignment ? "assignment"
                          : rule == MatchingRule::lifted   ? "lifted"
                                                           : "constant";
  json echo{{"n", n}, {"m", p.reps()}, {"rule", rule_name}, {"rounds", rounds}};
  return finish_report(std::string("matching-") + rule_name, rounds * n,
                       successes, seed, std::move(echo), start);
}

std::vector<CurvePoint> curve_from_reports(
    const std::vector<std::pair<std::uint32_t, ExperimentReport>>& reports) {
  std::vector<CurvePoint> points;
  points.reserve(reports.size());
  for (const auto& [epochs, report] : reports)
    points.push_back(
        {epochs, report.method, report.accuracy, report.ci_low, report.ci_high});
  return points;
}

void emit_accuracy_curve(std::vector<CurvePoint> points, std::ostream& out,
                         OutputFormat format) {
  std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) {
    return a.epochs != b.epochs ? a.epochs < b.epochs : a.method < b.method;
  });
  if (format == OutputFormat::csv) {
    out << "epochs,method,accuracy,ci_low,ci_high\n";
    for (const auto& pt : points)
      out << pt.epochs << ',' << pt.method << ',' << format_double(pt.accuracy)
          << ',' << format_double(pt.ci_low) << ',' << format_double(pt.ci_high)
          << '\n';
    return;
  }
  json arr = json::array();
  for (const auto& pt : points)
    arr.push_back({{"epochs", pt.epochs},
                   {"method", pt.method},
                   {"accuracy", pt.accuracy},
                   {"ci_low", pt.ci_low},
                   {"ci_high", pt.ci_high}});
  out << arr.dump(2) << '\n';
}

namespace {

struct Counts {
  std::vector<std::uint64_t> a, b;
  std::unordered_map<std::uint64_t, std::uint64_t> joint;
};

double entropy_term(std::uint64_t count, double n) {
  if (count == 0) return 0;
  const double p = static_cast<double>(count) / n;
  return -p * std::log(p);
}

}  // namespace

double plug_in_mi_bits(std::span<const std::uint32_t> a,
                       std::span<const std::uint32_t> b, std::uint32_t support) {
  if (a.size() != b.size())
    throw ValidationError("paired samples must have equal length");
  if (a.empty()) throw ValidationError("cannot estimate from zero samples");

  Counts c;
  c.a.assign(support, 0);
  c.b.assign(support, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] >= support || b[i] >= support)
      throw ValidationError("sample outside the declared support");
    ++c.a[a[i]];
    ++c.b[b[i]];
    ++c.joint[(static_cast<std::uint64_t>(a[i]) << 32) | b[i]];
  }

  const double n = static_cast<double>(a.size());
  double h_a = 0, h_b = 0, h_ab = 0;
  std::size_t k_a = 0, k_b = 0;
  for (auto count : c.a) {
    h_a += entropy_term(count, n);
    k_a += count > 0;
  }
  for (auto count : c.b) {
    h_b += entropy_term(count, n);
    k_b += count > 0;
  }
  for (const auto& [key, count] : c.joint) h_ab += entropy_term(count, n);
  const std::size_t k_ab = c.joint.size();

  // occupancy correction applied to each entropy estimate
  const double corr =
      (static_cast<double>(k_a - 1) + static_cast<double>(k_b - 1) -
       static_cast<double>(k_ab - 1)) /
      (2.0 * n);
  const double mi_nats = h_a + h_b - h_ab + corr;
  return mi_nats / std::numbers::ln2_v<double>;
}

MiReport plug_in_mutual_information(const topics::SequenceSet& site1,
                                    const topics::SequenceSet& site2,
                                    std::uint32_t support) {
  if (site1.users != site2.users || site1.epochs != site2.epochs)
    throw ValidationError("sequence sets must cover the same users and epochs");
  if (site1.users == 0) throw ValidationError("cannot estimate from zero users");

  const std::uint32_t r = site1.epochs;
  MiReport report;
  report.epochs = r;
  report.samples = site1.users;
  report.pairwise_bits.resize(static_cast<std::size_t>(r) * r);

  std::vector<std::uint32_t> col_a(site1.users), col_b(site1.users);
  for (std::uint32_t s = 0; s < r; ++s) {
    for (std::size_t u = 0; u < site1.users; ++u) col_a[u] = site1.topic(u, s);
    for (std::uint32_t t = 0; t < r; ++t) {
      for (std::size_t u = 0; u < site2.users; ++u) col_b[u] = site2.topic(u, t);
      report.pairwise_bits[s * r + t] = plug_in_mi_bits(col_a, col_b, support);
    }
  }
  return report;
}

nlohmann::json MiReport::to_json() const {
  json pairwise = json::array();
  for (std::uint32_t s = 0; s < epochs; ++s) {
    json row = json::array();
    for (std::uint32_t t = 0; t < epochs; ++t)
      row.push_back(pairwise_bits[s * epochs + t]);
    pairwise.push_back(std::move(row));
  }
  json within = json::array();
  for (std::uint32_t s = 0; s < epochs; ++s) within.push_back(this->within(s));
  return json{{"epochs", epochs},
              {"samples", samples},
              {"within_epoch_bits", std::move(within)},
              {"pairwise_bits", std::move(pairwise)}};
}

SongDataset ingest_song_dataset(const std::string& path, bool skip_malformed) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);

  SongDataset data;
  std::unordered_map<std::string, std::uint32_t> user_index, item_index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string::npos ? tab1 : line.find('\t', tab1 + 1);
    bool ok = tab2 != std::string::npos && line.find('\t', tab2 + 1) == std::string::npos;
    std::string user, item;
    long long plays = 0;
    if (ok) {
      user = line.substr(0, tab1);
      item = line.substr(tab1 + 1, tab2 - tab1 - 1);
      const std::string count = line.substr(tab2 + 1);
      char* end = nullptr;
      plays = std::strtoll(count.c_str(), &end, 10);
      ok = !user.empty() && !item.empty() && end && *end == '\0' &&
           end != count.c_str() && plays >= 1;
    }
    if (!ok) {
      if (skip_malformed) continue;
      throw IoError("malformed triplet at line " + std::to_string(line_no));
    }

    auto [uit, user_added] = user_index.try_emplace(
        user, static_cast<std::uint32_t>(data.user_keys.size()));
    if (user_added) {
      data.user_keys.push_back(user);
      data.liked.emplace_back();
    }
    auto [iit, item_added] = item_index.try_emplace(
        item, static_cast<std::uint32_t>(data.item_keys.size()));
    if (item_added) data.item_keys.push_back(item);
    data.liked[uit->second].push_back(iit->second);
  }

  for (auto& items : data.liked) {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
  }
  data.item_count = data.item_keys.size();
  if (data.liked.empty()) throw ValidationError("dataset contains no users");
  return data;
}

ExperimentReport run_song_experiment(const SongDataset& dataset,
                                     std::uint32_t observed_items,
                                     std::uint64_t trials, std::uint64_t seed,
                                     bool with_replacement, Exec exec) {
  const std::size_t n = dataset.liked.size();
  if (n == 0) throw ValidationError("dataset contains no users");
  if (observed_items < 1) throw ValidationError("need at least one observed item");
  if (trials < 1) throw ValidationError("need at least one trial");
  if (!with_replacement)
    for (const auto& items : dataset.liked)
      if (items.size() < observed_items)
        throw ValidationError(
            "a user has fewer liked items than the sample size; "
            "use sampling with replacement");

  auto start = Clock::now();

  auto sample_items = [&](const std::vector<std::uint32_t>& items,
                          Stream& draw) {
    std::vector<std::uint32_t> sample;
    sample.reserve(observed_items);
    if (with_replacement) {
      for (std::uint32_t i = 0; i < observed_items; ++i)
        sample.push_back(items[draw.next_below(items.size())]);
    } else {
      // partial Fisher-Yates over a scratch copy
      std::vector<std::uint32_t> scratch(items.begin(), items.end());
      for (std::uint32_t i = 0; i < observed_items; ++i) {
        std::size_t j = i + draw.next_below(scratch.size() - i);
        std::swap(scratch[i], scratch[j]);
        sample.push_back(scratch[i]);
      }
    }
    std::sort(sample.begin(), sample.end());
    return sample;
  };

  // The attacker's database: every user's site-1 sample, drawn once.
  // Indexed as item -> (user, multiplicity in that user's sample).
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> index(
      dataset.item_count);
  for (std::size_t u = 0; u < n; ++u) {
    Stream draw(seed, {Purpose::song_draw, 0, u, 1, 0});
    auto sample = sample_items(dataset.liked[u], draw);
    for (std::size_t i = 0; i < sample.size();) {
      std::size_t j = i;
      while (j < sample.size() && sample[j] == sample[i]) ++j;
      index[sample[i]].push_back({static_cast<std::uint32_t>(u),
                                  static_cast<std::uint32_t>(j - i)});
      i = j;
    }
  }

  std::vector<std::uint8_t> correct(trials, 0);
  for_each_index(exec, trials, [&](std::size_t t) {
    Stream pick(seed, {Purpose::trial_user, t, 0, 0, 0});
    const std::size_t u = pick.next_below(n);

    Stream draw(seed, {Purpose::song_draw, t, u, 2, 0});
    auto query = sample_items(dataset.liked[u], draw);

    // score = multiset overlap: sum over items of min(query count,
    // candidate's site-1 count); only candidates sharing an item score
    std::unordered_map<std::uint32_t, std::uint32_t> overlap;
    for (std::size_t i = 0; i < query.size();) {
      std::size_t j = i;
      while (j < query.size() && query[j] == query[i]) ++j;
      const auto q_count = static_cast<std::uint32_t>(j - i);
      for (auto [holder, count] : index[query[i]])
        overlap[holder] += std::min(q_count, count);
      i = j;
    }
    // every map entry is >= 1, so (0, 0) only survives an empty overlap,
    // matching the lowest-index tie rule over all-zero scores
    std::uint32_t best_user = 0, best_score = 0;
    for (auto [candidate, score] : overlap)
      if (score > best_score || (score == best_score && candidate < best_user)) {
        best_user = candidate;
        best_score = score;
      }
    correct[t] = best_user == u;
  });

  json echo{{"users", n},
            {"items", dataset.item_count},
            {"observed_items", observed_items},
            {"with_replacement", with_replacement},
            {"trials", trials}};
  return finish_report("song-overlap", trials, sum_u8(correct), seed,
                       std::move(echo), start);
}

void save_predictions_csv(std::span<const PredictionRecord> records,
                          std::ostream& out) {
  out << "trial,true_user,predicted_user,correct\n";
  for (const auto& r : records)
    out << r.trial << ',' << r.true_user << ',' << r.predicted_user << ','
        << (r.correct ? 1 : 0) << '\n';
}

}  // namespace reid::harness
