#include <cmath>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include <json.hpp>
#include "reid/bounds.hpp"
#include "reid/errors.hpp"
#include "reid/harness.hpp"
#include "reid/rng.hpp"
#include "reid/topics.hpp"

using namespace reid;
using namespace reid::harness;
using nlohmann::json;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  std::string path = std::string("/tmp/reid_harness_test_") + name;
  std::ofstream out(path);
  out << content;
  return path;
}

SimulationConfig tiny_config() {
  SimulationConfig c;
  c.topics.taxonomy_size = 20;
  c.topics.top_set_size = 3;
  c.topics.flip_prob = 0.1;
  c.topics.epochs = 2;
  c.users = 50;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("score intervals at pinned reference points") {
  auto empty = wilson95(0, 0);
  CHECK(empty.low == 0.0);
  CHECK(empty.high == 1.0);

  auto half = wilson95(50, 100);
  CHECK(half.low == doctest::Approx(0.4038315303659956).epsilon(1e-12));
  CHECK(half.high == doctest::Approx(0.5961684696340044).epsilon(1e-12));

  auto skew = wilson95(3, 7);
  CHECK(skew.low == doctest::Approx(0.15821985525146975).epsilon(1e-12));
  CHECK(skew.high == doctest::Approx(0.7495416354723428).epsilon(1e-12));

  auto all = wilson95(10, 10);
  CHECK(all.high == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(all.low == doctest::Approx(0.7224672001371107).epsilon(1e-12));

  auto none = wilson95(0, 10);
  CHECK(none.low == doctest::Approx(0.0).scale(1).epsilon(1e-12));
  CHECK(none.high == doctest::Approx(0.2775327998628892).epsilon(1e-12));

  // symmetry: flipping successes mirrors the interval
  for (std::uint64_t k : {0, 1, 4, 9}) {
    auto a = wilson95(k, 9);
    auto b = wilson95(9 - k, 9);
    CHECK(a.low == doctest::Approx(1.0 - b.high).scale(1).epsilon(1e-12));
  }
}

TEST_CASE("score intervals cover the true proportion") {
  const double p = 0.3;
  const int reps = 200, n = 500;
  int covered = 0;
  for (int r = 0; r < reps; ++r) {
    Stream s(91, {Purpose::generic, static_cast<std::uint64_t>(r), 0, 0, 0});
    std::uint64_t hits = 0;
    for (int i = 0; i < n; ++i) hits += s.next_double() < p;
    auto ci = wilson95(hits, n);
    covered += ci.low <= p && p <= ci.high;
  }
  // nominal 95%; far below that means the interval is broken
  CHECK(covered >= 176);
}

TEST_CASE("reports serialize canonically without timing") {
  ExperimentReport r;
  r.method = "demo";
  r.trials = 10;
  r.successes = 7;
  r.accuracy = 0.7;
  r.ci_low = 0.4;
  r.ci_high = 0.9;
  r.master_seed = 3;
  r.config_echo = json{{"users", 2}};
  r.wall_seconds = 1.25;

  auto timed = r.to_json(true);
  CHECK(timed.contains("wall_seconds"));
  auto untimed = r.to_json(false);
  CHECK(!untimed.contains("wall_seconds"));
  CHECK(untimed["method"] == "demo");
  CHECK(untimed["successes"] == 7);

  ExperimentReport slower = r;
  slower.wall_seconds = 99.0;
  CHECK(r.canonical_text() == slower.canonical_text());
  CHECK(r.canonical_text().find("wall") == std::string::npos);
}

TEST_CASE("configs parse strictly and round-trip") {
  json j{{"taxonomy_size", 3},
         {"top_set_size", 2},
         {"flip_prob", 0.2},
         {"epochs", 3},
         {"users", 77},
         {"seed", 9},
         {"population",
          json{{"kind", "explicit"},
               {"weights", json::array({json::array({1, 2, 3})})},
               {"time_invariant", true}}}};
  auto c = SimulationConfig::from_json(j);
  CHECK(c.topics.taxonomy_size == 3);
  CHECK(c.topics.top_set_size == 2);
  CHECK(c.topics.flip_prob == 0.2);
  CHECK(c.topics.epochs == 3);
  CHECK(c.users == 77);
  CHECK(c.seed == 9);
  CHECK(c.population.kind == topics::PopulationKind::explicit_weights);
  REQUIRE(c.population.explicit_epoch_weights.size() == 1);
  CHECK((c.population.explicit_epoch_weights[0] == std::vector<double>{1, 2, 3}));

  auto again = SimulationConfig::from_json(c.to_json());
  CHECK(again.to_json() == c.to_json());

  // a flat weight array is one epoch row
  json flat = j;
  flat["population"]["weights"] = json::array({2, 1, 1});
  auto cf = SimulationConfig::from_json(flat);
  REQUIRE(cf.population.explicit_epoch_weights.size() == 1);
  CHECK((cf.population.explicit_epoch_weights[0] == std::vector<double>{2, 1, 1}));

  // defaults fill everything
  auto d = SimulationConfig::from_json(json::object());
  CHECK(d.topics.taxonomy_size == 350);
  CHECK(d.topics.top_set_size == 5);
  CHECK(d.users == 10000);
  CHECK(d.population.kind == topics::PopulationKind::zipf);
}

TEST_CASE("configs reject unknown keys and bad values") {
  CHECK_THROWS_AS(SimulationConfig::from_json(json{{"topics", 350}}),
                  ValidationError);
  CHECK_THROWS_AS(SimulationConfig::from_json(
                      json{{"population", json{{"kinds", "zipf"}}}}),
                  ValidationError);
  CHECK_THROWS_AS(SimulationConfig::from_json(
                      json{{"population", json{{"kind", "normal"}}}}),
                  ValidationError);
  CHECK_THROWS_AS(SimulationConfig::from_json(json{{"users", 0}}),
                  ValidationError);
  CHECK_THROWS_AS(SimulationConfig::from_json(json{{"flip_prob", "high"}}),
                  ValidationError);
  CHECK_THROWS_AS(SimulationConfig::from_json(json::array()), ValidationError);

  auto path = write_temp("cfg.json", "{\"users\": 5}");
  CHECK(SimulationConfig::load(path).users == 5);
  std::remove(path.c_str());
  CHECK_THROWS_AS(SimulationConfig::load("/tmp/reid_harness_test_missing.json"),
                  IoError);
  auto bad = write_temp("bad.json", "{users");
  CHECK_THROWS_AS(SimulationConfig::load(bad), IoError);
  std::remove(bad.c_str());
}

TEST_CASE("a lone user is always re-identified") {
  SimulationConfig c = tiny_config();
  c.users = 1;
  for (auto method : {AttackMethod::hamming, AttackMethod::weighted}) {
    auto r = run_random_user_experiment(c, method, 50);
    CHECK(r.accuracy == 1.0);
    CHECK(r.trials == 50);
    CHECK(r.successes == 50);
    CHECK(r.method == method_name(method));
  }
}

TEST_CASE("distinct noiseless fingerprints are re-identified exactly") {
  SimulationConfig c;
  c.topics.taxonomy_size = 350;
  c.topics.top_set_size = 1;
  c.topics.flip_prob = 0.0;
  c.topics.epochs = 1;
  c.population.kind = topics::PopulationKind::uniform;
  c.users = 10;
  c.seed = 2026;

  // this seed gives ten distinct single-topic sets, so the noiseless
  // channel leaves nothing to confuse
  auto table = topics::generate_population(c.users, c.topics, c.population, c.seed);
  std::vector<bool> seen(350, false);
  bool distinct = true;
  for (std::size_t u = 0; u < c.users; ++u) {
    auto t = table.set(u, 0)[0];
    if (seen[t]) distinct = false;
    seen[t] = true;
  }
  REQUIRE(distinct);

  auto r = run_random_user_experiment(c, AttackMethod::hamming, 400);
  CHECK(r.accuracy == 1.0);
}

TEST_CASE("indistinguishable users collapse to a uniform guess") {
  SimulationConfig c;
  c.topics.taxonomy_size = 2;
  c.topics.top_set_size = 1;
  c.topics.flip_prob = 0.0;
  c.topics.epochs = 2;
  c.population.kind = topics::PopulationKind::explicit_weights;
  c.population.explicit_epoch_weights = {{1.0, 0.0}};
  c.users = 5;
  c.seed = 12;

  const std::uint64_t trials = 2000;
  auto hamming = run_random_user_experiment(c, AttackMethod::hamming, trials);
  auto weighted = run_random_user_experiment(c, AttackMethod::weighted, trials);

  // every sequence is identical, so both attacks answer user 0 and succeed
  // exactly when user 0 was the target
  CHECK(hamming.successes == weighted.successes);
  double sigma = std::sqrt(0.2 * 0.8 / trials);
  CHECK(std::abs(hamming.accuracy - 0.2) <= 4 * sigma);
  CHECK(hamming.ci_low <= hamming.accuracy);
  CHECK(hamming.accuracy <= hamming.ci_high);
}

TEST_CASE("simulated experiments replay and ignore the execution policy") {
  auto c = tiny_config();
  auto a = run_random_user_experiment(c, AttackMethod::weighted, 300, Exec::serial);
  auto b = run_random_user_experiment(c, AttackMethod::weighted, 300, Exec::parallel);
  CHECK(a.canonical_text() == b.canonical_text());

  auto again = run_random_user_experiment(c, AttackMethod::weighted, 300);
  CHECK(a.canonical_text() == again.canonical_text());

  CHECK(a.config_echo["method"] == "weighted");
  CHECK(a.config_echo["epochs"] == 2);
  CHECK_THROWS_AS(run_random_user_experiment(c, AttackMethod::hamming, 0),
                  ValidationError);
}

TEST_CASE("matrix experiments reproduce exact accuracies") {
  RepresentationMatrix ident(4, 4, {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1});
  auto rule = bounds::optimal_full_info_rule(ident);
  auto r = run_random_user_experiment(ident, rule, 500, 3);
  CHECK(r.accuracy == 1.0);
  CHECK(r.trials == 500);
  CHECK(r.method == "matrix-rule");

  auto gap = bounds::construct_matching_gap_instance(2);
  auto opt = bounds::optimal_full_info_rule(gap);
  const std::uint64_t trials = 10000;
  auto g = run_random_user_experiment(gap, opt, trials, 3);
  double sigma = std::sqrt(0.75 * 0.25 / trials);
  CHECK(std::abs(g.accuracy - 0.75) <= 4 * sigma);
  auto ci = wilson95(g.successes, g.trials);
  CHECK(g.ci_low == ci.low);
  CHECK(g.ci_high == ci.high);

  auto serial = run_random_user_experiment(gap, opt, 2000, 9, Exec::serial);
  auto parallel = run_random_user_experiment(gap, opt, 2000, 9, Exec::parallel);
  CHECK(serial.canonical_text() == parallel.canonical_text());

  PredictionMatrix wrong(2, 4, {0.25, 0.25, 0.25, 0.25, 0.25, 0.25, 0.25, 0.25});
  CHECK_THROWS_AS(run_random_user_experiment(ident, wrong, 10, 0), ValidationError);
  CHECK_THROWS_AS(run_random_user_experiment(ident, rule, 0, 0), ValidationError);
}

TEST_CASE("matching an identity release is trivial") {
  RepresentationMatrix ident(4, 4, {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1});
  auto a = run_matching_experiment(ident, MatchingRule::assignment, 100, 1);
  CHECK(a.accuracy == 1.0);
  CHECK(a.trials == 400);
  CHECK(a.method == "matching-assignment");

  auto l = run_matching_experiment(ident, MatchingRule::lifted, 100, 1);
  CHECK(l.accuracy == 1.0);
  CHECK(l.method == "matching-lifted");

  auto c = run_matching_experiment(ident, MatchingRule::constant, 100, 1);
  CHECK(c.accuracy == 0.25);
  CHECK(c.method == "matching-constant");
}

TEST_CASE("matching beats slot-by-slot prediction on the paired instance") {
  auto gap = bounds::construct_matching_gap_instance(2);
  const std::uint64_t rounds = 20000;

  auto assignment = run_matching_experiment(gap, MatchingRule::assignment, rounds, 7);
  CHECK(std::abs(assignment.accuracy - 0.875) <= 0.01);

  auto lifted = run_matching_experiment(gap, MatchingRule::lifted, rounds, 7);
  CHECK(std::abs(lifted.accuracy - 0.75) <= 0.01);

  auto constant = run_matching_experiment(gap, MatchingRule::constant, rounds, 7);
  CHECK(constant.accuracy == 0.5);

  CHECK(assignment.accuracy > lifted.accuracy);
  CHECK_THROWS_AS(run_matching_experiment(gap, MatchingRule::assignment, 0, 7),
                  ValidationError);
}

TEST_CASE("matching accuracy respects its ceiling on a random matrix") {
  Stream s(97, {Purpose::generic, 0, 0, 0, 0});
  std::vector<double> e(5 * 4);
  for (std::size_t i = 0; i < 5; ++i) {
    double sum = 0;
    for (std::size_t o = 0; o < 4; ++o) {
      e[i * 4 + o] = s.next_double() + 0.01;
      sum += e[i * 4 + o];
    }
    for (std::size_t o = 0; o < 4; ++o) e[i * 4 + o] /= sum;
  }
  RepresentationMatrix p(5, 4, std::move(e));
  const std::uint64_t rounds = 3000;
  auto r = run_matching_experiment(p, MatchingRule::assignment, rounds, 13);
  double bound = bounds::matching_accuracy_bound(p).value;
  CHECK(r.accuracy <= bound + 4 * std::sqrt(0.25 / rounds));

  auto serial = run_matching_experiment(p, MatchingRule::assignment, 500, 13,
                                        Exec::serial);
  auto parallel = run_matching_experiment(p, MatchingRule::assignment, 500, 13,
                                          Exec::parallel);
  CHECK(serial.canonical_text() == parallel.canonical_text());
}

TEST_CASE("epoch sweeps pair their points and replay") {
  auto c = tiny_config();
  c.topics.epochs = 4;
  std::vector<std::uint32_t> counts{1, 2, 4};
  auto sweep = run_epoch_sweep(c, AttackMethod::hamming, counts, 300);
  REQUIRE(sweep.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(sweep[i].first == counts[i]);
    CHECK(sweep[i].second.config_echo["epochs"] == counts[i]);
    CHECK(sweep[i].second.trials == 300);
    CHECK(sweep[i].second.accuracy >= 0.0);
    CHECK(sweep[i].second.accuracy <= 1.0);
  }

  auto again = run_epoch_sweep(c, AttackMethod::hamming, counts, 300);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(sweep[i].second.canonical_text() == again[i].second.canonical_text());

  auto points = curve_from_reports(sweep);
  REQUIRE(points.size() == 3);
  CHECK(points[0].epochs == 1);
  CHECK(points[0].method == "hamming");
  CHECK(points[0].accuracy == sweep[0].second.accuracy);

  CHECK_THROWS_AS(run_epoch_sweep(c, AttackMethod::hamming, {}, 300),
                  ValidationError);
  CHECK_THROWS_AS(run_epoch_sweep(c, AttackMethod::hamming, {0}, 300),
                  ValidationError);
}

TEST_CASE("accuracy curves emit sorted artifacts") {
  std::vector<CurvePoint> points{{4, "weighted", 0.9, 0.8, 0.95},
                                 {1, "weighted", 0.5, 0.4, 0.6},
                                 {1, "hamming", 0.4, 0.3, 0.5}};
  std::ostringstream csv;
  emit_accuracy_curve(points, csv, OutputFormat::csv);
  CHECK(csv.str() ==
        "epochs,method,accuracy,ci_low,ci_high\n"
        "1,hamming,0.4,0.3,0.5\n"
        "1,weighted,0.5,0.4,0.6\n"
        "4,weighted,0.9,0.8,0.95\n");

  std::ostringstream js;
  emit_accuracy_curve(points, js, OutputFormat::json);
  auto parsed = json::parse(js.str());
  REQUIRE(parsed.is_array());
  REQUIRE(parsed.size() == 3);
  CHECK(parsed[0]["epochs"] == 1);
  CHECK(parsed[0]["method"] == "hamming");
  CHECK(parsed[2]["accuracy"] == 0.9);
}

TEST_CASE("mutual information at hand-computed points") {
  std::vector<std::uint32_t> a{0, 0, 1, 1}, b{0, 1, 0, 1};
  CHECK(plug_in_mi_bits(a, b, 2) ==
        doctest::Approx(-0.18033688011112042).epsilon(1e-12));
  CHECK(plug_in_mi_bits(a, a, 2) ==
        doctest::Approx(1.1803368801111205).epsilon(1e-12));

  std::vector<std::uint32_t> shorter{0, 1};
  CHECK_THROWS_AS(plug_in_mi_bits(a, shorter, 2), ValidationError);
  CHECK_THROWS_AS(plug_in_mi_bits({}, {}, 2), ValidationError);
  std::vector<std::uint32_t> big{0, 2, 0, 2};
  CHECK_THROWS_AS(plug_in_mi_bits(a, big, 2), ValidationError);
}

TEST_CASE("pairwise information tables line up with the scalar estimator") {
  topics::SequenceSet site1, site2;
  site1.users = site2.users = 6;
  site1.epochs = site2.epochs = 2;
  site1.topics = {0, 1, 1, 0, 2, 2, 0, 1, 1, 2, 2, 0};
  site2.topics = {0, 2, 1, 1, 2, 0, 0, 0, 1, 2, 2, 1};

  auto report = plug_in_mutual_information(site1, site2, 3);
  CHECK(report.epochs == 2);
  CHECK(report.samples == 6);
  REQUIRE(report.pairwise_bits.size() == 4);

  std::vector<std::uint32_t> col1(6), col2(6);
  for (std::uint32_t s = 0; s < 2; ++s)
    for (std::uint32_t t = 0; t < 2; ++t) {
      for (std::size_t u = 0; u < 6; ++u) {
        col1[u] = site1.topic(u, s);
        col2[u] = site2.topic(u, t);
      }
      CHECK(report.pairwise_bits[s * 2 + t] ==
            doctest::Approx(plug_in_mi_bits(col1, col2, 3)).epsilon(1e-12));
    }
  CHECK(report.within(0) == report.pairwise_bits[0]);
  CHECK(report.within(1) == report.pairwise_bits[3]);

  auto j = report.to_json();
  CHECK(j["epochs"] == 2);
  CHECK(j["samples"] == 6);
  CHECK(j["within_epoch_bits"].size() == 2);
  CHECK(j["pairwise_bits"].size() == 2);

  topics::SequenceSet mismatched = site2;
  mismatched.users = 3;
  mismatched.topics.resize(6);
  CHECK_THROWS_AS(plug_in_mutual_information(site1, mismatched, 3), ValidationError);
}

TEST_CASE("song ingestion maps keys, deduplicates, and sorts") {
  auto path = write_temp("songs.tsv",
                         "alice\they\t3\n"
                         "bob\tjude\t1\n"
                         "alice\tlucy\t2\n"
                         "alice\they\t9\n"
                         "\n"
                         "carol\they\t1\n");
  auto data = ingest_song_dataset(path, false);
  std::remove(path.c_str());

  REQUIRE(data.liked.size() == 3);
  CHECK((data.user_keys == std::vector<std::string>{"alice", "bob", "carol"}));
  CHECK((data.item_keys == std::vector<std::string>{"hey", "jude", "lucy"}));
  CHECK(data.item_count == 3);
  // alice liked hey twice; it collapses and the list is sorted
  CHECK((data.liked[0] == std::vector<std::uint32_t>{0, 2}));
  CHECK(data.liked[1] == std::vector<std::uint32_t>{1});
  CHECK(data.liked[2] == std::vector<std::uint32_t>{0});
}

TEST_CASE("song ingestion honors the malformed-line policy") {
  const std::string content =
      "alice\they\t3\n"
      "broken line without tabs\n"
      "bob\tjude\t0\n"
      "carol\tlucy\tfive\n"
      "dave\tritaa\t2\n";
  auto path = write_temp("songs_bad.tsv", content);
  CHECK_THROWS_AS(ingest_song_dataset(path, false), IoError);
  auto data = ingest_song_dataset(path, true);
  std::remove(path.c_str());
  CHECK((data.user_keys == std::vector<std::string>{"alice", "dave"}));

  CHECK_THROWS_AS(ingest_song_dataset("/tmp/reid_harness_test_absent.tsv", false),
                  IoError);
  auto empty = write_temp("songs_empty.tsv", "");
  CHECK_THROWS_AS(ingest_song_dataset(empty, false), ValidationError);
  std::remove(empty.c_str());
}

TEST_CASE("distinct listening histories are re-identified exactly") {
  SongDataset data;
  data.liked = {{0}, {1}, {2}};
  data.item_count = 3;

  auto r = run_song_experiment(data, 1, 200, 4);
  CHECK(r.accuracy == 1.0);
  CHECK(r.trials == 200);

  auto without = run_song_experiment(data, 1, 200, 4, false);
  CHECK(without.accuracy == 1.0);
}

TEST_CASE("identical listening histories collapse to a uniform guess") {
  SongDataset data;
  data.liked = {{0, 1, 2}, {0, 1, 2}, {0, 1, 2}, {0, 1, 2}};
  data.item_count = 3;

  const std::uint64_t trials = 2000;
  auto r = run_song_experiment(data, 3, trials, 8);
  double sigma = std::sqrt(0.25 * 0.75 / trials);
  CHECK(std::abs(r.accuracy - 0.25) <= 4 * sigma);
}

TEST_CASE("song experiments replay and validate their inputs") {
  SongDataset data;
  data.liked = {{0, 1, 2, 3}, {2, 3, 4}, {0, 4, 5, 6}};
  data.item_count = 7;

  auto a = run_song_experiment(data, 2, 300, 15, true, Exec::serial);
  auto b = run_song_experiment(data, 2, 300, 15, true, Exec::parallel);
  CHECK(a.canonical_text() == b.canonical_text());

  // user 1 has only three liked items
  CHECK_THROWS_AS(run_song_experiment(data, 4, 10, 0, false), ValidationError);
  CHECK_NOTHROW(run_song_experiment(data, 3, 10, 0, false));
  CHECK_THROWS_AS(run_song_experiment(data, 0, 10, 0), ValidationError);
  CHECK_THROWS_AS(run_song_experiment(data, 2, 0, 0), ValidationError);
  CHECK_THROWS_AS(run_song_experiment(SongDataset{}, 1, 10, 0), ValidationError);
}

TEST_CASE("prediction records serialize as flat CSV") {
  std::vector<PredictionRecord> records{{0, 1, 1, true}, {1, 2, 0, false}};
  std::ostringstream out;
  save_predictions_csv(records, out);
  CHECK(out.str() ==
        "trial,true_user,predicted_user,correct\n"
        "0,1,1,1\n"
        "1,2,0,0\n");
}
