// Command line for the re-identification risk toolkit. Subcommands mirror
// the library: exact bounds and privacy checks on explicit matrices,
// population simulation, attacks on sequence dumps, Monte Carlo
// experiments, mutual information and the song-history experiment.
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "reid/attacks.hpp"
#include "reid/bounds.hpp"
#include "reid/errors.hpp"
#include "reid/harness.hpp"
#include "reid/io.hpp"
#include "reid/matrix.hpp"
#include "reid/topics.hpp"

namespace {

using nlohmann::json;

struct OutputTarget {
  std::string path;  // empty means stdout

  void write(const std::string& text) const {
    if (path.empty()) {
      std::cout << text;
      return;
    }
    std::ofstream out(path);
    if (!out) throw reid::IoError("cannot open for writing: " + path);
    out << text;
  }
};

std::string report_csv(const reid::harness::ExperimentReport& r) {
  std::ostringstream out;
  out << "method,trials,successes,accuracy,ci_low,ci_high\n"
      << r.method << ',' << r.trials << ',' << r.successes << ','
      << reid::format_double(r.accuracy) << ',' << reid::format_double(r.ci_low)
      << ',' << reid::format_double(r.ci_high) << '\n';
  return out.str();
}

json bound_json(const std::string& name, const reid::bounds::BoundReport& b) {
  return json{{"bound", name},
              {"source", b.source},
              {"exact", b.kind == reid::bounds::BoundKind::exact},
              {"value", b.value},
              {"raw", b.raw}};
}

int run(int argc, char** argv) {
  CLI::App app{"re-identification risk bounds, simulation and attacks"};
  app.require_subcommand(1);

  std::string matrix_path, config_path, sequences_path, dataset_path, out_path;
  std::string format = "json", method = "weighted", kind = "all", rule = "assignment";
  std::string epoch_list;
  std::uint64_t trials = 1000, rounds = 100, seed = 0;
  std::uint32_t observed = 4;
  double epsilon = 0, mi_nats = -1, delta = reid::harness::kEstimatorDelta;
  bool skip_malformed = false, without_replacement = false, serial = false;
  bool seed_given = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_path, "write output here instead of stdout");
    cmd->add_option("--format", format, "output format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
  };

  auto* bound = app.add_subcommand("bound", "closed-form accuracy bounds");
  bound->add_option("--matrix", matrix_path, "matrix file (.csv or .json)")
      ->required();
  bound->add_option("--kind", kind, "max, matching, ldp, kanon, fano or all")
      ->check(CLI::IsMember({"max", "matching", "ldp", "kanon", "fano", "all"}));
  bound->add_option("--epsilon", epsilon, "indistinguishability strength");
  bound->add_option("--mi-nats", mi_nats, "mutual information in nats");
  add_common(bound);

  auto* check = app.add_subcommand("check", "privacy-notion checks");
  check->require_subcommand(1);
  auto* check_ldp = check->add_subcommand("ldp", "smallest achievable delta");
  check_ldp->add_option("--matrix", matrix_path)->required();
  check_ldp->add_option("--epsilon", epsilon)->required();
  add_common(check_ldp);
  auto* check_kanon = check->add_subcommand("kanon", "anonymity-set size");
  check_kanon->add_option("--matrix", matrix_path)->required();
  add_common(check_kanon);

  auto* simulate = app.add_subcommand("simulate", "two-site sequence dump");
  simulate->add_option("--config", config_path)->required();
  auto* sim_seed = simulate->add_option("--seed", seed, "override config seed");
  simulate->add_flag("--serial", serial, "single-threaded reference path");
  add_common(simulate);

  auto* attack = app.add_subcommand("attack", "re-identify a sequence dump");
  attack->add_option("--sequences", sequences_path)->required();
  attack->add_option("--config", config_path)->required();
  attack->add_option("--method", method, "hamming, weighted or assignment")
      ->check(CLI::IsMember({"hamming", "weighted", "assignment"}));
  attack->add_option("--delta", delta, "popularity estimator confidence");
  auto* att_seed = attack->add_option("--seed", seed, "tie-break seed");
  add_common(attack);

  auto* experiment = app.add_subcommand("experiment", "Monte Carlo accuracy");
  experiment->add_option("--config", config_path,
                         "simulation config (random-user kind)");
  experiment->add_option("--matrix", matrix_path,
                         "matrix file (matching / matrix kinds)");
  std::string exp_kind = "random-user";
  experiment->add_option("--kind", exp_kind, "random-user, matching or matrix")
      ->check(CLI::IsMember({"random-user", "matching", "matrix"}));
  experiment->add_option("--method", method, "hamming or weighted")
      ->check(CLI::IsMember({"hamming", "weighted"}));
  experiment->add_option("--rule", rule, "assignment, lifted or constant")
      ->check(CLI::IsMember({"assignment", "lifted", "constant"}));
  experiment->add_option("--trials", trials);
  experiment->add_option("--rounds", rounds);
  experiment->add_option("--epoch-list", epoch_list,
                         "comma-separated epoch counts for an accuracy curve");
  auto* exp_seed = experiment->add_option("--seed", seed, "override config seed");
  experiment->add_flag("--serial", serial, "single-threaded reference path");
  add_common(experiment);

  auto* mi = app.add_subcommand("mi", "mutual information between two sites");
  mi->add_option("--config", config_path)->required();
  auto* mi_seed = mi->add_option("--seed", seed, "override config seed");
  mi->add_flag("--serial", serial, "single-threaded reference path");
  add_common(mi);

  auto* songs = app.add_subcommand("songs", "listening-history experiment");
  songs->add_option("--dataset", dataset_path, "tab-separated triplet file")
      ->required();
  songs->add_option("--observed", observed, "items drawn per trial");
  songs->add_option("--trials", trials);
  songs->add_option("--seed", seed);
  songs->add_flag("--skip-malformed", skip_malformed);
  songs->add_flag("--without-replacement", without_replacement);
  songs->add_flag("--serial", serial, "single-threaded reference path");
  add_common(songs);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  seed_given = sim_seed->count() > 0 || att_seed->count() > 0 ||
               exp_seed->count() > 0 || mi_seed->count() > 0;
  const auto exec = serial ? reid::Exec::serial : reid::Exec::parallel;
  OutputTarget target{out_path};

  auto load_config = [&]() {
    auto cfg = reid::harness::SimulationConfig::load(config_path);
    if (seed_given) cfg.seed = seed;
    return cfg;
  };

  if (bound->parsed()) {
    auto p = reid::load_matrix(matrix_path);
    json results = json::array();
    if (kind == "max" || kind == "all")
      results.push_back(bound_json("max-accuracy", reid::bounds::max_accuracy_bound(p)));
    if (kind == "matching" || kind == "all")
      results.push_back(
          bound_json("matching", reid::bounds::matching_accuracy_bound(p)));
    if (kind == "ldp" || (kind == "all" && bound->count("--epsilon"))) {
      double d = reid::bounds::check_ldp(p, epsilon);
      auto b = reid::bounds::ldp_accuracy_bound(epsilon, d, p.users(), p.reps());
      json entry = bound_json("ldp", b);
      entry["epsilon"] = epsilon;
      entry["delta_star"] = d;
      results.push_back(std::move(entry));
    }
    if (kind == "kanon" || kind == "all") {
      std::size_t k = reid::bounds::check_k_anonymity(p);
      if (k >= 1) {
        json entry = bound_json("k-anonymity", reid::bounds::kanon_accuracy_bound(k));
        entry["k"] = k;
        results.push_back(std::move(entry));
      } else if (kind == "kanon") {
        throw reid::ValidationError("matrix is not an anonymized release");
      }
    }
    if (kind == "fano" || (kind == "all" && mi_nats >= 0)) {
      if (mi_nats < 0)
        throw reid::ValidationError("--mi-nats is required for the information bound");
      results.push_back(
          bound_json("information", reid::bounds::fano_bound(mi_nats, p.users())));
    }
    if (format == "csv") {
      std::ostringstream out;
      out << "bound,source,exact,value,raw\n";
      for (const auto& r : results)
        out << r.at("bound").get<std::string>() << ','
            << r.at("source").get<std::string>() << ','
            << (r.at("exact").get<bool>() ? 1 : 0) << ','
            << reid::format_double(r.at("value").get<double>()) << ','
            << reid::format_double(r.at("raw").get<double>()) << '\n';
      target.write(out.str());
    } else {
      target.write(results.dump(2) + "\n");
    }
    return 0;
  }

  if (check_ldp->parsed()) {
    auto p = reid::load_matrix(matrix_path);
    double d = reid::bounds::check_ldp(p, epsilon);
    if (format == "csv") {
      std::ostringstream out;
      out << "epsilon,delta_star\n"
          << reid::format_double(epsilon) << ',' << reid::format_double(d) << '\n';
      target.write(out.str());
    } else {
      target.write(json{{"epsilon", epsilon}, {"delta_star", d}}.dump(2) + "\n");
    }
    return 0;
  }

  if (check_kanon->parsed()) {
    auto p = reid::load_matrix(matrix_path);
    std::size_t k = reid::bounds::check_k_anonymity(p);
    if (format == "csv") {
      target.write("k\n" + std::to_string(k) + "\n");
    } else {
      target.write(json{{"k", k}}.dump(2) + "\n");
    }
    return 0;
  }

  if (simulate->parsed()) {
    auto cfg = load_config();
    auto sample = reid::topics::simulate_two_sites(cfg.users, cfg.topics,
                                                   cfg.population, cfg.seed, exec);
    std::ostringstream out;
    reid::topics::save_sequences_csv(sample, out);
    target.write(out.str());
    return 0;
  }

  if (attack->parsed()) {
    auto cfg = load_config();
    std::ifstream in(sequences_path);
    if (!in) throw reid::IoError("cannot open for reading: " + sequences_path);
    auto sample = reid::topics::load_sequences_csv(in);
    reid::topics::TopicsConfig tconf = cfg.topics;
    tconf.epochs = sample.site1.epochs;

    std::vector<reid::harness::PredictionRecord> records(sample.site1.users);
    if (method == "hamming") {
      for (std::size_t u = 0; u < sample.site2.users; ++u) {
        auto pred = reid::attacks::hamming_attack(sample.site1,
                                                  sample.site2.sequence(u));
        records[u] = {u, u, pred, pred == u};
      }
    } else {
      auto pop = reid::attacks::estimate_popularity_table(
          sample.site1, tconf, delta, cfg.population.time_invariant);
      reid::attacks::WeightedAttack engine(sample.site1, pop, tconf);
      if (method == "weighted") {
        for (std::size_t u = 0; u < sample.site2.users; ++u) {
          auto pred = engine.predict(sample.site2.sequence(u));
          records[u] = {u, u, pred, pred == u};
        }
      } else {  // assignment
        const std::size_t n = sample.site1.users;
        reid::attacks::AttackScoreMatrix scores;
        scores.users = n;
        scores.queries = n;
        scores.scores.resize(n * n);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j)
            scores.scores[i * n + j] =
                engine.ranking_score(i, sample.site2.sequence(j));
        reid::Stream tie(cfg.seed, {reid::Purpose::tie_break, 0, 0, 2, 0});
        auto assigned = reid::attacks::matching_assignment(scores, tie);
        for (std::size_t j = 0; j < n; ++j)
          records[j] = {j, j, assigned[j], assigned[j] == j};
      }
    }
    std::ostringstream out;
    reid::harness::save_predictions_csv(records, out);
    target.write(out.str());
    return 0;
  }

  if (experiment->parsed()) {
    if (exp_kind == "random-user") {
      if (config_path.empty())
        throw reid::ValidationError("random-user experiments need --config");
      auto cfg = load_config();
      auto m = method == "hamming" ? reid::harness::AttackMethod::hamming
                                   : reid::harness::AttackMethod::weighted;
      if (!epoch_list.empty()) {
        std::vector<std::uint32_t> epochs;
        std::stringstream ss(epoch_list);
        std::string item;
        while (std::getline(ss, item, ','))
          epochs.push_back(static_cast<std::uint32_t>(std::stoul(item)));
        auto reports = reid::harness::run_epoch_sweep(cfg, m, epochs, trials, exec);
        std::ostringstream out;
        reid::harness::emit_accuracy_curve(
            reid::harness::curve_from_reports(reports), out,
            format == "csv" ? reid::harness::OutputFormat::csv
                            : reid::harness::OutputFormat::json);
        target.write(out.str());
      } else {
        auto report = reid::harness::run_random_user_experiment(cfg, m, trials, exec);
        target.write(format == "csv" ? report_csv(report)
                                     : report.to_json().dump(2) + "\n");
      }
      return 0;
    }
    if (matrix_path.empty())
      throw reid::ValidationError("matrix experiments need --matrix");
    auto p = reid::load_matrix(matrix_path);
    reid::harness::ExperimentReport report;
    if (exp_kind == "matching") {
      auto r = rule == "assignment" ? reid::harness::MatchingRule::assignment
               : rule == "lifted"   ? reid::harness::MatchingRule::lifted
                                    : reid::harness::MatchingRule::constant;
      report = reid::harness::run_matching_experiment(p, r, rounds, seed, exec);
    } else {
      auto a = reid::bounds::optimal_full_info_rule(p);
      report = reid::harness::run_random_user_experiment(p, a, trials, seed, exec);
    }
    target.write(format == "csv" ? report_csv(report)
                                 : report.to_json().dump(2) + "\n");
    return 0;
  }

  if (mi->parsed()) {
    auto cfg = load_config();
    auto sample = reid::topics::simulate_two_sites(cfg.users, cfg.topics,
                                                   cfg.population, cfg.seed, exec);
    auto report = reid::harness::plug_in_mutual_information(
        sample.site1, sample.site2, cfg.topics.taxonomy_size);
    if (format == "csv") {
      std::ostringstream out;
      out << "site1_epoch,site2_epoch,bits\n";
      for (std::uint32_t s = 0; s < report.epochs; ++s)
        for (std::uint32_t t = 0; t < report.epochs; ++t)
          out << s << ',' << t << ','
              << reid::format_double(report.pairwise_bits[s * report.epochs + t])
              << '\n';
      target.write(out.str());
    } else {
      target.write(report.to_json().dump(2) + "\n");
    }
    return 0;
  }

  if (songs->parsed()) {
    auto dataset = reid::harness::ingest_song_dataset(dataset_path, skip_malformed);
    auto report = reid::harness::run_song_experiment(
        dataset, observed, trials, seed, !without_replacement, exec);
    target.write(format == "csv" ? report_csv(report)
                                 : report.to_json().dump(2) + "\n");
    return 0;
  }

  return 2;  // unreachable: a subcommand is required
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const reid::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const reid::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
