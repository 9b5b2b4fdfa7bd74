#include "reid/topics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "reid/errors.hpp"

namespace reid::topics {

void TopicsConfig::validate() const {
  if (taxonomy_size < 1) throw ValidationError("taxonomy must have at least one topic");
  if (top_set_size < 1 || top_set_size > taxonomy_size)
    throw ValidationError("top set size must be in [1, taxonomy_size]");
  if (!(flip_prob >= 0.0 && flip_prob <= 1.0))
    throw ValidationError("flip probability must be in [0, 1]");
  if (epochs < 1) throw ValidationError("need at least one epoch");
}

std::vector<double> PopulationModel::weights_for_epoch(
    std::uint32_t epoch, const TopicsConfig& cfg) const {
  switch (kind) {
    case PopulationKind::uniform:
      return std::vector<double>(cfg.taxonomy_size, 1.0);
    case PopulationKind::zipf: {
      std::vector<double> w(cfg.taxonomy_size);
      for (std::uint32_t t = 0; t < cfg.taxonomy_size; ++t)
        w[t] = std::pow(static_cast<double>(t + 1), -zipf_exponent);
      return w;
    }
    case PopulationKind::explicit_weights: {
      std::size_t row = time_invariant ? 0 : epoch;
      if (row >= explicit_epoch_weights.size())
        throw ValidationError("no explicit weights for the requested epoch");
      return explicit_epoch_weights[row];
    }
  }
  throw ValidationError("unknown population kind");
}

void PopulationModel::validate(const TopicsConfig& cfg) const {
  if (kind == PopulationKind::zipf && !(zipf_exponent >= 0))
    throw ValidationError("zipf exponent must be nonnegative");
  const std::size_t rows_needed =
      kind == PopulationKind::explicit_weights ? (time_invariant ? 1 : cfg.epochs) : 0;
  if (explicit_epoch_weights.size() < rows_needed)
    throw ValidationError("explicit weights must cover every epoch");
  for (std::uint32_t s = 0; s < cfg.epochs; ++s) {
    auto w = weights_for_epoch(s, cfg);
    if (w.size() != cfg.taxonomy_size)
      throw ValidationError("weight vector length must equal the taxonomy size");
    std::size_t positive = 0;
    for (double v : w) {
      if (v < 0) throw ValidationError("topic weights must be nonnegative");
      if (v > 0) ++positive;
    }
    if (positive < cfg.top_set_size)
      throw ValidationError("fewer topics with positive weight than the top set size");
  }
}

TopSetTable::TopSetTable(std::size_t users, std::uint32_t epochs,
                         std::uint32_t set_size)
    : users_(users),
      epochs_(epochs),
      set_size_(set_size),
      topics_(users * epochs * set_size) {}

bool TopSetTable::contains(std::size_t user, std::uint32_t epoch,
                           std::uint32_t topic) const {
  auto s = set(user, epoch);
  return std::binary_search(s.begin(), s.end(), topic);
}

namespace {

// k distinct indices drawn by successive weighted picks without
// replacement: each pick walks the weight array, skipping already chosen
// indices. The walk can run past the end on accumulated rounding, in
// which case the last eligible index wins.
void sample_top_set(std::span<const double> w, double total, std::uint32_t k,
                    Stream& stream, std::span<std::uint32_t> out) {
  double remaining = total;
  for (std::uint32_t picked = 0; picked < k; ++picked) {
    const double target = stream.next_double() * remaining;
    double cum = 0;
    std::size_t choice = w.size();
    for (std::size_t t = 0; t < w.size(); ++t) {
      bool chosen_before = false;
      for (std::uint32_t c = 0; c < picked; ++c)
        if (out[c] == t) chosen_before = true;
      if (chosen_before || w[t] <= 0) continue;
      cum += w[t];
      choice = t;
      if (target < cum) break;
    }
    if (choice == w.size())
      throw ValidationError("ran out of topics with positive weight");
    out[picked] = static_cast<std::uint32_t>(choice);
    remaining -= w[choice];
  }
  std::sort(out.begin(), out.end());
}

}  // namespace

TopSetTable generate_population(std::size_t users, const TopicsConfig& cfg,
                                const PopulationModel& model,
                                std::uint64_t master_seed, Exec exec) {
  cfg.validate();
  model.validate(cfg);

  std::vector<std::vector<double>> weights(cfg.epochs);
  std::vector<double> totals(cfg.epochs);
  for (std::uint32_t s = 0; s < cfg.epochs; ++s) {
    weights[s] = model.weights_for_epoch(s, cfg);
    totals[s] = 0;
    for (double v : weights[s]) totals[s] += v;
  }

  TopSetTable table(users, cfg.epochs, cfg.top_set_size);
  for_each_index(exec, users, [&](std::size_t u) {
    for (std::uint32_t s = 0; s < cfg.epochs; ++s) {
      Stream stream(master_seed, {Purpose::top_set, 0, u, 0, s});
      sample_top_set(weights[s], totals[s], cfg.top_set_size, stream,
                     table.mutable_set(u, s));
    }
  });
  return table;
}

std::uint32_t sample_topic(std::size_t user, std::uint32_t site,
                           std::uint32_t epoch, std::uint64_t trial,
                           const TopSetTable& table, const TopicsConfig& cfg,
                           std::uint64_t master_seed) {
  if (user >= table.users() || epoch >= table.epochs())
    throw ValidationError("user or epoch out of range");
  Stream stream(master_seed, {Purpose::site_topic, trial, user, site, epoch});
  if (stream.next_double() < cfg.flip_prob)
    return static_cast<std::uint32_t>(stream.next_below(cfg.taxonomy_size));
  auto set = table.set(user, epoch);
  return set[stream.next_below(set.size())];
}

std::uint32_t get_topic(std::size_t user, std::uint32_t site, std::uint32_t epoch,
                        const TopSetTable& table, const TopicsConfig& cfg,
                        std::uint64_t master_seed) {
  return sample_topic(user, site, epoch, 0, table, cfg, master_seed);
}

RepresentationMatrix per_epoch_matrix(const TopSetTable& table,
                                      std::uint32_t epoch,
                                      const TopicsConfig& cfg) {
  if (epoch >= table.epochs()) throw ValidationError("epoch out of range");
  const std::size_t n = table.users(), m = cfg.taxonomy_size;
  std::vector<double> entries(n * m, cfg.q_out());
  for (std::size_t i = 0; i < n; ++i)
    for (std::uint32_t t : table.set(i, epoch)) entries[i * m + t] = cfg.q_in();
  return RepresentationMatrix(n, m, std::move(entries));
}

double sequence_log_likelihood(std::size_t user,
                               std::span<const std::uint32_t> seq,
                               const TopSetTable& table,
                               const TopicsConfig& cfg) {
  if (user >= table.users()) throw ValidationError("user out of range");
  if (seq.size() > table.epochs())
    throw ValidationError("sequence longer than the table's epochs");
  const double log_in = std::log(cfg.q_in()), log_out = std::log(cfg.q_out());
  double ll = 0;
  for (std::uint32_t s = 0; s < seq.size(); ++s) {
    if (seq[s] >= cfg.taxonomy_size)
      throw ValidationError("topic index out of range");
    ll += table.contains(user, s, seq[s]) ? log_in : log_out;
  }
  return ll;
}

TwoSiteSample simulate_two_sites(std::size_t users, const TopicsConfig& cfg,
                                 const PopulationModel& model,
                                 std::uint64_t master_seed, Exec exec) {
  TwoSiteSample sample;
  sample.table = generate_population(users, cfg, model, master_seed, exec);
  for (auto* site : {&sample.site1, &sample.site2}) {
    site->users = users;
    site->epochs = cfg.epochs;
    site->topics.resize(users * cfg.epochs);
  }
  for_each_index(exec, users, [&](std::size_t u) {
    for (std::uint32_t s = 0; s < cfg.epochs; ++s) {
      sample.site1.topics[u * cfg.epochs + s] =
          get_topic(u, 1, s, sample.table, cfg, master_seed);
      sample.site2.topics[u * cfg.epochs + s] =
          get_topic(u, 2, s, sample.table, cfg, master_seed);
    }
  });
  return sample;
}

void save_sequences_csv(const TwoSiteSample& sample, std::ostream& out) {
  out << "user,site,epoch,topic\n";
  const std::size_t users = sample.site1.users;
  for (std::size_t u = 0; u < users; ++u) {
    for (std::uint32_t site = 1; site <= 2; ++site) {
      const SequenceSet& set = site == 1 ? sample.site1 : sample.site2;
      for (std::uint32_t s = 0; s < set.epochs; ++s)
        out << u << ',' << site << ',' << s << ',' << set.topic(u, s) << '\n';
    }
  }
}

TwoSiteSample load_sequences_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty sequence dump");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "user,site,epoch,topic")
    throw IoError("sequence dump must start with 'user,site,epoch,topic'");

  struct Row {
    std::size_t user;
    std::uint32_t site, epoch, topic;
  };
  std::vector<Row> rows;
  std::size_t users = 0;
  std::uint32_t epochs = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Row r;
    char comma;
    std::istringstream ss(line);
    if (!(ss >> r.user >> comma >> r.site >> comma >> r.epoch >> comma >> r.topic))
      throw IoError("malformed sequence dump row: '" + line + "'");
    if (r.site != 1 && r.site != 2)
      throw IoError("sequence dump site must be 1 or 2");
    users = std::max(users, r.user + 1);
    epochs = std::max(epochs, r.epoch + 1);
    rows.push_back(r);
  }
  if (rows.size() != users * 2 * epochs)
    throw IoError("sequence dump does not cover every (user, site, epoch)");

  TwoSiteSample sample;
  for (auto* site : {&sample.site1, &sample.site2}) {
    site->users = users;
    site->epochs = epochs;
    site->topics.assign(users * epochs, 0);
  }
  std::vector<bool> seen(users * 2 * epochs, false);
  for (const Row& r : rows) {
    std::size_t slot = (r.user * 2 + (r.site - 1)) * epochs + r.epoch;
    if (seen[slot]) throw IoError("duplicate sequence dump row");
    seen[slot] = true;
    SequenceSet& set = r.site == 1 ? sample.site1 : sample.site2;
    set.topics[r.user * epochs + r.epoch] = r.topic;
  }
  return sample;
}

}  // namespace reid::topics
