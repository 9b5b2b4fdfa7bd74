#include "reid/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "reid/errors.hpp"

namespace reid {

namespace {

using nlohmann::json;

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

// Rows within kLoadRenormTol of stochastic are scaled back to sum 1;
// anything further off is data corruption, not float drift.
std::vector<double> renormalize_rows(std::vector<double> entries, std::size_t n,
                                     std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0;
    for (std::size_t o = 0; o < m; ++o) sum += entries[i * m + o];
    if (std::abs(sum - 1.0) > kLoadRenormTol) {
      std::ostringstream msg;
      msg << "row " << i << " sums to " << sum << ", beyond the renormalization"
          << " tolerance " << kLoadRenormTol;
      throw ValidationError(msg.str());
    }
    if (sum != 1.0 && sum > 0)
      for (std::size_t o = 0; o < m; ++o) entries[i * m + o] /= sum;
  }
  return entries;
}

RepresentationMatrix finish_matrix(std::size_t n, std::size_t m,
                                   std::vector<double> entries,
                                   std::vector<std::string> labels) {
  RepresentationMatrix p(n, m, renormalize_rows(std::move(entries), n, m),
                         std::move(labels));
  require_valid(p);
  return p;
}

json parse_json(std::istream& in) {
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("malformed JSON: ") + e.what());
  }
}

RepresentationMatrix matrix_from_json(const json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("m") || !j.contains("rows"))
    throw IoError("matrix JSON must carry n, m and rows");
  std::size_t n, m;
  std::vector<double> entries;
  try {
    n = j.at("n").get<std::size_t>();
    m = j.at("m").get<std::size_t>();
    const auto& rows = j.at("rows");
    if (!rows.is_array()) throw IoError("rows must be an array");
    if (rows.size() != n)
      throw ValidationError("declared n does not match the number of rows");
    entries.reserve(n * m);
    for (const auto& row : rows) {
      if (!row.is_array() || row.size() != m)
        throw ValidationError("row length does not match declared m");
      for (const auto& v : row) entries.push_back(v.get<double>());
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed matrix JSON: ") + e.what());
  }
  return finish_matrix(n, m, std::move(entries), {});
}

json matrix_to_json(const RepresentationMatrix& p) {
  json rows = json::array();
  for (std::size_t i = 0; i < p.users(); ++i) {
    json row = json::array();
    for (std::size_t o = 0; o < p.reps(); ++o) row.push_back(p(i, o));
    rows.push_back(std::move(row));
  }
  return json{{"n", p.users()}, {"m", p.reps()}, {"rows", std::move(rows)}};
}

}  // namespace

std::string format_double(double v) {
  // 17 significant digits always round-trip; trim to the shortest form
  // that still parses back exactly.
  for (int prec = 1; prec <= 17; ++prec) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return "0";
}

double parse_double(const std::string& token) {
  const char* begin = token.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  while (end && *end == ' ') ++end;
  if (end == begin || (end && *end != '\0'))
    throw IoError("not a number: '" + token + "'");
  return v;
}

RepresentationMatrix load_matrix_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty matrix CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> labels = split_csv(line);
  const std::size_t m = labels.size();
  if (m == 0) throw IoError("matrix CSV header has no columns");

  std::vector<double> entries;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() != m) {
      std::ostringstream msg;
      msg << "row " << n << " has " << fields.size() << " fields, expected " << m;
      throw IoError(msg.str());
    }
    for (const auto& f : fields) entries.push_back(parse_double(f));
    ++n;
  }
  return finish_matrix(n, m, std::move(entries), std::move(labels));
}

RepresentationMatrix load_matrix_json(std::istream& in) {
  return matrix_from_json(parse_json(in));
}

RepresentationMatrix load_matrix(const std::string& path) {
  auto in = open_input(path);
  if (ends_with(path, ".json")) return load_matrix_json(in);
  return load_matrix_csv(in);
}

void save_matrix_csv(const RepresentationMatrix& p, std::ostream& out) {
  const auto& labels = p.column_labels();
  for (std::size_t o = 0; o < p.reps(); ++o) {
    if (o) out << ',';
    if (labels.empty())
      out << 'o' << o;
    else
      out << labels[o];
  }
  out << '\n';
  for (std::size_t i = 0; i < p.users(); ++i) {
    for (std::size_t o = 0; o < p.reps(); ++o) {
      if (o) out << ',';
      out << format_double(p(i, o));
    }
    out << '\n';
  }
}

void save_matrix_json(const RepresentationMatrix& p, std::ostream& out) {
  out << matrix_to_json(p).dump(2) << '\n';
}

void save_matrix(const RepresentationMatrix& p, const std::string& path) {
  auto out = open_output(path);
  if (ends_with(path, ".json"))
    save_matrix_json(p, out);
  else
    save_matrix_csv(p, out);
}

FinitePrior load_prior_json(std::istream& in) {
  json j = parse_json(in);
  if (!j.is_object() || !j.contains("components"))
    throw IoError("prior JSON must carry components");
  std::vector<FinitePrior::Component> components;
  try {
    for (const auto& c : j.at("components")) {
      double w = c.at("weight").get<double>();
      components.push_back({w, matrix_from_json(c.at("matrix"))});
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed prior JSON: ") + e.what());
  }
  FinitePrior prior(std::move(components));
  require_valid(prior);
  return prior;
}

FinitePrior load_prior(const std::string& path) {
  auto in = open_input(path);
  return load_prior_json(in);
}

void save_prior(const FinitePrior& prior, const std::string& path) {
  json components = json::array();
  for (std::size_t j = 0; j < prior.size(); ++j) {
    const auto& c = prior.component(j);
    components.push_back(
        {{"weight", c.weight}, {"matrix", matrix_to_json(c.matrix)}});
  }
  auto out = open_output(path);
  out << json{{"components", std::move(components)}}.dump(2) << '\n';
}

}  // namespace reid
