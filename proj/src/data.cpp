#include "fairbound/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace fairbound {

void ColumnSchema::validate() const {
  long sensitive = 0, targets = 0;
  for (const auto& col : columns) {
    if (col.name.empty()) throw FairboundError("schema column without a name");
    if (col.role == ColumnRole::Sensitive) ++sensitive;
    if (col.role == ColumnRole::Target) ++targets;
  }
  if (sensitive != 1) {
    throw FairboundError("schema must declare exactly one sensitive column");
  }
  if (targets < 1) {
    throw FairboundError("schema must declare at least one target column");
  }
}

ColumnRole parse_column_role(const std::string& text) {
  if (text == "numeric") return ColumnRole::FeatureNumeric;
  if (text == "categorical") return ColumnRole::FeatureCategorical;
  if (text == "sensitive") return ColumnRole::Sensitive;
  if (text == "target") return ColumnRole::Target;
  if (text == "ignore") return ColumnRole::Ignore;
  throw FairboundError("unknown column role: " + text);
}

namespace {

// RFC 4180: quoted fields may contain commas, newlines and doubled quotes.
std::vector<std::vector<std::string>> parse_csv(const std::string& text,
                                                const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  size_t i = 0;
  long line = 1;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
  };
  while (i < text.size()) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
    } else if (c == '"' && !field_started && field.empty()) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      end_row();
      ++line;
      ++i;
    } else if (c == '\n') {
      end_row();
      ++line;
    } else {
      field.push_back(c);
      field_started = true;
    }
    ++i;
  }
  if (in_quotes) {
    throw MalformedData("unterminated quoted field in " + path, line);
  }
  if (field_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& text, long row) {
  try {
    size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) {
      throw MalformedData("not a finite number: '" + text + "'", row);
    }
    return v;
  } catch (const MalformedData&) {
    throw;
  } catch (const std::exception&) {
    throw MalformedData("not a number: '" + text + "'", row);
  }
}

// Class columns keep explicit nonnegative-integer labels as-is; anything
// else is indexed in order of first appearance.
struct ClassIndexer {
  std::vector<std::string> values;
  bool all_numeric = true;

  int index_of(const std::string& raw, long row) {
    const std::string v = trim(raw);
    if (v.empty()) throw MalformedData("missing class value", row);
    for (size_t i = 0; i < values.size(); ++i) {
      if (values[i] == v) return static_cast<int>(i);
    }
    values.push_back(v);
    if (!std::all_of(v.begin(), v.end(),
                     [](char c) { return c >= '0' && c <= '9'; })) {
      all_numeric = false;
    }
    return static_cast<int>(values.size() - 1);
  }

  // Remaps encounter-order indices so numeric labels keep their own order
  // (e.g. "0"/"1" stay 0/1 regardless of which appears first).
  std::vector<int> final_order() const {
    std::vector<int> order(values.size());
    std::vector<int> sorted(values.size());
    for (size_t i = 0; i < values.size(); ++i) sorted[i] = static_cast<int>(i);
    if (all_numeric) {
      std::sort(sorted.begin(), sorted.end(), [&](int a, int b) {
        return std::stol(values[static_cast<size_t>(a)]) <
               std::stol(values[static_cast<size_t>(b)]);
      });
    }
    for (size_t rank = 0; rank < sorted.size(); ++rank) {
      order[static_cast<size_t>(sorted[rank])] = static_cast<int>(rank);
    }
    return order;
  }

  std::vector<std::string> ordered_values() const {
    const std::vector<int> order = final_order();
    std::vector<std::string> out(values.size());
    for (size_t i = 0; i < values.size(); ++i) {
      out[static_cast<size_t>(order[i])] = values[i];
    }
    return out;
  }
};

}  // namespace

CsvLoadResult load_csv(const std::string& path, const ColumnSchema& schema,
                       long stats_rows) {
  schema.validate();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FairboundError("cannot open CSV file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const auto rows = parse_csv(buf.str(), path);
  if (rows.size() < 2) throw MalformedData("CSV needs a header and data rows", 1);

  const auto& header = rows.front();
  std::vector<long> col_index(schema.columns.size(), -1);
  for (size_t c = 0; c < schema.columns.size(); ++c) {
    for (size_t h = 0; h < header.size(); ++h) {
      if (trim(header[h]) == schema.columns[c].name) {
        col_index[c] = static_cast<long>(h);
        break;
      }
    }
    if (col_index[c] < 0 && schema.columns[c].role != ColumnRole::Ignore) {
      throw MalformedData("CSV header missing column '" +
                              schema.columns[c].name + "'",
                          1);
    }
  }

  const long n = static_cast<long>(rows.size()) - 1;
  const long stats_n = stats_rows > 0 ? std::min(stats_rows, n) : n;

  std::vector<ClassIndexer> indexers(schema.columns.size());
  std::vector<std::vector<double>> numeric(schema.columns.size());
  std::vector<std::vector<int>> classes(schema.columns.size());

  for (long i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<size_t>(i) + 1];
    const long line = i + 2;
    for (size_t c = 0; c < schema.columns.size(); ++c) {
      const ColumnRole role = schema.columns[c].role;
      if (role == ColumnRole::Ignore) continue;
      if (col_index[c] >= static_cast<long>(row.size())) {
        throw MalformedData("row has too few fields", line);
      }
      const std::string cell = trim(row[static_cast<size_t>(col_index[c])]);
      if (cell.empty() || cell == "?") {
        throw MalformedData("missing value in column '" +
                                schema.columns[c].name + "'",
                            line);
      }
      if (role == ColumnRole::FeatureNumeric) {
        numeric[c].push_back(parse_number(cell, line));
      } else {
        classes[c].push_back(indexers[c].index_of(cell, line));
      }
    }
  }

  CsvLoadResult out;
  Dataset& d = out.dataset;

  long feat_cols = 0;
  for (size_t c = 0; c < schema.columns.size(); ++c) {
    if (schema.columns[c].role == ColumnRole::FeatureNumeric) ++feat_cols;
    if (schema.columns[c].role == ColumnRole::FeatureCategorical) {
      feat_cols += static_cast<long>(indexers[c].values.size());
    }
  }
  d.features = Eigen::MatrixXd::Zero(n, feat_cols);

  long col = 0;
  for (size_t c = 0; c < schema.columns.size(); ++c) {
    const auto& spec = schema.columns[c];
    switch (spec.role) {
      case ColumnRole::FeatureNumeric: {
        double mean = 0.0;
        for (long i = 0; i < stats_n; ++i) mean += numeric[c][i];
        mean /= static_cast<double>(stats_n);
        double var = 0.0;
        for (long i = 0; i < stats_n; ++i) {
          var += (numeric[c][i] - mean) * (numeric[c][i] - mean);
        }
        var /= static_cast<double>(stats_n);
        const double sd = var > 0 ? std::sqrt(var) : 1.0;
        for (long i = 0; i < n; ++i) {
          d.features(i, col) = (numeric[c][i] - mean) / sd;
        }
        d.feature_names.push_back(spec.name);
        ++col;
        break;
      }
      case ColumnRole::FeatureCategorical: {
        const std::vector<int> order = indexers[c].final_order();
        for (long i = 0; i < n; ++i) {
          d.features(i, col + order[static_cast<size_t>(
                                  classes[c][static_cast<size_t>(i)])]) = 1.0;
        }
        for (const auto& v : indexers[c].ordered_values()) {
          d.feature_names.push_back(spec.name + "=" + v);
        }
        out.category_values[spec.name] = indexers[c].ordered_values();
        col += static_cast<long>(indexers[c].values.size());
        break;
      }
      case ColumnRole::Sensitive: {
        const std::vector<int> order = indexers[c].final_order();
        d.sensitive.resize(static_cast<size_t>(n));
        for (long i = 0; i < n; ++i) {
          d.sensitive[static_cast<size_t>(i)] =
              order[static_cast<size_t>(classes[c][static_cast<size_t>(i)])];
        }
        out.category_values[spec.name] = indexers[c].ordered_values();
        break;
      }
      case ColumnRole::Target: {
        const std::vector<int> order = indexers[c].final_order();
        std::vector<int> labels(static_cast<size_t>(n));
        for (long i = 0; i < n; ++i) {
          labels[static_cast<size_t>(i)] =
              order[static_cast<size_t>(classes[c][static_cast<size_t>(i)])];
        }
        d.targets.emplace_back(spec.name, std::move(labels));
        out.category_values[spec.name] = indexers[c].ordered_values();
        break;
      }
      case ColumnRole::Ignore:
        break;
    }
  }
  validate_dataset(d);
  return out;
}

std::vector<PredictionRecord> load_predictions_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FairboundError("cannot open predictions file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const auto rows = parse_csv(buf.str(), path);
  if (rows.size() < 2) {
    throw MalformedData("predictions file needs a header and data rows", 1);
  }
  long col_s = -1, col_y = -1, col_score = -1, col_hard = -1;
  const auto& header = rows.front();
  for (size_t h = 0; h < header.size(); ++h) {
    const std::string name = trim(header[h]);
    if (name == "s") col_s = static_cast<long>(h);
    else if (name == "y") col_y = static_cast<long>(h);
    else if (name == "score") col_score = static_cast<long>(h);
    else if (name == "yhat") col_hard = static_cast<long>(h);
  }
  const std::vector<std::pair<long, const char*>> required = {
      {col_s, "s"}, {col_y, "y"}, {col_score, "score"}};
  for (const auto& [col, name] : required) {
    if (col < 0) {
      throw MalformedData(std::string("predictions file missing column '") +
                              name + "'",
                          1);
    }
  }
  std::vector<PredictionRecord> records;
  records.reserve(rows.size() - 1);
  for (size_t i = 1; i < rows.size(); ++i) {
    const long line = static_cast<long>(i) + 1;
    const auto& row = rows[i];
    auto cell = [&](long c) {
      if (c >= static_cast<long>(row.size())) {
        throw MalformedData("row has too few fields", line);
      }
      return trim(row[static_cast<size_t>(c)]);
    };
    PredictionRecord rec;
    const double s = parse_number(cell(col_s), line);
    const double y = parse_number(cell(col_y), line);
    if (s != std::floor(s) || y != std::floor(y)) {
      throw MalformedData("class columns must be integers", line);
    }
    rec.s = static_cast<int>(s);
    rec.y = static_cast<int>(y);
    rec.score = parse_number(cell(col_score), line);
    if (col_hard >= 0) {
      const double h = parse_number(cell(col_hard), line);
      if (h != 0.0 && h != 1.0) {
        throw MalformedData("yhat must be 0 or 1", line);
      }
      rec.hard = static_cast<int>(h);
    }
    records.push_back(rec);
  }
  return records;
}

MucSynth synth_muc_counterexample(long n, double delta, unsigned seed) {
  if (n < 100) throw FairboundError("muc generator needs n >= 100");
  if (!(delta > 0.0 && delta <= 0.1)) {
    throw FairboundError("muc generator needs delta in (0, .1]");
  }
  std::mt19937 rng(seed);
  std::bernoulli_distribution group(0.5), atom(delta);
  std::uniform_int_distribution<int> grid(0, 99);

  MucSynth out;
  out.records.reserve(static_cast<size_t>(n));
  out.representation.resize(n);
  for (long i = 0; i < n; ++i) {
    const int s = group(rng) ? 1 : 0;
    double z;
    if (atom(rng)) {
      z = 0.5;
    } else {
      // 100 off-atom grid points, mass (1-delta)/100 each, identical for
      // both groups so the marginals match exactly.
      const int m = grid(rng);
      z = (m < 50 ? m : m + 1) / 100.0;
    }
    int y;
    double score;
    if (z < 0.5) {
      y = 0;
      score = 0.0;
    } else if (z > 0.5) {
      y = 1;
      score = 1.0;
    } else {
      y = s;  // the atom flips outcome by group: the whole pathology
      score = 0.5;
    }
    out.records.push_back({s, y, score, std::nullopt});
    out.representation(i) = z;
  }
  return out;
}

Dataset synth_correlated(long n, double p1, double p2, double r,
                         unsigned seed) {
  for (double v : {p1, p2, r}) {
    if (!(v > 0.0 && v < 1.0)) {
      throw FairboundError("correlated generator rates must lie in (0,1)");
    }
  }
  std::mt19937 rng(seed);
  std::bernoulli_distribution bern_r(r), bern_p1(p1), bern_p2(p2), fair(0.5);
  std::normal_distribution<double> noise(0.0, 0.1);

  Dataset d;
  const long kNuisance = 8;
  d.features = Eigen::MatrixXd::Zero(n, 8 + kNuisance);
  d.sensitive.resize(static_cast<size_t>(n));
  std::vector<int> t1(n), t2(n), t3(n);
  for (long i = 0; i < n; ++i) {
    const int s = bern_r(rng) ? 1 : 0;
    d.sensitive[static_cast<size_t>(i)] = s;
    t1[static_cast<size_t>(i)] = (s == 0 ? bern_p1(rng) : bern_p2(rng)) ? 1 : 0;
    t2[static_cast<size_t>(i)] = fair(rng) ? 1 : 0;
    t3[static_cast<size_t>(i)] = fair(rng) ? 1 : 0;
    const int attrs[4] = {s, t1[static_cast<size_t>(i)],
                          t2[static_cast<size_t>(i)],
                          t3[static_cast<size_t>(i)]};
    for (int a = 0; a < 4; ++a) {
      d.features(i, 2 * a) = (attrs[a] == 0 ? 1.0 : 0.0) + noise(rng);
      d.features(i, 2 * a + 1) = (attrs[a] == 1 ? 1.0 : 0.0) + noise(rng);
    }
    for (long j = 0; j < kNuisance; ++j) d.features(i, 8 + j) = noise(rng);
  }
  const char* names[4] = {"s", "t1", "t2", "t3"};
  for (int a = 0; a < 4; ++a) {
    d.feature_names.push_back(std::string(names[a]) + "=0");
    d.feature_names.push_back(std::string(names[a]) + "=1");
  }
  for (long j = 0; j < kNuisance; ++j) {
    d.feature_names.push_back("nuisance" + std::to_string(j));
  }
  d.targets.emplace_back("t1", std::move(t1));
  d.targets.emplace_back("t2", std::move(t2));
  d.targets.emplace_back("t3", std::move(t3));
  return d;
}

ExactSynth synth_exact(long n, double r, double common_rate, unsigned seed) {
  for (double v : {r, common_rate}) {
    if (!(v > 0.0 && v < 1.0)) {
      throw FairboundError("exact generator rates must lie in (0,1)");
    }
  }
  std::mt19937 rng(seed);
  std::bernoulli_distribution bern_r(r), bern_y(common_rate);
  std::uniform_real_distribution<double> jitter(0.0, 0.4);
  std::normal_distribution<double> noise(0.0, 1.0);

  ExactSynth out;
  Dataset& d = out.dataset;
  const long kNuisance = 4;
  d.features = Eigen::MatrixXd::Zero(n, 1 + kNuisance);
  d.sensitive.resize(static_cast<size_t>(n));
  out.representation.resize(n);
  std::vector<int> y(n);
  for (long i = 0; i < n; ++i) {
    d.sensitive[static_cast<size_t>(i)] = bern_r(rng) ? 1 : 0;
    y[static_cast<size_t>(i)] = bern_y(rng) ? 1 : 0;
    // identically distributed across groups, yet y is readable from it
    out.representation(i) = y[static_cast<size_t>(i)] + jitter(rng);
    d.features(i, 0) = out.representation(i);
    for (long j = 0; j < kNuisance; ++j) d.features(i, 1 + j) = noise(rng);
  }
  d.feature_names = {"rep"};
  for (long j = 0; j < kNuisance; ++j) {
    d.feature_names.push_back("nuisance" + std::to_string(j));
  }
  d.targets.emplace_back("y", std::move(y));
  return out;
}

}  // namespace fairbound
