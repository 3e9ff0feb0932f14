#include "fairbound/core.hpp"

#include <algorithm>
#include <cmath>

namespace fairbound {

BaseRates clamp_rates(BaseRates rates) {
  auto clamp = [](double v) {
    return std::clamp(v, kRateClamp, 1.0 - kRateClamp);
  };
  return BaseRates{clamp(rates.r), clamp(rates.a), clamp(rates.b)};
}

const std::vector<int>& Dataset::target(const std::string& name) const {
  for (const auto& [n, labels] : targets) {
    if (n == name) return labels;
  }
  throw FairboundError("unknown target column: " + name);
}

BaseRates base_rates(const std::vector<PredictionRecord>& records) {
  long n = 0, n1 = 0;
  long pos[2] = {0, 0}, tot[2] = {0, 0};
  for (const auto& rec : records) {
    if (rec.s < 0 || rec.s > 1 || rec.y < 0 || rec.y > 1) {
      throw MalformedData("base_rates expects binary s and y", n);
    }
    ++n;
    if (rec.s == 1) ++n1;
    ++tot[rec.s];
    if (rec.y == 1) ++pos[rec.s];
  }
  if (tot[0] == 0) throw EmptyGroup("no records with s=0");
  if (tot[1] == 0) throw EmptyGroup("no records with s=1");
  for (int s = 0; s < 2; ++s) {
    if (pos[s] == 0)
      throw EmptyGroup("no records with y=1 in group s=" + std::to_string(s));
    if (pos[s] == tot[s])
      throw EmptyGroup("no records with y=0 in group s=" + std::to_string(s));
  }
  BaseRates rates;
  rates.r = static_cast<double>(n1) / static_cast<double>(n);
  rates.a = static_cast<double>(pos[0]) / static_cast<double>(tot[0]);
  rates.b = static_cast<double>(pos[1]) / static_cast<double>(tot[1]);
  return clamp_rates(rates);
}

BaseRates base_rates(const Dataset& d, const std::string& target_name) {
  const auto& y = d.target(target_name);
  std::vector<PredictionRecord> records;
  records.reserve(d.sensitive.size());
  for (size_t i = 0; i < d.sensitive.size(); ++i) {
    records.push_back({d.sensitive[i], y[i], 0.0, std::nullopt});
  }
  return base_rates(records);
}

DatasetDiagnostics validate_dataset(const Dataset& d) {
  const long n = d.rows();
  if (static_cast<long>(d.sensitive.size()) != n) {
    throw MalformedData("sensitive column has " +
                        std::to_string(d.sensitive.size()) + " entries for " +
                        std::to_string(n) + " rows");
  }
  for (const auto& [name, labels] : d.targets) {
    if (static_cast<long>(labels.size()) != n) {
      throw MalformedData("target column '" + name + "' has " +
                          std::to_string(labels.size()) + " entries for " +
                          std::to_string(n) + " rows");
    }
  }
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < d.features.cols(); ++j) {
      if (!std::isfinite(d.features(i, j))) {
        throw MalformedData("non-finite feature value", i);
      }
    }
  }

  DatasetDiagnostics diag;
  diag.rows = n;
  int max_s = 0;
  for (int s : d.sensitive) max_s = std::max(max_s, s);
  diag.sensitive_counts.assign(max_s + 1, 0);
  for (int s : d.sensitive) ++diag.sensitive_counts[s];
  for (long c : diag.sensitive_counts) {
    if (c == 0) throw EmptyGroup("a sensitive class has no records");
  }
  if (diag.sensitive_counts.size() < 2) {
    throw EmptyGroup("only one sensitive class present");
  }

  for (const auto& [name, labels] : d.targets) {
    int max_y = 0;
    for (int y : labels) max_y = std::max(max_y, y);
    std::vector<long> counts(max_y + 1, 0);
    for (int y : labels) ++counts[y];
    for (long c : counts) {
      if (c == 0)
        throw EmptyGroup("target '" + name + "' has an empty class");
    }
    if (counts.size() < 2)
      throw EmptyGroup("target '" + name + "' has only one class");
    diag.target_counts.emplace_back(name, std::move(counts));
  }

  for (long j = 0; j < d.features.cols(); ++j) {
    diag.feature_min.push_back(d.features.col(j).minCoeff());
    diag.feature_max.push_back(d.features.col(j).maxCoeff());
  }
  return diag;
}

}  // namespace fairbound
