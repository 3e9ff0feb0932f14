#include "fairbound/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

namespace fairbound {

void ScoreBinning::validate() const {
  if (mode == Mode::UniformGrid && grid_size < 2) {
    throw FairboundError("score binning grid size must be >= 2");
  }
}

const char* notion_name(FairnessNotion notion) {
  switch (notion) {
    case FairnessNotion::SP: return "sp";
    case FairnessNotion::DOpp: return "dopp";
    case FairnessNotion::DR: return "dr";
    case FairnessNotion::DOdds: return "dodds";
    case FairnessNotion::DPC: return "dpc";
    case FairnessNotion::DNC: return "dnc";
    case FairnessNotion::DC: return "dc";
  }
  return "?";
}

namespace {

// Prediction value of a record: the sampled hard label when present,
// otherwise the score (its Bernoulli expectation). Keeps score-only inputs
// deterministic.
double pred_value(const PredictionRecord& rec) {
  return rec.hard ? static_cast<double>(*rec.hard) : rec.score;
}

void check_record(const PredictionRecord& rec, long row) {
  if (!(rec.score >= 0.0 && rec.score <= 1.0)) {
    throw MalformedData("score outside [0,1]", row);
  }
  if (rec.s < 0 || rec.y < 0) throw MalformedData("negative class index", row);
}

// Mean prediction value over records matching the predicate; throws
// EmptyGroup with `cell` when none match.
template <typename Pred>
double mean_pred(const std::vector<PredictionRecord>& records, Pred pred,
                 const std::string& cell) {
  double sum = 0.0;
  long count = 0;
  for (const auto& rec : records) {
    if (pred(rec)) {
      sum += pred_value(rec);
      ++count;
    }
  }
  if (count == 0) throw EmptyGroup("empty cell: " + cell);
  return sum / static_cast<double>(count);
}

int score_bin(double score, const ScoreBinning& binning,
              const std::vector<double>& distinct) {
  if (binning.mode == ScoreBinning::Mode::UniformGrid) {
    return static_cast<int>(
        std::lround(score * (binning.grid_size - 1)));
  }
  const auto it = std::lower_bound(distinct.begin(), distinct.end(), score);
  return static_cast<int>(it - distinct.begin());
}

std::vector<double> distinct_scores(
    const std::vector<PredictionRecord>& records) {
  std::set<double> values;
  for (const auto& rec : records) values.insert(rec.score);
  return {values.begin(), values.end()};
}

}  // namespace

double balanced_accuracy(const std::vector<PredictionRecord>& records,
                         bool against_sensitive) {
  long row = 0;
  for (const auto& rec : records) check_record(rec, row++);
  auto label = [&](const PredictionRecord& rec) {
    return against_sensitive ? rec.s : rec.y;
  };
  const double neg = mean_pred(
      records, [&](const auto& rec) { return label(rec) == 0; }, "label=0");
  const double pos = mean_pred(
      records, [&](const auto& rec) { return label(rec) == 1; }, "label=1");
  return 0.5 * ((1.0 - neg) + pos);
}

double statistical_parity(const std::vector<PredictionRecord>& records) {
  long row = 0;
  for (const auto& rec : records) check_record(rec, row++);
  const double p0 = mean_pred(
      records, [](const auto& rec) { return rec.s == 0; }, "s=0");
  const double p1 = mean_pred(
      records, [](const auto& rec) { return rec.s == 1; }, "s=1");
  return std::abs(p1 - p0);
}

namespace {

double separation_disparity(const std::vector<PredictionRecord>& records,
                            int y) {
  long row = 0;
  for (const auto& rec : records) check_record(rec, row++);
  auto cell = [&](int s) {
    return "(s=" + std::to_string(s) + ",y=" + std::to_string(y) + ")";
  };
  const double p0 = mean_pred(
      records, [&](const auto& rec) { return rec.s == 0 && rec.y == y; },
      cell(0));
  const double p1 = mean_pred(
      records, [&](const auto& rec) { return rec.s == 1 && rec.y == y; },
      cell(1));
  return std::abs(p1 - p0);
}

}  // namespace

double disparity_opportunity(const std::vector<PredictionRecord>& records) {
  return separation_disparity(records, 1);
}

double disparity_regret(const std::vector<PredictionRecord>& records) {
  return separation_disparity(records, 0);
}

double disparity_odds(const std::vector<PredictionRecord>& records) {
  return 0.5 * (disparity_opportunity(records) + disparity_regret(records));
}

CalibrationDisparities calibration_disparities(
    const std::vector<PredictionRecord>& records,
    const ScoreBinning& binning) {
  binning.validate();
  const auto distinct = binning.mode == ScoreBinning::Mode::DistinctValues
                            ? distinct_scores(records)
                            : std::vector<double>{};
  long n[2] = {0, 0};
  long row = 0;
  // bin -> per (s,y) record counts
  std::map<int, std::array<std::array<long, 2>, 2>> cells;
  for (const auto& rec : records) {
    check_record(rec, row++);
    ++n[rec.s];
    auto& cell = cells[score_bin(rec.score, binning, distinct)];
    ++cell[rec.s][rec.y];
  }
  if (n[0] == 0) throw EmptyGroup("empty cell: s=0");
  if (n[1] == 0) throw EmptyGroup("empty cell: s=1");

  CalibrationDisparities out;
  for (const auto& [bin, cell] : cells) {
    const double d1 = static_cast<double>(cell[1][1]) / n[1] -
                      static_cast<double>(cell[0][1]) / n[0];
    const double d0 = static_cast<double>(cell[1][0]) / n[1] -
                      static_cast<double>(cell[0][0]) / n[0];
    out.dpc += 0.5 * std::abs(d1);
    out.dnc += 0.5 * std::abs(d0);
  }
  out.dc = 0.5 * (out.dpc + out.dnc);
  out.bins_used = static_cast<int>(cells.size());
  return out;
}

MucResult muc(const std::vector<PredictionRecord>& records,
              const ScoreBinning& binning) {
  binning.validate();
  const auto distinct = binning.mode == ScoreBinning::Mode::DistinctValues
                            ? distinct_scores(records)
                            : std::vector<double>{};
  long row = 0;
  std::map<int, std::array<std::array<long, 2>, 2>> cells;  // [s][y] counts
  for (const auto& rec : records) {
    check_record(rec, row++);
    auto& cell = cells[score_bin(rec.score, binning, distinct)];
    ++cell[rec.s][rec.y];
  }
  MucResult out;
  for (const auto& [bin, cell] : cells) {
    const long tot0 = cell[0][0] + cell[0][1];
    const long tot1 = cell[1][0] + cell[1][1];
    if (tot0 == 0 || tot1 == 0) {
      // Conditional undefined for a single-group bin; skipped, not imputed.
      ++out.skipped_bins;
      continue;
    }
    ++out.shared_bins;
    const double disparity =
        std::abs(static_cast<double>(cell[1][1]) / tot1 -
                 static_cast<double>(cell[0][1]) / tot0);
    out.value = std::max(out.value, disparity);
  }
  if (out.shared_bins == 0) {
    out.no_shared_bins = true;
    out.value = 0.0;
  }
  return out;
}

namespace {

int class_count(const std::vector<PredictionRecord>& records, bool sensitive) {
  int max_c = 0;
  for (const auto& rec : records) {
    max_c = std::max(max_c, sensitive ? rec.s : rec.y);
  }
  return max_c + 1;
}

// P(yhat = y | rows matching pred); requires hard predictions.
template <typename Pred>
double cat_rate(const std::vector<PredictionRecord>& records, int y, Pred pred,
                const std::string& cell) {
  long hit = 0, count = 0;
  for (const auto& rec : records) {
    if (!pred(rec)) continue;
    if (!rec.hard) {
      throw FairboundError(
          "categorical metrics with >2 classes require hard predictions");
    }
    ++count;
    if (*rec.hard == y) ++hit;
  }
  if (count == 0) throw EmptyGroup("empty cell: " + cell);
  return static_cast<double>(hit) / static_cast<double>(count);
}

double categorical_calibration(const std::vector<PredictionRecord>& records,
                               FairnessNotion notion, int num_s, int num_y) {
  // h(Z)_y reduces to the indicator 1{yhat=y}; two bins per class.
  double best = 0.0;
  for (int y = 0; y < num_y; ++y) {
    std::vector<long> n(num_s, 0);
    // [s][r][match] with r = indicator bin, match = 1{Y==y}
    std::vector<std::array<std::array<long, 2>, 2>> cells(num_s);
    for (auto& c : cells) c = {{{0, 0}, {0, 0}}};
    for (const auto& rec : records) {
      if (!rec.hard) {
        throw FairboundError(
            "categorical metrics with >2 classes require hard predictions");
      }
      ++n[rec.s];
      ++cells[rec.s][*rec.hard == y ? 1 : 0][rec.y == y ? 1 : 0];
    }
    for (int s1 = 0; s1 < num_s; ++s1) {
      for (int s0 = 0; s0 < s1; ++s0) {
        if (n[s0] == 0 || n[s1] == 0) throw EmptyGroup("empty sensitive class");
        double dpc = 0.0, dnc = 0.0;
        for (int r = 0; r < 2; ++r) {
          dpc += 0.5 * std::abs(static_cast<double>(cells[s1][r][1]) / n[s1] -
                                static_cast<double>(cells[s0][r][1]) / n[s0]);
          dnc += 0.5 * std::abs(static_cast<double>(cells[s1][r][0]) / n[s1] -
                                static_cast<double>(cells[s0][r][0]) / n[s0]);
        }
        double v = 0.0;
        switch (notion) {
          case FairnessNotion::DPC: v = dpc; break;
          case FairnessNotion::DNC: v = dnc; break;
          default: v = 0.5 * (dpc + dnc); break;
        }
        best = std::max(best, v);
      }
    }
  }
  return best;
}

}  // namespace

double categorical_fairness(const std::vector<PredictionRecord>& records,
                            FairnessNotion notion,
                            const ScoreBinning& binning) {
  const int num_s = class_count(records, true);
  const int num_y = class_count(records, false);
  if (num_s < 2) throw EmptyGroup("fewer than 2 sensitive classes");
  if (num_y < 2) throw EmptyGroup("fewer than 2 target classes");

  if (num_s == 2 && num_y == 2) {
    switch (notion) {
      case FairnessNotion::SP: return statistical_parity(records);
      case FairnessNotion::DOpp: return disparity_opportunity(records);
      case FairnessNotion::DR: return disparity_regret(records);
      case FairnessNotion::DOdds: return disparity_odds(records);
      case FairnessNotion::DPC: return calibration_disparities(records, binning).dpc;
      case FairnessNotion::DNC: return calibration_disparities(records, binning).dnc;
      case FairnessNotion::DC: return calibration_disparities(records, binning).dc;
    }
  }

  if (notion == FairnessNotion::DPC || notion == FairnessNotion::DNC ||
      notion == FairnessNotion::DC) {
    return categorical_calibration(records, notion, num_s, num_y);
  }

  double best = 0.0;
  for (int y = 0; y < num_y; ++y) {
    for (int s1 = 0; s1 < num_s; ++s1) {
      for (int s0 = 0; s0 < s1; ++s0) {
        auto in = [&](int s) {
          return [s](const PredictionRecord& rec) { return rec.s == s; };
        };
        auto in_y = [&](int s) {
          return [s, y](const PredictionRecord& rec) {
            return rec.s == s && rec.y == y;
          };
        };
        double v = 0.0;
        if (notion == FairnessNotion::SP) {
          v = std::abs(cat_rate(records, y, in(s1), "s") -
                       cat_rate(records, y, in(s0), "s"));
        } else {
          // DOpp, DR and DOdds all key on P(yhat=y | Y=y, S=s); in the
          // categorical table DR and DOdds use the complement event, whose
          // pairwise disparity coincides with DOpp's.
          v = std::abs(cat_rate(records, y, in_y(s1), "(s,y)") -
                       cat_rate(records, y, in_y(s0), "(s,y)"));
        }
        best = std::max(best, v);
      }
    }
  }
  return best;
}

double tvd_histogram(const Eigen::MatrixXd& samples_a,
                     const Eigen::MatrixXd& samples_b, int bins_per_dim) {
  const long d = samples_a.cols();
  if (d != samples_b.cols()) {
    throw MalformedData("sample dimensions differ");
  }
  if (d > 4) {
    throw DimensionTooHigh("tvd_histogram supports at most 4 dimensions");
  }
  if (bins_per_dim < 2) throw FairboundError("bins_per_dim must be >= 2");
  if (samples_a.rows() == 0 || samples_b.rows() == 0) {
    throw EmptyGroup("empty sample in tvd_histogram");
  }

  Eigen::VectorXd lo(d), hi(d);
  for (long j = 0; j < d; ++j) {
    lo(j) = std::min(samples_a.col(j).minCoeff(), samples_b.col(j).minCoeff());
    hi(j) = std::max(samples_a.col(j).maxCoeff(), samples_b.col(j).maxCoeff());
  }

  auto cell_of = [&](const Eigen::MatrixXd& m, long i) {
    long key = 0;
    for (long j = 0; j < d; ++j) {
      const double range = hi(j) - lo(j);
      int bin = 0;
      if (range > 0) {
        bin = static_cast<int>((m(i, j) - lo(j)) / range * bins_per_dim);
        bin = std::clamp(bin, 0, bins_per_dim - 1);
      }
      key = key * bins_per_dim + bin;
    }
    return key;
  };

  std::unordered_map<long, std::pair<long, long>> counts;
  for (long i = 0; i < samples_a.rows(); ++i) ++counts[cell_of(samples_a, i)].first;
  for (long i = 0; i < samples_b.rows(); ++i) ++counts[cell_of(samples_b, i)].second;

  double tvd = 0.0;
  const double na = static_cast<double>(samples_a.rows());
  const double nb = static_cast<double>(samples_b.rows());
  for (const auto& [key, c] : counts) {
    tvd += 0.5 * std::abs(c.first / na - c.second / nb);
  }
  return tvd;
}

FairnessReport fairness_report(const std::vector<PredictionRecord>& records,
                               const ScoreBinning& binning) {
  FairnessReport rep;
  rep.sp = statistical_parity(records);
  rep.dopp = disparity_opportunity(records);
  rep.dr = disparity_regret(records);
  rep.dodds = 0.5 * (rep.dopp + rep.dr);
  const auto cal = calibration_disparities(records, binning);
  rep.dpc = cal.dpc;
  rep.dnc = cal.dnc;
  rep.dc = cal.dc;
  rep.bins_used = cal.bins_used;
  const auto m = muc(records, binning);
  rep.muc = m.value;
  rep.muc_defined = !m.no_shared_bins;
  rep.muc_skipped_bins = m.skipped_bins;
  return rep;
}

}  // namespace fairbound
