#include "fairbound/report.hpp"

#include <cmath>

namespace fairbound {

double sig6(double v) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  const double mag = std::pow(10.0, 5 - std::floor(std::log10(std::abs(v))));
  return std::round(v * mag) / mag;
}

nlohmann::json report_skeleton(const std::string& command, unsigned seed) {
  return {
      {"meta", {{"tool", "fairbound"}, {"command", command}, {"seed", seed}}},
      {"rates", nlohmann::json::object()},
      {"estimates", nlohmann::json::object()},
      {"metrics", nlohmann::json::object()},
      {"guarantees", nlohmann::json::object()},
  };
}

nlohmann::json rates_json(const BaseRates& rates) {
  return {{"r", sig6(rates.r)}, {"a", sig6(rates.a)}, {"b", sig6(rates.b)}};
}

nlohmann::json metrics_json(const FairnessReport& rep) {
  return {
      {"sp", sig6(rep.sp)},
      {"dopp", sig6(rep.dopp)},
      {"dr", sig6(rep.dr)},
      {"dodds", sig6(rep.dodds)},
      {"dpc", sig6(rep.dpc)},
      {"dnc", sig6(rep.dnc)},
      {"dc", sig6(rep.dc)},
      {"muc", sig6(rep.muc)},
      {"muc_defined", rep.muc_defined},
      {"muc_skipped_bins", rep.muc_skipped_bins},
      {"bins_used", rep.bins_used},
  };
}

nlohmann::json guarantees_json(const GuaranteeReport& rep) {
  return {
      {"alpha", sig6(rep.alpha)},
      {"beta", sig6(rep.beta)},
      {"sp", sig6(rep.sp)},
      {"dopp", sig6(rep.dopp)},
      {"dr", sig6(rep.dr)},
      {"dodds", sig6(rep.dodds)},
      {"dpc", sig6(rep.dpc)},
      {"dnc", sig6(rep.dnc)},
      {"dc", sig6(rep.dc)},
      {"calibration_lower", sig6(rep.calibration_lower)},
      {"tradeoff_beta_lower", sig6(rep.tradeoff_beta_lower)},
      {"monotone_ok", rep.monotone_ok},
  };
}

}  // namespace fairbound
