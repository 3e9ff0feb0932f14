#pragma once

#include <json.hpp>
#include <string>

#include "fairbound/bounds.hpp"
#include "fairbound/core.hpp"
#include "fairbound/metrics.hpp"

namespace fairbound {

// All numbers in emitted reports are rounded to 6 significant digits.
double sig6(double v);

// Skeleton with the stable top-level schema:
// {meta, rates, estimates, metrics, guarantees}.
nlohmann::json report_skeleton(const std::string& command, unsigned seed);

nlohmann::json rates_json(const BaseRates& rates);
nlohmann::json metrics_json(const FairnessReport& rep);
nlohmann::json guarantees_json(const GuaranteeReport& rep);

}  // namespace fairbound
