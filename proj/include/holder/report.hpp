#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "holder/config.hpp"
#include "holder/regularity.hpp"

namespace holder {

using Json = nlohmann::json;

struct AnalysisRecord {
  std::string name;
  std::string status = "ok";  // ok | error
  std::string error_type;
  std::string error;
  double wall_seconds = 0.0;
  /// Some verdict in `result` was computed as violated.
  bool violated = false;
  Json result = Json::object();
};

struct RegularityReport {
  std::string version = HOLDER_VERSION;
  Json config = Json::object();
  std::vector<AnalysisRecord> analyses;
};

/// Finite values as numbers; inf, -inf and nan as the strings "inf",
/// "-inf" and "nan" so that a report round-trips exactly.
Json number(double x);
double number_from(const Json& j);

Json to_json(const ExponentFit& fit);
Json to_json(const ConditionVerdict& verdict);
Json to_json(std::span<const DecayPoint> decay);
Json to_json(const RunConfig& config);

Json to_json(const RegularityReport& report);
RegularityReport report_from_json(const Json& j);

}  // namespace holder
