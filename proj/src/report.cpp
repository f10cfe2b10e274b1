#include "holder/report.hpp"

#include <cmath>
#include <limits>

#include "holder/error.hpp"

namespace holder {

Json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double number_from(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ParameterError("expected a number, got " + j.dump());
}

Json to_json(const ExponentFit& fit) {
  Json dropped = Json::array();
  for (const double h : fit.dropped_lags) dropped.push_back(number(h));
  return {{"exponent", number(fit.exponent)},
          {"log_constant", number(fit.log_constant)},
          {"max_residual", number(fit.max_residual)},
          {"h_min", number(fit.h_min)},
          {"h_max", number(fit.h_max)},
          {"n_lags", fit.n_lags},
          {"dropped_lags", dropped}};
}

Json to_json(const ConditionVerdict& v) {
  Json constants = Json::object();
  for (const auto& [k, x] : v.constants) constants[k] = number(x);
  Json sub = Json::array();
  for (const auto& s : v.sub) sub.push_back(to_json(s));
  return {{"name", v.name},
          {"holds", v.holds},
          {"margin", number(v.margin)},
          {"witness", {number(v.witness.first), number(v.witness.second)}},
          {"constants", constants},
          {"sub", sub},
          {"notes", v.notes}};
}

Json to_json(std::span<const DecayPoint> decay) {
  Json out = Json::array();
  for (const auto& p : decay) out.push_back({number(p.lag), number(p.value)});
  return out;
}

Json to_json(const RunConfig& c) {
  const auto& m = c.model;
  Json model = {{"kind", m.kind},
                {"horizon", number(m.horizon)},
                {"hurst", m.hurst ? number(*m.hurst) : Json(nullptr)},
                {"sigma", number(m.sigma)},
                {"theta", number(m.theta)},
                {"power", number(m.power)},
                {"spectral", {{"family", m.spectral_family}, {"truncation", number(m.truncation)}}},
                {"kernel", {{"family", m.kernel_family}}},
                {"profile",
                 {{"family", m.profile_family},
                  {"beta", number(m.beta)},
                  {"value", number(m.profile_value)}}}};
  Json grid = {{"n", c.grid.intervals}, {"start", number(c.grid.start)}};
  if (!c.grid.points.empty()) {
    Json pts = Json::array();
    for (const double t : c.grid.points) pts.push_back(number(t));
    grid["points"] = pts;
  }
  Json eps = Json::array();
  for (const double e : c.epsilons) eps.push_back(number(e));
  return {{"model", model},
          {"grid", grid},
          {"analyses", c.analyses},
          {"epsilons", eps},
          {"H", c.H ? number(*c.H) : Json(nullptr)},
          {"seed", c.seed},
          {"n_paths", c.n_paths},
          {"method", c.method},
          {"output", c.output},
          {"lags", {{"k_min", c.lag_k_min}, {"k_max", c.lag_k_max}}},
          {"divergence", {{"k_min", c.divergence_k_min}, {"k_max", c.divergence_k_max}}},
          {"fredholm", {{"f", number(c.fredholm_f)}, {"u_points", c.fredholm_u_points}}},
          {"moments",
           {{"a", number(c.moment_a)},
            {"kappa", number(c.moment_kappa)},
            {"series_terms", c.series_terms}}}};
}

Json to_json(const RegularityReport& r) {
  Json analyses = Json::array();
  for (const auto& a : r.analyses) {
    Json rec = {{"name", a.name},
                {"status", a.status},
                {"wall_seconds", number(a.wall_seconds)},
                {"violated", a.violated},
                {"result", a.result}};
    if (a.status != "ok") {
      rec["error_type"] = a.error_type;
      rec["error"] = a.error;
    }
    analyses.push_back(std::move(rec));
  }
  return {{"tool", "holdercheck"},
          {"version", r.version},
          {"config", r.config},
          {"analyses", analyses}};
}

RegularityReport report_from_json(const Json& j) {
  RegularityReport r;
  r.version = j.at("version").get<std::string>();
  r.config = j.at("config");
  for (const auto& rec : j.at("analyses")) {
    AnalysisRecord a;
    a.name = rec.at("name").get<std::string>();
    a.status = rec.at("status").get<std::string>();
    a.wall_seconds = number_from(rec.at("wall_seconds"));
    a.violated = rec.at("violated").get<bool>();
    a.result = rec.at("result");
    if (rec.contains("error_type")) a.error_type = rec.at("error_type").get<std::string>();
    if (rec.contains("error")) a.error = rec.at("error").get<std::string>();
    r.analyses.push_back(std::move(a));
  }
  return r;
}

}  // namespace holder
