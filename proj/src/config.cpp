#include "holder/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "holder/error.hpp"
#include "holder/regularity.hpp"

namespace holder {
namespace {

std::string where(const YAML::Node& node) {
  const auto mark = node.Mark();
  if (mark.line < 0) return "";
  return "line " + std::to_string(mark.line + 1) + ": ";
}

[[noreturn]] void fail(const YAML::Node& node, const std::string& message) {
  throw ConfigError(where(node) + message);
}

void require_map(const YAML::Node& node, const std::string& key,
                 std::initializer_list<const char*> allowed) {
  if (!node.IsMap()) fail(node, "'" + key + "' must be a mapping");
  const std::set<std::string> names(allowed.begin(), allowed.end());
  for (const auto& entry : node) {
    const auto name = entry.first.as<std::string>();
    if (!names.count(name)) {
      std::string list;
      for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
      fail(entry.first, "unknown key '" + (key.empty() ? name : key + "." + name) +
                            "' (expected one of: " + list + ")");
    }
  }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& key, const char* type) {
  if (!node.IsScalar()) fail(node, "'" + key + "' must be a " + type);
  try {
    return node.as<T>();
  } catch (const YAML::BadConversion&) {
    fail(node, "'" + key + "' must be a " + type + ", got '" + node.Scalar() + "'");
  }
}

template <class T>
void read(const YAML::Node& map, const char* name, const std::string& prefix, T& out,
          const char* type) {
  const auto node = map[name];
  if (!node) return;
  out = scalar<T>(node, prefix + name, type);
}

template <class T>
std::vector<T> sequence(const YAML::Node& node, const std::string& key, const char* type) {
  if (!node.IsSequence()) fail(node, "'" + key + "' must be a list of " + type);
  std::vector<T> out;
  for (const auto& item : node) out.push_back(scalar<T>(item, key, type));
  return out;
}

void parse_model(const YAML::Node& node, ModelSpec& m) {
  require_map(node, "model",
              {"kind", "horizon", "hurst", "sigma", "theta", "power", "spectral", "kernel",
               "profile"});
  if (!node["kind"]) fail(node, "missing required key 'model.kind'");
  read(node, "kind", "model.", m.kind, "string");
  try {
    model_kind_from_string(m.kind);
  } catch (const ParameterError&) {
    fail(node["kind"], "unknown model kind '" + m.kind +
                           "' (expected fbm, bm, ou, spectral, volterra, selfsimilar, "
                           "modulated-fbm)");
  }
  if (m.kind == "modulated-fbm") m.horizon = 0.3;
  read(node, "horizon", "model.", m.horizon, "number");
  double hurst = 0.0;
  if (node["hurst"]) {
    read(node, "hurst", "model.", hurst, "number");
    m.hurst = hurst;
  }
  read(node, "sigma", "model.", m.sigma, "number");
  read(node, "theta", "model.", m.theta, "number");
  read(node, "power", "model.", m.power, "number");
  if (const auto s = node["spectral"]) {
    require_map(s, "model.spectral", {"family", "truncation"});
    read(s, "family", "model.spectral.", m.spectral_family, "string");
    read(s, "truncation", "model.spectral.", m.truncation, "number");
    if (m.spectral_family != "ou" && m.spectral_family != "matern")
      fail(s["family"], "unknown spectral family '" + m.spectral_family +
                            "' (expected ou, matern)");
  }
  if (const auto k = node["kernel"]) {
    require_map(k, "model.kernel", {"family"});
    read(k, "family", "model.kernel.", m.kernel_family, "string");
    if (m.kernel_family != "brownian" && m.kernel_family != "riemann-liouville")
      fail(k["family"], "unknown kernel family '" + m.kernel_family +
                            "' (expected brownian, riemann-liouville)");
  }
  if (const auto p = node["profile"]) {
    require_map(p, "model.profile", {"family", "beta", "value"});
    read(p, "family", "model.profile.", m.profile_family, "string");
    read(p, "beta", "model.profile.", m.beta, "number");
    read(p, "value", "model.profile.", m.profile_value, "number");
    if (m.profile_family != "constant" && m.profile_family != "power" &&
        m.profile_family != "linear")
      fail(p["family"], "unknown profile family '" + m.profile_family +
                            "' (expected constant, power, linear)");
  }
  if (!(m.horizon > 0.0)) fail(node, "'model.horizon' must be positive");
}

template <class T>
void read_pair(const YAML::Node& root, const char* key, T& lo, T& hi) {
  const auto node = root[key];
  if (!node) return;
  require_map(node, key, {"k_min", "k_max"});
  const std::string prefix = std::string(key) + ".";
  read(node, "k_min", prefix, lo, "integer");
  read(node, "k_max", prefix, hi, "integer");
  if (lo < 0 || hi < lo) fail(node, "'" + std::string(key) + "' needs 0 <= k_min <= k_max");
}

}  // namespace

const std::vector<std::string>& known_analyses() {
  static const std::vector<std::string> names{
      "metric-fit", "kc",          "divergence",           "volterra",
      "alos",       "selfsimilar", "selfsimilar-sufficient", "fredholm",
      "stationary-increment",      "spectral",             "simulate",
      "pathstats"};
  return names;
}

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) throw ConfigError("config must be a mapping with a 'model' section");
  require_map(root, "",
              {"model", "grid", "analyses", "epsilons", "H", "seed", "n_paths", "method",
               "output", "lags", "divergence", "fredholm", "moments"});
  RunConfig c;
  if (!root["model"]) throw ConfigError("missing required key 'model'");
  parse_model(root["model"], c.model);

  if (const auto g = root["grid"]) {
    require_map(g, "grid", {"n", "start", "points"});
    read(g, "n", "grid.", c.grid.intervals, "positive integer");
    read(g, "start", "grid.", c.grid.start, "number");
    if (g["points"]) {
      c.grid.points = sequence<double>(g["points"], "grid.points", "numbers");
      if (c.grid.points.size() < 2) fail(g["points"], "'grid.points' needs >= 2 points");
      if (!std::is_sorted(c.grid.points.begin(), c.grid.points.end()) ||
          std::adjacent_find(c.grid.points.begin(), c.grid.points.end()) !=
              c.grid.points.end())
        fail(g["points"], "'grid.points' must be strictly increasing");
    }
    if (c.grid.intervals < 1) fail(g, "'grid.n' must be >= 1");
    if (!(c.grid.start >= 0.0 && c.grid.start < c.model.horizon))
      fail(g, "'grid.start' must lie in [0, horizon)");
  }

  if (const auto a = root["analyses"]) {
    c.analyses = sequence<std::string>(a, "analyses", "strings");
    const auto& known = known_analyses();
    std::size_t i = 0;
    for (const auto& item : a) {
      const auto& name = c.analyses[i++];
      if (std::find(known.begin(), known.end(), name) == known.end())
        fail(item, "unknown analysis '" + name + "'");
    }
  }
  if (const auto e = root["epsilons"]) c.epsilons = sequence<double>(e, "epsilons", "numbers");
  if (root["H"]) {
    double h = 0.0;
    read(root, "H", "", h, "number");
    if (!(h > 0.0 && h <= 1.0)) fail(root["H"], "'H' must lie in (0, 1]");
    c.H = h;
  }
  for (const double eps : c.epsilons) {
    if (!(eps > 0.0)) fail(root["epsilons"], "epsilons must be positive");
    if (c.H && !(eps < *c.H))
      fail(root["epsilons"] ? root["epsilons"] : root["H"],
           "epsilon " + std::to_string(eps) + " must be smaller than H = " +
               std::to_string(*c.H));
  }
  read(root, "seed", "", c.seed, "unsigned 64-bit integer");
  read(root, "n_paths", "", c.n_paths, "positive integer");
  if (c.n_paths < 1) fail(root["n_paths"], "'n_paths' must be >= 1");
  read(root, "method", "", c.method, "string");
  try {
    simulation_method_from_string(c.method);
  } catch (const Error&) {
    fail(root["method"], "unknown method '" + c.method + "' (expected cholesky, circulant)");
  }
  read(root, "output", "", c.output, "string");
  read_pair(root, "lags", c.lag_k_min, c.lag_k_max);
  read_pair(root, "divergence", c.divergence_k_min, c.divergence_k_max);
  if (const auto f = root["fredholm"]) {
    require_map(f, "fredholm", {"f", "u_points"});
    read(f, "f", "fredholm.", c.fredholm_f, "number");
    read(f, "u_points", "fredholm.", c.fredholm_u_points, "positive integer");
    if (c.fredholm_u_points < 1) fail(f, "'fredholm.u_points' must be >= 1");
  }
  if (const auto m = root["moments"]) {
    require_map(m, "moments", {"a", "kappa", "series_terms"});
    read(m, "a", "moments.", c.moment_a, "number");
    read(m, "kappa", "moments.", c.moment_kappa, "number");
    read(m, "series_terms", "moments.", c.series_terms, "positive integer");
    if (!(c.moment_kappa > 0.0 && c.moment_kappa <= 2.0))
      fail(m, "'moments.kappa' must lie in (0, 2]");
    if (c.series_terms < 2) fail(m, "'moments.series_terms' must be >= 2");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_config(text.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

CovarianceModel build_model(const ModelSpec& m) {
  const auto kind = model_kind_from_string(m.kind);
  const auto need_hurst = [&]() {
    if (!m.hurst) throw ConfigError("model '" + m.kind + "' requires 'model.hurst'");
    return *m.hurst;
  };
  switch (kind) {
    case ModelKind::fbm: return CovarianceModel::fbm(need_hurst(), m.horizon);
    case ModelKind::bm: return CovarianceModel::brownian(m.horizon);
    case ModelKind::ou: return CovarianceModel::ornstein_uhlenbeck(m.sigma, m.theta, m.horizon);
    case ModelKind::spectral: {
      auto measure = m.spectral_family == "matern"
                         ? SpectralMeasure::matern(need_hurst())
                         : SpectralMeasure::ornstein_uhlenbeck(m.sigma, m.theta);
      if (m.truncation > 0.0) {
        const auto base = measure;
        measure = SpectralMeasure([base](double l) { return base.density(l); }, m.truncation,
                                  0.0, base.name() + "-truncated");
      }
      return CovarianceModel::spectral(std::move(measure), m.horizon);
    }
    case ModelKind::volterra:
      return CovarianceModel::volterra(m.kernel_family == "riemann-liouville"
                                           ? VolterraKernel::riemann_liouville(need_hurst())
                                           : VolterraKernel::brownian(),
                                       m.horizon);
    case ModelKind::selfsimilar: {
      if (m.profile_family == "power")
        return CovarianceModel::selfsimilar(SelfSimilarProfile::power(m.beta, need_hurst()),
                                            m.horizon);
      if (m.profile_family == "linear")
        return CovarianceModel::selfsimilar(SelfSimilarProfile::linear(m.beta), m.horizon);
      return CovarianceModel::selfsimilar(
          SelfSimilarProfile::constant(m.profile_value, m.beta), m.horizon);
    }
    case ModelKind::modulated_fbm:
      return CovarianceModel::modulated_fbm(need_hurst(), m.horizon, m.power);
  }
  throw ConfigError("unsupported model kind '" + m.kind + "'");
}

std::vector<double> build_grid(const RunConfig& config) {
  if (!config.grid.points.empty()) return config.grid.points;
  return uniform_grid(config.grid.start, config.model.horizon, config.grid.intervals);
}

std::optional<double> effective_hurst(const RunConfig& config) {
  if (config.H) return config.H;
  const auto& m = config.model;
  if (m.kind == "bm" || m.kind == "ou") return 0.5;
  if (m.kind == "spectral" && m.spectral_family == "ou") return 0.5;
  if (m.kind == "volterra" && m.kernel_family == "brownian") return 0.5;
  if (m.kind == "selfsimilar" && m.profile_family == "constant") return std::min(m.beta, 0.5);
  return m.hurst;
}

}  // namespace holder
