#include "holder/run.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>

#include "holder/error.hpp"
#include "holder/pathstats.hpp"
#include "holder/simulate.hpp"

namespace holder {
namespace {

std::string error_type(const std::exception& e) {
  if (dynamic_cast<const DomainError*>(&e)) return "domain";
  if (dynamic_cast<const ParameterError*>(&e)) return "parameter";
  if (dynamic_cast<const CapabilityError*>(&e)) return "capability";
  if (dynamic_cast<const QuadratureError*>(&e)) return "quadrature";
  if (dynamic_cast<const NumericalConsistencyError*>(&e)) return "numerical-consistency";
  if (dynamic_cast<const InsufficientDataError*>(&e)) return "insufficient-data";
  if (dynamic_cast<const NotPositiveDefiniteError*>(&e)) return "not-positive-definite";
  if (dynamic_cast<const EmbeddingError*>(&e)) return "embedding";
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  return "internal";
}

Json to_json(const ConditionFit& cf) {
  Json dropped = Json::array();
  for (const double h : cf.dropped_lags) dropped.push_back(number(h));
  return {{"vacuous", cf.vacuous()},
          {"fit", cf.fit ? to_json(*cf.fit) : Json(nullptr)},
          {"decay", to_json(std::span<const DecayPoint>(cf.decay))},
          {"dropped_lags", dropped}};
}

Json to_json(const IntegralConditions& ic) {
  return {{"first", to_json(ic.first)},
          {"second", to_json(ic.second)},
          {"holder_index", number(ic.holder_index())}};
}

Json to_json(const MomentEstimate& m) {
  return {{"value", number(m.value)},
          {"half_width", number(m.half_width)},
          {"n_samples", m.n_samples},
          {"stability", number(m.stability)},
          {"overflow_count", m.overflow_count},
          {"stable", m.stable}};
}

Json numbers(std::span<const double> xs) {
  Json out = Json::array();
  for (const double x : xs) out.push_back(number(x));
  return out;
}

VolterraKernel kernel_of(const CovarianceModel& model) {
  if (model.kernel()) return *model.kernel();
  if (model.kind() == ModelKind::bm) return VolterraKernel::brownian();
  throw CapabilityError("model '" + to_string(model.kind()) +
                        "' has no Volterra kernel representation here");
}

const SelfSimilarProfile& profile_of(const CovarianceModel& model) {
  if (!model.profile())
    throw CapabilityError("analysis requires a selfsimilar model, got '" +
                          to_string(model.kind()) + "'");
  return *model.profile();
}

SpectralMeasure spectral_of(const CovarianceModel& model) {
  if (model.spectral_measure()) return *model.spectral_measure();
  if (model.kind() == ModelKind::ou)
    return SpectralMeasure::ornstein_uhlenbeck(model.ou_sigma(), model.ou_theta());
  throw CapabilityError("model '" + to_string(model.kind()) + "' has no spectral measure");
}

double require_hurst(const std::optional<double>& H) {
  if (!H) throw ParameterError("analysis needs H: set 'H' or a model with a Hurst index");
  return *H;
}

/// Paths shared between the simulate and pathstats analyses.
struct PathCache {
  std::vector<SamplePath> paths;
  bool ready = false;
};

class Runner {
 public:
  Runner(const RunConfig& config, const RunOptions& options)
      : config_(config),
        options_(options),
        model_(build_model(config.model)),
        grid_(build_grid(config)),
        hurst_(effective_hurst(config)),
        seed_(options.seed.value_or(config.seed)) {
    scan_.threads = options.threads;
  }

  /// Returns the result JSON; sets `violated` when a verdict fails.
  Json analyse(const std::string& name, bool& violated) {
    const double T = model_.horizon();
    if (name == "metric-fit") {
      const auto lags = dyadic_lags(T, config_.lag_k_min, config_.lag_k_max);
      const auto decay = metric_decay(model_, grid_, lags);
      const auto fit = fit_holder_exponent(decay);
      return {{"fit", to_json(fit)},
              {"holder_index", number(fit.exponent)},
              {"decay", to_json(std::span<const DecayPoint>(decay))}};
    }
    if (name == "kc") {
      const double H = require_hurst(hurst_);
      Json verdicts = Json::array();
      for (const double eps : config_.epsilons) {
        const auto v = kc_check(model_, H, eps, grid_, scan_);
        violated = violated || !v.holds;
        verdicts.push_back({{"eps", number(eps)}, {"verdict", to_json(v)}});
      }
      return {{"H", number(H)}, {"verdicts", verdicts}};
    }
    if (name == "divergence") {
      const double H = require_hurst(hurst_);
      const auto grids = dyadic_grids(T, config_.divergence_k_min, config_.divergence_k_max);
      std::vector<double> eps_list{0.0};
      eps_list.insert(eps_list.end(), config_.epsilons.begin(), config_.epsilons.end());
      Json scans = Json::array();
      for (const double eps : eps_list) {
        const auto c = divergence_scan(model_, H, eps, grids, scan_);
        bool nondecreasing = true;
        for (std::size_t i = 1; i < c.size(); ++i) nondecreasing = nondecreasing && c[i] >= c[i - 1];
        const double growth = c.front() > 0.0 ? c.back() / c.front() - 1.0 : 0.0;
        const double last_change = c.size() >= 2 ? relative_change(c[c.size() - 2], c.back()) : 0.0;
        scans.push_back({{"eps", number(eps)},
                         {"constants", numbers(c)},
                         {"nondecreasing", nondecreasing},
                         {"total_growth", number(growth)},
                         {"last_relative_change", number(last_change)}});
      }
      return {{"H", number(H)},
              {"k_min", config_.divergence_k_min},
              {"k_max", config_.divergence_k_max},
              {"scans", scans}};
    }
    if (name == "volterra") {
      const auto lags = dyadic_lags(T, config_.lag_k_min, config_.lag_k_max);
      return to_json(volterra_conditions_check(kernel_of(model_), grid_, lags, T));
    }
    if (name == "alos") {
      const auto v = alos_check(kernel_of(model_), require_hurst(hurst_), grid_);
      violated = violated || !v.holds;
      return {{"verdict", to_json(v)}};
    }
    if (name == "selfsimilar") {
      const auto lags = dyadic_lags(T, config_.lag_k_min, config_.lag_k_max);
      return to_json(selfsimilar_conditions_check(profile_of(model_), grid_, lags, T));
    }
    if (name == "selfsimilar-sufficient") {
      const auto pairs = xy_pairs(64);
      const auto v = selfsimilar_sufficient_check(profile_of(model_), require_hurst(hurst_),
                                                  pairs);
      violated = violated || !v.holds;
      return {{"verdict", to_json(v)}};
    }
    if (name == "fredholm") {
      const auto kernel = kernel_of(model_);
      const double H = require_hurst(hurst_);
      const std::size_t m = config_.fredholm_u_points;
      std::vector<double> u(m);
      for (std::size_t i = 0; i < m; ++i) u[i] = T * (static_cast<double>(i) + 0.5) / m;
      const std::vector<double> f(m, config_.fredholm_f);
      Json verdicts = Json::array();
      for (const double eps : config_.epsilons) {
        const auto v = fredholm_dominating_check(
            [kernel](double t, double s) { return kernel(t, s); }, u, f, H, eps, grid_);
        violated = violated || !v.holds;
        verdicts.push_back({{"eps", number(eps)}, {"verdict", to_json(v)}});
      }
      return {{"f", number(config_.fredholm_f)}, {"u_points", m}, {"verdicts", verdicts}};
    }
    if (name == "stationary-increment") {
      const auto lags = dyadic_lags(T, config_.lag_k_min, config_.lag_k_max);
      const auto fit = stationary_increment_check(model_, lags);
      return {{"fit", to_json(fit)}, {"holder_index", number(0.5 * fit.exponent)}};
    }
    if (name == "spectral") {
      const auto measure = spectral_of(model_);
      const auto lags = dyadic_lags(T, config_.lag_k_min, config_.lag_k_max);
      const auto decay = spectral_decay(measure, lags);
      const auto fit = fit_holder_exponent(decay);
      return {{"fit", to_json(fit)},
              {"holder_index", number(0.5 * fit.exponent)},
              {"decay", to_json(std::span<const DecayPoint>(decay))}};
    }
    if (name == "simulate") {
      const auto& paths = simulated();
      Json meta = {{"n_paths", paths.size()},
                   {"grid_points", grid_.size()},
                   {"method", config_.method},
                   {"seed", seed_},
                   {"model_id", paths.front().meta.model_id},
                   {"jitter", number(paths.front().meta.jitter)},
                   {"clip_mass", number(paths.front().meta.clip_mass)}};
      if (options_.write_files) {
        std::ofstream os(out_dir() / "paths.csv");
        write_paths_csv(os, paths);
        meta["file"] = "paths.csv";
      }
      return meta;
    }
    if (name == "pathstats") return pathstats();
    throw ConfigError("unknown analysis '" + name + "'");
  }

  std::filesystem::path out_dir() const {
    return options_.out_dir.value_or(config_.output);
  }

 private:
  const std::vector<SamplePath>& simulated() {
    if (!cache_.ready) {
      const SimulationPlan plan(model_, grid_, config_.n_paths, seed_,
                                simulation_method_from_string(config_.method));
      cache_.paths = sample_paths(plan, options_.threads);
      cache_.ready = true;
    }
    return cache_.paths;
  }

  Json pathstats() {
    const double H = require_hurst(hurst_);
    const auto& paths = simulated();
    const bool uniform = uniform_step(grid_).has_value();
    Json per_eps = Json::array();
    bool constants_written = false;
    for (const double eps : config_.epsilons) {
      const double order = H - eps;
      std::vector<double> constants(paths.size());
      bool restricted = false;
      for (std::size_t i = 0; i < paths.size(); ++i) {
        const auto stat = path_holder_constant(paths[i], order);
        constants[i] = stat.constant;
        restricted = restricted || stat.restricted;
      }
      Json entry = {{"eps", number(eps)},
                    {"order", number(order)},
                    {"restricted", restricted},
                    {"constants_max", number(*std::max_element(constants.begin(), constants.end()))}};
      const auto record = [&](const char* key, const std::function<Json()>& body) {
        try {
          entry[key] = body();
        } catch (const Error& e) {
          entry[key] = {{"error_type", error_type(e)}, {"error", e.what()}};
        }
      };
      if (uniform) {
        record("exponent", [&] {
          const auto lags = default_path_lags();
          double sum = 0.0;
          for (const auto& p : paths) sum += path_holder_exponent(p, lags).exponent;
          return Json{{"mean", number(sum / static_cast<double>(paths.size()))},
                      {"lag_steps", lags}};
        });
        record("grr", [&] {
          const auto g = grr_constant_estimate(paths, H, eps, options_.threads);
          return Json{{"max_ratio", to_json(g.max_ratio)},
                      {"mean", number(g.mean)},
                      {"median", number(g.median)},
                      {"min", number(g.min)}};
        });
      }
      record("exp_moment", [&] {
        return to_json(exp_moment_estimate(constants, config_.moment_a, config_.moment_kappa));
      });
      record("series", [&] {
        const double c = moment_bound_constant(constants);
        const auto s = exp_moment_series(config_.moment_a, c, config_.moment_kappa,
                                         config_.series_terms);
        return Json{{"moment_constant", number(c)},
                    {"verdict", to_string(s.verdict)},
                    {"last_partial_sum", number(s.partial_sums.back())},
                    {"last_term_ratio", number(s.term_ratios.back())}};
      });
      if (options_.write_files && !constants_written) {
        std::ofstream os(out_dir() / "constants.csv");
        write_constants_csv(os, constants);
        entry["file"] = "constants.csv";
        constants_written = true;
      }
      per_eps.push_back(std::move(entry));
    }
    return {{"H", number(H)}, {"n_paths", paths.size()}, {"per_eps", per_eps}};
  }

  const RunConfig& config_;
  const RunOptions& options_;
  CovarianceModel model_;
  std::vector<double> grid_;
  std::optional<double> hurst_;
  std::uint64_t seed_;
  PairScanOptions scan_;
  PathCache cache_;
};

}  // namespace

RegularityReport run(const RunConfig& config, const RunOptions& options) {
  RegularityReport report;
  RunConfig echoed = config;
  if (options.seed) echoed.seed = *options.seed;
  report.config = to_json(echoed);
  Runner runner(config, options);
  if (options.write_files) std::filesystem::create_directories(runner.out_dir());
  for (const auto& name : config.analyses) {
    AnalysisRecord rec;
    rec.name = name;
    const auto start = std::chrono::steady_clock::now();
    try {
      rec.result = runner.analyse(name, rec.violated);
    } catch (const Error& e) {
      rec.status = "error";
      rec.error_type = error_type(e);
      rec.error = e.what();
      rec.result = Json::object();
    }
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.analyses.push_back(std::move(rec));
  }
  if (options.write_files) {
    std::ofstream os(runner.out_dir() / "report.json");
    os << to_json(report).dump(2) << '\n';
  }
  return report;
}

bool has_violations(const RegularityReport& report) {
  for (const auto& a : report.analyses)
    if (a.violated) return true;
  return false;
}

}  // namespace holder
