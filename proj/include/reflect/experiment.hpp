#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <reflect/analysis.hpp>
#include <reflect/dynamic.hpp>
#include <reflect/errors.hpp>
#include <reflect/processes.hpp>
#include <reflect/reflection.hpp>
#include <reflect/serialization.hpp>

namespace reflect::io {

inline constexpr const char* kReportSchema = "reflect-report/1";

namespace detail {

/// Concurrency cap: REFLECT_THREADS when set to a positive integer,
/// otherwise the hardware thread count. Unparseable values are ignored.
inline unsigned thread_budget() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("REFLECT_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v >= 1 && v <= 4096) hw = static_cast<unsigned>(v);
  }
  return hw;
}

/// Runs fn(0..count-1), possibly across threads. Results must be written
/// into pre-sized slots so the merge is independent of scheduling; the
/// first exception is rethrown after all workers finish.
template <class Fn>
void for_each_index(std::size_t count, Fn fn) {
  const std::size_t workers = std::min<std::size_t>(thread_budget(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr error;
  auto body = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Linear-interpolation quantile of a sorted sample.
inline double quantile_sorted(const std::vector<double>& s, double q) {
  if (s.empty()) return 0.0;
  if (q <= 0.0) return s.front();
  if (q >= 1.0) return s.back();
  const double pos = q * static_cast<double>(s.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= s.size()) return s.back();
  return s[lo] + frac * (s[lo + 1] - s[lo]);
}

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return quantile_sorted(v, 0.5);
}

inline json quantile_block(std::vector<double> sorted_sample) {
  static const double qs[] = {0.0, 0.05, 0.25, 0.5, 0.75, 0.95, 1.0};
  json q = json::array(), v = json::array();
  for (const double x : qs) {
    q.push_back(x);
    v.push_back(quantile_sorted(sorted_sample, x));
  }
  json out;
  out["q"] = q;
  out["value"] = v;
  out["count"] = sorted_sample.size();
  return out;
}

}  // namespace detail

struct ErgodicSpec {
  bool enabled = false;
  double horizon = 0.0;
  double burn_in = 0.0;
  double spacing = 1.0;
};

/// Parsed experiment configuration. `routing_json` preserves the routing
/// block verbatim for the report echo; `routing` is set when the block is a
/// constant matrix (or a constant catalog entry with zero drift), which the
/// irrelevance / stationary / conditions kinds require.
struct ExperimentConfig {
  std::string kind;
  ProcessSpec process;
  json routing_json;
  std::optional<RoutingMatrix> routing;
  std::optional<CatalogEntry> catalog;
  std::vector<Vector> initials;
  double horizon = 0.0;
  double step = 0.0;
  std::uint64_t seed_base = 0;
  int seed_count = 1;
  double tol_solver = 1e-10;
  double tol_coupling = 1e-6;
  double verdict_threshold = 0.0;  // 0 means the default 10*max||a||_inf + 10
  ErgodicSpec ergodic;
  int checkpoints = 65;

  DynamicCoefficients coefficients() const {
    if (catalog) return catalog->coeffs;
    return DynamicCoefficients::make_constant(*routing);
  }
  double threshold() const {
    if (verdict_threshold > 0.0) return verdict_threshold;
    double amax = 0.0;
    for (const Vector& a : initials) amax = std::max(amax, a.size() ? a.cwiseAbs().maxCoeff() : 0.0);
    return 10.0 * amax + 10.0;
  }
};

inline ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("experiment config: expected a JSON object");
  ExperimentConfig c;
  c.kind = detail::need_string(j, "kind", "experiment config");
  if (c.kind != "irrelevance" && c.kind != "coupling" && c.kind != "stationary" &&
      c.kind != "conditions")
    throw ValidationError("experiment config: kind must be irrelevance, coupling, stationary or conditions");
  c.process = process_from_json(detail::need(j, "process", "experiment config"));
  const int n = process_dim(c.process);

  c.routing_json = detail::need(j, "routing", "experiment config");
  if (c.routing_json.is_object() && c.routing_json.contains("kind")) {
    c.catalog = coefficients_from_json(c.routing_json);
    if (c.catalog->coeffs.n != n)
      throw ValidationError("experiment config: routing dimension does not match process");
    if (c.catalog->coeffs.constant && c.catalog->coeffs.constant_b.isZero(0.0))
      c.routing = RoutingMatrix(c.catalog->coeffs.constant_P);
  } else {
    c.routing = RoutingMatrix(matrix_from_json(c.routing_json, "experiment routing"));
    if (c.routing->dim() != n)
      throw ValidationError("experiment config: routing dimension does not match process");
    if (!c.routing->zero_diagonal())
      throw ValidationError("experiment config: routing matrix must have zero diagonal");
  }
  if (c.kind != "coupling" && !c.routing)
    throw ValidationError("experiment config: kind '" + c.kind +
                          "' needs a constant routing matrix (zero drift)");

  if (j.contains("initials")) {
    const json& in = j["initials"];
    if (!in.is_array() || in.empty())
      throw ValidationError("experiment config: 'initials' must be a nonempty array of vectors");
    for (const auto& e : in) {
      Vector a = vector_from_json(e, "initial vector");
      if (a.size() != n)
        throw ValidationError("experiment config: initial vector dimension does not match process");
      for (Eigen::Index i = 0; i < a.size(); ++i)
        if (!std::isfinite(a[i]) || a[i] < 0.0)
          throw ValidationError("experiment config: initial vectors must be nonnegative and finite");
      c.initials.push_back(std::move(a));
    }
  } else {
    c.initials.push_back(Vector::Zero(n));
  }

  const json& g = detail::need(j, "grid", "experiment config");
  c.horizon = detail::need_number(g, "horizon", "experiment grid");
  c.step = detail::need_number(g, "step", "experiment grid");
  if (!(c.step > 0.0) || !(c.horizon >= c.step))
    throw ValidationError("experiment config: need step > 0 and horizon >= step");

  const json& s = detail::need(j, "seeds", "experiment config");
  const json& base = detail::need(s, "base", "experiment seeds");
  if (!base.is_number_integer() || base.get<long long>() < 0)
    throw ValidationError("experiment config: seed base must be a nonnegative integer");
  c.seed_base = base.get<std::uint64_t>();
  const json& count = detail::need(s, "count", "experiment seeds");
  if (!count.is_number_integer() || count.get<long>() < 1)
    throw ValidationError("experiment config: seed count must be >= 1");
  c.seed_count = count.get<int>();

  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    if (t.contains("solver")) c.tol_solver = t["solver"].get<double>();
    if (t.contains("coupling")) c.tol_coupling = t["coupling"].get<double>();
    if (t.contains("verdict_threshold")) c.verdict_threshold = t["verdict_threshold"].get<double>();
    if (!(c.tol_solver > 0.0) || !(c.tol_coupling > 0.0) || c.verdict_threshold < 0.0)
      throw ValidationError("experiment config: tolerances must be positive");
  }

  if (j.contains("ergodic")) {
    if (c.kind != "stationary")
      throw ValidationError("experiment config: 'ergodic' applies to kind=stationary only");
    const json& e = j["ergodic"];
    c.ergodic.enabled = true;
    c.ergodic.horizon = detail::need_number(e, "horizon", "ergodic block");
    c.ergodic.burn_in = e.contains("burn_in") ? e["burn_in"].get<double>() : 0.0;
    c.ergodic.spacing = e.contains("spacing") ? e["spacing"].get<double>() : 1.0;
    if (!(c.ergodic.horizon > c.ergodic.burn_in) || !(c.ergodic.spacing > 0.0) ||
        c.ergodic.burn_in < 0.0)
      throw ValidationError("experiment config: ergodic block needs horizon > burn_in >= 0, spacing > 0");
  }

  if (j.contains("checkpoints")) {
    if (!j["checkpoints"].is_number_integer() || j["checkpoints"].get<long>() < 2 ||
        j["checkpoints"].get<long>() > 100000)
      throw ValidationError("experiment config: checkpoints must be an integer in [2, 100000]");
    c.checkpoints = j["checkpoints"].get<int>();
  }
  return c;
}

inline json config_to_json(const ExperimentConfig& c) {
  json j;
  j["kind"] = c.kind;
  j["process"] = process_to_json(c.process);
  j["routing"] = c.routing_json;
  json in = json::array();
  for (const Vector& a : c.initials) in.push_back(vector_to_json(a));
  j["initials"] = in;
  j["grid"] = {{"horizon", c.horizon}, {"step", c.step}};
  j["seeds"] = {{"base", c.seed_base}, {"count", c.seed_count}};
  j["tolerances"] = {{"solver", c.tol_solver},
                     {"coupling", c.tol_coupling},
                     {"verdict_threshold", c.verdict_threshold}};
  if (c.ergodic.enabled)
    j["ergodic"] = {{"horizon", c.ergodic.horizon},
                    {"burn_in", c.ergodic.burn_in},
                    {"spacing", c.ergodic.spacing}};
  j["checkpoints"] = c.checkpoints;
  return j;
}

namespace detail {

inline std::vector<std::size_t> checkpoint_indices(std::size_t points, int wanted) {
  const std::size_t K = points - 1;
  std::vector<std::size_t> idx;
  const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(wanted), points);
  for (std::size_t j = 0; j < count; ++j) {
    const double pos = static_cast<double>(j) * static_cast<double>(K) / static_cast<double>(count - 1);
    const std::size_t k = static_cast<std::size_t>(std::llround(pos));
    if (idx.empty() || k > idx.back()) idx.push_back(k);
  }
  return idx;
}

struct IrrelevanceLeg {
  struct PerInitial {
    double terminal_inf = 0.0;
    double initial_inf = 0.0;
    double min_difference = 0.0;
    double max_transformed_increase = 0.0;
    double regulator_lower_violation = 0.0;
    double regulator_upper_violation = 0.0;
    std::vector<double> curve;  // ||D||_inf at the checkpoints
  };
  std::vector<PerInitial> per_initial;
};

inline json run_irrelevance(const ExperimentConfig& cfg, GridPtr grid) {
  const RoutingMatrix& P = *cfg.routing;
  const Matrix Rinv = neumann_inverse(P, std::min(cfg.tol_solver, 1e-12));
  const auto ckpt = checkpoint_indices(grid->size(), cfg.checkpoints);
  const std::size_t S = static_cast<std::size_t>(cfg.seed_count);

  std::vector<IrrelevanceLeg> legs(S);
  for_each_index(S, [&](std::size_t s) {
    const VectorPath X = generate(cfg.process, grid, cfg.seed_base + s);
    const ReflectionSolution base = reflect(X, P, cfg.tol_solver);
    IrrelevanceLeg leg;
    for (const Vector& a : cfg.initials) {
      const ReflectionSolution shifted = reflect(shift(a, X), P, cfg.tol_solver);
      IrrelevanceLeg::PerInitial r;
      const PathMatrix D = shifted.W.values() - base.W.values();
      const PathMatrix T = D * Rinv.transpose();
      r.terminal_inf = D.row(D.rows() - 1).cwiseAbs().maxCoeff();
      r.initial_inf = D.row(0).cwiseAbs().maxCoeff();
      r.min_difference = D.minCoeff();
      for (Eigen::Index k = 1; k < T.rows(); ++k) {
        const double inc = (T.row(k) - T.row(k - 1)).maxCoeff();
        if (inc > r.max_transformed_increase) r.max_transformed_increase = inc;
      }
      const PathMatrix dL = shifted.L.values() - base.L.values();
      r.regulator_lower_violation = std::max(0.0, dL.maxCoeff());
      const Vector slack = Rinv * a;
      for (Eigen::Index k = 0; k < dL.rows(); ++k)
        for (Eigen::Index i = 0; i < dL.cols(); ++i)
          r.regulator_upper_violation =
              std::max(r.regulator_upper_violation, -dL(k, i) - slack[i]);
      for (const std::size_t k : ckpt)
        r.curve.push_back(D.row(static_cast<Eigen::Index>(k)).cwiseAbs().maxCoeff());
      leg.per_initial.push_back(std::move(r));
    }
    legs[s] = std::move(leg);
  });

  json per_seed = json::array();
  for (std::size_t s = 0; s < S; ++s) {
    json e;
    e["seed"] = cfg.seed_base + s;
    json pi = json::array();
    for (std::size_t ai = 0; ai < cfg.initials.size(); ++ai) {
      const auto& r = legs[s].per_initial[ai];
      json v;
      v["a"] = vector_to_json(cfg.initials[ai]);
      v["terminal_difference_inf"] = r.terminal_inf;
      v["initial_difference_inf"] = r.initial_inf;
      v["min_difference"] = r.min_difference;
      v["max_transformed_increase"] = r.max_transformed_increase;
      v["regulator_lower_violation"] = r.regulator_lower_violation;
      v["regulator_upper_violation"] = r.regulator_upper_violation;
      pi.push_back(v);
    }
    e["per_initial"] = pi;
    per_seed.push_back(e);
  }

  json aggregate;
  json per_initial_agg = json::array();
  json times = json::array();
  for (const std::size_t k : ckpt) times.push_back((*grid)[k]);
  for (std::size_t ai = 0; ai < cfg.initials.size(); ++ai) {
    std::vector<double> terms, incs;
    for (const auto& leg : legs) {
      terms.push_back(leg.per_initial[ai].terminal_inf);
      incs.push_back(leg.per_initial[ai].max_transformed_increase);
    }
    json a;
    a["a"] = vector_to_json(cfg.initials[ai]);
    a["median_terminal_difference_inf"] = median_of(terms);
    std::sort(terms.begin(), terms.end());
    a["terminal_difference_quantiles"] = quantile_block(std::move(terms));
    a["max_transformed_increase"] = *std::max_element(incs.begin(), incs.end());
    json curve = json::array();
    const std::size_t C = legs.front().per_initial[ai].curve.size();
    for (std::size_t c = 0; c < C; ++c) {
      std::vector<double> at;
      at.reserve(S);
      for (const auto& leg : legs) at.push_back(leg.per_initial[ai].curve[c]);
      curve.push_back(median_of(std::move(at)));
    }
    a["decay_curve"] = {{"t", times}, {"median_difference_inf", curve}};
    per_initial_agg.push_back(a);
  }
  aggregate["per_initial"] = per_initial_agg;

  json out;
  out["per_seed"] = per_seed;
  out["aggregate"] = aggregate;
  return out;
}

inline json run_coupling(const ExperimentConfig& cfg, GridPtr grid) {
  const DynamicCoefficients coeffs = cfg.coefficients();
  const std::size_t S = static_cast<std::size_t>(cfg.seed_count);
  std::vector<std::vector<CouplingResult>> legs(S);

  for_each_index(S, [&](std::size_t s) {
    const VectorPath X = generate(cfg.process, grid, cfg.seed_base + s);
    std::vector<CouplingResult> row;
    const bool fast = coeffs.constant && coeffs.constant_b.isZero(0.0);
    if (fast) {
      const RoutingMatrix& P = *cfg.routing;
      const ReflectionSolution base = reflect(X, P, cfg.tol_solver);
      for (const Vector& a : cfg.initials) {
        const ReflectionSolution shifted = reflect(shift(a, X), P, cfg.tol_solver);
        row.push_back(coupling_time(shifted.W, base.W, cfg.tol_coupling));
      }
    } else {
      const Vector zero = Vector::Zero(coeffs.n);
      const DynamicSolution base = reflect_dynamic(X, coeffs, zero, cfg.tol_solver);
      for (const Vector& a : cfg.initials) {
        const DynamicSolution shifted = reflect_dynamic(X, coeffs, a, cfg.tol_solver);
        row.push_back(coupling_time(shifted.W, base.W, cfg.tol_coupling));
      }
    }
    legs[s] = std::move(row);
  });

  json per_seed = json::array();
  for (std::size_t s = 0; s < S; ++s) {
    json e;
    e["seed"] = cfg.seed_base + s;
    json pi = json::array();
    for (std::size_t ai = 0; ai < cfg.initials.size(); ++ai) {
      const CouplingResult& c = legs[s][ai];
      json v;
      v["a"] = vector_to_json(cfg.initials[ai]);
      v["coupled"] = c.coupled;
      if (c.coupled) v["time"] = c.time;
      pi.push_back(v);
    }
    e["per_initial"] = pi;
    per_seed.push_back(e);
  }

  json per_initial_agg = json::array();
  for (std::size_t ai = 0; ai < cfg.initials.size(); ++ai) {
    std::vector<double> times;
    std::size_t coupled = 0;
    for (const auto& leg : legs)
      if (leg[ai].coupled) {
        ++coupled;
        times.push_back(leg[ai].time);
      }
    std::sort(times.begin(), times.end());
    json a;
    a["a"] = vector_to_json(cfg.initials[ai]);
    a["fraction_coupled"] = static_cast<double>(coupled) / static_cast<double>(S);
    a["coupling_time_quantiles"] = quantile_block(times);
    // Histogram of coupling times over [0, horizon], 32 bins.
    const int bins = 32;
    std::vector<long> counts(bins, 0);
    for (const double t : times) {
      int b = static_cast<int>(t / cfg.horizon * bins);
      if (b >= bins) b = bins - 1;
      if (b < 0) b = 0;
      ++counts[static_cast<std::size_t>(b)];
    }
    json edges = json::array(), cj = json::array();
    for (int b = 0; b <= bins; ++b) edges.push_back(cfg.horizon * b / bins);
    for (const long c : counts) cj.push_back(c);
    a["histogram"] = {{"edges", edges}, {"counts", cj}};
    per_initial_agg.push_back(a);
  }

  json out;
  out["per_seed"] = per_seed;
  out["aggregate"] = {{"per_initial", per_initial_agg}};
  return out;
}

inline json run_stationary(const ExperimentConfig& cfg, GridPtr grid) {
  const RoutingMatrix& P = *cfg.routing;
  const int n = P.dim();
  const std::size_t S = static_cast<std::size_t>(cfg.seed_count);
  const std::size_t A = cfg.initials.size();

  // samples[a][coord][seed]
  std::vector<std::vector<std::vector<double>>> samples(
      A, std::vector<std::vector<double>>(static_cast<std::size_t>(n), std::vector<double>(S)));
  for_each_index(S, [&](std::size_t s) {
    const VectorPath X = generate(cfg.process, grid, cfg.seed_base + s);
    for (std::size_t ai = 0; ai < A; ++ai) {
      const ReflectionSolution sol = reflect(shift(cfg.initials[ai], X), P, cfg.tol_solver);
      for (int i = 0; i < n; ++i)
        samples[ai][static_cast<std::size_t>(i)][s] = sol.W.value(sol.W.points() - 1, i);
    }
  });

  json terminal = json::array();
  for (std::size_t ai = 0; ai < A; ++ai) {
    json e;
    e["a"] = vector_to_json(cfg.initials[ai]);
    json by_coord = json::array();
    for (int i = 0; i < n; ++i) by_coord.push_back(samples[ai][static_cast<std::size_t>(i)]);
    e["by_coordinate"] = by_coord;
    json qb = json::array();
    for (int i = 0; i < n; ++i) {
      std::vector<double> sorted = samples[ai][static_cast<std::size_t>(i)];
      std::sort(sorted.begin(), sorted.end());
      qb.push_back(quantile_block(std::move(sorted)));
    }
    e["quantiles"] = qb;
    terminal.push_back(e);
  }

  json ks = json::array();
  for (std::size_t ai = 0; ai < A; ++ai)
    for (std::size_t aj = ai + 1; aj < A; ++aj) {
      json e;
      e["initial_i"] = ai;
      e["initial_j"] = aj;
      json by_coord = json::array();
      for (int i = 0; i < n; ++i)
        by_coord.push_back(ks_distance(samples[ai][static_cast<std::size_t>(i)],
                                       samples[aj][static_cast<std::size_t>(i)]));
      e["by_coordinate"] = by_coord;
      ks.push_back(e);
    }

  json out;
  out["terminal_samples"] = terminal;
  out["aggregate"]["ks"] = ks;

  if (cfg.ergodic.enabled) {
    // One long path, W sampled every `spacing` time units after burn-in;
    // the time-average sample is the ergodic proxy for the stationary law.
    const auto egrid = std::make_shared<const TimeGrid>(TimeGrid::uniform(cfg.ergodic.horizon, cfg.step));
    const std::uint64_t eseed = cfg.seed_base + static_cast<std::uint64_t>(cfg.seed_count);
    const VectorPath X = generate(cfg.process, egrid, eseed);
    const ReflectionSolution sol = reflect(X, P, cfg.tol_solver);
    std::vector<std::vector<double>> esample(static_cast<std::size_t>(n));
    for (double t = cfg.ergodic.burn_in; t <= cfg.ergodic.horizon + 1e-12; t += cfg.ergodic.spacing) {
      const std::size_t k = egrid->first_at_or_after(std::min(t, cfg.ergodic.horizon));
      if (k >= sol.W.points()) break;
      for (int i = 0; i < n; ++i) esample[static_cast<std::size_t>(i)].push_back(sol.W.value(k, i));
    }
    json eb;
    eb["seed"] = eseed;
    eb["count"] = esample.front().size();
    json qb = json::array();
    for (int i = 0; i < n; ++i) {
      std::vector<double> sorted = esample[static_cast<std::size_t>(i)];
      std::sort(sorted.begin(), sorted.end());
      qb.push_back(quantile_block(std::move(sorted)));
    }
    eb["quantiles"] = qb;
    json kse = json::array();
    for (std::size_t ai = 0; ai < A; ++ai) {
      json e;
      e["initial"] = ai;
      json by_coord = json::array();
      for (int i = 0; i < n; ++i)
        by_coord.push_back(
            ks_distance(samples[ai][static_cast<std::size_t>(i)], esample[static_cast<std::size_t>(i)]));
      e["by_coordinate"] = by_coord;
      kse.push_back(e);
    }
    eb["ks_vs_initials"] = kse;
    out["aggregate"]["ergodic"] = eb;
  }
  return out;
}

inline json run_conditions(const ExperimentConfig& cfg, GridPtr grid) {
  const RoutingMatrix& P = *cfg.routing;
  const double thr = cfg.threshold();
  const std::size_t S = static_cast<std::size_t>(cfg.seed_count);

  struct Leg {
    std::vector<ConditionVerdict> divergence, sufficient, necessary;
  };
  std::vector<Leg> legs(S);
  for_each_index(S, [&](std::size_t s) {
    const VectorPath X = generate(cfg.process, grid, cfg.seed_base + s);
    const ReflectionSolution sol = reflect(X, P, cfg.tol_solver);
    Leg leg;
    leg.divergence = regulator_divergence(sol.L, thr);
    leg.sufficient = sufficient_condition(X, P, thr);
    leg.necessary = necessary_condition(X, P, thr);
    legs[s] = std::move(leg);
  });

  auto table = [&](const std::vector<ConditionVerdict> Leg::*member) {
    json per_seed = json::array();
    for (std::size_t s = 0; s < S; ++s) {
      json verdicts = json::array();
      for (const auto& v : legs[s].*member) verdicts.push_back(verdict_to_json(v));
      per_seed.push_back(verdicts);
    }
    return per_seed;
  };
  auto counts = [&](const std::vector<ConditionVerdict> Leg::*member) {
    const int n = P.dim();
    json per_coord = json::array();
    for (int i = 0; i < n; ++i) {
      long sat = 0, vio = 0, inc = 0;
      for (const auto& leg : legs) {
        switch ((leg.*member)[static_cast<std::size_t>(i)].verdict) {
          case Verdict::Satisfied: ++sat; break;
          case Verdict::Violated: ++vio; break;
          case Verdict::Inconclusive: ++inc; break;
        }
      }
      per_coord.push_back({{"coordinate", i},
                           {"satisfied", sat},
                           {"violated", vio},
                           {"inconclusive", inc}});
    }
    return per_coord;
  };

  json out;
  out["threshold"] = thr;
  out["per_seed"] = {{"regulator_divergence", table(&Leg::divergence)},
                     {"sufficient", table(&Leg::sufficient)},
                     {"necessary", table(&Leg::necessary)}};
  out["aggregate"] = {{"regulator_divergence", counts(&Leg::divergence)},
                      {"sufficient", counts(&Leg::sufficient)},
                      {"necessary", counts(&Leg::necessary)}};
  return out;
}

}  // namespace detail

/// Runs the configured experiment and returns the report. The report is a
/// pure function of the config: same config, byte-identical JSON.
inline json run_experiment(const ExperimentConfig& cfg) {
  const auto grid = std::make_shared<const TimeGrid>(TimeGrid::uniform(cfg.horizon, cfg.step));
  json body;
  if (cfg.kind == "irrelevance") body = detail::run_irrelevance(cfg, grid);
  else if (cfg.kind == "coupling") body = detail::run_coupling(cfg, grid);
  else if (cfg.kind == "stationary") body = detail::run_stationary(cfg, grid);
  else body = detail::run_conditions(cfg, grid);

  json report;
  report["schema"] = kReportSchema;
  report["kind"] = cfg.kind;
  report["config"] = config_to_json(cfg);
  for (auto it = body.begin(); it != body.end(); ++it) report[it.key()] = std::move(it.value());
  return report;
}

}  // namespace reflect::io
