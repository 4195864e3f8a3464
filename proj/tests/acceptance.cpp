// Acceptance driver: each criterion prints one PASS/FAIL line; the process
// exits 0 only when every requested criterion passes. Run with a list of
// criterion numbers (default: all) and --cli <path> for the tool checks.

#include <reflect/analysis.hpp>
#include <reflect/csv.hpp>
#include <reflect/dynamic.hpp>
#include <reflect/errors.hpp>
#include <reflect/experiment.hpp>
#include <reflect/processes.hpp>
#include <reflect/reflection.hpp>
#include <reflect/routing.hpp>
#include <reflect/serialization.hpp>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"

namespace {

using reflect::Matrix;
using reflect::PathMatrix;
using reflect::ProcessSpec;
using reflect::RoutingMatrix;
using reflect::Vector;
using reflect::VectorPath;
using reflect::Verdict;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

constexpr std::uint64_t kInstanceSeeds = 500;
const support::InstanceOptions kInstanceOptions{
    .max_dim = 5, .min_steps = 3, .max_steps = 10000, .max_radius = 0.9, .negative_start = true};

// 1: the per-step solver and the whole-path fixed-point solver agree to 1e-8
// on 500 random instances.
Outcome solvers_agree() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= kInstanceSeeds; ++seed) {
    const auto inst = support::random_instance(seed, kInstanceOptions);
    const auto a = reflect::reflect(inst.X, inst.P, 1e-12);
    const auto b = reflect::reflect_fixed_point(inst.X, inst.P, 1e-12);
    worst = std::max(worst, support::sup_diff(a.W.values(), b.W.values()));
    worst = std::max(worst, support::sup_diff(a.L.values(), b.L.values()));
  }
  return {worst <= 1e-8,
          "two solvers within " + fmt(worst) + " across " + std::to_string(kInstanceSeeds) +
              " instances (allowed 1e-8)"};
}

// 2: head-start comparison facts on the same instances, three starts each.
Outcome head_start_order() {
  double worst = 0.0;
  long legs = 0;
  for (std::uint64_t seed = 1; seed <= kInstanceSeeds; ++seed) {
    const auto inst = support::random_instance(seed, kInstanceOptions);
    const int n = inst.X.dim();
    const int picks[3] = {0, 1 + static_cast<int>(seed % static_cast<std::uint64_t>(n)), n + 1};
    for (const int pick : picks) {
      const Vector a = support::shift_vector(n, pick, seed);
      const auto rep = reflect::difference_diagnostics(inst.X, a, inst.P, 1e-12);
      worst = std::max({worst, -rep.min_difference, rep.max_transformed_increase,
                        rep.regulator_lower_violation, rep.regulator_upper_violation});
      ++legs;
    }
  }
  return {worst <= 1e-9, "difference order and regulator sandwich violated by at most " +
                             fmt(worst) + " over " + std::to_string(legs) + " runs (allowed 1e-9)"};
}

// 3: closed-form regulator bounds max(M, N) <= L <= R^{-1} M at every point.
Outcome regulator_bounds_hold() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= kInstanceSeeds; ++seed) {
    const auto inst = support::random_instance(seed, kInstanceOptions);
    const auto sol = reflect::reflect(inst.X, inst.P, 1e-12);
    const auto b = reflect::regulator_bounds(inst.X, inst.P);
    const PathMatrix lower = b.M.values().cwiseMax(b.N.values());
    worst = std::max(worst, (lower - sol.L.values()).maxCoeff());
    worst = std::max(worst, (sol.L.values() - b.upper.values()).maxCoeff());
  }
  return {worst <= 1e-9,
          "regulator bracketed within " + fmt(worst) + " on every grid point (allowed 1e-9)"};
}

// 4: the deterministic ramp pins the head-start difference exactly.
Outcome ramp_closed_form() {
  const auto grid = support::uniform_grid(200, 0.01);  // horizon 2
  const VectorPath X = reflect::fixture("ramp", grid);
  const RoutingMatrix P(Matrix::Zero(1, 1));
  const auto W0 = reflect::reflect(X, P, 1e-12);

  Vector big(1), small(1);
  big << 2.0;
  small << 0.5;
  const auto Wb = reflect::reflect(reflect::shift(big, X), P, 1e-12);
  const double terminal = Wb.W.value(200, 0) - W0.W.value(200, 0);
  const auto big_couple = reflect::coupling_time(Wb.W, W0.W, 1e-9);
  const auto Ws = reflect::reflect(reflect::shift(small, X), P, 1e-12);
  const auto small_couple = reflect::coupling_time(Ws.W, W0.W, 1e-9);

  const bool pass = std::abs(terminal - 1.0) <= 1e-12 && !big_couple.coupled &&
                    small_couple.coupled && std::abs(small_couple.time - 0.5) <= 0.01 + 1e-12;
  return {pass, "head start 2 keeps difference " + fmt(terminal) +
                    " uncoupled; head start 0.5 couples at t=" +
                    (small_couple.coupled ? fmt(small_couple.time) : std::string("never"))};
}

// 5: two-coordinate cascade fixture: the second coordinate never needs its
// own reflection yet its regulator eventually exceeds the first one's.
Outcome cascade_fixture() {
  const std::size_t steps = 25133;  // horizon just past 8 pi at step 1e-3
  const auto grid = support::uniform_grid(steps, 1e-3);
  const VectorPath X = reflect::fixture("sine_pair", grid);
  Matrix Pm = Matrix::Zero(2, 2);
  Pm(0, 1) = 1.0;
  const RoutingMatrix P(Pm);

  const auto bounds = reflect::regulator_bounds(X, P);
  const bool raw_zero = bounds.M.values().col(1).cwiseAbs().maxCoeff() == 0.0 &&
                        bounds.N.values().col(1).cwiseAbs().maxCoeff() == 0.0;

  const auto sol = reflect::reflect(X, P, 1e-12);
  const std::size_t k6pi = grid->first_at_or_after(6.0 * M_PI);
  const double l1_6pi = sol.L.value(k6pi, 0);
  const double l2_end = sol.L.value(steps, 1);

  const auto div = reflect::regulator_divergence(sol.L, 1.0);
  const auto suff = reflect::sufficient_condition(X, P, 1.0);

  const bool pass = raw_zero && l1_6pi > 0.0 && l2_end >= l1_6pi - 1e-6 &&
                    div[0].verdict == Verdict::Satisfied && div[1].verdict == Verdict::Satisfied &&
                    suff[0].verdict == Verdict::Satisfied && suff[1].verdict != Verdict::Satisfied;
  return {pass, "drop bounds 0: " + std::string(raw_zero ? "yes" : "NO") +
                    ", L2(end)=" + fmt(l2_end) + " >= L1(6pi)=" + fmt(l1_6pi) +
                    ", divergence satisfied both, dip test satisfied only first"};
}

// 6: three driftless coordinates forget a unit head start on long horizons.
Outcome brownian_washout() {
  const reflect::BrownianSpec spec{Vector::Zero(3), Matrix::Identity(3, 3)};
  const auto grid = support::uniform_grid(1000000, 0.01);  // horizon 1e4
  const RoutingMatrix P(Matrix::Zero(3, 3));
  const Vector a = Vector::Ones(3);

  int decayed = 0;
  double worst_increase = 0.0;
  const int seeds = 100;
  for (int s = 0; s < seeds; ++s) {
    const VectorPath X = reflect::generate(ProcessSpec(spec), grid, 500 + static_cast<std::uint64_t>(s));
    const auto rep = reflect::difference_diagnostics(X, a, P, 1e-10);
    if (rep.terminal_inf <= 0.05 * rep.initial_inf) ++decayed;
    worst_increase = std::max(worst_increase, rep.max_transformed_increase);
  }
  const bool pass = decayed >= 95 && worst_increase <= 1e-9;
  return {pass, std::to_string(decayed) + "/100 seeds decayed below 5%, transformed difference "
                                          "rose at most " +
                    fmt(worst_increase)};
}

// 7: zero-mean claim surplus at the critical premium couples, and more often
// on longer horizons.
Outcome renewal_coupling() {
  reflect::RenewalRiskSpec spec;
  spec.premium = Vector::Constant(2, 0.5);
  spec.interarrival = {reflect::Distribution::exponential(1.0),
                       reflect::Distribution::exponential(1.0)};
  spec.claim = {reflect::Distribution::exponential(2.0), reflect::Distribution::exponential(2.0)};
  const RoutingMatrix P(Matrix::Zero(2, 2));
  Vector a = Vector::Ones(2);

  auto coupled_at = [&](std::uint64_t seed, std::size_t steps) {
    const auto grid = support::uniform_grid(steps, 0.05);
    const VectorPath X = reflect::generate(ProcessSpec(spec), grid, seed);
    const auto base = reflect::reflect(X, P, 1e-10);
    const auto shifted = reflect::reflect(reflect::shift(a, X), P, 1e-10);
    return reflect::coupling_time(shifted.W, base.W, 1e-6).coupled;
  };

  int hits = 0, sub_short = 0, sub_long = 0;
  const int seeds = 200, sub = 50;
  for (int s = 0; s < seeds; ++s) {
    const bool c = coupled_at(1000 + static_cast<std::uint64_t>(s), 2000000);  // horizon 1e5
    if (c) ++hits;
    if (s < sub && c) ++sub_short;
  }
  for (int s = 0; s < sub; ++s)
    if (coupled_at(1000 + static_cast<std::uint64_t>(s), 4000000)) ++sub_long;  // horizon 2e5

  const double frac = static_cast<double>(hits) / seeds;
  const bool pass = frac >= 0.90 && sub_long >= sub_short;
  return {pass, "coupled fraction " + fmt(frac) + " at horizon 1e5; subsample " +
                    std::to_string(sub_short) + "/50 -> " + std::to_string(sub_long) +
                    "/50 when the horizon doubles"};
}

// 8: the reflected workload's terminal law forgets its start and matches the
// single-path time average.
Outcome stationary_ks() {
  const reflect::BrownianSpec spec{Vector::Constant(1, -1.0), Matrix::Identity(1, 1)};
  const RoutingMatrix P(Matrix::Zero(1, 1));
  Vector a5 = Vector::Constant(1, 5.0);

  // Disjoint seed ranges: identical seeds would couple pathwise and compare
  // the samples bitwise, which tests nothing about the laws.
  const auto grid = support::uniform_grid(2000, 0.05);  // horizon 100
  const int seeds = 10000;
  std::vector<double> s0(seeds), s5(seeds);
  for (int s = 0; s < seeds; ++s) {
    const VectorPath X0 = reflect::generate(ProcessSpec(spec), grid, 2000 + static_cast<std::uint64_t>(s));
    const VectorPath X5 = reflect::generate(ProcessSpec(spec), grid, 20000 + static_cast<std::uint64_t>(s));
    s0[static_cast<std::size_t>(s)] = reflect::reflect(X0, P, 1e-10).W.value(2000, 0);
    s5[static_cast<std::size_t>(s)] =
        reflect::reflect(reflect::shift(a5, X5), P, 1e-10).W.value(2000, 0);
  }
  const double ks_pair = reflect::ks_distance(s0, s5);

  // One long run, sampled every time unit after a burn-in matching the
  // terminal-sample horizon.
  const auto egrid = support::uniform_grid(20000000, 0.05);  // horizon 1e6
  const VectorPath Xe = reflect::generate(ProcessSpec(spec), egrid, 1999);
  const auto esol = reflect::reflect(Xe, P, 1e-10);
  std::vector<double> eavg;
  eavg.reserve((20000000 - 2000) / 20 + 1);
  for (std::size_t k = 2000; k <= 20000000; k += 20) eavg.push_back(esol.W.value(k, 0));
  const double ks_erg = reflect::ks_distance(s0, eavg);

  const bool pass = ks_pair <= 0.02 && ks_erg <= 0.03;
  return {pass, "terminal laws: start 0 vs 5 KS=" + fmt(ks_pair) +
                    " (allowed 0.02), vs time average KS=" + fmt(ks_erg) + " (allowed 0.03)"};
}

// 9: two-state modulated input: long-run slope, stability verdict, and
// head-start decay all line up with the stationary mean drift -0.75.
Outcome modulated_slope() {
  reflect::MapSpec spec;
  spec.Q = Matrix(2, 2);
  spec.Q << -1.0, 1.0, 1.0, -1.0;
  reflect::MapState s0, s1;
  s0.drift = Vector::Constant(1, 1.0);
  s1.drift = Vector::Constant(1, -3.0);
  spec.states = {s0, s1};
  reflect::TransitionJump tj;
  tj.from = 0;
  tj.to = 1;
  tj.jump = {reflect::Distribution::deterministic(0.5)};
  spec.transition_jumps = {tj};

  const auto drift = reflect::mean_drift(ProcessSpec(spec));
  const RoutingMatrix P(Matrix::Zero(1, 1));
  const auto stab = reflect::stability_check(*drift, P);
  const bool drift_ok = std::abs((*drift)[0] + 0.75) <= 1e-12 && stab.stable;

  const auto grid = support::uniform_grid(2000000, 0.05);  // horizon 1e5
  const double T = grid->horizon();
  Vector a = Vector::Constant(1, 2.0);
  const int seeds = 100;
  std::vector<double> slopes(seeds);
  int decayed = 0;
  for (int s = 0; s < seeds; ++s) {
    const VectorPath X = reflect::generate(ProcessSpec(spec), grid, 3000 + static_cast<std::uint64_t>(s));
    slopes[static_cast<std::size_t>(s)] = X.value(X.points() - 1, 0) / T;
    const auto base = reflect::reflect(X, P, 1e-10);
    const auto shifted = reflect::reflect(reflect::shift(a, X), P, 1e-10);
    const double term =
        (shifted.W.values().row(2000000) - base.W.values().row(2000000)).cwiseAbs().maxCoeff();
    if (term < 0.05) ++decayed;
  }
  double mean = 0.0;
  for (const double v : slopes) mean += v;
  mean /= seeds;
  double var = 0.0;
  for (const double v : slopes) var += (v - mean) * (v - mean);
  var /= (seeds - 1);
  const double se = std::sqrt(var / seeds);
  const bool slope_ok = std::abs(mean + 0.75) <= 3.0 * se;

  const bool pass = drift_ok && slope_ok && decayed >= 95;
  return {pass, "mean slope " + fmt(mean) + " within 3 SE (" + fmt(3.0 * se) +
                    ") of -0.75, stable verdict, " + std::to_string(decayed) +
                    "/100 seeds shed the head start"};
}

double sat(double x) { return x / (1.0 + x); }

// 10: the state-dependent solver: exact agreement in the constant case, the
// transformed-difference monotone fact for time-only coefficients, the
// envelope floor for the regulator, and cascade truncation.
Outcome dynamic_suite() {
  // Constant coefficients replay the static solver's arithmetic bit for bit.
  for (std::uint64_t seed = 9000; seed < 9060; ++seed) {
    const auto inst = support::random_instance(seed, {.max_dim = 4, .max_steps = 400});
    const auto coeffs = reflect::DynamicCoefficients::make_constant(inst.P);
    const auto dyn = reflect::reflect_dynamic(inst.X, coeffs, Vector::Zero(inst.X.dim()));
    const auto fix = reflect::reflect(inst.X, inst.P);
    const std::size_t bytes = sizeof(double) * static_cast<std::size_t>(dyn.W.values().size());
    if (std::memcmp(dyn.W.values().data(), fix.W.values().data(), bytes) != 0 ||
        std::memcmp(dyn.L.values().data(), fix.L.values().data(), bytes) != 0 ||
        dyn.residual != fix.residual)
      return {false, "constant coefficients diverged from the static solver on seed " +
                         std::to_string(seed)};
  }

  // Time-only coefficients: (I - bound^t)^{-1} [W^a - W^0] never increases.
  double worst_inc = 0.0;
  for (std::uint64_t seed = 9100; seed < 9200; ++seed) {
    const auto inst = support::random_instance(seed, {.max_dim = 4, .max_steps = 300});
    const int n = inst.X.dim();
    const Matrix base = inst.P.entries();
    Vector b0(n);
    for (int i = 0; i < n; ++i) b0[i] = ((seed + static_cast<std::uint64_t>(i)) % 3 == 0) ? -0.4 : 0.2;
    reflect::DynamicCoefficients c;
    c.n = n;
    c.Pi = base;
    c.time_only = c.l_independent = true;
    c.b = [b0](double t, const Vector&, const Vector&) {
      return Vector(b0 * (1.0 + 0.5 * std::sin(t)));
    };
    c.P = [base](double t, const Vector&, const Vector&) {
      return Matrix(base * (0.5 + 0.5 * std::abs(std::sin(3.0 * t))));
    };
    const Vector a = support::shift_vector(n, n + 1, seed);
    const auto Wa = reflect::reflect_dynamic(inst.X, c, a, 1e-11);
    const auto W0 = reflect::reflect_dynamic(inst.X, c, Vector::Zero(n), 1e-11);
    const Matrix transform = reflect::neumann_inverse(RoutingMatrix(base));
    worst_inc = std::max(
        worst_inc,
        support::max_increase((Wa.W.values() - W0.W.values()) * transform.transpose()));
  }
  if (worst_inc > 1e-9)
    return {false, "time-only transformed difference increased by " + fmt(worst_inc)};

  // Envelope floor: L_i(t) >= -a_i - X_i(t) - integral of beta_i.
  double worst_floor = 0.0;
  for (std::uint64_t seed = 9200; seed < 9300; ++seed) {
    const auto inst = support::random_instance(seed, {.max_dim = 3, .max_steps = 250});
    const int n = inst.X.dim();
    Vector b0(n);
    for (int i = 0; i < n; ++i) b0[i] = -0.3 * (i + 1);
    reflect::DynamicCoefficients c;
    c.n = n;
    c.Pi = inst.P.entries();
    c.P = [M = inst.P.entries()](double, const Vector&, const Vector&) { return M; };
    c.b = [b0](double, const Vector& l, const Vector& w) {
      Vector v = b0;
      for (Eigen::Index i = 0; i < v.size(); ++i) v[i] += -0.4 * sat(l[i]) + 0.3 * sat(w[i]);
      return v;
    };
    const Vector beta = b0.array() + 0.3;
    const Vector a = support::shift_vector(n, n + 1, seed);
    const auto sol = reflect::reflect_dynamic(inst.X, c, a, 1e-11);
    Vector quad = Vector::Zero(n);
    for (std::size_t k = 0; k < inst.X.points(); ++k) {
      if (k > 0) quad += beta * inst.X.grid().step(k - 1);
      for (int i = 0; i < n; ++i)
        worst_floor = std::max(
            worst_floor, -a[i] - inst.X.value(k, i) - quad[i] - sol.L.value(k, i));
    }
  }
  if (worst_floor > 1e-9)
    return {false, "regulator fell below its envelope floor by " + fmt(worst_floor)};

  // Cascade truncation: the leading block solved alone matches the full run.
  double worst_trunc = 0.0;
  for (std::uint64_t seed = 9300; seed < 9400; ++seed) {
    const auto inst = support::random_instance(seed, {.max_dim = 4, .max_steps = 250});
    const int n = inst.X.dim();
    Matrix bound = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) bound(i, j) = 0.3 / (j - i);
    reflect::DynamicCoefficients c;
    c.n = n;
    c.Pi = bound;
    c.feedforward = true;
    c.P = [bound, n](double, const Vector& l, const Vector&) {
      Matrix out = Matrix::Zero(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) out(i, j) = bound(i, j) * (0.5 + 0.5 * sat(l[j - 1]));
      return out;
    };
    c.b = [n](double, const Vector& l, const Vector& w) {
      Vector out(n);
      for (int i = 0; i < n; ++i) out[i] = -0.2 - 0.3 * sat(l[i]) + 0.2 * sat(w[i]);
      return out;
    };
    const Vector a = support::shift_vector(n, n + 1, seed);
    const auto full = reflect::reflect_dynamic(inst.X, c, a, 1e-11);
    for (const int k : {1, n}) {
      const auto sub = reflect::feedforward_subproblem(inst.X, c, k);
      const auto part = reflect::reflect_dynamic(sub.X, sub.coeffs, a.head(k), 1e-11);
      worst_trunc = std::max(worst_trunc,
                             support::sup_diff(part.W.values(), full.W.values().leftCols(k)));
      worst_trunc = std::max(worst_trunc,
                             support::sup_diff(part.L.values(), full.L.values().leftCols(k)));
    }
  }
  if (worst_trunc > 1e-9)
    return {false, "cascade truncation differed from the full solve by " + fmt(worst_trunc)};

  return {true, "constant case bitwise, monotone transform <= " + fmt(worst_inc) +
                    ", envelope floor <= " + fmt(worst_floor) + ", truncation <= " +
                    fmt(worst_trunc)};
}

int run_cmd(const std::string& cmd) {
  const int st = std::system(cmd.c_str());
  if (st == -1) return -1;
  if (WIFEXITED(st)) return WEXITSTATUS(st);
  return -2;
}

bool file_contains(const std::string& path, const std::string& needle) {
  const std::string text = reflect::csv::read_file(path);
  return text.find(needle) != std::string::npos;
}

// 11: the command-line tool round trips its own solutions and pinpoints
// planted corruption by kind and index.
Outcome cli_round_trip(const std::string& cli) {
  if (cli.empty()) return {false, "pass --cli <path-to-tool>"};
  char tmpl[] = "/tmp/reflect-acceptance-XXXXXX";
  if (!mkdtemp(tmpl)) return {false, "cannot create a temporary directory"};
  const std::string dir(tmpl);
  const std::string q = "\"" + cli + "\"";

  // A two-coordinate drifting instance with plenty of pushing.
  Matrix Pm = Matrix::Zero(2, 2);
  Pm(0, 1) = 0.5;
  Vector mu(2);
  mu << -1.0, -0.8;
  const reflect::BrownianSpec bspec{mu, Matrix::Identity(2, 2)};
  const auto grid = support::uniform_grid(400, 0.05);
  const VectorPath X = reflect::generate(ProcessSpec(bspec), grid, 77);
  {
    std::ostringstream body;
    reflect::csv::write_path(body, X);
    reflect::csv::write_file(dir + "/path.csv", body.str());
    reflect::csv::write_file(dir + "/P.json", reflect::io::matrix_to_json(Pm).dump());
    reflect::csv::write_file(dir + "/spec.json",
                             reflect::io::process_to_json(ProcessSpec(bspec)).dump());
  }

  auto fail = [&](const std::string& why) { return Outcome{false, why + " (dir " + dir + ")"}; };

  if (run_cmd(q + " --quiet solve " + dir + "/path.csv " + dir + "/P.json --out " + dir +
              "/sol.csv") != 0)
    return fail("solve exited nonzero");
  if (run_cmd(q + " --quiet check " + dir + "/sol.csv " + dir + "/path.csv " + dir +
              "/P.json > " + dir + "/check0.txt") != 0)
    return fail("check rejected a fresh solution");
  if (run_cmd(q + " --quiet solve " + dir + "/path.csv " + dir + "/P.json --algorithm fixedpoint"
              " --out " + dir + "/sol_fp.csv") != 0)
    return fail("fixed-point solve exited nonzero");
  if (run_cmd(q + " --quiet check " + dir + "/sol_fp.csv " + dir + "/path.csv " + dir +
              "/P.json > /dev/null") != 0)
    return fail("check rejected the fixed-point solution");

  // Generated input, solved and checked through the tool alone.
  if (run_cmd(q + " --quiet --seed 9 generate " + dir + "/spec.json --horizon 20 --step 0.05"
              " --out " + dir + "/gen.csv") != 0)
    return fail("generate exited nonzero");
  if (run_cmd(q + " --quiet solve " + dir + "/gen.csv " + dir + "/P.json --out " + dir +
              "/gsol.csv") != 0)
    return fail("solve of a generated path exited nonzero");
  if (run_cmd(q + " --quiet check " + dir + "/gsol.csv " + dir + "/gen.csv " + dir +
              "/P.json > /dev/null") != 0)
    return fail("check rejected the generated round trip");

  // Planted corruptions must be flagged with the right kind and location.
  std::ifstream sol_in(dir + "/sol.csv");
  const auto sol = reflect::csv::read_solution(sol_in);
  auto write_sol = [&](const PathMatrix& W, const PathMatrix& L, const std::string& name) {
    std::ostringstream body;
    reflect::csv::write_solution(body, VectorPath(X.grid_ptr(), PathMatrix(W)),
                                 VectorPath(X.grid_ptr(), PathMatrix(L)));
    reflect::csv::write_file(dir + "/" + name, body.str());
  };

  {
    PathMatrix W = sol.W.values();
    W(5, 1) += 0.5;
    write_sol(W, sol.L.values(), "bad_eq.csv");
    if (run_cmd(q + " --quiet check " + dir + "/bad_eq.csv " + dir + "/path.csv " + dir +
                "/P.json > " + dir + "/eq.txt") != 1)
      return fail("equation corruption not rejected with exit 1");
    if (!file_contains(dir + "/eq.txt", "violation equation k=5 i=1"))
      return fail("equation violation not reported at k=5 i=1");
  }
  {
    PathMatrix W = sol.W.values();
    W(3, 0) = -1e-3;
    write_sol(W, sol.L.values(), "bad_neg.csv");
    if (run_cmd(q + " --quiet check " + dir + "/bad_neg.csv " + dir + "/path.csv " + dir +
                "/P.json > " + dir + "/neg.txt") != 1)
      return fail("negative workload not rejected with exit 1");
    if (!file_contains(dir + "/neg.txt", "violation nonnegativity k=3 i=0"))
      return fail("nonnegativity violation not reported at k=3 i=0");
  }
  {
    PathMatrix L = sol.L.values();
    L(7, 0) -= 1e-3;
    write_sol(sol.W.values(), L, "bad_mono.csv");
    if (run_cmd(q + " --quiet check " + dir + "/bad_mono.csv " + dir + "/path.csv " + dir +
                "/P.json > " + dir + "/mono.txt") != 1)
      return fail("regulator decrease not rejected with exit 1");
    if (!file_contains(dir + "/mono.txt", "violation monotonicity k=7 i=0"))
      return fail("monotonicity violation not reported at k=7 i=0");
  }
  {
    // Lift W and X together after the first pushing step: the equation still
    // holds but the push now happens off the boundary.
    Eigen::Index kstar = -1;
    for (Eigen::Index k = 1; k < static_cast<Eigen::Index>(sol.L.points()); ++k)
      if (sol.L.values()(k, 0) - sol.L.values()(k - 1, 0) > 1e-6) {
        kstar = k;
        break;
      }
    if (kstar < 0) return fail("instance never pushed coordinate 1");
    PathMatrix W = sol.W.values();
    PathMatrix Xv = X.values();
    for (Eigen::Index k = kstar; k < W.rows(); ++k) {
      W(k, 0) += 1.0;
      Xv(k, 0) += 1.0;
    }
    write_sol(W, sol.L.values(), "bad_comp.csv");
    std::ostringstream body;
    reflect::csv::write_path(body, VectorPath(X.grid_ptr(), std::move(Xv)));
    reflect::csv::write_file(dir + "/path_comp.csv", body.str());
    if (run_cmd(q + " --quiet check " + dir + "/bad_comp.csv " + dir + "/path_comp.csv " + dir +
                "/P.json > " + dir + "/comp.txt") != 1)
      return fail("off-boundary pushing not rejected with exit 1");
    std::ostringstream needle;
    needle << "violation complementarity k=" << kstar << " i=0";
    if (!file_contains(dir + "/comp.txt", needle.str()))
      return fail("complementarity violation not reported at k=" + std::to_string(kstar) +
                  " i=0");
  }
  {
    reflect::csv::write_file(dir + "/tiny.csv", "0\n");
    if (run_cmd(q + " --quiet check " + dir + "/sol.csv " + dir + "/path.csv " + dir +
                "/tiny.csv > /dev/null 2>&1") != 2)
      return fail("dimension mismatch did not exit with the validation code");
  }

  return {true, "solve/check round trips clean; four corruption kinds pinpointed; bad input "
                "exits with the validation code"};
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  std::string cli;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) {
      cli = argv[++i];
    } else {
      const int n = std::atoi(arg.c_str());
      if (n < 1 || n > 11) {
        std::cerr << "usage: acceptance [criterion-numbers] [--cli <tool>]\n";
        return 2;
      }
      wanted.push_back(n);
    }
  }
  if (wanted.empty())
    for (int n = 1; n <= 11; ++n) wanted.push_back(n);

  const std::function<Outcome()> criteria[11] = {
      solvers_agree,
      head_start_order,
      regulator_bounds_hold,
      ramp_closed_form,
      cascade_fixture,
      brownian_washout,
      renewal_coupling,
      stationary_ks,
      modulated_slope,
      dynamic_suite,
      [&cli] { return cli_round_trip(cli); },
  };

  bool all = true;
  for (const int n : wanted) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[n - 1]();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (out.pass ? "PASS" : "FAIL") << " criterion " << n << ": " << out.detail << " ["
              << fmt(secs) << " s]\n";
    std::cout.flush();
    all = all && out.pass;
  }
  return all ? 0 : 1;
}
