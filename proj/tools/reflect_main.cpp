#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <reflect/analysis.hpp>
#include <reflect/csv.hpp>
#include <reflect/dynamic.hpp>
#include <reflect/errors.hpp>
#include <reflect/experiment.hpp>
#include <reflect/processes.hpp>
#include <reflect/reflection.hpp>
#include <reflect/routing.hpp>
#include <reflect/serialization.hpp>

namespace {

using reflect::Matrix;
using reflect::Vector;

constexpr int kExitOk = 0;
constexpr int kExitAudit = 1;
constexpr int kExitValidation = 2;
constexpr int kExitConvergence = 3;

struct GlobalFlags {
  double tol = 1e-10;
  std::uint64_t seed = 1;
  std::string out;
  bool quiet = false;
};

/// Matrix files hold either the JSON form {"n", "entries"} or bare CSV rows;
/// the leading non-space character decides.
Matrix read_matrix_file(const std::string& path) {
  const std::string text = reflect::csv::read_file(path);
  for (const char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') continue;
    if (c == '{') return reflect::io::matrix_from_json(reflect::io::json_from_text(text, "matrix"), "matrix");
    break;
  }
  std::istringstream in(text);
  return reflect::csv::read_matrix(in);
}

reflect::VectorPath read_path_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw reflect::ValidationError("cannot open file: " + path);
  return reflect::csv::read_path(in);
}

void write_text_or_stdout(const std::string& out, const std::string& content) {
  if (out.empty()) {
    std::cout << content;
  } else {
    reflect::csv::write_file(out, content);
  }
}

int cmd_solve(const GlobalFlags& g, const std::string& path_file, const std::string& matrix_file,
              const std::string& algorithm) {
  const reflect::VectorPath X = read_path_file(path_file);
  const Matrix P_raw = read_matrix_file(matrix_file);
  if (P_raw.rows() != X.dim())
    throw reflect::ValidationError("solve: matrix dimension does not match path dimension");

  // Nonzero diagonals are folded away by the similarity rescaling; the
  // returned (W, L) satisfy the original equation W = X + (I - P^t) L.
  const bool rescaled = P_raw.diagonal().cwiseAbs().maxCoeff() > 0.0;
  reflect::ReflectionSolution sol{reflect::VectorPath::zero(X.grid_ptr(), X.dim()),
                                  reflect::VectorPath::zero(X.grid_ptr(), X.dim()), 0.0};
  double rho = 0.0;
  if (rescaled) {
    const reflect::DiagonalNormalization norm = reflect::normalize_diagonal(P_raw);
    rho = norm.routing.spectral_radius();
    const Vector inv_scale = norm.scale.cwiseInverse();
    const reflect::VectorPath Xt = reflect::apply_matrix(Matrix(inv_scale.asDiagonal()), X);
    reflect::ReflectionSolution tilde =
        algorithm == "fixedpoint" ? reflect::reflect_fixed_point(Xt, norm.routing, g.tol)
                                  : reflect::reflect(Xt, norm.routing, g.tol);
    sol.W = reflect::apply_matrix(Matrix(norm.scale.asDiagonal()), tilde.W);
    sol.L = reflect::apply_matrix(Matrix(inv_scale.asDiagonal()), tilde.L);
    sol.residual = tilde.residual;
  } else {
    const reflect::RoutingMatrix P(P_raw);
    rho = P.spectral_radius();
    sol = algorithm == "fixedpoint" ? reflect::reflect_fixed_point(X, P, g.tol)
                                    : reflect::reflect(X, P, g.tol);
  }

  std::ostringstream body;
  reflect::csv::write_solution(body, sol.W, sol.L);
  write_text_or_stdout(g.out, body.str());

  if (!g.quiet) {
    std::ostream& info = g.out.empty() ? std::cerr : std::cout;
    info << "solved n=" << X.dim() << " points=" << X.points() << " algorithm=" << algorithm
         << " spectral_radius=" << rho << " residual=" << sol.residual
         << (rescaled ? " (diagonal rescaling applied)" : "") << "\n";
  }
  return kExitOk;
}

int cmd_generate(const GlobalFlags& g, const std::string& spec_file, double horizon, double step,
                 const std::string& routing_file) {
  const reflect::io::json spec_json =
      reflect::io::json_from_text(reflect::csv::read_file(spec_file), "process spec");
  const reflect::ProcessSpec spec = reflect::io::process_from_json(spec_json);
  const auto grid = std::make_shared<const reflect::TimeGrid>(reflect::TimeGrid::uniform(horizon, step));
  const reflect::VectorPath X = reflect::generate(spec, grid, g.seed);

  std::ostringstream body;
  reflect::csv::write_path(body, X);
  write_text_or_stdout(g.out, body.str());

  if (!g.quiet) {
    std::ostream& info = g.out.empty() ? std::cerr : std::cout;
    const auto drift = reflect::mean_drift(spec);
    if (drift) {
      info << "mean_drift=";
      for (Eigen::Index i = 0; i < drift->size(); ++i)
        info << (i ? "," : "") << (*drift)[i];
      info << "\n";
    } else {
      info << "mean_drift=n/a (deterministic fixture)\n";
    }
    if (!routing_file.empty()) {
      const reflect::RoutingMatrix P(read_matrix_file(routing_file));
      if (!drift)
        throw reflect::ValidationError("generate: stability check needs a process with a mean drift");
      const reflect::StabilityReport rep = reflect::stability_check(*drift, P);
      info << "stability=" << (rep.stable ? "stable" : "not-stable") << " margins=";
      for (Eigen::Index i = 0; i < rep.margins.size(); ++i)
        info << (i ? "," : "") << rep.margins[i];
      info << "\n";
    }
  }
  return kExitOk;
}

int cmd_experiment(const GlobalFlags& g, const std::string& config_file) {
  const reflect::io::json cfg_json =
      reflect::io::json_from_text(reflect::csv::read_file(config_file), "experiment config");
  const reflect::io::ExperimentConfig cfg = reflect::io::config_from_json(cfg_json);
  const reflect::io::json report = reflect::io::run_experiment(cfg);
  write_text_or_stdout(g.out, report.dump(2) + "\n");
  if (!g.quiet && !g.out.empty())
    std::cout << "experiment kind=" << cfg.kind << " seeds=" << cfg.seed_count << " -> " << g.out
              << "\n";
  return kExitOk;
}

int cmd_check(const GlobalFlags& g, const std::string& solution_file, const std::string& path_file,
              const std::string& matrix_file) {
  std::ifstream sin(solution_file);
  if (!sin) throw reflect::ValidationError("cannot open file: " + solution_file);
  const reflect::csv::SolutionPaths sol = reflect::csv::read_solution(sin);
  const reflect::VectorPath X = read_path_file(path_file);
  const Matrix P = read_matrix_file(matrix_file);

  const Eigen::Index n = X.dim();
  if (sol.W.dim() != n || P.rows() != n)
    throw reflect::ValidationError("check: dimensions of solution, path and matrix disagree");
  if (!(sol.W.grid() == X.grid()))
    throw reflect::ValidationError("check: solution and path grids differ");
  const Eigen::Index K1 = static_cast<Eigen::Index>(X.points());

  long violations = 0;
  auto report = [&](const char* what, Eigen::Index k, Eigen::Index i, double value) {
    ++violations;
    if (violations <= 50)
      std::cout << "violation " << what << " k=" << k << " i=" << i << " value="
                << reflect::csv::format_double(value) << "\n";
  };

  // Equation W = X + (I - P^t) L, row form W = X + L (I - P). The threshold
  // grows with path length and magnitude to cover honest accumulation of
  // rounding in long solves.
  const reflect::PathMatrix E =
      sol.W.values() - X.values() - sol.L.values() * (Matrix::Identity(n, n) - P);
  const double scale = std::max({1.0, X.values().cwiseAbs().maxCoeff(),
                                 sol.W.values().cwiseAbs().maxCoeff(),
                                 sol.L.values().cwiseAbs().maxCoeff()});
  const double eq_tol = std::max(g.tol, 32.0 * std::numeric_limits<double>::epsilon() *
                                            std::sqrt(static_cast<double>(K1)) * scale);
  double eq_max = 0.0;
  for (Eigen::Index k = 0; k < K1; ++k)
    for (Eigen::Index i = 0; i < n; ++i) {
      const double e = std::abs(E(k, i));
      if (e > eq_max) eq_max = e;
      if (e > eq_tol) report("equation", k, i, E(k, i));
    }

  for (Eigen::Index k = 0; k < K1; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      if (sol.W.values()(k, i) < -g.tol) report("nonnegativity", k, i, sol.W.values()(k, i));

  for (Eigen::Index i = 0; i < n; ++i) {
    if (sol.L.values()(0, i) < -g.tol) report("monotonicity", 0, i, sol.L.values()(0, i));
    for (Eigen::Index k = 1; k < K1; ++k) {
      const double inc = sol.L.values()(k, i) - sol.L.values()(k - 1, i);
      if (inc < -g.tol) report("monotonicity", k, i, inc);
    }
  }

  // Discrete complementarity: L_i may move over a step only if W_i ends the
  // step on the boundary. The boundary band is wider than --tol because the
  // fixed-point algorithm's boundary values carry up to ~10x tol of slack.
  const double comp_tol = 100.0 * g.tol;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (sol.L.values()(0, i) > g.tol && sol.W.values()(0, i) > comp_tol)
      report("complementarity", 0, i, sol.W.values()(0, i));
    for (Eigen::Index k = 1; k < K1; ++k) {
      const double inc = sol.L.values()(k, i) - sol.L.values()(k - 1, i);
      if (inc > g.tol && sol.W.values()(k, i) > comp_tol)
        report("complementarity", k, i, sol.W.values()(k, i));
    }
  }

  if (violations == 0) {
    if (!g.quiet)
      std::cout << "audit passed: equation_residual=" << reflect::csv::format_double(eq_max)
                << " points=" << K1 << " n=" << n << "\n";
    return kExitOk;
  }
  std::cout << "audit FAILED: " << violations << " violation(s)\n";
  return kExitAudit;
}

/// Emits one series from a report as CSV. Handles three shapes: an object of
/// equal-length arrays (columns), an array of numbers (index,value), and an
/// array of flat objects (union of scalar fields as columns).
int cmd_export_series(const GlobalFlags& g, const std::string& report_file,
                      const std::string& pointer) {
  const reflect::io::json report =
      reflect::io::json_from_text(reflect::csv::read_file(report_file), "report");
  reflect::io::json node;
  try {
    node = report.at(nlohmann::json::json_pointer(pointer));
  } catch (const nlohmann::json::exception&) {
    throw reflect::ValidationError("export-series: no node at pointer '" + pointer + "'");
  }

  std::ostringstream out;
  auto cell = [](const reflect::io::json& v) -> std::string {
    if (v.is_number()) return reflect::csv::format_double(v.get<double>());
    if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
    if (v.is_string()) return v.get<std::string>();
    return "";
  };

  if (node.is_object()) {
    std::vector<std::string> keys;
    std::size_t rows = 0;
    for (auto it = node.begin(); it != node.end(); ++it) {
      if (!it.value().is_array()) continue;
      if (keys.empty()) rows = it.value().size();
      if (it.value().size() == rows) keys.push_back(it.key());
    }
    if (keys.empty())
      throw reflect::ValidationError("export-series: object node holds no equal-length arrays");
    for (std::size_t c = 0; c < keys.size(); ++c) out << (c ? "," : "") << keys[c];
    out << "\n";
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < keys.size(); ++c) out << (c ? "," : "") << cell(node[keys[c]][r]);
      out << "\n";
    }
  } else if (node.is_array() && !node.empty() && node.front().is_object()) {
    std::vector<std::string> keys;
    for (auto it = node.front().begin(); it != node.front().end(); ++it)
      if (!it.value().is_structured()) keys.push_back(it.key());
    if (keys.empty()) throw reflect::ValidationError("export-series: objects hold no scalar fields");
    for (std::size_t c = 0; c < keys.size(); ++c) out << (c ? "," : "") << keys[c];
    out << "\n";
    for (const auto& row : node) {
      for (std::size_t c = 0; c < keys.size(); ++c)
        out << (c ? "," : "") << (row.contains(keys[c]) ? cell(row[keys[c]]) : "");
      out << "\n";
    }
  } else if (node.is_array()) {
    out << "index,value\n";
    for (std::size_t r = 0; r < node.size(); ++r) out << r << "," << cell(node[r]) << "\n";
  } else {
    out << "value\n" << cell(node) << "\n";
  }
  write_text_or_stdout(g.out, out.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Orthant reflection toolkit: solve reflected paths, generate inputs, run experiments"};
  app.require_subcommand(1);
  GlobalFlags g;
  app.add_option("--tol", g.tol, "solver / audit tolerance")->capture_default_str();
  app.add_option("--seed", g.seed, "base random seed")->capture_default_str();
  app.add_option("--out", g.out, "output file (default: standard output)");
  app.add_flag("--quiet", g.quiet, "suppress informational output");

  std::string path_file, matrix_file, algorithm = "step", spec_file, routing_file;
  std::string config_file, solution_file, report_file, pointer;
  double horizon = 0.0, step = 0.0;

  CLI::App* solve = app.add_subcommand("solve", "reflect a path CSV against a routing matrix");
  solve->fallthrough();
  solve->add_option("path", path_file, "input path CSV")->required();
  solve->add_option("matrix", matrix_file, "routing matrix (JSON or CSV)")->required();
  solve->add_option("--algorithm", algorithm, "step | fixedpoint")
      ->check(CLI::IsMember({"step", "fixedpoint"}))
      ->capture_default_str();

  CLI::App* gen = app.add_subcommand("generate", "sample an input process to a path CSV");
  gen->fallthrough();
  gen->add_option("spec", spec_file, "process spec JSON")->required();
  gen->add_option("--horizon", horizon, "grid horizon")->required();
  gen->add_option("--step", step, "grid step")->required();
  gen->add_option("--routing", routing_file, "routing matrix for a stability check");

  CLI::App* exp = app.add_subcommand("experiment", "run a configured experiment to a JSON report");
  exp->fallthrough();
  exp->add_option("config", config_file, "experiment config JSON")->required();

  CLI::App* check = app.add_subcommand("check", "audit a solution CSV against its path and matrix");
  check->fallthrough();
  check->add_option("solution", solution_file, "solution CSV")->required();
  check->add_option("path", path_file, "input path CSV")->required();
  check->add_option("matrix", matrix_file, "routing matrix (JSON or CSV)")->required();

  CLI::App* exs = app.add_subcommand("export-series", "emit a report series as CSV");
  exs->fallthrough();
  exs->add_option("report", report_file, "experiment report JSON")->required();
  exs->add_option("pointer", pointer, "JSON pointer to the series node")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (solve->parsed()) return cmd_solve(g, path_file, matrix_file, algorithm);
    if (gen->parsed()) return cmd_generate(g, spec_file, horizon, step, routing_file);
    if (exp->parsed()) return cmd_experiment(g, config_file);
    if (check->parsed()) return cmd_check(g, solution_file, path_file, matrix_file);
    if (exs->parsed()) return cmd_export_series(g, report_file, pointer);
  } catch (const reflect::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
