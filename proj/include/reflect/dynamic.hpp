#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <reflect/analysis.hpp>
#include <reflect/errors.hpp>
#include <reflect/path.hpp>
#include <reflect/processes.hpp>
#include <reflect/reflection.hpp>
#include <reflect/rng.hpp>
#include <reflect/routing.hpp>

namespace reflect {

/// State- and time-dependent problem data for
///   W(t) = a + X(t) + int_0^t b(s, L(s), W(s)) ds + int_0^t R(s, L(s), W(s)) dL(s)
/// with R(t,l,w) = I - P(t,l,w)^t. `Pi` bounds P entrywise at every
/// evaluation point and must itself have spectral radius < 1; that bound is
/// enforced each time P is evaluated.
///
/// Flags describe structure the caller asserts (and validate_assumptions
/// probes by sampling): `time_only` (no (l,w) dependence), `l_independent`
/// (no l dependence), `feedforward` (P strictly upper triangular and entry
/// (j,i) of P plus b_i depend only on coordinates <= i of (l,w)).
struct DynamicCoefficients {
  using DriftFn = std::function<Vector(double, const Vector&, const Vector&)>;
  using RoutingFn = std::function<Matrix(double, const Vector&, const Vector&)>;

  int n = 0;
  DriftFn b;      // null means identically zero
  RoutingFn P;    // null means identically constant_P
  Matrix Pi;      // entrywise bound, rho(Pi) < 1
  double lipschitz = 0.0;
  bool time_only = false;
  bool l_independent = false;
  bool feedforward = false;

  // Set by the `constant` factory; lets solvers skip re-evaluation.
  bool constant = false;
  Matrix constant_P;
  Vector constant_b;

  static DynamicCoefficients make_constant(const RoutingMatrix& P0, Vector b0 = Vector()) {
    DynamicCoefficients c;
    c.n = P0.dim();
    if (b0.size() == 0) b0 = Vector::Zero(c.n);
    if (b0.size() != c.n) throw ValidationError("DynamicCoefficients: drift dimension mismatch");
    c.Pi = P0.entries();
    c.constant = true;
    c.constant_P = P0.entries();
    c.constant_b = std::move(b0);
    c.time_only = c.l_independent = true;
    c.feedforward = [&] {
      for (int i = 0; i < c.n; ++i)
        for (int j = 0; j <= i; ++j)
          if (c.constant_P(i, j) != 0.0) return false;
      return true;
    }();
    return c;
  }

  Vector eval_b(double t, const Vector& l, const Vector& w) const {
    if (constant || !b) return constant ? constant_b : Vector::Zero(n);
    return b(t, l, w);
  }
  Matrix eval_P(double t, const Vector& l, const Vector& w) const {
    if (constant || !P) return constant_P;
    return P(t, l, w);
  }
};

inline void validate_shape(const DynamicCoefficients& c) {
  if (c.n < 1) throw ValidationError("DynamicCoefficients: dimension must be >= 1");
  if (c.Pi.rows() != c.n || c.Pi.cols() != c.n)
    throw ValidationError("DynamicCoefficients: Pi must be n x n");
  RoutingMatrix check(c.Pi);  // nonnegative, finite, rho < 1
  if (!c.constant && !c.P) throw ValidationError("DynamicCoefficients: routing callable missing");
  if (c.constant && (c.constant_P.rows() != c.n || c.constant_b.size() != c.n))
    throw ValidationError("DynamicCoefficients: constant data malformed");
  (void)check;
}

/// Reflected solution of the dynamic problem plus per-step freeze
/// indicators: the largest change of the frozen b and P between consecutive
/// steps (small values certify that freezing coefficients over each step was
/// harmless).
struct DynamicSolution {
  VectorPath W;
  VectorPath L;
  double residual = 0.0;
  double coeff_drift_b = 0.0;
  double coeff_drift_P = 0.0;
};

namespace detail {

inline void check_pi_bound(const Matrix& Pk, const Matrix& Pi, double t, double tol) {
  for (Eigen::Index i = 0; i < Pk.rows(); ++i) {
    for (Eigen::Index j = 0; j < Pk.cols(); ++j) {
      const double v = Pk(i, j);
      if (!std::isfinite(v) || v < -tol || v > Pi(i, j) + tol) {
        std::ostringstream os;
        os << "dynamic routing evaluation at t = " << t << " leaves [0, Pi] at entry (" << i
           << "," << j << "): " << v << " vs bound " << Pi(i, j);
        throw ModelError(os.str());
      }
    }
  }
  for (Eigen::Index i = 0; i < Pk.rows(); ++i)
    if (std::abs(Pk(i, i)) > tol) {
      std::ostringstream os;
      os << "dynamic routing evaluation at t = " << t << " has nonzero diagonal entry " << Pk(i, i);
      throw ModelError(os.str());
    }
}

}  // namespace detail

/// Explicit stepping scheme: over [t_k, t_{k+1}] the coefficients are frozen
/// at the solved left-endpoint state (t_k, L(t_k), W(t_k)), the drift is
/// folded into the increment (dX + b_k dt) and one least-element
/// complementarity step with matrix R_k = I - P_k^t advances the solution.
/// With constant coefficients this reproduces `reflect` exactly (same
/// complementarity iteration, same arithmetic).
inline DynamicSolution reflect_dynamic(const VectorPath& X, const DynamicCoefficients& coeffs,
                                       const Vector& a, double tol = 1e-10) {
  validate_shape(coeffs);
  if (coeffs.n != X.dim()) throw ValidationError("reflect_dynamic: dimension mismatch");
  if (a.size() != X.dim()) throw ValidationError("reflect_dynamic: initial vector dimension mismatch");
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (!std::isfinite(a[i]) || a[i] < 0.0)
      throw ValidationError("reflect_dynamic: initial vector must be nonnegative and finite");
  if (!(tol > 0.0) || !std::isfinite(tol)) throw ValidationError("reflect_dynamic: tol must be positive");

  const Eigen::Index n = X.dim();
  const std::size_t K1 = X.points();
  const double rho_cap = spectral_radius(coeffs.Pi);
  const double stop_tol = tol * (1.0 - rho_cap);
  const long max_iter = detail::lcp_iteration_cap(tol, rho_cap);
  const double val_tol = 1e-12;
  // With a = 0 or b = 0 the corresponding terms are omitted from the q
  // expressions entirely, so constant coefficients reproduce `reflect`
  // bit for bit.
  const bool zero_a = a.isZero(0.0);
  const bool zero_const_b = coeffs.constant && coeffs.constant_b.isZero(0.0);

  PathMatrix Wv(K1, n), Lv(K1, n);
  Vector q(n), dl(n), work(n), cumL = Vector::Zero(n);
  double residual = 0.0;

  // State at t_0: jump from the pre-reflection point a + X(0) if needed.
  // The routing for this instantaneous jump is evaluated at l = 0 and the
  // clamped pre-point.
  Vector l_now = Vector::Zero(n);
  Vector w_pre = (a + X.point(0).transpose()).cwiseMax(0.0);
  Matrix Pk = coeffs.eval_P(0.0, l_now, w_pre);
  detail::check_pi_bound(Pk, coeffs.Pi, 0.0, val_tol);
  Matrix Pt = Pk.transpose();
  Vector bk = coeffs.eval_b(0.0, l_now, w_pre);

  double drift_b = 0.0, drift_P = 0.0;
  Vector w_now(n);
  for (std::size_t k = 0; k < K1; ++k) {
    if (k == 0) {
      if (zero_a)
        q = X.point(0).transpose();
      else
        q = a + X.point(0).transpose();
    } else {
      const double t_prev = X.grid()[k - 1];
      const double dt = X.grid().step(k - 1);
      if (!coeffs.constant) {
        w_now = Wv.row(k - 1).transpose();
        l_now = Lv.row(k - 1).transpose();
        Matrix Pnext = coeffs.eval_P(t_prev, l_now, w_now);
        detail::check_pi_bound(Pnext, coeffs.Pi, t_prev, val_tol);
        Vector bnext = coeffs.eval_b(t_prev, l_now, w_now);
        if (bnext.size() != n || Pnext.rows() != n || Pnext.cols() != n)
          throw ValidationError("reflect_dynamic: coefficient callable returned wrong dimensions");
        const double db = (bnext - bk).cwiseAbs().maxCoeff();
        const double dP = (Pnext - Pk).cwiseAbs().maxCoeff();
        if (db > drift_b) drift_b = db;
        if (dP > drift_P) drift_P = dP;
        Pk = std::move(Pnext);
        Pt = Pk.transpose();
        bk = std::move(bnext);
      }
      if (zero_const_b)
        q = Wv.row(k - 1).transpose() + (X.point(k) - X.point(k - 1)).transpose();
      else
        q = Wv.row(k - 1).transpose() + (X.point(k) - X.point(k - 1)).transpose() + bk * dt;
    }
    const long its = detail::lcp_step(Pt, q, stop_tol, max_iter, dl, work);
    if (its < 0) throw ConvergenceError("reflect_dynamic: complementarity step exceeded iteration cap");
    work.noalias() = Pt * dl;
    for (Eigen::Index i = 0; i < n; ++i) {
      double w = q[i] + dl[i] - work[i];
      if (w < 0.0) {
        const double v = -w;
        if (v > residual) residual = v;
        if (v <= tol) w = 0.0;
      }
      cumL[i] += dl[i];
      Wv(k, i) = w;
      Lv(k, i) = cumL[i];
    }
  }

  return DynamicSolution{VectorPath(X.grid_ptr(), std::move(Wv)),
                         VectorPath(X.grid_ptr(), std::move(Lv)), residual, drift_b, drift_P};
}

/// Per-coordinate integrable envelope beta_i(s) >= b_i(s, 0, w) for all
/// w >= 0, plus an optional scalar bound used with constant routing.
struct EnvelopeFunction {
  std::vector<std::function<double(double)>> beta;
  std::optional<double> beta_hat;
};

/// Divergence certificate from the envelope: coordinate i is flagged
/// satisfied when X_i(t) + int_0^t beta_i(s) ds (left-endpoint quadrature)
/// dips to -threshold on the horizon; otherwise inconclusive. Witness: the
/// running minimum of that functional.
inline std::vector<ConditionVerdict> envelope_divergence(const VectorPath& X,
                                                         const EnvelopeFunction& env,
                                                         double threshold) {
  if (!(threshold > 0.0) || !std::isfinite(threshold))
    throw ValidationError("envelope_divergence: threshold must be positive");
  if (env.beta.size() != static_cast<std::size_t>(X.dim()))
    throw ValidationError("envelope_divergence: need one envelope per coordinate");
  for (const auto& f : env.beta)
    if (!f) throw ValidationError("envelope_divergence: null envelope callable");
  const std::size_t K1 = X.points();
  const double T = X.grid().horizon();
  std::vector<ConditionVerdict> out;
  for (int i = 0; i < X.dim(); ++i) {
    double integral = 0.0;
    double lowest = X.value(0, i);
    for (std::size_t k = 1; k < K1; ++k) {
      integral += env.beta[static_cast<std::size_t>(i)](X.grid()[k - 1]) * X.grid().step(k - 1);
      lowest = std::min(lowest, X.value(k, i) + integral);
    }
    ConditionVerdict v{i, lowest <= -threshold ? Verdict::Satisfied : Verdict::Inconclusive, lowest, T};
    out.push_back(v);
  }
  return out;
}

/// One sampled counterexample to a declared structural property.
struct AssumptionIssue {
  std::string what;
  double t = 0.0;
  std::string detail;
};

struct AssumptionReport {
  bool ok = true;
  std::vector<AssumptionIssue> issues;
};

/// Monte-Carlo probe of the declared structure: bound and zero diagonal of
/// P, componentwise monotonicity of b and R = I - P^t (nonincreasing in l,
/// nondecreasing in w), structural zeros plus coordinate-dependence limits
/// when `feedforward` is asserted, and l-independence when asserted.
/// Deterministic in (coeffs, sample_budget, seed).
inline AssumptionReport validate_assumptions(const DynamicCoefficients& coeffs, int sample_budget,
                                             std::uint64_t seed) {
  validate_shape(coeffs);
  if (sample_budget < 1) throw ValidationError("validate_assumptions: sample budget must be >= 1");
  const int n = coeffs.n;
  const double tol_v = 1e-9;
  AssumptionReport rep;
  auto stream = rng::make_stream(seed, {0xA55E55ULL});
  const double tscales[] = {0.1, 1.0, 10.0, 100.0};
  const double xscales[] = {0.1, 1.0, 10.0};

  auto record = [&](const std::string& what, double t, const std::string& detail) {
    rep.ok = false;
    if (rep.issues.size() < 64) rep.issues.push_back({what, t, detail});
  };

  for (int trial = 0; trial < sample_budget; ++trial) {
    const double t = tscales[trial % 4] * stream.exponential(1.0);
    const double xs = xscales[trial % 3];
    Vector l(n), w(n), dl_extra(n), dw_extra(n);
    for (int i = 0; i < n; ++i) {
      l[i] = xs * std::abs(stream.normal());
      w[i] = xs * std::abs(stream.normal());
      dl_extra[i] = xs * std::abs(stream.normal());
      dw_extra[i] = xs * std::abs(stream.normal());
    }

    Matrix P0 = coeffs.eval_P(t, l, w);
    Vector b0 = coeffs.eval_b(t, l, w);
    if (P0.rows() != n || P0.cols() != n || b0.size() != n) {
      record("shape", t, "coefficient callable returned wrong dimensions");
      continue;
    }

    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double v = P0(i, j);
        if (!std::isfinite(v) || v < -tol_v || v > coeffs.Pi(i, j) + tol_v) {
          std::ostringstream os;
          os << "P(" << i << "," << j << ") = " << v << " outside [0, " << coeffs.Pi(i, j) << "]";
          record("pi-bound", t, os.str());
        }
      }
    for (int i = 0; i < n; ++i)
      if (std::abs(P0(i, i)) > tol_v) record("diagonal", t, "nonzero diagonal in P");

    // Monotonicity in l (R and b nonincreasing) and in w (nondecreasing).
    {
      const Vector l2 = l + dl_extra;
      Matrix P1 = coeffs.eval_P(t, l2, w);
      Vector b1 = coeffs.eval_b(t, l2, w);
      // R = I - P^t nonincreasing in l means P^t entries nondecreasing.
      if (((P1 - P0).minCoeff()) < -tol_v)
        record("monotone-l", t, "R increased in some entry when l grew");
      if (((b1 - b0).maxCoeff()) > tol_v) record("monotone-l", t, "b increased when l grew");
      const Vector w2 = w + dw_extra;
      Matrix P2 = coeffs.eval_P(t, l, w2);
      Vector b2 = coeffs.eval_b(t, l, w2);
      if (((P2 - P0).maxCoeff()) > tol_v)
        record("monotone-w", t, "R decreased in some entry when w grew");
      if (((b2 - b0).minCoeff()) < -tol_v) record("monotone-w", t, "b decreased when w grew");
    }

    if (coeffs.l_independent) {
      Vector l3 = l;
      for (int i = 0; i < n; ++i) l3[i] += dl_extra[i] + 1.0;
      Matrix P3 = coeffs.eval_P(t, l3, w);
      Vector b3 = coeffs.eval_b(t, l3, w);
      if ((P3 - P0).cwiseAbs().maxCoeff() > tol_v || (b3 - b0).cwiseAbs().maxCoeff() > tol_v)
        record("l-independence", t, "coefficients changed when only l changed");
    }

    if (coeffs.feedforward) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j)
          if (std::abs(P0(i, j)) > tol_v) {
            std::ostringstream os;
            os << "P(" << i << "," << j << ") = " << P0(i, j) << " must vanish for j <= i";
            record("feedforward-zeros", t, os.str());
          }
      // b_i and column i of P may depend only on coordinates <= i: perturb the tail.
      const int i = trial % n;
      Vector l4 = l, w4 = w;
      for (int j = i + 1; j < n; ++j) {
        l4[j] += 1.0 + dl_extra[j];
        w4[j] += 1.0 + dw_extra[j];
      }
      Matrix P4 = coeffs.eval_P(t, l4, w4);
      Vector b4 = coeffs.eval_b(t, l4, w4);
      bool moved = std::abs(b4[i] - b0[i]) > tol_v;
      for (int j = 0; j < n && !moved; ++j) moved = std::abs(P4(j, i) - P0(j, i)) > tol_v;
      if (moved) {
        std::ostringstream os;
        os << "b_" << i << " or column " << i << " of P depends on coordinates above " << i;
        record("feedforward-dependence", t, os.str());
      }
    }
  }
  return rep;
}

/// First k coordinates of a feedforward problem as a standalone problem.
/// Valid because under the feedforward structure the leading k x k block of
/// R and the first k drift coordinates never read coordinates above k.
struct FeedforwardSubproblem {
  VectorPath X;
  DynamicCoefficients coeffs;
};

inline FeedforwardSubproblem feedforward_subproblem(const VectorPath& X,
                                                    const DynamicCoefficients& coeffs, int k) {
  validate_shape(coeffs);
  if (!coeffs.feedforward)
    throw ValidationError("feedforward_subproblem: coefficients are not flagged feedforward");
  if (k < 1 || k > coeffs.n) throw ValidationError("feedforward_subproblem: k out of range");
  if (X.dim() != coeffs.n) throw ValidationError("feedforward_subproblem: dimension mismatch");

  PathMatrix sub = X.values().leftCols(k);
  VectorPath Xk(X.grid_ptr(), std::move(sub));

  DynamicCoefficients c;
  c.n = k;
  c.Pi = coeffs.Pi.topLeftCorner(k, k);
  c.lipschitz = coeffs.lipschitz;
  c.time_only = coeffs.time_only;
  c.l_independent = coeffs.l_independent;
  c.feedforward = true;
  if (coeffs.constant) {
    c.constant = true;
    c.constant_P = coeffs.constant_P.topLeftCorner(k, k);
    c.constant_b = coeffs.constant_b.head(k);
    return FeedforwardSubproblem{std::move(Xk), std::move(c)};
  }
  const int full_n = coeffs.n;
  auto pad = [full_n](const Vector& v) {
    Vector out = Vector::Zero(full_n);
    out.head(v.size()) = v;
    return out;
  };
  c.b = [inner = coeffs, pad, k](double t, const Vector& l, const Vector& w) -> Vector {
    return inner.eval_b(t, pad(l), pad(w)).head(k);
  };
  c.P = [inner = coeffs, pad, k](double t, const Vector& l, const Vector& w) -> Matrix {
    return inner.eval_P(t, pad(l), pad(w)).topLeftCorner(k, k);
  };
  return FeedforwardSubproblem{std::move(Xk), std::move(c)};
}

/// Coupling statistics for W(a + X) vs W(X) across seeds.
struct CouplingExperimentResult {
  std::vector<CouplingResult> per_seed;
  double fraction_coupled = 0.0;
  std::vector<double> coupling_times;  // sorted, coupled seeds only
};

inline CouplingExperimentResult coupling_experiment(const ProcessSpec& spec,
                                                    const DynamicCoefficients& coeffs,
                                                    const Vector& a, GridPtr grid,
                                                    const std::vector<std::uint64_t>& seeds,
                                                    double couple_tol = 1e-6,
                                                    double solver_tol = 1e-10) {
  validate_shape(coeffs);
  if (seeds.empty()) throw ValidationError("coupling_experiment: need at least one seed");
  const Vector zero = Vector::Zero(coeffs.n);
  CouplingExperimentResult res;
  res.per_seed.reserve(seeds.size());
  std::size_t coupled = 0;
  for (const std::uint64_t seed : seeds) {
    VectorPath X = generate(spec, grid, seed);
    CouplingResult c;
    if (coeffs.constant && coeffs.constant_b.isZero(0.0)) {
      RoutingMatrix P(coeffs.constant_P);
      const auto Wa = reflect(shift(a, X), P, solver_tol);
      const auto W0 = reflect(X, P, solver_tol);
      c = coupling_time(Wa.W, W0.W, couple_tol);
    } else {
      const auto Wa = reflect_dynamic(X, coeffs, a, solver_tol);
      const auto W0 = reflect_dynamic(X, coeffs, zero, solver_tol);
      c = coupling_time(Wa.W, W0.W, couple_tol);
    }
    if (c.coupled) {
      ++coupled;
      res.coupling_times.push_back(c.time);
    }
    res.per_seed.push_back(c);
  }
  res.fraction_coupled = static_cast<double>(coupled) / static_cast<double>(seeds.size());
  std::sort(res.coupling_times.begin(), res.coupling_times.end());
  return res;
}

}  // namespace reflect
