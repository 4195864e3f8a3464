#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <reflect/errors.hpp>
#include <reflect/path.hpp>
#include <reflect/processes.hpp>
#include <reflect/reflection.hpp>
#include <reflect/routing.hpp>

namespace reflect {

enum class Verdict { Satisfied, Violated, Inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Satisfied: return "satisfied";
    case Verdict::Violated: return "violated";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

/// Finite-horizon proxy verdict for one coordinate, with the extremal
/// statistic that produced it.
struct ConditionVerdict {
  int coordinate = 0;
  Verdict verdict = Verdict::Inconclusive;
  double witness = 0.0;
  double horizon = 0.0;
};

/// Finite-horizon reading of "L_i diverges":
///   satisfied    terminal L_i >= threshold and L_i increased over the final
///                quarter of the horizon (witness: terminal L_i);
///   violated     terminal L_i below threshold and L_i constant over the
///                final half (witness: that increase, 0);
///   inconclusive otherwise (witness: terminal L_i).
/// A coordinate whose terminal value has crossed the threshold is never
/// violated; since L is nondecreasing, extending the horizon can therefore
/// never turn satisfied into violated. Regulator increments are exact zeros
/// when a coordinate is quiescent, so the activity checks compare exactly.
inline std::vector<ConditionVerdict> regulator_divergence(const VectorPath& L, double threshold) {
  if (!(threshold > 0.0) || !std::isfinite(threshold))
    throw ValidationError("regulator_divergence: threshold must be positive");
  const std::size_t K = L.points() - 1;
  const double T = L.grid().horizon();
  const std::size_t k_half = L.grid().first_at_or_after(0.5 * T);
  const std::size_t k_quarter = L.grid().first_at_or_after(0.75 * T);
  std::vector<ConditionVerdict> out;
  for (int i = 0; i < L.dim(); ++i) {
    const double terminal = L.value(K, i);
    const double inc_quarter = terminal - L.value(k_quarter, i);
    const double inc_half = terminal - L.value(k_half, i);
    ConditionVerdict v{i, Verdict::Inconclusive, terminal, T};
    if (terminal >= threshold && inc_quarter > 0.0) {
      v.verdict = Verdict::Satisfied;
    } else if (terminal < threshold && inc_half == 0.0) {
      v.verdict = Verdict::Violated;
      v.witness = inc_half;
    }
    out.push_back(v);
  }
  return out;
}

/// Sufficient condition for eventual irrelevance of coordinate i on this
/// horizon: X_i or (R^{-1}X)_i dips to -threshold or below. Never "violated"
/// (a finite horizon cannot refute an eventual dip). Witness: the deeper of
/// the two running minima.
inline std::vector<ConditionVerdict> sufficient_condition(const VectorPath& X,
                                                          const RoutingMatrix& P,
                                                          double threshold) {
  if (!(threshold > 0.0) || !std::isfinite(threshold))
    throw ValidationError("sufficient_condition: threshold must be positive");
  if (P.dim() != X.dim()) throw ValidationError("sufficient_condition: dimension mismatch");
  const Matrix Rinv = neumann_inverse(P);
  const PathMatrix transformed = X.values() * Rinv.transpose();
  const double T = X.grid().horizon();
  std::vector<ConditionVerdict> out;
  for (int i = 0; i < X.dim(); ++i) {
    const double m1 = X.values().col(i).minCoeff();
    const double m2 = transformed.col(i).minCoeff();
    const double deepest = std::min(m1, m2);
    ConditionVerdict v{i, Verdict::Inconclusive, deepest, T};
    if (deepest <= -threshold) v.verdict = Verdict::Satisfied;
    out.push_back(v);
  }
  return out;
}

/// Necessary condition, read through the regulator upper bound: divergence of
/// L_i forces (R^{-1}M)_i to diverge. If (R^{-1}M)_i stays below threshold on
/// the whole horizon the condition is flagged violated (irrelevance cannot be
/// certified for i); reaching threshold flags satisfied. Witness: terminal
/// (R^{-1}M)_i, which is also its running maximum (the path is nondecreasing).
inline std::vector<ConditionVerdict> necessary_condition(const VectorPath& X,
                                                         const RoutingMatrix& P,
                                                         double threshold) {
  if (!(threshold > 0.0) || !std::isfinite(threshold))
    throw ValidationError("necessary_condition: threshold must be positive");
  if (P.dim() != X.dim()) throw ValidationError("necessary_condition: dimension mismatch");
  const Matrix Rinv = neumann_inverse(P);
  const PathMatrix M = detail::running_drop(X.values());
  const PathMatrix upper = M * Rinv.transpose();
  const double T = X.grid().horizon();
  const Eigen::Index last = upper.rows() - 1;
  std::vector<ConditionVerdict> out;
  for (int i = 0; i < X.dim(); ++i) {
    const double terminal = upper(last, i);
    ConditionVerdict v{i, terminal >= threshold ? Verdict::Satisfied : Verdict::Violated, terminal, T};
    out.push_back(v);
  }
  return out;
}

/// Stability margins R^{-1} rho; stable iff every margin is strictly
/// negative.
struct StabilityReport {
  bool stable = false;
  Vector margins;
};

inline StabilityReport stability_check(const Vector& rho, const RoutingMatrix& P) {
  if (rho.size() != P.dim()) throw ValidationError("stability_check: dimension mismatch");
  if (!rho.allFinite()) throw ValidationError("stability_check: non-finite drift");
  StabilityReport rep;
  rep.margins = neumann_inverse(P) * rho;
  rep.stable = (rep.margins.array() < 0.0).all();
  return rep;
}

/// Stationary distribution of an irreducible conservative generator Q
/// (pi Q = 0, sum pi = 1).
inline Vector stationary_distribution(const Matrix& Q) {
  const Eigen::Index m = Q.rows();
  if (m < 1 || Q.cols() != m) throw ValidationError("stationary_distribution: Q must be square");
  // Irreducibility = strong connectivity of the positive off-diagonal graph.
  auto reachable = [&](bool forward) {
    std::vector<char> seen(static_cast<std::size_t>(m), 0);
    std::vector<Eigen::Index> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const Eigen::Index u = stack.back();
      stack.pop_back();
      for (Eigen::Index w = 0; w < m; ++w) {
        const double q = forward ? Q(u, w) : Q(w, u);
        if (w != u && q > 0.0 && !seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = 1;
          stack.push_back(w);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  };
  if (m > 1 && (!reachable(true) || !reachable(false)))
    throw ModelError("stationary_distribution: modulating chain is reducible");

  Matrix A(m + 1, m);
  A.topRows(m) = Q.transpose();
  A.bottomRows(1).setOnes();
  Vector b = Vector::Zero(m + 1);
  b[m] = 1.0;
  Vector pi = A.colPivHouseholderQr().solve(b);
  const double resid = (A * pi - b).cwiseAbs().maxCoeff();
  if (resid > 1e-9 * std::max(1.0, Q.cwiseAbs().maxCoeff()) || pi.minCoeff() < -1e-12)
    throw ModelError("stationary_distribution: no valid stationary vector (residual " +
                     std::to_string(resid) + ")");
  for (Eigen::Index i = 0; i < m; ++i) pi[i] = std::max(pi[i], 0.0);
  pi /= pi.sum();
  return pi;
}

/// Long-run mean drift of a Markov-additive input:
///   rho = sum_i pi_i rho_i + sum_{i != j} pi_i q_ij mu_ij
/// where rho_i = state drift + jump_rate .* mean(jump law) and mu_ij is the
/// mean transition jump.
inline Vector map_mean_drift(const MapSpec& spec) {
  validate(spec);
  const Eigen::Index m = spec.Q.rows();
  const Eigen::Index n = spec.states.front().drift.size();
  const Vector pi = stationary_distribution(spec.Q);
  Vector rho = Vector::Zero(n);
  for (Eigen::Index s = 0; s < m; ++s) {
    const MapState& st = spec.states[static_cast<std::size_t>(s)];
    Vector state_rate = st.drift;
    if (st.jump_rate.size() > 0)
      for (Eigen::Index i = 0; i < n; ++i)
        if (st.jump_rate[i] > 0.0)
          state_rate[i] += st.jump_rate[i] * st.jump[static_cast<std::size_t>(i)].mean();
    rho += pi[s] * state_rate;
  }
  for (const TransitionJump& tj : spec.transition_jumps) {
    const double weight = pi[tj.from] * spec.Q(tj.from, tj.to);
    for (Eigen::Index i = 0; i < n; ++i)
      rho[i] += weight * tj.jump[static_cast<std::size_t>(i)].mean();
  }
  return rho;
}

/// Long-run mean drift for the non-modulated laws (fixtures have none).
inline std::optional<Vector> mean_drift(const ProcessSpec& spec) {
  validate(spec);
  if (const auto* b = std::get_if<BrownianSpec>(&spec)) return b->mu;
  if (const auto* l = std::get_if<LevyCPSpec>(&spec)) {
    Vector d = l->drift;
    for (Eigen::Index i = 0; i < d.size(); ++i)
      if (l->jump_rate[i] > 0.0) d[i] += l->jump_rate[i] * l->jump[static_cast<std::size_t>(i)].mean();
    return d;
  }
  if (const auto* mp = std::get_if<MapSpec>(&spec)) return map_mean_drift(*mp);
  if (const auto* r = std::get_if<RenewalRiskSpec>(&spec)) {
    Vector d = r->premium;
    for (Eigen::Index i = 0; i < d.size(); ++i)
      d[i] -= r->claim[static_cast<std::size_t>(i)].mean() /
              r->interarrival[static_cast<std::size_t>(i)].mean();
    return d;
  }
  return std::nullopt;
}

/// Earliest grid time from which two reflected paths stay within tol of each
/// other (in sup norm over coordinates) through the end of the horizon.
struct CouplingResult {
  bool coupled = false;
  double time = 0.0;       // meaningful when coupled
  std::size_t index = 0;   // grid index of the coupling time
};

inline CouplingResult coupling_time(const VectorPath& Wa, const VectorPath& W0, double tol) {
  if (Wa.dim() != W0.dim()) throw ValidationError("coupling_time: dimension mismatch");
  if (!(Wa.grid() == W0.grid())) throw ValidationError("coupling_time: paths live on different grids");
  if (!(tol >= 0.0) || !std::isfinite(tol)) throw ValidationError("coupling_time: bad tol");
  const Eigen::Index K1 = static_cast<Eigen::Index>(Wa.points());
  // Walk backwards accumulating the suffix maximum of the deviation.
  double suffix = 0.0;
  Eigen::Index first_ok = K1;  // first index whose suffix max is <= tol
  for (Eigen::Index k = K1 - 1; k >= 0; --k) {
    const double dev = (Wa.values().row(k) - W0.values().row(k)).cwiseAbs().maxCoeff();
    if (dev > suffix) suffix = dev;
    if (suffix <= tol) first_ok = k;
    else break;  // suffix maxima only grow while walking left
  }
  CouplingResult res;
  if (first_ok < K1) {
    res.coupled = true;
    res.index = static_cast<std::size_t>(first_ok);
    res.time = Wa.grid()[res.index];
  }
  return res;
}

/// Two-sample Kolmogorov-Smirnov statistic sup_x |F_a(x) - F_b(x)|.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ValidationError("ks_distance: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double ks = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    const double d = std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb);
    if (d > ks) ks = d;
  }
  return ks;
}

}  // namespace reflect
