#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <limits>

#include <reflect/errors.hpp>
#include <reflect/path.hpp>
#include <reflect/routing.hpp>

namespace reflect {

/// Reflected path W, regulator L (componentwise nondecreasing, L(0-) = 0) and
/// the largest violation of the defining relations observed on the grid
/// (nonnegativity clamps and iteration truncation; never silently hidden).
struct ReflectionSolution {
  VectorPath W;
  VectorPath L;
  double residual = 0.0;
};

namespace detail {

/// Least-element linear complementarity step: the minimal dl >= 0 with
///   w = q + (I - Pt) dl >= 0   and   dl_i > 0 only where w_i = 0.
///
/// Iterates dl <- max(0, Pt dl - q) from dl = 0. The map is isotone and the
/// iterates increase toward the least fixed point; rho(P) < 1 makes the
/// asymptotic rate rho. Termination: sup-norm change below stop_tol.
/// Returns the iteration count, or -1 if max_iter was exhausted.
inline long lcp_step(const Matrix& Pt, const Vector& q, double stop_tol, long max_iter,
                     Vector& dl, Vector& work) {
  const Eigen::Index n = q.size();
  dl.setZero(n);
  // Fast path: q >= 0 needs no push.
  if (q.minCoeff() >= 0.0) return 0;
  for (long it = 1; it <= max_iter; ++it) {
    work.noalias() = Pt * dl;
    work -= q;
    double change = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double next = work[i] > 0.0 ? work[i] : 0.0;
      const double d = next - dl[i];
      if (d > change) change = d;
      dl[i] = next;
    }
    if (change < stop_tol) return it;
  }
  return -1;
}

inline long lcp_iteration_cap(double tol, double rho) {
  // ceil(log tol / log rho) + 10^4; rho ~ 0 converges immediately.
  if (rho <= 1e-300) return 10'000;
  const double steps = std::log(tol) / std::log(rho);
  if (!std::isfinite(steps) || steps > 4e6) return 4'000'000 + 10'000;
  return static_cast<long>(std::ceil(steps)) + 10'000;
}

}  // namespace detail

/// Reflection (Skorohod) map on the nonnegative orthant for a
/// piecewise-constant input path and a zero-diagonal routing matrix:
/// W = X + (I - P^t) L with W >= 0, L nondecreasing from 0, and L_i growing
/// only while W_i = 0. Solved exactly by one least-element complementarity
/// step per grid jump; the result is the continuous-time reflection of the
/// piecewise-constant interpolant of X.
inline ReflectionSolution reflect(const VectorPath& X, const RoutingMatrix& P,
                                  double tol = 1e-10) {
  if (P.dim() != X.dim()) throw ValidationError("reflect: routing dimension != path dimension");
  if (!P.zero_diagonal())
    throw ValidationError("reflect: routing matrix must have zero diagonal (normalize first)");
  if (!(tol > 0.0) || !std::isfinite(tol)) throw ValidationError("reflect: tol must be positive");

  const Eigen::Index n = X.dim();
  const std::size_t K1 = X.points();
  const Matrix Pt = P.entries().transpose();
  const double rho = P.spectral_radius();
  const double stop_tol = tol * (1.0 - rho);
  const long max_iter = detail::lcp_iteration_cap(tol, rho);

  PathMatrix Wv(K1, n), Lv(K1, n);
  Vector q(n), dl(n), work(n), cumL = Vector::Zero(n);
  double residual = 0.0;

  for (std::size_t k = 0; k < K1; ++k) {
    if (k == 0) {
      q = X.point(0).transpose();
    } else {
      q = Wv.row(k - 1).transpose() + (X.point(k) - X.point(k - 1)).transpose();
    }
    const long its = detail::lcp_step(Pt, q, stop_tol, max_iter, dl, work);
    if (its < 0)
      throw ConvergenceError("reflect: complementarity step exceeded iteration cap (near-critical routing)");
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
  return ReflectionSolution{VectorPath(X.grid_ptr(), std::move(Wv)),
                            VectorPath(X.grid_ptr(), std::move(Lv)), residual};
}

/// Same map computed by a global fixed-point sweep over the whole path:
///   L_k(t) <- -min(0, min_{s <= t} [ X_k(s) - sum_j p_jk L_j(s) ])
/// starting from L = 0 and stopping when the sup-norm change over all grid
/// points is at most tol. Independent of the stepwise solver; the two agree
/// on the unique discrete solution up to their tolerances.
inline ReflectionSolution reflect_fixed_point(const VectorPath& X, const RoutingMatrix& P,
                                              double tol = 1e-10, long max_iter = 100000) {
  if (P.dim() != X.dim())
    throw ValidationError("reflect_fixed_point: routing dimension != path dimension");
  if (!P.zero_diagonal())
    throw ValidationError("reflect_fixed_point: routing matrix must have zero diagonal");
  if (!(tol > 0.0) || !std::isfinite(tol))
    throw ValidationError("reflect_fixed_point: tol must be positive");
  if (max_iter < 1) throw ValidationError("reflect_fixed_point: max_iter must be >= 1");

  const Eigen::Index n = X.dim();
  const Eigen::Index K1 = static_cast<Eigen::Index>(X.points());
  const PathMatrix& Xv = X.values();

  PathMatrix L = PathMatrix::Zero(K1, n);
  PathMatrix A(K1, n);
  bool converged = false;
  for (long sweep = 0; sweep < max_iter; ++sweep) {
    // A = X - L P  evaluated at every grid point: row s gives X(s)^t - L(s)^t P,
    // whose k-th entry is X_k(s) - (P^t L(s))_k.
    A.noalias() = Xv - L * P.entries();
    // Running minimum down each column, then the update L' = max(0, -runmin).
    double change = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double m = 0.0;
      for (Eigen::Index k = 0; k < K1; ++k) {
        const double a = A(k, i);
        if (a < m) m = a;
        const double next = -m;  // m <= 0, so next >= 0
        const double d = next - L(k, i);
        const double ad = d < 0.0 ? -d : d;
        if (ad > change) change = ad;
        A(k, i) = next;  // reuse A as L'
      }
    }
    L.swap(A);
    if (change <= tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw ConvergenceError("reflect_fixed_point: sweep limit reached before tolerance");

  PathMatrix Wv = Xv + L * (Matrix::Identity(n, n) - P.entries());
  double residual = 0.0;
  for (Eigen::Index k = 0; k < K1; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double& w = Wv(k, i);
      if (w < 0.0) {
        const double v = -w;
        if (v > residual) residual = v;
        if (v <= 10.0 * tol) w = 0.0;
      }
    }
  }
  return ReflectionSolution{VectorPath(X.grid_ptr(), std::move(Wv)),
                            VectorPath(X.grid_ptr(), std::move(L)), residual};
}

/// Componentwise regulator envelopes computable without solving:
///   M_i(t) = -min_{s<=t} min(X_i(s), 0)
///   N_i(t) = same functional applied to (R^{-1} X)_i
///   upper  = R^{-1} M  (pathwise)
/// max(M, N) <= L(X) <= upper componentwise at every grid point.
struct RegulatorBounds {
  VectorPath M;
  VectorPath N;
  VectorPath upper;
};

namespace detail {

inline PathMatrix running_drop(const PathMatrix& v) {
  PathMatrix out(v.rows(), v.cols());
  for (Eigen::Index i = 0; i < v.cols(); ++i) {
    double m = 0.0;
    for (Eigen::Index k = 0; k < v.rows(); ++k) {
      const double x = v(k, i);
      if (x < m) m = x;
      out(k, i) = -m;
    }
  }
  return out;
}

}  // namespace detail

inline RegulatorBounds regulator_bounds(const VectorPath& X, const RoutingMatrix& P,
                                        double tol = 1e-12) {
  if (P.dim() != X.dim())
    throw ValidationError("regulator_bounds: routing dimension != path dimension");
  const Matrix Rinv = neumann_inverse(P, tol);
  PathMatrix M = detail::running_drop(X.values());
  PathMatrix N = detail::running_drop(X.values() * Rinv.transpose());
  PathMatrix upper = M * Rinv.transpose();
  return RegulatorBounds{VectorPath(X.grid_ptr(), std::move(M)),
                         VectorPath(X.grid_ptr(), std::move(N)),
                         VectorPath(X.grid_ptr(), std::move(upper))};
}

/// Diagnostics for the difference D = W(a + X) - W(X) of two reflections
/// started from initial offsets a >= 0 and 0.
///
/// Along the grid the comparison facts are: D >= 0, R^{-1} D componentwise
/// nonincreasing (hence also e^t D shrinking in the R^{-1}-weighted sense),
/// and L(a+X) <= L(X) <= L(a+X) + R^{-1} a. The fields record the largest
/// observed violation of each, plus terminal values for decay studies.
struct DifferenceReport {
  Vector terminal;                        // D(t_K)
  double terminal_inf = 0.0;              // ||D(t_K)||_inf
  double initial_inf = 0.0;               // ||D(t_0)||_inf
  double min_difference = 0.0;            // min over grid and coordinates of D
  double max_transformed_increase = 0.0;  // max increment of any (R^{-1}D)_i
  double max_sum_increase = 0.0;          // max increment of sum_i (R^{-1}D)_i
  double regulator_lower_violation = 0.0; // max of L(a+X) - L(X)
  double regulator_upper_violation = 0.0; // max of L(X) - L(a+X) - R^{-1}a
  double horizon = 0.0;
};

inline DifferenceReport difference_diagnostics(const VectorPath& X, const Vector& a,
                                               const RoutingMatrix& P, double tol = 1e-10) {
  if (a.size() != X.dim())
    throw ValidationError("difference_diagnostics: initial vector dimension != path dimension");
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (!(a[i] >= 0.0) || !std::isfinite(a[i]))
      throw ValidationError("difference_diagnostics: initial vector must be nonnegative and finite");

  const ReflectionSolution base = reflect(X, P, tol);
  const ReflectionSolution shifted = reflect(shift(a, X), P, tol);
  const Matrix Rinv = neumann_inverse(P, std::min(tol, 1e-12));

  const PathMatrix D = shifted.W.values() - base.W.values();
  const PathMatrix T = D * Rinv.transpose();

  DifferenceReport rep;
  rep.horizon = X.grid().horizon();
  rep.terminal = D.row(D.rows() - 1).transpose();
  rep.terminal_inf = D.row(D.rows() - 1).cwiseAbs().maxCoeff();
  rep.initial_inf = D.row(0).cwiseAbs().maxCoeff();
  rep.min_difference = D.minCoeff();
  for (Eigen::Index k = 1; k < T.rows(); ++k) {
    const double inc = (T.row(k) - T.row(k - 1)).maxCoeff();
    if (inc > rep.max_transformed_increase) rep.max_transformed_increase = inc;
    const double sinc = T.row(k).sum() - T.row(k - 1).sum();
    if (sinc > rep.max_sum_increase) rep.max_sum_increase = sinc;
  }
  const PathMatrix dL = shifted.L.values() - base.L.values();
  rep.regulator_lower_violation = std::max(0.0, dL.maxCoeff());
  const Vector slack = Rinv * a;
  double upper_viol = 0.0;
  for (Eigen::Index k = 0; k < dL.rows(); ++k)
    for (Eigen::Index i = 0; i < dL.cols(); ++i) {
      const double v = -dL(k, i) - slack[i];
      if (v > upper_viol) upper_viol = v;
    }
  rep.regulator_upper_violation = upper_viol;
  return rep;
}

}  // namespace reflect
