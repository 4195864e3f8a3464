#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include <reflect/errors.hpp>

namespace reflect {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace detail {

inline void require_square_finite_nonnegative(const Matrix& P, const char* who) {
  if (P.rows() == 0 || P.rows() != P.cols()) {
    std::ostringstream os;
    os << who << ": matrix must be square and nonempty, got " << P.rows() << "x" << P.cols();
    throw ValidationError(os.str());
  }
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    for (Eigen::Index j = 0; j < P.cols(); ++j) {
      const double v = P(i, j);
      if (!std::isfinite(v)) {
        std::ostringstream os;
        os << who << ": non-finite entry at (" << i << "," << j << ")";
        throw ValidationError(os.str());
      }
      if (v < 0.0) {
        std::ostringstream os;
        os << who << ": negative entry " << v << " at (" << i << "," << j << ")";
        throw ValidationError(os.str());
      }
    }
  }
}

}  // namespace detail

/// Spectral radius of a square nonnegative matrix, accurate to 1e-10.
///
/// Uses the Gelfand limit rho = lim ||P^(2^m)||^(1/2^m) evaluated by repeated
/// squaring with per-square max-norm scaling, accumulating the scale factors
/// as sum 2^(1-j) log s_j. Unlike vector power iteration this converges for
/// imprimitive and defective matrices (the error after m squarings is of
/// order rho * log(2^m)/2^m, far below 1e-10 at m = 64), and it is exact for
/// nilpotent matrices: the iterate collapses to the zero matrix.
inline double spectral_radius(const Matrix& P) {
  detail::require_square_finite_nonnegative(P, "spectral_radius");
  const Eigen::Index n = P.rows();
  if (n == 1) return P(0, 0);

  // Pre-scaling by the largest entry keeps row sums finite for any input;
  // rho(P) = m0 * rho(P / m0).
  const double m0 = P.maxCoeff();
  if (m0 == 0.0) return 0.0;
  Matrix B = P / m0;
  double log_rho = std::log(m0);
  for (int j = 1; j <= 64; ++j) {
    // Row sums equal the infinity norm here because entries are nonnegative.
    const double s = B.rowwise().sum().maxCoeff();
    if (s == 0.0) return 0.0;  // some power of P vanished: nilpotent
    log_rho += std::ldexp(std::log(s), 1 - j);
    B /= s;
    B = (B * B).eval();
  }
  // Residual factor ||B_m||^(1/2^m) is exp(O(2^-64)); ignore it.
  return std::exp(log_rho);
}

/// Validated routing matrix: square, nonnegative, finite entries and
/// spectral radius below 1 - 1e-12. R = I - P^t is then a nonsingular
/// M-matrix, which is what every solver in this library relies on.
class RoutingMatrix {
 public:
  static constexpr double kRadiusMargin = 1e-12;

  explicit RoutingMatrix(Matrix entries) : entries_(std::move(entries)) {
    detail::require_square_finite_nonnegative(entries_, "RoutingMatrix");
    radius_ = reflect::spectral_radius(entries_);
    if (radius_ >= 1.0 - kRadiusMargin) {
      std::ostringstream os;
      os << "RoutingMatrix: spectral radius " << radius_ << " is not below 1 - 1e-12";
      throw ValidationError(os.str());
    }
  }

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }
  double spectral_radius() const { return radius_; }

  bool zero_diagonal() const {
    for (int i = 0; i < dim(); ++i)
      if (entries_(i, i) != 0.0) return false;
    return true;
  }

  /// R = I - P^t.
  Matrix reflection_matrix() const {
    return Matrix::Identity(dim(), dim()) - entries_.transpose();
  }

 private:
  Matrix entries_;
  double radius_;
};

/// Result of the zero-diagonal reduction. `scale` holds the diagonal of
/// (I - D)^(1/2) where D = diag(P). A reflection problem for P with input X
/// is equivalent to the problem for `routing` with input X~ where
///   X~_i = X_i / scale_i,  and back-maps  W = scale .* W~,  L = L~ ./ scale.
struct DiagonalNormalization {
  RoutingMatrix routing;
  Vector scale;
};

/// Removes a nonzero diagonal from a routing matrix:
///   P~ = (I - D)^(-1/2) (P - D) (I - D)^(-1/2).
///
/// This symmetric scaling is the unique diagonal rescaling that keeps the
/// reflection equation W = X + (I - P^t) L intact under W, X -> (I-D)^(-1/2)
/// and L -> (I-D)^(1/2) while producing unit diagonal in I - P~^t.
/// rho(P~) <= rho(P), so the result is again a valid routing matrix.
inline DiagonalNormalization normalize_diagonal(const Matrix& P) {
  detail::require_square_finite_nonnegative(P, "normalize_diagonal");
  const Eigen::Index n = P.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (P(i, i) >= 1.0) {
      std::ostringstream os;
      os << "normalize_diagonal: invalid routing, diagonal entry p(" << i << "," << i
         << ") = " << P(i, i) << " is >= 1";
      throw ValidationError(os.str());
    }
  }
  RoutingMatrix validated(P);  // enforces rho(P) < 1

  Vector scale(n);
  for (Eigen::Index i = 0; i < n; ++i) scale[i] = std::sqrt(1.0 - P(i, i));
  Matrix tilde(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      tilde(i, j) = (i == j) ? 0.0 : P(i, j) / (scale[i] * scale[j]);
    }
  }
  return DiagonalNormalization{RoutingMatrix(std::move(tilde)), std::move(scale)};
}

inline DiagonalNormalization normalize_diagonal(const RoutingMatrix& P) {
  return normalize_diagonal(P.entries());
}

/// R^(-1) = (sum_k P^k)^t via the Neumann series, truncated once the added
/// term's max-norm falls below tol * (1 - rho(P)); the residual
/// ||R R^(-1) - I||_inf is then verified and the series extended if needed.
/// The result has nonnegative entries and diagonal >= 1.
inline Matrix neumann_inverse(const RoutingMatrix& P, double tol = 1e-12) {
  if (!(tol > 0.0) || !std::isfinite(tol))
    throw ValidationError("neumann_inverse: tol must be positive and finite");
  const int n = P.dim();
  const Matrix Pt = P.entries().transpose();
  const double margin = 1.0 - P.spectral_radius();

  Matrix sum = Matrix::Identity(n, n);
  Matrix term = Pt;
  const long max_terms = 4'000'000;
  long k = 0;
  double threshold = tol * margin;
  while (true) {
    while (term.maxCoeff() > threshold) {
      sum += term;
      term = (term * Pt).eval();
      if (++k > max_terms)
        throw ConvergenceError("neumann_inverse: series did not reach tolerance");
    }
    const Matrix R = Matrix::Identity(n, n) - Pt;
    const double residual = (R * sum - Matrix::Identity(n, n)).cwiseAbs().rowwise().sum().maxCoeff();
    if (residual <= tol) break;
    threshold *= 0.01;  // rare: heuristic truncation was not tight enough
  }
  return sum;
}

}  // namespace reflect
