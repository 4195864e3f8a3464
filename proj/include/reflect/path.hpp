#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <sstream>
#include <utility>
#include <vector>

#include <reflect/errors.hpp>
#include <reflect/routing.hpp>

namespace reflect {

/// Strictly increasing finite time points t_0 = 0 < t_1 < ... < t_K.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> times) : times_(std::move(times)) {
    if (times_.empty()) throw ValidationError("TimeGrid: empty");
    if (times_.front() != 0.0) throw ValidationError("TimeGrid: must start at t = 0");
    for (std::size_t k = 0; k < times_.size(); ++k) {
      if (!std::isfinite(times_[k])) throw ValidationError("TimeGrid: non-finite time point");
      if (k > 0 && !(times_[k] > times_[k - 1]))
        throw ValidationError("TimeGrid: time points must be strictly increasing");
    }
  }

  /// Uniform grid t_k = k * step covering [0, horizon]. The horizon is
  /// included when it is an exact multiple of step (within 1 ulp-scale slack).
  static TimeGrid uniform(double horizon, double step) {
    if (!(step > 0.0) || !std::isfinite(step) || !(horizon > 0.0) || !std::isfinite(horizon))
      throw ValidationError("TimeGrid::uniform: horizon and step must be positive finite");
    const double ratio = horizon / step;
    long K = static_cast<long>(ratio);
    if (ratio - static_cast<double>(K) > 1.0 - 1e-9) ++K;  // horizon/step within rounding of integer
    if (K < 1) K = 1;
    std::vector<double> times(static_cast<std::size_t>(K) + 1);
    for (long k = 0; k <= K; ++k) times[static_cast<std::size_t>(k)] = static_cast<double>(k) * step;
    return TimeGrid(std::move(times));
  }

  std::size_t size() const { return times_.size(); }          // number of points, K + 1
  std::size_t steps() const { return times_.size() - 1; }     // K
  double operator[](std::size_t k) const { return times_[k]; }
  double horizon() const { return times_.back(); }
  double step(std::size_t k) const { return times_[k + 1] - times_[k]; }
  const std::vector<double>& times() const { return times_; }

  bool operator==(const TimeGrid& o) const { return times_ == o.times_; }

  /// Index of the first grid point with t_k >= t (size() if none).
  std::size_t first_at_or_after(double t) const {
    return static_cast<std::size_t>(
        std::lower_bound(times_.begin(), times_.end(), t) - times_.begin());
  }

 private:
  std::vector<double> times_;
};

using GridPtr = std::shared_ptr<const TimeGrid>;

/// Values stored one time point per row so a step's coordinates are
/// contiguous in memory.
using PathMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Right-continuous piecewise-constant vector path sampled on a TimeGrid:
/// X(t) = row k for t in [t_k, t_{k+1}). Immutable after construction.
class VectorPath {
 public:
  VectorPath(GridPtr grid, PathMatrix values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw ValidationError("VectorPath: null grid");
    if (static_cast<std::size_t>(values_.rows()) != grid_->size())
      throw ValidationError("VectorPath: row count does not match grid size");
    if (values_.cols() < 1) throw ValidationError("VectorPath: dimension must be >= 1");
    if (!values_.allFinite()) throw ValidationError("VectorPath: non-finite value");
  }

  static VectorPath zero(GridPtr grid, int n) {
    if (!grid) throw ValidationError("VectorPath::zero: null grid");
    return VectorPath(grid, PathMatrix::Zero(static_cast<Eigen::Index>(grid->size()), n));
  }

  int dim() const { return static_cast<int>(values_.cols()); }
  std::size_t points() const { return static_cast<std::size_t>(values_.rows()); }
  const TimeGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const PathMatrix& values() const { return values_; }
  double value(std::size_t k, int i) const { return values_(static_cast<Eigen::Index>(k), i); }
  auto point(std::size_t k) const { return values_.row(static_cast<Eigen::Index>(k)); }

 private:
  GridPtr grid_;
  PathMatrix values_;
};

/// a + X, pointwise.
inline VectorPath shift(const Vector& a, const VectorPath& X) {
  if (a.size() != X.dim())
    throw ValidationError("shift: initial vector dimension does not match path");
  if (!a.allFinite()) throw ValidationError("shift: non-finite entry in initial vector");
  PathMatrix v = X.values();
  v.rowwise() += a.transpose();
  return VectorPath(X.grid_ptr(), std::move(v));
}

/// Pathwise linear image A * X(t); A is m x n, X is n-dimensional.
inline VectorPath apply_matrix(const Matrix& A, const VectorPath& X) {
  if (A.cols() != X.dim()) throw ValidationError("apply_matrix: dimension mismatch");
  PathMatrix v = X.values() * A.transpose();
  return VectorPath(X.grid_ptr(), std::move(v));
}

}  // namespace reflect
