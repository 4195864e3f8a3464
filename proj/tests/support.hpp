#pragma once

// Shared test helpers: a complete audit of a reflection solution against the
// discrete system requirements, and a seeded random instance generator.
// Catch-free so the acceptance driver can reuse both.

#include <reflect/path.hpp>
#include <reflect/reflection.hpp>
#include <reflect/rng.hpp>
#include <reflect/routing.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

namespace support {

using reflect::GridPtr;
using reflect::Matrix;
using reflect::PathMatrix;
using reflect::RoutingMatrix;
using reflect::TimeGrid;
using reflect::Vector;
using reflect::VectorPath;

// Worst violation of each of the four requirements that jointly pin down the
// least-element solution: the defining equation, W >= 0, L nondecreasing from
// 0, and pushing only while the pushed coordinate sits at 0. The LCP matrix is
// a nonsingular M-matrix, so any pair passing all four IS the solution; a
// small worst() certifies a solve against nothing but the problem statement.
struct Audit {
  double equation = 0.0;
  double negativity = 0.0;
  double monotonicity = 0.0;
  double complementarity = 0.0;
  double worst() const {
    return std::max(std::max(equation, negativity), std::max(monotonicity, complementarity));
  }
};

// gate: regulator increments above it count as pushing steps.
inline Audit audit_solution(const VectorPath& X, const Matrix& P, const PathMatrix& W,
                            const PathMatrix& L, double gate) {
  const auto n = P.rows();
  Audit a;
  const PathMatrix E = W - X.values() - L * (Matrix::Identity(n, n) - P);
  a.equation = E.cwiseAbs().maxCoeff();
  a.negativity = std::max(0.0, -W.minCoeff());
  for (Eigen::Index k = 0; k < L.rows(); ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double dl = k == 0 ? L(0, i) : L(k, i) - L(k - 1, i);
      if (-dl > a.monotonicity) a.monotonicity = -dl;
      if (dl > gate && W(k, i) > a.complementarity) a.complementarity = W(k, i);
    }
  }
  return a;
}

inline Audit audit_solution(const VectorPath& X, const RoutingMatrix& P,
                            const reflect::ReflectionSolution& sol, double gate) {
  return audit_solution(X, P.entries(), sol.W.values(), sol.L.values(), gate);
}

inline GridPtr uniform_grid(std::size_t steps, double dt) {
  std::vector<double> times(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) times[k] = static_cast<double>(k) * dt;
  return std::make_shared<const TimeGrid>(std::move(times));
}

inline double sup_diff(const PathMatrix& a, const PathMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

// Largest increase of any coordinate between consecutive rows; <= tol means
// the path is nonincreasing up to tol.
inline double max_increase(const PathMatrix& m) {
  double worst = 0.0;
  for (Eigen::Index k = 1; k < m.rows(); ++k) {
    const double inc = (m.row(k) - m.row(k - 1)).maxCoeff();
    if (inc > worst) worst = inc;
  }
  return worst;
}

struct Instance {
  RoutingMatrix P;
  VectorPath X;
};

struct InstanceOptions {
  int max_dim = 5;
  std::size_t min_steps = 3;
  std::size_t max_steps = 400;
  double max_radius = 0.9;
  bool negative_start = true;  // X(0) may have negative coordinates
};

// Nonnegative zero-diagonal matrix scaled to a uniformly drawn target radius
// (sparse masks can make it nilpotent; those stay at radius 0), paired with a
// random-walk path whose drift and volatility vary per instance.
inline Instance random_instance(std::uint64_t seed, const InstanceOptions& opt = {}) {
  auto s = reflect::rng::make_stream(seed, {0x7e57u});
  const int n = 1 + static_cast<int>(s.next_u64() % static_cast<std::uint64_t>(opt.max_dim));

  Matrix P = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double keep = s.uniform01();
      const double mag = s.uniform01();
      if (keep >= 0.4) P(i, j) = mag;
    }
  const double rho0 = reflect::spectral_radius(P);
  const double target = opt.max_radius * s.uniform01();
  if (rho0 > 0.0) P *= target / rho0;

  const std::size_t span = opt.max_steps - opt.min_steps;
  const std::size_t K =
      opt.min_steps +
      static_cast<std::size_t>(std::exp(s.uniform01() * std::log(static_cast<double>(span) + 1.0))) -
      1;
  const double dt = std::exp(std::log(1e-3) + s.uniform01() * std::log(1e2));
  GridPtr grid = uniform_grid(K, dt);

  Vector drift(n), vol(n);
  for (int i = 0; i < n; ++i) {
    drift[i] = -2.0 + 3.0 * s.uniform01();
    vol[i] = 0.2 + 1.8 * s.uniform01();
  }
  PathMatrix vals(K + 1, n);
  const bool from_zero = !opt.negative_start || s.uniform01() < 0.5;
  for (int i = 0; i < n; ++i) vals(0, i) = from_zero ? 0.0 : 2.0 * s.uniform01() - 1.0;
  const double sdt = std::sqrt(dt);
  for (std::size_t k = 1; k <= K; ++k)
    for (int i = 0; i < n; ++i)
      vals(k, i) = vals(k - 1, i) + drift[i] * dt + vol[i] * sdt * s.normal();

  return Instance{RoutingMatrix(P), VectorPath(grid, std::move(vals))};
}

// Deterministic nonnegative vector for shift experiments; index 0 gives 0,
// indices 1..n give unit vectors, higher indices random nonnegative.
inline Vector shift_vector(int n, int index, std::uint64_t seed) {
  Vector a = Vector::Zero(n);
  if (index == 0) return a;
  if (index <= n) {
    a[index - 1] = 1.0;
    return a;
  }
  auto s = reflect::rng::make_stream(seed, {0x5f1fu, static_cast<std::uint64_t>(index)});
  for (int i = 0; i < n; ++i) a[i] = 2.0 * s.uniform01();
  return a;
}

}  // namespace support
