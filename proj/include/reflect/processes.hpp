#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <reflect/errors.hpp>
#include <reflect/path.hpp>
#include <reflect/rng.hpp>

namespace reflect {

/// Scalar jump / interarrival / claim laws.
class Distribution {
 public:
  enum class Kind { Deterministic, Exponential, Uniform, Empirical };

  static Distribution deterministic(double value) {
    require(std::isfinite(value), "deterministic: value must be finite");
    Distribution d(Kind::Deterministic);
    d.a_ = value;
    return d;
  }
  static Distribution exponential(double rate) {
    require(std::isfinite(rate) && rate > 0.0, "exponential: rate must be positive");
    Distribution d(Kind::Exponential);
    d.a_ = rate;
    return d;
  }
  static Distribution uniform(double lo, double hi) {
    require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, "uniform: need lo < hi, finite");
    Distribution d(Kind::Uniform);
    d.a_ = lo;
    d.b_ = hi;
    return d;
  }
  static Distribution empirical(std::vector<double> values, std::vector<double> probs) {
    require(!values.empty() && values.size() == probs.size(),
            "empirical: values and probs must be nonempty and the same length");
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      require(std::isfinite(values[i]), "empirical: non-finite value");
      require(std::isfinite(probs[i]) && probs[i] >= 0.0, "empirical: probabilities must be >= 0");
      sum += probs[i];
    }
    require(std::abs(sum - 1.0) <= 1e-12, "empirical: probabilities must sum to 1");
    Distribution d(Kind::Empirical);
    d.values_ = std::move(values);
    d.cum_.resize(probs.size());
    double c = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      c += probs[i];
      d.cum_[i] = c;
    }
    d.cum_.back() = 1.0;
    d.probs_ = std::move(probs);
    return d;
  }

  Kind kind() const { return kind_; }

  double mean() const {
    switch (kind_) {
      case Kind::Deterministic: return a_;
      case Kind::Exponential: return 1.0 / a_;
      case Kind::Uniform: return 0.5 * (a_ + b_);
      case Kind::Empirical: {
        double m = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i) m += values_[i] * probs_[i];
        return m;
      }
    }
    return 0.0;
  }

  double sample(rng::Stream& s) const {
    switch (kind_) {
      case Kind::Deterministic: return a_;
      case Kind::Exponential: return s.exponential(a_);
      case Kind::Uniform: return a_ + (b_ - a_) * s.uniform01();
      case Kind::Empirical: {
        const double u = s.uniform01();
        std::size_t lo = 0, hi = cum_.size() - 1;
        while (lo < hi) {
          const std::size_t mid = (lo + hi) / 2;
          if (cum_[mid] > u) hi = mid; else lo = mid + 1;
        }
        return values_[lo];
      }
    }
    return 0.0;
  }

  /// Support contained in (0, inf) almost surely.
  bool strictly_positive() const {
    switch (kind_) {
      case Kind::Deterministic: return a_ > 0.0;
      case Kind::Exponential: return true;
      case Kind::Uniform: return a_ >= 0.0;
      case Kind::Empirical:
        for (std::size_t i = 0; i < values_.size(); ++i)
          if (probs_[i] > 0.0 && values_[i] <= 0.0) return false;
        return true;
    }
    return false;
  }

  // Parameter accessors (serialization).
  double det_value() const { return a_; }
  double exp_rate() const { return a_; }
  double uni_lo() const { return a_; }
  double uni_hi() const { return b_; }
  const std::vector<double>& emp_values() const { return values_; }
  const std::vector<double>& emp_probs() const { return probs_; }

 private:
  explicit Distribution(Kind k) : kind_(k) {}
  static void require(bool ok, const char* msg) {
    if (!ok) throw ValidationError(std::string("Distribution: ") + msg);
  }
  Kind kind_;
  double a_ = 0.0, b_ = 0.0;
  std::vector<double> values_, probs_, cum_;
};

/// Gaussian component: increments have mean mu*dt and covariance
/// (sigma sigma^t) dt. `sigma` is the factor, not the covariance.
struct BrownianSpec {
  Vector mu;
  Matrix sigma;
};

/// Per-coordinate drift plus independent compound-Poisson jumps. `jump`
/// holds one law per coordinate (may be empty when all rates are zero).
struct LevyCPSpec {
  Vector drift;
  Vector jump_rate;
  std::vector<Distribution> jump;
};

struct MapState {
  Vector drift;
  Vector jump_rate;                // empty means all-zero
  std::vector<Distribution> jump;  // one per coordinate when rates > 0
};

/// Extra jump applied when the modulating chain moves from `from` to `to`;
/// one scalar law per path coordinate, coordinates independent.
struct TransitionJump {
  int from = 0;
  int to = 0;
  std::vector<Distribution> jump;
};

/// Markov-additive input: CTMC with generator Q modulates per-state
/// drift/compound-Poisson parameters; transition jumps fire at switches.
struct MapSpec {
  Matrix Q;
  std::vector<MapState> states;
  std::vector<TransitionJump> transition_jumps;
  int initial_state = 0;
};

/// X_i(t) = premium_i * t - sum of claims arriving at renewal times.
struct RenewalRiskSpec {
  Vector premium;
  std::vector<Distribution> interarrival;
  std::vector<Distribution> claim;
};

/// Named deterministic test path.
struct FixtureSpec {
  std::string name;  // "ramp" or "sine_pair"
};

using ProcessSpec = std::variant<BrownianSpec, LevyCPSpec, MapSpec, RenewalRiskSpec, FixtureSpec>;

namespace detail {

// Stream component tags; coordinate / state indices are appended after these.
inline constexpr std::uint64_t kTagBrownian = 1;
inline constexpr std::uint64_t kTagCPTimes = 2;
inline constexpr std::uint64_t kTagCPJumps = 3;
inline constexpr std::uint64_t kTagChain = 4;
inline constexpr std::uint64_t kTagMapCPTimes = 5;
inline constexpr std::uint64_t kTagMapCPJumps = 6;
inline constexpr std::uint64_t kTagSwitchJump = 7;
inline constexpr std::uint64_t kTagRenewalArrivals = 8;
inline constexpr std::uint64_t kTagRenewalClaims = 9;

inline void check_cp_block(const Vector& rate, const std::vector<Distribution>& jump,
                           Eigen::Index n, const char* who) {
  if (rate.size() != 0 && rate.size() != n)
    throw ValidationError(std::string(who) + ": jump_rate length must match dimension");
  for (Eigen::Index i = 0; i < rate.size(); ++i)
    if (!std::isfinite(rate[i]) || rate[i] < 0.0)
      throw ValidationError(std::string(who) + ": jump rates must be finite and >= 0");
  const bool any_rate = rate.size() > 0 && rate.maxCoeff() > 0.0;
  if (any_rate && jump.size() != static_cast<std::size_t>(n))
    throw ValidationError(std::string(who) + ": need one jump law per coordinate");
  if (!jump.empty() && jump.size() != static_cast<std::size_t>(n))
    throw ValidationError(std::string(who) + ": jump law list length must match dimension");
}

}  // namespace detail

inline int process_dim(const ProcessSpec& spec) {
  return std::visit(
      [](const auto& s) -> int {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BrownianSpec>) return static_cast<int>(s.mu.size());
        else if constexpr (std::is_same_v<T, LevyCPSpec>) return static_cast<int>(s.drift.size());
        else if constexpr (std::is_same_v<T, MapSpec>)
          return s.states.empty() ? 0 : static_cast<int>(s.states.front().drift.size());
        else if constexpr (std::is_same_v<T, RenewalRiskSpec>) return static_cast<int>(s.premium.size());
        else return s.name == "sine_pair" ? 2 : 1;
      },
      spec);
}

inline void validate(const BrownianSpec& s) {
  const Eigen::Index n = s.mu.size();
  if (n < 1) throw ValidationError("brownian: mu must be nonempty");
  if (!s.mu.allFinite()) throw ValidationError("brownian: non-finite drift");
  if (s.sigma.rows() != n || s.sigma.cols() != n)
    throw ValidationError("brownian: sigma must be n x n");
  if (!s.sigma.allFinite()) throw ValidationError("brownian: non-finite sigma");
}

inline void validate(const LevyCPSpec& s) {
  const Eigen::Index n = s.drift.size();
  if (n < 1) throw ValidationError("levy_cp: drift must be nonempty");
  if (!s.drift.allFinite()) throw ValidationError("levy_cp: non-finite drift");
  if (s.jump_rate.size() != n) throw ValidationError("levy_cp: jump_rate length must match drift");
  detail::check_cp_block(s.jump_rate, s.jump, n, "levy_cp");
}

inline void validate(const MapSpec& s) {
  const Eigen::Index m = s.Q.rows();
  if (m < 1 || s.Q.cols() != m) throw ValidationError("map: Q must be square and nonempty");
  if (!s.Q.allFinite()) throw ValidationError("map: non-finite Q entry");
  for (Eigen::Index i = 0; i < m; ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i != j && s.Q(i, j) < 0.0) throw ValidationError("map: off-diagonal Q entries must be >= 0");
      row += s.Q(i, j);
    }
    if (std::abs(row) > 1e-9 * std::max(1.0, s.Q.row(i).cwiseAbs().maxCoeff()))
      throw ValidationError("map: Q row sums must vanish (conservative generator)");
  }
  if (s.states.size() != static_cast<std::size_t>(m))
    throw ValidationError("map: need one state parameter block per chain state");
  const Eigen::Index n = s.states.front().drift.size();
  if (n < 1) throw ValidationError("map: state drift must be nonempty");
  for (const MapState& st : s.states) {
    if (st.drift.size() != n) throw ValidationError("map: state drift dimensions differ");
    if (!st.drift.allFinite()) throw ValidationError("map: non-finite state drift");
    detail::check_cp_block(st.jump_rate, st.jump, n, "map state");
  }
  for (const TransitionJump& tj : s.transition_jumps) {
    if (tj.from < 0 || tj.from >= m || tj.to < 0 || tj.to >= m || tj.from == tj.to)
      throw ValidationError("map: transition jump indices out of range or on the diagonal");
    if (tj.jump.size() != static_cast<std::size_t>(n))
      throw ValidationError("map: transition jump needs one law per coordinate");
  }
  if (s.initial_state < 0 || s.initial_state >= m)
    throw ValidationError("map: initial_state out of range");
}

inline void validate(const RenewalRiskSpec& s) {
  const Eigen::Index n = s.premium.size();
  if (n < 1) throw ValidationError("renewal_risk: premium must be nonempty");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!std::isfinite(s.premium[i]) || s.premium[i] <= 0.0)
      throw ValidationError("renewal_risk: premiums must be positive");
  if (s.interarrival.size() != static_cast<std::size_t>(n) ||
      s.claim.size() != static_cast<std::size_t>(n))
    throw ValidationError("renewal_risk: need one interarrival and one claim law per coordinate");
  for (const auto& d : s.interarrival)
    if (!d.strictly_positive())
      throw ValidationError("renewal_risk: interarrival laws must have strictly positive support");
  for (const auto& d : s.claim)
    if (!d.strictly_positive())
      throw ValidationError("renewal_risk: claim laws must have strictly positive support");
}

inline void validate(const FixtureSpec& s) {
  if (s.name != "ramp" && s.name != "sine_pair")
    throw ValidationError("fixture: unknown name '" + s.name + "' (expected ramp or sine_pair)");
}

inline void validate(const ProcessSpec& spec) {
  std::visit([](const auto& s) { validate(s); }, spec);
}

/// Critical premium vector c_i = E(claim_i) / E(interarrival_i), the premium
/// at which coordinate i's net drift is exactly zero.
inline Vector critical_premium(const RenewalRiskSpec& s) {
  validate(s);
  Vector c(s.premium.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const double ma = s.interarrival[static_cast<std::size_t>(i)].mean();
    if (!(ma > 0.0))
      throw ValidationError("critical_premium: interarrival law must have positive mean");
    c[i] = s.claim[static_cast<std::size_t>(i)].mean() / ma;
  }
  return c;
}

/// Deterministic named fixtures.
///   ramp:      n = 1, X(t) = -min(t, 1)
///   sine_pair: n = 2, X_1(t) = -t|sin t|, X_2(t) = +t|sin t|  (X_1 + X_2 = 0)
inline VectorPath fixture(const std::string& name, GridPtr grid) {
  FixtureSpec fs{name};
  validate(fs);
  if (!grid) throw ValidationError("fixture: null grid");
  const Eigen::Index K1 = static_cast<Eigen::Index>(grid->size());
  if (name == "ramp") {
    PathMatrix v(K1, 1);
    for (Eigen::Index k = 0; k < K1; ++k) v(k, 0) = -std::min((*grid)[static_cast<std::size_t>(k)], 1.0);
    return VectorPath(std::move(grid), std::move(v));
  }
  PathMatrix v(K1, 2);
  for (Eigen::Index k = 0; k < K1; ++k) {
    const double t = (*grid)[static_cast<std::size_t>(k)];
    const double s = t * std::abs(std::sin(t));
    v(k, 0) = -s;
    v(k, 1) = s;
  }
  return VectorPath(std::move(grid), std::move(v));
}

namespace detail {

/// Adds one compound-Poisson coordinate's events on (0, horizon], each event
/// applied at the first grid point at or after its time.
inline void add_cp_events(std::vector<double>& delta, const TimeGrid& grid, double t_begin,
                          double t_end, double rate, const Distribution& law,
                          rng::Stream& times, rng::Stream& jumps) {
  if (rate <= 0.0) return;
  double tau = t_begin + times.exponential(rate);
  while (tau <= t_end) {
    const std::size_t idx = grid.first_at_or_after(tau);
    if (idx < grid.size()) delta[idx] += law.sample(jumps);
    tau += times.exponential(rate);
  }
}

inline VectorPath finalize_drift_plus_deltas(GridPtr grid, const Matrix& drift_integral,
                                             const std::vector<std::vector<double>>& delta) {
  const Eigen::Index K1 = static_cast<Eigen::Index>(grid->size());
  const Eigen::Index n = drift_integral.cols();
  PathMatrix v(K1, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double cum = 0.0;
    for (Eigen::Index k = 0; k < K1; ++k) {
      cum += delta[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      v(k, i) = drift_integral(k, i) + cum;
    }
  }
  return VectorPath(std::move(grid), std::move(v));
}

inline VectorPath generate_brownian(const BrownianSpec& s, GridPtr grid, std::uint64_t seed) {
  const Eigen::Index n = s.mu.size();
  const Eigen::Index K1 = static_cast<Eigen::Index>(grid->size());
  std::vector<rng::Stream> gauss;
  gauss.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    gauss.push_back(rng::make_stream(seed, {kTagBrownian, static_cast<std::uint64_t>(i)}));
  PathMatrix v(K1, n);
  v.row(0).setZero();
  Vector z(n), incr(n);
  for (Eigen::Index k = 1; k < K1; ++k) {
    const double dt = grid->step(static_cast<std::size_t>(k - 1));
    const double sq = std::sqrt(dt);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = gauss[static_cast<std::size_t>(i)].normal();
    incr.noalias() = s.sigma * z;
    v.row(k) = v.row(k - 1) + (s.mu * dt + sq * incr).transpose();
  }
  return VectorPath(std::move(grid), std::move(v));
}

inline VectorPath generate_levy_cp(const LevyCPSpec& s, GridPtr grid, std::uint64_t seed) {
  const Eigen::Index n = s.drift.size();
  const Eigen::Index K1 = static_cast<Eigen::Index>(grid->size());
  Matrix drift_integral(K1, n);
  for (Eigen::Index k = 0; k < K1; ++k)
    drift_integral.row(k) = s.drift.transpose() * (*grid)[static_cast<std::size_t>(k)];
  std::vector<std::vector<double>> delta(static_cast<std::size_t>(n),
                                         std::vector<double>(static_cast<std::size_t>(K1), 0.0));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (s.jump_rate[i] <= 0.0) continue;
    auto times = rng::make_stream(seed, {kTagCPTimes, static_cast<std::uint64_t>(i)});
    auto jumps = rng::make_stream(seed, {kTagCPJumps, static_cast<std::uint64_t>(i)});
    add_cp_events(delta[static_cast<std::size_t>(i)], *grid, 0.0, grid->horizon(), s.jump_rate[i],
                  s.jump[static_cast<std::size_t>(i)], times, jumps);
  }
  return finalize_drift_plus_deltas(std::move(grid), drift_integral, delta);
}

inline VectorPath generate_map(const MapSpec& s, GridPtr grid, std::uint64_t seed) {
  const Eigen::Index m = s.Q.rows();
  const Eigen::Index n = s.states.front().drift.size();
  const double horizon = grid->horizon();

  // Chain trajectory: intervals [start, end) with a constant state.
  struct Interval {
    double start, end;
    int state;
  };
  std::vector<Interval> intervals;
  auto chain = rng::make_stream(seed, {kTagChain});
  double t = 0.0;
  int state = s.initial_state;
  while (t < horizon) {
    double offsum = 0.0;
    for (Eigen::Index j = 0; j < m; ++j)
      if (j != state) offsum += s.Q(state, j);
    double end = horizon;
    if (offsum > 0.0) end = t + chain.exponential(offsum);
    if (end >= horizon) {
      intervals.push_back({t, horizon, state});
      break;
    }
    intervals.push_back({t, end, state});
    const double u = chain.uniform01() * offsum;
    double acc = 0.0;
    int next = state;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j == state) continue;
      acc += s.Q(state, j);
      if (u < acc) {
        next = static_cast<int>(j);
        break;
      }
    }
    if (next == state) {  // u landed on the top edge by rounding
      for (Eigen::Index j = m - 1; j >= 0; --j)
        if (j != state) {
          next = static_cast<int>(j);
          break;
        }
    }
    t = end;
    state = next;
  }

  // Exact drift integral at grid points, swept against the interval list.
  const Eigen::Index K1 = static_cast<Eigen::Index>(grid->size());
  Matrix drift_integral = Matrix::Zero(K1, n);
  {
    std::size_t iv = 0;
    Vector cum = Vector::Zero(n);
    for (Eigen::Index k = 1; k < K1; ++k) {
      const double a = (*grid)[static_cast<std::size_t>(k - 1)];
      const double b = (*grid)[static_cast<std::size_t>(k)];
      double pos = a;
      while (pos < b) {
        while (iv + 1 < intervals.size() && intervals[iv].end <= pos) ++iv;
        const Interval& cur = intervals[iv];
        const double upto = std::min(b, cur.end > pos ? cur.end : b);
        cum += s.states[static_cast<std::size_t>(cur.state)].drift * (upto - pos);
        pos = upto;
      }
      drift_integral.row(k) = cum.transpose();
    }
  }

  std::vector<std::vector<double>> delta(static_cast<std::size_t>(n),
                                         std::vector<double>(static_cast<std::size_t>(K1), 0.0));

  // Per-state compound Poisson, streams per (state, coordinate).
  std::vector<std::vector<rng::Stream>> cp_times, cp_jumps;
  for (Eigen::Index st = 0; st < m; ++st) {
    std::vector<rng::Stream> row_t, row_j;
    for (Eigen::Index i = 0; i < n; ++i) {
      row_t.push_back(rng::make_stream(
          seed, {kTagMapCPTimes, static_cast<std::uint64_t>(st), static_cast<std::uint64_t>(i)}));
      row_j.push_back(rng::make_stream(
          seed, {kTagMapCPJumps, static_cast<std::uint64_t>(st), static_cast<std::uint64_t>(i)}));
    }
    cp_times.push_back(std::move(row_t));
    cp_jumps.push_back(std::move(row_j));
  }
  for (const Interval& iv : intervals) {
    const MapState& st = s.states[static_cast<std::size_t>(iv.state)];
    if (st.jump_rate.size() == 0) continue;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (st.jump_rate[i] <= 0.0) continue;
      add_cp_events(delta[static_cast<std::size_t>(i)], *grid, iv.start, iv.end, st.jump_rate[i],
                    st.jump[static_cast<std::size_t>(i)],
                    cp_times[static_cast<std::size_t>(iv.state)][static_cast<std::size_t>(i)],
                    cp_jumps[static_cast<std::size_t>(iv.state)][static_cast<std::size_t>(i)]);
    }
  }

  // Transition jumps at switch instants.
  if (!s.transition_jumps.empty()) {
    std::vector<std::vector<rng::Stream>> gstreams;
    for (const TransitionJump& tj : s.transition_jumps) {
      std::vector<rng::Stream> row;
      const std::uint64_t pair_tag =
          static_cast<std::uint64_t>(tj.from) * static_cast<std::uint64_t>(m) +
          static_cast<std::uint64_t>(tj.to);
      for (Eigen::Index i = 0; i < n; ++i)
        row.push_back(rng::make_stream(seed, {kTagSwitchJump, pair_tag, static_cast<std::uint64_t>(i)}));
      gstreams.push_back(std::move(row));
    }
    for (std::size_t v = 0; v + 1 < intervals.size(); ++v) {
      const int from = intervals[v].state;
      const int to = intervals[v + 1].state;
      const double when = intervals[v].end;
      for (std::size_t g = 0; g < s.transition_jumps.size(); ++g) {
        const TransitionJump& tj = s.transition_jumps[g];
        if (tj.from != from || tj.to != to) continue;
        const std::size_t idx = grid->first_at_or_after(when);
        if (idx < grid->size())
          for (Eigen::Index i = 0; i < n; ++i)
            delta[static_cast<std::size_t>(i)][idx] +=
                tj.jump[static_cast<std::size_t>(i)].sample(gstreams[g][static_cast<std::size_t>(i)]);
      }
    }
  }

  return finalize_drift_plus_deltas(std::move(grid), drift_integral, delta);
}

inline VectorPath generate_renewal(const RenewalRiskSpec& s, GridPtr grid, std::uint64_t seed) {
  const Eigen::Index n = s.premium.size();
  const Eigen::Index K1 = static_cast<Eigen::Index>(grid->size());
  Matrix drift_integral(K1, n);
  for (Eigen::Index k = 0; k < K1; ++k)
    drift_integral.row(k) = s.premium.transpose() * (*grid)[static_cast<std::size_t>(k)];
  std::vector<std::vector<double>> delta(static_cast<std::size_t>(n),
                                         std::vector<double>(static_cast<std::size_t>(K1), 0.0));
  const double horizon = grid->horizon();
  for (Eigen::Index i = 0; i < n; ++i) {
    auto arr = rng::make_stream(seed, {kTagRenewalArrivals, static_cast<std::uint64_t>(i)});
    auto clm = rng::make_stream(seed, {kTagRenewalClaims, static_cast<std::uint64_t>(i)});
    const Distribution& A = s.interarrival[static_cast<std::size_t>(i)];
    const Distribution& U = s.claim[static_cast<std::size_t>(i)];
    double tau = A.sample(arr);
    while (tau <= horizon) {
      const std::size_t idx = grid->first_at_or_after(tau);
      if (idx < grid->size()) delta[static_cast<std::size_t>(i)][idx] -= U.sample(clm);
      tau += A.sample(arr);
    }
  }
  return finalize_drift_plus_deltas(std::move(grid), drift_integral, delta);
}

}  // namespace detail

/// Samples the process at the grid points; X(0) = 0 for every law. The
/// output is a deterministic function of (spec, grid, seed): streams are
/// derived per component and per coordinate, so edits to one coordinate's
/// law leave the draws of every other coordinate untouched.
inline VectorPath generate(const ProcessSpec& spec, GridPtr grid, std::uint64_t seed) {
  validate(spec);
  if (!grid) throw ValidationError("generate: null grid");
  return std::visit(
      [&](const auto& s) -> VectorPath {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BrownianSpec>) return detail::generate_brownian(s, grid, seed);
        else if constexpr (std::is_same_v<T, LevyCPSpec>) return detail::generate_levy_cp(s, grid, seed);
        else if constexpr (std::is_same_v<T, MapSpec>) return detail::generate_map(s, grid, seed);
        else if constexpr (std::is_same_v<T, RenewalRiskSpec>) return detail::generate_renewal(s, grid, seed);
        else return fixture(s.name, grid);
      },
      spec);
}

}  // namespace reflect
