#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include <reflect/analysis.hpp>
#include <reflect/dynamic.hpp>
#include <reflect/errors.hpp>
#include <reflect/processes.hpp>
#include <reflect/routing.hpp>

namespace reflect::io {

using nlohmann::json;
using nlohmann::ordered_json;

namespace detail {

inline const json& need(const json& j, const char* key, const char* what) {
  const auto it = j.find(key);
  if (it == j.end())
    throw ValidationError(std::string(what) + ": missing field '" + key + "'");
  return *it;
}

inline double need_number(const json& j, const char* key, const char* what) {
  const json& v = need(j, key, what);
  if (!v.is_number()) throw ValidationError(std::string(what) + ": field '" + key + "' must be a number");
  return v.get<double>();
}

inline std::string need_string(const json& j, const char* key, const char* what) {
  const json& v = need(j, key, what);
  if (!v.is_string()) throw ValidationError(std::string(what) + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace detail

inline json vector_to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Vector vector_from_json(const json& j, const char* what = "vector") {
  if (!j.is_array() || j.empty())
    throw ValidationError(std::string(what) + ": expected a nonempty array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ValidationError(std::string(what) + ": entries must be numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

/// Square matrix: {"n": int, "entries": row-major array of n*n numbers}.
inline json matrix_to_json(const Matrix& M) {
  json j;
  j["n"] = M.rows();
  json e = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index k = 0; k < M.cols(); ++k) e.push_back(M(i, k));
  j["entries"] = e;
  return j;
}

inline Matrix matrix_from_json(const json& j, const char* what = "matrix") {
  if (!j.is_object()) throw ValidationError(std::string(what) + ": expected {\"n\", \"entries\"}");
  const json& nj = detail::need(j, "n", what);
  if (!nj.is_number_integer() || nj.get<long>() < 1)
    throw ValidationError(std::string(what) + ": 'n' must be a positive integer");
  const Eigen::Index n = nj.get<Eigen::Index>();
  const json& e = detail::need(j, "entries", what);
  if (!e.is_array() || e.size() != static_cast<std::size_t>(n * n))
    throw ValidationError(std::string(what) + ": 'entries' must hold n*n numbers, row-major");
  Matrix M(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k) {
      const json& cell = e[static_cast<std::size_t>(i * n + k)];
      if (!cell.is_number()) throw ValidationError(std::string(what) + ": matrix entries must be numbers");
      M(i, k) = cell.get<double>();
    }
  return M;
}

inline json distribution_to_json(const Distribution& d) {
  json j;
  switch (d.kind()) {
    case Distribution::Kind::Deterministic:
      j["kind"] = "deterministic";
      j["value"] = d.det_value();
      break;
    case Distribution::Kind::Exponential:
      j["kind"] = "exponential";
      j["rate"] = d.exp_rate();
      break;
    case Distribution::Kind::Uniform:
      j["kind"] = "uniform";
      j["lo"] = d.uni_lo();
      j["hi"] = d.uni_hi();
      break;
    case Distribution::Kind::Empirical:
      j["kind"] = "empirical";
      j["values"] = d.emp_values();
      j["probs"] = d.emp_probs();
      break;
  }
  return j;
}

inline Distribution distribution_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("distribution: expected an object tagged by 'kind'");
  const std::string kind = detail::need_string(j, "kind", "distribution");
  if (kind == "deterministic") return Distribution::deterministic(detail::need_number(j, "value", "distribution"));
  if (kind == "exponential") return Distribution::exponential(detail::need_number(j, "rate", "distribution"));
  if (kind == "uniform")
    return Distribution::uniform(detail::need_number(j, "lo", "distribution"),
                                 detail::need_number(j, "hi", "distribution"));
  if (kind == "empirical") {
    const json& v = detail::need(j, "values", "distribution");
    const json& p = detail::need(j, "probs", "distribution");
    if (!v.is_array() || !p.is_array())
      throw ValidationError("distribution: 'values' and 'probs' must be arrays");
    return Distribution::empirical(v.get<std::vector<double>>(), p.get<std::vector<double>>());
  }
  throw ValidationError("distribution: unknown kind '" + kind + "'");
}

namespace detail {

/// One law per coordinate; a single object broadcasts to all n coordinates.
inline std::vector<Distribution> law_list(const json& j, Eigen::Index n, const char* what) {
  std::vector<Distribution> out;
  if (j.is_object()) {
    out.assign(static_cast<std::size_t>(n), distribution_from_json(j));
    return out;
  }
  if (!j.is_array()) throw ValidationError(std::string(what) + ": expected a law or an array of laws");
  for (const auto& e : j) out.push_back(distribution_from_json(e));
  return out;
}

inline json law_list_to_json(const std::vector<Distribution>& laws) {
  json a = json::array();
  for (const auto& d : laws) a.push_back(distribution_to_json(d));
  return a;
}

}  // namespace detail

inline json process_to_json(const ProcessSpec& spec) {
  json j;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BrownianSpec>) {
          j["kind"] = "brownian";
          j["mu"] = vector_to_json(s.mu);
          j["sigma"] = matrix_to_json(s.sigma);
        } else if constexpr (std::is_same_v<T, LevyCPSpec>) {
          j["kind"] = "levy_cp";
          j["drift"] = vector_to_json(s.drift);
          j["jump_rate"] = vector_to_json(s.jump_rate);
          if (!s.jump.empty()) j["jump"] = detail::law_list_to_json(s.jump);
        } else if constexpr (std::is_same_v<T, MapSpec>) {
          j["kind"] = "map";
          j["Q"] = matrix_to_json(s.Q);
          json states = json::array();
          for (const MapState& st : s.states) {
            json sj;
            sj["drift"] = vector_to_json(st.drift);
            if (st.jump_rate.size() > 0) sj["jump_rate"] = vector_to_json(st.jump_rate);
            if (!st.jump.empty()) sj["jump"] = detail::law_list_to_json(st.jump);
            states.push_back(sj);
          }
          j["states"] = states;
          if (!s.transition_jumps.empty()) {
            json tjs = json::array();
            for (const TransitionJump& tj : s.transition_jumps) {
              json t;
              t["from"] = tj.from;
              t["to"] = tj.to;
              t["jump"] = detail::law_list_to_json(tj.jump);
              tjs.push_back(t);
            }
            j["transition_jumps"] = tjs;
          }
          j["initial_state"] = s.initial_state;
        } else if constexpr (std::is_same_v<T, RenewalRiskSpec>) {
          j["kind"] = "renewal_risk";
          j["premium"] = vector_to_json(s.premium);
          j["interarrival"] = detail::law_list_to_json(s.interarrival);
          j["claim"] = detail::law_list_to_json(s.claim);
        } else {
          j["kind"] = "fixture";
          j["name"] = s.name;
        }
      },
      spec);
  return j;
}

inline ProcessSpec process_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("process: expected an object tagged by 'kind'");
  const std::string kind = detail::need_string(j, "kind", "process");

  if (kind == "brownian") {
    BrownianSpec s;
    s.mu = vector_from_json(detail::need(j, "mu", "brownian"), "brownian mu");
    const Eigen::Index n = s.mu.size();
    const auto it = j.find("sigma");
    if (it == j.end()) {
      s.sigma = Matrix::Identity(n, n);
    } else if (it->is_number()) {
      s.sigma = it->get<double>() * Matrix::Identity(n, n);
    } else if (it->is_array()) {
      const Vector d = vector_from_json(*it, "brownian sigma");
      if (d.size() != n) throw ValidationError("brownian: sigma array length must match mu");
      s.sigma = d.asDiagonal();
    } else {
      s.sigma = matrix_from_json(*it, "brownian sigma");
    }
    validate(s);
    return s;
  }
  if (kind == "levy_cp") {
    LevyCPSpec s;
    s.drift = vector_from_json(detail::need(j, "drift", "levy_cp"), "levy_cp drift");
    s.jump_rate = vector_from_json(detail::need(j, "jump_rate", "levy_cp"), "levy_cp jump_rate");
    if (j.contains("jump")) s.jump = detail::law_list(j["jump"], s.drift.size(), "levy_cp jump");
    validate(s);
    return s;
  }
  if (kind == "map") {
    MapSpec s;
    s.Q = matrix_from_json(detail::need(j, "Q", "map"), "map Q");
    const json& states = detail::need(j, "states", "map");
    if (!states.is_array() || states.empty()) throw ValidationError("map: 'states' must be a nonempty array");
    Eigen::Index n = 0;
    for (const auto& sj : states) {
      MapState st;
      st.drift = vector_from_json(detail::need(sj, "drift", "map state"), "map state drift");
      if (n == 0) n = st.drift.size();
      if (sj.contains("jump_rate"))
        st.jump_rate = vector_from_json(sj["jump_rate"], "map state jump_rate");
      if (sj.contains("jump")) st.jump = detail::law_list(sj["jump"], n, "map state jump");
      s.states.push_back(std::move(st));
    }
    if (j.contains("transition_jumps")) {
      const json& tjs = j["transition_jumps"];
      if (!tjs.is_array()) throw ValidationError("map: 'transition_jumps' must be an array");
      for (const auto& t : tjs) {
        TransitionJump tj;
        tj.from = static_cast<int>(detail::need_number(t, "from", "transition jump"));
        tj.to = static_cast<int>(detail::need_number(t, "to", "transition jump"));
        tj.jump = detail::law_list(detail::need(t, "jump", "transition jump"), n, "transition jump");
        s.transition_jumps.push_back(std::move(tj));
      }
    }
    if (j.contains("initial_state")) {
      if (!j["initial_state"].is_number_integer())
        throw ValidationError("map: 'initial_state' must be an integer");
      s.initial_state = j["initial_state"].get<int>();
    }
    validate(s);
    return s;
  }
  if (kind == "renewal_risk") {
    RenewalRiskSpec s;
    const json& prem = detail::need(j, "premium", "renewal_risk");
    if (prem.is_number()) {
      s.premium = Vector::Constant(1, prem.get<double>());
    } else {
      s.premium = vector_from_json(prem, "renewal_risk premium");
    }
    const Eigen::Index n = s.premium.size();
    s.interarrival = detail::law_list(detail::need(j, "interarrival", "renewal_risk"), n, "renewal_risk interarrival");
    s.claim = detail::law_list(detail::need(j, "claim", "renewal_risk"), n, "renewal_risk claim");
    validate(s);
    return s;
  }
  if (kind == "fixture") {
    FixtureSpec s{detail::need_string(j, "name", "fixture")};
    validate(s);
    return s;
  }
  throw ValidationError("process: unknown kind '" + kind + "'");
}

/// Named coefficient families selectable from configs:
///   {"kind": "constant",            "P": matrix, "b": [..] (optional)}
///   {"kind": "time_ramp_drift",     "P": matrix, "b0": [..], "slope": [..], "t_cap": number}
///   {"kind": "state_damped_drift",  "P": matrix, "b0": [..], "damp": [..], "gain": [..]}
///   {"kind": "feedforward_constant","P": strictly-upper matrix, "b": [..] (optional)}
/// Each returns the coefficients plus a per-coordinate drift envelope
/// beta_i(s) >= b_i(s, 0, w).
struct CatalogEntry {
  DynamicCoefficients coeffs;
  EnvelopeFunction envelope;
};

inline CatalogEntry coefficients_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("coefficients: expected an object tagged by 'kind'");
  const std::string kind = detail::need_string(j, "kind", "coefficients");
  const RoutingMatrix P(matrix_from_json(detail::need(j, "P", "coefficients"), "coefficients P"));
  const int n = P.dim();
  auto opt_vec = [&](const char* key, double fallback) {
    if (!j.contains(key)) return Vector(Vector::Constant(n, fallback));
    Vector v = vector_from_json(j[key], key);
    if (v.size() != n) throw ValidationError(std::string("coefficients: '") + key + "' length must match P");
    return v;
  };

  CatalogEntry out;
  if (kind == "constant" || kind == "feedforward_constant") {
    const Vector b = opt_vec("b", 0.0);
    out.coeffs = DynamicCoefficients::make_constant(P, b);
    if (kind == "feedforward_constant" && !out.coeffs.feedforward)
      throw ValidationError("coefficients: feedforward_constant needs a strictly upper-triangular P");
    for (int i = 0; i < n; ++i)
      out.envelope.beta.push_back([v = b[i]](double) { return v; });
    out.envelope.beta_hat = b.maxCoeff();
    return out;
  }
  if (kind == "time_ramp_drift") {
    const Vector b0 = opt_vec("b0", 0.0);
    const Vector slope = opt_vec("slope", 0.0);
    const double t_cap = detail::need_number(j, "t_cap", "time_ramp_drift");
    if (!(t_cap >= 0.0) || !std::isfinite(t_cap))
      throw ValidationError("coefficients: t_cap must be finite and >= 0");
    DynamicCoefficients c;
    c.n = n;
    c.Pi = P.entries();
    c.time_only = true;
    c.l_independent = true;
    c.P = [M = P.entries()](double, const Vector&, const Vector&) { return M; };
    c.b = [b0, slope, t_cap](double t, const Vector&, const Vector&) -> Vector {
      return b0 + slope * std::min(t, t_cap);
    };
    c.lipschitz = slope.cwiseAbs().maxCoeff();
    out.coeffs = std::move(c);
    for (int i = 0; i < n; ++i)
      out.envelope.beta.push_back([a = b0[i], s = slope[i], t_cap](double t) {
        const double v = a + s * std::min(t, t_cap);
        return std::max(v, a);  // envelope must dominate for either slope sign
      });
    return out;
  }
  if (kind == "state_damped_drift") {
    const Vector b0 = opt_vec("b0", 0.0);
    const Vector damp = opt_vec("damp", 0.0);
    const Vector gain = opt_vec("gain", 0.0);
    if (damp.minCoeff() < 0.0 || gain.minCoeff() < 0.0)
      throw ValidationError("coefficients: damp and gain must be >= 0");
    DynamicCoefficients c;
    c.n = n;
    c.Pi = P.entries();
    c.P = [M = P.entries()](double, const Vector&, const Vector&) { return M; };
    // b_i = b0_i - damp_i * l_i/(1+l_i) + gain_i * w_i/(1+w_i):
    // nonincreasing in l, nondecreasing in w, Lipschitz with constant
    // max(damp, gain), bounded above by b0 + gain.
    c.b = [b0, damp, gain](double, const Vector& l, const Vector& w) -> Vector {
      Vector v = b0;
      for (Eigen::Index i = 0; i < v.size(); ++i)
        v[i] += -damp[i] * l[i] / (1.0 + l[i]) + gain[i] * w[i] / (1.0 + w[i]);
      return v;
    };
    c.lipschitz = std::max(damp.maxCoeff(), gain.maxCoeff());
    out.coeffs = std::move(c);
    for (int i = 0; i < n; ++i)
      out.envelope.beta.push_back([v = b0[i] + gain[i]](double) { return v; });
    out.envelope.beta_hat = (b0 + gain).maxCoeff();
    return out;
  }
  throw ValidationError("coefficients: unknown kind '" + kind + "' (expected constant, time_ramp_drift, state_damped_drift or feedforward_constant)");
}

inline json verdict_to_json(const ConditionVerdict& v) {
  json j;
  j["coordinate"] = v.coordinate;
  j["verdict"] = to_string(v.verdict);
  j["witness"] = v.witness;
  j["horizon"] = v.horizon;
  return j;
}

inline json json_from_text(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ValidationError(std::string(what) + ": invalid JSON");
  return j;
}

}  // namespace reflect::io
