// Copyright 2026 The privshare Authors
// SPDX-License-Identifier: Apache-2.0

// JSON boundary shared by the command-line tool and the HTTP service.
// Requires nlohmann/json.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "privshare/closed_form.hpp"
#include "privshare/dual_solver.hpp"
#include "privshare/error.hpp"
#include "privshare/geometry.hpp"
#include "privshare/instance.hpp"
#include "privshare/oracle.hpp"
#include "privshare/solve_auto.hpp"
#include "privshare/tradeoff.hpp"

namespace privshare {

using Json = nlohmann::ordered_json;

/// Serializes with fixed key order and 17 significant digits per number.
inline void canonical_dump(const Json& j, std::string& out) {
  switch (j.type()) {
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += Json(it.key()).dump();
        out += ':';
        canonical_dump(it.value(), out);
      }
      out += '}';
      break;
    }
    case Json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        canonical_dump(j[i], out);
      }
      out += ']';
      break;
    }
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      if (std::isfinite(x)) {
        out += format_double(x);
      } else {
        out += "null";
      }
      break;
    }
    default:
      out += j.dump();
  }
}

inline std::string canonical_dump(const Json& j) {
  std::string out;
  canonical_dump(j, out);
  return out;
}

/// Reads an instance object {"categories", "q", "p", "w"}; categories may be
/// omitted.
inline Instance instance_from_json(const Json& j) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kInvalidArgument, "instance must be an object");
  }
  Instance in;
  auto numbers = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_array()) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string("instance needs an array \"") + key + "\"");
    }
    std::vector<double> v;
    for (const auto& x : j[key]) {
      if (!x.is_number()) {
        throw Error(ErrorCode::kInvalidArgument,
                    std::string("non-numeric entry in \"") + key + "\"");
      }
      v.push_back(x.get<double>());
    }
    return v;
  };
  in.q = numbers("q");
  in.p = numbers("p");
  in.w = numbers("w");
  if (j.contains("categories")) {
    if (!j["categories"].is_array()) {
      throw Error(ErrorCode::kInvalidArgument, "categories must be an array");
    }
    for (const auto& c : j["categories"]) {
      if (!c.is_string()) {
        throw Error(ErrorCode::kInvalidArgument, "category labels are strings");
      }
      in.categories.push_back(c.get<std::string>());
    }
  }
  return in;
}

inline Json instance_to_json(const Instance& in) {
  Json j;
  j["categories"] = in.categories;
  j["q"] = in.q;
  j["p"] = in.p;
  j["w"] = in.w;
  return j;
}

/// FNV-1a over the canonical serialization of the instance.
inline std::string instance_hash(const Instance& in) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_dump(instance_to_json(in))) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct SolveRequest {
  Instance instance;
  Kind kind = Kind::kSed;
  double mu = 0.0;
  ValidationMode mode = ValidationMode::kStrict;
  MethodChoice method = MethodChoice::kAuto;
};

inline Kind kind_from_string(const std::string& s) {
  const auto k = parse_kind(s);
  if (!k) throw Error(ErrorCode::kInvalidArgument, "unknown kind \"" + s + "\"");
  return *k;
}

inline ValidationMode mode_from_string(const std::string& s) {
  if (s == "strict") return ValidationMode::kStrict;
  if (s == "lenient") return ValidationMode::kLenient;
  throw Error(ErrorCode::kInvalidArgument, "unknown mode \"" + s + "\"");
}

inline MethodChoice method_from_string(const std::string& s) {
  const auto m = parse_method(s);
  if (!m) throw Error(ErrorCode::kInvalidArgument, "unknown method \"" + s + "\"");
  return *m;
}

namespace detail {

inline const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("request needs \"") + key + "\"");
  }
  return j[key];
}

inline std::string string_field(const Json& j, const char* key,
                                const char* fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("\"") + key + "\" must be a string");
  }
  return j[key].get<std::string>();
}

}  // namespace detail

inline SolveRequest solve_request_from_json(const Json& j) {
  SolveRequest r;
  r.instance = instance_from_json(detail::field(j, "instance"));
  const Json& kind = detail::field(j, "kind");
  if (!kind.is_string()) throw Error(ErrorCode::kInvalidArgument, "kind must be a string");
  r.kind = kind_from_string(kind.get<std::string>());
  const Json& mu = detail::field(j, "mu");
  if (!mu.is_number()) throw Error(ErrorCode::kInvalidArgument, "mu must be a number");
  r.mu = mu.get<double>();
  r.mode = mode_from_string(detail::string_field(j, "mode", "strict"));
  r.method = method_from_string(detail::string_field(j, "method", "auto"));
  return r;
}

/// Solution on the full instance, handling zero-difference categories in
/// lenient mode by absorbing them before the solve.
inline Solution solve_request(const SolveRequest& req) {
  const auto v = validate_instance(req.instance, req.mode);
  const Instance& in = v.instance;
  if (v.zero_set.empty()) return solve_with(req.kind, in, req.mu, req.method);

  const auto abs = absorb_zero_difference(in, v.zero_set, req.mu);
  Solution full;
  full.mu = req.mu;
  full.delta.assign(in.size(), 0.0);
  for (const auto& [i, d] : abs.prefilled) full.delta[i] = d;
  if (abs.kept.size() >= 2) {
    const Solution part =
        solve_with(req.kind, abs.restricted, abs.residual_mu, req.method);
    for (std::size_t r = 0; r < abs.kept.size(); ++r) {
      full.delta[abs.kept[r]] = part.delta[r];
    }
    full.gamma = part.gamma;
    full.method = part.method;
  }
  full.t = apparent_profile(in, full.delta);
  full.risk = risk(req.kind, full.t, in.p);
  full.activity.resize(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double d = full.delta[i];
    full.activity[i] = d <= 0.0   ? Activity::kZero
                       : d >= 1.0 ? Activity::kOne
                                  : Activity::kInterior;
  }
  return full;
}

inline Json activity_json(const std::vector<Activity>& a) {
  Json j = Json::array();
  for (auto x : a) j.push_back(std::string(to_string(x)));
  return j;
}

inline Json solve_response(const SolveRequest& req) {
  const Solution s = solve_request(req);
  const Instance in = validate_instance(req.instance, req.mode).instance;
  const double full = risk(req.kind, in.q, in.p);
  double pmf = 0.0, money = -s.mu;
  const auto a = difference(in);
  for (std::size_t i = 0; i < in.size(); ++i) {
    pmf += a[i] * s.delta[i];
    money += in.w[i] * s.delta[i];
  }
  Json j;
  j["instance_hash"] = instance_hash(in);
  j["kind"] = std::string(to_string(req.kind));
  j["mu"] = s.mu;
  j["method"] = std::string(to_string(s.method));
  j["delta"] = s.delta;
  j["t"] = s.t;
  j["risk"] = s.risk;
  j["risk_ratio"] = full > 0.0 ? s.risk / full : 0.0;
  j["alpha"] = s.gamma.alpha;
  j["beta"] = s.gamma.beta;
  j["activity"] = activity_json(s.activity);
  j["residuals"] = Json{{"pmf", pmf}, {"money", money}};
  return j;
}

inline Json error_json(ErrorCode code, const std::string& message) {
  Json j;
  j["error"] = Json{{"code", std::string(to_string(code))}, {"message", message}};
  return j;
}

inline Json error_json(const Error& e) { return error_json(e.code(), e.detail()); }

/// Process exit status for an error.
inline int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOfferOutOfRange:
    case ErrorCode::kOfferExceedsMax:
      return 3;
    case ErrorCode::kNoConvergence:
      return 4;
    default:
      return 2;
  }
}

/// HTTP status for an error: malformed requests are 400, requests that
/// parse but violate the model are 422.
inline int http_status(ErrorCode code) {
  return code == ErrorCode::kInvalidArgument ? 400 : 422;
}

inline Json curve_json(const TradeoffCurve& c) {
  Json j;
  j["instance_hash"] = instance_hash(c.instance);
  j["kind"] = std::string(to_string(c.kind));
  Json pts = Json::array();
  for (const auto& p : c.points) {
    Json q;
    q["mu"] = p.mu();
    q["risk"] = p.risk();
    q["delta"] = p.solution.delta;
    q["alpha"] = p.solution.gamma.alpha;
    q["beta"] = p.solution.gamma.beta;
    q["activity"] = activity_json(p.solution.activity);
    q["method"] = std::string(to_string(p.solution.method));
    q["on_grid"] = p.on_grid;
    pts.push_back(std::move(q));
  }
  j["points"] = std::move(pts);
  j["breakpoints"] = c.breakpoints;
  return j;
}

inline Json point_json(DualPoint g) { return Json::array({g.alpha, g.beta}); }

/// Plot data for the alpha-beta plane. When path_points > 0 the dual path
/// of a sweep with that many points is included.
inline Json geometry_json(Kind kind, const Instance& in,
                          std::size_t path_points = 0) {
  Json j;
  Json sl = Json::array();
  for (const auto& s : slabs(kind, in)) {
    Json x;
    x["z"] = Json::array({s.a, s.w});
    x["lower"] = s.lower;
    x["upper"] = s.upper;
    sl.push_back(std::move(x));
  }
  j["slabs"] = std::move(sl);
  const auto o = origin(kind, in);
  j["origin"] = o ? point_json(*o) : Json(nullptr);

  std::optional<ConicalReport> rep;
  try {
    rep = is_conical_regular(kind, in);
  } catch (const Error&) {
  }
  j["conical"] = rep && rep->conical;

  Json vs = Json::array();
  for (std::size_t i = 0; i < in.size(); ++i) {
    for (std::size_t k = i + 1; k < in.size(); ++k) {
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          try {
            Json v;
            v["i"] = i + 1;
            v["j"] = k + 1;
            v["a"] = a;
            v["b"] = b;
            v["gamma"] = point_json(vertex(kind, in, i, k, a, b));
            vs.push_back(std::move(v));
          } catch (const Error&) {
          }
        }
      }
    }
  }
  j["vertices"] = std::move(vs);

  if (rep && rep->conical && o) {
    const auto lay = polar_thresholds(kind, in);
    Json phi = Json::array();
    for (double x : lay.phi) phi.push_back(wrap_angle(x));
    Json order = Json::array();
    for (auto r : lay.order) order.push_back(r + 1);
    j["polar"] = Json{{"order", order}, {"phi", phi}};
  } else {
    j["polar"] = nullptr;
  }

  Json path = Json::array();
  if (path_points >= 2) {
    for (const auto& [mu, g] : gamma_path(sweep(kind, in, path_points))) {
      path.push_back(Json::array({mu, g.alpha, g.beta}));
    }
  }
  j["gamma_path"] = std::move(path);
  return j;
}

inline Json thresholds_json(const Instance& in) {
  Json j;
  if (in.size() == 3) {
    Json n3;
    for (int k = 1; k <= 2; ++k) {
      const std::string key = "mu" + std::to_string(k);
      try {
        n3[key] = money_threshold_n3(in, k);
      } catch (const Error&) {
        n3[key] = nullptr;
      }
    }
    j["n3"] = std::move(n3);
  } else {
    j["n3"] = nullptr;
  }

  bool conical = false;
  try {
    conical = in.size() >= 3 && is_conical_regular(Kind::kSed, in).conical;
  } catch (const Error&) {
  }
  j["conical_regular"] = conical;
  if (conical) {
    try {
      const auto t = conical_thresholds(in);
      Json order = Json::array();
      for (auto r : t.order) order.push_back(r + 1);
      Json cells = Json::array();
      for (const auto& c : t.cells) {
        cells.push_back(
            Json{{"k", c.k}, {"j", c.j}, {"mu", c.mu}, {"free", c.free_count}});
      }
      j["conical"] = Json{{"order", order}, {"cells", cells}};
    } catch (const Error&) {
      j["conical"] = nullptr;
    }
  } else {
    j["conical"] = nullptr;
  }
  return j;
}

struct VerifyOutcome {
  Json report;
  bool pass = true;
};

/// Certifies the solver at `samples` offers drawn uniformly from
/// [0, mu_max] with a fixed seed.
inline VerifyOutcome verify_json(Kind kind, const Instance& in,
                                 std::size_t samples, MethodChoice method,
                                 std::uint64_t seed = 1) {
  VerifyOutcome out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Json rows = Json::array();
  const double top = mu_max(in);
  for (std::size_t k = 0; k < samples; ++k) {
    const double mu = top * unit(rng);
    const Solution s = solve_with(kind, in, mu, method);
    const auto c = certify(kind, in, mu, s);
    out.pass = out.pass && c.pass;
    Json r;
    r["mu"] = mu;
    r["method"] = std::string(to_string(s.method));
    r["risk"] = c.solution_risk;
    r["oracle_risk"] = c.oracle_risk;
    r["gap"] = c.gap;
    r["stationarity"] = c.kkt.stationarity;
    r["pass"] = c.pass;
    rows.push_back(std::move(r));
  }
  out.report["instance_hash"] = instance_hash(in);
  out.report["kind"] = std::string(to_string(kind));
  out.report["samples"] = std::move(rows);
  out.report["pass"] = out.pass;
  return out;
}

}  // namespace privshare
