// Copyright 2026 The privshare Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <exception>
#include <string>

#include <httplib.h>

#include "privshare/service.hpp"

namespace privshare::tools {

struct Reply {
  int status = 200;
  std::string body;
};

inline Instance strict_curve_instance(const Instance& raw, ValidationMode mode) {
  const auto v = validate_instance(raw, mode);
  if (!v.zero_set.empty()) {
    throw Error(ErrorCode::kEqualProfiles,
                "curves and geometry need q_i != p_i in every category");
  }
  return v.instance;
}

template <typename F>
Reply guarded(F&& f) {
  try {
    return {200, canonical_dump(f())};
  } catch (const Error& e) {
    return {http_status(e.code()), canonical_dump(error_json(e))};
  } catch (const nlohmann::json::exception& e) {
    return {400, canonical_dump(error_json(ErrorCode::kInvalidArgument, e.what()))};
  }
}

inline Json parse_body(const std::string& body) { return Json::parse(body); }

inline std::size_t count_field(const Json& j, const char* key,
                               std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_unsigned()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("\"") + key + "\" must be a non-negative integer");
  }
  return j[key].get<std::size_t>();
}

inline Reply handle_solve(const std::string& body) {
  return guarded([&] { return solve_response(solve_request_from_json(parse_body(body))); });
}

inline Reply handle_curve(const std::string& body) {
  return guarded([&] {
    const Json j = parse_body(body);
    const Instance raw = instance_from_json(detail::field(j, "instance"));
    const Kind kind = kind_from_string(detail::field(j, "kind").get<std::string>());
    const auto mode = mode_from_string(detail::string_field(j, "mode", "strict"));
    const auto method = method_from_string(detail::string_field(j, "method", "auto"));
    const auto n = count_field(j, "points", kDefaultCurvePoints);
    return curve_json(sweep(kind, strict_curve_instance(raw, mode), n, method));
  });
}

inline Reply handle_geometry(const std::string& body) {
  return guarded([&] {
    const Json j = parse_body(body);
    const Instance raw = instance_from_json(detail::field(j, "instance"));
    const Kind kind = kind_from_string(detail::field(j, "kind").get<std::string>());
    const auto mode = mode_from_string(detail::string_field(j, "mode", "strict"));
    return geometry_json(kind, strict_curve_instance(raw, mode),
                         count_field(j, "path", 0));
  });
}

inline Reply handle_thresholds(const std::string& body) {
  return guarded([&] {
    const Json j = parse_body(body);
    const Instance raw = instance_from_json(detail::field(j, "instance"));
    return thresholds_json(validate_instance(raw, ValidationMode::kStrict).instance);
  });
}

inline constexpr const char* kJsonType = "application/json";

inline void install_routes(httplib::Server& server) {
  auto bind = [&](const char* path, Reply (*handler)(const std::string&)) {
    server.Post(path, [handler](const httplib::Request& req,
                                httplib::Response& res) {
      const Reply r = handler(req.body);
      res.status = r.status;
      res.set_content(r.body, kJsonType);
    });
  };
  bind("/v1/solve", handle_solve);
  bind("/v1/curve", handle_curve);
  bind("/v1/geometry", handle_geometry);
  bind("/v1/thresholds", handle_thresholds);
  server.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok"})", kJsonType);
  });
}

}  // namespace privshare::tools
