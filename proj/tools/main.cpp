// Copyright 2026 The privshare Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "routes.hpp"

namespace ps = privshare;

namespace {

struct Common {
  std::string instance_path;
  std::string kind = "sed";
  std::string mode = "strict";
  std::string method = "auto";
};

ps::Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ps::Error(ps::ErrorCode::kInvalidArgument, "cannot read " + path);
  }
  std::stringstream buf;
  buf << in.rdbuf();
  ps::Json j;
  try {
    j = ps::Json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw ps::Error(ps::ErrorCode::kInvalidArgument, e.what());
  }
  return ps::instance_from_json(j);
}

void add_common(CLI::App* cmd, Common& c, bool with_kind = true) {
  cmd->add_option("--instance", c.instance_path, "instance JSON file")->required();
  if (with_kind) {
    cmd->add_option("--kind", c.kind, "privacy function: sed, kl or isd")
        ->required()
        ->check(CLI::IsMember({"sed", "kl", "isd"}));
  }
  cmd->add_option("--mode", c.mode, "validation mode")
      ->check(CLI::IsMember({"strict", "lenient"}));
}

void add_method(CLI::App* cmd, Common& c) {
  cmd->add_option("--method", c.method, "solver path")
      ->check(CLI::IsMember({"auto", "dual", "closed"}));
}

void print(const ps::Json& j) { std::cout << ps::canonical_dump(j) << '\n'; }

int fail(const ps::Error& e) {
  std::cerr << ps::canonical_dump(ps::error_json(e)) << '\n';
  return ps::exit_code(e.code());
}

int env_port(int fallback) {
  if (const char* v = std::getenv("PRIVSHARE_PORT")) return std::atoi(v);
  return fallback;
}

std::string env_bind(const std::string& fallback) {
  if (const char* v = std::getenv("PRIVSHARE_BIND")) return v;
  return fallback;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal disclosure strategies for selling profile data"};
  app.require_subcommand(1);

  Common c;
  double mu = 0.0;
  std::size_t points = ps::kDefaultCurvePoints;
  std::size_t path_points = 0;
  std::size_t samples = 20;
  std::uint64_t seed = 1;
  std::string out_path;
  int port = env_port(8080);
  std::string bind = env_bind("127.0.0.1");

  auto* solve = app.add_subcommand("solve", "optimal strategy for one offer");
  add_common(solve, c);
  add_method(solve, c);
  solve->add_option("--mu", mu, "offer")->required();

  auto* curve = app.add_subcommand("curve", "privacy-money trade-off as CSV");
  add_common(curve, c);
  add_method(curve, c);
  curve->add_option("--points", points, "uniform samples")->check(CLI::Range(2, 1000000));
  curve->add_option("--out", out_path, "CSV path (default: standard output)");

  auto* geometry = app.add_subcommand("geometry", "slab layout as JSON");
  add_common(geometry, c);
  geometry->add_option("--path", path_points, "include the dual path of a sweep with N points");

  auto* verify = app.add_subcommand("verify", "certify the solver against the oracle");
  add_common(verify, c);
  add_method(verify, c);
  verify->add_option("--samples", samples, "number of random offers");
  verify->add_option("--seed", seed, "random seed");

  auto* thresholds = app.add_subcommand("thresholds", "closed-form money thresholds");
  add_common(thresholds, c, false);

  auto* serve = app.add_subcommand("serve", "HTTP service");
  serve->add_option("--port", port, "listening port (env PRIVSHARE_PORT)");
  serve->add_option("--bind", bind, "listening address (env PRIVSHARE_BIND)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*serve) {
      httplib::Server server;
      ps::tools::install_routes(server);
      std::cerr << "listening on " << bind << ':' << port << '\n';
      if (!server.listen(bind, port)) {
        std::cerr << "cannot bind " << bind << ':' << port << '\n';
        return 1;
      }
      return 0;
    }

    const ps::Instance raw = load_instance(c.instance_path);
    const ps::Kind kind = ps::kind_from_string(c.kind);
    const auto mode = ps::mode_from_string(c.mode);
    const auto method = ps::method_from_string(c.method);

    if (*solve) {
      print(ps::solve_response({raw, kind, mu, mode, method}));
    } else if (*curve) {
      const auto csv = ps::to_csv(
          ps::sweep(kind, ps::tools::strict_curve_instance(raw, mode), points, method));
      if (out_path.empty()) {
        std::cout << csv;
      } else {
        std::ofstream f(out_path);
        f << csv;
        if (!f) {
          throw ps::Error(ps::ErrorCode::kInvalidArgument, "cannot write " + out_path);
        }
      }
    } else if (*geometry) {
      print(ps::geometry_json(kind, ps::tools::strict_curve_instance(raw, mode),
                              path_points));
    } else if (*verify) {
      const auto v = ps::verify_json(
          kind, ps::tools::strict_curve_instance(raw, mode), samples, method, seed);
      print(v.report);
      if (!v.pass) return 5;
    } else if (*thresholds) {
      print(ps::thresholds_json(ps::validate_instance(raw, mode).instance));
    }
  } catch (const ps::Error& e) {
    return fail(e);
  }
  return 0;
}
