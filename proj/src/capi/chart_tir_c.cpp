// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#include "chart_tir/chart_tir.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include <nlohmann/json.hpp>

#include "app/config.hpp"
#include "app/session.hpp"
#include "core/error.hpp"
#include "core/serialize.hpp"
#include "evalbench/evalbench.hpp"
#include "grpo/grpo.hpp"
#include "parser/turn_parser.hpp"

struct ctir_session {
  explicit ctir_session(nlohmann::json cfg) : impl(std::move(cfg)) {}
  ctir::app::Session impl;
};

namespace {

using nlohmann::json;

thread_local std::string g_last_error;
thread_local bool g_has_error = false;

ctir_status status_for(ctir::ErrorCode code) {
  switch (code) {
    case ctir::ErrorCode::Usage:
    case ctir::ErrorCode::UnknownSubcommand: return CTIR_ERR_USAGE;
    case ctir::ErrorCode::ConfigInvalid: return CTIR_ERR_CONFIG;
    default: return CTIR_ERR_RUNTIME;
  }
}

ctir_status record(std::string_view code, const std::string& message, ctir_status status) {
  g_last_error = json{{"code", code}, {"message", message}}.dump();
  g_has_error = true;
  return status;
}

template <class F>
ctir_status guarded(F&& f) {
  g_has_error = false;
  try {
    f();
    return CTIR_OK;
  } catch (const ctir::Error& e) {
    return record(ctir::error_code_name(e.code()), e.what(), status_for(e.code()));
  } catch (const json::exception& e) {
    return record("MalformedRecord", e.what(), CTIR_ERR_RUNTIME);
  } catch (const std::bad_alloc&) {
    return record("Internal", "out of memory", CTIR_ERR_RUNTIME);
  } catch (const std::exception& e) {
    return record("Internal", e.what(), CTIR_ERR_RUNTIME);
  } catch (...) {
    return record("Internal", "unknown failure", CTIR_ERR_RUNTIME);
  }
}

char* dup(const std::string& s) {
  auto* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void need(const void* p, const char* what) {
  if (!p) ctir::fail(ctir::ErrorCode::Usage, std::string(what) + " must not be NULL");
}

}  // namespace

extern "C" {

const char* ctir_version(void) { return "0.1.0"; }

const char* ctir_last_error(void) { return g_has_error ? g_last_error.c_str() : nullptr; }

void ctir_string_free(char* s) { std::free(s); }

ctir_status ctir_session_open(const char* config_path, const char* const* overrides, size_t n_overrides,
                              ctir_session** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    if (n_overrides > 0) need(overrides, "overrides");
    ctir::app::ConfigSources src;
    if (config_path && *config_path) {
      src.file = config_path;
    } else if (const char* env = std::getenv(std::string(ctir::app::kConfigEnvVar).c_str()); env && *env) {
      src.file = env;
    }
    src.env = ctir::app::process_env();
    for (size_t i = 0; i < n_overrides; ++i) {
      need(overrides[i], "override");
      src.sets.emplace_back(overrides[i]);
    }
    *out = new ctir_session(ctir::app::load_config(src));
  });
}

void ctir_session_close(ctir_session* session) { delete session; }

ctir_status ctir_session_config(const ctir_session* session, char** out_json) {
  return guarded([&] {
    need(session, "session");
    need(out_json, "out_json");
    *out_json = dup(session->impl.config().dump(2));
  });
}

ctir_status ctir_session_config_hash(const ctir_session* session, char** out_hex) {
  return guarded([&] {
    need(session, "session");
    need(out_hex, "out_hex");
    *out_hex = dup(session->impl.config_hash());
  });
}

const char* ctir_subcommands(void) {
  static const std::string names = json(ctir::app::Session::subcommands()).dump();
  return names.c_str();
}

ctir_status ctir_session_run(ctir_session* session, const char* subcommand, const char* args_json, char** out_json) {
  return guarded([&] {
    need(session, "session");
    need(subcommand, "subcommand");
    need(out_json, "out_json");
    *out_json = nullptr;
    json args = json::object();
    if (args_json && *args_json) {
      args = json::parse(args_json, nullptr, false);
      if (args.is_discarded() || !args.is_object()) ctir::fail(ctir::ErrorCode::Usage, "arguments must be a JSON object");
    }
    *out_json = dup(session->impl.run(subcommand, args).dump(2));
  });
}

ctir_status ctir_sandbox_serve(ctir_session* session, const char* host, int port) {
  return guarded([&] {
    need(session, "session");
    session->impl.sandbox_serve(host ? host : "127.0.0.1", port);
  });
}

ctir_status ctir_reward_total(int acc, int format, int tool, double lambda1, double lambda2, double* out) {
  return guarded([&] {
    need(out, "out");
    for (int v : {acc, format, tool}) {
      if (v != 0 && v != 1) ctir::fail(ctir::ErrorCode::InvalidArgument, "reward components must be 0 or 1");
    }
    *out = ctir::reward_total(acc, format, tool, lambda1, lambda2);
  });
}

ctir_status ctir_compute_advantages(const double* rewards, size_t n, double std_floor, double* out) {
  return guarded([&] {
    if (n > 0) {
      need(rewards, "rewards");
      need(out, "out");
    }
    ctir::GrpoConfig cfg;
    cfg.std_floor = std_floor;
    const auto a = ctir::compute_advantages(std::span<const double>(rewards, n), cfg);
    for (size_t i = 0; i < n; ++i) out[i] = a[i];
  });
}

ctir_status ctir_grpo_objective(const char* batch_json, double epsilon, double* out) {
  return guarded([&] {
    need(batch_json, "batch_json");
    need(out, "out");
    const auto j = json::parse(batch_json);
    if (!j.is_array()) ctir::fail(ctir::ErrorCode::InvalidArgument, "batch must be a JSON array");
    std::vector<ctir::MaskedTokenBatch> batch;
    for (const auto& b : j) batch.push_back(ctir::masked_batch_from_json(b));
    ctir::GrpoConfig cfg;
    cfg.epsilon = epsilon;
    ctir::validate(cfg);
    *out = ctir::grpo_objective(batch, cfg);
  });
}

ctir_status ctir_parse_turn(const char* raw, char** out_json) {
  return guarded([&] {
    need(raw, "raw");
    need(out_json, "out_json");
    const auto t = ctir::parse_turn(raw);
    json violations = json::array();
    for (auto v : t.violations) violations.push_back(ctir::to_string(v));
    json j{{"reasoning", t.reasoning},
           {"tool_call", t.tool_call ? ctir::to_json(*t.tool_call) : json(nullptr)},
           {"final_answer", t.final_answer ? json(*t.final_answer) : json(nullptr)},
           {"violations", violations},
           {"compliant", t.compliant()}};
    *out_json = dup(j.dump());
  });
}

ctir_status ctir_avg_pixel_entropy(const char* const* paths, size_t n, double log_base, double* out) {
  return guarded([&] {
    need(out, "out");
    if (n > 0) need(paths, "paths");
    std::vector<ctir::ChartImage> images;
    for (size_t i = 0; i < n; ++i) {
      need(paths[i], "path");
      images.push_back(ctir::load_image(paths[i], std::to_string(i)));
    }
    *out = ctir::avg_pixel_entropy(images, log_base);
  });
}

}  // extern "C"
