// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#include "app/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "core/error.hpp"
#include "core/image.hpp"
#include "core/serialize.hpp"
#include "core/text.hpp"

extern char** environ;

namespace ctir::app {

namespace {

json endpoint_defaults(const std::string& model) {
  return json{{"endpoint_url", ""},  {"model", model},      {"api_key_env", ""},
              {"max_inflight", 8},   {"timeout_s", 120.0},  {"max_retries", 3},
              {"retry_backoff_ms", 500}, {"cassette", ""}, {"cassette_mode", "off"}};
}

[[noreturn]] void bad(const std::string& origin, const std::string& msg) {
  fail(ErrorCode::ConfigInvalid, origin + ": " + msg);
}

class TomlReader {
 public:
  TomlReader(std::string_view text, const std::string& origin) : s_(text), origin_(origin) {}

  json parse() {
    json root = json::object();
    json* table = nullptr;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        ++pos_;
        skip_ws();
        const auto name = read_key();
        skip_ws();
        expect(']');
        if (name.find('.') != std::string::npos) error("nested tables are not supported");
        if (root.contains(name)) error("table [" + name + "] defined twice");
        root[name] = json::object();
        table = &root[name];
      } else {
        const auto key = read_key();
        skip_ws();
        expect('=');
        skip_ws();
        auto value = read_value();
        json* target = table;
        std::string leaf = key;
        if (const auto dot = key.find('.'); dot != std::string::npos) {
          if (table) error("dotted keys are only allowed at the top level");
          const auto section = key.substr(0, dot);
          leaf = key.substr(dot + 1);
          if (!root.contains(section)) root[section] = json::object();
          target = &root[section];
        }
        if (!target) error("key '" + key + "' outside of a table");
        if (target->contains(leaf)) error("key '" + key + "' set twice");
        (*target)[leaf] = std::move(value);
      }
      end_of_line();
    }
    return root;
  }

  json parse_single_value() {
    skip_ws();
    auto v = read_value();
    skip_ws();
    if (!eof()) error("trailing characters after value");
    return v;
  }

 private:
  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }

  [[noreturn]] void error(const std::string& msg) const {
    std::size_t line = 1;
    for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i) line += s_[i] == '\n';
    bad(origin_ + ":" + std::to_string(line), msg);
  }

  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_comment() {
    if (!eof() && peek() == '#') {
      while (!eof() && peek() != '\n') ++pos_;
    }
  }

  void skip_blank_lines() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (eof()) return;
      if (peek() == '\r' || peek() == '\n') {
        ++pos_;
        continue;
      }
      return;
    }
  }

  void skip_ws_and_newlines() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (!eof() && (peek() == '\n' || peek() == '\r')) {
        ++pos_;
        continue;
      }
      return;
    }
  }

  void end_of_line() {
    skip_ws();
    skip_comment();
    if (eof()) return;
    if (peek() == '\r') ++pos_;
    if (eof() || peek() != '\n') error("expected end of line");
    ++pos_;
  }

  void expect(char c) {
    if (eof() || peek() != c) error(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string read_key() {
    std::string out;
    while (!eof()) {
      const char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.') {
        out += c;
        ++pos_;
      } else {
        break;
      }
    }
    if (out.empty()) error("expected a key");
    return out;
  }

  json read_value() {
    if (eof()) error("expected a value");
    const char c = peek();
    if (c == '"') return read_basic_string();
    if (c == '\'') return read_literal_string();
    if (c == '[') return read_array();
    if (s_.substr(pos_, 4) == "true") {
      pos_ += 4;
      return true;
    }
    if (s_.substr(pos_, 5) == "false") {
      pos_ += 5;
      return false;
    }
    return read_number();
  }

  json read_basic_string() {
    ++pos_;
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') error("unterminated string");
      const char c = s_[pos_++];
      if (c == '"') break;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (eof()) error("unterminated escape");
      const char e = s_[pos_++];
      switch (e) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case 'b': out += '\b'; break;
        case 'f': out += '\f'; break;
        case 'u': out += read_unicode(4); break;
        case 'U': out += read_unicode(8); break;
        default: error(std::string("unknown escape \\") + e);
      }
    }
    return out;
  }

  std::string read_unicode(std::size_t digits) {
    if (pos_ + digits > s_.size()) error("short unicode escape");
    std::uint32_t cp = 0;
    const auto hex = s_.substr(pos_, digits);
    auto [p, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), cp, 16);
    if (ec != std::errc{} || p != hex.data() + hex.size() || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      error("bad unicode escape");
    }
    pos_ += digits;
    std::string out;
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xC0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    }
    return out;
  }

  json read_literal_string() {
    ++pos_;
    const auto end = s_.find('\'', pos_);
    if (end == std::string_view::npos || s_.substr(pos_, end - pos_).find('\n') != std::string_view::npos) {
      error("unterminated string");
    }
    std::string out(s_.substr(pos_, end - pos_));
    pos_ = end + 1;
    return out;
  }

  json read_array() {
    ++pos_;
    json arr = json::array();
    while (true) {
      skip_ws_and_newlines();
      if (eof()) error("unterminated array");
      if (peek() == ']') {
        ++pos_;
        return arr;
      }
      arr.push_back(read_value());
      skip_ws_and_newlines();
      if (eof()) error("unterminated array");
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != ']') {
        error("expected ',' or ']'");
      }
    }
  }

  json read_number() {
    const auto start = pos_;
    while (!eof()) {
      const char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.' || c == '_') {
        ++pos_;
      } else {
        break;
      }
    }
    std::string tok;
    for (char c : s_.substr(start, pos_ - start)) {
      if (c != '_') tok += c;
    }
    if (tok.empty()) error("expected a value");
    const bool is_float = tok.find_first_of(".eE") != std::string::npos;
    const char* b = tok.data() + (tok[0] == '+' ? 1 : 0);
    const char* e = tok.data() + tok.size();
    if (is_float) {
      double v = 0;
      auto [p, ec] = std::from_chars(b, e, v);
      if (ec != std::errc{} || p != e || !std::isfinite(v)) error("bad number '" + tok + "'");
      return v;
    }
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || p != e) error("bad value '" + tok + "'");
    return v;
  }

  std::string_view s_;
  std::string origin_;
  std::size_t pos_ = 0;
};

bool same_kind(const json& def, const json& v) {
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_number_float()) return v.is_number() && !v.is_boolean();
  if (def.is_number_integer()) return v.is_number_integer() || v.is_number_unsigned();
  if (def.is_string()) return v.is_string();
  if (def.is_array()) {
    if (!v.is_array()) return false;
    const json* proto = def.empty() ? nullptr : &def[0];
    for (const auto& x : v) {
      if (proto && !same_kind(*proto, x)) return false;
      if (!proto && !x.is_primitive()) return false;
    }
    return true;
  }
  return false;
}

json coerce(const json& def, const json& v) {
  if (def.is_number_float()) return v.get<double>();
  if (def.is_array() && !def.empty() && def[0].is_number_float()) {
    json out = json::array();
    for (const auto& x : v) out.push_back(x.get<double>());
    return out;
  }
  return v;
}

const char* kind_name(const json& def) {
  if (def.is_boolean()) return "a boolean";
  if (def.is_number_float()) return "a number";
  if (def.is_number_integer()) return "an integer";
  if (def.is_string()) return "a string";
  return "an array";
}

std::string str(const json& cfg, const char* section, const char* key) {
  return cfg.at(section).at(key).get<std::string>();
}

template <class T>
T num(const json& cfg, const char* section, const char* key) {
  return cfg.at(section).at(key).get<T>();
}

template <class F>
void checked(const char* what, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) throw;
    fail(ErrorCode::ConfigInvalid, std::string(what) + ": " + e.what());
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigInvalid, std::string(what) + ": " + e.what());
  }
}

}  // namespace

json default_config() {
  const auto pools = SpecPools::defaults();
  json subplot = json::array();
  for (const auto& b : pools.subplot_buckets) subplot.push_back(b.weight);
  json qtypes = json::array();
  for (const auto& q : pools.question_types) qtypes.push_back(q.weight);
  json difficulty = json::array();
  for (double w : pools.difficulty_weights) difficulty.push_back(w);

  const ExecLimits limits;
  const ToolConfig tools;
  const RolloutConfig rollout;
  const MatchPolicy match;
  const RewardWeights weights;
  const GrpoConfig grpo;
  const ChartGenOptions gen;
  const QualityThresholds quality;
  const CheckParams check;

  json cfg;
  cfg["policy"] = endpoint_defaults("policy");
  cfg["judge"] = endpoint_defaults("judge");
  cfg["llm"] = endpoint_defaults("llm");
  cfg["teacher"] = endpoint_defaults("teacher");
  cfg["sandbox"] = json{{"backend", "local"},
                        {"remote_url", ""},
                        {"interpreter_cmd", json::array({"python3", "-I"})},
                        {"pool_size", 4},
                        {"wall_timeout_s", limits.wall_timeout_s},
                        {"cpu_timeout_s", limits.cpu_timeout_s},
                        {"memory_limit_bytes", static_cast<std::int64_t>(limits.memory_limit_bytes)},
                        {"stdout_cap_bytes", static_cast<std::int64_t>(limits.stdout_cap_bytes)},
                        {"network_allowed", limits.network_allowed}};
  cfg["tools"] = json{{"min_crop_side", tools.min_crop_side}, {"crop_resize_factor", tools.crop_resize_factor}};
  cfg["rollout"] = json{{"max_assistant_turns", rollout.max_assistant_turns},
                        {"max_parse_failures", rollout.max_parse_failures},
                        {"group_size", rollout.group_size},
                        {"temperature", rollout.sampling.temperature},
                        {"max_tokens", rollout.sampling.max_tokens},
                        {"partial_group_threshold", rollout.partial_group_threshold},
                        {"group_concurrency", static_cast<std::int64_t>(rollout.group_concurrency)},
                        {"seed", rollout.seed}};
  cfg["reward"] = json{{"lambda1", weights.lambda1},
                       {"lambda2", weights.lambda2},
                       {"numeric_rel_tol", match.numeric_rel_tol},
                       {"case_fold", match.case_fold},
                       {"strip_units", match.strip_units},
                       {"judge_fallback", match.judge_fallback}};
  cfg["grpo"] = json{{"epsilon", grpo.epsilon}, {"std_floor", grpo.std_floor}};
  cfg["synth"] = json{{"count", 100},
                      {"seed", 0},
                      {"concurrency", 4},
                      {"max_repairs", gen.max_repairs},
                      {"render_timeout_s", gen.limits.wall_timeout_s},
                      {"gen_temperature", gen.temperature},
                      {"gen_max_tokens", gen.max_tokens},
                      {"quality_visual", quality.visual},
                      {"quality_semantic", quality.semantic},
                      {"aspects_per_chart", 2},
                      {"votes_n", check.votes_n},
                      {"vote_threshold", check.vote_threshold},
                      {"difficulty_threshold", check.difficulty_threshold},
                      {"vote_temperature", check.vote_temperature},
                      {"subplot_weights", subplot},
                      {"composite_share", pools.composite_share},
                      {"question_type_weights", qtypes},
                      {"difficulty_weights", difficulty}};
  cfg["coldstart"] = json{{"concurrency", 4}};
  cfg["eval"] = json{{"concurrency", 4}, {"entropy_log_base", 2.0}};
  return cfg;
}

json parse_toml(std::string_view text, const std::string& origin) { return TomlReader(text, origin).parse(); }

std::string to_toml(const json& cfg) {
  std::ostringstream out;
  bool first = true;
  for (const auto& [section, table] : cfg.items()) {
    if (!first) out << '\n';
    first = false;
    out << '[' << section << "]\n";
    for (const auto& [key, value] : table.items()) out << key << " = " << value.dump() << '\n';
  }
  return out.str();
}

void merge_layer(json& cfg, const json& layer, const std::string& origin) {
  if (!layer.is_object()) bad(origin, "configuration must be a table of tables");
  for (const auto& [section, table] : layer.items()) {
    if (!cfg.contains(section)) bad(origin, "unknown section [" + section + "]");
    if (!table.is_object()) bad(origin, "[" + section + "] must be a table");
    for (const auto& [key, value] : table.items()) {
      auto& slot = cfg[section];
      if (!slot.contains(key)) bad(origin, "unknown key " + section + "." + key);
      if (!same_kind(slot[key], value)) bad(origin, section + "." + key + " must be " + kind_name(slot[key]));
      slot[key] = coerce(slot[key], value);
    }
  }
}

void apply_setting(json& cfg, std::string_view dotted_key, std::string_view raw_value, const std::string& origin) {
  const auto key = text::trim(dotted_key);
  const auto dot = key.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == key.size()) bad(origin, "expected section.key, got '" + key + "'");
  const auto section = key.substr(0, dot);
  const auto leaf = key.substr(dot + 1);
  if (!cfg.contains(section)) bad(origin, "unknown section [" + section + "]");
  if (!cfg[section].contains(leaf)) bad(origin, "unknown key " + key);
  const auto& def = cfg[section][leaf];
  json value;
  const auto raw = text::trim(raw_value);
  try {
    value = TomlReader(raw, origin).parse_single_value();
  } catch (const Error&) {
    if (!def.is_string()) throw;
    value = std::string(raw_value);
  }
  if (def.is_string() && !value.is_string()) value = std::string(raw_value);
  json layer;
  layer[section][leaf] = value;
  merge_layer(cfg, layer, origin);
}

std::vector<std::pair<std::string, std::string>> process_env() {
  std::vector<std::pair<std::string, std::string>> out;
  for (char** e = environ; e && *e; ++e) {
    std::string_view kv(*e);
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) continue;
    out.emplace_back(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
  }
  return out;
}

json load_config(const ConfigSources& sources) {
  auto cfg = default_config();
  if (sources.file) {
    std::string text;
    try {
      text = read_text_file(*sources.file);
    } catch (const Error& e) {
      fail(ErrorCode::ConfigInvalid, e.what());
    }
    merge_layer(cfg, parse_toml(text, sources.file->string()), sources.file->string());
  }
  for (const auto& [name, value] : sources.env) {
    if (name.rfind(kEnvPrefix, 0) != 0) continue;
    const auto rest = name.substr(kEnvPrefix.size());
    const auto sep = rest.find("__");
    if (sep == std::string::npos) bad(name, "expected CHART_TIR__SECTION__KEY");
    apply_setting(cfg, text::to_lower(rest.substr(0, sep)) + "." + text::to_lower(rest.substr(sep + 2)), value, name);
  }
  for (const auto& s : sources.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) bad("--set " + s, "expected section.key=value");
    apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1), "--set " + s);
  }
  validate_config(cfg);
  return cfg;
}

std::string config_hash(const json& cfg) { return sha256_hex(cfg.dump()); }

void validate_config(const json& cfg) {
  for (const char* role : {"policy", "judge", "llm", "teacher"}) {
    checked(role, [&] {
      const auto ep = endpoint_config(cfg, role);
      if (ep.max_inflight == 0) fail(ErrorCode::ConfigInvalid, "max_inflight must be positive");
      if (!(ep.timeout_s > 0)) fail(ErrorCode::ConfigInvalid, "timeout_s must be positive");
      if (ep.max_retries < 0 || ep.retry_backoff_ms < 0) fail(ErrorCode::ConfigInvalid, "retry settings must be >= 0");
      const auto mode = str(cfg, role, "cassette_mode");
      if (mode != "off" && mode != "record" && mode != "replay") {
        fail(ErrorCode::ConfigInvalid, "cassette_mode must be off, record or replay");
      }
      if (mode != "off" && str(cfg, role, "cassette").empty()) {
        fail(ErrorCode::ConfigInvalid, "cassette_mode " + mode + " needs a cassette path");
      }
    });
  }
  checked("sandbox", [&] {
    const auto backend = str(cfg, "sandbox", "backend");
    if (backend != "local" && backend != "remote") fail(ErrorCode::ConfigInvalid, "backend must be local or remote");
    if (backend == "remote" && str(cfg, "sandbox", "remote_url").empty()) {
      fail(ErrorCode::ConfigInvalid, "remote backend needs remote_url");
    }
    if (cfg.at("sandbox").at("interpreter_cmd").empty()) fail(ErrorCode::ConfigInvalid, "interpreter_cmd is empty");
    if (num<std::int64_t>(cfg, "sandbox", "pool_size") < 1) fail(ErrorCode::ConfigInvalid, "pool_size must be >= 1");
    if (num<std::int64_t>(cfg, "sandbox", "memory_limit_bytes") < 0 ||
        num<std::int64_t>(cfg, "sandbox", "stdout_cap_bytes") < 1) {
      fail(ErrorCode::ConfigInvalid, "limits must be positive");
    }
    validate(exec_limits(cfg));
  });
  checked("tools", [&] { validate(tool_config(cfg)); });
  checked("rollout", [&] { validate(rollout_config(cfg)); });
  checked("reward", [&] { validate(match_policy(cfg)); });
  checked("grpo", [&] { validate(grpo_config(cfg)); });
  checked("synth", [&] {
    validate(spec_pools(cfg));
    validate(check_params(cfg));
    if (num<std::int64_t>(cfg, "synth", "count") < 0 || num<std::int64_t>(cfg, "synth", "seed") < 0 ||
        num<std::int64_t>(cfg, "synth", "concurrency") < 1 || num<std::int64_t>(cfg, "synth", "aspects_per_chart") < 1 ||
        num<std::int64_t>(cfg, "synth", "max_repairs") < 0) {
      fail(ErrorCode::ConfigInvalid, "count, seed and max_repairs must be >= 0; concurrency and aspects_per_chart >= 1");
    }
    chart_gen_options(cfg);
  });
  checked("coldstart", [&] {
    if (num<std::int64_t>(cfg, "coldstart", "concurrency") < 1) fail(ErrorCode::ConfigInvalid, "concurrency must be >= 1");
  });
  checked("eval", [&] {
    if (num<std::int64_t>(cfg, "eval", "concurrency") < 1) fail(ErrorCode::ConfigInvalid, "concurrency must be >= 1");
    if (!(num<double>(cfg, "eval", "entropy_log_base") > 1.0)) {
      fail(ErrorCode::ConfigInvalid, "entropy_log_base must be > 1");
    }
  });
}

EndpointConfig endpoint_config(const json& cfg, const std::string& section) {
  const auto& s = cfg.at(section);
  EndpointConfig ep;
  ep.url = s.at("endpoint_url").get<std::string>();
  ep.model = s.at("model").get<std::string>();
  ep.api_key_env = s.at("api_key_env").get<std::string>();
  const auto inflight = s.at("max_inflight").get<std::int64_t>();
  ep.max_inflight = inflight > 0 ? static_cast<std::size_t>(inflight) : 0;
  ep.timeout_s = s.at("timeout_s").get<double>();
  ep.max_retries = s.at("max_retries").get<int>();
  ep.retry_backoff_ms = s.at("retry_backoff_ms").get<int>();
  return ep;
}

ExecLimits exec_limits(const json& cfg) {
  ExecLimits l;
  l.wall_timeout_s = num<double>(cfg, "sandbox", "wall_timeout_s");
  l.cpu_timeout_s = num<double>(cfg, "sandbox", "cpu_timeout_s");
  l.memory_limit_bytes = static_cast<std::uint64_t>(std::max<std::int64_t>(0, num<std::int64_t>(cfg, "sandbox", "memory_limit_bytes")));
  l.stdout_cap_bytes = static_cast<std::size_t>(std::max<std::int64_t>(0, num<std::int64_t>(cfg, "sandbox", "stdout_cap_bytes")));
  l.network_allowed = num<bool>(cfg, "sandbox", "network_allowed");
  return l;
}

LocalSandboxOptions local_sandbox_options(const json& cfg) {
  LocalSandboxOptions o;
  o.interpreter_cmd = cfg.at("sandbox").at("interpreter_cmd").get<std::vector<std::string>>();
  o.pool_size = static_cast<std::size_t>(std::max<std::int64_t>(1, num<std::int64_t>(cfg, "sandbox", "pool_size")));
  return o;
}

ToolConfig tool_config(const json& cfg) {
  ToolConfig t;
  t.min_crop_side = num<int>(cfg, "tools", "min_crop_side");
  t.crop_resize_factor = num<double>(cfg, "tools", "crop_resize_factor");
  t.exec_limits = exec_limits(cfg);
  return t;
}

RolloutConfig rollout_config(const json& cfg) {
  RolloutConfig r;
  r.max_assistant_turns = num<int>(cfg, "rollout", "max_assistant_turns");
  r.max_parse_failures = num<int>(cfg, "rollout", "max_parse_failures");
  r.group_size = num<int>(cfg, "rollout", "group_size");
  r.sampling.temperature = num<double>(cfg, "rollout", "temperature");
  r.sampling.max_tokens = num<int>(cfg, "rollout", "max_tokens");
  r.partial_group_threshold = num<double>(cfg, "rollout", "partial_group_threshold");
  r.group_concurrency = static_cast<std::size_t>(std::max<std::int64_t>(1, num<std::int64_t>(cfg, "rollout", "group_concurrency")));
  r.seed = num<std::int64_t>(cfg, "rollout", "seed");
  r.tool_cfg = tool_config(cfg);
  return r;
}

MatchPolicy match_policy(const json& cfg) {
  MatchPolicy m;
  m.numeric_rel_tol = num<double>(cfg, "reward", "numeric_rel_tol");
  m.case_fold = num<bool>(cfg, "reward", "case_fold");
  m.strip_units = num<bool>(cfg, "reward", "strip_units");
  m.judge_fallback = num<bool>(cfg, "reward", "judge_fallback");
  return m;
}

RewardWeights reward_weights(const json& cfg) {
  return RewardWeights{num<double>(cfg, "reward", "lambda1"), num<double>(cfg, "reward", "lambda2")};
}

GrpoConfig grpo_config(const json& cfg) {
  return GrpoConfig{num<double>(cfg, "grpo", "epsilon"), num<double>(cfg, "grpo", "std_floor")};
}

SpecPools spec_pools(const json& cfg) {
  auto pools = SpecPools::defaults();
  const auto subplot = cfg.at("synth").at("subplot_weights").get<std::vector<double>>();
  if (subplot.size() != pools.subplot_buckets.size()) {
    fail(ErrorCode::ConfigInvalid, "subplot_weights needs " + std::to_string(pools.subplot_buckets.size()) + " entries");
  }
  for (std::size_t i = 0; i < subplot.size(); ++i) pools.subplot_buckets[i].weight = subplot[i];
  const auto qtypes = cfg.at("synth").at("question_type_weights").get<std::vector<double>>();
  if (qtypes.size() != pools.question_types.size()) {
    fail(ErrorCode::ConfigInvalid, "question_type_weights needs " + std::to_string(pools.question_types.size()) + " entries");
  }
  for (std::size_t i = 0; i < qtypes.size(); ++i) pools.question_types[i].weight = qtypes[i];
  pools.difficulty_weights = cfg.at("synth").at("difficulty_weights").get<std::vector<double>>();
  if (pools.difficulty_weights.size() != 5) fail(ErrorCode::ConfigInvalid, "difficulty_weights needs 5 entries");
  pools.composite_share = num<double>(cfg, "synth", "composite_share");
  return pools;
}

ChartGenOptions chart_gen_options(const json& cfg) {
  ChartGenOptions g;
  g.max_repairs = num<int>(cfg, "synth", "max_repairs");
  g.limits = exec_limits(cfg);
  g.limits.wall_timeout_s = num<double>(cfg, "synth", "render_timeout_s");
  g.limits.cpu_timeout_s = g.limits.wall_timeout_s;
  g.limits.stdout_cap_bytes = std::max<std::size_t>(g.limits.stdout_cap_bytes, 8192);
  g.temperature = num<double>(cfg, "synth", "gen_temperature");
  g.max_tokens = num<int>(cfg, "synth", "gen_max_tokens");
  validate(g.limits);
  return g;
}

QualityThresholds quality_thresholds(const json& cfg) {
  return QualityThresholds{num<int>(cfg, "synth", "quality_visual"), num<int>(cfg, "synth", "quality_semantic")};
}

CheckParams check_params(const json& cfg) {
  CheckParams p;
  p.votes_n = num<int>(cfg, "synth", "votes_n");
  p.vote_threshold = num<double>(cfg, "synth", "vote_threshold");
  p.difficulty_threshold = num<int>(cfg, "synth", "difficulty_threshold");
  p.vote_temperature = num<double>(cfg, "synth", "vote_temperature");
  return p;
}

}  // namespace ctir::app
