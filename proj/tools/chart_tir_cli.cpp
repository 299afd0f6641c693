// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdint>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "chart_tir/chart_tir.h"

namespace {

using nlohmann::json;

enum class Kind { Str, Int, Num, Flag, List };

struct Arg {
  std::string key;
  Kind kind = Kind::Str;
  std::string s;
  std::int64_t i = 0;
  double d = 0.0;
  bool flag = false;
  std::vector<std::string> list;
  CLI::Option* opt = nullptr;
};

struct Sub {
  std::string name;
  CLI::App* app = nullptr;
  std::vector<std::unique_ptr<Arg>> args;

  Sub& add(const std::string& flag, const std::string& key, Kind kind, const std::string& help) {
    auto a = std::make_unique<Arg>();
    a->key = key;
    a->kind = kind;
    switch (kind) {
      case Kind::Str: a->opt = app->add_option(flag, a->s, help); break;
      case Kind::Int: a->opt = app->add_option(flag, a->i, help); break;
      case Kind::Num: a->opt = app->add_option(flag, a->d, help); break;
      case Kind::Flag: a->opt = app->add_flag(flag, a->flag, help); break;
      case Kind::List: a->opt = app->add_option(flag, a->list, help); break;
    }
    args.push_back(std::move(a));
    return *this;
  }

  json to_args() const {
    json j = json::object();
    for (const auto& a : args) {
      if (a->opt->count() == 0) continue;
      switch (a->kind) {
        case Kind::Str: j[a->key] = a->s; break;
        case Kind::Int: j[a->key] = a->i; break;
        case Kind::Num: j[a->key] = a->d; break;
        case Kind::Flag: j[a->key] = a->flag; break;
        case Kind::List: j[a->key] = a->list; break;
      }
    }
    return j;
  }
};

int report_error(std::string_view code, const std::string& message, int status) {
  std::cerr << json{{"error", {{"code", code}, {"message", message}}}}.dump() << '\n';
  return status;
}

int report_last_error(ctir_status status) {
  const char* e = ctir_last_error();
  json err = e ? json::parse(e, nullptr, false) : json{{"code", "Internal"}, {"message", "unknown failure"}};
  std::cerr << json{{"error", err}}.dump() << '\n';
  return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chart tool-integrated reasoning pipeline"};
  app.set_version_flag("--version", std::string(ctir_version()));
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "Config file (defaults to $CHART_TIR_CONFIG)");
  app.add_option("--set", sets, "Override a config value: section.key=value (repeatable)");

  std::vector<std::unique_ptr<Sub>> subs;
  auto sub = [&](const std::string& name, const std::string& help) -> Sub& {
    auto s = std::make_unique<Sub>();
    s->name = name;
    s->app = app.add_subcommand(name, help);
    subs.push_back(std::move(s));
    return *subs.back();
  };

  sub("synth-charts", "Sample chart specs, render and filter charts")
      .add("--out", "out", Kind::Str, "Output directory")
      .add("--count", "count", Kind::Int, "Number of synthetic charts")
      .add("--seed", "seed", Kind::Int, "Run seed")
      .add("--reference-dir", "reference_dir", Kind::Str, "Reference plot-code library")
      .add("--arxiv-records", "arxiv_records", Kind::Str, "Pre-extracted figure records (JSONL)");
  sub("synth-qa", "Generate and quality-check question/answer pairs")
      .add("--charts-meta", "charts_meta", Kind::Str, "charts.meta.jsonl from synth-charts")
      .add("--charts-dir", "charts_dir", Kind::Str, "Chart image directory")
      .add("--out", "out", Kind::Str, "Output QA JSONL")
      .add("--seed", "seed", Kind::Int, "Run seed");
  sub("coldstart", "Distill verified teacher trajectories into SFT records")
      .add("--qa", "qa", Kind::Str, "QA JSONL")
      .add("--images", "images", Kind::Str, "Chart image directory")
      .add("--out", "out", Kind::Str, "Output SFT JSONL");
  sub("rollout", "Sample trajectory groups with rewards and advantages")
      .add("--dataset", "dataset", Kind::Str, "QA JSONL")
      .add("--images", "images", Kind::Str, "Chart image directory")
      .add("--out", "out", Kind::Str, "Output trajectory store")
      .add("--group-size", "group_size", Kind::Int, "Trajectories per prompt");
  sub("reward-check", "Score a trajectory store against a QA file")
      .add("--store", "store", Kind::Str, "Trajectory store")
      .add("--qa", "qa", Kind::Str, "QA JSONL")
      .add("--images", "images", Kind::Str, "Chart image directory")
      .add("--out", "out", Kind::Str, "Write the report here");
  sub("grpo-eval", "Evaluate the clipped objective on token fixtures")
      .add("--fixtures", "fixtures", Kind::Str, "JSONL, one trajectory per line")
      .add("--epsilon", "epsilon", Kind::Num, "Clip range")
      .add("--gradient-check", "gradient_check", Kind::Num, "Finite-difference step")
      .add("--gradient", "gradient", Kind::Flag, "Print the analytic gradient");
  sub("eval", "Run a benchmark with greedy decoding")
      .add("--dataset", "dataset", Kind::Str, "QA JSONL")
      .add("--images", "images", Kind::Str, "Chart image directory (defaults to the dataset directory)")
      .add("--report", "report", Kind::Str, "Report JSON")
      .add("--store", "store", Kind::Str, "Trajectory store")
      .add("--csv", "csv", Kind::Str, "Per-item CSV");
  sub("entropy", "Average pixel entropy of images")
      .add("images", "images", Kind::List, "Image files or directories")
      .add("--log-base", "log_base", Kind::Num, "Logarithm base")
      .add("--per-image", "per_image", Kind::Flag, "Include per-image values")
      .add("--out", "out", Kind::Str, "Write the report here");
  sub("stats", "Dataset, chart and trajectory statistics")
      .add("--qa", "qa", Kind::Str, "QA JSONL")
      .add("--charts-meta", "charts_meta", Kind::Str, "charts.meta.jsonl")
      .add("--store", "store", Kind::Str, "Trajectory store")
      .add("--images", "images", Kind::Str, "Chart image directory for the store")
      .add("--out", "out", Kind::Str, "Write the report here");
  sub("adapt-benchmark", "Convert a benchmark file to QA JSONL")
      .add("--source", "source", Kind::Str, "Benchmark JSON or JSONL")
      .add("--format", "format", Kind::Str, "generic, chartqa, charxiv-reasoning or charxiv-descriptive")
      .add("--out", "out", Kind::Str, "Output QA JSONL")
      .add("--images-out", "images_out", Kind::Str, "Directory for converted PNG images")
      .add("--name", "name", Kind::Str, "Id prefix for the generic format")
      .add("--question-key", "question_key", Kind::Str, "Question field")
      .add("--answer-key", "answer_key", Kind::Str, "Answer field")
      .add("--image-key", "image_key", Kind::Str, "Image field")
      .add("--id-key", "id_key", Kind::Str, "Record id field")
      .add("--image-pattern", "image_pattern", Kind::Str, "Image path pattern, {} is the image field")
      .add("--qtype", "qtype", Kind::Str, "recognition or reasoning");
  auto& serve = sub("sandbox-serve", "Serve the sandbox over HTTP")
                    .add("--host", "host", Kind::Str, "Bind address")
                    .add("--port", "port", Kind::Int, "Port");
  sub("show-config", "Print the effective configuration and its hash");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ExtrasError& e) {
    const bool no_sub = app.get_subcommands().empty();
    return report_error(no_sub ? "UnknownSubcommand" : "Usage", e.what(), CTIR_ERR_USAGE);
  } catch (const CLI::RequiredError& e) {
    return report_error(app.get_subcommands().empty() ? "UnknownSubcommand" : "Usage", e.what(), CTIR_ERR_USAGE);
  } catch (const CLI::ParseError& e) {
    return report_error("Usage", e.what(), CTIR_ERR_USAGE);
  }

  std::vector<const char*> overrides;
  for (const auto& s : sets) overrides.push_back(s.c_str());
  ctir_session* session = nullptr;
  auto st = ctir_session_open(config_path.empty() ? nullptr : config_path.c_str(), overrides.data(), overrides.size(),
                              &session);
  if (st != CTIR_OK) return report_last_error(st);
  std::unique_ptr<ctir_session, void (*)(ctir_session*)> guard(session, ctir_session_close);

  const Sub* chosen = nullptr;
  for (const auto& s : subs) {
    if (s->app->parsed()) chosen = s.get();
  }

  if (chosen->name == "show-config") {
    char* cfg = nullptr;
    char* hash = nullptr;
    if ((st = ctir_session_config(session, &cfg)) != CTIR_OK) return report_last_error(st);
    if ((st = ctir_session_config_hash(session, &hash)) != CTIR_OK) {
      ctir_string_free(cfg);
      return report_last_error(st);
    }
    std::cout << json{{"config", json::parse(cfg)}, {"config_hash", hash}}.dump(2) << '\n';
    ctir_string_free(cfg);
    ctir_string_free(hash);
    return 0;
  }
  if (chosen == &serve) {
    const auto a = serve.to_args();
    const std::string host = a.value("host", "127.0.0.1");
    const int port = static_cast<int>(a.value("port", std::int64_t{8765}));
    std::cerr << "serving sandbox on " << host << ':' << port << '\n';
    st = ctir_sandbox_serve(session, host.c_str(), port);
    return st == CTIR_OK ? 0 : report_last_error(st);
  }

  char* out = nullptr;
  st = ctir_session_run(session, chosen->name.c_str(), chosen->to_args().dump().c_str(), &out);
  if (st != CTIR_OK) return report_last_error(st);
  std::cout << out << '\n';
  ctir_string_free(out);
  return 0;
}
