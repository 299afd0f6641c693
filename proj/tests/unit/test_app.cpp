// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "app/config.hpp"
#include "app/session.hpp"
#include "core/serialize.hpp"
#include "support/fake_endpoint.hpp"

using namespace ctir;
using namespace ctir::testing;
namespace app = ctir::app;

namespace {

std::vector<QAItem> write_dataset(const TempDir& dir, int n) {
  std::vector<QAItem> items;
  for (int i = 0; i < n; ++i) {
    const std::string id = "chart-" + std::to_string(i);
    save_png(pattern_image(24, 24, id, i), DirectoryImageStore::file_for(dir / "data", id));
    items.push_back(QAItem{"q" + std::to_string(i), id, "What is item " + std::to_string(i) + "?",
                           std::to_string(i), QuestionType::Recognition, "Counting", AnswerType::Numeric, 2,
                           Provenance::Synth});
  }
  write_qa_jsonl(dir / "data" / "qa.jsonl", items);
  return items;
}

}  // namespace

TEST_SUITE("app") {
  TEST_CASE("TOML subset") {
    const auto j = app::parse_toml(R"(
# comment
extra.seed = 3
[rollout]
group_size = 4          # trailing comment
temperature = 0.5
[policy]
model = "m\"x"
cassette = 'C:\raw'
[synth]
subplot_weights = [
  1.0, 2,
  3.5,
]
)",
                                   "t.toml");
    CHECK(j["rollout"]["group_size"] == 4);
    CHECK(j["rollout"]["temperature"] == 0.5);
    CHECK(j["policy"]["model"] == "m\"x");
    CHECK(j["policy"]["cassette"] == "C:\\raw");
    CHECK(j["synth"]["subplot_weights"].size() == 3);
    CHECK(j["extra"]["seed"] == 3);
    CHECK(error_of([] { app::parse_toml("[a]\nx = \n", "t"); }) == ErrorCode::ConfigInvalid);
    CHECK(error_of([] { app::parse_toml("[a]\nx = 1\nx = 2\n", "t"); }) == ErrorCode::ConfigInvalid);
    const auto defaults = app::default_config();
    CHECK(app::parse_toml(app::to_toml(defaults), "rt") == defaults);
  }

  TEST_CASE("defaults") {
    const auto d = app::default_config();
    CHECK(d["reward"]["lambda1"] == 0.1);
    CHECK(d["reward"]["lambda2"] == 0.2);
    CHECK(d["rollout"]["max_assistant_turns"] == 4);
    CHECK(d["rollout"]["group_size"] == 8);
    CHECK(d["rollout"]["temperature"] == 1.0);
    CHECK(d["grpo"]["epsilon"] == 0.2);
    CHECK(d["sandbox"]["network_allowed"] == false);
    CHECK(d["sandbox"]["stdout_cap_bytes"] == 4096);
    CHECK(d["sandbox"]["wall_timeout_s"] == 10.0);
    CHECK(d["synth"]["votes_n"] == 5);
    CHECK(d["synth"]["vote_threshold"] == 0.8);
    CHECK(d["synth"]["difficulty_threshold"] == 3);
    const std::vector<double> w = d["synth"]["subplot_weights"];
    CHECK(w == std::vector<double>{51.32, 29.61, 18.26, 0.81});
    CHECK_NOTHROW(app::validate_config(d));
  }

  TEST_CASE("layer precedence") {
    TempDir dir;
    spit(dir / "c.toml", "[rollout]\ngroup_size = 4\nmax_parse_failures = 3\nseed = 9\n");
    app::ConfigSources src;
    src.file = dir / "c.toml";
    src.env = {{"CHART_TIR__ROLLOUT__GROUP_SIZE", "6"}, {"CHART_TIR__ROLLOUT__SEED", "11"}, {"HOME", "/x"}};
    src.sets = {"rollout.group_size=2"};
    const auto cfg = app::load_config(src);
    CHECK(cfg["rollout"]["group_size"] == 2);
    CHECK(cfg["rollout"]["seed"] == 11);
    CHECK(cfg["rollout"]["max_parse_failures"] == 3);
    CHECK(cfg["rollout"]["max_assistant_turns"] == 4);
  }

  TEST_CASE("invalid layers") {
    app::ConfigSources unknown;
    unknown.sets = {"rollout.bogus=1"};
    CHECK(error_of([&] { app::load_config(unknown); }) == ErrorCode::ConfigInvalid);
    app::ConfigSources kind;
    kind.sets = {"rollout.group_size=\"many\""};
    CHECK(error_of([&] { app::load_config(kind); }) == ErrorCode::ConfigInvalid);
    app::ConfigSources range;
    range.sets = {"grpo.epsilon=1.5"};
    CHECK(error_of([&] { app::load_config(range); }) == ErrorCode::ConfigInvalid);
    app::ConfigSources env;
    env.env = {{"CHART_TIR__NOPE__X", "1"}};
    CHECK(error_of([&] { app::load_config(env); }) == ErrorCode::ConfigInvalid);
    app::ConfigSources missing;
    missing.file = "/nonexistent/chart-tir.toml";
    CHECK(error_of([&] { app::load_config(missing); }) == ErrorCode::ConfigInvalid);
    app::ConfigSources replay;
    replay.sets = {"policy.cassette_mode=replay"};
    CHECK(error_of([&] { app::load_config(replay); }) == ErrorCode::ConfigInvalid);
  }

  TEST_CASE("config hash") {
    const auto a = app::default_config();
    auto b = json::parse(a.dump());
    CHECK(app::config_hash(a) == app::config_hash(b));
    app::apply_setting(b, "rollout.seed", "1", "test");
    CHECK(app::config_hash(a) != app::config_hash(b));
    CHECK(app::config_hash(a).size() == 64);
  }

  TEST_CASE("typed views") {
    auto cfg = app::default_config();
    app::apply_setting(cfg, "tools.min_crop_side", "4", "t");
    app::apply_setting(cfg, "sandbox.interpreter_cmd", "[\"python3\", \"-I\", \"-S\"]", "t");
    CHECK(app::tool_config(cfg).min_crop_side == 4);
    CHECK(app::local_sandbox_options(cfg).interpreter_cmd.size() == 3);
    CHECK(app::rollout_config(cfg).max_assistant_turns == 4);
    CHECK(app::reward_weights(cfg).lambda2 == 0.2);
    CHECK(app::spec_pools(cfg).subplot_buckets.size() == 4);
    CHECK(app::check_params(cfg).votes_n == 5);
  }

  TEST_CASE("session commands and manifests") {
    TempDir dir;
    app::Session s(app::default_config());
    CHECK(error_of([&] { s.run("bogus", json::object()); }) == ErrorCode::UnknownSubcommand);
    CHECK(error_of([&] { s.run("grpo-eval", json::object()); }) == ErrorCode::Usage);

    spit(dir / "f.jsonl", R"({"old_logprobs":[-1,-2],"new_logprobs":[-1,-2],"mask":[1,1],"advantage":1.5}
{"old_logprobs":[-3],"new_logprobs":[-3],"mask":[1],"advantage":-0.5}
)");
    const auto g = s.run("grpo-eval", json{{"fixtures", (dir / "f.jsonl").string()}});
    CHECK(g["objective"].get<double>() == doctest::Approx(0.5));

    save_png(ChartImage::filled(4, 4, {10, 10, 10}, "flat"), dir / "img" / "flat.png");
    const auto e = s.run("entropy", json{{"images", {(dir / "img").string()}}, {"out", (dir / "ent.json").string()}});
    CHECK(e["avg_entropy"] == 0.0);
    CHECK(fs::exists(app::manifest_path(dir / "ent.json")));
    const auto m = json::parse(slurp(app::manifest_path(dir / "ent.json")));
    CHECK(m["subcommand"] == "entropy");
    CHECK(m["config_hash"] == s.config_hash());
    CHECK(m["config"] == s.config());
    CHECK(m.contains("started_at"));
    CHECK(m.contains("finished_at"));
    CHECK(m.contains("prompt_versions"));

    CHECK(error_of([&] { s.run("eval", json{{"dataset", (dir / "missing.jsonl").string()}, {"report", "r.json"}}); }) ==
          ErrorCode::DatasetMalformed);
  }

  TEST_CASE("eval over HTTP with record and replay") {
    TempDir dir;
    write_dataset(dir, 5);
    FakeEndpoint endpoint([](const json& body) {
      const auto q = message_text(body["messages"][1]);
      const int i = std::stoi(q.substr(q.find("item ") + 5));
      const auto k = assistant_turns(body);
      if (k == 0) return crop_turn(0, 0, 12, 12);
      return answer_turn(std::to_string(i < 4 ? i : 99));
    });
    auto cfg = app::default_config();
    app::apply_setting(cfg, "policy.endpoint_url", endpoint.url(), "t");
    app::apply_setting(cfg, "policy.cassette", (dir / "policy.cassette.jsonl").string(), "t");
    app::apply_setting(cfg, "policy.cassette_mode", "record", "t");
    const json args{{"dataset", (dir / "data" / "qa.jsonl").string()},
                    {"report", (dir / "rec" / "report.json").string()},
                    {"store", (dir / "rec" / "traj.jsonl").string()}};
    const auto rec = app::Session(cfg).run("eval", args);
    CHECK(rec["accuracy"].get<double>() == doctest::Approx(0.8));
    CHECK(rec["tool_distribution"]["crop_pct"] == 100.0);
    CHECK(endpoint.calls() == 10);
    endpoint.stop();

    app::apply_setting(cfg, "policy.cassette_mode", "replay", "t");
    const json args2{{"dataset", (dir / "data" / "qa.jsonl").string()},
                     {"report", (dir / "rep" / "report.json").string()},
                     {"store", (dir / "rep" / "traj.jsonl").string()}};
    const auto rep = app::Session(cfg).run("eval", args2);
    CHECK(rep["accuracy"] == rec["accuracy"]);
    CHECK(slurp(dir / "rep" / "traj.jsonl") == slurp(dir / "rec" / "traj.jsonl"));
    auto r1 = json::parse(slurp(dir / "rec" / "report.json"));
    auto r2 = json::parse(slurp(dir / "rep" / "report.json"));
    CHECK(r1["items"] == r2["items"]);
  }

  TEST_CASE("rollout and reward-check commands") {
    TempDir dir;
    write_dataset(dir, 2);
    FakeEndpoint endpoint([](const json& body) {
      const auto q = message_text(body["messages"][1]);
      const int i = std::stoi(q.substr(q.find("item ") + 5));
      const int seed = body["seed"];
      if (assistant_turns(body) == 0) return code_turn("print(" + std::to_string(i) + ")");
      return answer_turn(seed % 2 == 0 ? std::to_string(i) : "wrong");
    });
    auto cfg = app::default_config();
    app::apply_setting(cfg, "policy.endpoint_url", endpoint.url(), "t");
    app::Session s(cfg);
    const auto out = s.run("rollout", json{{"dataset", (dir / "data" / "qa.jsonl").string()},
                                           {"images", (dir / "data").string()},
                                           {"out", (dir / "r" / "traj.jsonl").string()},
                                           {"group_size", 4}});
    CHECK(out["trajectories"] == 8);
    CHECK(out["failed_groups"] == 0);
    const auto rewards = read_jsonl(dir / "r" / "traj.jsonl.rewards.jsonl");
    REQUIRE(rewards.size() == 8);
    for (const auto& r : rewards) {
      const bool even = r["member"].get<int>() % 2 == 0;
      CHECK(r["total"].get<double>() == doctest::Approx(even ? 1.3 : 0.1));
      CHECK(r["advantage"].get<double>() == doctest::Approx(even ? 1.0 : -1.0));
    }
    CHECK(fs::exists(app::manifest_path(dir / "r" / "traj.jsonl")));
    const auto check = s.run("reward-check", json{{"store", (dir / "r" / "traj.jsonl").string()},
                                                  {"qa", (dir / "data" / "qa.jsonl").string()},
                                                  {"images", (dir / "data").string()}});
    CHECK(check["n"] == 8);
    CHECK(check["mean"]["total"].get<double>() == doctest::Approx(0.7));
  }
}
