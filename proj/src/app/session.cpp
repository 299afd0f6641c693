// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#include "app/session.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <functional>
#include <set>

#include "app/config.hpp"
#include "clients/transport.hpp"
#include "core/error.hpp"
#include "core/serialize.hpp"
#include "datasynth/pipeline.hpp"
#include "evalbench/evalbench.hpp"
#include "grpo/grpo.hpp"
#include "parser/turn_parser.hpp"
#include "reward/reward.hpp"

namespace ctir::app {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void usage(const std::string& msg) { fail(ErrorCode::Usage, msg); }

std::string req_str(const json& a, const char* key) {
  if (!a.contains(key) || !a[key].is_string() || a[key].get<std::string>().empty()) {
    usage(std::string("missing required argument --") + key);
  }
  return a[key].get<std::string>();
}

std::optional<std::string> opt_str(const json& a, const char* key) {
  if (!a.contains(key) || a[key].is_null()) return std::nullopt;
  if (!a[key].is_string()) usage(std::string("--") + key + " must be a string");
  return a[key].get<std::string>();
}

std::optional<std::int64_t> opt_int(const json& a, const char* key) {
  if (!a.contains(key) || a[key].is_null()) return std::nullopt;
  if (!a[key].is_number_integer()) usage(std::string("--") + key + " must be an integer");
  return a[key].get<std::int64_t>();
}

std::optional<double> opt_num(const json& a, const char* key) {
  if (!a.contains(key) || a[key].is_null()) return std::nullopt;
  if (!a[key].is_number()) usage(std::string("--") + key + " must be a number");
  return a[key].get<double>();
}

std::vector<std::string> str_list(const json& a, const char* key) {
  if (!a.contains(key) || a[key].is_null()) return {};
  if (a[key].is_string()) return {a[key].get<std::string>()};
  if (!a[key].is_array()) usage(std::string("--") + key + " must be a list of strings");
  std::vector<std::string> out;
  for (const auto& v : a[key]) {
    if (!v.is_string()) usage(std::string("--") + key + " must be a list of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::size_t positive(std::int64_t v, const char* what) {
  if (v < 1) usage(std::string(what) + " must be >= 1");
  return static_cast<std::size_t>(v);
}

std::vector<QAItem> read_dataset(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) fail(ErrorCode::DatasetMalformed, "dataset " + path.string() + " not found");
  try {
    return read_qa_jsonl(path, AspectPool::defaults());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Io || e.code() == ErrorCode::MalformedRecord ||
        e.code() == ErrorCode::InvariantViolation || e.code() == ErrorCode::InvalidArgument) {
      fail(ErrorCode::DatasetMalformed, e.what());
    }
    throw;
  }
}

json prompt_versions() {
  return json{{"system", kSystemPromptVersion},     {"judge", kJudgeTemplateVersion},
              {"plot", kPlotPromptVersion},         {"quality", kQualityPromptVersion},
              {"figure_filter", kFigureFilterPromptVersion}, {"qa_gen", kQaPromptVersion},
              {"qa_check", kCheckPromptVersion}};
}

json summary_json(const StageSummary& s) {
  json outputs = json::array();
  for (const auto& p : s.outputs) outputs.push_back(p.string());
  return json{{"attempted", s.attempted}, {"kept", s.kept}, {"outputs", outputs}};
}

std::vector<std::string> path_strings(const std::vector<fs::path>& paths) {
  std::vector<std::string> out;
  for (const auto& p : paths) out.push_back(p.string());
  return out;
}

bool is_image_file(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

class ManifestScope {
 public:
  ManifestScope(Session& s, std::string subcommand) : session_(s), started_(utc_timestamp()), sub_(std::move(subcommand)) {}

  fs::path write(const fs::path& primary, const std::vector<fs::path>& outputs) const {
    RunManifest m{sub_,
                  session_.config_hash(),
                  session_.config(),
                  prompt_versions(),
                  session_.endpoint_identities(),
                  started_,
                  utc_timestamp(),
                  path_strings(outputs)};
    const auto path = manifest_path(primary);
    write_text_file(path, to_json(m).dump(2) + "\n");
    return path;
  }

 private:
  Session& session_;
  std::string started_;
  std::string sub_;
};

}  // namespace

json to_json(const RunManifest& m) {
  return json{{"subcommand", m.subcommand},   {"config_hash", m.config_hash}, {"config", m.config},
              {"prompt_versions", m.prompt_versions}, {"endpoints", m.endpoints}, {"started_at", m.started_at},
              {"finished_at", m.finished_at}, {"outputs", m.outputs}};
}

fs::path manifest_path(const fs::path& primary_output) {
  auto p = primary_output;
  if (p.has_filename()) return fs::path(p.string() + ".manifest.json");
  return p.parent_path() / "run.manifest.json";
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

Session::Session(json config) : config_(std::move(config)), hash_(app::config_hash(config_)) {}

ChatClient& Session::client(const std::string& role) {
  std::lock_guard lock(mu_);
  if (auto it = clients_.find(role); it != clients_.end()) return *it->second;
  const auto& section = config_.at(role);
  auto ep = endpoint_config(config_, role);
  const auto mode = section.at("cassette_mode").get<std::string>();
  const fs::path cassette = section.at("cassette").get<std::string>();
  std::shared_ptr<Transport> transport;
  if (mode == "replay") {
    transport = CassetteTransport::player(cassette);
  } else {
    if (ep.url.empty()) fail(ErrorCode::ConfigInvalid, role + ".endpoint_url is not set");
    std::string key;
    if (!ep.api_key_env.empty()) {
      const char* v = std::getenv(ep.api_key_env.c_str());
      if (!v) fail(ErrorCode::ConfigInvalid, role + ".api_key_env names unset variable " + ep.api_key_env);
      key = v;
    }
    transport = std::make_shared<HttpTransport>(ep.url, key, ep.timeout_s);
    if (mode == "record") transport = CassetteTransport::recorder(transport, cassette);
  }
  auto& slot = clients_[role];
  slot = std::make_unique<ChatClient>(std::move(transport), std::move(ep));
  return *slot;
}

Sandbox& Session::sandbox() {
  std::lock_guard lock(mu_);
  if (!sandbox_) {
    const auto& s = config_.at("sandbox");
    if (s.at("backend").get<std::string>() == "remote") {
      const auto opts = local_sandbox_options(config_);
      sandbox_ = std::make_shared<RemoteSandbox>(s.at("remote_url").get<std::string>(), opts.pool_size,
                                                 s.at("wall_timeout_s").get<double>() + 30.0);
    } else {
      sandbox_ = std::make_shared<LocalSandbox>(local_sandbox_options(config_));
    }
  }
  return *sandbox_;
}

json Session::endpoint_identities() const {
  std::lock_guard lock(mu_);
  json out = json::object();
  for (const auto& [role, c] : clients_) out[role] = c->identity();
  if (sandbox_) out["sandbox"] = sandbox_->identity();
  return out;
}

const std::vector<std::string>& Session::subcommands() {
  static const std::vector<std::string> names = {"synth-charts", "synth-qa", "coldstart",      "rollout",
                                                 "reward-check", "grpo-eval", "eval",          "entropy",
                                                 "stats",        "adapt-benchmark"};
  return names;
}

void Session::sandbox_serve(const std::string& host, int port) {
  if (config_.at("sandbox").at("backend").get<std::string>() != "local") {
    fail(ErrorCode::ConfigInvalid, "sandbox-serve needs sandbox.backend = \"local\"");
  }
  if (port < 0 || port > 65535) usage("port must be in 0..65535");
  sandbox();
  SandboxServer server(sandbox_);
  server.serve_forever(host, port);
}

namespace {

json cmd_synth_charts(Session& s, const json& a) {
  ManifestScope manifest(s, "synth-charts");
  const auto& cfg = s.config();
  SynthChartsOptions o;
  o.out_dir = req_str(a, "out");
  o.count = static_cast<std::size_t>(opt_int(a, "count").value_or(cfg["synth"]["count"].get<std::int64_t>()));
  o.seed = static_cast<std::uint64_t>(opt_int(a, "seed").value_or(cfg["synth"]["seed"].get<std::int64_t>()));
  if (auto r = opt_str(a, "reference_dir")) o.reference_dir = *r;
  if (auto r = opt_str(a, "arxiv_records")) o.arxiv_records = *r;
  if (o.count == 0 && !o.arxiv_records) usage("nothing to do: --count is 0 and no --arxiv-records given");
  o.pools = spec_pools(cfg);
  o.gen = chart_gen_options(cfg);
  o.quality = quality_thresholds(cfg);
  o.concurrency = positive(cfg["synth"]["concurrency"].get<std::int64_t>(), "synth.concurrency");
  auto& judge = s.client("judge");
  auto& llm = o.count > 0 ? s.client("llm") : judge;
  const auto summary = run_synth_charts(llm, judge, s.sandbox(), o);
  auto out = summary_json(summary);
  out["manifest"] = manifest.write(ChartDirs{o.out_dir}.meta(), summary.outputs).string();
  return out;
}

json cmd_synth_qa(Session& s, const json& a) {
  ManifestScope manifest(s, "synth-qa");
  const auto& cfg = s.config();
  SynthQaOptions o;
  o.charts_meta = req_str(a, "charts_meta");
  o.out_qa = req_str(a, "out");
  if (auto d = opt_str(a, "charts_dir")) o.charts_dir = *d;
  o.seed = static_cast<std::uint64_t>(opt_int(a, "seed").value_or(cfg["synth"]["seed"].get<std::int64_t>()));
  o.aspects_per_chart = positive(cfg["synth"]["aspects_per_chart"].get<std::int64_t>(), "synth.aspects_per_chart");
  o.check = check_params(cfg);
  o.pools = spec_pools(cfg);
  o.concurrency = positive(cfg["synth"]["concurrency"].get<std::int64_t>(), "synth.concurrency");
  const auto summary = run_synth_qa(s.client("llm"), s.client("judge"), o);
  auto out = summary_json(summary);
  out["manifest"] = manifest.write(o.out_qa, summary.outputs).string();
  return out;
}

json cmd_coldstart(Session& s, const json& a) {
  ManifestScope manifest(s, "coldstart");
  const auto& cfg = s.config();
  ColdStartOptions o;
  o.qa = req_str(a, "qa");
  o.images_dir = req_str(a, "images");
  o.out_sft = req_str(a, "out");
  o.rollout = rollout_config(cfg);
  o.match = match_policy(cfg);
  o.concurrency = positive(cfg["coldstart"]["concurrency"].get<std::int64_t>(), "coldstart.concurrency");
  read_dataset(o.qa);
  ChatClient* judge = o.match.judge_fallback ? &s.client("judge") : nullptr;
  const auto summary = run_cold_start(s.client("teacher"), s.sandbox(), o, judge);
  auto out = summary_json(summary);
  out["manifest"] = manifest.write(o.out_sft, summary.outputs).string();
  return out;
}

json cmd_rollout(Session& s, const json& a) {
  ManifestScope manifest(s, "rollout");
  const auto& cfg = s.config();
  const fs::path dataset = req_str(a, "dataset");
  const fs::path images_dir = req_str(a, "images");
  const fs::path out = req_str(a, "out");
  auto rc = rollout_config(cfg);
  if (auto g = opt_int(a, "group_size")) rc.group_size = static_cast<int>(positive(*g, "--group-size"));
  validate(rc);
  const auto match = match_policy(cfg);
  const auto weights = reward_weights(cfg);
  const auto grpo = grpo_config(cfg);
  const auto items = read_dataset(dataset);
  if (items.empty()) fail(ErrorCode::DatasetMalformed, "dataset " + dataset.string() + " has no items");

  DirectoryImageStore images(store_image_dir(out), {images_dir});
  TrajectoryStoreWriter store(out, images);
  ChatClient& policy = s.client("policy");
  ChatClient* judge = match.judge_fallback ? &s.client("judge") : nullptr;
  const fs::path rewards_path = out.string() + ".rewards.jsonl";
  std::string rewards_text;
  std::size_t failed_groups = 0;
  double reward_sum = 0.0;
  std::size_t reward_n = 0;
  for (const auto& item : items) {
    auto chart = images.find(item.image_ref);
    if (!chart) fail(ErrorCode::ImageNotFound, "image '" + item.image_ref + "' for item " + item.id + " not found");
    GroupSample group;
    try {
      group = run_group(policy, s.sandbox(), *chart, item.question, rc);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::PartialGroup) throw;
      ++failed_groups;
      rewards_text += json{{"item_id", item.id}, {"error", error_code_name(e.code())}, {"message", e.what()}}.dump() + "\n";
      continue;
    }
    std::vector<RewardBreakdown> breakdowns;
    std::vector<double> rewards;
    for (std::size_t g = 0; g < group.trajectories.size(); ++g) {
      breakdowns.push_back(total_reward(group.trajectories[g], group.raw_turns[g], item.answer, item.answer_type,
                                        weights, match, judge));
      rewards.push_back(breakdowns.back().total);
    }
    const auto advantages = compute_advantages(rewards, grpo);
    for (std::size_t g = 0; g < group.trajectories.size(); ++g) {
      store.append(StoredTrajectory{item.id, static_cast<int>(g), group.trajectories[g], group.raw_turns[g],
                                    group.diagnostics[g]});
      const auto& b = breakdowns[g];
      rewards_text += json{{"item_id", item.id},   {"member", g},        {"acc", b.acc},
                           {"format", b.format},   {"tool", b.tool},     {"total", b.total},
                           {"advantage", advantages[g]}}
                          .dump() +
                      "\n";
      reward_sum += b.total;
      ++reward_n;
    }
  }
  write_text_file(rewards_path, rewards_text);
  const std::vector<fs::path> outputs = {out, store_image_dir(out), rewards_path};
  json result{{"items", items.size()},
              {"group_size", rc.group_size},
              {"trajectories", reward_n},
              {"failed_groups", failed_groups},
              {"mean_reward", reward_n ? reward_sum / static_cast<double>(reward_n) : 0.0},
              {"outputs", path_strings(outputs)}};
  result["manifest"] = manifest.write(out, outputs).string();
  return result;
}

json cmd_reward_check(Session& s, const json& a) {
  ManifestScope manifest(s, "reward-check");
  const auto& cfg = s.config();
  const fs::path store_path = req_str(a, "store");
  const auto items = read_dataset(req_str(a, "qa"));
  std::vector<fs::path> read_dirs;
  if (auto d = opt_str(a, "images")) read_dirs.emplace_back(*d);
  DirectoryImageStore images(store_image_dir(store_path), read_dirs);
  const auto records = read_trajectory_store(store_path, images);
  std::map<std::string, const QAItem*> by_id;
  for (const auto& it : items) by_id[it.id] = &it;
  const auto match = match_policy(cfg);
  const auto weights = reward_weights(cfg);
  ChatClient* judge = match.judge_fallback ? &s.client("judge") : nullptr;

  json rows = json::array();
  double sums[4] = {0, 0, 0, 0};
  for (const auto& r : records) {
    auto it = by_id.find(r.item_id);
    if (it == by_id.end()) fail(ErrorCode::DatasetMalformed, "store item " + r.item_id + " is not in the QA file");
    const auto b = total_reward(r.trajectory, r.raw_turns, it->second->answer, it->second->answer_type, weights, match,
                                judge);
    rows.push_back(json{{"item_id", r.item_id}, {"member", r.member}, {"acc", b.acc}, {"format", b.format},
                        {"tool", b.tool},       {"total", b.total}});
    sums[0] += b.acc;
    sums[1] += b.format;
    sums[2] += b.tool;
    sums[3] += b.total;
  }
  const double n = records.empty() ? 1.0 : static_cast<double>(records.size());
  json report{{"n", records.size()},
              {"lambda1", weights.lambda1},
              {"lambda2", weights.lambda2},
              {"mean", {{"acc", sums[0] / n}, {"format", sums[1] / n}, {"tool", sums[2] / n}, {"total", sums[3] / n}}},
              {"per_trajectory", rows}};
  if (auto out = opt_str(a, "out")) {
    write_text_file(*out, report.dump(2) + "\n");
    report["manifest"] = manifest.write(*out, {fs::path(*out)}).string();
  }
  return report;
}

json cmd_grpo_eval(Session& s, const json& a) {
  auto gc = grpo_config(s.config());
  if (auto e = opt_num(a, "epsilon")) gc.epsilon = *e;
  validate(gc);
  const fs::path path = req_str(a, "fixtures");
  std::vector<MaskedTokenBatch> batch;
  for (const auto& j : read_jsonl(path)) batch.push_back(masked_batch_from_json(j));
  const auto terms = grpo_objective_terms(batch, gc);
  json out{{"objective", terms.objective},
           {"per_trajectory", terms.per_trajectory},
           {"n_trajectories", batch.size()},
           {"epsilon", gc.epsilon}};
  if (auto h = opt_num(a, "gradient_check")) {
    out["gradient_check"] = json{{"h", *h}, {"max_rel_error", objective_gradient_check(batch, gc, *h)}};
  }
  if (a.value("gradient", false)) out["gradient"] = grpo_objective_gradient(batch, gc);
  return out;
}

json cmd_eval(Session& s, const json& a) {
  ManifestScope manifest(s, "eval");
  const auto& cfg = s.config();
  const fs::path dataset = req_str(a, "dataset");
  const auto items = read_dataset(dataset);
  const fs::path report_path = req_str(a, "report");
  const auto images_dir = opt_str(a, "images").value_or(dataset.parent_path().string());
  const auto store_path = opt_str(a, "store");
  const auto csv_path = opt_str(a, "csv");

  EvalConfig ec;
  ec.rollout = rollout_config(cfg);
  ec.match = match_policy(cfg);
  ec.concurrency = positive(cfg["eval"]["concurrency"].get<std::int64_t>(), "eval.concurrency");
  ec.config_hash = s.config_hash();
  DirectoryImageStore images(store_path ? store_image_dir(*store_path) : fs::path{}, {fs::path(images_dir)});
  std::optional<TrajectoryStoreWriter> writer;
  if (store_path) writer.emplace(*store_path, images);
  ChatClient* judge = ec.match.judge_fallback ? &s.client("judge") : nullptr;
  const auto report = run_benchmark(s.client("policy"), s.sandbox(), items, images, ec, writer ? &*writer : nullptr,
                                    judge);
  std::vector<fs::path> outputs = {report_path};
  write_text_file(report_path, to_json(report).dump(2) + "\n");
  if (store_path) {
    outputs.emplace_back(*store_path);
    outputs.push_back(store_image_dir(*store_path));
  }
  if (csv_path) {
    write_text_file(*csv_path, to_csv(report));
    outputs.emplace_back(*csv_path);
  }
  json out{{"n_items", report.n_items},
           {"accuracy", report.accuracy},
           {"per_qtype_accuracy", report.per_qtype_accuracy},
           {"tool_distribution", {{"crop_pct", report.tools.crop_pct}, {"code_pct", report.tools.code_pct}}},
           {"mean_turns", report.mean_turns},
           {"policy_failures", report.policy_failures},
           {"outputs", path_strings(outputs)}};
  out["manifest"] = manifest.write(report_path, outputs).string();
  return out;
}

json cmd_entropy(Session& s, const json& a) {
  ManifestScope manifest(s, "entropy");
  auto base = s.config()["eval"]["entropy_log_base"].get<double>();
  if (auto b = opt_num(a, "log_base")) base = *b;
  std::vector<fs::path> files;
  for (const auto& p : str_list(a, "images")) {
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file() && is_image_file(e.path())) found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::is_regular_file(p, ec)) {
      files.emplace_back(p);
    } else {
      fail(ErrorCode::ImageNotFound, "no such image or directory: " + p);
    }
  }
  if (files.empty()) fail(ErrorCode::EmptyDataset, "no images given");
  json per = json::array();
  double sum = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const auto h = pixel_entropy(load_image(files[i], files[i].stem().string()), base);
    per.push_back(json{{"path", files[i].string()}, {"entropy", h}});
    sum += h;
    lo = i == 0 ? h : std::min(lo, h);
    hi = i == 0 ? h : std::max(hi, h);
  }
  json out{{"n_images", files.size()},
           {"avg_entropy", sum / static_cast<double>(files.size())},
           {"min_entropy", lo},
           {"max_entropy", hi},
           {"log_base", base},
           {"grayscale", "luma (299R + 587G + 114B + 500) / 1000, 8-bit"}};
  if (a.value("per_image", false)) out["per_image"] = per;
  if (auto o = opt_str(a, "out")) {
    auto full = out;
    full["per_image"] = per;
    write_text_file(*o, full.dump(2) + "\n");
    out["manifest"] = manifest.write(*o, {fs::path(*o)}).string();
  }
  return out;
}

json share_table(const std::map<std::string, std::size_t>& counts, std::size_t total) {
  json out = json::object();
  for (const auto& [k, n] : counts) {
    out[k] = json{{"count", n}, {"pct", total ? 100.0 * static_cast<double>(n) / static_cast<double>(total) : 0.0}};
  }
  return out;
}

json cmd_stats(Session& s, const json& a) {
  ManifestScope manifest(s, "stats");
  json out = json::object();
  if (auto qa = opt_str(a, "qa")) {
    const auto items = read_dataset(*qa);
    std::map<std::string, std::size_t> qtypes, aspects, answer_types, provenance, difficulty;
    for (const auto& it : items) {
      ++qtypes[std::string(to_string(it.qtype))];
      ++aspects[std::string(to_string(it.qtype)) + "/" + it.aspect];
      ++answer_types[std::string(to_string(it.answer_type))];
      ++provenance[std::string(to_string(it.provenance))];
      ++difficulty[std::to_string(it.difficulty)];
    }
    out["qa"] = json{{"n_items", items.size()},
                     {"qtype", share_table(qtypes, items.size())},
                     {"aspect", share_table(aspects, items.size())},
                     {"answer_type", share_table(answer_types, items.size())},
                     {"provenance", share_table(provenance, items.size())},
                     {"difficulty", share_table(difficulty, items.size())}};
  }
  if (auto meta = opt_str(a, "charts_meta")) {
    const auto lines = read_jsonl(*meta);
    std::map<std::string, std::size_t> sources, buckets, types, composite;
    std::size_t subplot_total = 0;
    std::size_t synth = 0;
    for (const auto& m : lines) {
      ++sources[m.value("source", "unknown")];
      if (!m.contains("spec")) continue;
      ++synth;
      const auto spec = chart_spec_from_json(m["spec"]);
      const int n = spec.num_subplots;
      ++buckets[n == 1 ? "1" : n <= 4 ? "2-4" : n <= 9 ? "5-9" : "9+"];
      std::set<std::string> distinct(spec.chart_types.begin(), spec.chart_types.end());
      ++composite[n > 1 && distinct.size() > 1 ? "composite" : "uniform"];
      for (const auto& t : spec.chart_types) ++types[t];
      subplot_total += spec.chart_types.size();
    }
    out["charts"] = json{{"n_charts", lines.size()},
                         {"source", share_table(sources, lines.size())},
                         {"subplots", share_table(buckets, synth)},
                         {"composition", share_table(composite, synth)},
                         {"chart_type_by_subplot", share_table(types, subplot_total)}};
  }
  if (auto store = opt_str(a, "store")) {
    std::vector<fs::path> read_dirs;
    if (auto d = opt_str(a, "images")) read_dirs.emplace_back(*d);
    DirectoryImageStore images(store_image_dir(*store), read_dirs);
    const auto records = read_trajectory_store(*store, images);
    const auto d = tool_distribution(records);
    std::map<std::string, std::size_t> term;
    std::size_t steps = 0;
    for (const auto& r : records) {
      ++term[std::string(to_string(r.trajectory.terminated_by))];
      steps += r.trajectory.steps.size();
    }
    out["store"] = json{{"n_trajectories", records.size()},
                        {"tool_distribution",
                         {{"crop_pct", d.crop_pct}, {"code_pct", d.code_pct}, {"crop_calls", d.crop_calls},
                          {"code_calls", d.code_calls}}},
                        {"mean_steps", records.empty() ? 0.0 : static_cast<double>(steps) / records.size()},
                        {"terminated_by", share_table(term, records.size())}};
  }
  if (out.empty()) usage("stats needs at least one of --qa, --charts-meta, --store");
  if (auto o = opt_str(a, "out")) {
    write_text_file(*o, out.dump(2) + "\n");
    out["manifest"] = manifest.write(*o, {fs::path(*o)}).string();
  }
  return out;
}

json cmd_adapt(Session& s, const json& a) {
  ManifestScope manifest(s, "adapt-benchmark");
  const fs::path source = req_str(a, "source");
  const fs::path out = req_str(a, "out");
  const fs::path images = req_str(a, "images_out");
  const auto format = opt_str(a, "format").value_or("generic");
  BenchmarkAdapter adapter;
  if (format == "generic") {
    adapter.name = opt_str(a, "name").value_or("bench");
  } else if (auto b = builtin_adapter(format)) {
    adapter = *b;
  } else {
    usage("unknown benchmark format '" + format + "'");
  }
  if (auto v = opt_str(a, "question_key")) adapter.question_key = *v;
  if (auto v = opt_str(a, "answer_key")) adapter.answer_key = *v;
  if (auto v = opt_str(a, "image_key")) adapter.image_key = *v;
  if (auto v = opt_str(a, "id_key")) adapter.id_key = *v;
  if (auto v = opt_str(a, "image_pattern")) adapter.image_pattern = *v;
  if (auto v = opt_str(a, "qtype")) {
    const auto q = parse_question_type(*v);
    if (!q) usage("--qtype must be recognition or reasoning");
    adapter.qtype = *q;
  }
  const auto n = adapt_benchmark(source, adapter, out, images);
  json result{{"items", n}, {"outputs", {out.string(), images.string()}}};
  result["manifest"] = manifest.write(out, {out, images}).string();
  return result;
}

}  // namespace

json Session::run(const std::string& subcommand, const json& args) {
  static const std::map<std::string, std::function<json(Session&, const json&)>> table = {
      {"synth-charts", cmd_synth_charts}, {"synth-qa", cmd_synth_qa}, {"coldstart", cmd_coldstart},
      {"rollout", cmd_rollout},           {"reward-check", cmd_reward_check}, {"grpo-eval", cmd_grpo_eval},
      {"eval", cmd_eval},                 {"entropy", cmd_entropy},   {"stats", cmd_stats},
      {"adapt-benchmark", cmd_adapt}};
  auto it = table.find(subcommand);
  if (it == table.end()) fail(ErrorCode::UnknownSubcommand, "unknown subcommand '" + subcommand + "'");
  if (!args.is_object()) usage("arguments must be a JSON object");
  try {
    return it->second(*this, args);
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedRecord, e.what());
  }
}

}  // namespace ctir::app
