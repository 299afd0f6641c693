// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#include "evalbench/evalbench.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/text.hpp"

namespace ctir {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void count_calls(const Trajectory& t, std::size_t& crop, std::size_t& code) {
  for (const auto& s : t.steps) {
    if (std::holds_alternative<CropAction>(s.action)) ++crop;
    else ++code;
  }
}

ToolDistribution make_distribution(std::size_t crop, std::size_t code) {
  ToolDistribution d{crop, code, 0.0, 0.0};
  const auto total = crop + code;
  if (total == 0) return d;
  d.crop_pct = 100.0 * static_cast<double>(crop) / static_cast<double>(total);
  d.code_pct = 100.0 * static_cast<double>(code) / static_cast<double>(total);
  return d;
}

std::string csv_field(std::string_view s) {
  const bool quote = s.find_first_of(",\"\n\r") != std::string_view::npos;
  if (!quote) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string field_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array() && v.size() == 1) return field_string(v[0]);
  if (v.is_null()) return {};
  return v.dump();
}

}  // namespace

ToolDistribution tool_distribution(const std::vector<Trajectory>& trajectories) {
  std::size_t crop = 0;
  std::size_t code = 0;
  for (const auto& t : trajectories) count_calls(t, crop, code);
  return make_distribution(crop, code);
}

ToolDistribution tool_distribution(const std::vector<StoredTrajectory>& store) {
  std::size_t crop = 0;
  std::size_t code = 0;
  for (const auto& r : store) count_calls(r.trajectory, crop, code);
  return make_distribution(crop, code);
}

std::uint8_t luma(Rgb p) noexcept {
  return static_cast<std::uint8_t>((299u * p.r + 587u * p.g + 114u * p.b + 500u) / 1000u);
}

double pixel_entropy(const ChartImage& image, double log_base) {
  if (!(log_base > 1.0)) fail(ErrorCode::InvalidArgument, "entropy log base must be > 1");
  std::array<std::uint64_t, 256> hist{};
  const auto bytes = image.bytes();
  for (std::size_t i = 0; i + 2 < bytes.size(); i += 3) ++hist[luma({bytes[i], bytes[i + 1], bytes[i + 2]})];
  const auto n = static_cast<double>(image.width()) * static_cast<double>(image.height());
  double h = 0.0;
  for (auto c : hist) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return log_base == 2.0 ? h : h / std::log2(log_base);
}

double avg_pixel_entropy(const std::vector<ChartImage>& images, double log_base) {
  if (images.empty()) fail(ErrorCode::EmptyDataset, "entropy needs at least one image");
  double sum = 0.0;
  for (const auto& img : images) sum += pixel_entropy(img, log_base);
  return sum / static_cast<double>(images.size());
}

EvalReport run_benchmark(ChatClient& policy, Sandbox& sandbox, const std::vector<QAItem>& items,
                         const ImageStore& images, const EvalConfig& cfg, TrajectoryStoreWriter* store,
                         ChatClient* judge) {
  if (items.empty()) fail(ErrorCode::DatasetMalformed, "benchmark dataset has no items");
  auto rollout = cfg.rollout;
  rollout.sampling.temperature = 0.0;

  std::vector<ChartImage> charts;
  charts.reserve(items.size());
  for (const auto& item : items) {
    auto img = images.find(item.image_ref);
    if (!img) fail(ErrorCode::ImageNotFound, "image '" + item.image_ref + "' for item " + item.id + " not found");
    charts.push_back(*img);
  }

  std::vector<std::optional<EvalItemResult>> results(items.size());
  std::vector<std::optional<RolloutResult>> rollouts(items.size());
  parallel_for(items.size(), cfg.concurrency, [&](std::size_t i) {
    const auto& item = items[i];
    EvalItemResult r;
    r.item_id = item.id;
    r.qtype = item.qtype;
    r.aspect = item.aspect;
    r.answer_type = item.answer_type;
    r.gold = item.answer;
    std::optional<RolloutResult> ro;
    try {
      ro = run_trajectory(policy, sandbox, charts[i], item.question, rollout, 0);
    } catch (const PolicyFailureError& e) {
      ro = e.partial();
      r.diagnostic = e.what();
    }
    const auto& t = ro->trajectory;
    r.pred = t.answer;
    r.turns = ro->raw_turns.size();
    r.terminated_by = t.terminated_by;
    count_calls(t, r.crop_calls, r.code_calls);
    r.acc = accuracy_reward(t.answer, item.answer, item.answer_type, cfg.match, judge, item.question);
    results[i] = std::move(r);
    rollouts[i] = std::move(ro);
  });

  EvalReport rep;
  rep.n_items = items.size();
  rep.config_hash = cfg.config_hash;
  std::size_t correct = 0;
  std::size_t turns = 0;
  std::size_t crop = 0;
  std::size_t code = 0;
  std::map<std::string, std::size_t> qcorrect;
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto& r = *results[i];
    correct += static_cast<std::size_t>(r.acc);
    turns += r.turns;
    crop += r.crop_calls;
    code += r.code_calls;
    const std::string q(to_string(r.qtype));
    ++rep.per_qtype_count[q];
    qcorrect[q] += static_cast<std::size_t>(r.acc);
    if (!r.diagnostic.empty()) ++rep.policy_failures;
    if (store) {
      store->append(StoredTrajectory{r.item_id, 0, rollouts[i]->trajectory, rollouts[i]->raw_turns, r.diagnostic});
    }
    rep.items.push_back(std::move(r));
  }
  rep.accuracy = static_cast<double>(correct) / static_cast<double>(items.size());
  for (const auto& [q, n] : rep.per_qtype_count) {
    rep.per_qtype_accuracy[q] = static_cast<double>(qcorrect[q]) / static_cast<double>(n);
  }
  rep.tools = make_distribution(crop, code);
  rep.mean_turns = static_cast<double>(turns) / static_cast<double>(items.size());
  return rep;
}

json to_json(const EvalReport& r) {
  json items = json::array();
  for (const auto& it : r.items) {
    json j{{"item_id", it.item_id},
           {"qtype", to_string(it.qtype)},
           {"aspect", it.aspect},
           {"answer_type", to_string(it.answer_type)},
           {"gold", it.gold},
           {"acc", it.acc},
           {"turns", it.turns},
           {"crop_calls", it.crop_calls},
           {"code_calls", it.code_calls},
           {"terminated_by", to_string(it.terminated_by)}};
    j["pred"] = it.pred ? json(*it.pred) : json(nullptr);
    if (!it.diagnostic.empty()) j["diagnostic"] = it.diagnostic;
    items.push_back(std::move(j));
  }
  return json{{"schema", kEvalReportSchema},
              {"n_items", r.n_items},
              {"accuracy", r.accuracy},
              {"per_qtype_accuracy", r.per_qtype_accuracy},
              {"per_qtype_count", r.per_qtype_count},
              {"tool_distribution",
               {{"crop_pct", r.tools.crop_pct},
                {"code_pct", r.tools.code_pct},
                {"crop_calls", r.tools.crop_calls},
                {"code_calls", r.tools.code_calls}}},
              {"mean_turns", r.mean_turns},
              {"policy_failures", r.policy_failures},
              {"config_hash", r.config_hash},
              {"items", std::move(items)}};
}

std::string to_csv(const EvalReport& r) {
  std::ostringstream out;
  out << "item_id,qtype,aspect,answer_type,gold,pred,acc,turns,crop_calls,code_calls,terminated_by\n";
  for (const auto& it : r.items) {
    out << csv_field(it.item_id) << ',' << to_string(it.qtype) << ',' << csv_field(it.aspect) << ','
        << to_string(it.answer_type) << ',' << csv_field(it.gold) << ',' << csv_field(it.pred.value_or("")) << ','
        << it.acc << ',' << it.turns << ',' << it.crop_calls << ',' << it.code_calls << ','
        << to_string(it.terminated_by) << '\n';
  }
  return out.str();
}

std::optional<BenchmarkAdapter> builtin_adapter(std::string_view name) {
  if (name == "chartqa") {
    return BenchmarkAdapter{"chartqa", "query", "label", "imgname", "", "png/{}", QuestionType::Reasoning};
  }
  if (name == "charxiv-reasoning") {
    return BenchmarkAdapter{"charxiv-reasoning", "raw_question", "answer", "figure_id", "", "images/{}.jpg",
                            QuestionType::Reasoning};
  }
  if (name == "charxiv-descriptive") {
    return BenchmarkAdapter{"charxiv-descriptive", "raw_question", "answer", "figure_id", "", "images/{}.jpg",
                            QuestionType::Recognition};
  }
  return std::nullopt;
}

AnswerType infer_answer_type(std::string_view answer) {
  if (parse_binary(answer)) return AnswerType::Binary;
  if (parse_number(answer, false)) return AnswerType::Numeric;
  const auto t = text::trim(answer);
  if (t.size() > 1 && t.back() == '%' && parse_number(std::string_view(t).substr(0, t.size() - 1), false)) {
    return AnswerType::Numeric;
  }
  if (t.size() >= 2 && t.front() == '[' && t.back() == ']') return AnswerType::ListRange;
  return AnswerType::Text;
}

std::size_t adapt_benchmark(const fs::path& source, const BenchmarkAdapter& adapter, const fs::path& out_qa,
                            const fs::path& out_images) {
  std::vector<std::pair<std::string, json>> records;
  const auto text = read_text_file(source);
  auto whole = json::parse(text, nullptr, false);
  if (!whole.is_discarded() && whole.is_array()) {
    for (std::size_t i = 0; i < whole.size(); ++i) records.emplace_back(std::to_string(i), whole[i]);
  } else if (!whole.is_discarded() && whole.is_object()) {
    for (auto it = whole.begin(); it != whole.end(); ++it) records.emplace_back(it.key(), it.value());
  } else {
    std::size_t i = 0;
    for (auto& j : read_jsonl(source)) records.emplace_back(std::to_string(i++), std::move(j));
  }
  if (records.empty()) fail(ErrorCode::DatasetMalformed, source.string() + " holds no records");

  std::vector<QAItem> items;
  std::map<std::string, std::string> saved;
  for (std::size_t n = 0; n < records.size(); ++n) {
    const auto& [key, rec] = records[n];
    const auto where = source.string() + ": record " + key;
    if (!rec.is_object() || !rec.contains(adapter.question_key) || !rec.contains(adapter.answer_key) ||
        !rec.contains(adapter.image_key)) {
      fail(ErrorCode::DatasetMalformed, where + " lacks " + adapter.question_key + "/" + adapter.answer_key + "/" +
                                            adapter.image_key);
    }
    const auto image_field = field_string(rec[adapter.image_key]);
    auto rel = adapter.image_pattern;
    if (const auto at = rel.find("{}"); at != std::string::npos) rel.replace(at, 2, image_field);
    const auto image_id = adapter.name + "-" + sanitize_source_id(fs::path(image_field).stem().string());
    if (!saved.count(image_id)) {
      const auto img = load_image(source.parent_path() / rel, image_id);
      save_png(img, DirectoryImageStore::file_for(out_images, image_id));
      saved[image_id] = rel;
    }
    QAItem item;
    item.id = adapter.name + "-" + (adapter.id_key.empty() || !rec.contains(adapter.id_key)
                                        ? key
                                        : field_string(rec[adapter.id_key]));
    item.image_ref = image_id;
    item.question = text::trim(field_string(rec[adapter.question_key]));
    item.answer = text::trim(field_string(rec[adapter.answer_key]));
    if (item.question.empty() || item.answer.empty()) fail(ErrorCode::DatasetMalformed, where + " has an empty field");
    item.qtype = adapter.qtype;
    item.aspect = "General";
    item.answer_type = infer_answer_type(item.answer);
    item.difficulty = 3;
    item.provenance = Provenance::ArxivMined;
    items.push_back(std::move(item));
  }
  write_qa_jsonl(out_qa, items);
  return items.size();
}

}  // namespace ctir
