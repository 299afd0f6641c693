// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#include "datasynth/agents.hpp"

#include <cctype>
#include <cstdio>
#include <map>
#include <regex>

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/text.hpp"
#include "parser/turn_parser.hpp"

namespace ctir {

using nlohmann::json;

namespace {

Sampling deterministic(int max_tokens) {
  Sampling s;
  s.temperature = 0.0;
  s.max_tokens = max_tokens;
  return s;
}

ChatMessage image_prompt(const ChartImage& image, std::string text) {
  return ChatMessage{Role::User, {ImagePart{image}, TextPart{std::move(text)}}};
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

bool ask_yes_no(ChatClient& checker, std::vector<ChatMessage> messages, std::string_view stage) {
  const auto reply = checker.complete(messages, deterministic(16)).text;
  const auto v = parse_yes_no(reply);
  if (!v) fail(ErrorCode::UnparseableVerdict, std::string(stage) + " reply is not yes/no: " + reply.substr(0, 120));
  return *v;
}

// Reasoning replies end with "verdict: yes|no"; the last such marker wins.
std::optional<bool> parse_final_verdict(std::string_view reply) {
  const auto lower = text::to_lower(reply);
  const auto at = lower.rfind("verdict:");
  if (at != std::string::npos) {
    auto rest = text::split_ws(lower.substr(at + 8));
    if (!rest.empty()) return parse_yes_no(rest.front());
  }
  return parse_yes_no(reply);
}

std::optional<int> parse_difficulty(std::string_view reply) {
  if (auto j = extract_json(reply); j && j->is_object() && j->contains("difficulty") &&
                                     (*j)["difficulty"].is_number_integer()) {
    const int d = (*j)["difficulty"].get<int>();
    if (d >= 1 && d <= 5) return d;
    return std::nullopt;
  }
  const auto t = text::trim(reply);
  static const std::regex kLeadingInt(R"(^\D{0,24}?(\d+))");
  std::smatch m;
  if (std::regex_search(t, m, kLeadingInt)) {
    const int d = std::stoi(m[1].str());
    if (d >= 1 && d <= 5) return d;
  }
  return std::nullopt;
}

std::string normalize_vote(std::string_view vote, AnswerType type) {
  if (type == AnswerType::Numeric) {
    if (auto v = parse_number(vote, true)) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.9g", *v);
      return buf;
    }
  } else if (type == AnswerType::Binary) {
    if (auto b = parse_binary(vote)) return *b ? "yes" : "no";
  }
  return normalize_text(vote, true);
}

json message_json(const ChatMessage& m, std::vector<std::string>& images) {
  json content = json::array();
  for (const auto& part : m.content) {
    if (const auto* t = std::get_if<TextPart>(&part)) {
      content.push_back({{"type", "text"}, {"text", t->text}});
    } else {
      const auto& id = std::get<ImagePart>(part).image.source_id();
      content.push_back({{"type", "image"}, {"image", id}});
      images.push_back(id);
    }
  }
  return json{{"role", to_string(m.role)}, {"content", std::move(content)}};
}

}  // namespace

std::string extract_code(std::string_view reply) {
  for (std::string_view open : {"```python", "```py", "```"}) {
    const auto at = reply.find(open);
    if (at == std::string_view::npos) continue;
    auto start = reply.find('\n', at);
    if (start == std::string_view::npos) continue;
    ++start;
    const auto end = reply.find("```", start);
    return std::string(reply.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
  }
  return text::trim(reply);
}

std::optional<json> extract_json(std::string_view reply) {
  const auto whole = text::trim(reply);
  if (auto j = json::parse(whole, nullptr, false); !j.is_discarded()) return j;
  if (const auto at = reply.find("```json"); at != std::string_view::npos) {
    const auto start = reply.find('\n', at);
    const auto end = start == std::string_view::npos ? start : reply.find("```", start);
    if (end != std::string_view::npos) {
      if (auto j = json::parse(reply.substr(start + 1, end - start - 1), nullptr, false); !j.is_discarded()) return j;
    }
  }
  for (auto [open, close] : {std::pair{'{', '}'}, std::pair{'[', ']'}}) {
    const auto b = reply.find(open);
    const auto e = reply.rfind(close);
    if (b == std::string_view::npos || e == std::string_view::npos || e <= b) continue;
    if (auto j = json::parse(reply.substr(b, e - b + 1), nullptr, false); !j.is_discarded()) return j;
  }
  return std::nullopt;
}

GeneratedChart generate_chart(ChatClient& llm, Sandbox& sandbox, const ChartSpec& spec, const ReferenceSnippet* ref,
                              const std::string& chart_id, const ChartGenOptions& opts, std::int64_t seed) {
  validate(spec);
  if (opts.max_repairs < 0) fail(ErrorCode::InvalidArgument, "max_repairs must be >= 0");
  std::string prompt = "Persona: " + spec.persona + "\n\nWrite a complete Python matplotlib program that draws one figure with " +
                       std::to_string(spec.num_subplots) + " subplot(s) in a grid of " +
                       std::to_string(spec.layout.rows) + " row(s) and " + std::to_string(spec.layout.cols) +
                       " column(s). Chart type of each subplot, in order: " + join(spec.chart_types, ", ") +
                       ".\nComplexity level " + std::to_string(spec.difficulty) +
                       " of 5: higher levels use more series, denser data and more annotations.\n"
                       "Invent realistic data this persona would plot and hard-code it in the program. Give every "
                       "subplot a title, axis labels where they apply, and a legend when there are several series. "
                       "Use the Agg backend and save the figure as chart.png in the working directory.\n"
                       "Reply with a single ```python code block.";
  if (ref != nullptr) prompt += "\n\nReference program showing the expected style:\n```python\n" + ref->code + "```";

  std::vector<ChatMessage> messages{
      text_message(Role::System, "You write self-contained Python plotting programs."),
      text_message(Role::User, prompt)};
  Sampling sampling;
  sampling.temperature = opts.temperature;
  sampling.max_tokens = opts.max_tokens;
  sampling.seed = seed;

  GeneratedChart out{{}, ChartImage::filled(1, 1, {255, 255, 255}, chart_id), 0, {}};
  for (int attempt = 0; attempt <= opts.max_repairs; ++attempt) {
    const auto reply = llm.complete(messages, sampling).text;
    const auto code = extract_code(reply);
    ExecRequest req;
    req.source = code;
    req.limits = opts.limits;
    req.capture_extensions = {".png"};
    const auto result = sandbox.execute(req);

    std::string error;
    if (result.exit != ExitKind::Ok) {
      error = std::string(to_string(result.exit)) + " (exit " + std::to_string(result.exit_code) + "): " +
              text::tail(text::trim(result.stderr_text), 1500);
    } else {
      const CapturedFile* png = nullptr;
      for (const auto& c : result.captured) {
        if (c.path == "chart.png") png = &c;
      }
      if (png == nullptr && !result.captured.empty()) png = &result.captured.front();
      if (png == nullptr) {
        error = "the program finished but wrote no PNG file; save the figure as chart.png";
      } else {
        try {
          out.image = decode_png(png->data, chart_id);
          out.code = code;
          out.repairs = attempt;
          return out;
        } catch (const Error& e) {
          error = std::string("the saved PNG could not be read: ") + e.what();
        }
      }
    }
    out.errors.push_back(error);
    messages.push_back(text_message(Role::Assistant, reply));
    messages.push_back(text_message(Role::User, "Running the program failed:\n" + error +
                                                    "\nReturn the corrected complete program in a single ```python "
                                                    "code block."));
  }
  fail(ErrorCode::RenderFailed, chart_id + ": no valid chart after " + std::to_string(opts.max_repairs + 1) +
                                    " executions; last error: " + out.errors.back().substr(0, 300));
}

QualityVerdict parse_quality_reply(std::string_view reply, QualityThresholds thresholds) {
  std::optional<int> visual;
  std::optional<int> semantic;
  if (auto j = extract_json(reply); j && j->is_object()) {
    if (j->contains("visual") && (*j)["visual"].is_number_integer()) visual = (*j)["visual"].get<int>();
    if (j->contains("semantic") && (*j)["semantic"].is_number_integer()) semantic = (*j)["semantic"].get<int>();
  }
  const auto lower = text::to_lower(reply);
  static const std::regex kVisual(R"(visual\w*\s*[:=]\s*(\d+))");
  static const std::regex kSemantic(R"(semantic\w*\s*[:=]\s*(\d+))");
  std::smatch m;
  if (!visual && std::regex_search(lower, m, kVisual)) visual = std::stoi(m[1].str());
  if (!semantic && std::regex_search(lower, m, kSemantic)) semantic = std::stoi(m[1].str());
  if (!visual || !semantic || *visual < 1 || *visual > 5 || *semantic < 1 || *semantic > 5) {
    fail(ErrorCode::UnparseableVerdict, "quality reply lacks visual/semantic scores in 1..5: " +
                                            std::string(reply.substr(0, 120)));
  }
  return QualityVerdict{*visual, *semantic, *visual >= thresholds.visual && *semantic >= thresholds.semantic};
}

QualityVerdict filter_image(ChatClient& judge, const ChartImage& image, QualityThresholds thresholds) {
  const std::vector<ChatMessage> messages{
      text_message(Role::System, "You review chart images for a training dataset."),
      image_prompt(image,
                   "Score this chart on two scales from 1 (unusable) to 5 (excellent).\n"
                   "visual: penalize severe overlap, misaligned elements and unreadable text.\n"
                   "semantic: the title, axes, labels, legend and data needed to read the chart are present.\n"
                   "Reply with JSON only: {\"visual\": <1-5>, \"semantic\": <1-5>}")};
  return parse_quality_reply(judge.complete(messages, deterministic(64)).text, thresholds);
}

bool filter_arxiv_record(ChatClient& judge, const ArxivFigureRecord& rec) {
  if (text::trim(rec.caption).empty() && text::trim(rec.context).empty()) return false;
  const std::vector<ChatMessage> messages{
      text_message(Role::System, "You classify figures extracted from scientific papers."),
      image_prompt(rec.image, "Caption: " + rec.caption + "\nContext: " + rec.context +
                                  "\n\nIs this figure a data visualization such as a plot or chart? Reply with one "
                                  "word: chart, diagram, photo, table, illustration or other.")};
  const auto reply = judge.complete(messages, deterministic(16)).text;
  std::string label;
  if (auto j = extract_json(reply); j && j->is_object() && j->contains("label") && (*j)["label"].is_string()) {
    label = (*j)["label"].get<std::string>();
  } else {
    label = reply;
  }
  label = text::to_lower(text::trim(label));
  while (!label.empty() && std::ispunct(static_cast<unsigned char>(label.back())) && label.back() != '-') {
    label.pop_back();
  }
  if (label == "chart" || label == "plot") return true;
  static const std::vector<std::string> kOther = {"diagram", "photo", "table", "illustration", "schematic",
                                                  "equation", "other", "non-chart", "not a chart", "image"};
  if (std::find(kOther.begin(), kOther.end(), label) != kOther.end()) return false;
  fail(ErrorCode::UnparseableVerdict, "figure classification reply not understood: " + reply.substr(0, 120));
}

std::vector<QAItem> generate_qa(ChatClient& llm, const ChartImage& image, const std::string& context,
                                const std::string& aspect, QuestionType qtype, const AspectPool& pool,
                                const std::string& image_ref, Provenance provenance, std::int64_t seed) {
  if (!pool.contains(qtype, aspect)) {
    fail(ErrorCode::PreconditionFailed,
         "aspect '" + aspect + "' is not in the " + std::string(to_string(qtype)) + " aspect pool");
  }
  const std::string kind = qtype == QuestionType::Recognition
                               ? "recognition questions, which identify chart elements or extract values and structure"
                               : "reasoning questions, which need multi-step visual analysis and numerical reasoning";
  const std::vector<ChatMessage> messages{
      text_message(Role::System, "You write question-answer pairs about charts."),
      image_prompt(image, "Chart context:\n" + context + "\n\nWrite up to 3 " + kind +
                              ". Every question must target this aspect: " + aspect +
                              ".\nEach answer must be short and verifiable from the chart image alone.\n"
                              "Reply with a JSON array of objects with keys question, answer and answer_type "
                              "(one of text, numeric, binary, list_range).")};
  Sampling sampling;
  sampling.temperature = 0.7;
  sampling.max_tokens = 2048;
  sampling.seed = seed;
  const auto reply = llm.complete(messages, sampling).text;

  auto parsed = extract_json(reply);
  if (parsed && parsed->is_object()) {
    for (const char* key : {"items", "qa", "questions"}) {
      if (parsed->contains(key) && (*parsed)[key].is_array()) {
        parsed = (*parsed)[key];
        break;
      }
    }
  }
  if (!parsed || !parsed->is_array() || parsed->empty()) {
    fail(ErrorCode::GenerationUnparseable, "QA reply is not a non-empty JSON array");
  }
  std::vector<QAItem> items;
  for (const auto& e : *parsed) {
    if (!e.is_object() || !e.contains("question") || !e["question"].is_string() || !e.contains("answer")) {
      fail(ErrorCode::GenerationUnparseable, "QA entry without question and answer");
    }
    const auto& a = e["answer"];
    std::string answer = a.is_string() ? a.get<std::string>() : (a.is_number() || a.is_boolean() ? a.dump() : "");
    answer = text::trim(answer);
    const auto question = text::trim(e["question"].get<std::string>());
    if (answer.empty() || question.empty()) fail(ErrorCode::GenerationUnparseable, "QA entry with an empty field");
    AnswerType at = AnswerType::Text;
    if (e.contains("answer_type")) {
      const auto parsed_type = e["answer_type"].is_string()
                                   ? parse_answer_type(text::to_lower(e["answer_type"].get<std::string>()))
                                   : std::nullopt;
      if (!parsed_type) fail(ErrorCode::GenerationUnparseable, "QA entry with an unknown answer_type");
      at = *parsed_type;
    }
    QAItem item;
    item.image_ref = image_ref;
    item.question = question;
    item.answer = answer;
    item.qtype = qtype;
    item.aspect = aspect;
    item.answer_type = at;
    item.difficulty = 1;
    item.provenance = provenance;
    items.push_back(std::move(item));
  }
  return items;
}

void validate(const CheckParams& p) {
  if (p.votes_n < 1) fail(ErrorCode::ConfigInvalid, "votes_n must be >= 1");
  if (!(p.vote_threshold >= 0.0 && p.vote_threshold <= 1.0)) {
    fail(ErrorCode::ConfigInvalid, "vote_threshold must lie in [0, 1]");
  }
  if (p.difficulty_threshold < 1 || p.difficulty_threshold > 5) {
    fail(ErrorCode::ConfigInvalid, "difficulty_threshold must lie in 1..5");
  }
}

bool check_passes(const CheckReport& r, QuestionType qtype, const CheckParams& p) {
  return r.alignment_ok && r.reasoning_ok && r.agreement >= p.vote_threshold &&
         (qtype == QuestionType::Recognition || r.difficulty >= p.difficulty_threshold);
}

double vote_agreement(const std::vector<std::string>& votes, AnswerType answer_type, std::string* modal) {
  if (votes.empty()) return 0.0;
  std::vector<std::string> keys;
  std::map<std::string, int> counts;
  for (const auto& v : votes) {
    auto k = normalize_vote(v, answer_type);
    if (counts[k]++ == 0) keys.push_back(k);
  }
  const std::string* best = &keys.front();
  for (const auto& k : keys) {
    if (counts[k] > counts[*best]) best = &k;
  }
  if (modal) *modal = *best;
  return static_cast<double>(counts[*best]) / static_cast<double>(votes.size());
}

CheckReport check_qa(ChatClient& checker, const QAItem& item, const ChartImage& image, const CheckParams& params) {
  validate(params);
  const std::string qa = "Question: " + item.question + "\nAnswer: " + item.answer;
  const auto system = text_message(Role::System, "You audit question-answer pairs written about charts.");
  CheckReport r;

  r.alignment_ok = ask_yes_no(
      checker,
      {system, image_prompt(image, qa + "\n\nCan the question be answered from this chart image alone, without outside "
                                       "knowledge or claims the chart does not support? Reply yes or no.")},
      "alignment");

  {
    const auto reply =
        checker
            .complete({system, image_prompt(image, qa + "\n\nCheck the answer step by step against the chart. End "
                                                        "with a final line 'verdict: yes' if the answer is correct "
                                                        "and consistent with the chart, otherwise 'verdict: no'.")},
                      deterministic(1024))
            .text;
    const auto v = parse_final_verdict(reply);
    if (!v) fail(ErrorCode::UnparseableVerdict, "reasoning verification reply has no verdict");
    r.reasoning_ok = *v;
  }

  for (int i = 0; i < params.votes_n; ++i) {
    Sampling s;
    s.temperature = params.vote_temperature;
    s.max_tokens = 256;
    s.seed = i;
    r.votes.push_back(text::trim(
        checker
            .complete({image_prompt(image, "Answer the question about this chart. Reply with the short final answer "
                                           "only.\nQuestion: " + item.question)},
                      s)
            .text));
  }
  r.agreement = vote_agreement(r.votes, item.answer_type, &r.modal_answer);

  {
    const auto reply =
        checker
            .complete({system, image_prompt(image, qa + "\n\nRate how much visual and numerical reasoning the "
                                                        "question needs, from 1 (a single direct lookup) to 5 "
                                                        "(multi-step reasoning across several chart elements). "
                                                        "Reply with the number only.")},
                      deterministic(16))
            .text;
    const auto d = parse_difficulty(reply);
    if (!d) fail(ErrorCode::UnparseableVerdict, "difficulty reply is not a score in 1..5: " + reply.substr(0, 60));
    r.difficulty = *d;
  }
  r.kept = check_passes(r, item.qtype, params);
  return r;
}

json to_json(const CheckReport& r) {
  return json{{"alignment_ok", r.alignment_ok}, {"reasoning_ok", r.reasoning_ok}, {"votes", r.votes},
              {"modal_answer", r.modal_answer},  {"agreement", r.agreement},       {"difficulty", r.difficulty},
              {"kept", r.kept}};
}

CheckReport check_report_from_json(const json& j) {
  try {
    CheckReport r;
    r.alignment_ok = j.at("alignment_ok").get<bool>();
    r.reasoning_ok = j.at("reasoning_ok").get<bool>();
    r.votes = j.at("votes").get<std::vector<std::string>>();
    r.modal_answer = j.value("modal_answer", std::string{});
    r.agreement = j.at("agreement").get<double>();
    r.difficulty = j.at("difficulty").get<int>();
    r.kept = j.at("kept").get<bool>();
    return r;
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedRecord, std::string("bad check report: ") + e.what());
  }
}

std::vector<ColdStartOutcome> distill_cold_start(ChatClient& teacher, Sandbox& sandbox,
                                                 const std::vector<ColdStartInput>& inputs, const RolloutConfig& cfg,
                                                 const MatchPolicy& match, std::size_t concurrency,
                                                 ChatClient* judge) {
  std::vector<std::optional<ColdStartOutcome>> slots(inputs.size());
  parallel_for(inputs.size(), concurrency, [&](std::size_t i) {
    const auto& in = inputs[i];
    auto r = run_trajectory(teacher, sandbox, in.image, in.item.question, cfg, static_cast<int>(i));
    ColdStartOutcome o{in.item.id, std::move(r), false, {}};
    const auto& t = o.rollout.trajectory;
    if (t.terminated_by != Termination::Answer) {
      o.reason = "no final answer (" + std::string(to_string(t.terminated_by)) + ")";
    } else if (std::any_of(t.steps.begin(), t.steps.end(), [](const Step& s) { return is_tool_error(s.observation); })) {
      o.reason = "tool execution error";
    } else if (!trajectory_format_ok(t, o.rollout.raw_turns)) {
      o.reason = "format violation";
    } else if (accuracy_reward(t.answer, in.item.answer, in.item.answer_type, match, judge, in.item.question) != 1) {
      o.reason = "wrong answer";
    } else {
      o.kept = true;
    }
    slots[i] = std::move(o);
  });
  std::vector<ColdStartOutcome> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

json sft_record(const std::string& item_id, const RolloutResult& r) {
  const auto& t = r.trajectory;
  std::vector<std::string> images;
  json messages = json::array();
  for (const auto& m : initial_messages(t.image, t.question)) messages.push_back(message_json(m, images));
  for (std::size_t i = 0; i < r.raw_turns.size(); ++i) {
    messages.push_back(message_json(text_message(Role::Assistant, r.raw_turns[i]), images));
    if (i < t.steps.size()) messages.push_back(message_json(observation_message(t.steps[i].observation), images));
  }
  return json{{"id", item_id},
              {"prompt_version", kSystemPromptVersion},
              {"images", images},
              {"messages", std::move(messages)}};
}

}  // namespace ctir
