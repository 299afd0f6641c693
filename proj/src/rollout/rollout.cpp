// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#include "rollout/rollout.hpp"

#include <atomic>
#include <mutex>
#include <optional>
#include <thread>

#include "parser/turn_parser.hpp"

namespace ctir {

const std::string& system_prompt() {
  static const std::string prompt = R"(You answer questions about a chart image. Think step by step and use tools when they help.

Every reply must have exactly this shape:
<think>your reasoning</think>
followed by exactly one of
<tool_call>{"name": "crop", "arguments": {"bbox": [x0, y0, x1, y1]}}</tool_call>
<tool_call>{"name": "code", "arguments": {"source": "python code"}}</tool_call>
<answer>final answer</answer>

Tools:
- crop: returns the region of the chart inside the pixel box [x0, y0, x1, y1]. The origin is the top-left corner and x1, y1 are exclusive.
- code: runs a Python program and returns what it prints to standard output. The chart is available read-only as chart.png in the working directory. There is no network access.

The tool_call payload must be a single line of JSON. Tool results arrive in the next user message. Give the final answer as briefly as possible, without units unless they are asked for.)";
  return prompt;
}

void validate(const RolloutConfig& cfg) {
  if (cfg.max_assistant_turns < 1) fail(ErrorCode::ConfigInvalid, "max_assistant_turns must be >= 1");
  if (cfg.max_parse_failures < 1) fail(ErrorCode::ConfigInvalid, "max_parse_failures must be >= 1");
  if (cfg.group_size < 2) fail(ErrorCode::ConfigInvalid, "group_size must be >= 2");
  if (cfg.group_concurrency < 1) fail(ErrorCode::ConfigInvalid, "group_concurrency must be >= 1");
  if (!(cfg.partial_group_threshold >= 0.0 && cfg.partial_group_threshold <= 1.0)) {
    fail(ErrorCode::ConfigInvalid, "partial_group_threshold must lie in [0, 1]");
  }
  if (cfg.sampling.max_tokens < 1) fail(ErrorCode::ConfigInvalid, "max_tokens must be >= 1");
  if (!(cfg.sampling.temperature >= 0.0)) fail(ErrorCode::ConfigInvalid, "temperature must be >= 0");
  try {
    validate(cfg.tool_cfg);
  } catch (const Error& e) {
    fail(ErrorCode::ConfigInvalid, e.what());
  }
}

ChatMessage observation_message(const Observation& obs) {
  ChatMessage msg{Role::User, {}};
  if (const auto* t = std::get_if<TextObservation>(&obs)) {
    msg.content.push_back(TextPart{"<observation>\n" + t->content + (t->truncated ? "\n[output truncated]" : "") +
                                   "\n</observation>"});
  } else if (const auto* i = std::get_if<ImageObservation>(&obs)) {
    msg.content.push_back(TextPart{"<observation>cropped region (" + std::to_string(i->image.width()) + "x" +
                                   std::to_string(i->image.height()) + "):</observation>"});
    msg.content.push_back(ImagePart{i->image});
  } else {
    const auto& e = std::get<ToolErrorObservation>(obs);
    msg.content.push_back(TextPart{"<observation>tool error (" + std::string(to_string(e.kind)) + "): " + e.message +
                                   "</observation>"});
  }
  return msg;
}

std::vector<ChatMessage> initial_messages(const ChartImage& image, const std::string& question) {
  return {text_message(Role::System, system_prompt()),
          ChatMessage{Role::User, {ImagePart{image}, TextPart{question}}}};
}

RolloutResult run_trajectory(ChatClient& policy, Sandbox& sandbox, const ChartImage& image,
                             const std::string& question, const RolloutConfig& cfg, int member,
                             std::stop_token stop) {
  validate(cfg);
  RolloutResult out{Trajectory{image, question, {}, {}, std::nullopt, Termination::TurnLimit}, {}};

  auto messages = initial_messages(image, question);
  Sampling sampling = cfg.sampling;
  sampling.seed = cfg.seed + member;
  int parse_failures = 0;

  for (int turn = 0; turn < cfg.max_assistant_turns; ++turn) {
    if (stop.stop_requested()) throw PolicyFailureError("rollout cancelled", out);
    PolicyReply reply;
    try {
      reply = policy.complete(messages, sampling, stop);
    } catch (const Error& e) {
      throw PolicyFailureError(std::string(error_code_name(e.code())) + ": " + e.what(), out);
    }
    out.raw_turns.push_back(reply.text);
    messages.push_back(text_message(Role::Assistant, reply.text));

    auto parsed = parse_turn(reply.text);
    if (!parsed.compliant()) {
      if (++parse_failures >= cfg.max_parse_failures) {
        out.trajectory.terminated_by = Termination::ParseFailureLimit;
        return out;
      }
      messages.push_back(text_message(Role::User, std::string(kFormatErrorNotice)));
      continue;
    }
    if (parsed.final_answer) {
      out.trajectory.final_reasoning = parsed.reasoning;
      out.trajectory.answer = *parsed.final_answer;
      out.trajectory.terminated_by = Termination::Answer;
      return out;
    }
    auto obs = run_tool(image, *parsed.tool_call, cfg.tool_cfg, sandbox);
    messages.push_back(observation_message(obs));
    out.trajectory.steps.push_back(Step{parsed.reasoning, *parsed.tool_call, std::move(obs)});
  }
  return out;
}

GroupSample run_group(ChatClient& policy, Sandbox& sandbox, const ChartImage& image,
                      const std::string& question, const RolloutConfig& cfg) {
  validate(cfg);
  const auto g = static_cast<std::size_t>(cfg.group_size);
  std::vector<std::optional<RolloutResult>> results(g);
  GroupSample group;
  group.diagnostics.resize(g);

  const auto allowed = static_cast<std::size_t>(cfg.partial_group_threshold * static_cast<double>(g));
  std::stop_source abort;
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> failures{0};
  std::mutex mu;
  std::exception_ptr unexpected;

  auto worker = [&] {
    for (std::size_t i = next++; i < g; i = next++) {
      try {
        auto r = run_trajectory(policy, sandbox, image, question, cfg, static_cast<int>(i), abort.get_token());
        results[i] = std::move(r);
      } catch (const PolicyFailureError& e) {
        results[i] = e.partial();
        group.diagnostics[i] = e.what();
        if (++failures > allowed) abort.request_stop();
      } catch (...) {
        std::lock_guard lock(mu);
        if (!unexpected) unexpected = std::current_exception();
        abort.request_stop();
      }
    }
  };
  {
    std::vector<std::jthread> threads;
    const auto n = std::min(cfg.group_concurrency, g);
    for (std::size_t t = 0; t < n; ++t) threads.emplace_back(worker);
  }
  if (unexpected) std::rethrow_exception(unexpected);
  for (auto& r : results) {
    group.trajectories.push_back(std::move(r->trajectory));
    group.raw_turns.push_back(std::move(r->raw_turns));
  }
  if (failures > allowed) {
    std::string first;
    for (const auto& d : group.diagnostics) {
      if (!d.empty()) {
        first = d;
        break;
      }
    }
    fail(ErrorCode::PartialGroup, std::to_string(failures.load()) + " of " + std::to_string(g) +
                                      " rollouts failed; first: " + first);
  }
  return group;
}

}  // namespace ctir
