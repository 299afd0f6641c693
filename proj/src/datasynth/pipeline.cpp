// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#include "datasynth/pipeline.hpp"

#include <cstdio>
#include <fstream>

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/serialize.hpp"

namespace ctir {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ChartOutcome {
  std::vector<json> audit;
  std::optional<json> meta;
  std::optional<ChartImage> image;
};

void write_lines(const fs::path& path, const std::vector<json>& lines) {
  std::string text;
  for (const auto& l : lines) text += l.dump() + "\n";
  write_text_file(path, text);
}

json quality_json(const QualityVerdict& v) {
  return json{{"visual", v.visual_score}, {"semantic", v.semantic_score}, {"keep", v.keep}};
}

std::string synth_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "synth-%06zu", i);
  return buf;
}

ChartOutcome synth_one(ChatClient& llm, ChatClient& judge, Sandbox& sandbox, const SynthChartsOptions& opts,
                       const std::vector<ReferenceSnippet>& library, std::size_t i) {
  ChartOutcome o;
  auto rng = derive_rng(opts.seed, i);
  const auto spec = sample_chart_spec(rng, opts.pools, library);
  const auto id = synth_id(i);
  const ReferenceSnippet* ref = nullptr;
  for (const auto& s : library) {
    if (spec.reference_id && s.id == *spec.reference_id) ref = &s;
  }
  json audit{{"chart_id", id}, {"source", "synth"}, {"spec", to_json(spec)}};
  std::optional<GeneratedChart> chart;
  try {
    chart = generate_chart(llm, sandbox, spec, ref, id, opts.gen, static_cast<std::int64_t>(opts.seed + i));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::RenderFailed) throw;
    audit["stage"] = "render";
    audit["ok"] = false;
    audit["error"] = e.what();
    o.audit.push_back(std::move(audit));
    return o;
  }
  audit["repairs"] = chart->repairs;
  audit["render_errors"] = chart->errors;
  try {
    const auto verdict = filter_image(judge, chart->image, opts.quality);
    audit["stage"] = "quality";
    audit["ok"] = verdict.keep;
    audit["quality"] = quality_json(verdict);
    if (verdict.keep) {
      o.meta = json{{"chart_id", id},
                    {"source", "synth"},
                    {"spec", to_json(spec)},
                    {"code", chart->code},
                    {"repairs", chart->repairs},
                    {"quality", quality_json(verdict)},
                    {"sha256", chart->image.content_hash()}};
      o.image = chart->image;
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::UnparseableVerdict) throw;
    audit["stage"] = "quality";
    audit["ok"] = false;
    audit["error"] = e.what();
  }
  o.audit.push_back(std::move(audit));
  return o;
}

ChartOutcome arxiv_one(ChatClient& judge, const SynthChartsOptions& opts, const ArxivFigureRecord& rec) {
  ChartOutcome o;
  const auto id = "arxiv-" + sanitize_source_id(rec.id);
  json audit{{"chart_id", id}, {"source", "arxiv"}, {"record_id", rec.id}};
  try {
    if (!filter_arxiv_record(judge, rec)) {
      audit["stage"] = "figure_filter";
      audit["ok"] = false;
      o.audit.push_back(std::move(audit));
      return o;
    }
    const auto verdict = filter_image(judge, rec.image, opts.quality);
    audit["stage"] = "quality";
    audit["ok"] = verdict.keep;
    audit["quality"] = quality_json(verdict);
    if (verdict.keep) {
      auto image = rec.image.with_source_id(id);
      o.meta = json{{"chart_id", id},
                    {"source", "arxiv"},
                    {"record_id", rec.id},
                    {"caption", rec.caption},
                    {"context", rec.context},
                    {"field_tag", rec.field_tag},
                    {"quality", quality_json(verdict)},
                    {"sha256", image.content_hash()}};
      o.image = std::move(image);
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::UnparseableVerdict) throw;
    audit["ok"] = false;
    audit["error"] = e.what();
  }
  o.audit.push_back(std::move(audit));
  return o;
}

std::string qa_context(const json& meta) {
  if (meta.value("source", "") == "synth") {
    return "Plotting program that produced the chart; its hard-coded data is exact:\n" + meta.value("code", "");
  }
  return "Caption: " + meta.value("caption", "") + "\nContext: " + meta.value("context", "");
}

}  // namespace

std::vector<ArxivFigureRecord> read_arxiv_records(const fs::path& path) {
  std::vector<ArxivFigureRecord> out;
  std::size_t line = 0;
  for (const auto& j : read_jsonl(path)) {
    ++line;
    try {
      ArxivFigureRecord r{j.at("id").get<std::string>(),
                          load_image(path.parent_path() / j.at("image_path").get<std::string>(), j.at("id").get<std::string>()),
                          j.value("caption", std::string{}),
                          j.value("context", std::string{}),
                          j.value("field_tag", std::string{})};
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      fail(ErrorCode::DatasetMalformed, path.string() + ": record " + std::to_string(line) + ": " + e.what());
    }
  }
  return out;
}

StageSummary run_synth_charts(ChatClient& llm, ChatClient& judge, Sandbox& sandbox, const SynthChartsOptions& opts) {
  validate(opts.pools);
  const ChartDirs dirs{opts.out_dir};
  fs::create_directories(dirs.charts());
  std::vector<ReferenceSnippet> library;
  if (opts.reference_dir) library = load_reference_library(*opts.reference_dir);
  std::vector<ArxivFigureRecord> records;
  if (opts.arxiv_records) records = read_arxiv_records(*opts.arxiv_records);

  const std::size_t total = opts.count + records.size();
  std::vector<ChartOutcome> outcomes(total);
  parallel_for(total, opts.concurrency, [&](std::size_t i) {
    outcomes[i] = i < opts.count ? synth_one(llm, judge, sandbox, opts, library, i)
                                 : arxiv_one(judge, opts, records[i - opts.count]);
  });

  StageSummary summary;
  summary.attempted = total;
  std::vector<json> meta;
  std::vector<json> audit;
  for (const auto& o : outcomes) {
    audit.insert(audit.end(), o.audit.begin(), o.audit.end());
    if (!o.meta) continue;
    save_png(*o.image, DirectoryImageStore::file_for(dirs.charts(), o.image->source_id()));
    meta.push_back(*o.meta);
    ++summary.kept;
  }
  write_lines(dirs.meta(), meta);
  write_lines(dirs.audit(), audit);
  summary.outputs = {dirs.charts(), dirs.meta(), dirs.audit()};
  return summary;
}

fs::path qa_audit_path(const fs::path& out_qa) { return fs::path(out_qa.string() + ".audit.jsonl"); }

StageSummary run_synth_qa(ChatClient& llm, ChatClient& checker, const SynthQaOptions& opts) {
  validate(opts.check);
  const auto metas = read_jsonl(opts.charts_meta);
  const auto charts_dir = opts.charts_dir.value_or(opts.charts_meta.parent_path() / "charts");

  struct Slot {
    std::vector<json> audit;
    std::vector<QAItem> kept;
    std::size_t candidates = 0;
  };
  std::vector<Slot> slots(metas.size());
  parallel_for(metas.size(), opts.concurrency, [&](std::size_t i) {
    const auto& meta = metas[i];
    const auto id = meta.at("chart_id").get<std::string>();
    const auto image = load_png(DirectoryImageStore::file_for(charts_dir, id), id);
    const auto provenance = meta.value("source", "synth") == "arxiv" ? Provenance::ArxivMined : Provenance::Synth;
    const auto context = qa_context(meta);
    auto rng = derive_rng(opts.seed, i);
    auto& slot = slots[i];
    for (std::size_t k = 0; k < opts.aspects_per_chart; ++k) {
      const auto qtype = parse_question_type(pick_weighted(rng, opts.pools.question_types));
      if (!qtype) fail(ErrorCode::ConfigInvalid, "question type pool holds an unknown type");
      const auto& aspect = pick_weighted(
          rng, *qtype == QuestionType::Recognition ? opts.pools.recognition_aspects : opts.pools.reasoning_aspects);
      std::vector<QAItem> items;
      try {
        items = generate_qa(llm, image, context, aspect, *qtype, opts.aspects, id, provenance,
                            static_cast<std::int64_t>(i * 64 + k));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::GenerationUnparseable) throw;
        slot.audit.push_back(json{{"chart_id", id}, {"aspect", aspect}, {"stage", "generate"}, {"error", e.what()}});
        continue;
      }
      for (std::size_t j = 0; j < items.size(); ++j) {
        auto item = items[j];
        item.id = id + "-q" + std::to_string(k) + "-" + std::to_string(j);
        ++slot.candidates;
        try {
          const auto report = check_qa(checker, item, image, opts.check);
          if (report.kept) {
            item.difficulty = report.difficulty;
            validate(item, opts.aspects);
            slot.kept.push_back(item);
          }
          slot.audit.push_back(json{{"item", to_json(item)}, {"report", to_json(report)}});
        } catch (const Error& e) {
          if (e.code() != ErrorCode::UnparseableVerdict) throw;
          slot.audit.push_back(json{{"item", to_json(item)}, {"stage", "check"}, {"error", e.what()}});
        }
      }
    }
  });

  StageSummary summary;
  std::vector<QAItem> kept;
  std::vector<json> audit;
  for (auto& s : slots) {
    summary.attempted += s.candidates;
    kept.insert(kept.end(), s.kept.begin(), s.kept.end());
    audit.insert(audit.end(), s.audit.begin(), s.audit.end());
  }
  summary.kept = kept.size();
  write_qa_jsonl(opts.out_qa, kept);
  write_lines(qa_audit_path(opts.out_qa), audit);
  summary.outputs = {opts.out_qa, qa_audit_path(opts.out_qa)};
  return summary;
}

StageSummary run_cold_start(ChatClient& teacher, Sandbox& sandbox, const ColdStartOptions& opts, ChatClient* judge) {
  const auto items = read_qa_jsonl(opts.qa, opts.aspects);
  const fs::path traj_path = opts.out_sft.string() + ".traj.jsonl";
  const fs::path audit_path = opts.out_sft.string() + ".audit.jsonl";
  DirectoryImageStore images(store_image_dir(traj_path), {opts.images_dir});

  std::vector<ColdStartInput> inputs;
  for (const auto& item : items) {
    auto image = images.find(item.image_ref);
    if (!image) fail(ErrorCode::ImageNotFound, "image '" + item.image_ref + "' for item " + item.id + " not found");
    inputs.push_back({item, *image});
  }
  const auto outcomes = distill_cold_start(teacher, sandbox, inputs, opts.rollout, opts.match, opts.concurrency, judge);

  StageSummary summary;
  summary.attempted = outcomes.size();
  TrajectoryStoreWriter store(traj_path, images);
  std::vector<json> sft;
  std::vector<json> audit;
  for (const auto& o : outcomes) {
    store.append(StoredTrajectory{o.item_id, 0, o.rollout.trajectory, o.rollout.raw_turns, {}});
    audit.push_back(json{{"item_id", o.item_id}, {"kept", o.kept}, {"reason", o.reason}});
    if (o.kept) {
      sft.push_back(sft_record(o.item_id, o.rollout));
      ++summary.kept;
    }
  }
  write_lines(opts.out_sft, sft);
  write_lines(audit_path, audit);
  summary.outputs = {opts.out_sft, audit_path, traj_path, store_image_dir(traj_path)};
  return summary;
}

}  // namespace ctir
