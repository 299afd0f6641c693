// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#include "core/serialize.hpp"

#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace ctir {
namespace {

// Shape errors from nlohmann surface as MalformedRecord.
template <typename F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedRecord, std::string("malformed record: ") + e.what());
  }
}

const json& require(const json& j, const char* key) {
  if (!j.is_object()) fail(ErrorCode::MalformedRecord, "expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) fail(ErrorCode::MalformedRecord, std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_string()) fail(ErrorCode::MalformedRecord, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

int require_int(const json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_number_integer()) fail(ErrorCode::MalformedRecord, std::string("field '") + key + "' must be an integer");
  return v.get<int>();
}

}  // namespace

std::optional<ChartImage> MemoryImageStore::find(const std::string& source_id) const {
  std::lock_guard lock(mu_);
  auto it = images_.find(source_id);
  if (it == images_.end()) return std::nullopt;
  return it->second;
}

void MemoryImageStore::put(const ChartImage& image) {
  std::lock_guard lock(mu_);
  images_.insert_or_assign(image.source_id(), image);
}

std::size_t MemoryImageStore::size() const {
  std::lock_guard lock(mu_);
  return images_.size();
}

DirectoryImageStore::DirectoryImageStore(std::filesystem::path write_dir,
                                         std::vector<std::filesystem::path> read_dirs)
    : write_dir_(std::move(write_dir)), read_dirs_(std::move(read_dirs)) {}

std::filesystem::path DirectoryImageStore::file_for(const std::filesystem::path& dir,
                                                    const std::string& source_id) {
  return dir / (sanitize_source_id(source_id) + ".png");
}

std::optional<ChartImage> DirectoryImageStore::find(const std::string& source_id) const {
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(source_id); it != cache_.end()) return it->second;
  }
  std::vector<std::filesystem::path> dirs;
  if (!write_dir_.empty()) dirs.push_back(write_dir_);
  dirs.insert(dirs.end(), read_dirs_.begin(), read_dirs_.end());
  for (const auto& dir : dirs) {
    const auto file = file_for(dir, source_id);
    std::error_code ec;
    if (!std::filesystem::is_regular_file(file, ec)) continue;
    auto image = load_png(file, source_id);
    std::lock_guard lock(mu_);
    cache_.insert_or_assign(source_id, image);
    return image;
  }
  return std::nullopt;
}

void DirectoryImageStore::put(const ChartImage& image) {
  if (write_dir_.empty()) fail(ErrorCode::Io, "image store has no write directory");
  const auto file = file_for(write_dir_, image.source_id());
  std::lock_guard lock(mu_);
  if (cache_.count(image.source_id()) == 0 && !std::filesystem::exists(file)) {
    save_png(image, file);
  }
  cache_.insert_or_assign(image.source_id(), image);
}

json image_ref_to_json(const ChartImage& image) {
  return json{{"source_id", image.source_id()},
              {"width", image.width()},
              {"height", image.height()},
              {"sha256", image.content_hash()}};
}

ChartImage image_from_ref_json(const json& j, const ImageStore& store) {
  const auto id = require_string(j, "source_id");
  const int width = require_int(j, "width");
  const int height = require_int(j, "height");
  const auto hash = require_string(j, "sha256");
  auto image = store.find(id);
  if (!image) fail(ErrorCode::ImageNotFound, "image '" + id + "' not found in store");
  if (image->width() != width || image->height() != height || image->content_hash() != hash) {
    fail(ErrorCode::InvariantViolation, "image '" + id + "' does not match its recorded content hash");
  }
  return *image;
}

json to_json(const ToolAction& action) {
  if (const auto* crop = std::get_if<CropAction>(&action)) {
    const auto& b = crop->bbox;
    return json{{"kind", "crop"}, {"bbox", {b.x0, b.y0, b.x1, b.y1}}};
  }
  return json{{"kind", "code"}, {"source", std::get<CodeAction>(action).source}};
}

ToolAction tool_action_from_json(const json& j) {
  const auto kind = require_string(j, "kind");
  if (kind == "crop") {
    const auto& b = require(j, "bbox");
    if (!b.is_array() || b.size() != 4) fail(ErrorCode::MalformedRecord, "bbox must have 4 entries");
    for (const auto& v : b) {
      if (!v.is_number_integer()) fail(ErrorCode::MalformedRecord, "bbox entries must be integers");
    }
    return CropAction{BBox{b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()}};
  }
  if (kind == "code") return CodeAction{require_string(j, "source")};
  fail(ErrorCode::MalformedRecord, "unknown action kind '" + kind + "'");
}

json to_json(const Observation& obs) {
  return std::visit(
      [](const auto& o) -> json {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, TextObservation>) {
          return json{{"kind", "text"}, {"content", o.content}, {"truncated", o.truncated}};
        } else if constexpr (std::is_same_v<T, ImageObservation>) {
          return json{{"kind", "image"}, {"image", image_ref_to_json(o.image)}};
        } else {
          return json{{"kind", "error"}, {"error_kind", to_string(o.kind)}, {"message", o.message}};
        }
      },
      obs);
}

Observation observation_from_json(const json& j, const ImageStore& store) {
  const auto kind = require_string(j, "kind");
  if (kind == "text") {
    const auto& t = require(j, "truncated");
    if (!t.is_boolean()) fail(ErrorCode::MalformedRecord, "truncated must be a boolean");
    return TextObservation{require_string(j, "content"), t.get<bool>()};
  }
  if (kind == "image") return ImageObservation{image_from_ref_json(require(j, "image"), store)};
  if (kind == "error") {
    auto ek = parse_tool_error_kind(require_string(j, "error_kind"));
    if (!ek) fail(ErrorCode::MalformedRecord, "unknown tool error kind");
    return ToolErrorObservation{*ek, require_string(j, "message")};
  }
  fail(ErrorCode::MalformedRecord, "unknown observation kind '" + kind + "'");
}

json to_json(const Trajectory& t) {
  json steps = json::array();
  for (const auto& s : t.steps) {
    steps.push_back(json{{"reasoning", s.reasoning},
                         {"action", to_json(s.action)},
                         {"observation", to_json(s.observation)}});
  }
  json j{{"schema", kTrajectorySchema},
         {"image", image_ref_to_json(t.image)},
         {"question", t.question},
         {"steps", std::move(steps)},
         {"final_reasoning", t.final_reasoning},
         {"terminated_by", to_string(t.terminated_by)}};
  if (t.answer) j["answer"] = *t.answer;
  return j;
}

Trajectory trajectory_from_json(const json& j, const ImageStore& store) {
  return guarded([&] {
    if (auto it = j.find("schema"); it != j.end() && *it != kTrajectorySchema) {
      fail(ErrorCode::MalformedRecord, "unsupported trajectory schema");
    }
    auto term = parse_termination(require_string(j, "terminated_by"));
    if (!term) fail(ErrorCode::MalformedRecord, "unknown terminated_by value");
    std::optional<std::string> answer;
    if (auto it = j.find("answer"); it != j.end() && !it->is_null()) {
      if (!it->is_string()) fail(ErrorCode::MalformedRecord, "answer must be a string");
      answer = it->get<std::string>();
    }
    const auto& steps_json = require(j, "steps");
    if (!steps_json.is_array()) fail(ErrorCode::MalformedRecord, "steps must be an array");
    std::vector<Step> steps;
    for (const auto& s : steps_json) {
      steps.push_back(Step{require_string(s, "reasoning"), tool_action_from_json(require(s, "action")),
                           observation_from_json(require(s, "observation"), store)});
    }
    Trajectory t{image_from_ref_json(require(j, "image"), store),
                 require_string(j, "question"),
                 std::move(steps),
                 require_string(j, "final_reasoning"),
                 std::move(answer),
                 *term};
    validate(t);
    return t;
  });
}

std::string serialize_trajectory(const Trajectory& t) { return to_json(t).dump(); }

Trajectory deserialize_trajectory(std::string_view record, const ImageStore& store) {
  json j = json::parse(record, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) fail(ErrorCode::MalformedRecord, "record is not valid JSON");
  return trajectory_from_json(j, store);
}

void put_images(const Trajectory& t, ImageStore& store) {
  store.put(t.image);
  for (const auto& s : t.steps) {
    if (const auto* img = std::get_if<ImageObservation>(&s.observation)) store.put(img->image);
  }
}

std::string serialize_stored(const StoredTrajectory& rec) {
  json j = to_json(rec.trajectory);
  j["item_id"] = rec.item_id;
  j["member"] = rec.member;
  j["raw_turns"] = rec.raw_turns;
  if (!rec.diagnostic.empty()) j["diagnostic"] = rec.diagnostic;
  return j.dump();
}

StoredTrajectory deserialize_stored(std::string_view record, const ImageStore& store) {
  json j = json::parse(record, nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::MalformedRecord, "record is not valid JSON");
  return guarded([&] {
    StoredTrajectory rec{require_string(j, "item_id"), 0, trajectory_from_json(j, store), {}, {}};
    rec.member = j.value("member", 0);
    if (auto it = j.find("raw_turns"); it != j.end()) rec.raw_turns = it->get<std::vector<std::string>>();
    rec.diagnostic = j.value("diagnostic", std::string{});
    return rec;
  });
}

TrajectoryStoreWriter::TrajectoryStoreWriter(const std::filesystem::path& path, ImageStore& images)
    : path_(path), images_(images) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot create trajectory store " + path_.string());
}

void TrajectoryStoreWriter::append(const StoredTrajectory& rec) {
  const auto line = serialize_stored(rec);
  std::lock_guard lock(mu_);
  if (!images_.find(rec.trajectory.image.source_id())) images_.put(rec.trajectory.image);
  for (const auto& s : rec.trajectory.steps) {
    if (const auto* img = std::get_if<ImageObservation>(&s.observation)) images_.put(img->image);
  }
  std::ofstream out(path_, std::ios::app);
  if (!out) fail(ErrorCode::Io, "cannot append to " + path_.string());
  out << line << '\n';
}

std::vector<StoredTrajectory> read_trajectory_store(const std::filesystem::path& path,
                                                    const ImageStore& store) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open trajectory store " + path.string());
  std::vector<StoredTrajectory> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(deserialize_stored(line, store));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::filesystem::path store_image_dir(const std::filesystem::path& store_path) {
  return std::filesystem::path(store_path.string() + ".images");
}

json to_json(const QAItem& item) {
  json j{{"image_ref", item.image_ref},       {"question", item.question},
         {"answer", item.answer},             {"qtype", to_string(item.qtype)},
         {"aspect", item.aspect},             {"answer_type", to_string(item.answer_type)},
         {"difficulty", item.difficulty},     {"provenance", to_string(item.provenance)}};
  if (!item.id.empty()) j["id"] = item.id;
  return j;
}

QAItem qa_item_from_json(const json& j) {
  return guarded([&] {
    QAItem item;
    item.id = j.value("id", std::string{});
    item.image_ref = require_string(j, "image_ref");
    item.question = require_string(j, "question");
    const auto& ans = require(j, "answer");
    // Numeric answers are common in third-party files; keep their text form.
    item.answer = ans.is_string() ? ans.get<std::string>() : ans.dump();
    auto qtype = parse_question_type(require_string(j, "qtype"));
    if (!qtype) fail(ErrorCode::MalformedRecord, "unknown qtype");
    item.qtype = *qtype;
    item.aspect = require_string(j, "aspect");
    auto at = parse_answer_type(require_string(j, "answer_type"));
    if (!at) fail(ErrorCode::MalformedRecord, "unknown answer_type");
    item.answer_type = *at;
    item.difficulty = require_int(j, "difficulty");
    auto prov = parse_provenance(require_string(j, "provenance"));
    if (!prov) fail(ErrorCode::MalformedRecord, "unknown provenance");
    item.provenance = *prov;
    return item;
  });
}

std::vector<QAItem> read_qa_jsonl(const std::filesystem::path& path, const AspectPool& pool) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::DatasetMalformed, "cannot open dataset " + path.string());
  std::vector<QAItem> items;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded()) fail(ErrorCode::MalformedRecord, "not valid JSON");
      auto item = qa_item_from_json(j);
      if (item.id.empty()) item.id = "L" + std::to_string(lineno);
      validate(item, pool);
      items.push_back(std::move(item));
    } catch (const Error& e) {
      fail(ErrorCode::DatasetMalformed, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return items;
}

void write_qa_jsonl(const std::filesystem::path& path, const std::vector<QAItem>& items) {
  std::ostringstream out;
  for (const auto& item : items) out << to_json(item).dump() << '\n';
  write_text_file(path, out.str());
}

json to_json(const ChartSpec& spec) {
  json j{{"persona", spec.persona},
         {"num_subplots", spec.num_subplots},
         {"layout", {spec.layout.rows, spec.layout.cols}},
         {"chart_types", spec.chart_types},
         {"difficulty", spec.difficulty}};
  if (spec.reference_id) j["reference_id"] = *spec.reference_id;
  return j;
}

ChartSpec chart_spec_from_json(const json& j) {
  return guarded([&] {
    ChartSpec spec;
    spec.persona = require_string(j, "persona");
    spec.num_subplots = require_int(j, "num_subplots");
    const auto& layout = require(j, "layout");
    spec.layout = Layout{layout.at(0).get<int>(), layout.at(1).get<int>()};
    spec.chart_types = require(j, "chart_types").get<std::vector<std::string>>();
    spec.difficulty = require_int(j, "difficulty");
    if (auto it = j.find("reference_id"); it != j.end()) spec.reference_id = it->get<std::string>();
    validate(spec);
    return spec;
  });
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::vector<json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      fail(ErrorCode::MalformedRecord, path.string() + ":" + std::to_string(lineno) + ": not valid JSON");
    }
    out.push_back(std::move(j));
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ctir
