// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "core/model.hpp"

namespace ctir {

using json = nlohmann::json;

inline constexpr std::string_view kTrajectorySchema = "ctir.trajectory.v1";

/// Resolves images referenced by source id. Trajectory records never inline
/// pixels; they carry a source id plus content hash.
class ImageStore {
 public:
  virtual ~ImageStore() = default;
  virtual std::optional<ChartImage> find(const std::string& source_id) const = 0;
  virtual void put(const ChartImage& image) = 0;
};

class MemoryImageStore final : public ImageStore {
 public:
  std::optional<ChartImage> find(const std::string& source_id) const override;
  void put(const ChartImage& image) override;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, ChartImage> images_;
};

/// PNG files named `<sanitized source id>.png`. Writes go to `write_dir`;
/// lookups search `write_dir` first, then `read_dirs` in order.
class DirectoryImageStore final : public ImageStore {
 public:
  explicit DirectoryImageStore(std::filesystem::path write_dir,
                               std::vector<std::filesystem::path> read_dirs = {});

  std::optional<ChartImage> find(const std::string& source_id) const override;
  void put(const ChartImage& image) override;

  static std::filesystem::path file_for(const std::filesystem::path& dir,
                                        const std::string& source_id);

 private:
  std::filesystem::path write_dir_;
  std::vector<std::filesystem::path> read_dirs_;
  mutable std::mutex mu_;
  mutable std::map<std::string, ChartImage> cache_;
};

json image_ref_to_json(const ChartImage& image);
ChartImage image_from_ref_json(const json& j, const ImageStore& store);

json to_json(const ToolAction& action);
ToolAction tool_action_from_json(const json& j);
json to_json(const Observation& obs);
Observation observation_from_json(const json& j, const ImageStore& store);
json to_json(const Trajectory& t);
Trajectory trajectory_from_json(const json& j, const ImageStore& store);

/// Single-line JSON record.
std::string serialize_trajectory(const Trajectory& t);

/// Throws MalformedRecord on bad syntax or shape, InvariantViolation when the
/// decoded value breaks a Trajectory invariant, ImageNotFound when a
/// referenced image cannot be resolved.
Trajectory deserialize_trajectory(std::string_view record, const ImageStore& store);

/// Saves every image a trajectory references (chart and crop observations).
void put_images(const Trajectory& t, ImageStore& store);

/// A trajectory as persisted in a `*.traj.jsonl` store, with the verbatim
/// policy turns needed for format scoring.
struct StoredTrajectory {
  std::string item_id;
  int member = 0;
  Trajectory trajectory;
  std::vector<std::string> raw_turns;
  std::string diagnostic;
};

std::string serialize_stored(const StoredTrajectory& rec);
StoredTrajectory deserialize_stored(std::string_view record, const ImageStore& store);

/// Appends records to a JSONL file; images go to the given store.
class TrajectoryStoreWriter {
 public:
  TrajectoryStoreWriter(const std::filesystem::path& path, ImageStore& images);
  void append(const StoredTrajectory& rec);

 private:
  std::filesystem::path path_;
  ImageStore& images_;
  std::mutex mu_;
};

std::vector<StoredTrajectory> read_trajectory_store(const std::filesystem::path& path,
                                                    const ImageStore& store);

/// Directory where a store at `store_path` keeps images it introduced.
std::filesystem::path store_image_dir(const std::filesystem::path& store_path);

json to_json(const QAItem& item);
QAItem qa_item_from_json(const json& j);

/// Throws DatasetMalformed (with the 1-based line) for unreadable files,
/// bad lines, or invariant failures. Items without an id get "L<line>".
std::vector<QAItem> read_qa_jsonl(const std::filesystem::path& path, const AspectPool& pool);
void write_qa_jsonl(const std::filesystem::path& path, const std::vector<QAItem>& items);

json to_json(const ChartSpec& spec);
ChartSpec chart_spec_from_json(const json& j);

/// Reads a JSONL file into objects; blank lines are skipped.
std::vector<json> read_jsonl(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace ctir
