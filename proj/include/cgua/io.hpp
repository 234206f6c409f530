#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cgua/core.hpp"
#include "cgua/datagen.hpp"
#include "cgua/eval.hpp"
#include "cgua/trainer.hpp"
#include "cgua/uam.hpp"

namespace cgua::io {

using nlohmann::json;

/// Rows read from a JSONL embedding file, in file order. Lines carry
/// {"id": int, "vec": [float, ...]} and optionally "box": [x1, y1, x2, y2].
struct EmbeddingRecords {
  std::vector<std::size_t> ids;
  Matrix rows;
  std::map<std::size_t, Box> boxes;
  std::map<std::size_t, std::size_t> row_index;  // id -> row

  /// Row index of an id; throws Parse for an unknown id.
  std::size_t row_of(std::size_t id) const;
};

EmbeddingRecords read_embeddings(const std::filesystem::path& path);
void write_embeddings(const std::filesystem::path& path, const std::vector<std::size_t>& ids, const Matrix& rows,
                      const std::map<std::size_t, Box>& boxes = {});

/// {"scenes": [{"id": int, "instances": [int, ...], "boxes": [[x1, y1, x2, y2], ...]?}]}.
/// Instance ids are translated to rows through `records`; scene ids must be
/// dense in [0, M).
SceneCatalog read_catalog(const std::filesystem::path& path, const EmbeddingRecords& records);
json catalog_to_json(const SceneCatalog& catalog);

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& value);
void write_text(const std::filesystem::path& path, const std::string& text);

Box box_from_json(const json& j);
json box_to_json(const Box& b);

json cluster_output(const ClusterAssignment& assignment);

json encoder_to_json(const LinearEncoder& enc);
LinearEncoder encoder_from_json(const json& j);

json banks_to_json(const MemoryBanks& banks);
MemoryBanks banks_from_json(const json& j);

/// Config conversions reject unknown keys; missing keys keep their defaults.
TrainConfig train_config_from_json(const json& j);
json to_json(const TrainConfig& cfg);
WorldConfig world_config_from_json(const json& j);
json to_json(const WorldConfig& cfg);

json to_json(const EpochStats& stats);
json to_json(const MetricsReport& report);

/// [{"query": id, "relevant": [ids], "gt_box": [x1, y1, x2, y2]?}, ...]
std::vector<QueryRelevance> relevance_from_json(const json& j);
json relevance_to_json(const std::vector<QueryRelevance>& truth);

/// Comma-separated unsigned integers ("1,5,10").
std::vector<std::size_t> parse_size_list(const std::string& text);

}  // namespace cgua::io
