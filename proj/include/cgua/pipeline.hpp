#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cgua/datagen.hpp"
#include "cgua/eval.hpp"
#include "cgua/io.hpp"
#include "cgua/trainer.hpp"

namespace cgua {

struct EvalOptions {
  std::vector<std::size_t> topk{1, 5, 10};
  std::vector<std::size_t> gallery_sizes;  // empty: no sweep
  std::uint64_t seed = 0;
};

/// One end-to-end run. Training data comes from `world` when set, otherwise
/// from the embeddings/catalog files. The held-out split is generated from
/// `world` with `eval_world_seed`, or read from the eval_* files.
struct PipelineConfig {
  std::optional<WorldConfig> world;
  std::optional<std::uint64_t> eval_world_seed;
  std::string embeddings_path;
  std::string catalog_path;
  std::string labels_path;  // optional ground truth for clustering F1
  std::string eval_queries_path;
  std::string eval_gallery_path;
  std::string eval_relevance_path;
  TrainConfig train;
  EvalOptions eval;
  std::string out_dir = "run";
};

PipelineConfig pipeline_config_from_json(const io::json& j);
io::json to_json(const PipelineConfig& cfg);

/// Makes the config self-contained: fills derived seeds so the manifest
/// replays without consulting defaults.
PipelineConfig resolve(PipelineConfig cfg);

/// Held-out retrieval split of a world: the first sighting of every identity
/// seen at least twice is a query; every other instance is gallery.
struct HeldOutSplit {
  Matrix query_raw;
  std::vector<QueryRelevance> truth;
  Matrix gallery_raw;
  std::vector<std::size_t> gallery_ids;
  GalleryBoxes gallery_boxes;
};

HeldOutSplit held_out_split(const World& world);

/// Retrieval metrics of an encoder on a split.
MetricsReport evaluate_encoder(const LinearEncoder& enc, const HeldOutSplit& split, const EvalOptions& options);

/// Runs every stage, writes metrics.json, manifest.json, history.jsonl,
/// encoder.json, banks.json and clusters.json under out_dir, and returns the
/// metrics document.
io::json run_pipeline(const PipelineConfig& cfg);

}  // namespace cgua
