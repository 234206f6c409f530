#include "cgua/pipeline.hpp"

#include <map>
#include <set>
#include <sstream>

#include "cgua/cgc.hpp"

namespace cgua {
namespace {

using io::json;

constexpr std::uint64_t kEvalWorldSalt = 0x5EEDE7A1ULL;

template <typename T>
void take(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

io::json scores_json(const PairwiseScores& s) {
  return json{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

struct TrainingData {
  Matrix raw;
  SceneCatalog catalog;
  std::optional<std::vector<std::size_t>> truth;
  std::optional<World> world;
};

TrainingData load_training_data(const PipelineConfig& cfg) {
  TrainingData data;
  if (cfg.world) {
    World w = generate(*cfg.world);
    data.raw = w.raw_features;
    data.catalog = w.catalog;
    data.truth = w.true_identity;
    data.world = std::move(w);
    return data;
  }
  if (cfg.embeddings_path.empty() || cfg.catalog_path.empty()) {
    throw Error(ErrorKind::InvalidArgument, "pipeline needs either a world config or embeddings + catalog paths");
  }
  const auto records = io::read_embeddings(cfg.embeddings_path);
  data.raw = records.rows;
  data.catalog = io::read_catalog(cfg.catalog_path, records);
  if (!cfg.labels_path.empty()) {
    const json labels = io::read_json(cfg.labels_path);
    auto truth = labels.at("labels").get<std::vector<std::size_t>>();
    if (truth.size() != records.ids.size()) {
      throw Error(ErrorKind::InvalidArgument, "labels length does not match the embeddings", cfg.labels_path);
    }
    data.truth = std::move(truth);
  }
  return data;
}

HeldOutSplit load_eval_split(const PipelineConfig& cfg) {
  if (cfg.world) {
    WorldConfig wc = *cfg.world;
    wc.seed = *cfg.eval_world_seed;
    return held_out_split(generate(wc));
  }
  if (cfg.eval_queries_path.empty() || cfg.eval_gallery_path.empty() || cfg.eval_relevance_path.empty()) {
    throw Error(ErrorKind::InvalidArgument, "pipeline without a world config needs eval query/gallery/relevance paths");
  }
  const auto queries = io::read_embeddings(cfg.eval_queries_path);
  const auto gallery = io::read_embeddings(cfg.eval_gallery_path);
  const auto relevance = io::relevance_from_json(io::read_json(cfg.eval_relevance_path));
  HeldOutSplit split;
  split.query_raw.resize(static_cast<Eigen::Index>(relevance.size()), queries.rows.cols());
  for (std::size_t i = 0; i < relevance.size(); ++i) {
    split.query_raw.row(static_cast<Eigen::Index>(i)) = queries.rows.row(static_cast<Eigen::Index>(queries.row_of(relevance[i].query)));
  }
  split.truth = relevance;
  split.gallery_raw = gallery.rows;
  split.gallery_ids = gallery.ids;
  split.gallery_boxes = gallery.boxes;
  return split;
}

}  // namespace

PipelineConfig pipeline_config_from_json(const json& j) {
  static const std::set<std::string> known{"world",         "eval_world_seed",     "embeddings",  "catalog",
                                           "labels",        "eval_queries",        "eval_gallery", "eval_relevance",
                                           "train",         "eval",                "out_dir"};
  if (!j.is_object()) throw Error(ErrorKind::Parse, "pipeline config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw Error(ErrorKind::Parse, "unknown pipeline config key '" + key + "'");
  }
  PipelineConfig cfg;
  try {
    if (j.contains("world") && !j.at("world").is_null()) cfg.world = io::world_config_from_json(j.at("world"));
    if (j.contains("eval_world_seed") && !j.at("eval_world_seed").is_null()) {
      cfg.eval_world_seed = j.at("eval_world_seed").get<std::uint64_t>();
    }
    take(j, "embeddings", cfg.embeddings_path);
    take(j, "catalog", cfg.catalog_path);
    take(j, "labels", cfg.labels_path);
    take(j, "eval_queries", cfg.eval_queries_path);
    take(j, "eval_gallery", cfg.eval_gallery_path);
    take(j, "eval_relevance", cfg.eval_relevance_path);
    take(j, "out_dir", cfg.out_dir);
    if (j.contains("train")) cfg.train = io::train_config_from_json(j.at("train"));
    if (j.contains("eval")) {
      const json& e = j.at("eval");
      for (const auto& [key, value] : e.items()) {
        if (key != "topk" && key != "gallery_sizes" && key != "seed") {
          throw Error(ErrorKind::Parse, "unknown eval config key '" + key + "'");
        }
      }
      take(e, "topk", cfg.eval.topk);
      take(e, "gallery_sizes", cfg.eval.gallery_sizes);
      take(e, "seed", cfg.eval.seed);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("pipeline config: ") + e.what());
  }
  return cfg;
}

json to_json(const PipelineConfig& cfg) {
  json j;
  j["world"] = cfg.world ? io::to_json(*cfg.world) : json(nullptr);
  j["eval_world_seed"] = cfg.eval_world_seed ? json(*cfg.eval_world_seed) : json(nullptr);
  j["embeddings"] = cfg.embeddings_path;
  j["catalog"] = cfg.catalog_path;
  j["labels"] = cfg.labels_path;
  j["eval_queries"] = cfg.eval_queries_path;
  j["eval_gallery"] = cfg.eval_gallery_path;
  j["eval_relevance"] = cfg.eval_relevance_path;
  j["train"] = io::to_json(cfg.train);
  j["eval"] = json{{"topk", cfg.eval.topk}, {"gallery_sizes", cfg.eval.gallery_sizes}, {"seed", cfg.eval.seed}};
  j["out_dir"] = cfg.out_dir;
  return j;
}

PipelineConfig resolve(PipelineConfig cfg) {
  if (cfg.world && !cfg.eval_world_seed) cfg.eval_world_seed = cfg.world->seed ^ kEvalWorldSalt;
  return cfg;
}

HeldOutSplit held_out_split(const World& world) {
  const std::size_t n = world.true_identity.size();
  std::map<std::size_t, std::vector<std::size_t>> sightings;
  for (std::size_t i = 0; i < n; ++i) sightings[world.true_identity[i]].push_back(i);

  std::set<std::size_t> query_rows;
  for (const auto& [id, rows] : sightings) {
    if (rows.size() >= 2) query_rows.insert(rows.front());
  }
  HeldOutSplit split;
  const Eigen::Index d = world.raw_features.cols();
  split.query_raw.resize(static_cast<Eigen::Index>(query_rows.size()), d);
  split.gallery_raw.resize(static_cast<Eigen::Index>(n - query_rows.size()), d);
  Eigen::Index qi = 0;
  Eigen::Index gi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (query_rows.contains(i)) {
      split.query_raw.row(qi++) = world.raw_features.row(static_cast<Eigen::Index>(i));
      QueryRelevance truth;
      truth.query = i;
      for (auto r : sightings[world.true_identity[i]]) {
        if (r != i) truth.relevant.push_back(r);
      }
      split.truth.push_back(std::move(truth));
    } else {
      split.gallery_raw.row(gi++) = world.raw_features.row(static_cast<Eigen::Index>(i));
      split.gallery_ids.push_back(i);
      if (world.catalog.boxes) split.gallery_boxes[i] = (*world.catalog.boxes)[i];
    }
  }
  return split;
}

MetricsReport evaluate_encoder(const LinearEncoder& enc, const HeldOutSplit& split, const EvalOptions& options) {
  const EmbeddingMatrix queries(encode(enc, split.query_raw));
  const RetrievalSet gallery{EmbeddingMatrix(encode(enc, split.gallery_raw)), split.gallery_ids, split.gallery_boxes};
  return evaluate_retrieval(queries, split.truth, gallery, options.topk);
}

json run_pipeline(const PipelineConfig& input) {
  const PipelineConfig cfg = resolve(input);
  const std::filesystem::path out = cfg.out_dir;
  const json manifest{{"manifest_version", 1}, {"config", to_json(cfg)}};
  io::write_json(out / "manifest.json", manifest);

  TrainingData data = load_training_data(cfg);
  const HeldOutSplit split = load_eval_split(cfg);
  const std::size_t d_in = static_cast<std::size_t>(data.raw.cols());
  if (static_cast<std::size_t>(split.query_raw.cols()) != d_in || static_cast<std::size_t>(split.gallery_raw.cols()) != d_in) {
    throw Error(ErrorKind::InvalidArgument, "held-out features do not match the training dimension");
  }

  json metrics;
  CgcOptions cgc;
  cgc.lambda_sim = cfg.train.lambda_sim;
  cgc.mode = cfg.train.neighbor_mode;
  const ClusterAssignment initial = cgc_cluster(EmbeddingMatrix::from_raw(data.raw), data.catalog, cgc);
  metrics["initial_clusters"] = json{{"n_clusters", initial.num_clusters()},
                                     {"n_paired", initial.paired_ids().size()},
                                     {"n_unpaired", initial.unpaired_ids().size()}};
  if (data.truth) metrics["clustering"] = scores_json(pairwise_f1(initial.label_of(), *data.truth));

  const LinearEncoder start = initial_encoder(d_in, cfg.train);
  metrics["untrained"] = io::to_json(evaluate_encoder(start, split, cfg.eval));

  TrainResult trained = train(data.raw, data.catalog, cfg.train, start);
  metrics["trained"] = io::to_json(evaluate_encoder(trained.encoder, split, cfg.eval));
  if (data.truth) metrics["final_clustering"] = scores_json(pairwise_f1(trained.last_assignment.label_of(), *data.truth));

  json history = json::array();
  std::ostringstream history_lines;
  for (const auto& e : trained.history) {
    history.push_back(io::to_json(e));
    history_lines << io::to_json(e).dump() << '\n';
  }
  metrics["history"] = history;

  if (!cfg.eval.gallery_sizes.empty()) {
    const EmbeddingMatrix queries(encode(trained.encoder, split.query_raw));
    const RetrievalSet gallery{EmbeddingMatrix(encode(trained.encoder, split.gallery_raw)), split.gallery_ids,
                               split.gallery_boxes};
    json sweep = json::object();
    for (const auto& [size, report] :
         gallery_size_sweep(queries, split.truth, gallery, cfg.eval.gallery_sizes, cfg.eval.topk, cfg.eval.seed)) {
      sweep[std::to_string(size)] = json{{"mAP", report.mAP}, {"cmc", io::to_json(report)["cmc"]}};
    }
    metrics["gallery_sweep"] = std::move(sweep);
  }

  io::write_text(out / "history.jsonl", history_lines.str());
  io::write_json(out / "encoder.json", io::encoder_to_json(trained.encoder));
  if (trained.last_banks) io::write_json(out / "banks.json", io::banks_to_json(*trained.last_banks));
  io::write_json(out / "clusters.json", io::cluster_output(trained.last_assignment));
  io::write_json(out / "metrics.json", metrics);
  return metrics;
}

}  // namespace cgua
