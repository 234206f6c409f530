// cgua: command-line front end.
//
//   cgua gen      --config world.json --out DIR
//   cgua cluster  --embeddings E.jsonl --catalog C.json [--lambda-sim 0.1] [--neighbor-mode faithful|masked]
//   cgua train    --embeddings E.jsonl --catalog C.json --config train.json --out DIR
//   cgua eval     --queries Q.jsonl --gallery G.jsonl --relevance R.json [--encoder W.json]
//   cgua pipeline --config pipeline.json | --manifest manifest.json [--out DIR]
//
// Exit codes: 0 success, 1 internal error, 2 bad input or config. Logs go to
// stderr; results go to files or stdout. Failures print one JSON object
// {"error": kind, "message": text, "path"?: file} on stdout.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cgua/cgc.hpp"
#include "cgua/datagen.hpp"
#include "cgua/eval.hpp"
#include "cgua/io.hpp"
#include "cgua/parallel.hpp"
#include "cgua/pipeline.hpp"
#include "cgua/trainer.hpp"

namespace {

using cgua::ErrorKind;
using cgua::io::json;

constexpr int kExitInternal = 1;
constexpr int kExitBadInput = 2;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io:
    case ErrorKind::Parse:
    case ErrorKind::InvalidArgument:
    case ErrorKind::InvalidEmbedding:
    case ErrorKind::InconsistentCatalog:
    case ErrorKind::EmptyScene:
    case ErrorKind::NegativeLambda:
    case ErrorKind::InvalidTemperature:
    case ErrorKind::DegenerateBox:
    case ErrorKind::InfeasiblePacking:
    case ErrorKind::NoPairedClusters:
      return kExitBadInput;
    default:
      return kExitInternal;
  }
}

void report_error(std::string_view kind, const std::string& message, const std::string& path = {}) {
  json j{{"error", kind}, {"message", message}};
  if (!path.empty()) j["path"] = path;
  std::cout << j.dump() << std::endl;
}

void require_file(const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw cgua::Error(ErrorKind::Io, "input file not found: " + path, path);
  }
}

void emit(const json& value, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << value.dump(2) << std::endl;
  } else {
    cgua::io::write_json(out_path, value);
  }
}

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
};

struct GenOptions {
  std::string config;
  std::string out = "world";
};

void run_gen(const GenOptions& opt, const GlobalOptions& global) {
  require_file(opt.config);
  cgua::WorldConfig cfg = cgua::io::world_config_from_json(cgua::io::read_json(opt.config));
  if (global.seed) cfg.seed = *global.seed;
  const cgua::World world = cgua::generate(cfg);
  const std::filesystem::path out = opt.out;
  std::vector<std::size_t> ids(world.true_identity.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  cgua::io::write_embeddings(out / "embeddings.jsonl", ids, world.raw_features);
  cgua::io::write_json(out / "catalog.json", cgua::io::catalog_to_json(world.catalog));
  cgua::io::write_json(out / "labels.json", json{{"labels", world.true_identity}});
  cgua::io::write_json(out / "world_config.json", cgua::io::to_json(cfg));
  std::cerr << "generated " << ids.size() << " instances in " << world.catalog.num_scenes() << " scenes -> "
            << out.string() << "\n";
}

struct ClusterOptions {
  std::string embeddings;
  std::string catalog;
  double lambda_sim = 0.1;
  std::string mode = "faithful";
  bool no_filter = false;
  std::string out;
};

void run_cluster(const ClusterOptions& opt) {
  require_file(opt.embeddings);
  require_file(opt.catalog);
  const auto records = cgua::io::read_embeddings(opt.embeddings);
  const auto catalog = cgua::io::read_catalog(opt.catalog, records);
  cgua::CgcOptions cgc;
  cgc.lambda_sim = opt.lambda_sim;
  cgc.mode = cgua::parse_neighbor_mode(opt.mode);
  cgc.filter = !opt.no_filter;
  const auto assignment = cgua::cgc_cluster(cgua::EmbeddingMatrix(records.rows), catalog, cgc);
  std::cerr << "clusters: " << assignment.num_clusters() << " (" << assignment.paired_ids().size() << " paired, "
            << assignment.unpaired_ids().size() << " unpaired)\n";
  emit(cgua::io::cluster_output(assignment), opt.out);
}

struct TrainOptions {
  std::string embeddings;
  std::string catalog;
  std::string config;
  std::string out = "train";
  bool no_renorm = false;
};

void run_train(const TrainOptions& opt, const GlobalOptions& global) {
  require_file(opt.embeddings);
  require_file(opt.catalog);
  cgua::TrainConfig cfg;
  if (!opt.config.empty()) {
    require_file(opt.config);
    cfg = cgua::io::train_config_from_json(cgua::io::read_json(opt.config));
  }
  if (global.seed) cfg.seed = *global.seed;
  if (opt.no_renorm) cfg.renormalize_banks = false;
  const auto records = cgua::io::read_embeddings(opt.embeddings);
  const auto catalog = cgua::io::read_catalog(opt.catalog, records);
  const auto result = cgua::train(records.rows, catalog, cfg);

  const std::filesystem::path out = opt.out;
  std::string lines;
  for (const auto& e : result.history) {
    lines += cgua::io::to_json(e).dump() + "\n";
    std::cerr << "epoch " << e.epoch << " loss " << e.mean_loss << " paired " << e.n_paired << " unpaired "
              << e.n_unpaired << "\n";
  }
  cgua::io::write_text(out / "history.jsonl", lines);
  cgua::io::write_json(out / "encoder.json", cgua::io::encoder_to_json(result.encoder));
  if (result.last_banks) cgua::io::write_json(out / "banks.json", cgua::io::banks_to_json(*result.last_banks));
  cgua::io::write_json(out / "clusters.json", cgua::io::cluster_output(result.last_assignment));
  cgua::io::write_json(out / "train_config.json", cgua::io::to_json(cfg));
}

struct EvalCliOptions {
  std::string queries;
  std::string gallery;
  std::string relevance;
  std::string encoder;
  std::string topk = "1,5,10";
  std::string gallery_sizes;
  std::string out;
};

void run_eval(const EvalCliOptions& opt, const GlobalOptions& global) {
  require_file(opt.queries);
  require_file(opt.gallery);
  require_file(opt.relevance);
  const auto queries = cgua::io::read_embeddings(opt.queries);
  const auto gallery = cgua::io::read_embeddings(opt.gallery);
  const auto truth = cgua::io::relevance_from_json(cgua::io::read_json(opt.relevance));
  const auto ks = cgua::io::parse_size_list(opt.topk);

  cgua::Matrix q(static_cast<Eigen::Index>(truth.size()), queries.rows.cols());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    q.row(static_cast<Eigen::Index>(i)) = queries.rows.row(static_cast<Eigen::Index>(queries.row_of(truth[i].query)));
  }
  cgua::Matrix g = gallery.rows;
  if (!opt.encoder.empty()) {
    require_file(opt.encoder);
    const auto enc = cgua::io::encoder_from_json(cgua::io::read_json(opt.encoder));
    q = cgua::encode(enc, q);
    g = cgua::encode(enc, g);
  } else {
    cgua::normalize_rows(q);
    cgua::normalize_rows(g);
  }
  const cgua::EmbeddingMatrix query_emb(std::move(q));
  const cgua::RetrievalSet set{cgua::EmbeddingMatrix(std::move(g)), gallery.ids, gallery.boxes};
  json report = cgua::io::to_json(cgua::evaluate_retrieval(query_emb, truth, set, ks));
  if (!opt.gallery_sizes.empty()) {
    json sweep = json::object();
    const auto sizes = cgua::io::parse_size_list(opt.gallery_sizes);
    for (const auto& [size, r] : cgua::gallery_size_sweep(query_emb, truth, set, sizes, ks, global.seed.value_or(0))) {
      sweep[std::to_string(size)] = cgua::io::to_json(r);
    }
    report["gallery_sweep"] = std::move(sweep);
  }
  emit(report, opt.out);
}

struct PipelineOptions {
  std::string config;
  std::string manifest;
  std::string out;
};

void run_pipeline_cmd(const PipelineOptions& opt, const GlobalOptions& global) {
  cgua::PipelineConfig cfg;
  if (!opt.manifest.empty()) {
    require_file(opt.manifest);
    const json manifest = cgua::io::read_json(opt.manifest);
    if (!manifest.contains("config")) throw cgua::Error(ErrorKind::Parse, "manifest has no config", opt.manifest);
    cfg = cgua::pipeline_config_from_json(manifest.at("config"));
  } else {
    if (opt.config.empty()) throw cgua::Error(ErrorKind::InvalidArgument, "pipeline needs --config or --manifest");
    require_file(opt.config);
    cfg = cgua::pipeline_config_from_json(cgua::io::read_json(opt.config));
    if (global.seed) {
      if (cfg.world) cfg.world->seed = *global.seed;
      cfg.train.seed = *global.seed;
      cfg.eval.seed = *global.seed;
    }
  }
  if (!opt.out.empty()) cfg.out_dir = opt.out;
  for (const auto& path : {cfg.embeddings_path, cfg.catalog_path, cfg.labels_path, cfg.eval_queries_path,
                           cfg.eval_gallery_path, cfg.eval_relevance_path}) {
    if (!path.empty()) require_file(path);
  }
  const json metrics = cgua::run_pipeline(cfg);
  std::cerr << "untrained mAP " << metrics["untrained"]["mAP"] << ", trained mAP " << metrics["trained"]["mAP"]
            << " -> " << cfg.out_dir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Context-guided clustering and unpaired-assisted memory toolkit"};
  app.require_subcommand(1);

  GlobalOptions global;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Seed overriding the config seeds")->capture_default_str();
  app.add_option("--threads", global.threads, "Worker threads (0 = all cores)")->capture_default_str();

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic world");
  gen_cmd->add_option("--config", gen.config, "World config JSON")->required();
  gen_cmd->add_option("--out", gen.out, "Output directory")->capture_default_str();

  ClusterOptions cluster;
  auto* cluster_cmd = app.add_subcommand("cluster", "Run context-guided clustering");
  cluster_cmd->add_option("--embeddings", cluster.embeddings, "Embeddings JSONL")->required();
  cluster_cmd->add_option("--catalog", cluster.catalog, "Scene catalog JSON")->required();
  cluster_cmd->add_option("--lambda-sim", cluster.lambda_sim, "Context similarity weight")->capture_default_str();
  cluster_cmd->add_option("--neighbor-mode", cluster.mode, "faithful or masked")
      ->check(CLI::IsMember({"faithful", "masked"}))
      ->capture_default_str();
  cluster_cmd->add_flag("--no-filter", cluster.no_filter, "Skip the same-scene filter");
  cluster_cmd->add_option("--out", cluster.out, "Output JSON file (default stdout)");

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Self-train the linear encoder");
  train_cmd->add_option("--embeddings", train.embeddings, "Raw features JSONL")->required();
  train_cmd->add_option("--catalog", train.catalog, "Scene catalog JSON")->required();
  train_cmd->add_option("--config", train.config, "Train config JSON");
  train_cmd->add_option("--out", train.out, "Output directory")->capture_default_str();
  train_cmd->add_flag("--no-renorm", train.no_renorm, "Keep bank rows unnormalized after momentum updates");

  EvalCliOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score retrieval with mAP and CMC");
  eval_cmd->add_option("--queries", eval.queries, "Query JSONL")->required();
  eval_cmd->add_option("--gallery", eval.gallery, "Gallery JSONL")->required();
  eval_cmd->add_option("--relevance", eval.relevance, "Relevance JSON")->required();
  eval_cmd->add_option("--encoder", eval.encoder, "Encoder weights applied to both sides");
  eval_cmd->add_option("--topk", eval.topk, "CMC ranks")->capture_default_str();
  eval_cmd->add_option("--gallery-sizes", eval.gallery_sizes, "Gallery sizes for the sweep");
  eval_cmd->add_option("--out", eval.out, "Output JSON file (default stdout)");

  PipelineOptions pipeline;
  auto* pipeline_cmd = app.add_subcommand("pipeline", "gen -> cluster -> train -> eval in one run");
  pipeline_cmd->add_option("--config", pipeline.config, "Pipeline config JSON");
  pipeline_cmd->add_option("--manifest", pipeline.manifest, "Replay a previous run's manifest");
  pipeline_cmd->add_option("--out", pipeline.out, "Output directory override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("Usage", e.what());
    return kExitBadInput;
  }
  if (*seed_opt) global.seed = seed_value;
  cgua::set_num_threads(global.threads);

  try {
    if (*gen_cmd) run_gen(gen, global);
    if (*cluster_cmd) run_cluster(cluster);
    if (*train_cmd) run_train(train, global);
    if (*eval_cmd) run_eval(eval, global);
    if (*pipeline_cmd) run_pipeline_cmd(pipeline, global);
  } catch (const cgua::Error& e) {
    report_error(cgua::to_string(e.kind()), e.what(), e.path());
    std::cerr << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    report_error("Internal", e.what());
    std::cerr << e.what() << "\n";
    return kExitInternal;
  }
  return 0;
}
