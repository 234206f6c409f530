#include "cgua/io.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace cgua::io {
namespace {

[[noreturn]] void parse_error(const std::string& what) { throw Error(ErrorKind::Parse, what); }

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string(), path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string(), path.string());
  return out;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows, std::optional<Eigen::Index> cols = std::nullopt) {
  if (!rows.is_array()) parse_error("expected a matrix (array of rows)");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index d = cols ? *cols : (n > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0);
  Matrix m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const json& r = rows[static_cast<std::size_t>(i)];
    if (!r.is_array() || static_cast<Eigen::Index>(r.size()) != d) parse_error("ragged matrix row " + std::to_string(i));
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = r[static_cast<std::size_t>(j)].get<double>();
  }
  return m;
}

template <typename T>
void take(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

void reject_unknown(const json& j, const std::set<std::string>& known, const char* what) {
  if (!j.is_object()) parse_error(std::string(what) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) parse_error(std::string("unknown ") + what + " key '" + key + "'");
  }
}

}  // namespace

std::size_t EmbeddingRecords::row_of(std::size_t id) const {
  if (auto it = row_index.find(id); it != row_index.end()) return it->second;
  if (row_index.empty()) {
    for (std::size_t r = 0; r < ids.size(); ++r) {
      if (ids[r] == id) return r;
    }
  }
  parse_error("unknown embedding id " + std::to_string(id));
}

EmbeddingRecords read_embeddings(const std::filesystem::path& path) {
  auto in = open_in(path);
  EmbeddingRecords out;
  std::vector<std::vector<double>> vecs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const auto id = j.at("id").get<std::size_t>();
      if (!out.row_index.emplace(id, out.ids.size()).second) parse_error("duplicate id " + std::to_string(id));
      vecs.push_back(j.at("vec").get<std::vector<double>>());
      if (!vecs.empty() && vecs.back().size() != vecs.front().size()) parse_error("inconsistent vector length");
      if (j.contains("box")) out.boxes[id] = box_from_json(j.at("box"));
      out.ids.push_back(id);
    } catch (const json::exception& e) {
      parse_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      parse_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  const auto d = static_cast<Eigen::Index>(vecs.empty() ? 0 : vecs.front().size());
  out.rows.resize(static_cast<Eigen::Index>(vecs.size()), d);
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    for (Eigen::Index k = 0; k < d; ++k) out.rows(static_cast<Eigen::Index>(i), k) = vecs[i][static_cast<std::size_t>(k)];
  }
  return out;
}

void write_embeddings(const std::filesystem::path& path, const std::vector<std::size_t>& ids, const Matrix& rows,
                      const std::map<std::size_t, Box>& boxes) {
  if (ids.size() != static_cast<std::size_t>(rows.rows())) throw Error(ErrorKind::InvalidArgument, "one id per row");
  auto out = open_out(path);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    json j;
    j["id"] = ids[i];
    std::vector<double> v(rows.row(static_cast<Eigen::Index>(i)).begin(), rows.row(static_cast<Eigen::Index>(i)).end());
    j["vec"] = std::move(v);
    if (auto it = boxes.find(ids[i]); it != boxes.end()) j["box"] = box_to_json(it->second);
    out << j.dump() << '\n';
  }
}

SceneCatalog read_catalog(const std::filesystem::path& path, const EmbeddingRecords& records) {
  const json j = read_json(path);
  try {
    const json& scenes = j.at("scenes");
    const std::size_t m = scenes.size();
    std::vector<std::vector<std::size_t>> members(m);
    std::vector<std::optional<Box>> boxes(records.ids.size());
    std::vector<char> seen_scene(m, 0);
    bool any_boxes = false;
    for (const auto& s : scenes) {
      const auto id = s.at("id").get<std::size_t>();
      if (id >= m || seen_scene[id]) parse_error("scene ids must be unique and dense in [0, " + std::to_string(m) + ")");
      seen_scene[id] = 1;
      const auto instances = s.at("instances").get<std::vector<std::size_t>>();
      for (auto inst : instances) members[id].push_back(records.row_of(inst));
      if (s.contains("boxes")) {
        const json& b = s.at("boxes");
        if (b.size() != instances.size()) parse_error("scene " + std::to_string(id) + " has a box count mismatch");
        for (std::size_t k = 0; k < instances.size(); ++k) boxes[members[id][k]] = box_from_json(b[k]);
        any_boxes = true;
      }
    }
    SceneCatalog cat;
    cat.members = std::move(members);
    cat.image_of.assign(records.ids.size(), m);
    for (std::size_t s = 0; s < m; ++s) {
      for (auto r : cat.members[s]) {
        if (cat.image_of[r] != m) {
          throw Error(ErrorKind::InconsistentCatalog, "instance id " + std::to_string(records.ids[r]) + " appears in two scenes");
        }
        cat.image_of[r] = s;
      }
    }
    if (any_boxes) {
      std::vector<Box> all;
      for (std::size_t r = 0; r < boxes.size(); ++r) {
        if (!boxes[r]) throw Error(ErrorKind::InconsistentCatalog, "boxes are given for some scenes only");
        all.push_back(*boxes[r]);
      }
      cat.boxes = std::move(all);
    }
    validate_catalog(cat, records.ids.size());
    return cat;
  } catch (const json::exception& e) {
    parse_error(path.string() + ": " + e.what());
  }
}

json catalog_to_json(const SceneCatalog& catalog) {
  json scenes = json::array();
  for (std::size_t s = 0; s < catalog.num_scenes(); ++s) {
    json scene;
    scene["id"] = s;
    scene["instances"] = catalog.members[s];
    if (catalog.boxes) {
      json b = json::array();
      for (auto i : catalog.members[s]) b.push_back(box_to_json((*catalog.boxes)[i]));
      scene["boxes"] = std::move(b);
    }
    scenes.push_back(std::move(scene));
  }
  return json{{"scenes", std::move(scenes)}};
}

json read_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    parse_error(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& value) { write_text(path, value.dump(2) + "\n"); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

Box box_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 4) parse_error("a box needs exactly 4 coordinates");
  return {v[0], v[1], v[2], v[3]};
}

json box_to_json(const Box& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

json cluster_output(const ClusterAssignment& assignment) {
  return json{{"labels", assignment.label_of()},
              {"paired", assignment.paired_ids()},
              {"unpaired", assignment.unpaired_ids()}};
}

json encoder_to_json(const LinearEncoder& enc) {
  return json{{"d_in", enc.d_in()}, {"d_out", enc.d_out()}, {"weights", matrix_to_json(enc.weights())}};
}

LinearEncoder encoder_from_json(const json& j) {
  try {
    const auto cols = j.at("d_out").get<Eigen::Index>();
    Matrix w = matrix_from_json(j.at("weights"), cols);
    if (w.rows() != j.at("d_in").get<Eigen::Index>()) parse_error("encoder d_in does not match its weights");
    return LinearEncoder(std::move(w));
  } catch (const json::exception& e) {
    parse_error(std::string("encoder: ") + e.what());
  }
}

json banks_to_json(const MemoryBanks& banks) {
  json cluster_of = json::object();
  for (const auto& [inst, c] : banks.paired.cluster_of) cluster_of[std::to_string(inst)] = c;
  json store = json::array();
  for (std::size_t c = 0; c < banks.paired.size(); ++c) {
    json members = json::array();
    for (std::size_t k = 0; k < banks.paired.store_ids[c].size(); ++k) {
      const auto row = banks.paired.store[c].row(static_cast<Eigen::Index>(k));
      members.push_back(json{{"id", banks.paired.store_ids[c][k]}, {"vec", std::vector<double>(row.begin(), row.end())}});
    }
    store.push_back(std::move(members));
  }
  return json{{"paired", matrix_to_json(banks.paired.centroids)},
              {"unpaired", matrix_to_json(banks.unpaired.features)},
              {"cluster_of", std::move(cluster_of)},
              {"source_cluster", banks.paired.source_cluster},
              {"unpaired_instances", banks.unpaired.instance_ids},
              {"store", std::move(store)}};
}

MemoryBanks banks_from_json(const json& j) {
  try {
    MemoryBanks banks;
    banks.paired.centroids = matrix_from_json(j.at("paired"));
    const Eigen::Index d = banks.paired.centroids.cols();
    banks.unpaired.features = matrix_from_json(j.at("unpaired"), d);
    for (const auto& [key, value] : j.at("cluster_of").items()) {
      banks.paired.cluster_of[std::stoul(key)] = value.get<std::size_t>();
    }
    take(j, "source_cluster", banks.paired.source_cluster);
    take(j, "unpaired_instances", banks.unpaired.instance_ids);
    const std::size_t np = banks.paired.size();
    banks.paired.store.assign(np, Matrix(0, d));
    banks.paired.store_ids.assign(np, {});
    if (j.contains("store")) {
      const json& store = j.at("store");
      if (store.size() != np) parse_error("bank store has the wrong number of clusters");
      for (std::size_t c = 0; c < np; ++c) {
        json vecs = json::array();
        for (const auto& member : store[c]) {
          banks.paired.store_ids[c].push_back(member.at("id").get<std::size_t>());
          vecs.push_back(member.at("vec"));
        }
        banks.paired.store[c] = matrix_from_json(vecs, d);
      }
    }
    return banks;
  } catch (const json::exception& e) {
    parse_error(std::string("bank snapshot: ") + e.what());
  }
}

TrainConfig train_config_from_json(const json& j) {
  reject_unknown(j,
                 {"epochs", "iters_per_epoch", "batch_size", "lr", "tau_c", "momentum", "lambda_sim", "lambda_reid",
                  "instances_per_cluster", "seed", "d_out", "neighbor_mode", "optimizer", "adam_beta1", "adam_beta2",
                  "adam_eps", "lr_step_epochs", "lr_decay", "renormalize_banks", "record_batches"},
                 "train config");
  TrainConfig cfg;
  try {
    take(j, "epochs", cfg.epochs);
    take(j, "iters_per_epoch", cfg.iters_per_epoch);
    take(j, "batch_size", cfg.batch_size);
    take(j, "lr", cfg.lr);
    take(j, "tau_c", cfg.tau_c);
    take(j, "momentum", cfg.momentum);
    take(j, "lambda_sim", cfg.lambda_sim);
    take(j, "lambda_reid", cfg.lambda_reid);
    take(j, "instances_per_cluster", cfg.instances_per_cluster);
    take(j, "seed", cfg.seed);
    take(j, "d_out", cfg.d_out);
    if (j.contains("neighbor_mode")) cfg.neighbor_mode = parse_neighbor_mode(j.at("neighbor_mode").get<std::string>());
    if (j.contains("optimizer")) cfg.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
    take(j, "adam_beta1", cfg.adam_beta1);
    take(j, "adam_beta2", cfg.adam_beta2);
    take(j, "adam_eps", cfg.adam_eps);
    take(j, "lr_step_epochs", cfg.lr_step_epochs);
    take(j, "lr_decay", cfg.lr_decay);
    take(j, "renormalize_banks", cfg.renormalize_banks);
    take(j, "record_batches", cfg.record_batches);
  } catch (const json::exception& e) {
    parse_error(std::string("train config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

json to_json(const TrainConfig& cfg) {
  return json{{"epochs", cfg.epochs},
              {"iters_per_epoch", cfg.iters_per_epoch},
              {"batch_size", cfg.batch_size},
              {"lr", cfg.lr},
              {"tau_c", cfg.tau_c},
              {"momentum", cfg.momentum},
              {"lambda_sim", cfg.lambda_sim},
              {"lambda_reid", cfg.lambda_reid},
              {"instances_per_cluster", cfg.instances_per_cluster},
              {"seed", cfg.seed},
              {"d_out", cfg.d_out},
              {"neighbor_mode", std::string(to_string(cfg.neighbor_mode))},
              {"optimizer", std::string(to_string(cfg.optimizer))},
              {"adam_beta1", cfg.adam_beta1},
              {"adam_beta2", cfg.adam_beta2},
              {"adam_eps", cfg.adam_eps},
              {"lr_step_epochs", cfg.lr_step_epochs},
              {"lr_decay", cfg.lr_decay},
              {"renormalize_banks", cfg.renormalize_banks},
              {"record_batches", cfg.record_batches}};
}

WorldConfig world_config_from_json(const json& j) {
  reject_unknown(j,
                 {"n_identities", "sightings_per_identity", "n_unpaired", "d_raw", "noise_sigma", "cotravel_prob",
                  "min_persons_per_scene", "max_persons_per_scene", "seed", "nuisance_dims", "scene_bias_sigma"},
                 "world config");
  WorldConfig cfg;
  try {
    take(j, "n_identities", cfg.n_identities);
    take(j, "sightings_per_identity", cfg.sightings_per_identity);
    take(j, "n_unpaired", cfg.n_unpaired);
    take(j, "d_raw", cfg.d_raw);
    take(j, "noise_sigma", cfg.noise_sigma);
    take(j, "cotravel_prob", cfg.cotravel_prob);
    take(j, "min_persons_per_scene", cfg.min_persons_per_scene);
    take(j, "max_persons_per_scene", cfg.max_persons_per_scene);
    take(j, "seed", cfg.seed);
    take(j, "nuisance_dims", cfg.nuisance_dims);
    take(j, "scene_bias_sigma", cfg.scene_bias_sigma);
  } catch (const json::exception& e) {
    parse_error(std::string("world config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

json to_json(const WorldConfig& cfg) {
  return json{{"n_identities", cfg.n_identities},
              {"sightings_per_identity", cfg.sightings_per_identity},
              {"n_unpaired", cfg.n_unpaired},
              {"d_raw", cfg.d_raw},
              {"noise_sigma", cfg.noise_sigma},
              {"cotravel_prob", cfg.cotravel_prob},
              {"min_persons_per_scene", cfg.min_persons_per_scene},
              {"max_persons_per_scene", cfg.max_persons_per_scene},
              {"seed", cfg.seed},
              {"nuisance_dims", cfg.nuisance_dims},
              {"scene_bias_sigma", cfg.scene_bias_sigma}};
}

json to_json(const EpochStats& stats) {
  return json{{"epoch", stats.epoch},         {"mean_loss", stats.mean_loss},   {"n_clusters", stats.n_clusters},
              {"n_paired", stats.n_paired},   {"n_unpaired", stats.n_unpaired}, {"lr", stats.lr},
              {"skipped", stats.skipped}};
}

json to_json(const MetricsReport& report) {
  json cmc = json::object();
  for (const auto& [k, v] : report.cmc) cmc[std::to_string(k)] = v;
  json per_query = json::array();
  for (std::size_t i = 0; i < report.per_query_ap.size(); ++i) {
    per_query.push_back(json{{"query", report.query_ids[i]}, {"ap", report.per_query_ap[i]}});
  }
  return json{{"mAP", report.mAP},
              {"cmc", std::move(cmc)},
              {"per_query", std::move(per_query)},
              {"excluded_queries", report.excluded_queries}};
}

std::vector<QueryRelevance> relevance_from_json(const json& j) {
  if (!j.is_array()) parse_error("relevance file must hold a JSON array");
  std::vector<QueryRelevance> out;
  try {
    for (const auto& r : j) {
      QueryRelevance q;
      q.query = r.at("query").get<std::size_t>();
      q.relevant = r.at("relevant").get<std::vector<std::size_t>>();
      if (r.contains("gt_box") && !r.at("gt_box").is_null()) q.gt_box = box_from_json(r.at("gt_box"));
      out.push_back(std::move(q));
    }
  } catch (const json::exception& e) {
    parse_error(std::string("relevance: ") + e.what());
  }
  return out;
}

json relevance_to_json(const std::vector<QueryRelevance>& truth) {
  json out = json::array();
  for (const auto& q : truth) {
    json r{{"query", q.query}, {"relevant", q.relevant}};
    if (q.gt_box) r["gt_box"] = box_to_json(*q.gt_box);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    // stoull silently wraps a leading minus sign.
    if (item.empty() || !std::isdigit(static_cast<unsigned char>(item.front()))) {
      parse_error("not an integer list: '" + text + "'");
    }
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &used);
    } catch (const std::exception&) {
      parse_error("not an integer list: '" + text + "'");
    }
    if (used != item.size()) parse_error("not an integer list: '" + text + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

}  // namespace cgua::io
