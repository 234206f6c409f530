#include "cgua/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace cgua {
namespace {

// Independent streams derived from one user seed.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

enum Stream : std::uint64_t { kInit = 0, kBatches = 1, kUnpairedPositive = 2 };

std::vector<std::size_t> sample_indices(std::size_t population, std::size_t count, std::mt19937_64& gen) {
  std::vector<std::size_t> out;
  out.reserve(count);
  if (population >= count) {
    std::vector<std::size_t> pool(population);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t k = 0; k < count; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, population - 1);
      std::swap(pool[k], pool[pick(gen)]);
      out.push_back(pool[k]);
    }
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, population - 1);
    for (std::size_t k = 0; k < count; ++k) out.push_back(pick(gen));
  }
  return out;
}

Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = m.row(static_cast<Eigen::Index>(rows[k]));
  return out;
}

struct AdamState {
  Matrix first;
  Matrix second;
  std::size_t steps = 0;
};

}  // namespace

LinearEncoder::LinearEncoder(Matrix weights) : weights_(std::move(weights)) {
  if (weights_.cols() < 2) throw Error(ErrorKind::InvalidArgument, "encoder output dimension must be >= 2");
  if (weights_.rows() < 1) throw Error(ErrorKind::InvalidArgument, "encoder input dimension must be >= 1");
  if (!weights_.allFinite()) throw Error(ErrorKind::InvalidArgument, "encoder weights must be finite");
}

LinearEncoder LinearEncoder::random(std::size_t d_in, std::size_t d_out, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(d_in)));
  Matrix w(static_cast<Eigen::Index>(d_in), static_cast<Eigen::Index>(d_out));
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = normal(gen);
  }
  return LinearEncoder(std::move(w));
}

LinearEncoder LinearEncoder::identity(std::size_t d) {
  return LinearEncoder(Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)));
}

Matrix encode(const LinearEncoder& enc, const Matrix& inputs) {
  if (static_cast<std::size_t>(inputs.cols()) != enc.d_in()) {
    throw Error(ErrorKind::InvalidArgument, "input dimension does not match the encoder");
  }
  Matrix out = inputs * enc.weights();
  normalize_rows(out);
  return out;
}

Matrix backward(const LinearEncoder& enc, const Matrix& inputs, const Matrix& upstream) {
  if (upstream.rows() != inputs.rows() || static_cast<std::size_t>(upstream.cols()) != enc.d_out()) {
    throw Error(ErrorKind::InvalidArgument, "upstream gradient shape does not match the batch");
  }
  const Matrix z = inputs * enc.weights();
  Matrix dz(z.rows(), z.cols());
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const double norm = z.row(r).norm();
    if (!(norm > kZeroNormEps)) throw Error(ErrorKind::ZeroVector, "projection of row " + std::to_string(r) + " vanished");
    const auto y = z.row(r) / norm;
    const auto g = upstream.row(r);
    dz.row(r) = (g - g.dot(y) * y) / norm;
  }
  return inputs.transpose() * dz;
}

Optimizer parse_optimizer(std::string_view text) {
  if (text == "sgd") return Optimizer::Sgd;
  if (text == "adam") return Optimizer::Adam;
  throw Error(ErrorKind::InvalidArgument, "unknown optimizer '" + std::string(text) + "'");
}

std::string_view to_string(Optimizer opt) { return opt == Optimizer::Sgd ? "sgd" : "adam"; }

void validate(const TrainConfig& cfg) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorKind::InvalidArgument, what);
  };
  require(cfg.epochs >= 1, "epochs must be >= 1");
  require(cfg.iters_per_epoch >= 1, "iters_per_epoch must be >= 1");
  require(cfg.batch_size >= 1, "batch_size must be >= 1");
  require(cfg.instances_per_cluster >= 1, "instances_per_cluster must be >= 1");
  require(cfg.lr >= 0.0 && std::isfinite(cfg.lr), "lr must be finite and >= 0");
  require(cfg.tau_c > 0.0, "tau_c must be > 0");
  require(cfg.momentum >= 0.0 && cfg.momentum <= 1.0, "momentum must lie in [0, 1]");
  require(cfg.lambda_sim >= 0.0, "lambda_sim must be >= 0");
  require(cfg.lambda_reid >= 0.0 && cfg.lambda_reid <= 1.0, "lambda_reid must lie in [0, 1]");
  require(cfg.d_out >= 2, "d_out must be >= 2");
  require(cfg.lr_step_epochs >= 1, "lr_step_epochs must be >= 1");
  require(cfg.lr_decay > 0.0, "lr_decay must be > 0");
}

LinearEncoder initial_encoder(std::size_t d_in, const TrainConfig& cfg) {
  return LinearEncoder::random(d_in, cfg.d_out, stream_seed(cfg.seed, kInit));
}

TrainResult train(const Matrix& raw_features, const SceneCatalog& catalog, const TrainConfig& cfg,
                  std::optional<LinearEncoder> initial) {
  validate(cfg);
  const std::size_t n = static_cast<std::size_t>(raw_features.rows());
  if (n < 4) throw Error(ErrorKind::InvalidArgument, "training needs at least 4 instances");
  validate_catalog(catalog, n);

  TrainResult result{initial ? std::move(*initial)
                             : initial_encoder(static_cast<std::size_t>(raw_features.cols()), cfg),
                     {}, {}, {}, std::nullopt};
  LinearEncoder& enc = result.encoder;
  if (static_cast<std::size_t>(raw_features.cols()) != enc.d_in()) {
    throw Error(ErrorKind::InvalidArgument, "initial encoder input dimension does not match the features");
  }

  std::mt19937_64 batch_gen(stream_seed(cfg.seed, kBatches));
  std::mt19937_64 positive_gen(stream_seed(cfg.seed, kUnpairedPositive));
  AdamState adam{Matrix::Zero(enc.weights().rows(), enc.weights().cols()),
                 Matrix::Zero(enc.weights().rows(), enc.weights().cols()), 0};

  CgcOptions cgc;
  cgc.lambda_sim = cfg.lambda_sim;
  cgc.mode = cfg.neighbor_mode;
  const std::size_t clusters_per_batch = std::max<std::size_t>(1, cfg.batch_size / cfg.instances_per_cluster);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const EmbeddingMatrix emb(encode(enc, raw_features));
    ClusterAssignment assignment = cgc_cluster(emb, catalog, cgc);

    EpochStats stats;
    stats.epoch = epoch;
    stats.n_clusters = assignment.num_clusters();
    stats.n_paired = assignment.paired_ids().size();
    stats.n_unpaired = assignment.unpaired_ids().size();
    stats.lr = cfg.optimizer == Optimizer::Adam
                   ? cfg.lr * std::pow(cfg.lr_decay, static_cast<double>((epoch - 1) / cfg.lr_step_epochs))
                   : cfg.lr;

    if (assignment.paired_ids().empty()) {
      if (epoch == 1) throw Error(ErrorKind::NoPairedClusters, "the first clustering produced no paired clusters");
      stats.skipped = true;
      result.history.push_back(stats);
      result.last_assignment = std::move(assignment);
      result.last_banks.reset();
      continue;
    }
    MemoryBanks banks = init_banks(assignment, emb);
    const PairedBank& paired = banks.paired;

    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    for (std::size_t it = 0; it < cfg.iters_per_epoch; ++it) {
      // Queries come only from paired clusters.
      std::vector<std::size_t> query_ids;
      std::vector<std::size_t> positives;
      for (auto c : sample_indices(paired.size(), clusters_per_batch, batch_gen)) {
        const auto& ids = paired.store_ids[c];
        for (auto k : sample_indices(ids.size(), cfg.instances_per_cluster, batch_gen)) {
          query_ids.push_back(ids[k]);
          positives.push_back(c);
        }
      }
      const Matrix inputs = gather_rows(raw_features, query_ids);
      const Matrix queries = encode(enc, inputs);
      const auto batch = static_cast<double>(query_ids.size());

      Matrix upstream(queries.rows(), queries.cols());
      for (Eigen::Index b = 0; b < queries.rows(); ++b) {
        const LossValue lv = reid_loss(queries.row(b).transpose(), positives[static_cast<std::size_t>(b)], banks,
                                       cfg.tau_c, cfg.lambda_reid, positive_gen());
        loss_sum += lv.value;
        ++loss_count;
        upstream.row(b) = lv.grad_q.transpose() / batch;
      }

      const Matrix grad = backward(enc, inputs, upstream);
      if (cfg.optimizer == Optimizer::Sgd) {
        enc.weights() -= stats.lr * grad;
      } else {
        ++adam.steps;
        adam.first = cfg.adam_beta1 * adam.first + (1.0 - cfg.adam_beta1) * grad;
        adam.second = cfg.adam_beta2 * adam.second + (1.0 - cfg.adam_beta2) * grad.cwiseProduct(grad);
        const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(adam.steps));
        const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(adam.steps));
        enc.weights().array() -=
            stats.lr * (adam.first.array() / c1) / ((adam.second.array() / c2).sqrt() + cfg.adam_eps);
      }

      // Bank updates use this batch's forward features as constants.
      std::vector<PairedUpdate> paired_updates;
      paired_updates.reserve(query_ids.size());
      for (std::size_t b = 0; b < query_ids.size(); ++b) {
        paired_updates.push_back({positives[b], query_ids[b], queries.row(static_cast<Eigen::Index>(b)).transpose()});
      }
      banks.paired = update_paired_bank(std::move(banks.paired), paired_updates, cfg.momentum, cfg.renormalize_banks);

      if (banks.unpaired.size() > 0) {
        const auto rows = sample_indices(banks.unpaired.size(), std::min(cfg.batch_size, banks.unpaired.size()), batch_gen);
        std::vector<std::size_t> inst;
        for (auto r : rows) inst.push_back(banks.unpaired.instance_ids[r]);
        const Matrix fresh = encode(enc, gather_rows(raw_features, inst));
        std::vector<UnpairedUpdate> updates;
        for (std::size_t k = 0; k < rows.size(); ++k) updates.push_back({rows[k], fresh.row(static_cast<Eigen::Index>(k)).transpose()});
        banks.unpaired = update_unpaired_bank(std::move(banks.unpaired), updates, cfg.momentum, cfg.renormalize_banks);
      }

      if (cfg.record_batches) result.batches.push_back({epoch, it, std::move(query_ids)});
    }
    stats.mean_loss = loss_sum / static_cast<double>(loss_count);
    result.history.push_back(stats);
    result.last_assignment = std::move(assignment);
    result.last_banks = std::move(banks);
  }
  return result;
}

}  // namespace cgua
