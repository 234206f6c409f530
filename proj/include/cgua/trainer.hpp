#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "cgua/cgc.hpp"
#include "cgua/core.hpp"
#include "cgua/uam.hpp"

namespace cgua {

/// Toy stand-in for the Re-ID backbone: y = normalize(x W).
class LinearEncoder {
 public:
  explicit LinearEncoder(Matrix weights);

  /// Gaussian init with std 1/sqrt(d_in).
  static LinearEncoder random(std::size_t d_in, std::size_t d_out, std::uint64_t seed);
  static LinearEncoder identity(std::size_t d);

  std::size_t d_in() const { return static_cast<std::size_t>(weights_.rows()); }
  std::size_t d_out() const { return static_cast<std::size_t>(weights_.cols()); }
  const Matrix& weights() const { return weights_; }
  Matrix& weights() { return weights_; }

 private:
  Matrix weights_;
};

/// Rows of x W, each L2-normalized. Throws ZeroVector for a vanishing row.
Matrix encode(const LinearEncoder& enc, const Matrix& inputs);

/// dL/dW given dL/dy for every output row, through z = x W and y = z / |z|.
Matrix backward(const LinearEncoder& enc, const Matrix& inputs, const Matrix& upstream);

enum class Optimizer { Sgd, Adam };

Optimizer parse_optimizer(std::string_view text);
std::string_view to_string(Optimizer opt);

struct TrainConfig {
  std::size_t epochs = 5;
  std::size_t iters_per_epoch = 50;
  std::size_t batch_size = 64;
  double lr = 0.1;
  double tau_c = 0.05;
  double momentum = 0.1;
  double lambda_sim = 0.1;
  double lambda_reid = 0.8;
  std::size_t instances_per_cluster = 4;
  std::uint64_t seed = 0;
  std::size_t d_out = 32;
  NeighborMode neighbor_mode = NeighborMode::Faithful;
  Optimizer optimizer = Optimizer::Sgd;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t lr_step_epochs = 10;  // Adam only: lr *= lr_decay every lr_step_epochs
  double lr_decay = 0.1;
  bool renormalize_banks = true;
  bool record_batches = false;
};

/// Throws InvalidArgument on the first out-of-range field.
void validate(const TrainConfig& cfg);

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  std::size_t n_clusters = 0;
  std::size_t n_paired = 0;
  std::size_t n_unpaired = 0;
  double lr = 0.0;
  bool skipped = false;  // no paired clusters this epoch
};

struct BatchRecord {
  std::size_t epoch = 0;
  std::size_t iteration = 0;
  std::vector<std::size_t> queries;  // instance ids used as q
};

struct TrainResult {
  LinearEncoder encoder;
  std::vector<EpochStats> history;
  std::vector<BatchRecord> batches;  // filled when record_batches is set
  ClusterAssignment last_assignment;
  std::optional<MemoryBanks> last_banks;
};

/// The encoder train() starts from when no initial encoder is given.
LinearEncoder initial_encoder(std::size_t d_in, const TrainConfig& cfg);

/// Self-training: each epoch embeds all instances, re-clusters, re-inits the
/// banks and runs iters_per_epoch contrastive steps. The encoder starts from
/// `initial` or, when absent, initial_encoder(d_in, cfg).
TrainResult train(const Matrix& raw_features, const SceneCatalog& catalog, const TrainConfig& cfg,
                  std::optional<LinearEncoder> initial = std::nullopt);

}  // namespace cgua
