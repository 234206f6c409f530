#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "cgua/core.hpp"

namespace cgua {

/// Cluster-level memory for paired clusters (>= 2 members).
struct PairedBank {
  Matrix centroids;                                  // N_p x d, unit rows
  std::vector<Matrix> store;                         // per cluster: member features
  std::vector<std::vector<std::size_t>> store_ids;   // per cluster: member instance ids
  std::map<std::size_t, std::size_t> cluster_of;     // instance id -> paired index
  std::vector<std::size_t> source_cluster;           // paired index -> assignment cluster id

  std::size_t size() const { return static_cast<std::size_t>(centroids.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(centroids.cols()); }
};

/// Instance-level memory for unpaired (singleton) clusters.
struct UnpairedBank {
  Matrix features;                      // N_u x d, unit rows
  std::vector<std::size_t> instance_ids;  // bank row -> instance id

  std::size_t size() const { return static_cast<std::size_t>(features.rows()); }
};

struct MemoryBanks {
  PairedBank paired;
  UnpairedBank unpaired;
};

/// Loss value plus its gradient with respect to the query. `probs` holds the
/// softmax over the candidate logits and `positive` the target index in it.
struct LossValue {
  double value = 0.0;
  Vector grad_q;
  Vector probs;
  std::size_t positive = 0;
};

/// Paired centroids are normalized member means; unpaired rows are the
/// singleton features in cluster-id order. Throws NoPairedClusters.
MemoryBanks init_banks(const ClusterAssignment& assignment, const EmbeddingMatrix& emb);

/// -log softmax(candidates * q / tau)[positive], with its analytic gradient
/// (sum_i p_i x_i - x_pos) / tau. Shared kernel of every contrastive term.
LossValue softmax_contrast(const Vector& q, const Matrix& candidates, std::size_t positive, double tau);

/// Centroid contrast against every paired cluster.
LossValue cluster_loss(const Vector& q, std::size_t positive, const PairedBank& bank, double tau_c);

/// The stored features hard_loss selects for q: the least similar member of
/// the positive cluster and the most similar member of every other cluster.
Matrix select_hard_samples(const Vector& q, std::size_t positive, const PairedBank& bank);

/// Hard-sample contrast: one logit per paired cluster from its hardest member.
LossValue hard_loss(const Vector& q, std::size_t positive, const PairedBank& bank, double tau_c);

/// cluster_loss + hard_loss.
LossValue paired_loss(const Vector& q, std::size_t positive, const PairedBank& bank, double tau_c);

/// Index of the random positive u* drawn for a given seed.
std::size_t draw_unpaired_positive(std::uint64_t rng_seed, std::size_t bank_size);

/// Contrast against the unpaired bank with a uniformly drawn positive.
/// Throws EmptyUnpairedBank when the bank has no rows.
LossValue unpaired_loss(const Vector& q, const UnpairedBank& bank, double tau_c, std::uint64_t rng_seed);

/// lambda_reid * L_p + (1 - lambda_reid) * L_u; L_u is 0 for an empty unpaired bank.
LossValue reid_loss(const Vector& q, std::size_t positive, const MemoryBanks& banks, double tau_c,
                    double lambda_reid, std::uint64_t rng_seed);

struct PairedUpdate {
  std::size_t cluster = 0;   // paired index
  std::size_t instance = 0;  // instance id, must belong to the cluster
  Vector feature;
};

struct UnpairedUpdate {
  std::size_t index = 0;  // unpaired bank row
  Vector feature;
};

/// c <- m c + (1 - m) mean(batch features of c), then renormalized unless
/// renormalize is false. Stored member features are replaced by the batch ones.
PairedBank update_paired_bank(PairedBank bank, std::span<const PairedUpdate> batch, double momentum,
                              bool renormalize = true);

/// u <- m u + (1 - m) u_new for every listed row (duplicates are averaged first).
UnpairedBank update_unpaired_bank(UnpairedBank bank, std::span<const UnpairedUpdate> updates,
                                  double momentum, bool renormalize = true);

}  // namespace cgua
