#include "cgua/uam.hpp"

#include <cmath>
#include <random>
#include <string>

namespace cgua {
namespace {

void check_temperature(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorKind::InvalidTemperature, "temperature must be > 0, got " + std::to_string(tau));
  }
}

void check_momentum(double m) {
  if (!(m >= 0.0 && m <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "momentum must lie in [0, 1], got " + std::to_string(m));
  }
}

void check_positive(std::size_t positive, const PairedBank& bank) {
  if (positive >= bank.size()) {
    throw Error(ErrorKind::UnknownCluster, "paired cluster " + std::to_string(positive) + " does not exist");
  }
}

Vector blend(const Vector& old_row, const Vector& fresh, double m, bool renormalize) {
  if (m == 1.0) return old_row;
  Vector mixed = m * old_row + (1.0 - m) * fresh;
  return renormalize ? l2_normalize(mixed) : mixed;
}

}  // namespace

MemoryBanks init_banks(const ClusterAssignment& assignment, const EmbeddingMatrix& emb) {
  if (assignment.num_instances() != emb.n()) {
    throw Error(ErrorKind::InvalidArgument, "assignment and embeddings disagree on N");
  }
  const auto& paired = assignment.paired_ids();
  const auto& unpaired = assignment.unpaired_ids();
  if (paired.empty()) throw Error(ErrorKind::NoPairedClusters, "every cluster is a singleton");

  const auto d = static_cast<Eigen::Index>(emb.d());
  MemoryBanks banks;
  PairedBank& pb = banks.paired;
  pb.centroids.resize(static_cast<Eigen::Index>(paired.size()), d);
  pb.store.reserve(paired.size());
  for (std::size_t p = 0; p < paired.size(); ++p) {
    const auto& members = assignment.clusters()[paired[p]];
    Matrix rows(static_cast<Eigen::Index>(members.size()), d);
    for (std::size_t k = 0; k < members.size(); ++k) {
      rows.row(static_cast<Eigen::Index>(k)) = emb.row(members[k]);
      pb.cluster_of[members[k]] = p;
    }
    pb.centroids.row(static_cast<Eigen::Index>(p)) = l2_normalize(rows.colwise().mean().transpose());
    pb.store.push_back(std::move(rows));
    pb.store_ids.push_back(members);
    pb.source_cluster.push_back(paired[p]);
  }

  UnpairedBank& ub = banks.unpaired;
  ub.features.resize(static_cast<Eigen::Index>(unpaired.size()), d);
  for (std::size_t u = 0; u < unpaired.size(); ++u) {
    const std::size_t inst = assignment.clusters()[unpaired[u]].front();
    ub.features.row(static_cast<Eigen::Index>(u)) = emb.row(inst);
    ub.instance_ids.push_back(inst);
  }
  return banks;
}

LossValue softmax_contrast(const Vector& q, const Matrix& candidates, std::size_t positive, double tau) {
  check_temperature(tau);
  if (positive >= static_cast<std::size_t>(candidates.rows())) {
    throw Error(ErrorKind::InvalidArgument, "positive index out of range");
  }
  const Vector logits = candidates * q / tau;
  const double peak = logits.maxCoeff();
  Vector probs = (logits.array() - peak).exp().matrix();
  const double total = probs.sum();
  probs /= total;

  LossValue out;
  out.value = peak + std::log(total) - logits(static_cast<Eigen::Index>(positive));
  // Rounding can push a zero loss a hair below 0.
  if (out.value < 0.0) out.value = 0.0;
  out.grad_q = (candidates.transpose() * probs - candidates.row(static_cast<Eigen::Index>(positive)).transpose()) / tau;
  out.probs = std::move(probs);
  out.positive = positive;
  return out;
}

LossValue cluster_loss(const Vector& q, std::size_t positive, const PairedBank& bank, double tau_c) {
  check_temperature(tau_c);
  check_positive(positive, bank);
  return softmax_contrast(q, bank.centroids, positive, tau_c);
}

Matrix select_hard_samples(const Vector& q, std::size_t positive, const PairedBank& bank) {
  check_positive(positive, bank);
  Matrix hard(static_cast<Eigen::Index>(bank.size()), static_cast<Eigen::Index>(bank.dim()));
  for (std::size_t c = 0; c < bank.size(); ++c) {
    const Matrix& rows = bank.store[c];
    if (rows.rows() == 0) {
      throw Error(ErrorKind::InvalidArgument, "paired cluster " + std::to_string(c) + " has an empty store");
    }
    const Vector sims = rows * q;
    // Ties go to the smallest stored row.
    Eigen::Index pick = 0;
    for (Eigen::Index k = 1; k < sims.size(); ++k) {
      if (c == positive ? sims(k) < sims(pick) : sims(k) > sims(pick)) pick = k;
    }
    hard.row(static_cast<Eigen::Index>(c)) = rows.row(pick);
  }
  return hard;
}

LossValue hard_loss(const Vector& q, std::size_t positive, const PairedBank& bank, double tau_c) {
  check_temperature(tau_c);
  return softmax_contrast(q, select_hard_samples(q, positive, bank), positive, tau_c);
}

LossValue paired_loss(const Vector& q, std::size_t positive, const PairedBank& bank, double tau_c) {
  LossValue cl = cluster_loss(q, positive, bank, tau_c);
  const LossValue hl = hard_loss(q, positive, bank, tau_c);
  cl.value += hl.value;
  cl.grad_q += hl.grad_q;
  return cl;
}

std::size_t draw_unpaired_positive(std::uint64_t rng_seed, std::size_t bank_size) {
  if (bank_size == 0) throw Error(ErrorKind::EmptyUnpairedBank, "unpaired bank is empty");
  std::mt19937_64 gen(rng_seed);
  std::uniform_int_distribution<std::size_t> pick(0, bank_size - 1);
  return pick(gen);
}

LossValue unpaired_loss(const Vector& q, const UnpairedBank& bank, double tau_c, std::uint64_t rng_seed) {
  check_temperature(tau_c);
  const std::size_t positive = draw_unpaired_positive(rng_seed, bank.size());
  return softmax_contrast(q, bank.features, positive, tau_c);
}

LossValue reid_loss(const Vector& q, std::size_t positive, const MemoryBanks& banks, double tau_c,
                    double lambda_reid, std::uint64_t rng_seed) {
  if (!(lambda_reid >= 0.0 && lambda_reid <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "lambda_reid must lie in [0, 1], got " + std::to_string(lambda_reid));
  }
  LossValue out = paired_loss(q, positive, banks.paired, tau_c);
  out.value *= lambda_reid;
  out.grad_q *= lambda_reid;
  if (banks.unpaired.size() > 0) {
    const LossValue lu = unpaired_loss(q, banks.unpaired, tau_c, rng_seed);
    out.value += (1.0 - lambda_reid) * lu.value;
    out.grad_q += (1.0 - lambda_reid) * lu.grad_q;
  }
  return out;
}

PairedBank update_paired_bank(PairedBank bank, std::span<const PairedUpdate> batch, double momentum,
                              bool renormalize) {
  check_momentum(momentum);
  const auto d = static_cast<Eigen::Index>(bank.dim());
  // Per-cluster means come first so the application order is irrelevant.
  std::map<std::size_t, std::pair<Vector, std::size_t>> sums;
  for (const auto& entry : batch) {
    if (entry.cluster >= bank.size()) {
      throw Error(ErrorKind::UnknownCluster, "paired cluster " + std::to_string(entry.cluster) + " does not exist");
    }
    if (entry.feature.size() != d) throw Error(ErrorKind::InvalidArgument, "feature dimension mismatch");
    auto it = bank.cluster_of.find(entry.instance);
    if (it == bank.cluster_of.end() || it->second != entry.cluster) {
      throw Error(ErrorKind::UnknownCluster, "instance " + std::to_string(entry.instance) +
                                                 " is not a member of paired cluster " +
                                                 std::to_string(entry.cluster));
    }
    auto [slot, fresh] = sums.try_emplace(entry.cluster, Vector::Zero(d), 0);
    slot->second.first += entry.feature;
    slot->second.second += 1;
  }
  for (const auto& [cluster, acc] : sums) {
    const Vector mean = acc.first / static_cast<double>(acc.second);
    const auto row = static_cast<Eigen::Index>(cluster);
    bank.centroids.row(row) = blend(bank.centroids.row(row).transpose(), mean, momentum, renormalize);
  }
  for (const auto& entry : batch) {
    const auto& ids = bank.store_ids[entry.cluster];
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (ids[k] == entry.instance) bank.store[entry.cluster].row(static_cast<Eigen::Index>(k)) = entry.feature;
    }
  }
  return bank;
}

UnpairedBank update_unpaired_bank(UnpairedBank bank, std::span<const UnpairedUpdate> updates,
                                  double momentum, bool renormalize) {
  check_momentum(momentum);
  const auto d = bank.features.cols();
  std::map<std::size_t, std::pair<Vector, std::size_t>> sums;
  for (const auto& u : updates) {
    if (u.index >= bank.size()) {
      throw Error(ErrorKind::UnknownCluster, "unpaired cluster " + std::to_string(u.index) + " does not exist");
    }
    if (u.feature.size() != d) throw Error(ErrorKind::InvalidArgument, "feature dimension mismatch");
    auto [slot, fresh] = sums.try_emplace(u.index, Vector::Zero(d), 0);
    slot->second.first += u.feature;
    slot->second.second += 1;
  }
  for (const auto& [index, acc] : sums) {
    const auto row = static_cast<Eigen::Index>(index);
    const Vector fresh = acc.first / static_cast<double>(acc.second);
    bank.features.row(row) = blend(bank.features.row(row).transpose(), fresh, momentum, renormalize);
  }
  return bank;
}

}  // namespace cgua
