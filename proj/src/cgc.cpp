#include "cgua/cgc.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace cgua {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<unsigned char> rank_;
};

}  // namespace

LinkGraph build_adjacency(const std::vector<std::size_t>& kappa, const SceneCatalog& catalog) {
  const std::size_t n = kappa.size();
  if (catalog.num_instances() != n) {
    throw Error(ErrorKind::InvalidArgument, "kappa length does not match the catalog");
  }
  LinkGraph graph;
  graph.n = n;
  auto link = [&](std::size_t i, std::size_t j) {
    if (i == j || catalog.image_of[i] == catalog.image_of[j]) return;
    graph.edges.emplace_back(std::min(i, j), std::max(i, j));
  };

  // j = kappa_i (covers kappa_j = i from j's side).
  std::vector<std::vector<std::size_t>> pointed_by(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (kappa[i] == kNoNeighbor) continue;
    if (kappa[i] >= n) throw Error(ErrorKind::InvalidArgument, "kappa entry out of range");
    link(i, kappa[i]);
    pointed_by[kappa[i]].push_back(i);
  }
  // kappa_i = kappa_j: every pair sharing a first neighbor.
  for (const auto& group : pointed_by) {
    for (std::size_t a = 0; a < group.size(); ++a) {
      for (std::size_t b = a + 1; b < group.size(); ++b) link(group[a], group[b]);
    }
  }
  std::sort(graph.edges.begin(), graph.edges.end());
  graph.edges.erase(std::unique(graph.edges.begin(), graph.edges.end()), graph.edges.end());
  return graph;
}

ClusterAssignment partition(const LinkGraph& graph) {
  DisjointSets sets(graph.n);
  for (const auto& [i, j] : graph.edges) sets.unite(i, j);
  std::vector<std::size_t> roots(graph.n);
  for (std::size_t i = 0; i < graph.n; ++i) roots[i] = sets.find(i);
  return ClusterAssignment::canonical(roots);
}

ClusterAssignment filter_clusters(const ClusterAssignment& assignment, const EmbeddingMatrix& emb,
                                  const SceneCatalog& catalog) {
  std::vector<std::size_t> labels = assignment.label_of();
  std::size_t next_label = assignment.num_clusters();

  for (const auto& members : assignment.clusters()) {
    std::map<std::size_t, std::vector<std::size_t>> by_scene;
    for (auto i : members) by_scene[catalog.image_of[i]].push_back(i);
    if (by_scene.size() == members.size()) continue;

    Vector center = Vector::Zero(static_cast<Eigen::Index>(emb.d()));
    for (auto i : members) center += emb.row(i).transpose();
    center /= static_cast<double>(members.size());
    // A mean that cancels to zero leaves every score at 0; ties then keep the
    // smallest index.
    if (center.norm() > kZeroNormEps) center.normalize();

    for (const auto& [scene, group] : by_scene) {
      if (group.size() < 2) continue;
      std::size_t keep = group.front();
      double best = emb.row(keep).dot(center);
      for (auto i : group) {
        const double s = emb.row(i).dot(center);
        if (s > best) {
          best = s;
          keep = i;
        }
      }
      for (auto i : group) {
        if (i != keep) labels[i] = next_label++;
      }
    }
  }
  return ClusterAssignment::canonical(labels);
}

ClusterAssignment cgc_cluster(const EmbeddingMatrix& emb, const SceneCatalog& catalog,
                              const CgcOptions& options) {
  validate_catalog(catalog, emb.n());
  if (emb.n() == 1) return ClusterAssignment(std::vector<std::size_t>{0});

  std::vector<std::size_t> kappa;
  if (options.force_blocked || emb.n() > kDenseInstanceLimit) {
    const Matrix context = context_similarity_blocked(emb, catalog, options.block_rows);
    kappa = first_neighbors_blocked(emb, context, catalog, options.lambda_sim, options.mode,
                                    options.block_rows);
  } else {
    const SimilarityMatrices sims = compute_similarities(emb, catalog, options.lambda_sim);
    kappa = first_neighbors(sims.hybrid, catalog, options.mode);
  }
  ClusterAssignment clusters = partition(build_adjacency(kappa, catalog));
  if (!options.filter) return clusters;
  return filter_clusters(clusters, emb, catalog);
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_paired_unpaired(
    const ClusterAssignment& assignment) {
  return {assignment.paired_ids(), assignment.unpaired_ids()};
}

}  // namespace cgua
