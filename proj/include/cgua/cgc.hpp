#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "cgua/core.hpp"
#include "cgua/similarity.hpp"

namespace cgua {

/// Undirected link graph over instances. Edges are (i, j) with i < j, sorted.
struct LinkGraph {
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
};

/// Links i and j iff (j = kappa_i or kappa_j = i or kappa_i = kappa_j) and
/// Image(i) != Image(j). kNoNeighbor entries never match anything.
LinkGraph build_adjacency(const std::vector<std::size_t>& kappa, const SceneCatalog& catalog);

/// Connected components; cluster ids follow each component's smallest member.
ClusterAssignment partition(const LinkGraph& graph);

/// Within each cluster, keeps only the member of every same-scene group that
/// is closest (cosine) to the normalized cluster mean; the rest become singletons.
ClusterAssignment filter_clusters(const ClusterAssignment& assignment, const EmbeddingMatrix& emb,
                                  const SceneCatalog& catalog);

struct CgcOptions {
  double lambda_sim = 0.1;
  NeighborMode mode = NeighborMode::Faithful;
  bool filter = true;  // intra-image filter; off only for ablations
  /// Row block used when N exceeds kDenseInstanceLimit (or when force_blocked).
  std::size_t block_rows = 1024;
  bool force_blocked = false;
};

/// Full context-guided clustering: similarities, first neighbors, links,
/// components, then the intra-image filter.
ClusterAssignment cgc_cluster(const EmbeddingMatrix& emb, const SceneCatalog& catalog,
                              const CgcOptions& options = {});

/// Cluster ids with >= 2 members and with exactly 1 member.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_paired_unpaired(
    const ClusterAssignment& assignment);

}  // namespace cgua
