#pragma once

#include <cstddef>
#include <limits>
#include <string_view>
#include <vector>

#include "cgua/core.hpp"

namespace cgua {

/// How the first neighbor treats candidates from the query's own scene.
enum class NeighborMode {
  Faithful,  // argmax over every j != i; same-scene links are dropped later
  Masked,    // same-scene candidates are excluded before the argmax
};

NeighborMode parse_neighbor_mode(std::string_view text);
std::string_view to_string(NeighborMode mode);

/// First-neighbor sentinel for an instance with no admissible candidate.
inline constexpr std::size_t kNoNeighbor = std::numeric_limits<std::size_t>::max();

/// Above this many instances the N x N matrices are never materialized.
inline constexpr std::size_t kDenseInstanceLimit = 20000;

struct SimilarityMatrices {
  Matrix visual;   // N x N cosine similarity
  Matrix context;  // M x M max-matching scene similarity
  Matrix hybrid;   // N x N visual + lambda_sim * context
  double lambda_sim = 0.0;
};

/// Q(i, j) = <e_i, e_j>.
Matrix visual_similarity(const EmbeddingMatrix& emb);

/// K(a, b) = max over m in V(a), n in V(b) of Q(m, n), self pairs included.
Matrix context_similarity(const Matrix& visual, const SceneCatalog& catalog);

/// Q'(i, j) = Q(i, j) + lambda_sim * K(Image(i), Image(j)).
Matrix hybrid_similarity(const Matrix& visual, const Matrix& context, const SceneCatalog& catalog,
                         double lambda_sim);

SimilarityMatrices compute_similarities(const EmbeddingMatrix& emb, const SceneCatalog& catalog,
                                        double lambda_sim);

/// kappa_i = argmax_{j != i} Q'(i, j), ties to the smallest index. In masked
/// mode candidates sharing i's scene are skipped and kappa_i may be kNoNeighbor.
std::vector<std::size_t> first_neighbors(const Matrix& hybrid, const SceneCatalog& catalog,
                                         NeighborMode mode);

/// Same results as the dense path, computed block_rows rows at a time
/// without holding any N x N matrix.
Matrix context_similarity_blocked(const EmbeddingMatrix& emb, const SceneCatalog& catalog,
                                  std::size_t block_rows);
std::vector<std::size_t> first_neighbors_blocked(const EmbeddingMatrix& emb, const Matrix& context,
                                                 const SceneCatalog& catalog, double lambda_sim,
                                                 NeighborMode mode, std::size_t block_rows);

}  // namespace cgua
