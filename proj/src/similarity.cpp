#include "cgua/similarity.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "cgua/parallel.hpp"

namespace cgua {
namespace {

void check_lambda(double lambda_sim) {
  if (!(lambda_sim >= 0.0)) {
    throw Error(ErrorKind::NegativeLambda, "lambda_sim must be >= 0, got " + std::to_string(lambda_sim));
  }
}

void check_nonempty_scenes(const SceneCatalog& catalog) {
  for (std::size_t s = 0; s < catalog.num_scenes(); ++s) {
    if (catalog.members[s].empty()) {
      throw Error(ErrorKind::EmptyScene, "scene " + std::to_string(s) + " has no instances");
    }
  }
}

// One row of the first-neighbor search. `score(j)` yields Q'(i, j).
template <typename Score>
std::size_t argmax_row(std::size_t i, std::size_t n, const SceneCatalog& catalog, NeighborMode mode,
                       Score&& score) {
  std::size_t best = kNoNeighbor;
  double best_value = -std::numeric_limits<double>::infinity();
  const std::size_t scene = catalog.image_of[i];
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    if (mode == NeighborMode::Masked && catalog.image_of[j] == scene) continue;
    const double v = score(j);
    if (best == kNoNeighbor || v > best_value) {
      best = j;
      best_value = v;
    }
  }
  return best;
}

}  // namespace

NeighborMode parse_neighbor_mode(std::string_view text) {
  if (text == "faithful") return NeighborMode::Faithful;
  if (text == "masked") return NeighborMode::Masked;
  throw Error(ErrorKind::InvalidArgument, "unknown neighbor mode '" + std::string(text) + "'");
}

std::string_view to_string(NeighborMode mode) {
  return mode == NeighborMode::Faithful ? "faithful" : "masked";
}

Matrix visual_similarity(const EmbeddingMatrix& emb) {
  const std::size_t n = emb.n();
  const Matrix& x = emb.data();
  Matrix q(n, n);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j < n; ++j) q(i, j) = x.row(i).dot(x.row(j));
    }
  });
  return q;
}

Matrix context_similarity(const Matrix& visual, const SceneCatalog& catalog) {
  check_nonempty_scenes(catalog);
  const std::size_t m = catalog.num_scenes();
  Matrix k(m, m);
  parallel_for(m, [&](std::size_t begin, std::size_t end) {
    for (std::size_t a = begin; a < end; ++a) {
      for (std::size_t b = 0; b < m; ++b) {
        double best = -std::numeric_limits<double>::infinity();
        for (auto i : catalog.members[a]) {
          for (auto j : catalog.members[b]) best = std::max(best, visual(i, j));
        }
        k(a, b) = best;
      }
    }
  });
  return k;
}

Matrix hybrid_similarity(const Matrix& visual, const Matrix& context, const SceneCatalog& catalog,
                         double lambda_sim) {
  check_lambda(lambda_sim);
  const std::size_t n = catalog.num_instances();
  if (static_cast<std::size_t>(visual.rows()) != n || static_cast<std::size_t>(visual.cols()) != n ||
      static_cast<std::size_t>(context.rows()) != catalog.num_scenes() ||
      static_cast<std::size_t>(context.cols()) != catalog.num_scenes()) {
    throw Error(ErrorKind::InvalidArgument, "similarity shapes do not match the catalog");
  }
  Matrix h(n, n);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t a = catalog.image_of[i];
      for (std::size_t j = 0; j < n; ++j) h(i, j) = visual(i, j) + lambda_sim * context(a, catalog.image_of[j]);
    }
  });
  return h;
}

SimilarityMatrices compute_similarities(const EmbeddingMatrix& emb, const SceneCatalog& catalog,
                                        double lambda_sim) {
  SimilarityMatrices out;
  out.lambda_sim = lambda_sim;
  out.visual = visual_similarity(emb);
  out.context = context_similarity(out.visual, catalog);
  out.hybrid = hybrid_similarity(out.visual, out.context, catalog, lambda_sim);
  return out;
}

std::vector<std::size_t> first_neighbors(const Matrix& hybrid, const SceneCatalog& catalog,
                                         NeighborMode mode) {
  const std::size_t n = catalog.num_instances();
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "first neighbors need at least two instances");
  std::vector<std::size_t> kappa(n, kNoNeighbor);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      kappa[i] = argmax_row(i, n, catalog, mode, [&](std::size_t j) { return hybrid(i, j); });
    }
  });
  return kappa;
}

Matrix context_similarity_blocked(const EmbeddingMatrix& emb, const SceneCatalog& catalog,
                                  std::size_t block_rows) {
  check_nonempty_scenes(catalog);
  const std::size_t n = emb.n();
  const std::size_t m = catalog.num_scenes();
  const Matrix& x = emb.data();
  block_rows = std::max<std::size_t>(block_rows, 1);

  // Each scene row of K depends only on that scene's members, so scenes are
  // the unit of work; rows of Q are produced one block at a time.
  Matrix k = Matrix::Constant(m, m, -std::numeric_limits<double>::infinity());
  parallel_for(m, [&](std::size_t begin, std::size_t end) {
    std::vector<double> qrow(n);
    for (std::size_t a = begin; a < end; ++a) {
      const auto& members = catalog.members[a];
      for (std::size_t off = 0; off < members.size(); off += block_rows) {
        const std::size_t stop = std::min(members.size(), off + block_rows);
        for (std::size_t t = off; t < stop; ++t) {
          const std::size_t i = members[t];
          for (std::size_t j = 0; j < n; ++j) qrow[j] = x.row(i).dot(x.row(j));
          for (std::size_t j = 0; j < n; ++j) {
            double& cell = k(a, catalog.image_of[j]);
            cell = std::max(cell, qrow[j]);
          }
        }
      }
    }
  });
  return k;
}

std::vector<std::size_t> first_neighbors_blocked(const EmbeddingMatrix& emb, const Matrix& context,
                                                 const SceneCatalog& catalog, double lambda_sim,
                                                 NeighborMode mode, std::size_t block_rows) {
  check_lambda(lambda_sim);
  const std::size_t n = emb.n();
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "first neighbors need at least two instances");
  const Matrix& x = emb.data();
  block_rows = std::max<std::size_t>(block_rows, 1);
  std::vector<std::size_t> kappa(n, kNoNeighbor);
  for (std::size_t off = 0; off < n; off += block_rows) {
    const std::size_t stop = std::min(n, off + block_rows);
    parallel_for(stop - off, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = off + begin; i < off + end; ++i) {
        const std::size_t a = catalog.image_of[i];
        kappa[i] = argmax_row(i, n, catalog, mode, [&](std::size_t j) {
          return x.row(i).dot(x.row(j)) + lambda_sim * context(a, catalog.image_of[j]);
        });
      }
    });
  }
  return kappa;
}

}  // namespace cgua
