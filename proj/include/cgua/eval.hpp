#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "cgua/core.hpp"

namespace cgua {

inline constexpr double kIouMatchThreshold = 0.5;

/// Intersection over union; throws DegenerateBox for non-positive sides.
double iou(const Box& a, const Box& b);

/// Gallery ids ranked by descending cosine score, ties by ascending id.
struct RetrievalResult {
  std::size_t query = 0;
  std::vector<std::size_t> ranked;
  std::vector<double> scores;
};

/// Ranks every gallery row against q. `gallery_ids` maps rows to external
/// ids; empty means the row index is the id.
RetrievalResult retrieve(const Vector& q, const EmbeddingMatrix& gallery,
                         std::span<const std::size_t> gallery_ids = {}, std::size_t query_id = 0);

/// Ground truth for one query. With a gt box, a relevant id only counts when
/// its gallery box overlaps the gt box with IoU >= 0.5.
struct QueryRelevance {
  std::size_t query = 0;
  std::vector<std::size_t> relevant;
  std::optional<Box> gt_box;
};

using GalleryBoxes = std::map<std::size_t, Box>;

std::vector<char> relevance_flags(const RetrievalResult& result, const QueryRelevance& truth,
                                  const GalleryBoxes& gallery_boxes = {});

/// (1/R) * sum over relevant ranks k of precision@k. Throws NoRelevant.
double average_precision(std::span<const char> flags);

/// Fraction of queries with a relevant item within the top k, for each k.
std::map<std::size_t, double> cmc_topk(const std::vector<std::vector<char>>& flags,
                                       std::span<const std::size_t> ks);

struct MetricsReport {
  double mAP = 0.0;
  std::map<std::size_t, double> cmc;
  std::vector<std::size_t> query_ids;  // queries that entered the averages
  std::vector<double> per_query_ap;
  std::size_t excluded_queries = 0;    // queries without any relevant gallery item
};

/// mAP and CMC over ranked relevance flags; all-false rows are excluded.
MetricsReport score_flags(const std::vector<std::vector<char>>& flags, std::span<const std::size_t> query_ids,
                          std::span<const std::size_t> ks);

struct RetrievalSet {
  EmbeddingMatrix gallery;
  std::vector<std::size_t> gallery_ids;
  GalleryBoxes gallery_boxes;
};

/// Retrieves every query (row i of `queries` has id truth[i].query) and scores it.
MetricsReport evaluate_retrieval(const EmbeddingMatrix& queries, const std::vector<QueryRelevance>& truth,
                                 const RetrievalSet& gallery, std::span<const std::size_t> ks);

/// For each size s, each query is scored against its relevant items plus
/// randomly drawn distractors so that the gallery holds s items.
std::map<std::size_t, MetricsReport> gallery_size_sweep(const EmbeddingMatrix& queries,
                                                        const std::vector<QueryRelevance>& truth,
                                                        const RetrievalSet& gallery,
                                                        std::span<const std::size_t> sizes,
                                                        std::span<const std::size_t> ks, std::uint64_t seed);

struct PairwiseScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Pair-counting precision/recall/F1 of "same cluster" against "same identity".
/// With no predicted pairs precision is 0 (1 if there are no true pairs either).
PairwiseScores pairwise_f1(std::span<const std::size_t> predicted, std::span<const std::size_t> truth);

}  // namespace cgua
