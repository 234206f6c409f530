#include "cgua/eval.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <string>

namespace cgua {
namespace {

void check_box(const Box& b) {
  if (!(b.x2 > b.x1) || !(b.y2 > b.y1)) {
    throw Error(ErrorKind::DegenerateBox, "box has a non-positive side");
  }
}

double pairs_of(std::size_t count) {
  const auto c = static_cast<double>(count);
  return c * (c - 1.0) / 2.0;
}

}  // namespace

double iou(const Box& a, const Box& b) {
  check_box(a);
  check_box(b);
  const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  const double inter = w * h;
  const double area_a = (a.x2 - a.x1) * (a.y2 - a.y1);
  const double area_b = (b.x2 - b.x1) * (b.y2 - b.y1);
  return inter / (area_a + area_b - inter);
}

RetrievalResult retrieve(const Vector& q, const EmbeddingMatrix& gallery, std::span<const std::size_t> gallery_ids,
                         std::size_t query_id) {
  const std::size_t n = gallery.n();
  if (!gallery_ids.empty() && gallery_ids.size() != n) {
    throw Error(ErrorKind::InvalidArgument, "gallery id list does not match gallery size");
  }
  auto id_of = [&](std::size_t row) { return gallery_ids.empty() ? row : gallery_ids[row]; };

  std::vector<double> score(n);
  for (std::size_t r = 0; r < n; ++r) score[r] = gallery.row(r).dot(q);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return id_of(a) < id_of(b);
  });

  RetrievalResult out;
  out.query = query_id;
  out.ranked.reserve(n);
  out.scores.reserve(n);
  for (auto r : order) {
    out.ranked.push_back(id_of(r));
    out.scores.push_back(score[r]);
  }
  return out;
}

std::vector<char> relevance_flags(const RetrievalResult& result, const QueryRelevance& truth,
                                  const GalleryBoxes& gallery_boxes) {
  const std::set<std::size_t> relevant(truth.relevant.begin(), truth.relevant.end());
  std::vector<char> flags(result.ranked.size(), 0);
  for (std::size_t k = 0; k < result.ranked.size(); ++k) {
    const std::size_t id = result.ranked[k];
    if (!relevant.contains(id)) continue;
    if (truth.gt_box) {
      auto it = gallery_boxes.find(id);
      if (it != gallery_boxes.end() && iou(it->second, *truth.gt_box) < kIouMatchThreshold) continue;
    }
    flags[k] = 1;
  }
  return flags;
}

double average_precision(std::span<const char> flags) {
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < flags.size(); ++k) {
    if (!flags[k]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(k + 1);
  }
  if (hits == 0) throw Error(ErrorKind::NoRelevant, "query has no relevant gallery item");
  return sum / static_cast<double>(hits);
}

std::map<std::size_t, double> cmc_topk(const std::vector<std::vector<char>>& flags,
                                       std::span<const std::size_t> ks) {
  if (ks.empty()) throw Error(ErrorKind::InvalidArgument, "cmc needs at least one k");
  std::map<std::size_t, double> out;
  std::size_t counted = 0;
  std::vector<std::size_t> first_hit;
  for (const auto& row : flags) {
    auto it = std::find(row.begin(), row.end(), char{1});
    if (it == row.end()) continue;
    ++counted;
    first_hit.push_back(static_cast<std::size_t>(it - row.begin()));
  }
  for (auto k : ks) {
    if (k == 0) throw Error(ErrorKind::InvalidArgument, "cmc rank k must be >= 1");
    std::size_t hits = 0;
    for (auto r : first_hit) hits += (r < k) ? 1 : 0;
    out[k] = counted == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(counted);
  }
  return out;
}

MetricsReport score_flags(const std::vector<std::vector<char>>& flags, std::span<const std::size_t> query_ids,
                          std::span<const std::size_t> ks) {
  MetricsReport report;
  double sum = 0.0;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (std::find(flags[i].begin(), flags[i].end(), char{1}) == flags[i].end()) {
      ++report.excluded_queries;
      continue;
    }
    const double ap = average_precision(flags[i]);
    report.per_query_ap.push_back(ap);
    report.query_ids.push_back(query_ids.empty() ? i : query_ids[i]);
    sum += ap;
  }
  report.mAP = report.per_query_ap.empty() ? 0.0 : sum / static_cast<double>(report.per_query_ap.size());
  report.cmc = cmc_topk(flags, ks);
  return report;
}

MetricsReport evaluate_retrieval(const EmbeddingMatrix& queries, const std::vector<QueryRelevance>& truth,
                                 const RetrievalSet& gallery, std::span<const std::size_t> ks) {
  if (truth.size() != queries.n()) throw Error(ErrorKind::InvalidArgument, "one relevance record per query is required");
  std::vector<std::vector<char>> flags;
  std::vector<std::size_t> ids;
  flags.reserve(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const RetrievalResult r = retrieve(queries.row(i).transpose(), gallery.gallery, gallery.gallery_ids, truth[i].query);
    flags.push_back(relevance_flags(r, truth[i], gallery.gallery_boxes));
    ids.push_back(truth[i].query);
  }
  return score_flags(flags, ids, ks);
}

std::map<std::size_t, MetricsReport> gallery_size_sweep(const EmbeddingMatrix& queries,
                                                        const std::vector<QueryRelevance>& truth,
                                                        const RetrievalSet& gallery,
                                                        std::span<const std::size_t> sizes,
                                                        std::span<const std::size_t> ks, std::uint64_t seed) {
  if (truth.size() != queries.n()) throw Error(ErrorKind::InvalidArgument, "one relevance record per query is required");
  const std::size_t n = gallery.gallery.n();
  auto id_of = [&](std::size_t row) { return gallery.gallery_ids.empty() ? row : gallery.gallery_ids[row]; };

  std::map<std::size_t, MetricsReport> out;
  for (auto size : sizes) {
    std::mt19937_64 gen(seed ^ (0x9E3779B97F4A7C15ULL * (size + 1)));
    std::vector<std::vector<char>> flags;
    std::vector<std::size_t> ids;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const std::set<std::size_t> relevant(truth[i].relevant.begin(), truth[i].relevant.end());
      std::vector<std::size_t> keep;
      std::vector<std::size_t> distractors;
      for (std::size_t r = 0; r < n; ++r) (relevant.contains(id_of(r)) ? keep : distractors).push_back(r);
      std::shuffle(distractors.begin(), distractors.end(), gen);
      const std::size_t extra = size > keep.size() ? std::min(size - keep.size(), distractors.size()) : 0;
      keep.insert(keep.end(), distractors.begin(), distractors.begin() + static_cast<std::ptrdiff_t>(extra));
      std::sort(keep.begin(), keep.end());

      Matrix sub(static_cast<Eigen::Index>(keep.size()), gallery.gallery.data().cols());
      std::vector<std::size_t> sub_ids;
      for (std::size_t k = 0; k < keep.size(); ++k) {
        sub.row(static_cast<Eigen::Index>(k)) = gallery.gallery.row(keep[k]);
        sub_ids.push_back(id_of(keep[k]));
      }
      if (keep.empty()) {
        flags.emplace_back();
      } else {
        const RetrievalResult r = retrieve(queries.row(i).transpose(), EmbeddingMatrix(std::move(sub)), sub_ids, truth[i].query);
        flags.push_back(relevance_flags(r, truth[i], gallery.gallery_boxes));
      }
      ids.push_back(truth[i].query);
    }
    out.emplace(size, score_flags(flags, ids, ks));
  }
  return out;
}

PairwiseScores pairwise_f1(std::span<const std::size_t> predicted, std::span<const std::size_t> truth) {
  if (predicted.size() != truth.size()) throw Error(ErrorKind::InvalidArgument, "label arrays differ in length");
  std::map<std::size_t, std::size_t> pred_sizes;
  std::map<std::size_t, std::size_t> true_sizes;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> joint;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    ++pred_sizes[predicted[i]];
    ++true_sizes[truth[i]];
    ++joint[{predicted[i], truth[i]}];
  }
  double tp = 0.0;
  double pred_pairs = 0.0;
  double true_pairs = 0.0;
  for (const auto& [key, c] : joint) tp += pairs_of(c);
  for (const auto& [key, c] : pred_sizes) pred_pairs += pairs_of(c);
  for (const auto& [key, c] : true_sizes) true_pairs += pairs_of(c);

  PairwiseScores s;
  if (pred_pairs == 0.0 && true_pairs == 0.0) return {1.0, 1.0, 1.0};
  s.precision = pred_pairs > 0.0 ? tp / pred_pairs : 0.0;
  s.recall = true_pairs > 0.0 ? tp / true_pairs : 0.0;
  s.f1 = (s.precision + s.recall) > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

}  // namespace cgua
