#include "cgua/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cgua {

Vector l2_normalize(const Vector& v) {
  const double norm = v.norm();
  if (!(norm > kZeroNormEps)) {
    throw Error(ErrorKind::ZeroVector, "cannot normalize a vector with norm " + std::to_string(norm));
  }
  return v / norm;
}

void normalize_rows(Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double norm = m.row(i).norm();
    if (!(norm > kZeroNormEps)) {
      throw Error(ErrorKind::ZeroVector, "row " + std::to_string(i) + " has zero norm");
    }
    m.row(i) /= norm;
  }
}

EmbeddingMatrix::EmbeddingMatrix(Matrix rows) : data_(std::move(rows)) {
  if (data_.rows() < 1) throw Error(ErrorKind::InvalidEmbedding, "need at least one row");
  if (data_.cols() < 2) throw Error(ErrorKind::InvalidEmbedding, "feature dimension must be >= 2");
  for (Eigen::Index i = 0; i < data_.rows(); ++i) {
    const double norm = data_.row(i).norm();
    if (!std::isfinite(norm) || std::abs(norm - 1.0) > kUnitNormTol) {
      throw Error(ErrorKind::InvalidEmbedding,
                  "row " + std::to_string(i) + " has norm " + std::to_string(norm) + ", expected 1");
    }
  }
}

EmbeddingMatrix EmbeddingMatrix::from_raw(Matrix rows) {
  normalize_rows(rows);
  return EmbeddingMatrix(std::move(rows));
}

SceneCatalog SceneCatalog::from_image_of(std::vector<std::size_t> image_of,
                                         std::optional<std::size_t> num_scenes) {
  std::size_t m = 0;
  for (auto s : image_of) m = std::max(m, s + 1);
  if (num_scenes) {
    if (*num_scenes < m) {
      throw Error(ErrorKind::InconsistentCatalog, "scene index exceeds declared scene count");
    }
    m = *num_scenes;
  }
  SceneCatalog cat;
  cat.members.resize(m);
  for (std::size_t j = 0; j < image_of.size(); ++j) cat.members[image_of[j]].push_back(j);
  cat.image_of = std::move(image_of);
  return cat;
}

void validate_catalog(const SceneCatalog& catalog, std::size_t n) {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InconsistentCatalog, what); };

  if (catalog.image_of.size() != n) {
    fail("image_of has " + std::to_string(catalog.image_of.size()) + " entries, expected " +
         std::to_string(n));
  }
  const std::size_t m = catalog.members.size();
  for (std::size_t j = 0; j < n; ++j) {
    if (catalog.image_of[j] >= m) {
      fail("instance " + std::to_string(j) + " points to scene " +
           std::to_string(catalog.image_of[j]) + " but only " + std::to_string(m) + " scenes exist");
    }
  }
  std::vector<char> seen(n, 0);
  std::size_t total = 0;
  for (std::size_t s = 0; s < m; ++s) {
    for (auto j : catalog.members[s]) {
      if (j >= n) fail("scene " + std::to_string(s) + " lists out-of-range instance " + std::to_string(j));
      if (seen[j]) fail("instance " + std::to_string(j) + " is listed in more than one scene");
      seen[j] = 1;
      if (catalog.image_of[j] != s) {
        fail("scene " + std::to_string(s) + " lists instance " + std::to_string(j) +
             " whose image_of is " + std::to_string(catalog.image_of[j]));
      }
      ++total;
    }
  }
  if (total != n) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!seen[j]) fail("instance " + std::to_string(j) + " is not listed in any scene");
    }
  }
  if (catalog.boxes) {
    if (catalog.boxes->size() != n) fail("boxes has wrong length");
    for (std::size_t j = 0; j < n; ++j) {
      const Box& b = (*catalog.boxes)[j];
      if (!(b.x1 < b.x2) || !(b.y1 < b.y2)) fail("box of instance " + std::to_string(j) + " is degenerate");
    }
  }
}

ClusterAssignment::ClusterAssignment(std::vector<std::size_t> label_of) : label_of_(std::move(label_of)) {
  std::size_t nc = 0;
  for (auto c : label_of_) nc = std::max(nc, c + 1);
  clusters_.resize(nc);
  for (std::size_t i = 0; i < label_of_.size(); ++i) clusters_[label_of_[i]].push_back(i);
  for (std::size_t c = 0; c < nc; ++c) {
    if (clusters_[c].empty()) {
      throw Error(ErrorKind::InvalidArgument, "cluster id " + std::to_string(c) + " has no members");
    }
    (clusters_[c].size() >= 2 ? paired_ids_ : unpaired_ids_).push_back(c);
  }
}

ClusterAssignment ClusterAssignment::canonical(const std::vector<std::size_t>& label_of) {
  constexpr auto kUnset = std::numeric_limits<std::size_t>::max();
  std::size_t max_label = 0;
  for (auto c : label_of) max_label = std::max(max_label, c);
  std::vector<std::size_t> remap(label_of.empty() ? 0 : max_label + 1, kUnset);
  std::vector<std::size_t> out(label_of.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < label_of.size(); ++i) {
    auto& r = remap[label_of[i]];
    if (r == kUnset) r = next++;
    out[i] = r;
  }
  return ClusterAssignment(std::move(out));
}

bool satisfies_scene_uniqueness(const ClusterAssignment& assignment, const SceneCatalog& catalog) {
  std::vector<std::size_t> scenes;
  for (const auto& members : assignment.clusters()) {
    scenes.clear();
    for (auto i : members) scenes.push_back(catalog.image_of[i]);
    std::sort(scenes.begin(), scenes.end());
    if (std::adjacent_find(scenes.begin(), scenes.end()) != scenes.end()) return false;
  }
  return true;
}

}  // namespace cgua
