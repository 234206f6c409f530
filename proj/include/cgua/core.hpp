#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "cgua/error.hpp"

namespace cgua {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline constexpr double kZeroNormEps = 1e-12;
inline constexpr double kUnitNormTol = 1e-6;

/// Returns v / ||v||. Throws ZeroVector when ||v|| <= 1e-12.
Vector l2_normalize(const Vector& v);

/// Normalizes each row of m in place; throws ZeroVector naming the row.
void normalize_rows(Matrix& m);

/// N unit-norm feature rows (N >= 1, d >= 2). Immutable after construction.
class EmbeddingMatrix {
 public:
  /// Validates that every row already has unit norm within 1e-6.
  explicit EmbeddingMatrix(Matrix rows);

  /// Normalizes the rows first, then validates.
  static EmbeddingMatrix from_raw(Matrix rows);

  std::size_t n() const { return static_cast<std::size_t>(data_.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(data_.cols()); }
  const Matrix& data() const { return data_; }
  auto row(std::size_t i) const { return data_.row(static_cast<Eigen::Index>(i)); }

 private:
  Matrix data_;
};

struct Box {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  bool operator==(const Box&) const = default;
};

/// Weak labels: which scene each instance came from.
struct SceneCatalog {
  std::vector<std::size_t> image_of;             // instance -> scene
  std::vector<std::vector<std::size_t>> members;  // scene -> instances, V(i)
  std::optional<std::vector<Box>> boxes;          // instance -> box

  std::size_t num_instances() const { return image_of.size(); }
  std::size_t num_scenes() const { return members.size(); }

  /// Builds members from image_of (members sorted ascending). num_scenes
  /// defaults to max(image_of) + 1.
  static SceneCatalog from_image_of(std::vector<std::size_t> image_of,
                                    std::optional<std::size_t> num_scenes = std::nullopt);
};

/// Throws InconsistentCatalog naming the first violated constraint.
void validate_catalog(const SceneCatalog& catalog, std::size_t n);

/// Pseudo labels: a partition of [0, N) into clusters.
class ClusterAssignment {
 public:
  ClusterAssignment() = default;

  /// Cluster ids must be dense in [0, N_c); every id needs at least one member.
  explicit ClusterAssignment(std::vector<std::size_t> label_of);

  /// Relabels so that cluster ids follow the order of each cluster's smallest member.
  static ClusterAssignment canonical(const std::vector<std::size_t>& label_of);

  std::size_t num_instances() const { return label_of_.size(); }
  std::size_t num_clusters() const { return clusters_.size(); }
  const std::vector<std::size_t>& label_of() const { return label_of_; }
  const std::vector<std::vector<std::size_t>>& clusters() const { return clusters_; }
  const std::vector<std::size_t>& paired_ids() const { return paired_ids_; }
  const std::vector<std::size_t>& unpaired_ids() const { return unpaired_ids_; }

 private:
  std::vector<std::size_t> label_of_;
  std::vector<std::vector<std::size_t>> clusters_;
  std::vector<std::size_t> paired_ids_;
  std::vector<std::size_t> unpaired_ids_;
};

/// True when no cluster holds two instances of the same scene.
bool satisfies_scene_uniqueness(const ClusterAssignment& assignment, const SceneCatalog& catalog);

}  // namespace cgua
