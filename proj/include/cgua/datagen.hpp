#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "cgua/core.hpp"

namespace cgua {

struct WorldConfig {
  std::size_t n_identities = 20;          // identities seen more than once
  std::size_t sightings_per_identity = 2;
  std::size_t n_unpaired = 10;            // persons seen exactly once
  std::size_t d_raw = 32;
  double noise_sigma = 0.1;               // per-coordinate sighting noise
  double cotravel_prob = 0.0;             // chance a pair of identities always travels together
  std::size_t min_persons_per_scene = 1;
  std::size_t max_persons_per_scene = 4;
  std::uint64_t seed = 0;
  // Scene-level nuisance: every person in a scene shares one random offset of
  // this std, confined to the last nuisance_dims coordinates. Identity
  // prototypes then live in the remaining coordinates.
  std::size_t nuisance_dims = 0;
  double scene_bias_sigma = 0.0;
};

/// Throws InvalidArgument on the first out-of-range field.
void validate(const WorldConfig& cfg);

struct World {
  Matrix raw_features;                     // N x d_raw, unit rows
  SceneCatalog catalog;                    // with boxes
  std::vector<std::size_t> true_identity;  // unpaired persons get unique labels
  std::vector<std::optional<std::size_t>> companion;  // per paired identity
};

/// Deterministic synthetic world. Scenes are filled toward a size drawn from
/// [min, max]; the last scenes may come out smaller when nothing else fits.
/// Throws InfeasiblePacking when a co-traveling pair cannot share a scene.
World generate(const WorldConfig& cfg);

/// Fraction of identity pairs that were made co-travelers.
double cotravel_rate(const World& world, const WorldConfig& cfg);

}  // namespace cgua
