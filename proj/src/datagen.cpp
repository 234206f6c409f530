#include "cgua/datagen.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

namespace cgua {
namespace {

struct Sighting {
  std::size_t identity;
};

// Persons that must land in the same scene (a co-traveling pair, or one person).
using Group = std::vector<Sighting>;

constexpr double kTileWidth = 64.0;
constexpr double kTileGap = 8.0;
constexpr double kTileHeight = 160.0;

Vector random_direction(std::size_t d, std::size_t active, std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v = Vector::Zero(static_cast<Eigen::Index>(d));
  do {
    for (std::size_t k = 0; k < active; ++k) v(static_cast<Eigen::Index>(k)) = normal(gen);
  } while (!(v.norm() > kZeroNormEps));
  return v.normalized();
}

}  // namespace

void validate(const WorldConfig& cfg) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorKind::InvalidArgument, what);
  };
  require(cfg.d_raw >= 2, "d_raw must be >= 2");
  require(cfg.noise_sigma >= 0.0, "noise_sigma must be >= 0");
  require(cfg.cotravel_prob >= 0.0 && cfg.cotravel_prob <= 1.0, "cotravel_prob must lie in [0, 1]");
  require(cfg.scene_bias_sigma >= 0.0, "scene_bias_sigma must be >= 0");
  require(cfg.nuisance_dims + 2 <= cfg.d_raw || cfg.nuisance_dims == 0, "nuisance_dims must leave >= 2 identity dims");
  require(cfg.n_identities == 0 || cfg.sightings_per_identity >= 1, "sightings_per_identity must be >= 1");
  require(cfg.n_identities * cfg.sightings_per_identity + cfg.n_unpaired >= 1, "world would be empty");
}

World generate(const WorldConfig& cfg) {
  validate(cfg);
  if (cfg.max_persons_per_scene < 1 || cfg.min_persons_per_scene > cfg.max_persons_per_scene) {
    throw Error(ErrorKind::InfeasiblePacking, "persons_per_scene range is empty");
  }
  std::mt19937_64 gen(cfg.seed);
  const std::size_t n_people = cfg.n_identities + cfg.n_unpaired;
  const std::size_t identity_dims = cfg.d_raw - cfg.nuisance_dims;

  std::vector<Vector> prototypes;
  prototypes.reserve(n_people);
  for (std::size_t p = 0; p < n_people; ++p) prototypes.push_back(random_direction(cfg.d_raw, identity_dims, gen));

  // Co-travelers: identities are paired up in random order and each pair
  // travels together with probability cotravel_prob.
  World world;
  world.companion.assign(cfg.n_identities, std::nullopt);
  {
    std::vector<std::size_t> order(cfg.n_identities);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), gen);
    std::bernoulli_distribution travels(cfg.cotravel_prob);
    for (std::size_t k = 0; k + 1 < order.size(); k += 2) {
      if (travels(gen)) {
        world.companion[order[k]] = order[k + 1];
        world.companion[order[k + 1]] = order[k];
      }
    }
  }

  std::vector<Group> groups;
  for (std::size_t id = 0; id < cfg.n_identities; ++id) {
    const auto& mate = world.companion[id];
    if (mate && *mate < id) continue;
    for (std::size_t s = 0; s < cfg.sightings_per_identity; ++s) {
      Group g{{id}};
      if (mate) g.push_back({*mate});
      groups.push_back(std::move(g));
    }
  }
  for (std::size_t u = 0; u < cfg.n_unpaired; ++u) groups.push_back({{cfg.n_identities + u}});
  const bool has_pairs = std::any_of(groups.begin(), groups.end(), [](const Group& g) { return g.size() > 1; });
  if (has_pairs && cfg.max_persons_per_scene < 2) {
    throw Error(ErrorKind::InfeasiblePacking, "co-traveling pairs need scenes of at least 2 persons");
  }
  std::shuffle(groups.begin(), groups.end(), gen);

  // Greedy packing: a scene takes pending groups in order while they fit its
  // target size and bring no identity already present.
  std::vector<std::vector<std::size_t>> scenes;  // identities per scene
  std::vector<char> placed(groups.size(), 0);
  std::size_t remaining = groups.size();
  std::uniform_int_distribution<std::size_t> scene_size(cfg.min_persons_per_scene, cfg.max_persons_per_scene);
  std::size_t cursor = 0;
  while (remaining > 0) {
    while (placed[cursor]) ++cursor;
    const std::size_t target = std::max(scene_size(gen), groups[cursor].size());
    std::vector<std::size_t> scene;
    for (std::size_t g = cursor; g < groups.size() && scene.size() < target; ++g) {
      if (placed[g] || scene.size() + groups[g].size() > target) continue;
      const bool clash = std::any_of(groups[g].begin(), groups[g].end(), [&](const Sighting& s) {
        return std::find(scene.begin(), scene.end(), s.identity) != scene.end();
      });
      if (clash) continue;
      for (const auto& s : groups[g]) scene.push_back(s.identity);
      placed[g] = 1;
      --remaining;
    }
    scenes.push_back(std::move(scene));
  }

  std::normal_distribution<double> noise(0.0, 1.0);
  std::size_t n = 0;
  for (const auto& s : scenes) n += s.size();
  world.raw_features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cfg.d_raw));
  std::vector<std::size_t> image_of;
  std::vector<Box> boxes;
  image_of.reserve(n);
  boxes.reserve(n);
  std::size_t row = 0;
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    Vector bias = Vector::Zero(static_cast<Eigen::Index>(cfg.d_raw));
    for (std::size_t k = identity_dims; k < cfg.d_raw; ++k) bias(static_cast<Eigen::Index>(k)) = cfg.scene_bias_sigma * noise(gen);
    for (std::size_t slot = 0; slot < scenes[s].size(); ++slot) {
      const std::size_t id = scenes[s][slot];
      Vector x = prototypes[id] + bias;
      for (Eigen::Index k = 0; k < x.size(); ++k) x(k) += cfg.noise_sigma * noise(gen);
      world.raw_features.row(static_cast<Eigen::Index>(row)) = l2_normalize(x);
      world.true_identity.push_back(id);
      image_of.push_back(s);
      const double x1 = kTileGap + static_cast<double>(slot) * (kTileWidth + kTileGap);
      boxes.push_back({x1, kTileGap, x1 + kTileWidth, kTileGap + kTileHeight});
      ++row;
    }
  }
  world.catalog = SceneCatalog::from_image_of(std::move(image_of), scenes.size());
  world.catalog.boxes = std::move(boxes);
  return world;
}

double cotravel_rate(const World& world, const WorldConfig& cfg) {
  const std::size_t pairs = cfg.n_identities / 2;
  if (pairs == 0) return 0.0;
  std::size_t travelling = 0;
  for (const auto& c : world.companion) travelling += c ? 1 : 0;
  return static_cast<double>(travelling / 2) / static_cast<double>(pairs);
}

}  // namespace cgua
