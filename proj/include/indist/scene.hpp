#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "indist/rng.hpp"
#include "indist/search.hpp"

namespace indist {

// Camera: position on a spherical shell of radius in [0.5, 8], look-at inside
// the K = 0.3 box spanned from the origin toward the camera position, up
// vector in [-1, 1]^3, field of view in [35, 100] degrees.
struct CameraParams {
  Eigen::Vector3d position;
  Eigen::Vector3d look_at;
  Eigen::Vector3d up;
  double fov = 0.0;
};

struct LightParams {
  Eigen::Vector3d position;  // radius in [1, 8]
  Eigen::Vector3d look_at;   // same K box as the camera look-at
  Eigen::Vector2d size;      // each component in [0.1, 5]
  Eigen::Vector3d intensity; // rgb in [0, 1]
};

constexpr int kCameraDims = 10;
constexpr int kLightDims = 11;
constexpr double kLookAtScale = 0.3;

struct SceneVector {
  CameraParams camera;
  std::vector<LightParams> lights;  // 1 to 4

  int dim() const { return kCameraDims + kLightDims * static_cast<int>(lights.size()); }

  // Fixed component ordering: camera position xyz, look_at xyz, up xyz, fov;
  // then per light: position xyz, look_at xyz, size hw, intensity rgb.
  Eigen::VectorXd flat() const;
  static SceneVector from_flat(const Eigen::VectorXd& flat, int n_lights);
};

SceneVector sample_scene(Rng& rng);
SceneVector sample_scene(Rng& rng, int n_lights);

bool scene_membership(const SceneVector& scene);
bool scene_membership(const Eigen::VectorXd& flat, int n_lights);

// Per-coordinate (lo, hi) used for sigma0 scaling and range-normalized
// distances. Position components span the shell diameter; look-at components
// span the widest K box.
std::vector<std::pair<double, double>> scene_ranges(int n_lights);

// Search space over one parameter block of a scene, every other coordinate
// frozen. block = 0 selects the camera, block = i >= 1 selects light i-1.
SearchSpace scene_search_space(int n_lights, int block);

}  // namespace indist
