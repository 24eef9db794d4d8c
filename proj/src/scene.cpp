#include "indist/scene.hpp"

#include <cmath>
#include <stdexcept>

namespace indist {

namespace {

Eigen::Vector3d sphere_point(Rng& rng, double radius) {
  Eigen::Vector3d v;
  double norm = 0.0;
  do {
    for (int i = 0; i < 3; ++i) v[i] = rng.normal();
    norm = v.norm();
  } while (norm < 1e-12);
  return radius * v / norm;
}

// componentwise uniform on the interval between 0 and kLookAtScale * c
Eigen::Vector3d look_at_sample(Rng& rng, const Eigen::Vector3d& camera_pos) {
  Eigen::Vector3d out;
  for (int i = 0; i < 3; ++i) {
    const double edge = kLookAtScale * camera_pos[i];
    out[i] = rng.uniform(std::min(0.0, edge), std::max(0.0, edge));
  }
  return out;
}

bool in_look_at_box(const Eigen::Vector3d& look_at,
                    const Eigen::Vector3d& camera_pos) {
  for (int i = 0; i < 3; ++i) {
    const double edge = kLookAtScale * camera_pos[i];
    if (look_at[i] < std::min(0.0, edge) || look_at[i] > std::max(0.0, edge))
      return false;
  }
  return true;
}

}  // namespace

Eigen::VectorXd SceneVector::flat() const {
  Eigen::VectorXd out(dim());
  out.segment<3>(0) = camera.position;
  out.segment<3>(3) = camera.look_at;
  out.segment<3>(6) = camera.up;
  out[9] = camera.fov;
  int k = kCameraDims;
  for (const auto& light : lights) {
    out.segment<3>(k) = light.position;
    out.segment<3>(k + 3) = light.look_at;
    out.segment<2>(k + 6) = light.size;
    out.segment<3>(k + 8) = light.intensity;
    k += kLightDims;
  }
  return out;
}

SceneVector SceneVector::from_flat(const Eigen::VectorXd& flat, int n_lights) {
  if (n_lights < 1 || n_lights > 4)
    throw std::invalid_argument("scene: n_lights must be in [1, 4]");
  if (flat.size() != kCameraDims + kLightDims * n_lights)
    throw std::invalid_argument("scene: flat vector has wrong length");
  SceneVector scene;
  scene.camera.position = flat.segment<3>(0);
  scene.camera.look_at = flat.segment<3>(3);
  scene.camera.up = flat.segment<3>(6);
  scene.camera.fov = flat[9];
  int k = kCameraDims;
  for (int i = 0; i < n_lights; ++i) {
    LightParams light;
    light.position = flat.segment<3>(k);
    light.look_at = flat.segment<3>(k + 3);
    light.size = flat.segment<2>(k + 6);
    light.intensity = flat.segment<3>(k + 8);
    scene.lights.push_back(light);
    k += kLightDims;
  }
  return scene;
}

SceneVector sample_scene(Rng& rng) {
  const int n_lights = 1 + static_cast<int>(rng.next_below(4));
  return sample_scene(rng, n_lights);
}

SceneVector sample_scene(Rng& rng, int n_lights) {
  if (n_lights < 1 || n_lights > 4)
    throw std::invalid_argument("scene: n_lights must be in [1, 4]");
  SceneVector scene;
  scene.camera.position = sphere_point(rng, rng.uniform(0.5, 8.0));
  scene.camera.look_at = look_at_sample(rng, scene.camera.position);
  for (int i = 0; i < 3; ++i) scene.camera.up[i] = rng.uniform(-1.0, 1.0);
  scene.camera.fov = rng.uniform(35.0, 100.0);
  for (int i = 0; i < n_lights; ++i) {
    LightParams light;
    light.position = sphere_point(rng, rng.uniform(1.0, 8.0));
    light.look_at = look_at_sample(rng, scene.camera.position);
    for (int c = 0; c < 2; ++c) light.size[c] = rng.uniform(0.1, 5.0);
    for (int c = 0; c < 3; ++c) light.intensity[c] = rng.uniform(0.0, 1.0);
    scene.lights.push_back(light);
  }
  return scene;
}

bool scene_membership(const SceneVector& scene) {
  if (scene.lights.empty() || scene.lights.size() > 4) return false;
  const double cam_r = scene.camera.position.norm();
  if (cam_r < 0.5 || cam_r > 8.0) return false;
  if (!in_look_at_box(scene.camera.look_at, scene.camera.position)) return false;
  for (int i = 0; i < 3; ++i)
    if (scene.camera.up[i] < -1.0 || scene.camera.up[i] > 1.0) return false;
  if (scene.camera.fov < 35.0 || scene.camera.fov > 100.0) return false;
  for (const auto& light : scene.lights) {
    const double r = light.position.norm();
    if (r < 1.0 || r > 8.0) return false;
    if (!in_look_at_box(light.look_at, scene.camera.position)) return false;
    for (int c = 0; c < 2; ++c)
      if (light.size[c] < 0.1 || light.size[c] > 5.0) return false;
    for (int c = 0; c < 3; ++c)
      if (light.intensity[c] < 0.0 || light.intensity[c] > 1.0) return false;
  }
  return true;
}

bool scene_membership(const Eigen::VectorXd& flat, int n_lights) {
  return scene_membership(SceneVector::from_flat(flat, n_lights));
}

std::vector<std::pair<double, double>> scene_ranges(int n_lights) {
  if (n_lights < 1 || n_lights > 4)
    throw std::invalid_argument("scene: n_lights must be in [1, 4]");
  std::vector<std::pair<double, double>> ranges;
  const std::pair<double, double> cam_pos{-8.0, 8.0};
  const std::pair<double, double> look_box{-kLookAtScale * 8.0, kLookAtScale * 8.0};
  for (int i = 0; i < 3; ++i) ranges.push_back(cam_pos);
  for (int i = 0; i < 3; ++i) ranges.push_back(look_box);
  for (int i = 0; i < 3; ++i) ranges.push_back({-1.0, 1.0});
  ranges.push_back({35.0, 100.0});
  for (int l = 0; l < n_lights; ++l) {
    for (int i = 0; i < 3; ++i) ranges.push_back({-8.0, 8.0});
    for (int i = 0; i < 3; ++i) ranges.push_back(look_box);
    for (int i = 0; i < 2; ++i) ranges.push_back({0.1, 5.0});
    for (int i = 0; i < 3; ++i) ranges.push_back({0.0, 1.0});
  }
  return ranges;
}

SearchSpace scene_search_space(int n_lights, int block) {
  if (block < 0 || block > n_lights)
    throw std::invalid_argument("scene: block out of range");
  SearchSpace space;
  const int dim = kCameraDims + kLightDims * n_lights;
  space.active.assign(dim, false);
  if (block == 0) {
    for (int i = 0; i < kCameraDims; ++i) space.active[i] = true;
  } else {
    const int begin = kCameraDims + kLightDims * (block - 1);
    for (int i = 0; i < kLightDims; ++i) space.active[begin + i] = true;
  }
  space.ranges = scene_ranges(n_lights);
  space.distance_kind = DistanceKind::RangeNormalizedPercent;
  space.in_support = [n_lights](const Eigen::VectorXd& flat) {
    return scene_membership(flat, n_lights);
  };
  return space;
}

}  // namespace indist
