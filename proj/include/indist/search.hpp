#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "indist/cma_es.hpp"

namespace indist {

enum class DistanceKind { Euclidean, RangeNormalizedPercent };

// Batch classifier boundary: full-dimensional points in, (label, probs) out,
// order-preserving.
struct ClassifyResult {
  int label = 0;
  std::vector<double> probs;
};
using BatchClassifier =
    std::function<std::vector<ClassifyResult>(const std::vector<Eigen::VectorXd>&)>;

struct SearchSpace {
  std::function<bool(const Eigen::VectorXd&)> in_support;
  std::vector<bool> active;                       // coordinates the search may mutate
  std::vector<std::pair<double, double>> ranges;  // per-coordinate (lo, hi)
  DistanceKind distance_kind = DistanceKind::Euclidean;

  int full_dim() const { return static_cast<int>(active.size()); }
  int active_dim() const;
  // 0.1 x mean active-coordinate range
  double default_sigma0() const;
};

struct AttackOutcome {
  Eigen::VectorXd start;
  std::optional<Eigen::VectorXd> adversarial;
  std::int64_t iterations_used = 0;  // completed generations
  std::int64_t evals_used = 0;
  std::optional<double> distance;
  DistanceKind distance_kind = DistanceKind::Euclidean;
  std::uint64_t seed = 0;

  bool success() const { return adversarial.has_value(); }
};

struct AttackConfig {
  int max_generations = 1500;
  double sigma0 = 0.0;  // <= 0 means SearchSpace::default_sigma0()
  std::optional<int> lambda;
};

// Fitness of a single candidate: +infinity outside the support, else the
// classifier's probability of the true class (lower = closer to a flip).
std::pair<double, bool> fitness(const ClassifyResult& result, int true_label,
                                bool in_support);

// Algorithm: start from a correctly classified in-support point, sample
// offspring over the active coordinates, early-exit on the first in-support
// misclassified offspring, otherwise rank by fitness and update the strategy.
AttackOutcome attack(const BatchClassifier& classifier, int true_label,
                     const Eigen::VectorXd& start, const SearchSpace& space,
                     const AttackConfig& cfg, std::uint64_t seed);

// Distance between two points over the active coordinates, per distance_kind.
double active_distance(const SearchSpace& space, const Eigen::VectorXd& a,
                       const Eigen::VectorXd& b);

std::string outcome_to_json(const AttackOutcome& outcome);
AttackOutcome outcome_from_json(const std::string& line);

}  // namespace indist
