#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "indist/mlp.hpp"
#include "indist/parametric_data.hpp"
#include "indist/search.hpp"

namespace indist {

struct AttackRateReport {
  int n_starts = 0;
  int n_repeats = 0;
  std::vector<double> per_repeat_rates;
  double mean_rate = 0.0;
  double std_rate = 0.0;
  std::optional<double> mean_distance;  // absent when no attack succeeded
  std::optional<double> std_distance;
  std::vector<AttackOutcome> outcomes;  // all repeats, repeat-major order
};

struct EvalConfig {
  AttackConfig attack;
  int n_starts = 100;
  int n_repeats = 10;
  int jobs = 1;
};

// Per repeat: draw fresh correctly classified starts (resampling from the
// support when the pool runs dry), attack each with repeat-derived seeds,
// aggregate rates and successful-attack distances.
AttackRateReport attack_rate(const MlpModel& model, const UniformPairSupport& support,
                             const LabeledDataset& test_pool, const EvalConfig& cfg,
                             std::uint64_t seed);

SearchSpace parametric_search_space(const UniformPairSupport& support);

struct SweepRow {
  int dim = 0;
  std::int64_t size = 0;
  int repeat = 0;
  double accuracy = 0.0;
  double mean_rate = 0.0;
  std::optional<double> mean_distance;
  bool skipped = false;  // model failed the > 0.99 accuracy gate
};

struct SweepConfig {
  std::vector<int> dims;
  std::vector<std::int64_t> dataset_sizes;
  int repeats = 1;
  TrainConfig train;
  EvalConfig eval;
  double accuracy_gate = 0.99;
  std::int64_t heldout_per_class = 1000;
};

std::vector<SweepRow> scaling_sweep(const SweepConfig& cfg, std::uint64_t seed);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

enum class CellLabel { Correct, AdversarialInDist, OutOfDist };

struct ChurchWindowGrid {
  Eigen::VectorXd start;
  Eigen::VectorXd adv_dir;
  Eigen::VectorXd orth_dir;
  double adv_halfwidth = 0.0;
  double orth_halfwidth = 0.0;
  int rows = 0;  // along orth_dir
  int cols = 0;  // along adv_dir
  std::vector<std::vector<CellLabel>> cells;  // cells[row][col]
};

// 2-D slice through the start spanned by the adversarial direction and a
// seeded random orthogonal direction, on a fixed-increment grid centered at
// the start. Cell labels: out-of-support, else classifier agreement with the
// start's true label.
ChurchWindowGrid church_window(const MlpModel& model, const UniformPairSupport& support,
                               const Eigen::VectorXd& start,
                               const Eigen::VectorXd& adversarial,
                               double adv_halfwidth, double orth_halfwidth,
                               int rows, int cols, std::uint64_t orth_seed);

// Default extents: half-width 1.5 x ||adversarial - start|| both ways,
// 101 rows x 241 cols (fine enough to resolve thin adversarial bands).
ChurchWindowGrid church_window(const MlpModel& model, const UniformPairSupport& support,
                               const Eigen::VectorXd& start,
                               const Eigen::VectorXd& adversarial,
                               std::uint64_t orth_seed);

// The center row scanned outward from the start in the adversarial direction
// must read Correct+ AdversarialInDist+ OutOfDist+ with one transition each.
bool band_pattern_ok(const ChurchWindowGrid& grid);

// Plain PPM (P3): white / red / black per cell, plus a JSON metadata sidecar.
void render_grid(const ChurchWindowGrid& grid, const std::string& path);
std::vector<std::vector<CellLabel>> read_grid_ppm(const std::string& path);

// Concatenate the adversarial points (labeled with their support class) onto
// the data, reshuffle under the config seed, retrain from the same init.
MlpModel augment_and_retrain(const MlpModel& model, const LabeledDataset& data,
                             const std::vector<Eigen::VectorXd>& adversarial_points,
                             const std::vector<int>& adversarial_labels,
                             const TrainConfig& cfg);

}  // namespace indist
