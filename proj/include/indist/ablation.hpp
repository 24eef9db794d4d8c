#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "indist/evaluation.hpp"

namespace indist {

enum class VariedSource { CmaSearch, Sgd, SamplingBias, ModelInit };

std::string varied_source_name(VariedSource source);

struct BaseConfig {
  int dim = 20;
  std::int64_t dataset_size = 100000;
  std::uint64_t data_seed = 0;
  std::uint64_t init_seed = 0;
  std::uint64_t sgd_seed = 0;
  std::uint64_t cma_seed = 0;
};

struct AblationSpec {
  BaseConfig base;
  VariedSource varied = VariedSource::CmaSearch;
  int n_trials = 10;
};

struct TrialRecord {
  BaseConfig seeds;  // the full seed tuple the trial actually used
  double rate = 0.0;
};

struct AblationResult {
  AblationSpec spec;
  std::vector<TrialRecord> trials;
  double mean = 0.0;
  double std_dev = 0.0;
};

// Per trial, refresh only the varied source's seed (hash of base seed and
// trial index), retrain when the varied source affects training, re-attack
// via attack_rate.
AblationResult run_ablation(const AblationSpec& spec, const TrainConfig& train_cfg,
                            const EvalConfig& eval_cfg);

void write_ablation_json(const AblationResult& result, const std::string& path);

struct RobustBaseCandidate {
  BaseConfig seeds;
  double accuracy = 0.0;
  double mean_rate = 0.0;
};

struct RobustBaseSearch {
  std::optional<BaseConfig> base;
  std::vector<RobustBaseCandidate> candidates;  // every screened candidate
};

// Screens candidate init seeds until one trains to accuracy > 0.99 with mean
// attack rate <= rate_threshold.
RobustBaseSearch find_robust_base(int dim, std::int64_t dataset_size,
                                  int max_candidates, const TrainConfig& train_cfg,
                                  const EvalConfig& eval_cfg, std::uint64_t seed,
                                  double rate_threshold = 0.3);

}  // namespace indist
