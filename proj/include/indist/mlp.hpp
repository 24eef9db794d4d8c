#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "indist/parametric_data.hpp"

namespace indist {

// Five weight layers of ReLU MLP: D -> 5D -> D -> max(D/5,2) -> max(D/5,2) -> 2.
struct MlpModel {
  std::vector<int> dims;
  std::vector<Eigen::MatrixXd> weights;  // weights[l] is dims[l] x dims[l+1]
  std::vector<Eigen::VectorXd> biases;
  std::uint64_t init_seed = 0;

  int input_dim() const { return dims.front(); }
};

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 100;
  int batch_size = 64000;
  std::uint64_t sgd_seed = 0;
};

struct Prediction {
  Eigen::Vector2d logits;
  Eigen::Vector2d probs;
  int label = 0;  // argmax, ties toward class 0
};

MlpModel mlp_init(int input_dim, std::uint64_t init_seed);

Prediction forward(const MlpModel& model, const Eigen::VectorXd& x);

// Batch inference: rows of X are samples; returns per-row predictions.
std::vector<Prediction> forward_batch(const MlpModel& model,
                                      const Eigen::MatrixXd& X);

// Mini-batch SGD on mean cross-entropy. Returns the trained model and the
// per-epoch mean loss.
std::pair<MlpModel, std::vector<double>> train(const MlpModel& model,
                                               const LabeledDataset& data,
                                               const TrainConfig& cfg);

double accuracy(const MlpModel& model, const LabeledDataset& data);

// Max relative error between the analytic cross-entropy gradient and central
// finite differences over every weight and bias.
double grad_check(const MlpModel& model, const Eigen::VectorXd& x, int label);

void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);

}  // namespace indist
