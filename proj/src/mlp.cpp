#include "indist/mlp.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace indist {

namespace {

std::vector<int> layer_dims(int input_dim) {
  const int narrow = std::max(input_dim / 5, 2);
  return {input_dim, 5 * input_dim, input_dim, narrow, narrow, 2};
}

Eigen::Vector2d softmax2(const Eigen::Vector2d& logits) {
  const double m = logits.maxCoeff();
  Eigen::Vector2d e = (logits.array() - m).exp();
  return e / e.sum();
}

// Forward pass keeping post-activation values of every layer; activations[0]
// is the input batch, activations.back() holds logits (no softmax).
std::vector<Eigen::MatrixXd> forward_all(const MlpModel& model,
                                         const Eigen::MatrixXd& X) {
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(model.weights.size() + 1);
  acts.push_back(X);
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    Eigen::MatrixXd z =
        (acts.back() * model.weights[l]).rowwise() + model.biases[l].transpose();
    if (l + 1 < model.weights.size()) z = z.cwiseMax(0.0);
    acts.push_back(std::move(z));
  }
  return acts;
}

double sgd_step(MlpModel& model, const Eigen::MatrixXd& X,
                const std::vector<int>& labels, double lr) {
  const auto acts = forward_all(model, X);
  const Eigen::MatrixXd& logits = acts.back();
  const int n = static_cast<int>(X.rows());

  // softmax + mean cross-entropy
  Eigen::MatrixXd probs(n, 2);
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d p = softmax2(logits.row(i).transpose());
    probs.row(i) = p.transpose();
    loss -= std::log(std::max(p[labels[i]], 1e-300));
  }
  loss /= n;

  // delta at the logits: (probs - one_hot) / n
  Eigen::MatrixXd delta = probs;
  for (int i = 0; i < n; ++i) delta(i, labels[i]) -= 1.0;
  delta /= static_cast<double>(n);

  for (int l = static_cast<int>(model.weights.size()) - 1; l >= 0; --l) {
    const Eigen::MatrixXd grad_w = acts[l].transpose() * delta;
    const Eigen::VectorXd grad_b = delta.colwise().sum().transpose();
    if (l > 0) {
      Eigen::MatrixXd next = delta * model.weights[l].transpose();
      // ReLU mask from the stored post-activation
      delta = next.cwiseProduct(
          (acts[l].array() > 0.0).cast<double>().matrix());
    }
    model.weights[l] -= lr * grad_w;
    model.biases[l] -= lr * grad_b;
  }
  return loss;
}

}  // namespace

MlpModel mlp_init(int input_dim, std::uint64_t init_seed) {
  if (input_dim < 1) throw std::invalid_argument("mlp_init: input_dim must be >= 1");
  MlpModel model;
  model.dims = layer_dims(input_dim);
  model.init_seed = init_seed;
  Rng rng(derive_seed(init_seed, "mlp-init"));
  for (std::size_t l = 0; l + 1 < model.dims.size(); ++l) {
    const int fan_in = model.dims[l];
    const int fan_out = model.dims[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Eigen::MatrixXd w(fan_in, fan_out);
    for (int i = 0; i < fan_in; ++i)
      for (int j = 0; j < fan_out; ++j) w(i, j) = rng.uniform(-bound, bound);
    model.weights.push_back(std::move(w));
    // biases share the weight bound; the nonzero offsets put ReLU kinks
    // inside both class boxes, which the decision-boundary experiments need
    Eigen::VectorXd b(fan_out);
    for (int j = 0; j < fan_out; ++j) b[j] = rng.uniform(-bound, bound);
    model.biases.push_back(std::move(b));
  }
  return model;
}

Prediction forward(const MlpModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.input_dim())
    throw std::invalid_argument("forward: dimension mismatch");
  if (!x.allFinite()) throw std::invalid_argument("forward: nonfinite input");
  Eigen::MatrixXd X = x.transpose();
  const auto acts = forward_all(model, X);
  Prediction pred;
  pred.logits = acts.back().row(0).transpose();
  pred.probs = softmax2(pred.logits);
  pred.label = pred.probs[1] > pred.probs[0] ? 1 : 0;
  return pred;
}

std::vector<Prediction> forward_batch(const MlpModel& model,
                                      const Eigen::MatrixXd& X) {
  if (X.cols() != model.input_dim())
    throw std::invalid_argument("forward_batch: dimension mismatch");
  const auto acts = forward_all(model, X);
  std::vector<Prediction> preds(X.rows());
  for (int i = 0; i < X.rows(); ++i) {
    preds[i].logits = acts.back().row(i).transpose();
    preds[i].probs = softmax2(preds[i].logits);
    preds[i].label = preds[i].probs[1] > preds[i].probs[0] ? 1 : 0;
  }
  return preds;
}

std::pair<MlpModel, std::vector<double>> train(const MlpModel& model,
                                               const LabeledDataset& data,
                                               const TrainConfig& cfg) {
  if (data.points.empty()) throw std::invalid_argument("train: empty dataset");
  if (data.support.dim != model.input_dim())
    throw std::invalid_argument("train: dataset dim does not match model");
  if (cfg.learning_rate < 0.0 || cfg.epochs < 1 || cfg.batch_size < 1)
    throw std::invalid_argument("train: bad config");

  const int n = static_cast<int>(data.points.size());
  Eigen::MatrixXd X(n, data.support.dim);
  for (int i = 0; i < n; ++i) X.row(i) = data.points[i].transpose();

  MlpModel trained = model;
  std::vector<double> loss_history;
  loss_history.reserve(cfg.epochs);

  std::vector<int> order(n);
  Rng shuffle_rng(derive_seed(cfg.sgd_seed, "sgd-shuffle"));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (int i = 0; i < n; ++i) order[i] = i;
    for (int i = n; i > 1; --i) {
      const int j = static_cast<int>(shuffle_rng.next_below(i));
      std::swap(order[i - 1], order[j]);
    }

    double epoch_loss = 0.0;
    for (int begin = 0; begin < n; begin += cfg.batch_size) {
      const int count = std::min(cfg.batch_size, n - begin);
      Eigen::MatrixXd batch(count, data.support.dim);
      std::vector<int> batch_labels(count);
      for (int i = 0; i < count; ++i) {
        batch.row(i) = X.row(order[begin + i]);
        batch_labels[i] = data.labels[order[begin + i]];
      }
      epoch_loss += sgd_step(trained, batch, batch_labels, cfg.learning_rate) *
                    count;
    }
    loss_history.push_back(epoch_loss / n);
  }
  return {std::move(trained), std::move(loss_history)};
}

double accuracy(const MlpModel& model, const LabeledDataset& data) {
  if (data.points.empty()) throw std::invalid_argument("accuracy: empty dataset");
  const int n = static_cast<int>(data.points.size());
  Eigen::MatrixXd X(n, data.support.dim);
  for (int i = 0; i < n; ++i) X.row(i) = data.points[i].transpose();
  const auto preds = forward_batch(model, X);
  int correct = 0;
  for (int i = 0; i < n; ++i)
    if (preds[i].label == data.labels[i]) ++correct;
  return static_cast<double>(correct) / n;
}

namespace {

double ce_loss(const MlpModel& model, const Eigen::VectorXd& x, int label) {
  const Prediction p = forward(model, x);
  return -std::log(std::max(p.probs[label], 1e-300));
}

// bitmask of which hidden units are active; central differences are only
// valid when the perturbed passes stay on the same linear piece
std::vector<bool> relu_pattern(const MlpModel& model, const Eigen::VectorXd& x) {
  std::vector<bool> pattern;
  Eigen::VectorXd h = x;
  for (std::size_t l = 0; l + 1 < model.weights.size(); ++l) {
    Eigen::VectorXd z = model.weights[l].transpose() * h + model.biases[l];
    for (int j = 0; j < z.size(); ++j) pattern.push_back(z[j] > 0.0);
    h = z.cwiseMax(0.0);
  }
  return pattern;
}

}  // namespace

double grad_check(const MlpModel& model, const Eigen::VectorXd& x, int label) {
  // analytic gradient via a single-sample backward pass
  MlpModel grad = model;
  for (auto& w : grad.weights) w.setZero();
  for (auto& b : grad.biases) b.setZero();
  {
    Eigen::MatrixXd X = x.transpose();
    const auto acts = forward_all(model, X);
    const Eigen::Vector2d probs = softmax2(acts.back().row(0).transpose());
    Eigen::MatrixXd delta = probs.transpose();
    delta(0, label) -= 1.0;
    for (int l = static_cast<int>(model.weights.size()) - 1; l >= 0; --l) {
      grad.weights[l] = acts[l].transpose() * delta;
      grad.biases[l] = delta.colwise().sum().transpose();
      if (l > 0) {
        Eigen::MatrixXd next = delta * model.weights[l].transpose();
        delta = next.cwiseProduct(
            (acts[l].array() > 0.0).cast<double>().matrix());
      }
    }
  }

  double max_rel = 0.0;
  MlpModel probe = model;
  const std::vector<bool> base_pattern = relu_pattern(model, x);
  auto check_param = [&](double& w, double analytic) {
    const double h = 1e-4 * (std::abs(w) + 1.0);
    const double saved = w;
    w = saved + h;
    const double up = ce_loss(probe, x, label);
    const bool up_ok = relu_pattern(probe, x) == base_pattern;
    w = saved - h;
    const double down = ce_loss(probe, x, label);
    const bool down_ok = relu_pattern(probe, x) == base_pattern;
    w = saved;
    if (!up_ok || !down_ok) return;  // perturbation crossed a ReLU kink
    const double numeric = (up - down) / (2.0 * h);
    const double rel =
        std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
    max_rel = std::max(max_rel, rel);
  };
  for (std::size_t l = 0; l < probe.weights.size(); ++l) {
    for (int i = 0; i < probe.weights[l].rows(); ++i)
      for (int j = 0; j < probe.weights[l].cols(); ++j)
        check_param(probe.weights[l](i, j), grad.weights[l](i, j));
    for (int j = 0; j < probe.biases[l].size(); ++j)
      check_param(probe.biases[l][j], grad.biases[l][j]);
  }
  return max_rel;
}

void save_model(const MlpModel& model, const std::string& path) {
  nlohmann::json j;
  j["dims"] = model.dims;
  j["init_seed"] = model.init_seed;
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    nlohmann::json layer;
    std::vector<std::vector<double>> w(model.weights[l].rows());
    for (int i = 0; i < model.weights[l].rows(); ++i) {
      w[i].resize(model.weights[l].cols());
      for (int jj = 0; jj < model.weights[l].cols(); ++jj)
        w[i][jj] = model.weights[l](i, jj);
    }
    layer["w"] = w;
    layer["b"] = std::vector<double>(model.biases[l].data(),
                                     model.biases[l].data() + model.biases[l].size());
    layers.push_back(std::move(layer));
  }
  j["layers"] = std::move(layers);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_model: cannot open " + path);
  out << j.dump();
}

MlpModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_model: cannot open " + path);
  nlohmann::json j;
  in >> j;
  MlpModel model;
  model.dims = j.at("dims").get<std::vector<int>>();
  model.init_seed = j.at("init_seed").get<std::uint64_t>();
  for (const auto& layer : j.at("layers")) {
    const auto w = layer.at("w").get<std::vector<std::vector<double>>>();
    const auto b = layer.at("b").get<std::vector<double>>();
    Eigen::MatrixXd wm(w.size(), w.empty() ? 0 : w[0].size());
    for (std::size_t i = 0; i < w.size(); ++i)
      for (std::size_t jj = 0; jj < w[i].size(); ++jj) wm(i, jj) = w[i][jj];
    model.weights.push_back(std::move(wm));
    model.biases.push_back(
        Eigen::Map<const Eigen::VectorXd>(b.data(), b.size()));
  }
  // shape chain check
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    if (model.weights[l].rows() != model.dims[l] ||
        model.weights[l].cols() != model.dims[l + 1])
      throw std::runtime_error("load_model: layer shape mismatch in " + path);
  }
  return model;
}

}  // namespace indist
