#include "indist/cma_es.hpp"

#include <cmath>

namespace indist {

CmaEs::CmaEs(const Eigen::VectorXd& x_init, double sigma0,
             std::optional<int> lambda_override) {
  const int n = static_cast<int>(x_init.size());
  if (n == 0) throw std::invalid_argument("cma: x_init must be nonempty");
  if (!x_init.allFinite())
    throw std::invalid_argument("cma: x_init has nonfinite entries");
  if (sigma0 <= 0.0) throw std::invalid_argument("cma: sigma0 must be > 0");
  if (lambda_override && *lambda_override < 2)
    throw std::invalid_argument("cma: lambda must be >= 2");

  state_.dim = n;
  state_.mean = x_init;
  state_.cov = Eigen::MatrixXd::Identity(n, n);
  state_.sigma = sigma0;
  state_.path_sigma = Eigen::VectorXd::Zero(n);
  state_.path_cov = Eigen::VectorXd::Zero(n);
  state_.lambda = lambda_override ? *lambda_override : default_lambda(n);
  state_.mu = state_.lambda / 2;
  if (state_.mu < 1) state_.mu = 1;

  // log-rank weights over the mu selected parents
  Eigen::VectorXd w(state_.mu);
  for (int i = 0; i < state_.mu; ++i)
    w[i] = std::log(state_.mu + 0.5) - std::log(i + 1.0);
  w /= w.sum();
  state_.weights = w;
  mu_eff_ = 1.0 / w.squaredNorm();

  c_sigma_ = (mu_eff_ + 2.0) / (n + mu_eff_ + 5.0);
  d_sigma_ = 1.0 +
             2.0 * std::max(0.0, std::sqrt((mu_eff_ - 1.0) / (n + 1.0)) - 1.0) +
             c_sigma_;
  c_cov_path_ = (4.0 + mu_eff_ / n) / (n + 4.0 + 2.0 * mu_eff_ / n);
  c_rank_one_ = 2.0 / ((n + 1.3) * (n + 1.3) + mu_eff_);
  c_rank_mu_ = std::min(1.0 - c_rank_one_,
                        2.0 * (mu_eff_ - 2.0 + 1.0 / mu_eff_) /
                            ((n + 2.0) * (n + 2.0) + mu_eff_));
  chi_n_ = std::sqrt(static_cast<double>(n)) *
           (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
}

void CmaEs::refresh_factorization() {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      0.5 * (state_.cov + state_.cov.transpose()));
  if (solver.info() != Eigen::Success)
    throw FactorizationError(std::numeric_limits<double>::quiet_NaN(),
                             "cma: eigendecomposition failed");
  const Eigen::VectorXd& evals = solver.eigenvalues();
  if (evals[0] <= 0.0)
    throw FactorizationError(
        evals[0], "cma: covariance not positive definite, eigenvalue " +
                      std::to_string(evals[0]));
  eigen_basis_ = solver.eigenvectors();
  eigen_sqrt_ = evals.cwiseSqrt();
  factored_at_ = state_.generation;
}

std::vector<Eigen::VectorXd> CmaEs::ask(Rng& rng) {
  if (factored_at_ != state_.generation) refresh_factorization();
  std::vector<Eigen::VectorXd> offspring;
  offspring.reserve(state_.lambda);
  Eigen::VectorXd z(state_.dim);
  for (int k = 0; k < state_.lambda; ++k) {
    for (int i = 0; i < state_.dim; ++i) z[i] = rng.normal();
    offspring.push_back(state_.mean +
                        state_.sigma * (eigen_basis_ *
                                        (eigen_sqrt_.cwiseProduct(z))));
  }
  return offspring;
}

void CmaEs::tell(const std::vector<ScoredCandidate>& ranked) {
  const int n = state_.dim;
  if (static_cast<int>(ranked.size()) != state_.lambda)
    throw std::invalid_argument("cma: tell expects exactly lambda candidates");
  int finite = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (ranked[i].point.size() != n)
      throw std::invalid_argument("cma: candidate dimension mismatch");
    if (std::isfinite(ranked[i].fitness)) ++finite;
    if (i > 0 && ranked[i].fitness < ranked[i - 1].fitness)
      throw std::invalid_argument("cma: candidates not sorted ascending");
  }
  if (finite < state_.mu)
    throw std::runtime_error("cma: generation infeasible, fewer than mu finite candidates");

  if (factored_at_ != state_.generation) refresh_factorization();

  const Eigen::VectorXd old_mean = state_.mean;
  Eigen::VectorXd new_mean = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < state_.mu; ++i)
    new_mean += state_.weights[i] * ranked[i].point;

  const Eigen::VectorXd y_w = (new_mean - old_mean) / state_.sigma;

  // C^{-1/2} y_w through the cached eigendecomposition
  const Eigen::VectorXd c_inv_sqrt_yw =
      eigen_basis_ *
      (eigen_sqrt_.cwiseInverse().cwiseProduct(eigen_basis_.transpose() * y_w));

  state_.path_sigma =
      (1.0 - c_sigma_) * state_.path_sigma +
      std::sqrt(c_sigma_ * (2.0 - c_sigma_) * mu_eff_) * c_inv_sqrt_yw;

  const double g1 = static_cast<double>(state_.generation + 1);
  const double ps_norm = state_.path_sigma.norm();
  const bool h_sigma =
      ps_norm / std::sqrt(1.0 - std::pow(1.0 - c_sigma_, 2.0 * g1)) / chi_n_ <
      1.4 + 2.0 / (n + 1.0);

  state_.path_cov =
      (1.0 - c_cov_path_) * state_.path_cov +
      (h_sigma ? std::sqrt(c_cov_path_ * (2.0 - c_cov_path_) * mu_eff_) : 0.0) *
          y_w;

  Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < state_.mu; ++i) {
    const Eigen::VectorXd y = (ranked[i].point - old_mean) / state_.sigma;
    rank_mu.noalias() += state_.weights[i] * (y * y.transpose());
  }

  const double delta_h =
      (1.0 - (h_sigma ? 1.0 : 0.0)) * c_cov_path_ * (2.0 - c_cov_path_);
  state_.cov = (1.0 - c_rank_one_ - c_rank_mu_) * state_.cov +
               c_rank_one_ * (state_.path_cov * state_.path_cov.transpose() +
                              delta_h * state_.cov) +
               c_rank_mu_ * rank_mu;
  state_.cov = 0.5 * (state_.cov + state_.cov.transpose());

  state_.sigma *= std::exp((c_sigma_ / d_sigma_) * (ps_norm / chi_n_ - 1.0));

  state_.mean = new_mean;
  state_.generation += 1;
  state_.eval_count += state_.lambda;
}

void CmaEs::repair() {
  Eigen::MatrixXd sym = 0.5 * (state_.cov + state_.cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  Eigen::VectorXd evals = solver.eigenvalues();
  const double floor_val = 1e-12 * std::max(evals.maxCoeff(), 1e-300);
  for (int i = 0; i < evals.size(); ++i)
    if (evals[i] < floor_val) evals[i] = floor_val;
  state_.cov = solver.eigenvectors() * evals.asDiagonal() *
               solver.eigenvectors().transpose();
  state_.cov = 0.5 * (state_.cov + state_.cov.transpose());
  factored_at_ = -1;
}

}  // namespace indist
