#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "indist/rng.hpp"

namespace indist {

struct ScoredCandidate {
  Eigen::VectorXd point;
  double fitness = std::numeric_limits<double>::infinity();
};

struct EsState {
  int dim = 0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double sigma = 0.0;
  Eigen::VectorXd path_sigma;
  Eigen::VectorXd path_cov;
  int lambda = 0;
  int mu = 0;
  Eigen::VectorXd weights;  // length mu, nonincreasing, sums to 1
  std::int64_t generation = 0;
  std::int64_t eval_count = 0;
};

class FactorizationError : public std::runtime_error {
 public:
  FactorizationError(double eigenvalue, const std::string& msg)
      : std::runtime_error(msg), eigenvalue_(eigenvalue) {}
  double eigenvalue() const { return eigenvalue_; }

 private:
  double eigenvalue_;
};

inline int default_lambda(int dim) {
  return 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(dim))));
}

// (mu/mu_w, lambda)-CMA-ES with rank-one + rank-mu covariance adaptation and
// cumulative step-size control. Strategy constants are the dimension-dependent
// defaults; fitness is minimized and selection is purely rank-based.
class CmaEs {
 public:
  CmaEs(const Eigen::VectorXd& x_init, double sigma0,
        std::optional<int> lambda_override = std::nullopt);

  // Samples lambda offspring from MVN(mean, sigma^2 * cov). The covariance
  // factorization is cached and refreshed at most once per generation.
  std::vector<Eigen::VectorXd> ask(Rng& rng);

  // ranked must hold exactly lambda candidates sorted by ascending fitness,
  // with at least mu of them finite.
  void tell(const std::vector<ScoredCandidate>& ranked);

  // Symmetrizes cov and floors eigenvalues at 1e-12 * max eigenvalue.
  void repair();

  const EsState& state() const { return state_; }
  EsState& state() { return state_; }

 private:
  void refresh_factorization();

  EsState state_;

  // derived constants, fixed at construction
  double mu_eff_ = 0.0;
  double c_sigma_ = 0.0;
  double d_sigma_ = 0.0;
  double c_cov_path_ = 0.0;
  double c_rank_one_ = 0.0;
  double c_rank_mu_ = 0.0;
  double chi_n_ = 0.0;

  // cached eigendecomposition of cov
  Eigen::MatrixXd eigen_basis_;
  Eigen::VectorXd eigen_sqrt_;  // sqrt of eigenvalues
  std::int64_t factored_at_ = -1;
};

}  // namespace indist
