#include <doctest.h>

#include <cmath>
#include <functional>

#include "indist/cma_es.hpp"

using namespace indist;

namespace {

struct RunResult {
  double best = std::numeric_limits<double>::infinity();
  std::int64_t evals = 0;
  Eigen::VectorXd best_point;
};

// minimization loop: ask / score / sort / tell until target or budget
RunResult run_cma(const std::function<double(const Eigen::VectorXd&)>& f,
                  const Eigen::VectorXd& x0, double sigma0, std::uint64_t seed,
                  double target, std::int64_t max_evals) {
  CmaEs es(x0, sigma0);
  Rng rng(seed);
  RunResult result;
  while (result.evals < max_evals) {
    auto offspring = es.ask(rng);
    std::vector<ScoredCandidate> scored;
    for (auto& x : offspring) {
      const double fx = f(x);
      if (fx < result.best) {
        result.best = fx;
        result.best_point = x;
      }
      scored.push_back({std::move(x), fx});
    }
    result.evals += static_cast<std::int64_t>(scored.size());
    if (result.best < target) return result;
    std::sort(scored.begin(), scored.end(),
              [](const ScoredCandidate& a, const ScoredCandidate& b) {
                return a.fitness < b.fitness;
              });
    es.tell(scored);
  }
  return result;
}

double sphere(const Eigen::VectorXd& x) { return x.squaredNorm(); }

double rosenbrock(const Eigen::VectorXd& x) {
  double sum = 0.0;
  for (int i = 0; i + 1 < x.size(); ++i) {
    const double a = x[i + 1] - x[i] * x[i];
    const double b = 1.0 - x[i];
    sum += 100.0 * a * a + b * b;
  }
  return sum;
}

}  // namespace

TEST_CASE("init: identity covariance and default lambda") {
  CmaEs es(Eigen::VectorXd::Zero(20), 1.0);
  const EsState& s = es.state();
  CHECK(s.dim == 20);
  CHECK(s.mean.isZero());
  CHECK(s.cov.isApprox(Eigen::MatrixXd::Identity(20, 20)));
  CHECK(s.sigma == 1.0);
  CHECK(s.lambda == 12);  // 4 + floor(3 ln 20)
  CHECK(s.mu == 6);
  CHECK(s.path_sigma.isZero());
  CHECK(s.path_cov.isZero());
  CHECK(s.generation == 0);
  CHECK(s.eval_count == 0);
}

TEST_CASE("init: lambda default for dim 10 is 10") {
  CmaEs es(Eigen::VectorXd::Ones(10), 0.5);
  CHECK(es.state().lambda == 10);  // 4 + floor(3 ln 10)
}

TEST_CASE("init: weights nonincreasing and normalized") {
  CmaEs es(Eigen::VectorXd::Zero(7), 2.0);
  const Eigen::VectorXd& w = es.state().weights;
  CHECK(std::abs(w.sum() - 1.0) < 1e-12);
  for (int i = 1; i < w.size(); ++i) CHECK(w[i] <= w[i - 1]);
}

TEST_CASE("init: rejects bad arguments") {
  CHECK_THROWS_AS(CmaEs(Eigen::VectorXd(), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(CmaEs(Eigen::VectorXd::Constant(1, 5.0), 0.0),
                  std::invalid_argument);
  Eigen::VectorXd bad = Eigen::VectorXd::Zero(3);
  bad[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(CmaEs(bad, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(CmaEs(Eigen::VectorXd::Zero(3), 1.0, 1), std::invalid_argument);
}

TEST_CASE("ask: vanishing step size pins offspring to the mean") {
  Eigen::VectorXd m(4);
  m << 1.0, -2.0, 3.0, 0.5;
  CmaEs es(m, 1e-12);
  Rng rng(1);
  for (const auto& x : es.ask(rng))
    CHECK((x - m).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("ask: pooled offspring match MVN mean and unit variance") {
  // statistical oracle, one fixed seed
  const int dim = 20;
  Eigen::VectorXd m = Eigen::VectorXd::LinSpaced(dim, -1.0, 1.0);
  CmaEs es(m, 1.0, 100);
  Rng rng(42);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(dim);
  const int pools = 100;  // 100 x 100 = 10000 offspring
  for (int p = 0; p < pools; ++p) {
    for (const auto& x : es.ask(rng)) {
      sum += x;
      sum_sq += (x - m).cwiseAbs2();
    }
  }
  const double n = 100.0 * pools;
  const Eigen::VectorXd mean = sum / n;
  const Eigen::VectorXd var = sum_sq / n;
  for (int i = 0; i < dim; ++i) {
    CHECK(std::abs(mean[i] - m[i]) < 0.05);
    CHECK(std::abs(var[i] - 1.0) < 0.1);
  }
}

TEST_CASE("ask: non-PD covariance raises an error naming the eigenvalue") {
  CmaEs es(Eigen::VectorXd::Zero(2), 1.0);
  es.state().cov << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3, -1
  Rng rng(3);
  try {
    es.ask(rng);
    FAIL("expected FactorizationError");
  } catch (const FactorizationError& e) {
    CHECK(e.eigenvalue() == doctest::Approx(-1.0));
    CHECK(std::string(e.what()).find("-1") != std::string::npos);
  }
}

TEST_CASE("tell: zero displacement keeps the mean") {
  CmaEs es(Eigen::VectorXd::Constant(5, 2.0), 0.7);
  const Eigen::VectorXd old_mean = es.state().mean;
  std::vector<ScoredCandidate> ranked;
  for (int i = 0; i < es.state().lambda; ++i)
    ranked.push_back({old_mean, static_cast<double>(i)});
  es.tell(ranked);
  CHECK((es.state().mean - old_mean).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(es.state().sigma > 0.0);
  CHECK(es.state().generation == 1);
  CHECK(es.state().eval_count == es.state().lambda);
}

TEST_CASE("tell: rejects malformed input") {
  CmaEs es(Eigen::VectorXd::Zero(3), 1.0);
  Rng rng(5);
  auto offspring = es.ask(rng);
  std::vector<ScoredCandidate> scored;
  for (auto& x : offspring) scored.push_back({x, 1.0});

  SUBCASE("wrong count") {
    scored.pop_back();
    CHECK_THROWS_AS(es.tell(scored), std::invalid_argument);
  }
  SUBCASE("unsorted") {
    scored.front().fitness = 10.0;
    CHECK_THROWS_AS(es.tell(scored), std::invalid_argument);
  }
  SUBCASE("too few finite") {
    for (auto& c : scored) c.fitness = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(es.tell(scored), std::runtime_error);
  }
}

TEST_CASE("sphere 10-d converges within 6000 evaluations") {
  const RunResult r = run_cma(sphere, Eigen::VectorXd::Constant(10, 3.0), 1.0,
                              2024, 1e-8, 6000);
  CHECK(r.best < 1e-8);
  CHECK(r.evals <= 6000);
}

TEST_CASE("rosenbrock 5-d converges within 30000 evaluations") {
  const RunResult r = run_cma(rosenbrock, Eigen::VectorXd::Zero(5), 0.5, 99,
                              1e-6, 30000);
  CHECK(r.best < 1e-6);
  CHECK(r.evals <= 30000);
}

TEST_CASE("repair: idempotent on SPD, floors negative eigenvalues") {
  SUBCASE("already SPD") {
    CmaEs es(Eigen::VectorXd::Zero(3), 1.0);
    es.state().cov << 2.0, 0.3, 0.0, 0.3, 1.5, 0.1, 0.0, 0.1, 1.0;
    es.state().cov = 0.5 * (es.state().cov + es.state().cov.transpose());
    const Eigen::MatrixXd before = es.state().cov;
    es.repair();
    CHECK((es.state().cov - before).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("indefinite 2x2") {
    CmaEs es(Eigen::VectorXd::Zero(2), 1.0);
    es.state().cov << 1.0, 2.0, 2.0, 1.0;
    es.repair();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(es.state().cov);
    CHECK(solver.eigenvalues()[0] >= 3e-12 * 0.99);
    CHECK(solver.eigenvalues()[1] == doctest::Approx(3.0));
  }
  SUBCASE("small asymmetry removed") {
    CmaEs es(Eigen::VectorXd::Zero(2), 1.0);
    es.state().cov(0, 1) += 1e-8;
    es.repair();
    CHECK(es.state().cov(0, 1) == es.state().cov(1, 0));
  }
}

TEST_CASE("property: covariance stays symmetric and sigma positive") {
  CmaEs es(Eigen::VectorXd::Constant(6, 1.0), 0.8);
  Rng rng(7);
  for (int g = 0; g < 60; ++g) {
    auto offspring = es.ask(rng);
    std::vector<ScoredCandidate> scored;
    for (auto& x : offspring) scored.push_back({x, sphere(x)});
    std::sort(scored.begin(), scored.end(),
              [](const auto& a, const auto& b) { return a.fitness < b.fitness; });
    es.tell(scored);
    const Eigen::MatrixXd& c = es.state().cov;
    CHECK((c - c.transpose()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(es.state().sigma > 0.0);
    CHECK(std::isfinite(es.state().sigma));
  }
  CHECK(es.state().eval_count == 60 * es.state().lambda);
}

TEST_CASE("property: deterministic trajectories under identical seeds") {
  auto trajectory = [](std::uint64_t seed) {
    CmaEs es(Eigen::VectorXd::Constant(4, 2.0), 0.5);
    Rng rng(seed);
    for (int g = 0; g < 20; ++g) {
      auto offspring = es.ask(rng);
      std::vector<ScoredCandidate> scored;
      for (auto& x : offspring) scored.push_back({x, sphere(x)});
      std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        return a.fitness < b.fitness;
      });
      es.tell(scored);
    }
    return es.state().mean;
  };
  const Eigen::VectorXd a = trajectory(11);
  const Eigen::VectorXd b = trajectory(11);
  const Eigen::VectorXd c = trajectory(12);
  CHECK(a == b);  // bit-identical
  CHECK(a != c);
}

TEST_CASE("property: fitness shift invariance of the update") {
  auto evolve = [](double shift) {
    CmaEs es(Eigen::VectorXd::Constant(5, 1.5), 0.6);
    Rng rng(31);
    for (int g = 0; g < 15; ++g) {
      auto offspring = es.ask(rng);
      std::vector<ScoredCandidate> scored;
      for (auto& x : offspring) scored.push_back({x, sphere(x) + shift});
      std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        return a.fitness < b.fitness;
      });
      es.tell(scored);
    }
    return es.state().mean;
  };
  CHECK(evolve(0.0) == evolve(1000.0));
}

TEST_CASE("property: best-so-far nonincreasing on the sphere") {
  CmaEs es(Eigen::VectorXd::Constant(8, 2.0), 1.0);
  Rng rng(17);
  double best = std::numeric_limits<double>::infinity();
  for (int g = 0; g < 40; ++g) {
    auto offspring = es.ask(rng);
    std::vector<ScoredCandidate> scored;
    double gen_best = std::numeric_limits<double>::infinity();
    for (auto& x : offspring) {
      const double f = sphere(x);
      gen_best = std::min(gen_best, f);
      scored.push_back({std::move(x), f});
    }
    const double prev = best;
    best = std::min(best, gen_best);
    CHECK(best <= prev);
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      return a.fitness < b.fitness;
    });
    es.tell(scored);
  }
  CHECK(best < 1.0);
}
