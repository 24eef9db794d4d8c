#include "indist/search.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace indist {

int SearchSpace::active_dim() const {
  return static_cast<int>(std::count(active.begin(), active.end(), true));
}

double SearchSpace::default_sigma0() const {
  double sum = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < active.size(); ++i) {
    if (!active[i]) continue;
    sum += ranges[i].second - ranges[i].first;
    ++count;
  }
  if (count == 0) throw std::invalid_argument("search space has no active coordinate");
  return 0.1 * sum / count;
}

std::pair<double, bool> fitness(const ClassifyResult& result, int true_label,
                                bool in_support) {
  if (!in_support) return {std::numeric_limits<double>::infinity(), false};
  return {result.probs.at(true_label), result.label != true_label};
}

double active_distance(const SearchSpace& space, const Eigen::VectorXd& a,
                       const Eigen::VectorXd& b) {
  double delta_sq = 0.0;
  double range_sq = 0.0;
  for (std::size_t i = 0; i < space.active.size(); ++i) {
    if (!space.active[i]) continue;
    const double d = a[static_cast<int>(i)] - b[static_cast<int>(i)];
    delta_sq += d * d;
    const double r = space.ranges[i].second - space.ranges[i].first;
    range_sq += r * r;
  }
  const double dist = std::sqrt(delta_sq);
  if (space.distance_kind == DistanceKind::Euclidean) return dist;
  return 100.0 * dist / std::sqrt(range_sq);
}

namespace {

Eigen::VectorXd extract_active(const SearchSpace& space, const Eigen::VectorXd& x) {
  Eigen::VectorXd out(space.active_dim());
  int k = 0;
  for (std::size_t i = 0; i < space.active.size(); ++i)
    if (space.active[i]) out[k++] = x[static_cast<int>(i)];
  return out;
}

Eigen::VectorXd embed_active(const SearchSpace& space, const Eigen::VectorXd& start,
                             const Eigen::VectorXd& z) {
  Eigen::VectorXd out = start;
  int k = 0;
  for (std::size_t i = 0; i < space.active.size(); ++i)
    if (space.active[i]) out[static_cast<int>(i)] = z[k++];
  return out;
}

}  // namespace

AttackOutcome attack(const BatchClassifier& classifier, int true_label,
                     const Eigen::VectorXd& start, const SearchSpace& space,
                     const AttackConfig& cfg, std::uint64_t seed) {
  if (start.size() != space.full_dim())
    throw std::invalid_argument("attack: start dimension mismatch");
  if (space.active_dim() == 0)
    throw std::invalid_argument("attack: no active coordinates");
  if (!space.in_support(start))
    throw std::invalid_argument("attack: start is out of support");
  {
    const auto check = classifier({start});
    if (check.at(0).label != true_label)
      throw std::invalid_argument("attack: start is not correctly classified");
  }

  AttackOutcome outcome;
  outcome.start = start;
  outcome.distance_kind = space.distance_kind;
  outcome.seed = seed;

  const double sigma0 = cfg.sigma0 > 0.0 ? cfg.sigma0 : space.default_sigma0();
  Rng rng(derive_seed(seed, "attack"));

  // best feasible candidate seen so far, in active coordinates; used to
  // re-center the strategy when a boundary restart is needed
  Eigen::VectorXd best_z = extract_active(space, start);
  double best_fitness = std::numeric_limits<double>::infinity();

  double restart_sigma = sigma0;
  int gens_done = 0;
  while (gens_done < cfg.max_generations && restart_sigma > 1e-12 * sigma0) {
    CmaEs es(best_z, restart_sigma, cfg.lambda);
    const int mu = es.state().mu;
    const int lambda = es.state().lambda;
    bool exhausted = false;

    for (; gens_done < cfg.max_generations; ++gens_done) {
      // assemble the generation from feasible draws, resampling infeasible
      // candidates (first-come, so feasibility never biases selection)
      std::vector<ScoredCandidate> scored;
      std::vector<ScoredCandidate> spare_infeasible;
      for (int attempt = 0;
           attempt < 10 && static_cast<int>(scored.size()) < lambda; ++attempt) {
        std::vector<Eigen::VectorXd> offspring;
        try {
          offspring = es.ask(rng);
        } catch (const FactorizationError&) {
          es.repair();
          offspring = es.ask(rng);
        }

        std::vector<Eigen::VectorXd> points;
        std::vector<bool> feasible;
        points.reserve(offspring.size());
        for (const auto& z : offspring) {
          points.push_back(embed_active(space, start, z));
          feasible.push_back(space.in_support(points.back()));
        }

        // one classifier round trip per sampled batch
        std::vector<Eigen::VectorXd> query;
        for (std::size_t j = 0; j < points.size(); ++j)
          if (feasible[j]) query.push_back(points[j]);
        const auto results = classifier(query);
        if (results.size() != query.size())
          throw std::runtime_error("attack: classifier returned wrong batch size");

        outcome.evals_used += static_cast<std::int64_t>(offspring.size());

        std::size_t r = 0;
        for (std::size_t j = 0; j < points.size(); ++j) {
          if (!feasible[j]) {
            spare_infeasible.push_back(
                {offspring[j], std::numeric_limits<double>::infinity()});
            continue;
          }
          const ClassifyResult& res = results[r++];
          const auto [f_prob, flipped] = fitness(res, true_label, true);
          // rank by the strongest competitor class instead of f_prob directly:
          // identical ordering in exact arithmetic, but still informative when
          // the true-class probability saturates to 1.0 in double precision
          double p_other = 0.0;
          for (std::size_t c = 0; c < res.probs.size(); ++c)
            if (static_cast<int>(c) != true_label)
              p_other = std::max(p_other, res.probs[c]);
          const double f = -p_other;
          (void)f_prob;
          if (flipped) {
            outcome.adversarial = points[j];
            outcome.iterations_used = gens_done;
            outcome.distance = active_distance(space, start, points[j]);
            return outcome;
          }
          if (f < best_fitness) {
            best_fitness = f;
            best_z = offspring[j];
          }
          if (static_cast<int>(scored.size()) < lambda)
            scored.push_back({offspring[j], f});
        }
      }
      if (static_cast<int>(scored.size()) < mu) {
        // the strategy pressed against the support boundary and can no longer
        // draw a feasible generation; restart around the best feasible point
        // with a smaller step size instead of giving up
        exhausted = true;
        break;
      }
      // short generation: pad with infeasible draws ranked last
      for (std::size_t j = 0;
           static_cast<int>(scored.size()) < lambda && j < spare_infeasible.size();
           ++j)
        scored.push_back(spare_infeasible[j]);

      std::stable_sort(scored.begin(), scored.end(),
                       [](const ScoredCandidate& a, const ScoredCandidate& b) {
                         return a.fitness < b.fitness;
                       });
      es.tell(scored);
      outcome.iterations_used = gens_done + 1;
    }
    if (!exhausted) break;
    outcome.iterations_used = gens_done;
    restart_sigma *= 0.5;
  }
  return outcome;
}

std::string outcome_to_json(const AttackOutcome& outcome) {
  nlohmann::json j;
  j["start"] = std::vector<double>(outcome.start.data(),
                                   outcome.start.data() + outcome.start.size());
  if (outcome.adversarial) {
    j["adversarial"] = std::vector<double>(
        outcome.adversarial->data(),
        outcome.adversarial->data() + outcome.adversarial->size());
  } else {
    j["adversarial"] = nullptr;
  }
  j["iterations"] = outcome.iterations_used;
  j["evals"] = outcome.evals_used;
  if (outcome.distance)
    j["distance"] = *outcome.distance;
  else
    j["distance"] = nullptr;
  j["distance_kind"] = outcome.distance_kind == DistanceKind::Euclidean
                           ? "euclidean"
                           : "range_normalized_percent";
  j["seed"] = outcome.seed;
  return j.dump();
}

AttackOutcome outcome_from_json(const std::string& line) {
  const nlohmann::json j = nlohmann::json::parse(line);
  AttackOutcome outcome;
  const auto start = j.at("start").get<std::vector<double>>();
  outcome.start = Eigen::Map<const Eigen::VectorXd>(start.data(), start.size());
  if (!j.at("adversarial").is_null()) {
    const auto adv = j.at("adversarial").get<std::vector<double>>();
    outcome.adversarial = Eigen::Map<const Eigen::VectorXd>(adv.data(), adv.size());
  }
  outcome.iterations_used = j.at("iterations").get<std::int64_t>();
  outcome.evals_used = j.at("evals").get<std::int64_t>();
  if (!j.at("distance").is_null()) outcome.distance = j.at("distance").get<double>();
  outcome.distance_kind = j.at("distance_kind").get<std::string>() == "euclidean"
                              ? DistanceKind::Euclidean
                              : DistanceKind::RangeNormalizedPercent;
  outcome.seed = j.at("seed").get<std::uint64_t>();
  return outcome;
}

}  // namespace indist
