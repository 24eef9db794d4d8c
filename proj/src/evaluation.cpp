#include "indist/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "indist/parallel.hpp"

namespace indist {

namespace {

std::pair<double, double> mean_std(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= values.size();
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= values.size();
  return {mean, std::sqrt(var)};
}

BatchClassifier mlp_classifier(const MlpModel& model) {
  return [&model](const std::vector<Eigen::VectorXd>& points) {
    std::vector<ClassifyResult> out;
    out.reserve(points.size());
    for (const auto& p : points) {
      const Prediction pred = forward(model, p);
      out.push_back({pred.label, {pred.probs[0], pred.probs[1]}});
    }
    return out;
  };
}

}  // namespace

SearchSpace parametric_search_space(const UniformPairSupport& support) {
  SearchSpace space;
  space.active.assign(support.dim, true);
  space.ranges.reserve(support.dim);
  // both class intervals have equal width in this data family; sigma0
  // scaling uses the start point's own class interval width
  const double width0 = support.class0_hi - support.class0_lo;
  for (int i = 0; i < support.dim; ++i)
    space.ranges.push_back({support.class0_lo, support.class0_lo + width0});
  space.distance_kind = DistanceKind::Euclidean;
  space.in_support = [support](const Eigen::VectorXd& x) {
    return membership(support, x) != Membership::Outside;
  };
  return space;
}

AttackRateReport attack_rate(const MlpModel& model, const UniformPairSupport& support,
                             const LabeledDataset& test_pool, const EvalConfig& cfg,
                             std::uint64_t seed) {
  if (cfg.n_starts < 1 || cfg.n_repeats < 1)
    throw std::invalid_argument("attack_rate: bad config");
  const SearchSpace space = parametric_search_space(support);
  const BatchClassifier classifier = mlp_classifier(model);

  AttackRateReport report;
  report.n_starts = cfg.n_starts;
  report.n_repeats = cfg.n_repeats;

  std::vector<double> success_distances;

  for (int repeat = 0; repeat < cfg.n_repeats; ++repeat) {
    const std::uint64_t repeat_seed = derive_seed(seed, repeat);

    // assemble n_starts correctly classified points, pool first then fresh
    // draws from the support
    std::vector<Eigen::VectorXd> starts;
    std::vector<int> labels;
    Rng pick(derive_seed(repeat_seed, "start-pick"));
    const std::size_t pool_n = test_pool.points.size();
    std::vector<std::size_t> pool_order(pool_n);
    for (std::size_t i = 0; i < pool_n; ++i) pool_order[i] = i;
    for (std::size_t i = pool_n; i > 1; --i)
      std::swap(pool_order[i - 1], pool_order[pick.next_below(i)]);

    std::size_t pool_pos = 0;
    Rng fresh(derive_seed(repeat_seed, "start-fresh"));
    std::int64_t draws = 0;
    const std::int64_t max_draws = 100LL * cfg.n_starts;
    while (static_cast<int>(starts.size()) < cfg.n_starts) {
      Eigen::VectorXd candidate;
      int label;
      if (pool_pos < pool_n) {
        candidate = test_pool.points[pool_order[pool_pos]];
        label = test_pool.labels[pool_order[pool_pos]];
        ++pool_pos;
      } else {
        if (++draws > max_draws)
          throw std::runtime_error(
              "attack_rate: could not assemble enough correctly classified "
              "starts (model accuracy too low)");
        label = static_cast<int>(fresh.next_below(2));
        const double lo = label == 0 ? support.class0_lo : support.class1_lo;
        const double hi = label == 0 ? support.class0_hi : support.class1_hi;
        candidate.resize(support.dim);
        for (int d = 0; d < support.dim; ++d) candidate[d] = fresh.uniform(lo, hi);
      }
      if (forward(model, candidate).label == label) {
        starts.push_back(std::move(candidate));
        labels.push_back(label);
      }
    }

    std::vector<AttackOutcome> outcomes(starts.size());
    parallel_for(starts.size(), cfg.jobs, [&](std::size_t i) {
      outcomes[i] = attack(classifier, labels[i], starts[i], space, cfg.attack,
                           derive_seed(repeat_seed, 1000 + i));
    });

    int successes = 0;
    for (auto& outcome : outcomes) {
      if (outcome.success()) {
        ++successes;
        success_distances.push_back(*outcome.distance);
      }
      report.outcomes.push_back(std::move(outcome));
    }
    report.per_repeat_rates.push_back(static_cast<double>(successes) / cfg.n_starts);
  }

  std::tie(report.mean_rate, report.std_rate) = mean_std(report.per_repeat_rates);
  if (!success_distances.empty()) {
    const auto [mean_d, std_d] = mean_std(success_distances);
    report.mean_distance = mean_d;
    report.std_distance = std_d;
  }
  return report;
}

std::vector<SweepRow> scaling_sweep(const SweepConfig& cfg, std::uint64_t seed) {
  if (cfg.dims.empty() || cfg.dataset_sizes.empty())
    throw std::invalid_argument("scaling_sweep: empty dim or size list");
  std::vector<SweepRow> rows;
  for (int dim : cfg.dims) {
    for (std::int64_t size : cfg.dataset_sizes) {
      for (int repeat = 0; repeat < cfg.repeats; ++repeat) {
        const std::uint64_t cell_seed =
            derive_seed(seed, "sweep-" + std::to_string(dim) + "-" +
                                  std::to_string(size) + "-" + std::to_string(repeat));
        UniformPairSupport support;
        support.dim = dim;
        const LabeledDataset train_data = sample_dataset(
            support, static_cast<int>(size / 2), derive_seed(cell_seed, "data"));
        const MlpModel init = mlp_init(dim, derive_seed(cell_seed, "init"));
        TrainConfig train_cfg = cfg.train;
        train_cfg.sgd_seed = derive_seed(cell_seed, "sgd");
        const auto [model, losses] = train(init, train_data, train_cfg);

        const LabeledDataset heldout =
            sample_dataset(support, static_cast<int>(cfg.heldout_per_class),
                           derive_seed(cell_seed, "heldout"));
        SweepRow row;
        row.dim = dim;
        row.size = size;
        row.repeat = repeat;
        row.accuracy = accuracy(model, heldout);
        if (row.accuracy <= cfg.accuracy_gate) {
          row.skipped = true;
        } else {
          const AttackRateReport report = attack_rate(
              model, support, heldout, cfg.eval, derive_seed(cell_seed, "attack"));
          row.mean_rate = report.mean_rate;
          row.mean_distance = report.mean_distance;
        }
        rows.push_back(row);
      }
    }
  }
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_sweep_csv: cannot open " + path);
  out << "dim,size,repeat,accuracy,mean_rate,mean_distance,skipped\n";
  out.precision(17);
  for (const auto& row : rows) {
    out << row.dim << "," << row.size << "," << row.repeat << "," << row.accuracy
        << "," << row.mean_rate << ",";
    if (row.mean_distance) out << *row.mean_distance;
    out << "," << (row.skipped ? 1 : 0) << "\n";
  }
}

ChurchWindowGrid church_window(const MlpModel& model, const UniformPairSupport& support,
                               const Eigen::VectorXd& start,
                               const Eigen::VectorXd& adversarial,
                               double adv_halfwidth, double orth_halfwidth,
                               int rows, int cols, std::uint64_t orth_seed) {
  if (rows < 1 || cols < 1 || rows % 2 == 0 || cols % 2 == 0)
    throw std::invalid_argument("church_window: steps must be odd and positive");
  const Eigen::VectorXd delta = adversarial - start;
  const double delta_norm = delta.norm();
  if (delta_norm < 1e-12)
    throw std::invalid_argument("church_window: adversarial equals start");
  const Membership start_class = membership(support, start);
  if (start_class == Membership::Outside)
    throw std::invalid_argument("church_window: start is out of support");
  const int true_label = start_class == Membership::Class0 ? 0 : 1;
  if (forward(model, start).label != true_label)
    throw std::invalid_argument("church_window: start is misclassified");

  ChurchWindowGrid grid;
  grid.start = start;
  grid.adv_dir = delta / delta_norm;

  // random direction orthogonalized against adv_dir
  Rng rng(derive_seed(orth_seed, "orth"));
  Eigen::VectorXd orth(start.size());
  for (;;) {
    for (int i = 0; i < orth.size(); ++i) orth[i] = rng.normal();
    orth -= orth.dot(grid.adv_dir) * grid.adv_dir;
    if (orth.norm() >= 1e-8) break;
  }
  grid.orth_dir = orth / orth.norm();

  grid.adv_halfwidth = adv_halfwidth;
  grid.orth_halfwidth = orth_halfwidth;
  grid.rows = rows;
  grid.cols = cols;
  grid.cells.assign(rows, std::vector<CellLabel>(cols));

  for (int r = 0; r < rows; ++r) {
    const double beta =
        rows == 1 ? 0.0 : orth_halfwidth * (2.0 * r / (rows - 1) - 1.0);
    for (int c = 0; c < cols; ++c) {
      const double alpha =
          cols == 1 ? 0.0 : adv_halfwidth * (2.0 * c / (cols - 1) - 1.0);
      const Eigen::VectorXd point =
          start + alpha * grid.adv_dir + beta * grid.orth_dir;
      if (membership(support, point) == Membership::Outside) {
        grid.cells[r][c] = CellLabel::OutOfDist;
      } else {
        grid.cells[r][c] = forward(model, point).label == true_label
                               ? CellLabel::Correct
                               : CellLabel::AdversarialInDist;
      }
    }
  }
  return grid;
}

ChurchWindowGrid church_window(const MlpModel& model, const UniformPairSupport& support,
                               const Eigen::VectorXd& start,
                               const Eigen::VectorXd& adversarial,
                               std::uint64_t orth_seed) {
  // 1.5x the attack displacement reaches past the support boundary while the
  // 241-column resolution still resolves adversarial bands ~1% of the
  // displacement wide
  const double span = 1.5 * (adversarial - start).norm();
  return church_window(model, support, start, adversarial, span, span, 101, 241,
                       orth_seed);
}

bool band_pattern_ok(const ChurchWindowGrid& grid) {
  const int center_row = grid.rows / 2;
  const int center_col = grid.cols / 2;
  const auto& row = grid.cells[center_row];
  // scan outward from the start toward the adversarial point
  int phase = 0;  // 0 = Correct band, 1 = AdversarialInDist band, 2 = OutOfDist
  if (row[center_col] != CellLabel::Correct) return false;
  for (int c = center_col; c < grid.cols; ++c) {
    const CellLabel label = row[c];
    const int want = label == CellLabel::Correct              ? 0
                     : label == CellLabel::AdversarialInDist ? 1
                                                              : 2;
    if (want < phase) return false;  // label reappeared after its band ended
    if (want > phase + 1 && want == 2 && phase == 0) {
      // jumped straight from Correct to OutOfDist, no adversarial band
      return false;
    }
    phase = std::max(phase, want);
  }
  return phase == 2;  // all three bands present
}

void render_grid(const ChurchWindowGrid& grid, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("render_grid: cannot open " + path);
  out << "P3\n" << grid.cols << " " << grid.rows << "\n255\n";
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      switch (grid.cells[r][c]) {
        case CellLabel::Correct:
          out << "255 255 255";
          break;
        case CellLabel::AdversarialInDist:
          out << "255 0 0";
          break;
        case CellLabel::OutOfDist:
          out << "0 0 0";
          break;
      }
      out << (c + 1 == grid.cols ? "\n" : " ");
    }
  }
  out.close();

  nlohmann::json meta;
  meta["rows"] = grid.rows;
  meta["cols"] = grid.cols;
  meta["adv_halfwidth"] = grid.adv_halfwidth;
  meta["orth_halfwidth"] = grid.orth_halfwidth;
  meta["start"] = std::vector<double>(grid.start.data(),
                                      grid.start.data() + grid.start.size());
  meta["adv_dir"] = std::vector<double>(grid.adv_dir.data(),
                                        grid.adv_dir.data() + grid.adv_dir.size());
  meta["orth_dir"] = std::vector<double>(
      grid.orth_dir.data(), grid.orth_dir.data() + grid.orth_dir.size());
  std::ofstream side(path + ".json");
  if (!side) throw std::runtime_error("render_grid: cannot open " + path + ".json");
  side << meta.dump(2) << "\n";
}

std::vector<std::vector<CellLabel>> read_grid_ppm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_grid_ppm: cannot open " + path);
  std::string magic;
  int cols = 0, rows = 0, maxval = 0;
  in >> magic >> cols >> rows >> maxval;
  if (magic != "P3" || cols < 1 || rows < 1)
    throw std::runtime_error("read_grid_ppm: not a plain PPM: " + path);
  std::vector<std::vector<CellLabel>> cells(rows, std::vector<CellLabel>(cols));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      int red = 0, green = 0, blue = 0;
      in >> red >> green >> blue;
      if (red == 255 && green == 255 && blue == 255)
        cells[r][c] = CellLabel::Correct;
      else if (red == 255 && green == 0 && blue == 0)
        cells[r][c] = CellLabel::AdversarialInDist;
      else if (red == 0 && green == 0 && blue == 0)
        cells[r][c] = CellLabel::OutOfDist;
      else
        throw std::runtime_error("read_grid_ppm: unexpected pixel color");
    }
  }
  return cells;
}

MlpModel augment_and_retrain(const MlpModel& model, const LabeledDataset& data,
                             const std::vector<Eigen::VectorXd>& adversarial_points,
                             const std::vector<int>& adversarial_labels,
                             const TrainConfig& cfg) {
  if (adversarial_points.size() != adversarial_labels.size())
    throw std::invalid_argument("augment_and_retrain: points/labels length mismatch");
  LabeledDataset augmented = data;
  for (std::size_t i = 0; i < adversarial_points.size(); ++i) {
    if (adversarial_points[i].size() != data.support.dim)
      throw std::invalid_argument("augment_and_retrain: dimension mismatch");
    augmented.points.push_back(adversarial_points[i]);
    augmented.labels.push_back(adversarial_labels[i]);
  }
  // train()'s per-epoch shuffle under cfg.sgd_seed spreads the appended
  // points across batches; with zero adversarial points this is exactly a
  // plain retrain from the same init
  const MlpModel init = mlp_init(model.input_dim(), model.init_seed);
  return train(init, augmented, cfg).first;
}

}  // namespace indist
