#include "indist/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "indist/ablation.hpp"
#include "indist/evaluation.hpp"
#include "indist/manifest.hpp"
#include "indist/oracle.hpp"
#include "indist/parallel.hpp"
#include "indist/scene.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace indist {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBadConfig = 3;
constexpr int kExitMissingInput = 4;

struct CliError : std::runtime_error {
  CliError(int code, const std::string& msg) : std::runtime_error(msg), code(code) {}
  int code;
};

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw CliError(kExitMissingInput, "config file not found: " + path);
  try {
    json cfg;
    in >> cfg;
    return cfg;
  } catch (const json::exception& e) {
    throw CliError(kExitBadConfig, "malformed config " + path + ": " + e.what());
  }
}

// config file supplies defaults; explicit flags win
template <typename T>
void apply_cfg(const json& cfg, const std::string& key, const CLI::Option* opt,
               T& value) {
  if (opt != nullptr && opt->count() > 0) return;
  if (!cfg.contains(key)) return;
  try {
    value = cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw CliError(kExitBadConfig, "config field '" + key + "': " + e.what());
  }
}

void require_file(const std::string& path) {
  if (!fs::exists(path))
    throw CliError(kExitMissingInput, "missing input file: " + path);
}

fs::path prepare_run_dir(const std::string& out) {
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

class ManifestScope {
 public:
  ManifestScope(const fs::path& run_dir, std::string command, std::uint64_t seed)
      : run_dir_(run_dir), start_(std::chrono::steady_clock::now()) {
    manifest_.command = std::move(command);
    manifest_.master_seed = seed;
  }

  json& config() { return manifest_.config; }

  void finish() {
    manifest_.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    manifest_write(manifest_, (run_dir_ / "manifest.json").string());
  }

 private:
  fs::path run_dir_;
  RunManifest manifest_;
  std::chrono::steady_clock::time_point start_;
};

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "run";
  std::uint64_t seed = 0;
  int jobs = default_jobs();
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "JSON config file with defaults");
  cmd->add_option("--out", opts.out_dir, "run directory for outputs");
  cmd->add_option("--seed", opts.seed, "master seed");
  cmd->add_option("--jobs", opts.jobs,
                  "parallel workers (INDIST_ADV_JOBS or logical cores)");
}

UniformPairSupport support_from(const json& cfg, int dim) {
  UniformPairSupport support;
  support.dim = dim;
  if (cfg.contains("ranges")) {
    const auto& r = cfg.at("ranges");
    support.class0_lo = r.at(0).at(0).get<double>();
    support.class0_hi = r.at(0).at(1).get<double>();
    support.class1_lo = r.at(1).at(0).get<double>();
    support.class1_hi = r.at(1).at(1).get<double>();
  }
  return support;
}

// ---- subcommand bodies ----

int run_gen_data(const CommonOpts& opts, const json& cfg, int dim, int n_per_class) {
  const fs::path run_dir = prepare_run_dir(opts.out_dir);
  ManifestScope manifest(run_dir, "gen-data", opts.seed);

  UniformPairSupport support = support_from(cfg, dim);
  support.validate();
  const std::uint64_t data_seed = derive_seed(opts.seed, "data");
  const LabeledDataset data = sample_dataset(support, n_per_class, data_seed);
  const std::string path = (run_dir / "dataset.jsonl").string();
  write_dataset(data, path);

  manifest.config() = {{"dim", dim},
                     {"n_per_class", n_per_class},
                     {"ranges",
                      {{support.class0_lo, support.class0_hi},
                       {support.class1_lo, support.class1_hi}}},
                     {"data_seed", data_seed}};
  manifest.finish();
  std::cout << "wrote " << path << " (" << data.points.size() << " points)\n";
  return kExitOk;
}

int run_train(const CommonOpts& opts, const std::string& data_path,
              const TrainConfig& cfg_in, std::uint64_t init_seed_in,
              bool init_seed_given) {
  require_file(data_path);
  const fs::path run_dir = prepare_run_dir(opts.out_dir);
  ManifestScope manifest(run_dir, "train", opts.seed);

  const LabeledDataset data = read_dataset(data_path);
  const std::uint64_t init_seed =
      init_seed_given ? init_seed_in : derive_seed(opts.seed, "init");
  TrainConfig cfg = cfg_in;
  if (cfg.sgd_seed == 0) cfg.sgd_seed = derive_seed(opts.seed, "sgd");

  const MlpModel init = mlp_init(data.support.dim, init_seed);
  const auto [model, losses] = train(init, data, cfg);
  save_model(model, (run_dir / "model.json").string());

  std::ofstream loss_out(run_dir / "loss.csv");
  loss_out << "epoch,loss\n";
  loss_out.precision(17);
  for (std::size_t e = 0; e < losses.size(); ++e)
    loss_out << e << "," << losses[e] << "\n";

  const LabeledDataset heldout = sample_dataset(
      data.support, 1000, derive_seed(opts.seed, "heldout"));
  const double acc = accuracy(model, heldout);

  manifest.config() = {{"data", data_path},
                     {"learning_rate", cfg.learning_rate},
                     {"epochs", cfg.epochs},
                     {"batch_size", cfg.batch_size},
                     {"init_seed", init_seed},
                     {"sgd_seed", cfg.sgd_seed},
                     {"heldout_accuracy", acc}};
  manifest.finish();
  std::cout << "trained model, heldout accuracy " << acc << "\n";
  return kExitOk;
}

BatchClassifier model_classifier(const MlpModel& model) {
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

int run_attack(const CommonOpts& opts, const std::string& model_path,
               const std::string& data_path, int n_attacks,
               const AttackConfig& attack_cfg) {
  require_file(model_path);
  require_file(data_path);
  const fs::path run_dir = prepare_run_dir(opts.out_dir);
  ManifestScope manifest(run_dir, "attack", opts.seed);

  const MlpModel model = load_model(model_path);
  const LabeledDataset pool = read_dataset(data_path);
  const SearchSpace space = parametric_search_space(pool.support);
  const BatchClassifier classifier = model_classifier(model);

  // correctly classified starts from the pool, in pool order
  std::vector<Eigen::VectorXd> starts;
  std::vector<int> labels;
  for (std::size_t i = 0; i < pool.points.size() &&
                          static_cast<int>(starts.size()) < n_attacks;
       ++i) {
    if (forward(model, pool.points[i]).label == pool.labels[i]) {
      starts.push_back(pool.points[i]);
      labels.push_back(pool.labels[i]);
    }
  }
  if (static_cast<int>(starts.size()) < n_attacks)
    throw CliError(kExitFailure,
                   "pool has too few correctly classified points for " +
                       std::to_string(n_attacks) + " attacks");

  std::vector<AttackOutcome> outcomes(starts.size());
  parallel_for(starts.size(), opts.jobs, [&](std::size_t i) {
    outcomes[i] = attack(classifier, labels[i], starts[i], space, attack_cfg,
                         derive_seed(opts.seed, 1000 + i));
  });

  const std::string path = (run_dir / "outcomes.jsonl").string();
  std::ofstream out(path);
  int successes = 0;
  for (const auto& outcome : outcomes) {
    out << outcome_to_json(outcome) << "\n";
    if (outcome.success()) ++successes;
  }

  manifest.config() = {{"model", model_path},
                     {"data", data_path},
                     {"n_attacks", n_attacks},
                     {"max_generations", attack_cfg.max_generations},
                     {"sigma0", attack_cfg.sigma0}};
  manifest.finish();
  std::cout << successes << "/" << starts.size() << " attacks succeeded, wrote "
            << path << "\n";
  return kExitOk;
}

json report_to_json(const AttackRateReport& report) {
  json j;
  j["n_starts"] = report.n_starts;
  j["n_repeats"] = report.n_repeats;
  j["per_repeat_rates"] = report.per_repeat_rates;
  j["mean_rate"] = report.mean_rate;
  j["std_rate"] = report.std_rate;
  j["mean_distance"] =
      report.mean_distance ? json(*report.mean_distance) : json(nullptr);
  j["std_distance"] =
      report.std_distance ? json(*report.std_distance) : json(nullptr);
  return j;
}

int run_attack_rate(const CommonOpts& opts, const std::string& model_path,
                    const std::string& data_path, const EvalConfig& eval_cfg) {
  require_file(model_path);
  require_file(data_path);
  const fs::path run_dir = prepare_run_dir(opts.out_dir);
  ManifestScope manifest(run_dir, "attack-rate", opts.seed);

  const MlpModel model = load_model(model_path);
  const LabeledDataset pool = read_dataset(data_path);
  const AttackRateReport report =
      attack_rate(model, pool.support, pool, eval_cfg,
                  derive_seed(opts.seed, "attack-rate"));

  std::ofstream out(run_dir / "report.json");
  out << report_to_json(report).dump(2) << "\n";
  std::ofstream lines(run_dir / "outcomes.jsonl");
  for (const auto& outcome : report.outcomes)
    lines << outcome_to_json(outcome) << "\n";

  manifest.config() = {{"model", model_path},
                     {"data", data_path},
                     {"n_starts", eval_cfg.n_starts},
                     {"n_repeats", eval_cfg.n_repeats},
                     {"max_generations", eval_cfg.attack.max_generations},
                     {"sigma0", eval_cfg.attack.sigma0}};
  manifest.finish();
  std::cout << "mean attack rate " << report.mean_rate << " +- "
            << report.std_rate << "\n";
  return kExitOk;
}

int run_sweep(const CommonOpts& opts, SweepConfig cfg) {
  const fs::path run_dir = prepare_run_dir(opts.out_dir);
  ManifestScope manifest(run_dir, "sweep", opts.seed);
  cfg.eval.jobs = opts.jobs;

  const auto rows = scaling_sweep(cfg, derive_seed(opts.seed, "sweep"));
  const std::string path = (run_dir / "sweep.csv").string();
  write_sweep_csv(rows, path);

  manifest.config() = {{"dims", cfg.dims},
                     {"sizes", cfg.dataset_sizes},
                     {"repeats", cfg.repeats},
                     {"n_starts", cfg.eval.n_starts},
                     {"n_repeats", cfg.eval.n_repeats},
                     {"max_generations", cfg.eval.attack.max_generations}};
  manifest.finish();
  std::cout << "wrote " << path << " (" << rows.size() << " rows)\n";
  return kExitOk;
}

int run_church_window(const CommonOpts& opts, const std::string& model_path,
                      const std::string& data_path, int steps,
                      const AttackConfig& attack_cfg) {
  require_file(model_path);
  require_file(data_path);
  const fs::path run_dir = prepare_run_dir(opts.out_dir);
  ManifestScope manifest(run_dir, "church-window", opts.seed);

  const MlpModel model = load_model(model_path);
  const LabeledDataset pool = read_dataset(data_path);
  const SearchSpace space = parametric_search_space(pool.support);
  const BatchClassifier classifier = model_classifier(model);

  // first correctly classified pool point with a successful attack
  std::optional<AttackOutcome> found;
  for (std::size_t i = 0; i < pool.points.size(); ++i) {
    if (forward(model, pool.points[i]).label != pool.labels[i]) continue;
    AttackOutcome outcome =
        attack(classifier, pool.labels[i], pool.points[i], space, attack_cfg,
               derive_seed(opts.seed, 1000 + i));
    if (outcome.success()) {
      found = std::move(outcome);
      break;
    }
  }
  if (!found)
    throw CliError(kExitFailure, "no successful attack found for a grid");

  const double span = 1.5 * (*found->adversarial - found->start).norm();
  const ChurchWindowGrid grid =
      church_window(model, pool.support, found->start, *found->adversarial, span,
                    span, steps, steps, derive_seed(opts.seed, "orth"));
  const std::string path = (run_dir / "grid.ppm").string();
  render_grid(grid, path);

  manifest.config() = {{"model", model_path},
                     {"data", data_path},
                     {"steps", steps},
                     {"max_generations", attack_cfg.max_generations},
                     {"band_ok", band_pattern_ok(grid)}};
  manifest.finish();
  std::cout << "wrote " << path << " (band pattern "
            << (band_pattern_ok(grid) ? "ok" : "not clean") << ")\n";
  return kExitOk;
}

int run_robust_train(const CommonOpts& opts, int dim, std::int64_t dataset_size,
                     int n_adversarial, const TrainConfig& train_cfg,
                     EvalConfig eval_cfg) {
  const fs::path run_dir = prepare_run_dir(opts.out_dir);
  ManifestScope manifest(run_dir, "robust-train", opts.seed);
  eval_cfg.jobs = opts.jobs;

  UniformPairSupport support;
  support.dim = dim;
  const LabeledDataset data = sample_dataset(
      support, static_cast<int>(dataset_size / 2), derive_seed(opts.seed, "data"));
  const MlpModel init = mlp_init(dim, derive_seed(opts.seed, "init"));
  TrainConfig cfg = train_cfg;
  cfg.sgd_seed = derive_seed(opts.seed, "sgd");
  const MlpModel model = train(init, data, cfg).first;

  const LabeledDataset heldout =
      sample_dataset(support, 1000, derive_seed(opts.seed, "heldout"));
  const AttackRateReport before = attack_rate(
      model, support, heldout, eval_cfg, derive_seed(opts.seed, "attack-before"));

  // harvest adversarial points for augmentation
  const SearchSpace space = parametric_search_space(support);
  const BatchClassifier classifier = model_classifier(model);
  std::vector<Eigen::VectorXd> adv_points;
  std::vector<int> adv_labels;
  Rng fresh(derive_seed(opts.seed, "harvest"));
  std::int64_t attempts = 0;
  while (static_cast<int>(adv_points.size()) < n_adversarial) {
    if (++attempts > 100LL * n_adversarial)
      throw CliError(kExitFailure, "could not harvest enough adversarial points");
    const int label = static_cast<int>(fresh.next_below(2));
    const double lo = label == 0 ? support.class0_lo : support.class1_lo;
    const double hi = label == 0 ? support.class0_hi : support.class1_hi;
    Eigen::VectorXd start(dim);
    for (int d = 0; d < dim; ++d) start[d] = fresh.uniform(lo, hi);
    if (forward(model, start).label != label) continue;
    const AttackOutcome outcome =
        attack(classifier, label, start, space, eval_cfg.attack,
               derive_seed(opts.seed, 5000 + attempts));
    if (outcome.success()) {
      adv_points.push_back(*outcome.adversarial);
      adv_labels.push_back(label);  // ground-truth support class
    }
  }

  const MlpModel retrained =
      augment_and_retrain(model, data, adv_points, adv_labels, cfg);
  save_model(retrained, (run_dir / "model_augmented.json").string());
  const AttackRateReport after =
      attack_rate(retrained, support, heldout, eval_cfg,
                  derive_seed(opts.seed, "attack-after"));

  json report;
  report["before"] = report_to_json(before);
  report["after"] = report_to_json(after);
  report["augmented_accuracy"] = accuracy(retrained, heldout);
  std::ofstream out(run_dir / "report.json");
  out << report.dump(2) << "\n";

  manifest.config() = {{"dim", dim},
                     {"dataset_size", dataset_size},
                     {"n_adversarial", n_adversarial},
                     {"n_starts", eval_cfg.n_starts},
                     {"n_repeats", eval_cfg.n_repeats}};
  manifest.finish();
  std::cout << "attack rate before " << before.mean_rate << ", after "
            << after.mean_rate << "\n";
  return kExitOk;
}

int run_ablate(const CommonOpts& opts, const std::string& varied, int dim,
               std::int64_t dataset_size, int n_trials,
               const TrainConfig& train_cfg, EvalConfig eval_cfg) {
  const fs::path run_dir = prepare_run_dir(opts.out_dir);
  ManifestScope manifest(run_dir, "ablate", opts.seed);
  eval_cfg.jobs = opts.jobs;

  AblationSpec spec;
  spec.base.dim = dim;
  spec.base.dataset_size = dataset_size;
  spec.base.data_seed = derive_seed(opts.seed, "data");
  spec.base.init_seed = derive_seed(opts.seed, "init");
  spec.base.sgd_seed = derive_seed(opts.seed, "sgd");
  spec.base.cma_seed = derive_seed(opts.seed, "cma");
  spec.n_trials = n_trials;
  if (varied == "cma")
    spec.varied = VariedSource::CmaSearch;
  else if (varied == "sgd")
    spec.varied = VariedSource::Sgd;
  else if (varied == "sampling")
    spec.varied = VariedSource::SamplingBias;
  else if (varied == "init")
    spec.varied = VariedSource::ModelInit;
  else
    throw CliError(kExitUsage, "unknown varied source: " + varied);

  const AblationResult result = run_ablation(spec, train_cfg, eval_cfg);
  write_ablation_json(result, (run_dir / "ablation.json").string());

  manifest.config() = {{"varied", varied},
                     {"dim", dim},
                     {"dataset_size", dataset_size},
                     {"n_trials", n_trials}};
  manifest.finish();
  std::cout << varied_source_name(spec.varied) << " mean rate " << result.mean
            << " +- " << result.std_dev << "\n";
  return kExitOk;
}

int run_sample_scenes(const CommonOpts& opts, int count) {
  const fs::path run_dir = prepare_run_dir(opts.out_dir);
  ManifestScope manifest(run_dir, "sample-scenes", opts.seed);

  Rng rng(derive_seed(opts.seed, "scenes"));
  const std::string path = (run_dir / "scenes.jsonl").string();
  std::ofstream out(path);
  out.precision(17);
  for (int i = 0; i < count; ++i) {
    const SceneVector scene = sample_scene(rng);
    const Eigen::VectorXd flat = scene.flat();
    json j;
    j["n_lights"] = scene.lights.size();
    j["flat"] = std::vector<double>(flat.data(), flat.data() + flat.size());
    out << j.dump() << "\n";
  }

  manifest.config() = {{"count", count}};
  manifest.finish();
  std::cout << "wrote " << path << "\n";
  return kExitOk;
}

int run_attack_scene(const CommonOpts& opts, const std::string& oracle_cmd,
                     std::uint64_t oracle_seed, double temperature,
                     const std::string& block_name, int n_lights, int n_starts,
                     AttackConfig attack_cfg) {
  const fs::path run_dir = prepare_run_dir(opts.out_dir);
  ManifestScope manifest(run_dir, "attack-scene", opts.seed);

  int block = 0;
  if (block_name == "camera") {
    block = 0;
  } else if (block_name.rfind("light", 0) == 0) {
    block = std::stoi(block_name.substr(5)) + 1;
  } else {
    throw CliError(kExitUsage, "unknown block: " + block_name);
  }
  const SearchSpace space = scene_search_space(n_lights, block);

  std::optional<SyntheticOracle> builtin;
  std::optional<OracleProcess> process;
  BatchClassifier classifier;
  if (oracle_cmd.empty()) {
    builtin.emplace(oracle_seed, temperature);
    classifier = [&builtin, n_lights](const std::vector<Eigen::VectorXd>& flats) {
      return builtin->classify_batch(flats, n_lights);
    };
  } else {
    process.emplace(oracle_cmd);
    classifier = [&process, n_lights](const std::vector<Eigen::VectorXd>& flats) {
      return process->classify_batch(flats, n_lights);
    };
  }

  // correctly-classified starts: the oracle defines the label, so any
  // in-support scene qualifies; its predicted label is the true label
  Rng rng(derive_seed(opts.seed, "scene-starts"));
  const std::string path = (run_dir / "outcomes.jsonl").string();
  std::ofstream out(path);
  int successes = 0;
  std::vector<double> distances;
  for (int i = 0; i < n_starts; ++i) {
    const SceneVector scene = sample_scene(rng, n_lights);
    const Eigen::VectorXd start = scene.flat();
    const int label = classifier({start}).at(0).label;
    const AttackOutcome outcome = attack(classifier, label, start, space,
                                         attack_cfg, derive_seed(opts.seed, i));
    out << outcome_to_json(outcome) << "\n";
    if (outcome.success()) {
      ++successes;
      distances.push_back(*outcome.distance);
    }
  }

  json report;
  report["n_starts"] = n_starts;
  report["successes"] = successes;
  report["rate"] = static_cast<double>(successes) / n_starts;
  if (!distances.empty()) {
    double mean = 0.0;
    for (double d : distances) mean += d;
    report["mean_distance_percent"] = mean / distances.size();
  }
  std::ofstream rep(run_dir / "report.json");
  rep << report.dump(2) << "\n";

  manifest.config() = {{"oracle_cmd", oracle_cmd},
                     {"oracle_seed", oracle_seed},
                     {"temperature", temperature},
                     {"block", block_name},
                     {"n_lights", n_lights},
                     {"n_starts", n_starts},
                     {"max_generations", attack_cfg.max_generations}};
  manifest.finish();
  std::cout << successes << "/" << n_starts << " scene attacks succeeded\n";
  return kExitOk;
}

}  // namespace

int cli_dispatch(int argc, char** argv) {
  CLI::App app{"in-distribution adversarial example toolkit"};
  app.require_subcommand(1);

  // gen-data
  CommonOpts gen_opts;
  int gen_dim = 20;
  int gen_n = 500;
  auto* gen = app.add_subcommand("gen-data", "sample a binary uniform-pair dataset");
  add_common(gen, gen_opts);
  auto* gen_dim_opt = gen->add_option("--dim", gen_dim, "dimensionality");
  auto* gen_n_opt = gen->add_option("--n-per-class", gen_n, "points per class");

  // train
  CommonOpts train_opts;
  std::string train_data;
  TrainConfig train_cfg;
  std::uint64_t train_init_seed = 0;
  auto* train_cmd = app.add_subcommand("train", "train the 5-layer ReLU MLP");
  add_common(train_cmd, train_opts);
  auto* train_data_opt = train_cmd->add_option("--data", train_data, "dataset file");
  auto* train_lr = train_cmd->add_option("--lr", train_cfg.learning_rate, "SGD rate");
  auto* train_epochs = train_cmd->add_option("--epochs", train_cfg.epochs, "epochs");
  auto* train_batch =
      train_cmd->add_option("--batch-size", train_cfg.batch_size, "batch size");
  auto* train_init =
      train_cmd->add_option("--init-seed", train_init_seed, "explicit init seed");
  auto* train_sgd =
      train_cmd->add_option("--sgd-seed", train_cfg.sgd_seed, "explicit SGD seed");

  // attack
  CommonOpts atk_opts;
  std::string atk_model, atk_data;
  int atk_n = 10;
  AttackConfig atk_cfg;
  auto* atk = app.add_subcommand("attack", "attack correctly classified points");
  add_common(atk, atk_opts);
  auto* atk_model_opt = atk->add_option("--model", atk_model, "model file");
  auto* atk_data_opt = atk->add_option("--data", atk_data, "start-point pool");
  auto* atk_n_opt = atk->add_option("--n", atk_n, "number of attacks");
  auto* atk_cap = atk->add_option("--cap", atk_cfg.max_generations, "generation cap");
  auto* atk_sigma = atk->add_option("--sigma0", atk_cfg.sigma0, "initial step size");

  // attack-rate
  CommonOpts rate_opts;
  std::string rate_model, rate_data;
  EvalConfig rate_cfg;
  auto* rate = app.add_subcommand("attack-rate", "attack-rate protocol with repeats");
  add_common(rate, rate_opts);
  auto* rate_model_opt = rate->add_option("--model", rate_model, "model file");
  auto* rate_data_opt = rate->add_option("--data", rate_data, "start-point pool");
  auto* rate_starts = rate->add_option("--n-starts", rate_cfg.n_starts, "starts/repeat");
  auto* rate_repeats = rate->add_option("--n-repeats", rate_cfg.n_repeats, "repeats");
  auto* rate_cap =
      rate->add_option("--cap", rate_cfg.attack.max_generations, "generation cap");

  // sweep
  CommonOpts sweep_opts;
  SweepConfig sweep_cfg;
  sweep_cfg.dims = {20};
  sweep_cfg.dataset_sizes = {1000, 10000, 100000};
  auto* sweep = app.add_subcommand("sweep", "dataset-size scaling sweep");
  add_common(sweep, sweep_opts);
  auto* sweep_dims = sweep->add_option("--dims", sweep_cfg.dims, "dimensions");
  auto* sweep_sizes =
      sweep->add_option("--sizes", sweep_cfg.dataset_sizes, "dataset sizes");
  auto* sweep_repeats = sweep->add_option("--repeats", sweep_cfg.repeats, "repeats");
  auto* sweep_starts =
      sweep->add_option("--n-starts", sweep_cfg.eval.n_starts, "starts/repeat");
  auto* sweep_eval_repeats =
      sweep->add_option("--n-repeats", sweep_cfg.eval.n_repeats, "eval repeats");
  auto* sweep_cap = sweep->add_option("--cap", sweep_cfg.eval.attack.max_generations,
                                      "generation cap");

  // church-window
  CommonOpts cw_opts;
  std::string cw_model, cw_data;
  int cw_steps = 101;
  AttackConfig cw_attack;
  auto* cw = app.add_subcommand("church-window", "boundary-slice grid to PPM");
  add_common(cw, cw_opts);
  auto* cw_model_opt = cw->add_option("--model", cw_model, "model file");
  auto* cw_data_opt = cw->add_option("--data", cw_data, "start-point pool");
  auto* cw_steps_opt = cw->add_option("--steps", cw_steps, "grid steps per axis");
  auto* cw_cap = cw->add_option("--cap", cw_attack.max_generations, "generation cap");

  // robust-train
  CommonOpts rt_opts;
  int rt_dim = 20;
  std::int64_t rt_size = 10000;
  int rt_n_adv = 2000;
  TrainConfig rt_train;
  EvalConfig rt_eval;
  auto* rt = app.add_subcommand("robust-train",
                                "augment with found adversarial points, retrain");
  add_common(rt, rt_opts);
  auto* rt_dim_opt = rt->add_option("--dim", rt_dim, "dimensionality");
  auto* rt_size_opt = rt->add_option("--size", rt_size, "training dataset size");
  auto* rt_adv_opt =
      rt->add_option("--n-adversarial", rt_n_adv, "adversarial points to add");
  auto* rt_starts = rt->add_option("--n-starts", rt_eval.n_starts, "starts/repeat");
  auto* rt_repeats = rt->add_option("--n-repeats", rt_eval.n_repeats, "repeats");

  // ablate
  CommonOpts ab_opts;
  std::string ab_varied = "cma";
  int ab_dim = 20;
  std::int64_t ab_size = 100000;
  int ab_trials = 10;
  TrainConfig ab_train;
  EvalConfig ab_eval;
  auto* ab = app.add_subcommand("ablate", "vary one stochastic source at a time");
  add_common(ab, ab_opts);
  auto* ab_varied_opt =
      ab->add_option("--varied", ab_varied, "cma | sgd | sampling | init");
  auto* ab_dim_opt = ab->add_option("--dim", ab_dim, "dimensionality");
  auto* ab_size_opt = ab->add_option("--size", ab_size, "training dataset size");
  auto* ab_trials_opt = ab->add_option("--trials", ab_trials, "trials");
  auto* ab_starts = ab->add_option("--n-starts", ab_eval.n_starts, "starts/repeat");
  auto* ab_repeats = ab->add_option("--n-repeats", ab_eval.n_repeats, "repeats");

  // sample-scenes
  CommonOpts sc_opts;
  int sc_count = 100;
  auto* sc = app.add_subcommand("sample-scenes", "sample camera/light scene vectors");
  add_common(sc, sc_opts);
  auto* sc_count_opt = sc->add_option("--count", sc_count, "scenes to sample");

  // attack-scene
  CommonOpts as_opts;
  std::string as_oracle_cmd;
  std::uint64_t as_oracle_seed = 7;
  double as_temperature = 0.05;
  std::string as_block = "camera";
  int as_lights = 1;
  int as_starts = 20;
  AttackConfig as_attack;
  as_attack.max_generations = 15;
  auto* as = app.add_subcommand("attack-scene",
                                "attack a scene classifier through the oracle");
  add_common(as, as_opts);
  auto* as_cmd_opt = as->add_option("--oracle-cmd", as_oracle_cmd,
                                    "oracle command line (default: builtin)");
  auto* as_seed_opt =
      as->add_option("--oracle-seed", as_oracle_seed, "builtin oracle seed");
  auto* as_temp_opt =
      as->add_option("--temperature", as_temperature, "builtin oracle temperature");
  auto* as_block_opt =
      as->add_option("--block", as_block, "camera | light0 | light1 | ...");
  auto* as_lights_opt = as->add_option("--n-lights", as_lights, "lights per scene");
  auto* as_starts_opt = as->add_option("--n-starts", as_starts, "starts");
  auto* as_cap = as->add_option("--cap", as_attack.max_generations, "generation cap");

  // oracle-serve
  CommonOpts os_opts;
  std::uint64_t os_seed = 7;
  double os_temperature = 0.05;
  auto* os = app.add_subcommand("oracle-serve",
                                "serve the synthetic oracle over stdin/stdout");
  os->add_option("--oracle-seed", os_seed, "oracle seed");
  os->add_option("--temperature", os_temperature, "softmax temperature");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) {
      const json cfg = load_config_file(gen_opts.config_path);
      apply_cfg(cfg, "dim", gen_dim_opt, gen_dim);
      apply_cfg(cfg, "n_per_class", gen_n_opt, gen_n);
      return run_gen_data(gen_opts, cfg, gen_dim, gen_n);
    }
    if (train_cmd->parsed()) {
      const json cfg = load_config_file(train_opts.config_path);
      apply_cfg(cfg, "data", train_data_opt, train_data);
      apply_cfg(cfg, "learning_rate", train_lr, train_cfg.learning_rate);
      apply_cfg(cfg, "epochs", train_epochs, train_cfg.epochs);
      apply_cfg(cfg, "batch_size", train_batch, train_cfg.batch_size);
      apply_cfg(cfg, "init_seed", train_init, train_init_seed);
      apply_cfg(cfg, "sgd_seed", train_sgd, train_cfg.sgd_seed);
      const bool init_given = train_init->count() > 0 || cfg.contains("init_seed");
      if (train_data.empty())
        throw CliError(kExitUsage, "train: --data is required");
      return run_train(train_opts, train_data, train_cfg, train_init_seed,
                       init_given);
    }
    if (atk->parsed()) {
      const json cfg = load_config_file(atk_opts.config_path);
      apply_cfg(cfg, "model", atk_model_opt, atk_model);
      apply_cfg(cfg, "data", atk_data_opt, atk_data);
      apply_cfg(cfg, "n_attacks", atk_n_opt, atk_n);
      apply_cfg(cfg, "max_generations", atk_cap, atk_cfg.max_generations);
      apply_cfg(cfg, "sigma0", atk_sigma, atk_cfg.sigma0);
      if (atk_model.empty() || atk_data.empty())
        throw CliError(kExitUsage, "attack: --model and --data are required");
      return run_attack(atk_opts, atk_model, atk_data, atk_n, atk_cfg);
    }
    if (rate->parsed()) {
      const json cfg = load_config_file(rate_opts.config_path);
      apply_cfg(cfg, "model", rate_model_opt, rate_model);
      apply_cfg(cfg, "data", rate_data_opt, rate_data);
      apply_cfg(cfg, "n_starts", rate_starts, rate_cfg.n_starts);
      apply_cfg(cfg, "n_repeats", rate_repeats, rate_cfg.n_repeats);
      apply_cfg(cfg, "max_generations", rate_cap, rate_cfg.attack.max_generations);
      if (rate_model.empty() || rate_data.empty())
        throw CliError(kExitUsage, "attack-rate: --model and --data are required");
      rate_cfg.jobs = rate_opts.jobs;
      return run_attack_rate(rate_opts, rate_model, rate_data, rate_cfg);
    }
    if (sweep->parsed()) {
      const json cfg = load_config_file(sweep_opts.config_path);
      apply_cfg(cfg, "dims", sweep_dims, sweep_cfg.dims);
      apply_cfg(cfg, "sizes", sweep_sizes, sweep_cfg.dataset_sizes);
      apply_cfg(cfg, "repeats", sweep_repeats, sweep_cfg.repeats);
      apply_cfg(cfg, "n_starts", sweep_starts, sweep_cfg.eval.n_starts);
      apply_cfg(cfg, "n_repeats", sweep_eval_repeats, sweep_cfg.eval.n_repeats);
      apply_cfg(cfg, "max_generations", sweep_cap,
                sweep_cfg.eval.attack.max_generations);
      return run_sweep(sweep_opts, sweep_cfg);
    }
    if (cw->parsed()) {
      const json cfg = load_config_file(cw_opts.config_path);
      apply_cfg(cfg, "model", cw_model_opt, cw_model);
      apply_cfg(cfg, "data", cw_data_opt, cw_data);
      apply_cfg(cfg, "steps", cw_steps_opt, cw_steps);
      apply_cfg(cfg, "max_generations", cw_cap, cw_attack.max_generations);
      if (cw_model.empty() || cw_data.empty())
        throw CliError(kExitUsage, "church-window: --model and --data are required");
      return run_church_window(cw_opts, cw_model, cw_data, cw_steps, cw_attack);
    }
    if (rt->parsed()) {
      const json cfg = load_config_file(rt_opts.config_path);
      apply_cfg(cfg, "dim", rt_dim_opt, rt_dim);
      apply_cfg(cfg, "size", rt_size_opt, rt_size);
      apply_cfg(cfg, "n_adversarial", rt_adv_opt, rt_n_adv);
      apply_cfg(cfg, "n_starts", rt_starts, rt_eval.n_starts);
      apply_cfg(cfg, "n_repeats", rt_repeats, rt_eval.n_repeats);
      return run_robust_train(rt_opts, rt_dim, rt_size, rt_n_adv, rt_train, rt_eval);
    }
    if (ab->parsed()) {
      const json cfg = load_config_file(ab_opts.config_path);
      apply_cfg(cfg, "varied", ab_varied_opt, ab_varied);
      apply_cfg(cfg, "dim", ab_dim_opt, ab_dim);
      apply_cfg(cfg, "size", ab_size_opt, ab_size);
      apply_cfg(cfg, "trials", ab_trials_opt, ab_trials);
      apply_cfg(cfg, "n_starts", ab_starts, ab_eval.n_starts);
      apply_cfg(cfg, "n_repeats", ab_repeats, ab_eval.n_repeats);
      return run_ablate(ab_opts, ab_varied, ab_dim, ab_size, ab_trials, ab_train,
                        ab_eval);
    }
    if (sc->parsed()) {
      const json cfg = load_config_file(sc_opts.config_path);
      apply_cfg(cfg, "count", sc_count_opt, sc_count);
      return run_sample_scenes(sc_opts, sc_count);
    }
    if (as->parsed()) {
      const json cfg = load_config_file(as_opts.config_path);
      apply_cfg(cfg, "oracle_cmd", as_cmd_opt, as_oracle_cmd);
      apply_cfg(cfg, "oracle_seed", as_seed_opt, as_oracle_seed);
      apply_cfg(cfg, "temperature", as_temp_opt, as_temperature);
      apply_cfg(cfg, "block", as_block_opt, as_block);
      apply_cfg(cfg, "n_lights", as_lights_opt, as_lights);
      apply_cfg(cfg, "n_starts", as_starts_opt, as_starts);
      apply_cfg(cfg, "max_generations", as_cap, as_attack.max_generations);
      return run_attack_scene(as_opts, as_oracle_cmd, as_oracle_seed,
                              as_temperature, as_block, as_lights, as_starts,
                              as_attack);
    }
    if (os->parsed()) {
      const SyntheticOracle oracle(os_seed, os_temperature);
      serve_oracle(oracle, std::cin, std::cout);
      return kExitOk;
    }
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace indist
