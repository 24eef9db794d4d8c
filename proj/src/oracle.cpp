#include "indist/oracle.hpp"

#include <csignal>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace indist {

namespace {

constexpr int kMaxSceneDim = kCameraDims + 4 * kLightDims;

// map each coordinate to roughly [-1, 1] so no block dominates the logits
void standardize(const Eigen::VectorXd& flat, int n_lights, Eigen::VectorXd& out) {
  const auto ranges = scene_ranges(n_lights);
  out.resize(flat.size());
  for (int i = 0; i < flat.size(); ++i) {
    const auto [lo, hi] = ranges[i];
    out[i] = (2.0 * flat[i] - (lo + hi)) / (hi - lo);
  }
}

}  // namespace

SyntheticOracle::SyntheticOracle(std::uint64_t seed, double temperature)
    : temperature_(temperature) {
  if (temperature <= 0.0)
    throw std::invalid_argument("oracle: temperature must be > 0");
  Rng rng(derive_seed(seed, "synthetic-oracle"));
  weights_.resize(kClasses, kMaxSceneDim);
  for (int i = 0; i < weights_.rows(); ++i)
    for (int j = 0; j < weights_.cols(); ++j) weights_(i, j) = rng.normal();
  weights_ /= std::sqrt(static_cast<double>(kMaxSceneDim));
  bias_.resize(kClasses);
  for (int i = 0; i < kClasses; ++i) bias_[i] = 0.1 * rng.normal();
}

ClassifyResult SyntheticOracle::classify(const Eigen::VectorXd& flat,
                                         int n_lights) const {
  if (flat.size() != kCameraDims + kLightDims * n_lights)
    throw std::invalid_argument("oracle: flat vector has wrong length");
  Eigen::VectorXd z;
  standardize(flat, n_lights, z);
  Eigen::VectorXd logits =
      (weights_.leftCols(flat.size()) * z + bias_) / temperature_;
  const double m = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - m).exp();
  e /= e.sum();
  ClassifyResult result;
  int best = 0;
  for (int i = 1; i < kClasses; ++i)
    if (e[i] > e[best]) best = i;
  result.label = best;
  result.probs.assign(e.data(), e.data() + e.size());
  return result;
}

std::vector<ClassifyResult> SyntheticOracle::classify_batch(
    const std::vector<Eigen::VectorXd>& flats, int n_lights) const {
  std::vector<ClassifyResult> out;
  out.reserve(flats.size());
  for (const auto& flat : flats) out.push_back(classify(flat, n_lights));
  return out;
}

void OracleProcess::launch(const std::string& command) {
  // a child that exits early must surface as a clean write/read error, not a
  // process-killing SIGPIPE
  signal(SIGPIPE, SIG_IGN);
  int to_child[2];
  int from_child[2];
  if (pipe(to_child) != 0 || pipe(from_child) != 0)
    throw std::runtime_error("oracle: pipe failed");
  const pid_t pid = fork();
  if (pid < 0) throw std::runtime_error("oracle: fork failed");
  if (pid == 0) {
    dup2(to_child[0], STDIN_FILENO);
    dup2(from_child[1], STDOUT_FILENO);
    close(to_child[0]);
    close(to_child[1]);
    close(from_child[0]);
    close(from_child[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(to_child[0]);
  close(from_child[1]);
  stdin_fd_ = to_child[1];
  stdout_fd_ = from_child[0];
  pid_ = pid;
}

OracleProcess::OracleProcess(const std::string& command) { launch(command); }

OracleProcess::~OracleProcess() {
  if (stdin_fd_ >= 0) close(stdin_fd_);
  if (stdout_fd_ >= 0) close(stdout_fd_);
  if (pid_ > 0) {
    int status = 0;
    waitpid(static_cast<pid_t>(pid_), &status, 0);
  }
}

std::vector<ClassifyResult> OracleProcess::classify_batch(
    const std::vector<Eigen::VectorXd>& flats, int n_lights) {
  std::string request;
  const std::int64_t first_id = next_id_;
  for (const auto& flat : flats) {
    nlohmann::json j;
    j["id"] = next_id_++;
    j["n_lights"] = n_lights;
    j["flat"] = std::vector<double>(flat.data(), flat.data() + flat.size());
    request += j.dump();
    request += "\n";
  }
  std::size_t written = 0;
  while (written < request.size()) {
    const ssize_t n =
        write(stdin_fd_, request.data() + written, request.size() - written);
    if (n <= 0)
      throw std::runtime_error("oracle: process closed its input (write failed)");
    written += static_cast<std::size_t>(n);
  }

  std::vector<ClassifyResult> results;
  results.reserve(flats.size());
  for (std::size_t i = 0; i < flats.size(); ++i) {
    // read one line
    std::string line;
    for (;;) {
      const auto pos = read_buffer_.find('\n');
      if (pos != std::string::npos) {
        line = read_buffer_.substr(0, pos);
        read_buffer_.erase(0, pos + 1);
        break;
      }
      char chunk[4096];
      const ssize_t n = read(stdout_fd_, chunk, sizeof(chunk));
      if (n <= 0)
        throw std::runtime_error("oracle: process exited before responding");
      read_buffer_.append(chunk, static_cast<std::size_t>(n));
    }

    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw std::runtime_error("oracle: malformed response line: " + line);
    }
    if (j.contains("error"))
      throw std::runtime_error("oracle: remote error in line: " + line);
    if (!j.contains("id") || !j.contains("label") || !j.contains("probs"))
      throw std::runtime_error("oracle: incomplete response line: " + line);
    if (j.at("id").get<std::int64_t>() != first_id + static_cast<std::int64_t>(i))
      throw std::runtime_error("oracle: out-of-order response line: " + line);
    ClassifyResult result;
    result.label = j.at("label").get<int>();
    result.probs = j.at("probs").get<std::vector<double>>();
    results.push_back(std::move(result));
  }
  return results;
}

std::int64_t serve_oracle(const SyntheticOracle& oracle, std::istream& in,
                          std::ostream& out) {
  std::int64_t served = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json response;
    response["id"] = -1;
    try {
      const nlohmann::json request = nlohmann::json::parse(line);
      const std::int64_t id = request.at("id").get<std::int64_t>();
      response["id"] = id;
      const int n_lights = request.at("n_lights").get<int>();
      const auto flat_vec = request.at("flat").get<std::vector<double>>();
      const Eigen::VectorXd flat =
          Eigen::Map<const Eigen::VectorXd>(flat_vec.data(), flat_vec.size());
      const ClassifyResult result = oracle.classify(flat, n_lights);
      response["id"] = id;
      response["label"] = result.label;
      response["probs"] = result.probs;
    } catch (const std::exception& e) {
      response["error"] = e.what();
    }
    out << response.dump() << "\n";
    out.flush();
    ++served;
  }
  return served;
}

}  // namespace indist
