#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "indist/scene.hpp"
#include "indist/search.hpp"

namespace indist {

// Deterministic 11-class stand-in for a render+network stack: a seeded random
// linear map over range-standardized scene coordinates, softmax with a
// temperature that controls boundary sharpness.
class SyntheticOracle {
 public:
  static constexpr int kClasses = 11;

  explicit SyntheticOracle(std::uint64_t seed, double temperature = 1.0);

  ClassifyResult classify(const Eigen::VectorXd& flat, int n_lights) const;
  std::vector<ClassifyResult> classify_batch(
      const std::vector<Eigen::VectorXd>& flats, int n_lights) const;

  double temperature() const { return temperature_; }

 private:
  // one weight matrix over the widest scene (4 lights); narrower scenes use
  // a column prefix
  Eigen::MatrixXd weights_;
  Eigen::VectorXd bias_;
  double temperature_;
};

// Newline-delimited JSON client for an external classifier subprocess.
// Request:  {"id": i, "n_lights": n, "flat": [..]}
// Response: {"id": i, "label": l, "probs": [..]} or {"id": i, "error": ".."}
class OracleProcess {
 public:
  explicit OracleProcess(const std::string& command);
  ~OracleProcess();

  OracleProcess(const OracleProcess&) = delete;
  OracleProcess& operator=(const OracleProcess&) = delete;

  // One request line per scene, one response line back, order checked by the
  // echoed id. Throws on process exit, malformed lines, or per-item errors,
  // with the offending line in the message.
  std::vector<ClassifyResult> classify_batch(
      const std::vector<Eigen::VectorXd>& flats, int n_lights);

 private:
  void launch(const std::string& command);

  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
  long pid_ = -1;
  std::string read_buffer_;
  std::int64_t next_id_ = 0;
};

// Serve classify requests over stdin/stdout until EOF; the loopback side of
// the wire protocol. Returns the number of requests served.
std::int64_t serve_oracle(const SyntheticOracle& oracle, std::istream& in,
                          std::ostream& out);

}  // namespace indist
