#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "indist/rng.hpp"

namespace indist {

enum class Membership { Class0, Class1, Outside };

// Two disjoint per-class hyper-rectangle supports: class 0 is Unif(a,b)^dim,
// class 1 is Unif(c,d)^dim.
struct UniformPairSupport {
  int dim = 20;
  double class0_lo = -10.0;
  double class0_hi = 10.0;
  double class1_lo = 20.0;
  double class1_hi = 40.0;

  void validate() const;
};

struct LabeledDataset {
  UniformPairSupport support;
  std::vector<Eigen::VectorXd> points;
  std::vector<int> labels;
  std::uint64_t seed = 0;
};

// n_per_class points per class, coordinates i.i.d. uniform in the class
// interval, interleaved then shuffled under the same seed.
LabeledDataset sample_dataset(const UniformPairSupport& support, int n_per_class,
                              std::uint64_t seed);

// Class k iff every coordinate lies strictly inside class k's open interval.
Membership membership(const UniformPairSupport& support, const Eigen::VectorXd& x);

// JSON header line {dim, n, ranges, seed}, then one CSV line per point with
// the label as the final field.
void write_dataset(const LabeledDataset& data, const std::string& path);
LabeledDataset read_dataset(const std::string& path);

}  // namespace indist
