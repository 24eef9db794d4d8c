#include "indist/parametric_data.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace indist {

void UniformPairSupport::validate() const {
  if (dim < 1) throw std::invalid_argument("support: dim must be positive");
  if (!(class0_lo < class0_hi) || !(class1_lo < class1_hi))
    throw std::invalid_argument("support: empty class interval");
  const bool disjoint = class0_hi < class1_lo || class1_hi < class0_lo;
  if (!disjoint) throw std::invalid_argument("support: class intervals overlap");
}

LabeledDataset sample_dataset(const UniformPairSupport& support, int n_per_class,
                              std::uint64_t seed) {
  support.validate();
  if (n_per_class < 1)
    throw std::invalid_argument("sample_dataset: n_per_class must be >= 1");

  Rng rng(derive_seed(seed, "dataset"));
  LabeledDataset data;
  data.support = support;
  data.seed = seed;
  data.points.reserve(2 * n_per_class);
  data.labels.reserve(2 * n_per_class);

  for (int i = 0; i < n_per_class; ++i) {
    for (int label = 0; label < 2; ++label) {
      const double lo = label == 0 ? support.class0_lo : support.class1_lo;
      const double hi = label == 0 ? support.class0_hi : support.class1_hi;
      Eigen::VectorXd p(support.dim);
      for (int d = 0; d < support.dim; ++d) p[d] = rng.uniform(lo, hi);
      data.points.push_back(std::move(p));
      data.labels.push_back(label);
    }
  }

  // Fisher-Yates over the interleaved order, driven by the same seed.
  Rng shuffle_rng(derive_seed(seed, "shuffle"));
  for (std::size_t i = data.points.size(); i > 1; --i) {
    const std::size_t j = shuffle_rng.next_below(i);
    std::swap(data.points[i - 1], data.points[j]);
    std::swap(data.labels[i - 1], data.labels[j]);
  }
  return data;
}

Membership membership(const UniformPairSupport& support, const Eigen::VectorXd& x) {
  if (x.size() != support.dim)
    throw std::invalid_argument("membership: dimension mismatch");
  bool in0 = true;
  bool in1 = true;
  for (int d = 0; d < support.dim; ++d) {
    in0 = in0 && x[d] > support.class0_lo && x[d] < support.class0_hi;
    in1 = in1 && x[d] > support.class1_lo && x[d] < support.class1_hi;
    if (!in0 && !in1) return Membership::Outside;
  }
  if (in0) return Membership::Class0;
  if (in1) return Membership::Class1;
  return Membership::Outside;
}

void write_dataset(const LabeledDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_dataset: cannot open " + path);
  nlohmann::json header = {
      {"dim", data.support.dim},
      {"n", data.points.size()},
      {"ranges",
       {{data.support.class0_lo, data.support.class0_hi},
        {data.support.class1_lo, data.support.class1_hi}}},
      {"seed", data.seed}};
  out << header.dump() << "\n";
  out.precision(17);
  for (std::size_t i = 0; i < data.points.size(); ++i) {
    for (int d = 0; d < data.support.dim; ++d) out << data.points[i][d] << ",";
    out << data.labels[i] << "\n";
  }
}

LabeledDataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_dataset: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("read_dataset: missing header in " + path);
  const nlohmann::json header = nlohmann::json::parse(line);

  LabeledDataset data;
  data.support.dim = header.at("dim").get<int>();
  const auto& ranges = header.at("ranges");
  data.support.class0_lo = ranges.at(0).at(0).get<double>();
  data.support.class0_hi = ranges.at(0).at(1).get<double>();
  data.support.class1_lo = ranges.at(1).at(0).get<double>();
  data.support.class1_hi = ranges.at(1).at(1).get<double>();
  data.seed = header.at("seed").get<std::uint64_t>();
  data.support.validate();

  const std::size_t n = header.at("n").get<std::size_t>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<double> fields;
    while (std::getline(ss, field, ',')) fields.push_back(std::stod(field));
    if (fields.size() != static_cast<std::size_t>(data.support.dim) + 1)
      throw std::runtime_error("read_dataset: malformed row in " + path);
    Eigen::VectorXd p(data.support.dim);
    for (int d = 0; d < data.support.dim; ++d) p[d] = fields[d];
    data.points.push_back(std::move(p));
    data.labels.push_back(static_cast<int>(fields.back()));
  }
  if (data.points.size() != n)
    throw std::runtime_error("read_dataset: row count does not match header");
  return data;
}

}  // namespace indist
