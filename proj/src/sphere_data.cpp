#include "skr/sphere_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "skr/errors.hpp"
#include "skr/rng.hpp"

namespace skr {

namespace {

Eigen::MatrixXd gaussian_unit_rows(int rows, int dim, Engine& engine) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd out(rows, dim);
  Eigen::VectorXd v(dim);
  for (int i = 0; i < rows; ++i) {
    double norm = 0.0;
    do {
      for (int j = 0; j < dim; ++j) v(j) = normal(engine);
      norm = v.norm();
    } while (norm == 0.0);
    out.row(i) = (v / norm).transpose();
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

SphereSample sample_sphere(int d, int n, std::uint64_t seed) {
  if (d < 1) throw InvalidArgument("sample_sphere: d must be >= 1");
  if (n < 1) throw InvalidArgument("sample_sphere: n must be >= 1");
  Engine engine(seed);
  SphereSample s;
  s.d = d;
  s.seed = seed;
  s.points = gaussian_unit_rows(n, d + 1, engine);
  return s;
}

double TargetFunction::operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::VectorXd inner = anchors * x;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < inner.size(); ++i) acc += weights(i) * profile(inner(i));
  return acc;
}

Eigen::VectorXd TargetFunction::evaluate(const SphereSample& sample) const {
  if (sample.ambient_dim() != anchors.cols())
    throw InvalidArgument("target evaluation: dimension mismatch");
  return apply_profile(profile, sample.points * anchors.transpose()) * weights;
}

TargetFunction TargetFunction::unit_norm() const {
  if (!(rkhs_norm_sq > 0.0)) throw InvalidArgument("target has zero RKHS norm");
  TargetFunction out = *this;
  out.weights /= std::sqrt(rkhs_norm_sq);
  out.rkhs_norm_sq = 1.0;
  return out;
}

TargetFunction make_target(const KernelProfile& profile, int d, int n_anchors,
                           std::uint64_t seed, std::optional<std::vector<double>> weights) {
  if (n_anchors < 1) throw InvalidArgument("make_target: n_anchors must be >= 1");
  TargetFunction f;
  f.profile = profile;
  f.anchors = sample_sphere(d, n_anchors, seed).points;
  if (weights) {
    if (static_cast<int>(weights->size()) != n_anchors)
      throw InvalidArgument("make_target: weight count must equal n_anchors");
    f.weights = Eigen::Map<const Eigen::VectorXd>(weights->data(), n_anchors);
  } else {
    f.weights = Eigen::VectorXd::Ones(n_anchors);
  }
  const Eigen::MatrixXd k = apply_profile(profile, f.anchors * f.anchors.transpose());
  f.rkhs_norm_sq = f.weights.dot(k * f.weights);
  return f;
}

Dataset generate_dataset(const TargetFunction& target, const SphereSample& sample,
                         double noise_sd, std::uint64_t seed) {
  if (!(noise_sd >= 0.0)) throw InvalidArgument("generate_dataset: noise_sd must be >= 0");
  if (sample.ambient_dim() != target.anchors.cols())
    throw InvalidArgument("generate_dataset: target anchors live in R^" +
                          std::to_string(target.anchors.cols()) + " but points in R^" +
                          std::to_string(sample.ambient_dim()));
  Dataset data;
  data.sample = sample;
  data.target = target;
  data.noise_sd = noise_sd;
  data.seed = seed;
  data.f_star = target.evaluate(sample);
  Engine engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  data.noise.resize(sample.n());
  for (Eigen::Index i = 0; i < sample.n(); ++i) data.noise(i) = noise_sd * normal(engine);
  data.responses = data.f_star + data.noise;
  return data;
}

void write_dataset_csv(const Dataset& data, std::ostream& out) {
  const Eigen::Index dim = data.sample.ambient_dim();
  for (Eigen::Index j = 0; j < dim; ++j) out << "x_" << j << ',';
  out << "y\n";
  for (Eigen::Index i = 0; i < data.sample.n(); ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) out << format_double(data.sample.points(i, j)) << ',';
    out << format_double(data.responses(i)) << '\n';
  }
}

CsvDataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("dataset csv: missing header");
  const auto columns = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ',') + 1);
  if (columns < 2 || line.rfind(",y") != line.size() - 2)
    throw InvalidArgument("dataset csv: header must be x_0,...,x_d,y");
  std::vector<double> values;
  Eigen::Index rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    Eigen::Index got = 0;
    while (p <= end) {
      const char* comma = std::find(p, end, ',');
      double v = 0.0;
      auto res = std::from_chars(p, comma, v);
      if (res.ec != std::errc() || res.ptr != comma)
        throw InvalidArgument("dataset csv: bad number on row " + std::to_string(rows + 1));
      values.push_back(v);
      ++got;
      p = comma + 1;
    }
    if (got != columns) throw InvalidArgument("dataset csv: ragged row " + std::to_string(rows + 1));
    ++rows;
  }
  CsvDataset out;
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> all(
      values.data(), rows, columns);
  out.points = all.leftCols(columns - 1);
  out.responses = all.col(columns - 1);
  return out;
}

}  // namespace skr
