#include "skr/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "skr/errors.hpp"
#include "skr/rng.hpp"

namespace skr {

namespace {

constexpr double kNegativeFloor = -1e-12;

double threshold_constant(double sigma) { return 2.0 * std::numbers::e * sigma; }

// n R(eps)^2 with x = eps^2, split as x * m + s.
struct Piece {
  double m = 0.0;  // number of eigenvalues above x
  double s = 0.0;  // mass of those at or below x
  std::size_t above = 0;
};

Piece piece_at(const WeightedEigenvalues& eig, double x) {
  Piece p;
  std::size_t i = 0;
  for (; i < eig.values.size() && eig.values[i] > x; ++i) p.m += eig.counts[i];
  p.above = i;
  for (; i < eig.values.size(); ++i) p.s += eig.masses[i];
  p.s += eig.tail_mass;
  return p;
}

double r_sq_times_n(const WeightedEigenvalues& eig, double x) {
  const Piece p = piece_at(eig, x);
  return (p.m > 0.0 ? x * p.m : 0.0) + p.s;
}

void check_inputs(double n, double sigma) {
  if (!(n > 0.0)) throw InvalidArgument("Mendelson complexity: n must be > 0");
  if (!(sigma > 0.0)) throw InvalidArgument("Mendelson complexity: sigma must be > 0");
}

}  // namespace

std::string_view to_string(MendelsonKind kind) {
  return kind == MendelsonKind::Population ? "population" : "empirical";
}

WeightedEigenvalues WeightedEigenvalues::from_sequence(std::span<const double> eigvals) {
  std::vector<double> v;
  v.reserve(eigvals.size());
  for (double x : eigvals) {
    if (!std::isfinite(x)) throw InvalidArgument("eigenvalue sequence contains a non-finite value");
    if (x < kNegativeFloor)
      throw InvalidArgument("negative eigenvalue " + std::to_string(x) + " below the noise floor");
    v.push_back(std::max(x, 0.0));
  }
  std::sort(v.begin(), v.end(), std::greater<>());
  WeightedEigenvalues w;
  w.values = v;
  w.counts.assign(v.size(), 1.0);
  w.masses = v;
  return w;
}

WeightedEigenvalues WeightedEigenvalues::from_spectrum(const Spectrum& spectrum) {
  std::vector<const SpectrumLevel*> lv;
  for (const auto& l : spectrum.levels)
    if (std::isfinite(l.log_mu)) lv.push_back(&l);
  std::stable_sort(lv.begin(), lv.end(),
                   [](const SpectrumLevel* a, const SpectrumLevel* b) { return a->log_mu > b->log_mu; });
  WeightedEigenvalues w;
  for (const SpectrumLevel* l : lv) {
    w.values.push_back(std::exp(l->log_mu));
    w.counts.push_back(std::exp(l->multiplicity.log_value));
    w.masses.push_back(std::exp(l->log_mu + l->multiplicity.log_value));
  }
  w.tail_mass = std::max(spectrum.truncation_tail, 0.0);
  return w;
}

double WeightedEigenvalues::total_mass() const {
  return std::accumulate(masses.begin(), masses.end(), 0.0) + tail_mass;
}

double r_function(const WeightedEigenvalues& eig, double n, double eps) {
  if (!(n > 0.0)) throw InvalidArgument("r_function: n must be > 0");
  if (eps < 0.0) throw InvalidArgument("r_function: eps must be >= 0");
  if (eps == 0.0) return 0.0;
  return std::sqrt(r_sq_times_n(eig, eps * eps) / n);
}

double r_function(std::span<const double> eigvals, double n, double eps) {
  return r_function(WeightedEigenvalues::from_sequence(eigvals), n, eps);
}

double r_function(const Spectrum& spectrum, double n, double eps) {
  return r_function(WeightedEigenvalues::from_spectrum(spectrum), n, eps);
}

MendelsonSolution solve_mendelson(const WeightedEigenvalues& eig, double n, double sigma,
                                  std::optional<std::pair<double, double>> bracket,
                                  MendelsonKind kind) {
  check_inputs(n, sigma);
  const double total = eig.total_mass();
  if (!(total > 0.0) || !(eig.max_value() > 0.0 || eig.tail_mass > 0.0))
    throw InvalidArgument("solve_mendelson: all eigenvalues are zero, no fixed point");
  const double c = threshold_constant(sigma);
  const auto h = [&](double e) { return r_function(eig, n, e) - e * e / c; };

  double lo = 1e-12;
  double hi = std::max(std::sqrt(eig.max_value()), c * std::sqrt(total / n));
  if (bracket) {
    lo = bracket->first;
    hi = bracket->second;
    if (!(lo > 0.0) || !(hi > lo)) throw InvalidArgument("solve_mendelson: bracket must satisfy 0 < lo < hi");
  }
  for (int i = 0; h(lo) <= 0.0; ++i) {
    if (i > 200) throw NoRootError("solve_mendelson: could not find a lower bracket end");
    lo /= 10.0;
  }
  for (int i = 0; h(hi) >= 0.0; ++i) {
    if (i > 200) throw NoRootError("solve_mendelson: could not find an upper bracket end");
    hi *= 10.0;
  }
  for (int i = 0; i < 400 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) > 0.0 ? lo : hi) = mid;
  }

  // R^2 is linear in x = eps^2 on each piece: x m/n + s/n = x^2 / c^2.
  double x = 0.25 * (lo + hi) * (lo + hi);
  for (int iter = 0; iter < 64; ++iter) {
    const Piece p = piece_at(eig, x);
    const double b = p.m / (2.0 * n);
    const double xn = c * c * (b + std::sqrt(b * b + p.s / (n * c * c)));
    const Piece q = piece_at(eig, xn);
    x = xn;
    if (q.above == p.above) break;
  }

  MendelsonSolution sol;
  sol.kind = kind;
  sol.sigma = sigma;
  sol.n = n;
  sol.epsilon_sq = x;
  sol.epsilon = std::sqrt(x);
  sol.stopping_time = 1.0 / x;
  sol.residual = std::abs(r_function(eig, n, sol.epsilon) - x / c);
  if (!(sol.residual <= 1e-12 * x / c)) {
    std::ostringstream msg;
    msg << "solve_mendelson: residual " << sol.residual << " exceeds 1e-12 relative at eps=" << sol.epsilon;
    throw NumericError(msg.str());
  }
  return sol;
}

MendelsonSolution solve_mendelson(std::span<const double> eigvals, double n, double sigma,
                                  std::optional<std::pair<double, double>> bracket) {
  return solve_mendelson(WeightedEigenvalues::from_sequence(eigvals), n, sigma, bracket);
}

MendelsonSolution population_mendelson(const Spectrum& spectrum, double n, double sigma) {
  return solve_mendelson(WeightedEigenvalues::from_spectrum(spectrum), n, sigma, std::nullopt,
                         MendelsonKind::Population);
}

MendelsonSolution empirical_mendelson(const GramEigen& eig, double sigma) {
  const std::span<const double> v(eig.lambdas.data(), static_cast<std::size_t>(eig.lambdas.size()));
  return solve_mendelson(WeightedEigenvalues::from_sequence(v), static_cast<double>(eig.n), sigma,
                         std::nullopt, MendelsonKind::Empirical);
}

double stopping_time(const MendelsonSolution& solution) { return 1.0 / solution.epsilon_sq; }

double rademacher_z(const Eigen::VectorXd& lambdas, const Eigen::VectorXd& projected_w, double n,
                    double t) {
  if (t < 0.0) throw InvalidArgument("rademacher_z: t must be >= 0");
  if (lambdas.size() != projected_w.size())
    throw InvalidArgument("rademacher_z: eigenvalue and projection lengths differ");
  if (t == 0.0 || lambdas.size() == 0) return 0.0;
  const double lmax = lambdas.maxCoeff();
  const double cut = 1e-14 * lmax;
  std::vector<double> c2, lam;
  for (Eigen::Index j = 0; j < lambdas.size(); ++j) {
    if (lambdas(j) <= cut) continue;
    const double c = std::sqrt(lambdas(j) / n) * projected_w(j);
    c2.push_back(c * c);
    lam.push_back(lambdas(j));
  }
  if (c2.empty()) return 0.0;
  const double t2 = t * t;
  const auto g = [&](double theta) {
    double s = 0.0;
    for (std::size_t j = 0; j < c2.size(); ++j) s += c2[j] / (theta + (1.0 - theta) * lam[j] / t2);
    return s;
  };
  if (t2 >= lmax) return std::sqrt(g(1.0));

  // g is convex in theta
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = 1.0;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double g1 = g(x1), g2 = g(x2);
  while (b - a > 1e-12) {
    if (g1 <= g2) {
      b = x2;
      x2 = x1;
      g2 = g1;
      x1 = b - r * (b - a);
      g1 = g(x1);
    } else {
      a = x1;
      x1 = x2;
      g1 = g2;
      x2 = a + r * (b - a);
      g2 = g(x2);
    }
  }
  const double best = std::min({g1, g2, g(0.0), g(1.0)});
  return std::sqrt(best);
}

double rademacher_z(const GramEigen& eig, const Eigen::VectorXd& w, double t) {
  if (w.size() != eig.n) throw InvalidArgument("rademacher_z: sign vector length must equal n");
  const Eigen::VectorXd pw = eig.U.transpose() * w;
  return rademacher_z(eig.lambdas, pw, static_cast<double>(eig.n), t);
}

RademacherEstimate rademacher_estimate(const GramEigen& eig, double t, int draws, std::uint64_t seed) {
  if (draws < 1) throw InvalidArgument("rademacher_estimate: draws must be >= 1");
  RademacherEstimate est;
  est.t = t;
  est.draws = draws;
  std::vector<double> z(static_cast<std::size_t>(draws));
  Eigen::VectorXd w(eig.n);
  for (int k = 0; k < draws; ++k) {
    Engine rng(derive_seed(seed, {static_cast<std::uint64_t>(k)}));
    std::bernoulli_distribution coin(0.5);
    for (Eigen::Index i = 0; i < eig.n; ++i) w(i) = coin(rng) ? 1.0 : -1.0;
    z[k] = rademacher_z(eig, w, t);
  }
  const double mean = std::accumulate(z.begin(), z.end(), 0.0) / draws;
  double ss = 0.0;
  for (double v : z) ss += (v - mean) * (v - mean);
  est.q_hat = mean;
  est.std_err = draws > 1 ? std::sqrt(ss / (draws - 1) / draws) : 0.0;
  const std::span<const double> v(eig.lambdas.data(), static_cast<std::size_t>(eig.lambdas.size()));
  est.r_hat = r_function(v, static_cast<double>(eig.n), t);
  return est;
}

}  // namespace skr
