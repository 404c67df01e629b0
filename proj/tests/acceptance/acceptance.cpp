// One PASS/FAIL line per acceptance criterion. Exit status is the number of failures.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "skr/complexity.hpp"
#include "skr/emit.hpp"
#include "skr/entropy_rates.hpp"
#include "skr/gram_eigen.hpp"
#include "skr/harness.hpp"
#include "skr/regression.hpp"
#include "skr/rng.hpp"
#include "skr/spectrum.hpp"
#include "skr/sphere_data.hpp"

using namespace skr;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void run(int id, const char* name, double budget_s, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = Clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (budget_s > 0 && secs > budget_s) {
    o.pass = false;
    o.detail << " [over time budget " << budget_s << " s]";
  }
  if (!o.pass) ++failures;
  std::printf("%s %2d %s:%s (%.3f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.str().c_str(), secs);
  std::fflush(stdout);
}

double slope_at(const RiskTable& t) { return t.r_regression; }

ExperimentConfig desk_config() {
  ExperimentConfig c;
  c.gamma = 1.5;
  c.n_grid = {400, 700, 1000, 1400, 1600};
  c.d_rounding = DRounding::Ceil;
  c.trials = 10;
  c.master_seed = 20240601;
  return c;
}

}  // namespace

int main() {
  run(1, "inner rate exponents", 0.001, [](Outcome& o) {
    const double gammas[] = {0.5, 0.8, 1.5, 1.8, 2.0};
    const double expected[] = {1.0, 1.0, 2.0 / 3.0, 5.0 / 9.0, 0.5};
    for (int i = 0; i < 5; ++i) {
      const double e = rate_curve(gammas[i], RateFamily::Inner).n_exponent;
      o.detail << " g=" << gammas[i] << "->" << format_double(e);
      o.require(e == expected[i], "exact exponent at gamma " + format_double(gammas[i]));
    }
  });

  run(2, "interpolation rate", 0, [](Outcome& o) {
    const double eta = rate_curve(1.5, RateFamily::Interpolation).n_exponent;
    o.detail << " eta(1.5)=" << format_double(eta);
    o.require(eta == 1.0 / 3.0, "eta(1.5) == 1/3");
    int checked = 0;
    for (double g : gamma_grid(1.01, 8.0, 0.01)) {
      ++checked;
      const double a = rate_curve(g, RateFamily::Interpolation).n_exponent;
      const double b = rate_curve(g, RateFamily::Inner).n_exponent;
      if (!(a < b)) o.require(false, "eta < inner at gamma " + format_double(g));
    }
    o.detail << " grid points=" << checked;
    o.require(checked == 700, "700 grid points");
  });

  run(3, "trace identity", 10.0, [](Outcome& o) {
    double worst = 0.0;
    for (const KernelProfile& k : {KernelProfile::ntk2(), KernelProfile::rbf_sphere()})
      for (int d : {5, 10, 20}) {
        const Spectrum s = build_spectrum(k, d, 1e-10);
        const double defect = std::abs(s.trace_defect());
        worst = std::max(worst, defect);
        o.require(defect <= 1e-8, k.label() + " d=" + std::to_string(d));
      }
    o.detail << " max defect=" << worst;
  });

  run(4, "ntk odd degrees vanish", 0, [](Outcome& o) {
    const KernelProfile ntk = KernelProfile::ntk2();
    double worst = 0.0;
    for (int d : {5, 10, 20}) {
      const double mu0 = ntk_eigen_closed(d, 0);
      for (int k : {3, 5, 7}) {
        const double q = std::abs(eigenvalue_quadrature(ntk, d, k)) / mu0;
        const double c = std::abs(ntk_eigen_closed(d, k)) / mu0;
        worst = std::max({worst, q, c});
        o.require(q <= 1e-12 && c <= 1e-12, "d=" + std::to_string(d) + " k=" + std::to_string(k));
      }
    }
    o.detail << " max mu_k/mu_0=" << worst;
  });

  run(5, "ntk closed form vs quadrature", 10.0, [](Outcome& o) {
    const KernelProfile ntk = KernelProfile::ntk2();
    double worst = 0.0;
    for (int d : {5, 10, 30})
      for (int k : {1, 2, 4, 6}) {
        const double c = ntk_eigen_closed(d, k);
        const double q = eigenvalue_quadrature(ntk, d, k);
        const double rel = std::abs(c - q) / std::abs(c);
        worst = std::max(worst, rel);
        o.require(rel <= 1e-8, "d=" + std::to_string(d) + " k=" + std::to_string(k));
      }
    o.detail << " max rel=" << worst;
  });

  run(6, "linear kernel oracle", 0, [](Outcome& o) {
    const KernelProfile lin = KernelProfile::taylor({0.0, 1.0}, "linear");
    double worst_mu1 = 0.0, worst_other = 0.0;
    for (int d : {3, 10, 50}) {
      const double mu1 = eigenvalue_quadrature(lin, d, 1);
      worst_mu1 = std::max(worst_mu1, std::abs(mu1 - 1.0 / (d + 1)));
      o.require(std::abs(mu1 - 1.0 / (d + 1)) <= 1e-10, "mu_1 at d=" + std::to_string(d));
      for (int k : {0, 2, 3, 4, 5, 6, 7, 8}) {
        const double m = std::abs(eigenvalue_quadrature(lin, d, k));
        worst_other = std::max(worst_other, m);
        o.require(m < 1e-12, "mu_" + std::to_string(k) + " at d=" + std::to_string(d));
      }
    }
    o.detail << " |mu_1 - 1/(d+1)|<=" << worst_mu1 << " other<=" << worst_other;
  });

  run(7, "mendelson closed forms and residuals", 0, [](Outcome& o) {
    const double e = std::numbers::e;
    const std::vector<double> one = {1.0};
    for (double sigma : {0.02, 0.1}) {
      const double eps = solve_mendelson(one, 1, sigma).epsilon;
      o.require(std::abs(eps - 2 * e * sigma) <= 1e-10 * 2 * e * sigma, "eps = 2 e sigma");
    }
    for (double sigma : {0.5, 1.0, 3.0}) {
      const double eps = solve_mendelson(one, 1, sigma).epsilon;
      o.require(std::abs(eps - std::sqrt(2 * e * sigma)) <= 1e-10 * std::sqrt(2 * e * sigma), "eps = sqrt(2 e sigma)");
    }
    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      std::vector<double> lam(1 + static_cast<int>(u(rng) * 200));
      for (double& l : lam) l = std::pow(10.0, -8.0 * u(rng));
      const MendelsonSolution s = solve_mendelson(lam, std::pow(10.0, 5.0 * u(rng)), std::pow(10.0, -2.0 + 3.0 * u(rng)));
      worst = std::max(worst, s.residual);
    }
    o.detail << " max residual=" << worst;
    o.require(worst <= 1e-12, "residual <= 1e-12");
  });

  run(8, "mendelson scaling", 5.0, [](Outcome& o) {
    const Spectrum s = build_spectrum(KernelProfile::ntk2(), 30);
    std::vector<double> ns, e2;
    for (double n = 100; n <= 10000 * 1.0001; n *= std::pow(10.0, 0.25)) {
      ns.push_back(n);
      e2.push_back(population_mendelson(s, n, 1.0).epsilon_sq);
    }
    const double r = fit_rate(ns, e2).r;
    o.detail << " slope=" << r;
    o.require(std::abs(r + 0.5) <= 0.1, "slope within -1/2 +- 0.1");
  });

  run(9, "rademacher sandwich", 0, [](Outcome& o) {
    const KernelProfile ntk = KernelProfile::ntk2();
    int cases = 0;
    double worst_ratio = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
      const int d = 3 + inst % 8;
      const int n = 20 + 10 * inst;
      const GramEigen g = eigendecompose(gram(ntk, sample_sphere(d, n, derive_seed(99, {std::uint64_t(inst)})), true));
      const double lo = 1.0 / std::sqrt(n), hi = std::sqrt(g.lambdas(0)) * 1.5;
      for (int i = 0; i < 10; ++i) {
        const double t = lo * std::pow(hi / lo, i / 9.0);
        const RademacherEstimate e = rademacher_estimate(g, t, 200, derive_seed(5, {std::uint64_t(inst), std::uint64_t(i)}));
        ++cases;
        worst_ratio = std::max(worst_ratio, e.q_hat / (std::numbers::sqrt2 * e.r_hat + 3 * e.std_err));
        if (!(e.q_hat <= std::numbers::sqrt2 * e.r_hat + 3 * e.std_err)) o.require(false, "sandwich");
      }
    }
    o.detail << " cases=" << cases << " max Q/(sqrt2 R + 3se)=" << worst_ratio;

    // exact solver against a search over the feasible region
    std::mt19937_64 rng(4242);
    std::normal_distribution<double> gauss;
    double worst_gap = 0.0;
    for (int n = 1; n <= 4; ++n) {
      const GramEigen g = eigendecompose(gram(ntk, sample_sphere(4, n, 300 + n), true));
      Eigen::VectorXd w(n);
      for (int i = 0; i < n; ++i) w(i) = (i % 3 == 1) ? -1.0 : 1.0;
      const Eigen::VectorXd proj = g.U.transpose() * w;
      Eigen::VectorXd c(n);
      for (int j = 0; j < n; ++j) c(j) = std::sqrt(std::max(g.lambdas(j), 0.0) / n) * proj(j);
      for (double t : {0.1, 0.4}) {
        double best = 0.0;
        Eigen::VectorXd b(n);
        for (int k = 0; k < 1000000; ++k) {
          for (int j = 0; j < n; ++j) b(j) = gauss(rng);
          const double scale = std::max(b.squaredNorm(), (g.lambdas.array() * b.array().square()).sum() / (t * t));
          best = std::max(best, std::abs(c.dot(b)) / std::sqrt(scale));
        }
        const double exact = rademacher_z(g, w, t);
        worst_gap = std::max(worst_gap, exact - best);
        o.require(best <= exact + 1e-12, "grid point exceeds the exact value");
        o.require(exact <= best + 1e-3, "exact within 1e-3 of the search");
      }
    }
    o.detail << " max exact-search=" << worst_gap;
  });

  run(10, "flow correctness", 0, [](Outcome& o) {
    const KernelProfile ntk = KernelProfile::ntk2();
    const auto setup = [&](int d, int n, std::uint64_t seed, bool unit) {
      const SphereSample x = sample_sphere(d, n, seed);
      TargetFunction target = make_target(ntk, d, 3, seed + 1);
      if (unit) target = target.unit_norm();
      const Dataset data = generate_dataset(target, x, 1.0, seed + 2);
      auto eig = std::make_shared<const GramEigen>(eigendecompose(gram(ntk, x, true)));
      return std::tuple{x, target, data, eig};
    };
    {
      auto [x, target, data, eig] = setup(5, 30, 1, false);
      const FlowPredictor f = fit_flow(eig, x, ntk, data.responses, 0.0);
      o.require(predict(f, sample_sphere(5, 20, 2)).isZero(0.0), "t = 0 predictor is zero");
    }
    {
      auto [x, target, data, eig] = setup(10, 40, 7, false);
      const FlowPredictor f = fit_flow(eig, x, ntk, data.responses, kInfiniteTime);
      const double rel = (predict(f, x) - data.responses).norm() / data.responses.norm();
      o.detail << " interp rel=" << rel;
      o.require(rel <= 1e-6, "interpolation fits training data");
    }
    {
      auto [x, target, data, eig] = setup(4, 20, 13, false);
      const Eigen::MatrixXd k = gram(ntk, x, true).entries;
      const double t = 1.0, h = 1e-4;
      const auto ft = [&](double s) { return fit_flow(eig, x, ntk, data.responses, s).train_predictions; };
      const Eigen::VectorXd lhs = (ft(t + h) - ft(t - h)) / (2 * h);
      const Eigen::VectorXd rhs = -k * (ft(t) - data.responses);
      const double rel = (lhs - rhs).norm() / rhs.norm();
      o.detail << " ode rel=" << rel;
      o.require(rel <= 1e-6, "finite-difference ODE");
    }
    {
      double worst = 0.0;
      for (std::uint64_t seed : {17, 18, 19}) {
        auto [x, target, data, eig] = setup(5, 60, seed, true);
        for (double t : {1.0, 10.0, 100.0}) worst = std::max(worst, diagnostics(*eig, data.responses, data.f_star, t).bias_sq * t);
      }
      o.detail << " max B_t^2 t=" << worst;
      o.require(worst <= 1.01, "bias bound");
    }
  });

  RiskTable desk;
  run(11, "end-to-end rate experiment", 600.0, [&](Outcome& o) {
    desk = run_experiment(desk_config());
    const double rr = slope_at(desk), ri = desk.r_interpolation;
    o.detail << " gamma=1.5 best_C=" << format_double(desk.best_c) << " r_reg=" << rr << " r_interp=" << ri;
    o.require(std::abs(rr + 2.0 / 3.0) <= 0.15, "regression slope within -2/3 +- 0.15");
    o.require(ri >= rr + 0.1, "interpolation slope exceeds regression slope by 0.1");
    ExperimentConfig small = desk_config();
    small.gamma = 0.5;
    small.n_grid = {40, 60, 80, 100, 120};
    small.master_seed = 7;
    const RiskTable t = run_experiment(small);
    o.detail << "; gamma=0.5 best_C=" << format_double(t.best_c) << " r_reg=" << t.r_regression;
    o.require(std::abs(t.r_regression + 1.0) <= 0.2, "gamma 0.5 slope within -1 +- 0.2");
  });

  run(12, "eigen-gap block structure", 120.0, [](Outcome& o) {
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t i = 0; i < 20; ++i) seeds.push_back(derive_seed(1, {i}));
    const GapCheckResult r = eigen_gap_check(KernelProfile::taylor_all_ones(4), 1.5, 40, 0, seeds);
    o.detail << " n=" << r.n << " analytic=" << (r.analytic_ok ? "ok" : "no") << " pass_fraction=" << r.pass_fraction;
    o.require(r.analytic_ok, "analytic precondition");
    o.require(r.pass_fraction >= 0.9, "pass fraction >= 0.9");
  });

  run(13, "determinism", 0, [&](Outcome& o) {
    const RiskTable again = run_experiment(desk_config());
    const bool same = !desk.rows.empty() && risk_table_csv(again) == risk_table_csv(desk);
    o.detail << " rows=" << again.rows.size();
    o.require(same, "bit-identical risk table CSV");
  });

  std::printf("%d of 13 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
