#include "skr/harness.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <map>
#include <memory>
#include <set>

#include "skr/complexity.hpp"
#include "skr/entropy_rates.hpp"
#include "skr/errors.hpp"
#include "skr/gram_eigen.hpp"
#include "skr/regression.hpp"
#include "skr/rng.hpp"
#include "skr/spectrum.hpp"
#include "skr/sphere_data.hpp"

namespace skr {

using nlohmann::ordered_json;

std::string_view to_string(StoppingMode m) {
  return m == StoppingMode::Theory ? "theory" : "fixed_exponent";
}

std::string_view to_string(DRounding r) { return r == DRounding::Round ? "round" : "ceil"; }

int ExperimentConfig::d_for(int n) const {
  const double x = std::pow(static_cast<double>(n), 1.0 / gamma);
  // guard against pow landing a hair above an exact integer
  const double snapped = std::abs(x - std::round(x)) < 1e-9 * x ? std::round(x) : x;
  return static_cast<int>(d_rounding == DRounding::Round ? std::round(snapped) : std::ceil(snapped));
}

KernelProfile ExperimentConfig::profile() const {
  switch (kernel) {
    case KernelKind::Ntk2: return KernelProfile::ntk2();
    case KernelKind::RbfSphere: return KernelProfile::rbf_sphere();
    case KernelKind::Taylor: return KernelProfile::taylor(taylor_coeffs);
  }
  return KernelProfile::ntk2();
}

void ExperimentConfig::validate() const {
  if (!(gamma > 0.0)) throw InvalidArgument("config: gamma must be > 0");
  if (n_grid.size() < 2) throw InvalidArgument("config: n_grid needs at least two sizes");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1) throw InvalidArgument("config: n_grid entries must be >= 1");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw InvalidArgument("config: n_grid must be strictly increasing");
    if (d_for(n_grid[i]) < 2)
      throw InvalidArgument("config: d rule gives d < 2 at n = " + std::to_string(n_grid[i]));
  }
  if (kernel == KernelKind::Taylor && taylor_coeffs.empty())
    throw InvalidArgument("config: taylor kernel needs taylor_coeffs");
  if (n_anchors < 1) throw InvalidArgument("config: n_anchors must be >= 1");
  if (!(noise_sd > 0.0)) throw InvalidArgument("config: noise_sd must be > 0");
  if (test_size < 1) throw InvalidArgument("config: test_size must be >= 1");
  if (trials < 1) throw InvalidArgument("config: trials must be >= 1");
  if (c_grid.empty()) throw InvalidArgument("config: c_grid must not be empty");
  for (double c : c_grid)
    if (!(c > 0.0)) throw InvalidArgument("config: c_grid entries must be > 0");
}

std::string ExperimentConfig::to_json() const {
  ordered_json j;
  j["gamma"] = gamma;
  j["n_grid"] = n_grid;
  j["kernel"] = std::string(to_string(kernel));
  j["taylor_coeffs"] = taylor_coeffs;
  j["n_anchors"] = n_anchors;
  j["noise_sd"] = noise_sd;
  j["test_size"] = test_size;
  j["trials"] = trials;
  j["c_grid"] = c_grid;
  j["stopping_mode"] = std::string(to_string(stopping_mode));
  j["d_rounding"] = std::string(to_string(d_rounding));
  j["master_seed"] = master_seed;
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw InvalidArgument(std::string("config: not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("config: top level must be an object");
  static const std::set<std::string> known = {"gamma", "n_grid", "kernel", "taylor_coeffs",
                                              "n_anchors", "noise_sd", "test_size", "trials",
                                              "c_grid", "stopping_mode", "d_rounding", "master_seed"};
  ExperimentConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (!known.count(key)) throw InvalidArgument("config: unknown key '" + key + "'");
    }
    if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
    if (j.contains("n_grid")) c.n_grid = j["n_grid"].get<std::vector<int>>();
    if (j.contains("kernel")) c.kernel = parse_kernel_kind(j["kernel"].get<std::string>());
    if (j.contains("taylor_coeffs")) c.taylor_coeffs = j["taylor_coeffs"].get<std::vector<double>>();
    if (j.contains("n_anchors")) c.n_anchors = j["n_anchors"].get<int>();
    if (j.contains("noise_sd")) c.noise_sd = j["noise_sd"].get<double>();
    if (j.contains("test_size")) c.test_size = j["test_size"].get<int>();
    if (j.contains("trials")) c.trials = j["trials"].get<int>();
    if (j.contains("c_grid")) c.c_grid = j["c_grid"].get<std::vector<double>>();
    if (j.contains("stopping_mode")) {
      const auto m = j["stopping_mode"].get<std::string>();
      if (m == "theory") c.stopping_mode = StoppingMode::Theory;
      else if (m == "fixed_exponent") c.stopping_mode = StoppingMode::FixedExponent;
      else throw InvalidArgument("config: stopping_mode must be theory or fixed_exponent");
    }
    if (j.contains("d_rounding")) {
      const auto r = j["d_rounding"].get<std::string>();
      if (r == "round") c.d_rounding = DRounding::Round;
      else if (r == "ceil") c.d_rounding = DRounding::Ceil;
      else throw InvalidArgument("config: d_rounding must be round or ceil");
    }
    if (j.contains("master_seed")) c.master_seed = j["master_seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config: wrong value type: ") + e.what());
  }
  return c;
}

const CurveFit& RiskTable::best_regression_fit() const {
  for (const auto& f : regression_fits)
    if (f.c == best_c) return f;
  throw InvalidArgument("risk table has no fit for the best C");
}

RateFit fit_rate(const std::vector<double>& n, const std::vector<double>& risk) {
  if (n.size() != risk.size()) throw InvalidArgument("fit_rate: n and risk lengths differ");
  if (n.size() < 2) throw InvalidArgument("fit_rate: need at least two points");
  Eigen::MatrixXd a(n.size(), 2);
  Eigen::VectorXd y(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(n[i] > 0.0)) throw InvalidArgument("fit_rate: n must be > 0");
    if (!(risk[i] > 0.0)) throw InvalidArgument("fit_rate: risks must be > 0");
    a(i, 0) = std::log(n[i]);
    a(i, 1) = 1.0;
    y(i) = std::log(risk[i]);
  }
  if (a.col(0).maxCoeff() == a.col(0).minCoeff())
    throw InvalidArgument("fit_rate: need at least two distinct n");
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(y);
  return {coef(0), coef(1)};
}

void refit(RiskTable& table) {
  std::vector<double> cs;
  std::vector<int> ns;
  for (const auto& r : table.rows) {
    if (std::find(cs.begin(), cs.end(), r.c) == cs.end()) cs.push_back(r.c);
    if (std::find(ns.begin(), ns.end(), r.n) == ns.end()) ns.push_back(r.n);
  }
  std::sort(ns.begin(), ns.end());

  const auto curve = [&](const std::string& method, double c, bool interp) {
    CurveFit f;
    f.method = method;
    f.c = c;
    std::vector<double> xs;
    for (int n : ns) {
      double sum = 0.0;
      int count = 0;
      for (const auto& r : table.rows) {
        if (r.n != n || !r.error.empty()) continue;
        if (interp ? r.c_index != 0 : r.c != c) continue;
        sum += interp ? r.risk_interpolation : r.risk_regression;
        ++count;
      }
      if (count == 0) continue;
      f.n.push_back(n);
      f.mean_risk.push_back(sum / count);
      xs.push_back(n);
    }
    f.fit = fit_rate(xs, f.mean_risk);
    return f;
  };

  table.regression_fits.clear();
  for (double c : cs) table.regression_fits.push_back(curve("regression", c, false));
  table.interpolation_fit = curve("interpolation", 0.0, true);

  // smallest mean risk at the largest n
  double best = std::numeric_limits<double>::infinity();
  for (const auto& f : table.regression_fits) {
    if (f.n.empty() || f.n.back() != ns.back()) continue;
    if (f.mean_risk.back() < best) {
      best = f.mean_risk.back();
      table.best_c = f.c;
    }
  }
  table.r_regression = table.best_regression_fit().fit.r;
  table.r_interpolation = table.interpolation_fit.fit.r;
  table.theoretical_exponent = rate_curve(table.gamma, RateFamily::Inner).n_exponent;
}

RiskTable run_experiment(const ExperimentConfig& config) {
  config.validate();
  const KernelProfile profile = config.profile();
  RiskTable table;
  table.gamma = config.gamma;
  int total = 0;

  for (int n : config.n_grid) {
    const int d = config.d_for(n);
    for (int trial = 0; trial < config.trials; ++trial) {
      ++total;
      const auto key = [&](std::uint64_t stream) {
        return derive_seed(config.master_seed,
                           {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(trial), stream});
      };
      std::vector<RiskRow> rows(config.c_grid.size());
      for (std::size_t ci = 0; ci < rows.size(); ++ci) {
        rows[ci].n = n;
        rows[ci].d = d;
        rows[ci].trial = trial;
        rows[ci].c_index = static_cast<int>(ci);
        rows[ci].c = config.c_grid[ci];
      }
      try {
        const SphereSample train = sample_sphere(d, n, key(0));
        const TargetFunction target = make_target(profile, d, config.n_anchors, key(1));
        const Dataset data = generate_dataset(target, train, config.noise_sd, key(2));
        const SphereSample test = sample_sphere(d, config.test_size, key(3));
        const Eigen::VectorXd f_test = target.evaluate(test);
        auto eig = std::make_shared<const GramEigen>(eigendecompose(gram(profile, train, true)));
        const Eigen::MatrixXd cross = cross_kernel(profile, test, train);

        double base_t = std::sqrt(static_cast<double>(n));
        if (config.stopping_mode == StoppingMode::Theory)
          base_t = empirical_mendelson(*eig, config.noise_sd).stopping_time;

        const FlowPredictor interp = fit_flow(eig, train, profile, data.responses, kInfiniteTime);
        const double risk_interp = excess_risk(predict(interp, cross), f_test);
        for (auto& row : rows) {
          row.t_used = row.c * base_t;
          const FlowPredictor f = fit_flow(eig, train, profile, data.responses, row.t_used);
          row.risk_regression = excess_risk(predict(f, cross), f_test);
          row.risk_interpolation = risk_interp;
          if (!std::isfinite(row.risk_regression) || !std::isfinite(row.risk_interpolation))
            throw NumericError("non-finite excess risk");
        }
      } catch (const NumericError& e) {
        ++table.failed_trials;
        for (auto& row : rows) {
          row.error = e.what();
          row.risk_regression = row.risk_interpolation = std::nan("");
        }
      }
      table.rows.insert(table.rows.end(), rows.begin(), rows.end());
    }
  }
  if (2 * table.failed_trials > total)
    throw NumericError("run_experiment: " + std::to_string(table.failed_trials) + " of " +
                       std::to_string(total) + " trials failed");
  refit(table);
  return table;
}

GapCheckResult eigen_gap_check(const KernelProfile& profile, double gamma, int d, int p,
                               const std::vector<std::uint64_t>& seeds) {
  if (d < 2) throw InvalidArgument("gapcheck: d must be >= 2");
  if (p < 0) throw InvalidArgument("gapcheck: p must be >= 0");
  if (!(gamma > 0.0)) throw InvalidArgument("gapcheck: gamma must be > 0");
  if (seeds.empty()) throw InvalidArgument("gapcheck: need at least one seed");
  GapCheckResult res;
  res.d = d;
  res.p = p;
  res.gamma = gamma;
  const double nd = std::round(std::pow(static_cast<double>(d), gamma));
  if (nd > 5000) throw InfeasibleConfiguration("gapcheck: n = d^gamma exceeds 5000");
  res.n = static_cast<int>(nd);

  double np = 0.0;
  for (int k = 0; k <= p; ++k) np += multiplicity(d, k).value();
  if (np >= res.n)
    throw InfeasibleConfiguration("gapcheck: N(p) = " + std::to_string(static_cast<long long>(np)) +
                                  " >= n = " + std::to_string(res.n));
  res.n_p = static_cast<long long>(np);
  res.mu_p = level_eigenvalue(profile, d, p);
  res.mu_p1 = level_eigenvalue(profile, d, p + 1);
  res.analytic_ok = 4.0 * res.mu_p1 < res.mu_p / 4.0;

  int passed = 0;
  for (std::uint64_t s : seeds) {
    const SphereSample x = sample_sphere(d, res.n, s);
    const Eigen::VectorXd lam = gram_eigenvalues(gram(profile, x, true));
    GapSeedResult r;
    r.seed = s;
    r.lambda_np = lam(res.n_p - 1);
    r.lambda_np1 = lam(res.n_p);
    r.holds = res.analytic_ok && r.lambda_np1 < 4.0 * res.mu_p1 && res.mu_p / 4.0 < r.lambda_np;
    passed += r.holds ? 1 : 0;
    res.seeds.push_back(r);
  }
  res.pass_fraction = static_cast<double>(passed) / static_cast<double>(seeds.size());
  return res;
}

}  // namespace skr
