#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skr/kernels.hpp"

namespace skr {

enum class StoppingMode { Theory, FixedExponent };
enum class DRounding { Round, Ceil };

std::string_view to_string(StoppingMode m);
std::string_view to_string(DRounding r);

struct ExperimentConfig {
  double gamma = 1.5;
  std::vector<int> n_grid = {400, 700, 1000, 1400, 1600};
  KernelKind kernel = KernelKind::Ntk2;
  std::vector<double> taylor_coeffs;  // TAYLOR only
  int n_anchors = 3;
  double noise_sd = 1.0;
  int test_size = 1000;
  int trials = 20;
  std::vector<double> c_grid = {0.001, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0};
  StoppingMode stopping_mode = StoppingMode::FixedExponent;
  DRounding d_rounding = DRounding::Round;  // d = round(n^{1/gamma}) or ceil
  std::uint64_t master_seed = 0;

  int d_for(int n) const;
  KernelProfile profile() const;
  /// Throws InvalidArgument on any inconsistency.
  void validate() const;

  std::string to_json() const;
  /// Missing keys keep their defaults; unknown keys are rejected.
  static ExperimentConfig from_json(const std::string& text);
};

struct RiskRow {
  int n = 0;
  int d = 0;
  int trial = 0;
  int c_index = 0;
  double c = 0.0;
  double t_used = 0.0;
  double risk_regression = 0.0;
  double risk_interpolation = 0.0;
  std::string error;  // empty when the trial succeeded
};

struct RateFit {
  double r = 0.0;
  double b = 0.0;
};

struct CurveFit {
  std::string method;  // "regression" or "interpolation"
  double c = 0.0;      // 0 for interpolation
  std::vector<int> n;
  std::vector<double> mean_risk;
  RateFit fit;
};

struct RiskTable {
  double gamma = 0.0;
  std::vector<RiskRow> rows;
  std::vector<CurveFit> regression_fits;  // one per C
  CurveFit interpolation_fit;
  double best_c = 0.0;
  double r_regression = 0.0;     // slope at best_c
  double r_interpolation = 0.0;
  double theoretical_exponent = 0.0;  // inner-family n exponent at gamma
  int failed_trials = 0;

  const CurveFit& best_regression_fit() const;
};

/// Ordinary least squares of log risk on log n. Needs >= 2 points with positive risks
/// and at least two distinct n.
RateFit fit_rate(const std::vector<double>& n, const std::vector<double>& risk);

/// Rebuilds per-C means, fits and best_c from table.rows.
void refit(RiskTable& table);

/// The full protocol: per (n, trial) a fresh dataset, one eigendecomposition, the C sweep
/// and interpolation. Data seeds depend on (master_seed, n, trial) only, so every C sees
/// the same data. Throws NumericError when more than half of the trials fail.
RiskTable run_experiment(const ExperimentConfig& config);

struct GapSeedResult {
  std::uint64_t seed = 0;
  double lambda_np = 0.0;   // lambda_hat_{N(p)}
  double lambda_np1 = 0.0;  // lambda_hat_{N(p)+1}
  bool holds = false;
};

struct GapCheckResult {
  int d = 0;
  int n = 0;
  int p = 0;
  double gamma = 0.0;
  double mu_p = 0.0;
  double mu_p1 = 0.0;
  long long n_p = 0;  // N(p) = sum_{k <= p} N(d, k)
  bool analytic_ok = false;  // 4 mu_{p+1} < mu_p / 4
  double pass_fraction = 0.0;
  std::vector<GapSeedResult> seeds;
};

/// lambda_hat_{N(p)+1} < 4 mu_{p+1} < mu_p / 4 < lambda_hat_{N(p)} per seed, n = round(d^gamma).
/// Throws InfeasibleConfiguration when N(p) >= n or n > 5000.
GapCheckResult eigen_gap_check(const KernelProfile& profile, double gamma, int d, int p,
                               const std::vector<std::uint64_t>& seeds);

}  // namespace skr
