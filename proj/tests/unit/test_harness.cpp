#include <doctest.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <cmath>
#include <json.hpp>
#include <set>
#include <sstream>
#include <tuple>

#include "skr/emit.hpp"
#include "skr/entropy_rates.hpp"
#include "skr/errors.hpp"
#include "skr/harness.hpp"

using namespace skr;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.gamma = 1.0;
  c.n_grid = {20, 30, 45};
  c.trials = 3;
  c.test_size = 200;
  c.c_grid = {0.1, 1.0, 10.0};
  c.master_seed = 42;
  return c;
}

int count_polylines(const boost::property_tree::ptree& node) {
  int n = 0;
  for (const auto& [name, child] : node) {
    if (name == "polyline") ++n;
    n += count_polylines(child);
  }
  return n;
}

void collect_dashed(const boost::property_tree::ptree& node, std::vector<std::string>& exps) {
  for (const auto& [name, child] : node) {
    if (name == "polyline" && child.get_optional<std::string>("<xmlattr>.stroke-dasharray"))
      exps.push_back(child.get<std::string>("<xmlattr>.data-exponent"));
    collect_dashed(child, exps);
  }
}

}  // namespace

TEST_CASE("fit_rate") {
  std::vector<double> n = {100, 200, 400, 800, 1600}, r;
  for (double x : n) r.push_back(7.0 * std::pow(x, -2.0 / 3.0));
  const RateFit f = fit_rate(n, r);
  CHECK(f.r == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));
  CHECK(f.b == doctest::Approx(std::log(7.0)).epsilon(1e-12));
  const RateFit two = fit_rate({10, 100}, {1.0, 0.1});
  CHECK(two.r == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(two.b == doctest::Approx(std::log(10.0)).epsilon(1e-14));
  CHECK_THROWS_AS(fit_rate({10}, {1.0}), InvalidArgument);
  CHECK_THROWS_AS(fit_rate({10, 20}, {1.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(fit_rate({10, 10}, {1.0, 2.0}), InvalidArgument);
}

TEST_CASE("ExperimentConfig: JSON round trip and validation") {
  ExperimentConfig c = tiny_config();
  c.kernel = KernelKind::Taylor;
  c.taylor_coeffs = {1.0, 0.5, 1.0 / 3.0};
  c.noise_sd = 0.1 + 0.2;
  c.stopping_mode = StoppingMode::Theory;
  c.d_rounding = DRounding::Ceil;
  c.master_seed = 18446744073709551557ULL;
  const ExperimentConfig back = ExperimentConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK(back.taylor_coeffs == c.taylor_coeffs);
  CHECK(back.noise_sd == c.noise_sd);
  CHECK(back.master_seed == c.master_seed);
  CHECK(back.stopping_mode == StoppingMode::Theory);

  CHECK_THROWS_AS(ExperimentConfig::from_json("{\"gama\": 1}"), InvalidArgument);
  CHECK_THROWS_AS(ExperimentConfig::from_json("{\"gamma\": \"x\"}"), InvalidArgument);
  CHECK_THROWS_AS(ExperimentConfig::from_json("[1,2"), InvalidArgument);

  ExperimentConfig bad = tiny_config();
  bad.n_grid = {30, 20};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = tiny_config();
  bad.gamma = 3.0;
  bad.n_grid = {2, 4};  // d = round(4^{1/3}) = 2, d = round(2^{1/3}) = 1
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("d rule") {
  ExperimentConfig c;
  c.gamma = 1.5;
  CHECK(c.d_for(1000) == 100);
  CHECK(c.d_for(400) == 54);
  c.d_rounding = DRounding::Ceil;
  CHECK(c.d_for(400) == 55);
  CHECK(c.d_for(1000) == 100);
  c.gamma = 0.5;
  CHECK(c.d_for(120) == 14400);
}

TEST_CASE("run_experiment: complete, deterministic, refit idempotent") {
  const ExperimentConfig c = tiny_config();
  const RiskTable a = run_experiment(c);
  const RiskTable b = run_experiment(c);
  CHECK(risk_table_csv(a) == risk_table_csv(b));
  CHECK(a.rows.size() == 3 * 3 * 3);
  std::set<std::tuple<int, int, double>> keys;
  for (const auto& r : a.rows) {
    keys.insert({r.n, r.trial, r.c});
    CHECK(r.error.empty());
    CHECK(r.risk_regression > 0.0);
    CHECK(r.t_used == doctest::Approx(r.c * std::sqrt(r.n)).epsilon(1e-15));
  }
  CHECK(keys.size() == a.rows.size());

  RiskTable again = a;
  refit(again);
  CHECK(again.r_regression == a.r_regression);
  CHECK(again.best_c == a.best_c);
  for (const auto& f : a.regression_fits) {
    if (f.c == a.best_c) continue;
    CHECK(f.mean_risk.back() >= a.best_regression_fit().mean_risk.back());
  }
  CHECK(a.theoretical_exponent == rate_curve(1.0, RateFamily::Inner).n_exponent);

  // the same data is used across the C sweep
  ExperimentConfig other = c;
  other.c_grid = {1.0};
  const RiskTable single = run_experiment(other);
  for (const auto& r : single.rows) {
    for (const auto& q : a.rows)
      if (q.n == r.n && q.trial == r.trial && q.c == 1.0) CHECK(q.risk_regression == r.risk_regression);
  }
}

TEST_CASE("run_experiment: theory stopping mode uses the empirical stopping time") {
  ExperimentConfig c = tiny_config();
  c.stopping_mode = StoppingMode::Theory;
  c.trials = 1;
  const RiskTable t = run_experiment(c);
  for (const auto& r : t.rows) CHECK(r.t_used > 0.0);
  CHECK(t.rows[1].t_used / t.rows[0].t_used == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("refit skips tagged failures") {
  RiskTable t = run_experiment(tiny_config());
  const double before = t.r_regression;
  for (auto& r : t.rows)
    if (r.trial == 0 && r.n == 20) {
      r.error = "eigensolver failed";
      r.risk_regression = std::nan("");
    }
  refit(t);
  CHECK(std::isfinite(t.r_regression));
  CHECK(t.r_regression != before);
}

TEST_CASE("best C is stable when trials double on the gamma = 0.5 smoke run") {
  ExperimentConfig c;
  c.gamma = 0.5;
  c.n_grid = {10, 15, 20};
  c.test_size = 300;
  c.trials = 5;
  c.master_seed = 3;
  const double best5 = run_experiment(c).best_c;
  c.trials = 10;
  const double best10 = run_experiment(c).best_c;
  CHECK(best5 == best10);
  CHECK(best5 == 10.0);  // reference run
}

TEST_CASE("emit: CSV round trip, JSON schema, SVG structure") {
  const RiskTable t = run_experiment(tiny_config());
  const std::string csv = risk_table_csv(t);
  const auto rows = parse_risk_table_csv(csv);
  REQUIRE(rows.size() == t.rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].n == t.rows[i].n);
    CHECK(rows[i].d == t.rows[i].d);
    CHECK(rows[i].trial == t.rows[i].trial);
    CHECK(rows[i].c == t.rows[i].c);
    CHECK(rows[i].c_index == t.rows[i].c_index);
    CHECK(rows[i].t_used == t.rows[i].t_used);
    CHECK(rows[i].risk_regression == t.rows[i].risk_regression);
    CHECK(rows[i].risk_interpolation == t.rows[i].risk_interpolation);
  }
  RiskTable reparsed;
  reparsed.gamma = t.gamma;
  reparsed.rows = rows;
  refit(reparsed);
  CHECK(reparsed.r_regression == t.r_regression);

  const auto j = nlohmann::json::parse(risk_summary_json(t));
  for (const char* k : {"gamma", "best_C", "r_regression", "r_interpolation", "theoretical_exponent"})
    CHECK(j.contains(k));
  CHECK(j["best_C"].get<double>() == t.best_c);

  std::istringstream svg(risk_svg(t));
  boost::property_tree::ptree tree;
  REQUIRE_NOTHROW(boost::property_tree::read_xml(svg, tree));
  CHECK(count_polylines(tree) == static_cast<int>(t.regression_fits.size()) + 2);
  std::vector<std::string> dashed;
  collect_dashed(tree, dashed);
  REQUIRE(dashed.size() == 1);
  CHECK(std::stod(dashed[0]) == rate_curve(t.gamma, RateFamily::Inner).n_exponent);

  std::istringstream rates(rate_svg(rate_table(gamma_grid(0.5, 4.0, 0.05), {RateFamily::Inner, RateFamily::Ntk})));
  boost::property_tree::ptree rt;
  REQUIRE_NOTHROW(boost::property_tree::read_xml(rates, rt));
  CHECK(count_polylines(rt) == 4);
}

TEST_CASE("format_double round trips") {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 12345.678, -2.5e17}) CHECK(std::stod(format_double(x)) == x);
  CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("eigen_gap_check") {
  const KernelProfile t = KernelProfile::taylor_all_ones(4);
  const GapCheckResult a = eigen_gap_check(t, 1.5, 12, 0, {1, 2, 3});
  const GapCheckResult b = eigen_gap_check(t, 1.5, 12, 0, {1, 2, 3});
  CHECK(a.n == 42);
  CHECK(a.n_p == 1);
  for (std::size_t i = 0; i < a.seeds.size(); ++i) {
    CHECK(a.seeds[i].holds == b.seeds[i].holds);
    CHECK(a.seeds[i].lambda_np == b.seeds[i].lambda_np);
  }
  CHECK(a.analytic_ok == (4 * a.mu_p1 < a.mu_p / 4));
  CHECK_THROWS_AS(eigen_gap_check(t, 1.0, 40, 1, {1}), InfeasibleConfiguration);
  CHECK_THROWS_AS(eigen_gap_check(t, 3.0, 40, 0, {1}), InfeasibleConfiguration);
}
