// Command-line front end: spectrum, complexity, rates, fit, experiment, gapcheck, certify.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "skr/complexity.hpp"
#include "skr/emit.hpp"
#include "skr/entropy_rates.hpp"
#include "skr/errors.hpp"
#include "skr/gram_eigen.hpp"
#include "skr/harness.hpp"
#include "skr/regression.hpp"
#include "skr/rng.hpp"
#include "skr/spectrum.hpp"
#include "skr/sphere_data.hpp"

namespace {

using nlohmann::ordered_json;
using namespace skr;

enum ExitCode { kOk = 0, kInternal = 1, kInvalid = 2, kNumeric = 3 };

struct Globals {
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string format;  // empty: the subcommand's natural format
};

struct KernelOptions {
  std::string kernel = "ntk2";
  std::vector<double> taylor_coeffs;
  std::string config;

  KernelProfile profile() const {
    const KernelKind kind = parse_kernel_kind(kernel);
    if (kind == KernelKind::Ntk2) return KernelProfile::ntk2();
    if (kind == KernelKind::RbfSphere) return KernelProfile::rbf_sphere();
    std::vector<double> coeffs = taylor_coeffs;
    if (coeffs.empty() && !config.empty()) coeffs = ExperimentConfig::from_json(read_file(config)).taylor_coeffs;
    if (coeffs.empty()) throw InvalidArgument("taylor kernel needs --taylor-coeffs or a config with taylor_coeffs");
    return KernelProfile::taylor(coeffs);
  }

  static std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  void add_to(CLI::App* app) {
    app->add_option("--kernel", kernel, "ntk2 | rbf | taylor")->capture_default_str();
    app->add_option("--taylor-coeffs", taylor_coeffs, "a_0,a_1,... for the taylor kernel")->delimiter(',');
    app->add_option("--config", config, "JSON file with the experiment schema (taylor_coeffs is read)");
  }
};

std::string resolve_format(const Globals& g, const std::string& natural, std::initializer_list<const char*> allowed) {
  const std::string f = g.format.empty() ? natural : g.format;
  for (const char* a : allowed)
    if (f == a) return f;
  throw InvalidArgument("format '" + f + "' is not available for this command");
}

// Prints to stdout, or writes <stem>.<format> under --out-dir and prints the path.
void deliver(const Globals& g, const std::string& stem, const std::string& format, const std::string& content) {
  if (g.out_dir.empty()) {
    std::cout << content;
    return;
  }
  const std::string path = (std::filesystem::path(g.out_dir) / (stem + "." + format)).string();
  write_text_file(path, content);
  std::cout << path << '\n';
}

// A flat JSON object rendered as JSON or as a two-line CSV.
std::string render_object(const ordered_json& j, const std::string& format) {
  if (format == "json") return j.dump(2) + "\n";
  std::ostringstream head, row;
  bool first = true;
  for (const auto& [k, v] : j.items()) {
    head << (first ? "" : ",") << k;
    if (v.is_number_float()) row << (first ? "" : ",") << format_double(v.get<double>());
    else if (v.is_string()) row << (first ? "" : ",") << v.get<std::string>();
    else row << (first ? "" : ",") << v.dump();
    first = false;
  }
  return head.str() + "\n" + row.str() + "\n";
}

ordered_json solution_json(const MendelsonSolution& s) {
  ordered_json j;
  j["epsilon"] = s.epsilon;
  j["epsilon_sq"] = s.epsilon_sq;
  j["stopping_time"] = s.stopping_time;
  j["residual"] = s.residual;
  j["kind"] = std::string(to_string(s.kind));
  return j;
}

int run(int argc, char** argv) {
  CLI::App app{"Early-stopped kernel regression on the sphere: spectra, complexities, rates, experiments"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  Globals g;
  app.add_option("--seed", g.seed, "master seed")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "write outputs into this directory instead of stdout");
  app.add_option("--format", g.format, "csv | json | svg")->check(CLI::IsMember({"csv", "json", "svg"}));

  // spectrum
  auto* sp = app.add_subcommand("spectrum", "per-degree eigenvalues and multiplicities");
  KernelOptions sp_k;
  sp_k.add_to(sp);
  int sp_d = 10;
  double sp_tol = 1e-8;
  sp->add_option("--d", sp_d, "sphere dimension")->required();
  sp->add_option("--tail-tol", sp_tol, "trace identity tolerance")->capture_default_str();

  // complexity
  auto* cx = app.add_subcommand("complexity", "population or empirical Mendelson complexity");
  KernelOptions cx_k;
  cx_k.add_to(cx);
  int cx_d = 10, cx_n = 100;
  double cx_sigma = 1.0;
  bool cx_emp = false;
  cx->add_option("--d", cx_d)->required();
  cx->add_option("--n", cx_n)->required();
  cx->add_option("--sigma", cx_sigma)->capture_default_str();
  cx->add_flag("--empirical", cx_emp, "use the eigenvalues of a sampled Gram matrix");

  // rates
  auto* rt = app.add_subcommand("rates", "theoretical rate exponents over a gamma grid");
  std::vector<std::string> rt_fam = {"inner"};
  double rt_lo = 0.1, rt_hi = 8.0, rt_step = 0.01;
  rt->add_option("--family", rt_fam, "inner | ntk | interpolation (repeatable)")->delimiter(',')->capture_default_str();
  rt->add_option("--gamma-min", rt_lo)->capture_default_str();
  rt->add_option("--gamma-max", rt_hi)->capture_default_str();
  rt->add_option("--step", rt_step)->capture_default_str();

  // fit
  auto* ft = app.add_subcommand("fit", "fit the gradient flow on one synthetic dataset");
  KernelOptions ft_k;
  ft_k.add_to(ft);
  int ft_d = 10, ft_n = 200, ft_anchors = 3, ft_test = 1000;
  double ft_sigma = 1.0;
  std::string ft_t = "auto";
  ft->add_option("--d", ft_d)->required();
  ft->add_option("--n", ft_n)->required();
  ft->add_option("--t", ft_t, "flow time: a number, auto (empirical stopping time) or inf")->capture_default_str();
  ft->add_option("--sigma", ft_sigma, "noise standard deviation")->capture_default_str();
  ft->add_option("--anchors", ft_anchors)->capture_default_str();
  ft->add_option("--test-size", ft_test)->capture_default_str();

  // experiment
  auto* ex = app.add_subcommand("experiment", "rate-fitting experiment over n");
  std::string ex_config;
  double ex_gamma = 0.0;
  std::vector<int> ex_ngrid;
  int ex_trials = 0;
  std::string ex_mode;
  ex->add_option("--config", ex_config, "JSON experiment configuration");
  ex->add_option("--gamma", ex_gamma, "override gamma");
  ex->add_option("--n-grid", ex_ngrid, "override the sample sizes")->delimiter(',');
  ex->add_option("--trials", ex_trials, "override the number of trials");
  ex->add_option("--stopping-mode", ex_mode, "theory | fixed_exponent")->check(CLI::IsMember({"theory", "fixed_exponent"}));

  // gapcheck
  auto* gc = app.add_subcommand("gapcheck", "empirical eigen-gap block structure");
  KernelOptions gc_k;
  gc_k.add_to(gc);
  double gc_gamma = 1.5;
  int gc_d = 40, gc_p = 0, gc_seeds = 20;
  gc->add_option("--gamma", gc_gamma)->capture_default_str();
  gc->add_option("--d", gc_d)->capture_default_str();
  gc->add_option("--p", gc_p)->capture_default_str();
  gc->add_option("--seeds", gc_seeds, "number of seeds derived from --seed")->capture_default_str();

  // certify
  auto* ce = app.add_subcommand("certify", "covering radius and the lower-bound entropy condition");
  KernelOptions ce_k;
  ce_k.add_to(ce);
  int ce_d = 20, ce_n = 400;
  double ce_sigma = 1.0, ce_c2 = 0.2;
  ce->add_option("--d", ce_d)->required();
  ce->add_option("--n", ce_n)->required();
  ce->add_option("--sigma", ce_sigma)->capture_default_str();
  ce->add_option("--c2", ce_c2)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  if (*sp) {
    const std::string fmt = resolve_format(g, "csv", {"csv", "json"});
    const Spectrum s = build_spectrum(sp_k.profile(), sp_d, sp_tol);
    std::string out;
    if (fmt == "csv") {
      out = spectrum_csv(s);
    } else {
      ordered_json j;
      j["d"] = s.d;
      j["kernel"] = s.profile_label;
      j["partial_trace"] = s.partial_trace;
      j["truncation_tail"] = s.truncation_tail;
      j["tail_estimate"] = s.tail_estimate;
      ordered_json lv = ordered_json::array();
      for (const auto& l : s.levels)
        lv.push_back({{"k", l.k}, {"mu_k", l.mu}, {"log_mu_k", l.log_mu},
                      {"N", l.multiplicity.decimal()}, {"log_N", l.multiplicity.log_value}});
      j["levels"] = lv;
      out = j.dump(2) + "\n";
    }
    deliver(g, "spectrum", fmt, out);
  } else if (*cx) {
    const std::string fmt = resolve_format(g, "json", {"json", "csv"});
    const KernelProfile prof = cx_k.profile();
    MendelsonSolution sol;
    if (cx_emp) {
      const SphereSample x = sample_sphere(cx_d, cx_n, derive_seed(g.seed, {0}));
      sol = empirical_mendelson(eigendecompose(gram(prof, x, true)), cx_sigma);
    } else {
      if (cx_n < 1) throw InvalidArgument("--n must be >= 1");
      sol = population_mendelson(build_spectrum(prof, cx_d), cx_n, cx_sigma);
    }
    deliver(g, "complexity", fmt, render_object(solution_json(sol), fmt));
  } else if (*rt) {
    const std::string fmt = resolve_format(g, "csv", {"csv", "json", "svg"});
    std::vector<RateFamily> fams;
    for (const auto& f : rt_fam) fams.push_back(parse_rate_family(f));
    const RateTable table = rate_table(gamma_grid(rt_lo, rt_hi, rt_step), fams);
    for (const auto& e : table.errors) std::cerr << "skipped: " << e << '\n';
    std::string out;
    if (fmt == "csv") {
      out = rate_table_csv(table);
    } else if (fmt == "svg") {
      out = rate_svg(table);
    } else {
      ordered_json arr = ordered_json::array();
      for (const auto& r : table.points)
        arr.push_back({{"family", std::string(to_string(r.family))}, {"gamma", r.gamma}, {"p", r.p},
                       {"n_exponent", r.n_exponent}, {"d_exponent", r.d_exponent},
                       {"log_factor", r.log_factor}, {"match_status", std::string(to_string(r.match_status))}});
      out = arr.dump(2) + "\n";
    }
    deliver(g, "rates", fmt, out);
  } else if (*ft) {
    const std::string fmt = resolve_format(g, "json", {"json", "csv"});
    const KernelProfile prof = ft_k.profile();
    if (!(ft_sigma > 0.0)) throw InvalidArgument("--sigma must be > 0");
    const SphereSample x = sample_sphere(ft_d, ft_n, derive_seed(g.seed, {0}));
    const TargetFunction target = make_target(prof, ft_d, ft_anchors, derive_seed(g.seed, {1}));
    const Dataset data = generate_dataset(target, x, ft_sigma, derive_seed(g.seed, {2}));
    const SphereSample test = sample_sphere(ft_d, ft_test, derive_seed(g.seed, {3}));
    auto eig = std::make_shared<const GramEigen>(eigendecompose(gram(prof, x, true)));
    double t = 0.0;
    if (ft_t == "auto") {
      t = empirical_mendelson(*eig, ft_sigma).stopping_time;
    } else if (ft_t == "inf") {
      t = kInfiniteTime;
    } else {
      try {
        std::size_t pos = 0;
        t = std::stod(ft_t, &pos);
        if (pos != ft_t.size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw InvalidArgument("--t must be a number, auto or inf");
      }
    }
    const FlowPredictor f = fit_flow(eig, x, prof, data.responses, t);
    const FlowDiagnostics diag = diagnostics(*eig, data.responses, data.f_star, t);
    ordered_json j;
    j["t_used"] = std::isinf(t) ? ordered_json("inf") : ordered_json(t);
    j["train_residual"] = (f.train_predictions - data.responses).squaredNorm() / ft_n;
    j["excess_risk"] = excess_risk(f, target, test);
    j["bias_sq"] = diag.bias_sq;
    j["variance"] = diag.variance;
    deliver(g, "fit", fmt, render_object(j, fmt));
  } else if (*ex) {
    const std::string fmt = resolve_format(g, "json", {"json", "csv", "svg"});
    ExperimentConfig cfg;
    if (!ex_config.empty()) cfg = ExperimentConfig::from_json(KernelOptions::read_file(ex_config));
    if (app.get_option("--seed")->count() > 0) cfg.master_seed = g.seed;
    if (ex_gamma > 0.0) cfg.gamma = ex_gamma;
    if (!ex_ngrid.empty()) cfg.n_grid = ex_ngrid;
    if (ex_trials > 0) cfg.trials = ex_trials;
    if (ex_mode == "theory") cfg.stopping_mode = StoppingMode::Theory;
    if (ex_mode == "fixed_exponent") cfg.stopping_mode = StoppingMode::FixedExponent;
    const RiskTable table = run_experiment(cfg);
    if (!g.out_dir.empty()) {
      const std::filesystem::path dir(g.out_dir);
      write_text_file((dir / "config.json").string(), cfg.to_json() + "\n");
      write_text_file((dir / "risk_table.csv").string(), risk_table_csv(table));
      write_text_file((dir / "summary.json").string(), risk_summary_json(table));
      write_text_file((dir / "risk.svg").string(), risk_svg(table));
    }
    if (fmt == "csv") std::cout << risk_table_csv(table);
    else if (fmt == "svg") std::cout << risk_svg(table);
    else std::cout << risk_summary_json(table);
  } else if (*gc) {
    const std::string fmt = resolve_format(g, "json", {"json", "csv"});
    if (gc_seeds < 1) throw InvalidArgument("--seeds must be >= 1");
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < gc_seeds; ++i) seeds.push_back(derive_seed(g.seed, {static_cast<std::uint64_t>(i)}));
    const GapCheckResult r = eigen_gap_check(gc_k.profile(), gc_gamma, gc_d, gc_p, seeds);
    std::string out;
    if (fmt == "csv") {
      std::ostringstream os;
      os << "seed,lambda_Np,lambda_Np1,four_mu_p1,mu_p_over_4,holds\n";
      for (const auto& s : r.seeds)
        os << s.seed << ',' << format_double(s.lambda_np) << ',' << format_double(s.lambda_np1) << ','
           << format_double(4 * r.mu_p1) << ',' << format_double(r.mu_p / 4) << ',' << (s.holds ? "true" : "false")
           << '\n';
      out = os.str();
    } else {
      ordered_json j;
      j["d"] = r.d;
      j["n"] = r.n;
      j["p"] = r.p;
      j["gamma"] = r.gamma;
      j["N_p"] = r.n_p;
      j["mu_p"] = r.mu_p;
      j["mu_p1"] = r.mu_p1;
      j["analytic_ok"] = r.analytic_ok;
      j["pass_fraction"] = r.pass_fraction;
      ordered_json arr = ordered_json::array();
      for (const auto& s : r.seeds)
        arr.push_back({{"seed", s.seed}, {"lambda_Np", s.lambda_np}, {"lambda_Np1", s.lambda_np1}, {"holds", s.holds}});
      j["seeds"] = arr;
      out = j.dump(2) + "\n";
    }
    deliver(g, "gapcheck", fmt, out);
  } else if (*ce) {
    const std::string fmt = resolve_format(g, "json", {"json", "csv"});
    const Spectrum s = build_spectrum(ce_k.profile(), ce_d);
    const EntropyFixture f = covering_radius(s, ce_n, ce_sigma);
    const LowerBoundCertificate c = certify_lower_bound(s, ce_n, ce_sigma, ce_c2);
    ordered_json j;
    j["holds"] = c.holds;
    j["lhs"] = c.lhs;
    j["rhs"] = c.rhs;
    j["eps_bar"] = f.eps_bar;
    j["eps_bar_conservative"] = f.eps_bar_conservative;
    j["entropy_at_root"] = f.entropy_at_root;
    j["c2"] = c.c2;
    j["constant"] = c.constant;
    j["lower_bound"] = c.lower_bound;
    deliver(g, "certify", fmt, render_object(j, fmt));
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const skr::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const skr::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}
