#include "skr/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "skr/errors.hpp"
#include "skr/quadrature.hpp"

namespace skr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxNodes = 8192;
constexpr double kRelTol = 1e-10;

double log_sum_exp(std::initializer_list<double> xs) {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

int initial_nodes(int degree) {
  int n = 32;
  while (2 * n - 1 < degree + 16) n *= 2;
  return n;
}

// Integrates against the normalized surface measure projected onto t = <x, e>,
// i.e. against (omega_{d-1}/omega_d) (1-t^2)^{(d-2)/2} dt on [-1, 1].
class FunkHecke {
 public:
  explicit FunkHecke(int d) : d_(d), a_((d - 2) / 2.0) {}

  struct Estimate {
    double value = 0.0;
    double abs_value = 0.0;
  };

  template <class F>
  Estimate integrate(int n, F&& f) {
    const QuadratureRule& r = rule(n);
    Estimate e;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double v = r.weights[i] * f(r.nodes[i]);
      e.value += v;
      e.abs_value += std::abs(v);
    }
    return e;
  }

  // Node-doubling driver; f(t) is evaluated on each rule.
  template <class F>
  double adaptive(int start, F&& f, const char* what) {
    int n = start;
    Estimate prev = integrate(n, f);
    while (2 * n <= kMaxNodes) {
      n *= 2;
      const Estimate cur = integrate(n, f);
      const double tol = std::max(kRelTol * std::abs(cur.value), 64.0 * kEps * cur.abs_value);
      if (std::abs(cur.value - prev.value) <= tol) return cur.value;
      prev = cur;
    }
    std::ostringstream msg;
    msg << what << ": quadrature did not converge for d=" << d_ << " with " << n
        << " nodes (last two estimates differ by " << std::abs(prev.value) << " scale)";
    throw NumericError(msg.str());
  }

 private:
  const QuadratureRule& rule(int n) {
    auto it = rules_.find(n);
    if (it == rules_.end()) it = rules_.emplace(n, gauss_jacobi(n, a_, a_)).first;
    return it->second;
  }

  int d_;
  double a_;
  std::map<int, QuadratureRule> rules_;
};

double binomial_log(double n, double r) {
  return std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0);
}

BigInt binomial_exact(int n, int r) {
  BigInt c = 1;
  for (int i = 1; i <= r; ++i) {
    c *= (n - r + i);
    c /= i;
  }
  return c;
}

// log beta for k - alpha a positive odd number; k may be real for the tail continuation.
double log_beta_closed(int d, int alpha, double k) {
  return log_sphere_ratio(d) + std::lgamma(d / 2.0) + std::lgamma(k - alpha) -
         k * std::numbers::ln2 - std::lgamma(k / 2.0 - alpha / 2.0 + 0.5) -
         std::lgamma(k / 2.0 + d / 2.0 + alpha / 2.0 + 0.5);
}

// log|beta_{alpha,k}| from exact expressions for every (alpha, k).
double log_beta_exact(int d, int alpha, int k) {
  const int diff = k - alpha;
  if (diff >= 1 && diff % 2 == 1) return log_beta_closed(d, alpha, k);
  if (diff >= 2) return kNegInf;
  if (alpha == 0 && k == 0) return -std::numbers::ln2;  // half the mass
  if (alpha == 1 && k == 1) return -std::log(2.0 * (d + 1));  // E[t^2]/2 = 1/(2(d+1))
  if (alpha == 1 && k == 0) return log_sphere_ratio(d) - std::log(static_cast<double>(d));
  return kNegInf;
}

double log_ntk_mu_from_betas(int d, double k, double lb0_km1, double lb0_kp1, double lb1_k) {
  const double denom = 2.0 * k + d - 1.0;
  const double t1 = k > 0.0 ? std::log(k / denom) + 2.0 * lb0_km1 : kNegInf;
  // at k = 0 the weight (k+d-1)/(2k+d-1) is 1 (also the limit for d = 1)
  const double w2 = k > 0.0 ? (k + d - 1.0) / denom : 1.0;
  const double t2 = w2 > 0.0 ? std::log(w2) + 2.0 * lb0_kp1 : kNegInf;
  const double t3 = std::log(d + 1.0) + 2.0 * lb1_k;
  return log_sum_exp({t1, t2, t3});
}

// log(N(d,k) mu_k) for real even k >= 2, used for the Euler-Maclaurin tail.
double log_ntk_level_mass(int d, double k) {
  const double lmu = log_ntk_mu_from_betas(d, k, log_beta_closed(d, 0, k - 1.0),
                                           log_beta_closed(d, 0, k + 1.0),
                                           log_beta_closed(d, 1, k));
  return log_multiplicity(d, k) + lmu;
}

// sum_{k even, k > 2M} N(d,k) mu_k by Euler-Maclaurin on F(m) = mass at k = 2m.
double ntk_tail_estimate(int d, int last_even_k) {
  const auto F = [d](double m) { return std::exp(log_ntk_level_mass(d, 2.0 * m)); };
  const double a = last_even_k / 2.0 + 0.5;
  // int_a^inf F(x) dx with x = a/u
  static const QuadratureRule gl = gauss_jacobi(96, 0.0, 0.0);
  double integral = 0.0;
  for (std::size_t i = 0; i < gl.size(); ++i) {
    const double u = 0.5 * (gl.nodes[i] + 1.0);
    integral += gl.weights[i] * F(a / u) * a / (u * u);
  }
  const double h = 0.25;
  const double f1 = (F(a + h) - F(a - h)) / (2.0 * h);
  const double f3 = (F(a + 2 * h) - 2.0 * F(a + h) + 2.0 * F(a - h) - F(a - 2 * h)) / (2.0 * h * h * h);
  return integral + f1 / 24.0 - 7.0 * f3 / 5760.0;
}

}  // namespace

double Multiplicity::value() const {
  if (exact) return exact->convert_to<double>();
  return std::exp(log_value);
}

std::string Multiplicity::decimal() const {
  if (exact) return exact->str();
  std::ostringstream os;
  const double l10 = log_value / std::numbers::ln10;
  const double e = std::floor(l10);
  os.precision(15);
  os << std::pow(10.0, l10 - e) << "e+" << static_cast<long long>(e);
  return os.str();
}

double log_multiplicity(double d, double k) {
  if (k == 0.0) return 0.0;
  return std::log((2.0 * k + d - 1.0) / k) + binomial_log(k + d - 2.0, k - 1.0);
}

Multiplicity multiplicity(int d, int k) {
  if (d < 1 || k < 0) throw InvalidArgument("multiplicity: need d >= 1 and k >= 0");
  Multiplicity m;
  m.log_value = log_multiplicity(d, k);
  if (k == 0) {
    m.exact = BigInt(1);
  } else if (k + d <= 2000 || k == 1) {
    BigInt num = BigInt(2 * k + d - 1) * binomial_exact(k + d - 2, k - 1);
    m.exact = num / k;
  }
  return m;
}

std::vector<double> legendre_all(int d, int kmax, double t) {
  std::vector<double> p(static_cast<std::size_t>(std::max(kmax, 0)) + 1);
  p[0] = 1.0;
  if (kmax >= 1) p[1] = t;
  for (int k = 2; k <= kmax; ++k) {
    p[k] = ((2.0 * k + d - 3.0) * t * p[k - 1] - (k - 1.0) * p[k - 2]) / (k + d - 2.0);
  }
  return p;
}

double legendre(int d, int k, double t) {
  if (k < 0) throw InvalidArgument("legendre: k must be >= 0");
  if (k == 0) return 1.0;
  double pm2 = 1.0, pm1 = t;
  for (int j = 2; j <= k; ++j) {
    const double pj = ((2.0 * j + d - 3.0) * t * pm1 - (j - 1.0) * pm2) / (j + d - 2.0);
    pm2 = pm1;
    pm1 = pj;
  }
  return pm1;
}

double eigenvalue_quadrature(const KernelProfile& profile, int d, int k) {
  if (d < 1 || k < 0) throw InvalidArgument("eigenvalue_quadrature: need d >= 1 and k >= 0");
  FunkHecke fh(d);
  int degree = k;
  if (profile.kind() == KernelKind::Taylor)
    degree += static_cast<int>(profile.taylor_coeffs().size());
  return fh.adaptive(
      initial_nodes(degree), [&](double t) { return profile(t) * legendre(d, k, t); },
      "eigenvalue_quadrature");
}

double ntk_beta_quadrature(int d, int alpha, int k) {
  if (d < 1 || k < 0 || (alpha != 0 && alpha != 1))
    throw InvalidArgument("ntk_beta: need d >= 1, k >= 0, alpha in {0,1}");
  // int_0^1 g(t) (1-t^2)^a dt with t = (1+s)/2 and Jacobi weight (1-s)^a on s:
  // equals 1/(a+1) * E_rule[g(t) (1+t)^a].
  const double a = (d - 2) / 2.0;
  const auto f = [&](double s) {
    const double t = 0.5 * (1.0 + s);
    return (alpha == 1 ? t : 1.0) * legendre(d, k, t) * std::pow(1.0 + t, a);
  };
  int n = initial_nodes(k + 1);
  const auto eval = [&](int m) {
    const QuadratureRule r = gauss_jacobi(m, a, 0.0);
    double v = 0.0, av = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double x = r.weights[i] * f(r.nodes[i]);
      v += x;
      av += std::abs(x);
    }
    return std::pair{v, av};
  };
  auto prev = eval(n);
  while (2 * n <= kMaxNodes) {
    n *= 2;
    const auto cur = eval(n);
    const double tol = std::max(kRelTol * std::abs(cur.first), 64.0 * kEps * cur.second);
    if (std::abs(cur.first - prev.first) <= tol)
      return std::exp(log_sphere_ratio(d)) / (a + 1.0) * cur.first;
    prev = cur;
  }
  throw NumericError("ntk_beta: half-interval quadrature did not converge for d=" +
                     std::to_string(d) + ", k=" + std::to_string(k));
}

BetaCoefficients ntk_beta(int d, int alpha, int k) {
  if (d < 1 || k < 0 || (alpha != 0 && alpha != 1))
    throw InvalidArgument("ntk_beta: need d >= 1, k >= 0, alpha in {0,1}");
  BetaCoefficients b;
  b.d = d;
  b.alpha = alpha;
  b.k = k;
  const int diff = k - alpha;
  b.closed_form = diff >= 1 && diff % 2 == 1;
  b.zero = diff >= 2 && diff % 2 == 0;
  if (b.closed_form) {
    b.log_abs = log_beta_closed(d, alpha, k);
    b.sign = ((diff - 1) / 2) % 2 == 0 ? 1 : -1;
    b.value = b.sign * std::exp(b.log_abs);
  } else {
    b.value = ntk_beta_quadrature(d, alpha, k);
    b.sign = b.value > 0.0 ? 1 : (b.value < 0.0 ? -1 : 0);
    b.log_abs = b.value != 0.0 ? std::log(std::abs(b.value)) : kNegInf;
  }
  return b;
}

double log_ntk_eigen_closed(int d, int k) {
  if (d < 1 || k < 0) throw InvalidArgument("ntk_eigen_closed: need d >= 1 and k >= 0");
  if (k >= 3 && k % 2 == 1) return kNegInf;
  return log_ntk_mu_from_betas(d, k, k >= 1 ? log_beta_exact(d, 0, k - 1) : kNegInf,
                               log_beta_exact(d, 0, k + 1), log_beta_exact(d, 1, k));
}

double ntk_eigen_closed(int d, int k) { return std::exp(log_ntk_eigen_closed(d, k)); }

double log_surrogate_mu(int d, int k) {
  if (d < 1 || k < 0) throw InvalidArgument("surrogate_mu: need d >= 1 and k >= 0");
  if (k <= 1) return 0.0;
  const double dd = d, kk = k;
  return dd * std::log(dd) + (kk - 2.0) * std::log(kk) - (kk + dd + 1.0) * std::log(kk + dd) +
         std::log(kk * kk + kk * dd + dd);
}

double surrogate_mu(int d, int k) { return std::exp(log_surrogate_mu(d, k)); }

const SpectrumLevel& Spectrum::level(int k) const {
  if (k < 0 || k >= static_cast<int>(levels.size()))
    throw InvalidArgument("spectrum has no level " + std::to_string(k));
  return levels[k];
}

double Spectrum::max_mu() const {
  double m = 0.0;
  for (const auto& l : levels) m = std::max(m, l.mu);
  return m;
}

std::vector<double> Spectrum::expanded(std::size_t max_len) const {
  std::vector<const SpectrumLevel*> order;
  for (const auto& l : levels) order.push_back(&l);
  std::stable_sort(order.begin(), order.end(),
                   [](const SpectrumLevel* a, const SpectrumLevel* b) { return a->mu > b->mu; });
  std::vector<double> out;
  for (const SpectrumLevel* l : order) {
    if (out.size() >= max_len) break;
    const double count = l->multiplicity.value();
    const std::size_t room = max_len - out.size();
    const std::size_t take = count >= static_cast<double>(room) ? room : static_cast<std::size_t>(count);
    out.insert(out.end(), take, l->mu);
  }
  return out;
}

double level_eigenvalue(const KernelProfile& profile, int d, int k) {
  if (profile.kind() == KernelKind::Ntk2) return ntk_eigen_closed(d, k);
  return eigenvalue_quadrature(profile, d, k);
}

Spectrum build_spectrum(const KernelProfile& profile, int d, double tail_tol) {
  if (!(tail_tol > 0.0)) throw InvalidArgument("build_spectrum: tail_tol must be > 0");
  if (d < 1) throw InvalidArgument("build_spectrum: d must be >= 1");
  Spectrum s;
  s.d = d;
  s.profile_label = profile.label();
  s.kappa = profile.kappa();
  const bool ntk = profile.kind() == KernelKind::Ntk2;
  s.route = ntk ? EigenRoute::NtkClosedForm : EigenRoute::Quadrature;

  FunkHecke fh(d);
  const int extra_degree =
      profile.kind() == KernelKind::Taylor ? static_cast<int>(profile.taylor_coeffs().size()) : 0;
  const double noise_floor = 1e-14 * std::max(1.0, std::abs(s.kappa));

  double partial = 0.0;
  for (int k = 0; k <= kMaxSpectrumDegree; ++k) {
    SpectrumLevel lvl;
    lvl.k = k;
    lvl.multiplicity = multiplicity(d, k);
    if (ntk) {
      lvl.log_mu = log_ntk_eigen_closed(d, k);
      lvl.mu = std::exp(lvl.log_mu);
    } else {
      double mu = fh.adaptive(
          initial_nodes(k + extra_degree),
          [&](double t) { return profile(t) * legendre(d, k, t); }, "build_spectrum");
      if (mu < 0.0) {
        if (mu < -noise_floor)
          throw NumericError("build_spectrum: mu_" + std::to_string(k) + " = " +
                             std::to_string(mu) + " < 0; profile is not positive definite at d=" +
                             std::to_string(d));
        mu = 0.0;
      }
      lvl.mu = mu;
      lvl.log_mu = mu > 0.0 ? std::log(mu) : kNegInf;
    }
    if (lvl.log_mu > kNegInf) partial += std::exp(lvl.log_mu + lvl.multiplicity.log_value);
    s.levels.push_back(std::move(lvl));
    if (partial >= s.kappa - tail_tol) break;
  }
  s.partial_trace = partial;
  s.truncation_tail = s.kappa - partial;

  const int last = s.levels.back().k;
  if (partial < s.kappa - tail_tol && ntk) {
    s.tail_estimate = ntk_tail_estimate(d, last % 2 == 0 ? last : last - 1);
  }
  if (std::abs(s.trace_defect()) > 10.0 * tail_tol) {
    std::ostringstream msg;
    msg << "build_spectrum: trace identity violated for " << s.profile_label << " at d=" << d
        << " after " << s.levels.size() << " levels: phi(1)=" << s.kappa
        << ", partial=" << partial << ", tail estimate=" << s.tail_estimate;
    throw NumericError(msg.str());
  }
  return s;
}

SpectralSum spectral_sum(const Spectrum& spectrum, int p) {
  const double log_mu_p = spectrum.level(p).log_mu;
  SpectralSum out;
  // log domain: for d in the thousands mu_k underflows while N(d,k) mu_k does not
  for (const auto& l : spectrum.levels) {
    const double lm = std::min(l.log_mu, log_mu_p);
    if (lm > kNegInf) out.value += std::exp(lm + l.multiplicity.log_value);
  }
  // levels past the cap sit below the last computed eigenvalue
  out.tail = std::max(spectrum.truncation_tail, 0.0);
  if (log_mu_p >= spectrum.levels.back().log_mu) out.value += out.tail;
  return out;
}

}  // namespace skr
