#include "skr/entropy_rates.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>

#include "skr/errors.hpp"

namespace skr {

namespace {

double entropy_sum(const WeightedEigenvalues& eig, double tau) {
  // sum over values above tau of count * log(value / tau)
  double s = 0.0;
  for (std::size_t i = 0; i < eig.values.size() && eig.values[i] > tau; ++i)
    s += eig.counts[i] * std::log(eig.values[i] / tau);
  return s;
}

double bisect_entropy_root(const WeightedEigenvalues& eig, double n, double scale) {
  // n eps^2 - K(scale * eps): increasing in eps
  const auto g = [&](double e) { return n * e * e - 0.5 * entropy_sum(eig, scale * scale * e * e); };
  double hi = std::sqrt(eig.max_value()) / scale;
  double lo = hi;
  for (int i = 0; g(lo) >= 0.0; ++i) {
    if (i > 400) throw NoRootError("covering_radius: entropy vanishes on the bracket");
    lo /= 2.0;
  }
  for (int i = 0; i < 300 && hi - lo > 1e-16 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return std::abs(g(lo)) < std::abs(g(hi)) ? lo : hi;
}

struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;
};

std::optional<Fraction> rationalize(double x) {
  // continued fraction convergents
  std::int64_t h0 = 1, h1 = 0, k0 = 0, k1 = 1;
  double r = x;
  for (int i = 0; i < 40; ++i) {
    const double a = std::floor(r);
    if (a > 1e9) break;
    const auto ai = static_cast<std::int64_t>(a);
    const std::int64_t h = ai * h0 + h1, k = ai * k0 + k1;
    if (k > 1000000) break;
    h1 = h0;
    h0 = h;
    k1 = k0;
    k0 = k;
    if (std::abs(static_cast<double>(h) / static_cast<double>(k) - x) <= 1e-12 * std::abs(x))
      return Fraction{h, k};
    const double frac = r - a;
    if (frac == 0.0) break;
    r = 1.0 / frac;
  }
  return std::nullopt;
}

// num_g / den_g = gamma; returns (a + b gamma) / gamma with a, b integers, exactly when possible.
double affine_over_gamma(double gamma, const std::optional<Fraction>& q, std::int64_t a, std::int64_t b) {
  if (q) {
    const std::int64_t num = a * q->den + b * q->num;
    return static_cast<double>(num) / static_cast<double>(q->num);
  }
  return (static_cast<double>(a) + static_cast<double>(b) * gamma) / gamma;
}

bool is_integer(double g, const std::optional<Fraction>& q) {
  return q ? q->den == 1 : g == std::floor(g);
}

}  // namespace

double metric_entropy(const WeightedEigenvalues& eig, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("metric_entropy: eps must be > 0");
  return 0.5 * entropy_sum(eig, eps * eps);
}

double metric_entropy(const Spectrum& spectrum, double eps) {
  return metric_entropy(WeightedEigenvalues::from_spectrum(spectrum), eps);
}

EntropyFixture covering_radius(const Spectrum& spectrum, double n, double sigma) {
  if (!(n >= 1.0)) throw InvalidArgument("covering_radius: n must be >= 1");
  if (!(sigma > 0.0)) throw InvalidArgument("covering_radius: sigma must be > 0");
  const WeightedEigenvalues eig = WeightedEigenvalues::from_spectrum(spectrum);
  if (!(eig.max_value() > 0.0)) throw NoRootError("covering_radius: spectrum has no positive level");
  const double scale = std::numbers::sqrt2 * sigma;
  EntropyFixture f;
  f.n = n;
  f.sigma = sigma;
  f.eps_bar = bisect_entropy_root(eig, n, scale);
  f.entropy_at_root = metric_entropy(eig, scale * f.eps_bar);
  f.residual = std::abs(n * f.eps_bar * f.eps_bar - f.entropy_at_root);
  f.eps_bar_conservative = bisect_entropy_root(eig, n, scale / 6.0);
  return f;
}

LowerBoundCertificate certify_lower_bound(const Spectrum& spectrum, double n, double sigma, double c2) {
  if (!(c2 > 0.0)) throw InvalidArgument("certify_lower_bound: c2 must be > 0");
  const EntropyFixture f = covering_radius(spectrum, n, sigma);
  const WeightedEigenvalues eig = WeightedEigenvalues::from_spectrum(spectrum);
  LowerBoundCertificate c;
  c.c2 = c2;
  c.eps_bar = f.eps_bar;
  const double tau = c2 * c2 * f.eps_bar * f.eps_bar / 36.0;
  c.lhs = entropy_sum(eig, tau);
  c.rhs = 10.0 * n * f.eps_bar * f.eps_bar;
  c.holds = c.lhs >= c.rhs;
  c.constant = 0.5 * (c2 / 12.0) * (c2 / 12.0);
  c.lower_bound = c.constant * f.eps_bar * f.eps_bar;
  return c;
}

std::string_view to_string(RateFamily f) {
  switch (f) {
    case RateFamily::Inner: return "inner";
    case RateFamily::Ntk: return "ntk";
    case RateFamily::Interpolation: return "interpolation";
  }
  return "?";
}

std::string_view to_string(MatchStatus s) {
  switch (s) {
    case MatchStatus::Matched: return "matched";
    case MatchStatus::MatchedUpToLog: return "matched_up_to_log";
    case MatchStatus::MatchedUpToEpsilon: return "matched_up_to_epsilon";
    case MatchStatus::UpperOnly: return "upper_only";
  }
  return "?";
}

RateFamily parse_rate_family(std::string_view name) {
  if (name == "inner") return RateFamily::Inner;
  if (name == "ntk") return RateFamily::Ntk;
  if (name == "interpolation") return RateFamily::Interpolation;
  throw InvalidArgument("unknown rate family '" + std::string(name) + "' (inner|ntk|interpolation)");
}

RatePoint rate_curve(double gamma, RateFamily family) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("rate_curve: gamma must be > 0");
  const auto q = rationalize(gamma);
  RatePoint r;
  r.gamma = gamma;
  r.family = family;

  switch (family) {
    case RateFamily::Inner: {
      const int p = static_cast<int>(std::floor(gamma / 2.0));
      r.p = p;
      if (p >= 1 && gamma == 2.0 * p) {
        r.n_exponent = 0.5;
      } else if (gamma <= 2.0 * p + 1.0) {
        r.n_exponent = affine_over_gamma(gamma, q, -p, 1);
        r.log_factor = true;
        r.match_status = MatchStatus::MatchedUpToEpsilon;
      } else {
        r.n_exponent = affine_over_gamma(gamma, q, p + 1, 0);
      }
      break;
    }
    case RateFamily::Ntk: {
      const int p = gamma < 4.0 ? static_cast<int>(std::floor(gamma / 2.0))
                                : 2 * static_cast<int>(std::floor(gamma / 4.0));
      r.p = p;
      const bool half = gamma == 2.0 || (gamma >= 4.0 && is_integer(gamma, q) &&
                                         static_cast<std::int64_t>(gamma) % 4 == 0);
      bool log_branch = false;
      if (!half) {
        if (gamma < 4.0) {
          log_branch = gamma <= 1.0 || (gamma > 2.0 && gamma <= 3.0);
        } else {
          const double base = 4.0 * std::floor(gamma / 4.0);
          log_branch = gamma > base && gamma <= base + 2.0;
        }
      }
      if (half) {
        r.n_exponent = 0.5;
      } else if (log_branch) {
        r.n_exponent = affine_over_gamma(gamma, q, -p, 1);
        r.log_factor = true;
        r.match_status = MatchStatus::MatchedUpToEpsilon;
      } else {
        r.n_exponent = affine_over_gamma(gamma, q, p + 1 + (p >= 2 ? 1 : 0), 0);
      }
      break;
    }
    case RateFamily::Interpolation: {
      if (!(gamma > 1.0)) throw OutOfRange("rate_curve: interpolation family requires gamma > 1");
      const int l = static_cast<int>(std::floor(gamma));
      r.p = l;
      const double a = affine_over_gamma(gamma, q, l + 1, -1);
      const double b = affine_over_gamma(gamma, q, -l, 1);
      r.n_exponent = std::min(a, b);
      r.match_status = MatchStatus::UpperOnly;
      break;
    }
  }
  r.d_exponent = gamma * r.n_exponent;
  return r;
}

RateTable rate_table(const std::vector<double>& gammas, const std::vector<RateFamily>& families) {
  RateTable t;
  for (RateFamily f : families) {
    for (double g : gammas) {
      try {
        t.points.push_back(rate_curve(g, f));
      } catch (const InvalidArgument& e) {
        t.errors.push_back(std::string(to_string(f)) + " gamma=" + std::to_string(g) + ": " + e.what());
      }
    }
  }
  return t;
}

std::vector<double> gamma_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw InvalidArgument("gamma_grid: need step > 0 and hi >= lo");
  std::vector<double> g;
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  g.reserve(static_cast<std::size_t>(count) + 1);
  // integer multiples of the step keep grid points like 3.00 exact when lo, step are decimals
  const auto q = rationalize(step);
  for (long i = 0; i <= count; ++i) {
    if (q) {
      const auto lq = rationalize(lo);
      if (lq) {
        const double num = static_cast<double>(lq->num) * static_cast<double>(q->den) +
                           static_cast<double>(i) * static_cast<double>(q->num) * static_cast<double>(lq->den);
        g.push_back(num / (static_cast<double>(lq->den) * static_cast<double>(q->den)));
        continue;
      }
    }
    g.push_back(lo + static_cast<double>(i) * step);
  }
  return g;
}

std::vector<Plateau> detect_plateaus(const std::vector<RatePoint>& points, int min_points, double tol) {
  std::vector<Plateau> out;
  std::size_t i = 0;
  while (i < points.size()) {
    std::size_t j = i + 1;
    while (j < points.size() && points[j].family == points[i].family &&
           std::abs(points[j].d_exponent - points[i].d_exponent) <= tol)
      ++j;
    if (static_cast<int>(j - i) >= min_points)
      out.push_back({points[i].gamma, points[j - 1].gamma, points[i].d_exponent});
    i = j;
  }
  return out;
}

}  // namespace skr
