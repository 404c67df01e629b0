#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "skr/complexity.hpp"
#include "skr/spectrum.hpp"

namespace skr {

/// K(eps) = (1/2) sum_{k: mu_k > eps^2} N(d,k) log(mu_k / eps^2).
double metric_entropy(const Spectrum& spectrum, double eps);
double metric_entropy(const WeightedEigenvalues& eig, double eps);

struct EntropyFixture {
  double n = 0.0;
  double sigma = 1.0;
  double eps_bar = 0.0;          // root of n eps^2 = K(sqrt(2) sigma eps)
  double entropy_at_root = 0.0;  // K(sqrt(2) sigma eps_bar)
  double residual = 0.0;         // |n eps_bar^2 - entropy_at_root|
  double eps_bar_conservative = 0.0;  // root with K(sqrt(2) sigma eps / 6)
};

/// Throws NoRootError when the entropy vanishes on the whole bracket.
EntropyFixture covering_radius(const Spectrum& spectrum, double n, double sigma);

struct LowerBoundCertificate {
  bool holds = false;
  double lhs = 0.0;  // sum_{mu_k > tau} N(d,k) log(mu_k / tau), tau = c2^2 eps_bar^2 / 36
  double rhs = 0.0;  // 10 n eps_bar^2
  double c2 = 0.2;
  double eps_bar = 0.0;
  double constant = 0.0;     // (1/2)(c2/12)^2
  double lower_bound = 0.0;  // constant * eps_bar^2
};

LowerBoundCertificate certify_lower_bound(const Spectrum& spectrum, double n, double sigma,
                                          double c2 = 0.2);

enum class RateFamily { Inner, Ntk, Interpolation };
enum class MatchStatus { Matched, MatchedUpToLog, MatchedUpToEpsilon, UpperOnly };

std::string_view to_string(RateFamily f);
std::string_view to_string(MatchStatus s);
RateFamily parse_rate_family(std::string_view name);

struct RatePoint {
  double gamma = 0.0;
  RateFamily family = RateFamily::Inner;
  int p = 0;  // regime integer (l = floor(gamma) for interpolation)
  double n_exponent = 0.0;
  double d_exponent = 0.0;  // gamma * n_exponent
  bool log_factor = false;
  MatchStatus match_status = MatchStatus::Matched;
};

/// Excess-risk exponent of n for n = d^gamma. Exponents are formed from an exact
/// rational reading of gamma when one with denominator <= 1e6 exists, so that e.g.
/// gamma = 1.8 yields exactly 5.0 / 9.0. Interpolation requires gamma > 1 (OutOfRange).
RatePoint rate_curve(double gamma, RateFamily family);

struct RateTable {
  std::vector<RatePoint> points;
  std::vector<std::string> errors;  // one message per rejected (gamma, family)
};

RateTable rate_table(const std::vector<double>& gammas, const std::vector<RateFamily>& families);

/// Grid from lo to hi (inclusive) with the given step, free of accumulated drift.
std::vector<double> gamma_grid(double lo, double hi, double step);

struct Plateau {
  double gamma_lo = 0.0;
  double gamma_hi = 0.0;
  double d_exponent = 0.0;
};

/// Maximal runs of at least `min_points` consecutive points (same family, sorted by gamma)
/// whose d_exponent is constant within tol.
std::vector<Plateau> detect_plateaus(const std::vector<RatePoint>& points, int min_points = 3,
                                     double tol = 1e-12);

}  // namespace skr
