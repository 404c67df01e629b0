#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "skr/kernels.hpp"

namespace skr {

using BigInt = boost::multiprecision::cpp_int;

/// N(d, k): dimension of the degree-k spherical harmonics on S^d.
struct Multiplicity {
  std::optional<BigInt> exact;  // present when k + d <= 2000 (or k <= 1)
  double log_value = 0.0;

  double value() const;
  std::string decimal() const;  // exact digits when available, otherwise scientific
};

Multiplicity multiplicity(int d, int k);
double log_multiplicity(double d, double k);

/// Legendre (Gegenbauer) polynomial of degree k for S^d subset R^{d+1}, normalized P_k(1) = 1.
double legendre(int d, int k, double t);
/// P_0(t), ..., P_kmax(t).
std::vector<double> legendre_all(int d, int kmax, double t);

/// Funk-Hecke eigenvalue mu_k = (omega_{d-1}/omega_d) int phi(t) P_k(t) (1-t^2)^{(d-2)/2} dt
/// by Gauss-Jacobi quadrature with node doubling. Throws NumericError when successive
/// refinements keep disagreeing up to the node cap.
double eigenvalue_quadrature(const KernelProfile& profile, int d, int k);

/// beta_{alpha,k} = (omega_{d-1}/omega_d) int_0^1 t^alpha P_k(t) (1-t^2)^{(d-2)/2} dt.
struct BetaCoefficients {
  int d = 0;
  int alpha = 0;
  int k = 0;
  double value = 0.0;
  double log_abs = 0.0;  // log|beta|, -inf when value == 0
  int sign = 0;
  bool closed_form = false;  // k - alpha odd and positive
  bool zero = false;         // k - alpha positive and even: beta vanishes
};

/// Closed form when k - alpha is a positive odd integer, quadrature of the
/// half-interval integral otherwise.
BetaCoefficients ntk_beta(int d, int alpha, int k);
/// The half-interval integral by quadrature regardless of k - alpha.
double ntk_beta_quadrature(int d, int alpha, int k);

/// Two-layer NTK eigenvalue from the beta coefficients:
/// mu_k = k/(2k+d-1) beta_{0,k-1}^2 + (k+d-1)/(2k+d-1) beta_{0,k+1}^2 + (d+1) beta_{1,k}^2.
/// Also accepts k = 0, where the first term drops out.
double ntk_eigen_closed(int d, int k);
/// log mu_k (-inf for vanishing odd degrees).
double log_ntk_eigen_closed(int d, int k);

/// mu~_0 = mu~_1 = 1, mu~_k = d^d k^{k-2} (k+d)^{-(k+d+1)} (k^2 + kd + d) for k >= 2.
double surrogate_mu(int d, int k);
double log_surrogate_mu(int d, int k);

struct SpectrumLevel {
  int k = 0;
  double mu = 0.0;
  double log_mu = 0.0;
  Multiplicity multiplicity;
};

enum class EigenRoute { Quadrature, NtkClosedForm };

/// Mercer spectrum of an inner-product kernel on S^d, one entry per degree.
struct Spectrum {
  int d = 0;
  std::string profile_label;
  double kappa = 0.0;  // phi(1)
  EigenRoute route = EigenRoute::Quadrature;
  std::vector<SpectrumLevel> levels;
  double partial_trace = 0.0;    // sum over computed levels of mu_k N(d,k)
  double truncation_tail = 0.0;  // kappa - partial_trace: mass beyond the last level
  double tail_estimate = 0.0;    // series estimate of that mass (0 when the series ended)

  /// kappa - (partial_trace + tail_estimate).
  double trace_defect() const { return kappa - partial_trace - tail_estimate; }
  const SpectrumLevel& level(int k) const;
  double max_mu() const;
  /// Eigenvalues repeated by multiplicity, sorted non-increasing, at most max_len of them.
  std::vector<double> expanded(std::size_t max_len) const;
};

inline constexpr int kMaxSpectrumDegree = 512;

/// Levels k = 0, 1, ... until the trace identity sum mu_k N(d,k) = phi(1) is met to
/// tail_tol or k reaches kMaxSpectrumDegree. NTK2 uses the closed form (plus an
/// Euler-Maclaurin tail for its k^-2 mass decay), other profiles use quadrature.
/// Throws NumericError when |trace_defect| > 10 tail_tol at the cap.
Spectrum build_spectrum(const KernelProfile& profile, int d, double tail_tol = 1e-8);

/// mu_k for one degree by the same route build_spectrum would use.
double level_eigenvalue(const KernelProfile& profile, int d, int k);

struct SpectralSum {
  double value = 0.0;  // includes the mass beyond the last level
  double tail = 0.0;   // that mass (truncation_tail), reported separately
};

/// sum_k N(d,k) min{mu_k, mu_p}.
SpectralSum spectral_sum(const Spectrum& spectrum, int p);

}  // namespace skr
