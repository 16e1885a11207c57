#pragma once

#include <complex>
#include <vector>

// Rescaled pairing integrals of the van Hove regime: the kernel
// (1/lambda^2) exp(-i ((t-t')/lambda^2)(omega - omega0)) concentrates on
// t = t' and omega = omega0 as lambda -> 0, and the pairing
//   I_lambda = int dt dt' domega f(t) conj(g(t')) kernel rho(omega)
// tends to 2 pi rho(omega0) int f conj(g). The triple product quadrature
// factors exactly through the one-dimensional transforms
// F(omega) = int f(t) exp(-i (omega-omega0) t / lambda^2) dt, so the
// evaluation is O(n_omega * n_t) while remaining the same trapezoid sum.
namespace nclab::stochastic_limit {

// Real Gaussian bump; normalized means unit L2 norm.
struct TestFunction {
  double center = 0.0;
  double width = 1.0;
  bool normalized = true;

  double amplitude() const;
  double operator()(double t) const;
  // integral f * g over the line, in closed form
  static double overlap(const TestFunction& f, const TestFunction& g);
};

// Gaussian spectral density rho(omega) >= 0 with optional fixed dispersion
// offsets for the two-shell case: the resonance argument becomes
// omega + eps_p - eps_p_plus_k - omega0.
struct SpectralDensity {
  double center = 0.0;
  double width = 1.0;
  double amplitude = 0.3989422804014326779399460599344;  // pdf normalization
  double eps_p = 0.0;
  double eps_p_plus_k = 0.0;

  static SpectralDensity normal(double center, double width);
  double operator()(double omega) const;
};

struct QuadratureSpec {
  double t_step = 0.02;
  double t_half_width = 8.0;
  double omega_step = 0.004;
  double omega_half_width = 8.0;
};

struct RescalingConfig {
  std::vector<double> lambdas{0.5, 0.35, 0.25, 0.18};
  double omega0 = 0.0;
  QuadratureSpec quadrature;
};

// One scaled pairing value. Throws ConfigError when the domain clips more
// than 1e-6 of a Gaussian tail, misses the resonance shell, or the grid
// cannot resolve the oscillation at this lambda.
std::complex<double> rescaled_pairing(double lambda, const TestFunction& f,
                                      const TestFunction& g,
                                      const SpectralDensity& rho, double omega0,
                                      const QuadratureSpec& quad);

// Closed-form limit 2 pi rho(omega0) int f conj(g).
std::complex<double> pairing_limit(const TestFunction& f, const TestFunction& g,
                                   const SpectralDensity& rho, double omega0);

struct ConvergenceRow {
  double lambda = 0.0;
  std::complex<double> value;
  double abs_error = 0.0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  std::complex<double> limit;
  // >= 3 rows, strictly decreasing errors, final relative error < 5%
  bool converged = false;
};

// Lambdas must be positive and strictly decreasing.
ConvergenceTable convergence_table(const RescalingConfig& config,
                                   const TestFunction& f, const TestFunction& g,
                                   const SpectralDensity& rho);

// Normalized Gaussian resonance kernel evaluated on a mode grid:
// weight_i = exp(-x_i^2 / (2 width^2)) / (width sqrt(2 pi)) with
// x_i = omega_i + eps_p - eps_p_plus_k - omega0. Feeds the diagonal of a
// ContractionRule. Peak value 1/(width sqrt(2 pi)); Riemann sums over a
// covering grid approximate 1.
std::vector<double> resonance_weight(const std::vector<double>& omega_grid,
                                     double omega0, double width,
                                     double eps_p = 0.0,
                                     double eps_p_plus_k = 0.0);

}  // namespace nclab::stochastic_limit
