#include "nclab/stochastic_limit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nclab/errors.hpp"

namespace nclab::stochastic_limit {

namespace {

constexpr double pi = 3.1415926535897932384626433832795;
constexpr double two_pi = 6.283185307179586476925286766559;

// Mass of a unit-mass Gaussian (center c, width w) outside [lo, hi].
double gaussian_tail_mass(double c, double w, double lo, double hi) {
  const double inv = 1.0 / (w * std::sqrt(2.0));
  const double left = 0.5 * std::erfc((c - lo) * inv);
  const double right = 0.5 * std::erfc((hi - c) * inv);
  return left + right;
}

struct Grid {
  std::vector<double> points;
  std::vector<double> weights;  // trapezoid
};

Grid make_grid(double lo, double hi, double step) {
  Grid g;
  const double span = hi - lo;
  const std::size_t n =
      std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(span / step)) + 1);
  const double h = span / static_cast<double>(n - 1);
  g.points.resize(n);
  g.weights.assign(n, h);
  for (std::size_t i = 0; i < n; ++i)
    g.points[i] = lo + h * static_cast<double>(i);
  g.weights.front() = 0.5 * h;
  g.weights.back() = 0.5 * h;
  return g;
}

void validate_domain(const TestFunction& f, const TestFunction& g,
                     const SpectralDensity& rho, double omega0, double lambda,
                     const QuadratureSpec& q, double omega_lo, double omega_hi) {
  if (!(lambda > 0.0)) throw InvalidInputError("lambda must be positive");
  if (!(f.width > 0.0) || !(g.width > 0.0))
    throw InvalidInputError("test function width must be positive");
  if (!(rho.width > 0.0))
    throw InvalidInputError("spectral density width must be positive");
  if (rho.amplitude < 0.0)
    throw InvalidInputError("spectral density must be nonnegative");
  if (!(q.t_step > 0.0) || !(q.omega_step > 0.0) || !(q.t_half_width > 0.0) ||
      !(q.omega_half_width > 0.0))
    throw InvalidInputError("quadrature steps and half-widths must be positive");

  const double t_lo = -q.t_half_width;
  const double t_hi = q.t_half_width;
  // the domain has to cover at least 4 sigma each side and leave
  // less than 1e-6 tail mass outside
  for (const TestFunction* tf : {&f, &g}) {
    if (tf->center - 4.0 * tf->width < t_lo || tf->center + 4.0 * tf->width > t_hi)
      throw ConfigError("time domain narrower than 8 test-function widths");
    if (gaussian_tail_mass(tf->center, tf->width, t_lo, t_hi) > 1e-6)
      throw ConfigError("time domain clips more than 1e-6 of a test function");
  }
  if (rho.center - 4.0 * rho.width < omega_lo || rho.center + 4.0 * rho.width > omega_hi)
    throw ConfigError("frequency domain narrower than 8 density widths");
  if (gaussian_tail_mass(rho.center, rho.width, omega_lo, omega_hi) > 1e-6)
    throw ConfigError("frequency domain clips more than 1e-6 of the density");

  // the transforms concentrate near omega0 with scale lambda^2 / width;
  // the shell must sit inside the domain and the omega grid must resolve it
  const double min_width = std::min(f.width, g.width);
  const double shell_margin = 8.0 * lambda * lambda / min_width;
  if (omega0 - shell_margin < omega_lo || omega0 + shell_margin > omega_hi)
    throw ConfigError("frequency domain does not cover the resonance shell");
  if (q.omega_step > 0.25 * lambda * lambda / min_width)
    throw ConfigError("omega step too coarse for lambda = " + std::to_string(lambda));
  // trapezoid aliasing bound for the oscillatory t-sums
  const double max_freq =
      (std::max(std::abs(omega_lo - omega0), std::abs(omega_hi - omega0))) /
      (lambda * lambda);
  if (two_pi / q.t_step - max_freq < 30.0 / min_width)
    throw ConfigError("t step too coarse for the oscillation at lambda = " +
                      std::to_string(lambda));
}

}  // namespace

double TestFunction::amplitude() const {
  return normalized ? std::pow(pi * width * width, -0.25) : 1.0;
}

double TestFunction::operator()(double t) const {
  const double u = (t - center) / width;
  return amplitude() * std::exp(-0.5 * u * u);
}

double TestFunction::overlap(const TestFunction& f, const TestFunction& g) {
  // product of two Gaussians integrates in closed form
  const double s2 = f.width * f.width + g.width * g.width;
  const double d = f.center - g.center;
  return f.amplitude() * g.amplitude() *
         std::sqrt(two_pi * f.width * f.width * g.width * g.width / s2) *
         std::exp(-0.5 * d * d / s2);
}

SpectralDensity SpectralDensity::normal(double center, double width) {
  SpectralDensity rho;
  rho.center = center;
  rho.width = width;
  rho.amplitude = 1.0 / (width * std::sqrt(two_pi));
  return rho;
}

double SpectralDensity::operator()(double omega) const {
  const double u = (omega - center) / width;
  return amplitude * std::exp(-0.5 * u * u);
}

std::complex<double> rescaled_pairing(double lambda, const TestFunction& f,
                                      const TestFunction& g,
                                      const SpectralDensity& rho, double omega0,
                                      const QuadratureSpec& quad) {
  const double omega_lo = rho.center - quad.omega_half_width;
  const double omega_hi = rho.center + quad.omega_half_width;
  validate_domain(f, g, rho, omega0, lambda, quad, omega_lo, omega_hi);

  const Grid tg = make_grid(-quad.t_half_width, quad.t_half_width, quad.t_step);
  const Grid og = make_grid(omega_lo, omega_hi, quad.omega_step);
  const std::size_t nt = tg.points.size();

  std::vector<double> fw(nt), gw(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    fw[i] = tg.weights[i] * f(tg.points[i]);
    gw[i] = tg.weights[i] * g(tg.points[i]);
  }

  const double inv_l2 = 1.0 / (lambda * lambda);
  std::complex<double> acc(0.0, 0.0);
  for (std::size_t j = 0; j < og.points.size(); ++j) {
    const double omega = og.points[j];
    const double density = rho(omega);
    if (density == 0.0) continue;
    const double nu = (omega - omega0) * inv_l2;
    std::complex<double> fsum(0.0, 0.0), gsum(0.0, 0.0);
    for (std::size_t i = 0; i < nt; ++i) {
      const double phase = -nu * tg.points[i];
      const std::complex<double> e(std::cos(phase), std::sin(phase));
      fsum += fw[i] * e;
      gsum += gw[i] * e;
    }
    acc += og.weights[j] * density * fsum * std::conj(gsum);
  }
  return acc * inv_l2;
}

std::complex<double> pairing_limit(const TestFunction& f, const TestFunction& g,
                                   const SpectralDensity& rho, double omega0) {
  return {two_pi * rho(omega0) * TestFunction::overlap(f, g), 0.0};
}

ConvergenceTable convergence_table(const RescalingConfig& config,
                                   const TestFunction& f, const TestFunction& g,
                                   const SpectralDensity& rho) {
  if (config.lambdas.empty())
    throw InvalidInputError("convergence table needs at least one lambda");
  for (std::size_t i = 0; i < config.lambdas.size(); ++i) {
    if (!(config.lambdas[i] > 0.0))
      throw InvalidInputError("lambdas must be positive");
    if (i > 0 && !(config.lambdas[i] < config.lambdas[i - 1]))
      throw InvalidInputError("lambdas must be strictly decreasing");
  }
  ConvergenceTable table;
  table.limit = pairing_limit(f, g, rho, config.omega0);
  for (double lambda : config.lambdas) {
    ConvergenceRow row;
    row.lambda = lambda;
    row.value = rescaled_pairing(lambda, f, g, rho, config.omega0, config.quadrature);
    row.abs_error = std::abs(row.value - table.limit);
    table.rows.push_back(row);
  }
  bool decreasing = table.rows.size() >= 3;
  for (std::size_t i = 1; i < table.rows.size(); ++i)
    if (!(table.rows[i].abs_error < table.rows[i - 1].abs_error)) decreasing = false;
  const double denom = std::max(std::abs(table.limit), 1e-30);
  table.converged = decreasing && table.rows.back().abs_error / denom < 0.05;
  return table;
}

std::vector<double> resonance_weight(const std::vector<double>& omega_grid,
                                     double omega0, double width, double eps_p,
                                     double eps_p_plus_k) {
  if (!(width > 0.0)) throw InvalidInputError("resonance width must be positive");
  const double norm = 1.0 / (width * std::sqrt(two_pi));
  std::vector<double> w;
  w.reserve(omega_grid.size());
  for (double omega : omega_grid) {
    const double x = (omega + eps_p - eps_p_plus_k - omega0) / width;
    w.push_back(norm * std::exp(-0.5 * x * x));
  }
  return w;
}

}  // namespace nclab::stochastic_limit
