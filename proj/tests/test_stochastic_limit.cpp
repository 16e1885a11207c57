#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "nclab/errors.hpp"
#include "nclab/stochastic_limit.hpp"

using namespace nclab::stochastic_limit;

namespace {

constexpr double pi = 3.14159265358979323846;

// Overlap of two gaussian bumps by direct trapezoid integration. Slow,
// independent of the closed form inside the library.
double overlap_by_quadrature(const TestFunction& f, const TestFunction& g) {
  const double lo = std::min(f.center, g.center) - 10.0;
  const double hi = std::max(f.center, g.center) + 10.0;
  const double step = 1e-3;
  double sum = 0.0;
  for (double t = lo; t <= hi; t += step) sum += f(t) * g(t);
  return sum * step;
}

}  // namespace

TEST_CASE("test functions are normalized gaussian bumps") {
  TestFunction f{1.3, 0.8, true};
  // unit L2 norm
  double norm = 0.0;
  const double step = 1e-3;
  for (double t = -10.0; t <= 12.0; t += step) norm += f(t) * f(t);
  CHECK(norm * step == doctest::Approx(1.0).epsilon(1e-6));
  // peak at the center
  CHECK(f(1.3) > f(1.3 + 0.2));
  CHECK(f(1.3 - 0.4) == doctest::Approx(f(1.3 + 0.4)).epsilon(1e-12));
}

TEST_CASE("closed-form overlap matches quadrature") {
  const std::vector<std::pair<TestFunction, TestFunction>> cases = {
      {{0.0, 1.0, true}, {0.0, 1.0, true}},
      {{0.0, 1.0, true}, {1.0, 0.5, true}},
      {{-0.7, 1.4, true}, {0.9, 0.6, true}},
      {{0.0, 1.0, false}, {0.5, 2.0, true}},
  };
  for (const auto& [f, g] : cases) {
    const double closed = TestFunction::overlap(f, g);
    const double quad = overlap_by_quadrature(f, g);
    CHECK(closed == doctest::Approx(quad).epsilon(1e-7));
  }
  // identical normalized bumps have unit overlap
  TestFunction u{0.3, 1.1, true};
  CHECK(TestFunction::overlap(u, u) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("spectral density is a scaled gaussian") {
  const auto rho = SpectralDensity::normal(0.5, 2.0);
  CHECK(rho(0.5) == doctest::Approx(1.0 / (2.0 * std::sqrt(2.0 * pi))).epsilon(1e-12));
  CHECK(rho(0.5 + 1.0) == doctest::Approx(rho(0.5 - 1.0)).epsilon(1e-12));
  // dispersion offsets ride along as data; the density evaluation itself
  // stays a plain scaled gaussian (the offsets act in resonance_weight)
  SpectralDensity shifted = rho;
  shifted.eps_p = 0.25;
  shifted.eps_p_plus_k = -0.5;
  CHECK(shifted(1.75) == rho(1.75));
}

TEST_CASE("pairing limit equals two pi rho(omega0) times the overlap") {
  TestFunction f{0.0, 1.0, true};
  TestFunction g{0.4, 1.2, true};
  const auto rho = SpectralDensity::normal(0.0, 1.0);
  const auto limit = pairing_limit(f, g, rho, 0.3);
  const double expected = 2.0 * pi * rho(0.3) * TestFunction::overlap(f, g);
  CHECK(limit.real() == doctest::Approx(expected).epsilon(1e-12));
  CHECK(limit.imag() == 0.0);
}

TEST_CASE("rescaled pairing converges toward the limit as lambda decreases") {
  TestFunction f{0.0, 1.0, true};
  TestFunction g{0.0, 1.0, true};
  const auto rho = SpectralDensity::normal(0.0, 1.0);
  RescalingConfig config;
  config.lambdas = {0.5, 0.35, 0.25, 0.18};
  const auto table = convergence_table(config, f, g, rho);

  REQUIRE(table.rows.size() == 4);
  for (std::size_t i = 1; i < table.rows.size(); ++i)
    CHECK(table.rows[i].abs_error < table.rows[i - 1].abs_error);
  CHECK(table.converged);

  const double limit_mag = std::abs(table.limit);
  CHECK(table.rows.back().abs_error / limit_mag < 0.05);
  // the limit of this symmetric configuration is sqrt(2 pi)
  CHECK(std::abs(table.limit - std::complex<double>(std::sqrt(2.0 * pi), 0.0)) < 1e-12);
}

TEST_CASE("swapping the test functions conjugates the pairing") {
  TestFunction f{-0.3, 0.9, true};
  TestFunction g{0.5, 1.3, true};
  const auto rho = SpectralDensity::normal(0.2, 1.1);
  QuadratureSpec quad;
  const auto fg = rescaled_pairing(0.4, f, g, rho, 0.0, quad);
  const auto gf = rescaled_pairing(0.4, g, f, rho, 0.0, quad);
  CHECK(fg.real() == doctest::Approx(gf.real()).epsilon(1e-12));
  CHECK(fg.imag() == doctest::Approx(-gf.imag()).epsilon(1e-12));
}

TEST_CASE("shifting both test functions by a grid multiple leaves the pairing") {
  TestFunction f{0.0, 1.0, true};
  TestFunction g{0.3, 1.2, true};
  const auto rho = SpectralDensity::normal(0.0, 1.0);
  QuadratureSpec quad;
  const double shift = 10.0 * quad.t_step;  // exact multiple of the grid step
  TestFunction fs = f;
  TestFunction gs = g;
  fs.center += shift;
  gs.center += shift;
  const auto base = rescaled_pairing(0.35, f, g, rho, 0.0, quad);
  const auto moved = rescaled_pairing(0.35, fs, gs, rho, 0.0, quad);
  CHECK(std::abs(base - moved) < 1e-8);
}

TEST_CASE("far-separated test functions give a negligible pairing") {
  TestFunction f{-4.0, 0.7, true};
  TestFunction g{4.0, 0.7, true};
  const auto rho = SpectralDensity::normal(0.0, 1.0);
  QuadratureSpec quad;
  quad.t_half_width = 10.0;
  const auto value = rescaled_pairing(0.35, f, g, rho, 0.0, quad);
  CHECK(std::abs(value) < 1e-6);
  CHECK(std::abs(pairing_limit(f, g, rho, 0.0)) < 1e-6);
}

TEST_CASE("resonance weight peaks at the shell and sums to one") {
  const double width = 0.5;
  std::vector<double> grid;
  const double step = width / 8.0;
  for (double w = -6.0; w <= 6.0 + 1e-12; w += step) grid.push_back(w);
  const auto weight = resonance_weight(grid, 0.0, width);
  REQUIRE(weight.size() == grid.size());

  double peak = 0.0;
  double riemann = 0.0;
  for (std::size_t i = 0; i < weight.size(); ++i) {
    CHECK(weight[i] >= 0.0);
    peak = std::max(peak, weight[i]);
    riemann += weight[i] * step;
  }
  CHECK(peak == doctest::Approx(1.0 / (width * std::sqrt(2.0 * pi))).epsilon(1e-12));
  CHECK(riemann == doctest::Approx(1.0).epsilon(0.01));

  // dispersion offsets slide the peak to omega0 - eps_p + eps_p_plus_k
  const auto shifted = resonance_weight({0.75}, 0.0, width, -0.5, 0.25);
  CHECK(shifted[0] == doctest::Approx(peak).epsilon(1e-12));
}

TEST_CASE("domain and argument validation") {
  TestFunction f{0.0, 1.0, true};
  const auto rho = SpectralDensity::normal(0.0, 1.0);
  QuadratureSpec quad;

  CHECK_THROWS_AS(rescaled_pairing(0.0, f, f, rho, 0.0, quad),
                  nclab::InvalidInputError);
  CHECK_THROWS_AS(rescaled_pairing(-0.5, f, f, rho, 0.0, quad),
                  nclab::InvalidInputError);

  TestFunction bad = f;
  bad.width = 0.0;
  CHECK_THROWS_AS(rescaled_pairing(0.5, bad, f, rho, 0.0, quad),
                  nclab::InvalidInputError);

  // domain too narrow for the bump
  QuadratureSpec narrow = quad;
  narrow.t_half_width = 2.0;
  CHECK_THROWS_AS(rescaled_pairing(0.5, f, f, rho, 0.0, narrow),
                  nclab::ConfigError);

  // omega grid too coarse once lambda is small
  QuadratureSpec coarse = quad;
  coarse.omega_step = 0.5;
  CHECK_THROWS_AS(rescaled_pairing(0.05, f, f, rho, 0.0, coarse),
                  nclab::ConfigError);

  // resonance far outside the frequency window
  CHECK_THROWS_AS(rescaled_pairing(0.5, f, f, rho, 50.0, quad),
                  nclab::ConfigError);

  RescalingConfig config;
  config.lambdas = {};
  CHECK_THROWS_AS(convergence_table(config, f, f, rho), nclab::InvalidInputError);
  config.lambdas = {0.2, 0.5};
  CHECK_THROWS_AS(convergence_table(config, f, f, rho), nclab::InvalidInputError);

  CHECK_THROWS_AS(resonance_weight({0.0}, 0.0, 0.0), nclab::InvalidInputError);
}
