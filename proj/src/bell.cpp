#include "nclab/bell.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <utility>

#include "nclab/errors.hpp"
#include "nclab/kernels.hpp"
#include "nclab/parallel.hpp"
#include "nclab/random_matrix.hpp"
#include "nclab/rng.hpp"
#include "nclab/wick.hpp"

namespace nclab::bell {

using linalg::Matrix;

namespace {

constexpr double two_pi = 6.283185307179586476925286766559;

// correlator slot -> (first observable, second observable) over A1 A2 B1 B2
constexpr int pair_a[4] = {0, 0, 1, 1};
constexpr int pair_b[4] = {2, 3, 2, 3};

std::vector<double> effective_coefficients(const ObservableSpec& spec) {
  spec.validate();
  std::vector<double> c = spec.coefficients;
  if (spec.quenched) {
    // dividing keeps degenerate coefficient vectors exact
    const double root_p = std::sqrt(static_cast<double>(c.size()));
    for (double& v : c) v /= root_p;
  }
  return c;
}

double sign_or_clamp(double value, Transform transform, double zero_band) {
  if (transform == Transform::Clamp) return std::clamp(value, -1.0, 1.0);
  if (value > zero_band) return 1.0;
  if (value < -zero_band) return -1.0;
  return 1.0;  // zero maps to +1
}

int common_mode_count(const CHSHConfig& config) {
  const std::size_t m = config.observables.front().coefficients.size();
  for (const ObservableSpec& spec : config.observables) {
    spec.validate();
    if (spec.coefficients.size() != m)
      throw InvalidInputError("all four observables must share one mode count");
  }
  return static_cast<int>(m);
}

double assemble_s(const std::array<double, 4>& c) {
  return c[0] + c[1] + c[2] - c[3];
}

// one classical outcome from the shared Gaussian draw `g`
double classical_value(const std::vector<double>& coeff, Transform transform,
                       const double* g) {
  double y = 0.0;
  for (std::size_t a = 0; a < coeff.size(); ++a) y += coeff[a] * g[a];
  return sign_or_clamp(y, transform, 0.0);
}

// per-sample shared draws, samples x modes row-major
std::vector<double> shared_gaussians(int samples, int modes, std::uint64_t seed,
                                     int workers) {
  std::vector<double> g(static_cast<std::size_t>(samples) *
                        static_cast<std::size_t>(modes));
  parallel_for(static_cast<std::size_t>(samples), workers, [&](std::size_t s) {
    rng::GaussianStream gauss(rng::stream_seed(seed, s, 0));
    double* row = g.data() + s * static_cast<std::size_t>(modes);
    for (int a = 0; a < modes; ++a) row[a] = gauss.next();
  });
  return g;
}

CHSHResult chsh_fock(const CHSHConfig& config) {
  const int m = common_mode_count(config);
  if (config.truncation_level < 1)
    throw InvalidInputError("truncation level must be at least 1");
  auto basis =
      std::make_shared<const fock::FreeFockBasis>(m, config.truncation_level);
  std::array<fock::OperatorMatrix, 4> obs;
  for (std::size_t i = 0; i < 4; ++i)
    obs[i] = bounded_observable(config.observables[i], basis);

  CHSHResult result;
  result.backend = BackendKind::Fock;
  result.truncation_level = config.truncation_level;
  const std::size_t d = basis->dimension();
  for (int k = 0; k < 4; ++k) {
    // <O|AB|O> = (AB)_00; both observables are exactly symmetric, so the
    // raw and symmetrized correlators coincide as the same vacuum-row dot
    const double raw =
        kernels::dot(obs[static_cast<std::size_t>(pair_a[k])].mat.row(0),
                     obs[static_cast<std::size_t>(pair_b[k])].mat.row(0), d);
    result.raw_correlators[static_cast<std::size_t>(k)] = raw;
    result.correlators[static_cast<std::size_t>(k)] = raw;
  }
  result.s = assemble_s(result.correlators);
  result.side_commutator_norms[0] =
      linalg::frobenius_norm(fock::commutator(obs[0], obs[1]).mat);
  result.side_commutator_norms[1] =
      linalg::frobenius_norm(fock::commutator(obs[2], obs[3]).mat);
  for (int k = 0; k < 4; ++k)
    result.cross_commutator_norms[static_cast<std::size_t>(k)] =
        linalg::frobenius_norm(
            fock::commutator(obs[static_cast<std::size_t>(pair_a[k])],
                             obs[static_cast<std::size_t>(pair_b[k])])
                .mat);
  return result;
}

CHSHResult chsh_classical(const CHSHConfig& config) {
  const int m = common_mode_count(config);
  if (config.samples < 1000)
    throw InvalidInputError("classical backend needs at least 1000 samples");
  std::array<std::vector<double>, 4> coeff;
  for (std::size_t i = 0; i < 4; ++i)
    coeff[i] = effective_coefficients(config.observables[i]);

  const auto samples = static_cast<std::size_t>(config.samples);
  const std::vector<double> g =
      shared_gaussians(config.samples, m, config.seed, config.workers);

  std::array<std::vector<double>, 4> values;
  for (auto& v : values) v.resize(samples);
  parallel_for(samples, config.workers, [&](std::size_t s) {
    const double* row = g.data() + s * static_cast<std::size_t>(m);
    for (std::size_t i = 0; i < 4; ++i)
      values[i][s] = classical_value(coeff[i], config.observables[i].transform, row);
  });

  CHSHResult result;
  result.backend = BackendKind::Classical;
  result.truncation_level = 0;
  for (int k = 0; k < 4; ++k) {
    const double c =
        kernels::dot(values[static_cast<std::size_t>(pair_a[k])].data(),
                     values[static_cast<std::size_t>(pair_b[k])].data(),
                     samples) /
        static_cast<double>(samples);
    result.correlators[static_cast<std::size_t>(k)] = c;
    result.raw_correlators[static_cast<std::size_t>(k)] = c;
  }
  result.s = assemble_s(result.correlators);

  std::vector<double> svals(samples);
  for (std::size_t s = 0; s < samples; ++s)
    svals[s] = values[0][s] * values[2][s] + values[0][s] * values[3][s] +
               values[1][s] * values[2][s] - values[1][s] * values[3][s];
  result.std_error = random_matrix::estimate_of(svals).std_error;
  return result;
}

}  // namespace

void ObservableSpec::validate() const {
  if (coefficients.empty())
    throw InvalidInputError("observable needs at least one coefficient");
  bool nonzero = false;
  for (double c : coefficients) {
    if (!std::isfinite(c))
      throw InvalidInputError("observable coefficients must be finite");
    if (c != 0.0) nonzero = true;
  }
  if (!nonzero)
    throw InvalidInputError("observable coefficient vector must be nonzero");
}

fock::OperatorMatrix bounded_observable(
    const ObservableSpec& spec, std::shared_ptr<const fock::FockBasis> basis) {
  if (!basis) throw InvalidInputError("observable needs a basis");
  const std::vector<double> c = effective_coefficients(spec);
  if (static_cast<int>(c.size()) > basis->modes())
    throw InvalidInputError("observable references more modes than the basis");

  wick::OperatorExpr expr;
  for (int a = 0; a < static_cast<int>(c.size()); ++a) {
    expr.add_term(c[static_cast<std::size_t>(a)], {wick::annihilator(a)});
    expr.add_term(c[static_cast<std::size_t>(a)], {wick::creator(a)});
  }
  fock::OperatorMatrix y = expr_matrix(expr, basis);

  const linalg::SymEigen eig = linalg::sym_eigen(y.mat);
  const std::size_t n = y.mat.rows();
  double spectral_radius = 0.0;
  for (double v : eig.values) spectral_radius = std::max(spectral_radius, std::abs(v));

  Matrix scaled = eig.vectors_t;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = sign_or_clamp(eig.values[i], spec.transform,
                                   1e-12 * spectral_radius);
    kernels::scale(f, scaled.row(i), n);
  }
  const Matrix vt = linalg::transpose(eig.vectors_t);
  Matrix out(n, n);
  kernels::gemm(n, n, n, vt.data(), scaled.data(), out.data());
  return {std::move(basis), linalg::symmetrize(out)};
}

CHSHResult chsh_value(const CHSHConfig& config) {
  if (config.backend == BackendKind::Fock) return chsh_fock(config);
  return chsh_classical(config);
}

namespace {

// unit direction from modes-1 spherical angles
std::vector<double> direction_from_angles(const double* angles, int modes) {
  std::vector<double> c(static_cast<std::size_t>(modes), 1.0);
  double run = 1.0;
  for (int a = 0; a + 1 < modes; ++a) {
    c[static_cast<std::size_t>(a)] = run * std::cos(angles[a]);
    run *= std::sin(angles[a]);
  }
  c[static_cast<std::size_t>(modes - 1)] = run;
  return c;
}

ObservableSpec spec_from_angles(const double* angles, const SearchConfig& config) {
  ObservableSpec spec;
  spec.coefficients = direction_from_angles(angles, config.modes);
  if (config.quenched) {
    const double root_p = std::sqrt(static_cast<double>(config.modes));
    for (double& v : spec.coefficients) v *= root_p;
  }
  spec.transform = config.transform;
  spec.quenched = config.quenched;
  return spec;
}

double wrap_angle(double x) {
  double y = std::fmod(x, two_pi);
  if (y < 0.0) y += two_pi;
  return y;
}

// Payload is whatever a correlator is a scaled dot product of: the
// observable's vacuum row (fock) or its per-sample outcomes (classical).
class Correlation {
 public:
  Correlation(const SearchConfig& config)
      : config_(config) {
    if (config.backend == BackendKind::Fock) {
      if (config.truncation_level < 1)
        throw InvalidInputError("truncation level must be at least 1");
      basis_ = std::make_shared<const fock::FreeFockBasis>(
          config.modes, config.truncation_level);
      denom_ = 1.0;
    } else {
      if (config.samples < 1000)
        throw InvalidInputError("classical backend needs at least 1000 samples");
      draws_ = shared_gaussians(config.samples, config.modes, config.seed,
                                config.workers);
      denom_ = static_cast<double>(config.samples);
    }
  }

  std::vector<double> payload(const ObservableSpec& spec) const {
    if (config_.backend == BackendKind::Fock) {
      const fock::OperatorMatrix obs = bounded_observable(spec, basis_);
      const std::size_t d = obs.basis->dimension();
      return std::vector<double>(obs.mat.row(0), obs.mat.row(0) + d);
    }
    const std::vector<double> coeff = effective_coefficients(spec);
    const auto samples = static_cast<std::size_t>(config_.samples);
    std::vector<double> out(samples);
    for (std::size_t s = 0; s < samples; ++s)
      out[s] = classical_value(coeff, spec.transform,
                               draws_.data() + s * static_cast<std::size_t>(
                                                       config_.modes));
    return out;
  }

  // same dot-then-divide shape as the direct evaluator, so a search result
  // re-evaluated through chsh_value reproduces the traced value bit for bit
  double correlate(const std::vector<double>& a,
                   const std::vector<double>& b) const {
    return kernels::dot(a.data(), b.data(), a.size()) / denom_;
  }

 private:
  const SearchConfig& config_;
  std::shared_ptr<const fock::FockBasis> basis_;
  std::vector<double> draws_;
  double denom_ = 1.0;
};

}  // namespace

SearchResult maximize_chsh(const SearchConfig& config) {
  if (config.modes < 1) throw InvalidInputError("need at least one mode");
  if (config.modes > 6) throw CapacityError("search supports at most 6 modes");
  if (config.grid_points < 1)
    throw InvalidInputError("grid needs at least one point per angle");
  if (config.grid_points > 9)
    throw CapacityError("grid supports at most 9 points per angle");
  if (config.refine_steps < 0)
    throw InvalidInputError("refinement steps must be nonnegative");

  const int angles_per = std::max(config.modes - 1, 0);
  double cand_estimate = 1.0;
  for (int a = 0; a < angles_per; ++a)
    cand_estimate *= static_cast<double>(config.grid_points);
  if (cand_estimate * cand_estimate * cand_estimate * cand_estimate > 2e5)
    throw CapacityError(
        "search grid exceeds the 2e5 combination guard; lower the grid "
        "resolution or the mode count");
  const std::size_t cand_count = static_cast<std::size_t>(cand_estimate);

  const Correlation correlation(config);

  // candidate angle tuples in odometer order
  std::vector<std::vector<double>> cand_angles(cand_count);
  for (std::size_t ci = 0; ci < cand_count; ++ci) {
    std::vector<double> angles(static_cast<std::size_t>(angles_per), 0.0);
    std::size_t rest = ci;
    for (int a = angles_per - 1; a >= 0; --a) {
      angles[static_cast<std::size_t>(a)] =
          two_pi *
          static_cast<double>(rest % static_cast<std::size_t>(config.grid_points)) /
          static_cast<double>(config.grid_points);
      rest /= static_cast<std::size_t>(config.grid_points);
    }
    cand_angles[ci] = std::move(angles);
  }

  std::vector<std::vector<double>> cand_payload(cand_count);
  parallel_for(cand_count, config.workers, [&](std::size_t ci) {
    cand_payload[ci] =
        correlation.payload(spec_from_angles(cand_angles[ci].data(), config));
  });

  // all candidate-pair correlators once; roles share the candidate set
  Matrix table(cand_count, cand_count);
  for (std::size_t i = 0; i < cand_count; ++i)
    for (std::size_t j = i; j < cand_count; ++j) {
      table(i, j) = correlation.correlate(cand_payload[i], cand_payload[j]);
      table(j, i) = table(i, j);
    }

  SearchResult result;
  std::array<std::size_t, 4> best{0, 0, 0, 0};
  double best_abs = -1.0;
  std::int64_t combo_index = 0;
  std::array<std::size_t, 4> combo{0, 0, 0, 0};
  while (true) {
    std::array<double, 4> c{table(combo[0], combo[2]), table(combo[0], combo[3]),
                            table(combo[1], combo[2]), table(combo[1], combo[3])};
    const double s = assemble_s(c);
    SearchTraceRow row;
    row.refined = false;
    row.index = combo_index;
    row.s = s;
    row.angles.reserve(static_cast<std::size_t>(4 * angles_per));
    for (std::size_t r = 0; r < 4; ++r)
      row.angles.insert(row.angles.end(), cand_angles[combo[r]].begin(),
                        cand_angles[combo[r]].end());
    result.trace.push_back(std::move(row));
    if (std::abs(s) > best_abs) {
      best_abs = std::abs(s);
      best = combo;
    }
    ++combo_index;
    int pos = 3;
    while (pos >= 0 && combo[static_cast<std::size_t>(pos)] == cand_count - 1)
      combo[static_cast<std::size_t>(pos--)] = 0;
    if (pos < 0) break;
    ++combo[static_cast<std::size_t>(pos)];
  }

  // coordinate descent: one angle at a time, shrinking bracket, accept
  // only strict improvements so the best value is monotone
  std::array<std::vector<double>, 4> role_angles;
  std::array<std::vector<double>, 4> role_payload;
  for (std::size_t r = 0; r < 4; ++r) {
    role_angles[r] = cand_angles[best[r]];
    role_payload[r] = cand_payload[best[r]];
  }

  double step = two_pi / static_cast<double>(config.grid_points);
  std::int64_t refine_index = 0;
  for (int sweep = 0; sweep < config.refine_steps && angles_per > 0; ++sweep) {
    for (std::size_t r = 0; r < 4; ++r) {
      for (int a = 0; a < angles_per; ++a) {
        for (double delta : {-step, step}) {
          std::vector<double> trial = role_angles[r];
          trial[static_cast<std::size_t>(a)] =
              wrap_angle(trial[static_cast<std::size_t>(a)] + delta);
          std::vector<double> payload =
              correlation.payload(spec_from_angles(trial.data(), config));
          std::array<double, 4> c{};
          for (int k = 0; k < 4; ++k) {
            const auto ia = static_cast<std::size_t>(pair_a[k]);
            const auto ib = static_cast<std::size_t>(pair_b[k]);
            const std::vector<double>& pa = (ia == r) ? payload : role_payload[ia];
            const std::vector<double>& pb = (ib == r) ? payload : role_payload[ib];
            c[static_cast<std::size_t>(k)] = correlation.correlate(pa, pb);
          }
          const double s = assemble_s(c);
          SearchTraceRow row;
          row.refined = true;
          row.index = refine_index++;
          row.s = s;
          row.angles.reserve(static_cast<std::size_t>(4 * angles_per));
          for (std::size_t q = 0; q < 4; ++q) {
            const std::vector<double>& src = (q == r) ? trial : role_angles[q];
            row.angles.insert(row.angles.end(), src.begin(), src.end());
          }
          result.trace.push_back(std::move(row));
          if (std::abs(s) > best_abs) {
            best_abs = std::abs(s);
            role_angles[r] = std::move(trial);
            role_payload[r] = std::move(payload);
          }
        }
      }
    }
    step /= 3.0;
  }

  CHSHConfig best_config;
  for (std::size_t r = 0; r < 4; ++r)
    best_config.observables[r] = spec_from_angles(role_angles[r].data(), config);
  best_config.backend = config.backend;
  best_config.truncation_level = config.truncation_level;
  best_config.samples = config.samples;
  best_config.seed = config.seed;
  best_config.workers = config.workers;

  result.best_config = best_config;
  result.best = chsh_value(best_config);
  result.trace.shrink_to_fit();
  return result;
}

}  // namespace nclab::bell
