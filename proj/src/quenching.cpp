#include "nclab/quenching.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "nclab/errors.hpp"
#include "nclab/kernels.hpp"
#include "nclab/parallel.hpp"
#include "nclab/rng.hpp"

namespace nclab::quenching {

using linalg::Matrix;
using rng::GaussianStream;
using rng::stream_seed;

namespace {

constexpr double pi = 3.1415926535897932384626433832795;

int common_replica_count(const std::vector<QuenchingSpec>& specs) {
  if (specs.empty()) throw InvalidInputError("need at least one quenching spec");
  const int p = specs.front().replicas;
  for (const QuenchingSpec& s : specs) {
    s.validate();
    if (s.replicas != p)
      throw InvalidInputError("quenching specs must share the replica count");
  }
  return p;
}

// Exact spin sum over all 2^n configurations via Gray-code updates.
// The coupling matrix must have zero diagonal.
double spin_sum(const Matrix& jq, int n, double beta_scaled) {
  std::vector<double> sigma(static_cast<std::size_t>(n), 1.0);
  double e = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      e += jq(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  double acc = std::exp(beta_scaled * e);
  const std::uint32_t total = 1u << n;
  for (std::uint32_t g = 1; g < total; ++g) {
    const int b = std::countr_zero(g);
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      s += jq(static_cast<std::size_t>(b), static_cast<std::size_t>(j)) *
           sigma[static_cast<std::size_t>(j)];
    e -= 2.0 * sigma[static_cast<std::size_t>(b)] * s;
    sigma[static_cast<std::size_t>(b)] = -sigma[static_cast<std::size_t>(b)];
    acc += std::exp(beta_scaled * e);
  }
  return acc;
}

void validate_model(const ReplicaModelConfig& config, const QuenchingSpec& spec) {
  if (config.n_spins < 1) throw InvalidInputError("need at least one spin");
  if (config.n_spins > 12)
    throw CapacityError("spin count exceeds the exact-enumeration guard of 12");
  if (!(config.beta >= 0.0) || !std::isfinite(config.beta))
    throw InvalidInputError("beta must be finite and nonnegative");
  if (config.replicas < 1) throw InvalidInputError("need at least one replica");
  spec.validate();
  if (spec.replicas != config.replicas)
    throw InvalidInputError("spec replica count must match the model config");
}

}  // namespace

QuenchingSpec QuenchingSpec::uniform(int replicas) {
  QuenchingSpec spec;
  spec.replicas = replicas;
  spec.coefficients.assign(static_cast<std::size_t>(std::max(replicas, 0)), 1.0);
  spec.validate();
  return spec;
}

void QuenchingSpec::validate() const {
  if (replicas < 1) throw InvalidInputError("replica count must be positive");
  if (coefficients.size() != static_cast<std::size_t>(replicas))
    throw InvalidInputError("coefficient count must equal the replica count");
  double sumsq = 0.0;
  for (double c : coefficients) {
    if (!std::isfinite(c)) throw InvalidInputError("coefficients must be finite");
    sumsq += c * c;
  }
  const double p = static_cast<double>(replicas);
  if (std::abs(sumsq - p) > 1e-9 * p)
    throw InvalidInputError("coefficients must satisfy sum of squares = " +
                            std::to_string(replicas));
}

Matrix apply_quenching(const QuenchingSpec& spec,
                       const random_matrix::ReplicaSample& sample) {
  spec.validate();
  if (sample.replicas.size() != static_cast<std::size_t>(spec.replicas))
    throw InvalidInputError("sample replica count must match the spec");
  const double root_p = std::sqrt(static_cast<double>(spec.replicas));
  Matrix out(sample.replicas.front().rows(), sample.replicas.front().cols());
  for (int a = 0; a < spec.replicas; ++a) {
    const Matrix& j = sample.replicas[static_cast<std::size_t>(a)];
    if (j.rows() != out.rows() || j.cols() != out.cols())
      throw InvalidInputError("replica matrices must share one shape");
    // dividing keeps degenerate coefficient vectors exact, e.g. (sqrt 2, 0)
    kernels::axpy(spec.coefficients[static_cast<std::size_t>(a)] / root_p,
                  j.data(), out.data(), out.size());
  }
  return out;
}

double quenched_algebraic_moment(const std::vector<QuenchingSpec>& specs,
                                 const wick::ContractionRule& rule) {
  const int p = common_replica_count(specs);
  if (rule.modes() < p)
    throw InvalidInputError("contraction rule covers fewer modes than replicas");

  // effective pair kernel between factor slots: K(i,j) = (c_i^T W c_j) / p;
  // the division happens once per entry so integer coefficient vectors
  // stay exact
  const std::size_t k = specs.size();
  std::vector<std::vector<double>> kernel(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      double form = 0.0;
      for (int a = 0; a < p; ++a) {
        double inner = 0.0;
        for (int b = 0; b < p; ++b)
          inner += rule.weight[static_cast<std::size_t>(a)]
                              [static_cast<std::size_t>(b)] *
                   specs[j].coefficients[static_cast<std::size_t>(b)];
        form += specs[i].coefficients[static_cast<std::size_t>(a)] * inner;
      }
      kernel[i][j] = form / static_cast<double>(p);
      kernel[j][i] = kernel[i][j];
    }
  }
  return wick::pairing_moment(kernel, rule.statistics);
}

random_matrix::MomentEstimate quenched_trace_moment(
    const std::vector<QuenchingSpec>& specs, const std::vector<int>& pattern,
    const random_matrix::EnsembleConfig& config) {
  const int p = common_replica_count(specs);
  if (p != config.replicas)
    throw InvalidInputError("ensemble replica count must match the specs");
  if (pattern.empty()) throw InvalidInputError("pattern must be nonempty");
  for (int idx : pattern) {
    if (idx < 0 || idx >= static_cast<int>(specs.size()))
      throw InvalidInputError("pattern index " + std::to_string(idx) +
                              " outside the spec list");
  }

  std::vector<double> values(static_cast<std::size_t>(config.samples));
  parallel_for(values.size(), config.workers, [&](std::size_t s) {
    const random_matrix::ReplicaSample sample =
        random_matrix::sample_replicas(config, static_cast<int>(s));
    std::vector<Matrix> quenched;
    quenched.reserve(specs.size());
    for (const QuenchingSpec& spec : specs)
      quenched.push_back(apply_quenching(spec, sample));
    std::vector<const Matrix*> factors;
    factors.reserve(pattern.size());
    for (int idx : pattern)
      factors.push_back(&quenched[static_cast<std::size_t>(idx)]);
    values[s] = random_matrix::normalized_trace_product(factors, config.n);
  });
  return random_matrix::estimate_of(values);
}

PartitionResult replica_partition(const ReplicaModelConfig& config,
                                  const QuenchingSpec& spec,
                                  PartitionMethod method) {
  validate_model(config, spec);
  const int n = config.n_spins;
  const auto nn = static_cast<std::size_t>(n);
  const int p = config.replicas;
  const double beta_scaled = config.beta / std::sqrt(static_cast<double>(n));
  const double root_p = std::sqrt(static_cast<double>(p));
  std::vector<double> scale(static_cast<std::size_t>(p));
  for (int a = 0; a < p; ++a)
    scale[static_cast<std::size_t>(a)] =
        spec.coefficients[static_cast<std::size_t>(a)] / root_p;

  PartitionResult result;
  result.method = method;

  if (method == PartitionMethod::MonteCarlo) {
    if (config.gauss_samples < 1)
      throw InvalidInputError("need at least one Gaussian draw");
    std::vector<double> values(static_cast<std::size_t>(config.gauss_samples));
    parallel_for(values.size(), config.workers, [&](std::size_t d) {
      Matrix jq(nn, nn);
      for (int a = 0; a < p; ++a) {
        GaussianStream gauss(stream_seed(config.seed, static_cast<std::uint64_t>(d),
                                         static_cast<std::uint64_t>(a)));
        for (int i = 0; i < n; ++i)
          for (int j = i + 1; j < n; ++j)
            jq(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) +=
                scale[static_cast<std::size_t>(a)] * gauss.next();
      }
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
          jq(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) =
              jq(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      values[d] = spin_sum(jq, n, beta_scaled);
    });
    const random_matrix::MomentEstimate est = random_matrix::estimate_of(values);
    result.z = est.value;
    result.std_error = est.std_error;
  } else {
    const int pairs = n * (n - 1) / 2;
    const int dims = p * pairs;
    if (dims > 12)
      throw CapacityError("quadrature needs at most 12 coupling dimensions, got " +
                          std::to_string(dims));
    if (config.gh_order < 1)
      throw InvalidInputError("quadrature order must be positive");
    const double point_count =
        std::pow(static_cast<double>(config.gh_order), static_cast<double>(dims));
    if (point_count > 2e7)
      throw CapacityError("quadrature grid exceeds the 2e7 point guard");

    const linalg::GaussHermiteRule rule = linalg::gauss_hermite(config.gh_order);
    const double root2 = std::sqrt(2.0);

    std::vector<int> index(static_cast<std::size_t>(dims), 0);
    Matrix jq(nn, nn);
    double z = 0.0;
    while (true) {
      double weight = 1.0;
      for (int d = 0; d < dims; ++d)
        weight *= rule.weights[static_cast<std::size_t>(
            index[static_cast<std::size_t>(d)])];
      // dimension order: replica-major, pair slots in row-major (i<j) order
      int d = 0;
      for (std::size_t i = 0; i < nn; ++i)
        for (std::size_t j = 0; j < nn; ++j) jq(i, j) = 0.0;
      for (int a = 0; a < p; ++a) {
        for (int i = 0; i < n; ++i) {
          for (int j = i + 1; j < n; ++j) {
            const double draw =
                root2 *
                rule.nodes[static_cast<std::size_t>(index[static_cast<std::size_t>(d)])];
            jq(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) +=
                scale[static_cast<std::size_t>(a)] * draw;
            ++d;
          }
        }
      }
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
          jq(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) =
              jq(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      z += weight * spin_sum(jq, n, beta_scaled);

      int pos = dims - 1;
      while (pos >= 0 &&
             index[static_cast<std::size_t>(pos)] == config.gh_order - 1)
        index[static_cast<std::size_t>(pos--)] = 0;
      if (pos < 0) break;
      ++index[static_cast<std::size_t>(pos)];
    }
    result.z = z * std::pow(pi, -0.5 * static_cast<double>(dims));
    result.std_error = 0.0;
  }

  if (!std::isfinite(result.z) || result.z <= 0.0)
    throw NumericalError("partition sum left the positive finite range");
  return result;
}

}  // namespace nclab::quenching
