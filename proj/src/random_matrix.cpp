#include "nclab/random_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "nclab/errors.hpp"
#include "nclab/kernels.hpp"
#include "nclab/parallel.hpp"
#include "nclab/rng.hpp"
#include "nclab/wick.hpp"

namespace nclab::random_matrix {

using linalg::Matrix;
using rng::GaussianStream;
using rng::stream_seed;

namespace {

void validate(const EnsembleConfig& config) {
  if (config.n < 2) throw InvalidInputError("matrix dimension must be at least 2");
  if (config.replicas < 1) throw InvalidInputError("need at least one replica");
  if (config.samples < 1) throw InvalidInputError("need at least one sample");
  const double storage = static_cast<double>(config.n) * config.n * config.replicas;
  if (storage > 1e8)
    throw CapacityError("ensemble sample exceeds the 1e8 entry budget");
}

void validate_pattern(const std::vector<int>& pattern, int replicas) {
  if (pattern.empty()) throw InvalidInputError("pattern must be nonempty");
  for (int a : pattern) {
    if (a < 0 || a >= replicas)
      throw InvalidInputError("pattern index " + std::to_string(a) +
                              " outside replica range");
  }
}

// tau estimate for one sample: (1/n) tr of the normalized product.
double sample_trace(const ReplicaSample& sample, const std::vector<int>& pattern,
                    int n) {
  std::vector<const Matrix*> factors;
  factors.reserve(pattern.size());
  for (int a : pattern)
    factors.push_back(&sample.replicas[static_cast<std::size_t>(a)]);
  return normalized_trace_product(factors, n);
}

}  // namespace

// The semicircle elements X_a are free and standard, so the mixed moment is
// the Boltzmann vacuum moment of Q_a = A_a + A_a^dagger with a Kronecker
// pairing table.
double free_prediction(const std::vector<int>& pattern, int colors) {
  if (colors < 1) throw InvalidInputError("need at least one color");
  validate_pattern(pattern, colors);
  std::vector<wick::OperatorExpr> chain;
  chain.reserve(pattern.size());
  for (int a : pattern) chain.push_back(wick::OperatorExpr::coordinate(a));
  const auto rule = wick::ContractionRule::kronecker(
      wick::Statistics::Boltzmann, colors);
  return wick::expr_moment(chain, rule);
}

ReplicaSample sample_replicas(const EnsembleConfig& config, int sample_index) {
  validate(config);
  if (sample_index < 0) throw InvalidInputError("sample index must be nonnegative");
  ReplicaSample sample;
  sample.replicas.reserve(static_cast<std::size_t>(config.replicas));
  const auto n = static_cast<std::size_t>(config.n);
  for (int a = 0; a < config.replicas; ++a) {
    GaussianStream gauss(stream_seed(config.seed,
                                     static_cast<std::uint64_t>(sample_index),
                                     static_cast<std::uint64_t>(a)));
    Matrix j(n, n);
    for (std::size_t r = 0; r < n; ++r) {
      j(r, r) = gauss.next();
      for (std::size_t c = r + 1; c < n; ++c) {
        const double v = gauss.next();
        j(r, c) = v;
        j(c, r) = v;
      }
    }
    sample.replicas.push_back(std::move(j));
  }
  return sample;
}

MomentEstimate estimate_of(const std::vector<double>& values) {
  if (values.empty()) throw InvalidInputError("estimate needs at least one value");
  MomentEstimate est;
  est.samples = static_cast<int>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  est.value = mean;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    est.std_error = std::sqrt(
        ss / (static_cast<double>(values.size()) *
              static_cast<double>(values.size() - 1)));
  }
  return est;
}

double normalized_trace_product(const std::vector<const Matrix*>& factors, int n) {
  if (factors.empty()) throw InvalidInputError("trace product needs a factor");
  for (const Matrix* f : factors) {
    if (f->rows() != static_cast<std::size_t>(n) || f->cols() != f->rows())
      throw InvalidInputError("trace product factors must be square of size n");
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  if (factors.size() == 1)
    return scale * trace(*factors[0]) / static_cast<double>(n);
  // accumulate P = X_1 ... X_{k-1}, then tr(P X_k) as a dot with the
  // symmetric last factor
  Matrix prod = *factors[0];
  Matrix next(prod.rows(), prod.cols());
  for (std::size_t i = 1; i + 1 < factors.size(); ++i) {
    kernels::gemm(prod.rows(), prod.cols(), factors[i]->cols(), prod.data(),
                  factors[i]->data(), next.data());
    std::swap(prod, next);
  }
  const double raw = kernels::dot(prod.data(), factors.back()->data(), prod.size());
  const double norm = std::pow(scale, static_cast<double>(factors.size()));
  return norm * raw / static_cast<double>(n);
}

MomentEstimate trace_moment(const EnsembleConfig& config,
                            const std::vector<int>& pattern) {
  validate(config);
  validate_pattern(pattern, config.replicas);
  std::vector<double> values(static_cast<std::size_t>(config.samples));
  parallel_for(values.size(), config.workers, [&](std::size_t s) {
    const ReplicaSample sample = sample_replicas(config, static_cast<int>(s));
    values[s] = sample_trace(sample, pattern, config.n);
  });
  return estimate_of(values);
}

std::vector<std::vector<int>> canonical_patterns(int colors, int max_degree) {
  if (colors < 1) throw InvalidInputError("need at least one color");
  if (max_degree < 1 || max_degree > 8)
    throw InvalidInputError("max degree must lie in [1, 8]");

  // canonical form: minimal word over cyclic rotations, then colors
  // renamed in order of first occurrence
  auto relabel = [](const std::vector<int>& p) {
    std::vector<int> map(16, -1);
    std::vector<int> out;
    out.reserve(p.size());
    int next = 0;
    for (int a : p) {
      if (map[static_cast<std::size_t>(a)] < 0)
        map[static_cast<std::size_t>(a)] = next++;
      out.push_back(map[static_cast<std::size_t>(a)]);
    }
    return out;
  };
  auto canonical = [&](const std::vector<int>& p) {
    std::vector<int> best = relabel(p);
    std::vector<int> rot = p;
    for (std::size_t r = 1; r < p.size(); ++r) {
      std::rotate(rot.begin(), rot.begin() + 1, rot.end());
      std::vector<int> cand = relabel(rot);
      if (cand < best) best = cand;
    }
    return best;
  };

  std::vector<std::vector<int>> result;
  for (int len = 1; len <= max_degree; ++len) {
    std::vector<std::vector<int>> seen;
    std::vector<int> word(static_cast<std::size_t>(len), 0);
    while (true) {
      std::vector<int> canon = canonical(word);
      // canonical words start at color 0 by construction
      if (std::find(seen.begin(), seen.end(), canon) == seen.end() &&
          canon == relabel(word))
        seen.push_back(canon);
      // odometer over colors
      int pos = len - 1;
      while (pos >= 0 && word[static_cast<std::size_t>(pos)] == colors - 1)
        word[static_cast<std::size_t>(pos--)] = 0;
      if (pos < 0) break;
      ++word[static_cast<std::size_t>(pos)];
    }
    std::sort(seen.begin(), seen.end());
    for (auto& p : seen) result.push_back(std::move(p));
  }
  return result;
}

FreenessReport freeness_report(const EnsembleConfig& config, int max_degree) {
  validate(config);
  const auto patterns = canonical_patterns(config.replicas, max_degree);

  // one ensemble sample evaluates every pattern; patterns share samples
  std::vector<std::vector<double>> values(
      patterns.size(), std::vector<double>(static_cast<std::size_t>(config.samples)));
  parallel_for(static_cast<std::size_t>(config.samples), config.workers,
               [&](std::size_t s) {
                 const ReplicaSample sample =
                     sample_replicas(config, static_cast<int>(s));
                 for (std::size_t p = 0; p < patterns.size(); ++p)
                   values[p][s] = sample_trace(sample, patterns[p], config.n);
               });

  FreenessReport report;
  report.rows.reserve(patterns.size());
  for (std::size_t p = 0; p < patterns.size(); ++p) {
    FreenessRow row;
    row.pattern = patterns[p];
    row.estimate = estimate_of(values[p]);
    row.prediction = free_prediction(patterns[p], config.replicas);
    const double dev = row.estimate.value - row.prediction;
    if (row.estimate.std_error > 0.0) {
      row.zscore = dev / row.estimate.std_error;
    } else {
      row.zscore = (dev == 0.0) ? 0.0 : std::numeric_limits<double>::infinity();
    }
    report.max_abs_zscore = std::max(report.max_abs_zscore, std::abs(row.zscore));
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace nclab::random_matrix
