#pragma once

#include <cstdint>
#include <vector>

#include "nclab/linalg.hpp"

namespace nclab::random_matrix {

// Ensemble of independent symmetric Gaussian matrices ("replicas").
// Off-diagonal entries N(0,1), diagonal N(0,1), symmetrized; the
// normalized matrices J / sqrt(n) have semicircle statistics.
struct EnsembleConfig {
  int n = 64;          // matrix dimension
  int replicas = 2;    // number of independent matrices per sample
  int samples = 32;    // Monte Carlo samples
  std::uint64_t seed = 1;
  int workers = 1;
};

struct ReplicaSample {
  std::vector<linalg::Matrix> replicas;  // unnormalized J, symmetric
};

struct MomentEstimate {
  double value = 0.0;
  double std_error = 0.0;
  int samples = 0;
};

// Sample mean and standard error of the mean.
MomentEstimate estimate_of(const std::vector<double>& values);

// One sample of the ensemble: `replicas` independent symmetric matrices.
// Deterministic in (config.seed, sample_index); independent across both.
ReplicaSample sample_replicas(const EnsembleConfig& config, int sample_index = 0);

// (1/n) tr of the product of the normalized factors J/sqrt(n).
// Factors must be n x n and symmetric.
double normalized_trace_product(const std::vector<const linalg::Matrix*>& factors, int n);

// Monte Carlo estimate of tau(X_{p1} X_{p2} ... X_{pk}) where
// X_a = J_a / sqrt(n) and tau = E[(1/n) tr].  `pattern` lists replica
// indices in product order.
MomentEstimate trace_moment(const EnsembleConfig& config,
                            const std::vector<int>& pattern);

// Mixed-moment value predicted by free probability for a color pattern
// (non-crossing pair partitions with matching colors).
double free_prediction(const std::vector<int>& pattern, int colors);

struct FreenessRow {
  std::vector<int> pattern;
  MomentEstimate estimate;
  double prediction = 0.0;  // free (Boltzmann) semicircle value
  double zscore = 0.0;
};

struct FreenessReport {
  std::vector<FreenessRow> rows;
  double max_abs_zscore = 0.0;
};

// All canonical mixed-moment patterns over `colors` replicas with length
// <= max_degree, deduplicated under cyclic rotation and color relabeling.
std::vector<std::vector<int>> canonical_patterns(int colors, int max_degree);

// Compares Monte Carlo moments against the free-probability predictions
// for every canonical pattern.  Samples are shared across patterns.
FreenessReport freeness_report(const EnsembleConfig& config, int max_degree);

}  // namespace nclab::random_matrix
