#pragma once

#include <cstdint>
#include <vector>

#include "nclab/linalg.hpp"
#include "nclab/random_matrix.hpp"
#include "nclab/wick.hpp"

namespace nclab::quenching {

// A quenched variable (1/sqrt(p)) sum_a c_a J_a built from p replicas.
// The coefficients must satisfy sum c_a^2 = p, which keeps the combined
// variable standard.  uniform() gives the equal-coefficient case.
struct QuenchingSpec {
  int replicas = 1;
  std::vector<double> coefficients;

  static QuenchingSpec uniform(int replicas);
  void validate() const;
};

// (1/sqrt(p)) sum_a c_a J_a over the replicas of a sample, exactly symmetric.
linalg::Matrix apply_quenching(const QuenchingSpec& spec,
                       const random_matrix::ReplicaSample& sample);

// Vacuum moment of the ordered product of quenched generators, one factor
// per spec, under the given contraction rule.  Evaluated as a pair sum
// with the effective kernel K(i, j) = (c_i^T W c_j) / p, which keeps
// integer-coefficient specs in exact arithmetic.
double quenched_algebraic_moment(const std::vector<QuenchingSpec>& specs,
                                 const wick::ContractionRule& rule);

// Monte Carlo counterpart at finite n.  `pattern` indexes into `specs`
// and gives the factor order.
random_matrix::MomentEstimate quenched_trace_moment(
    const std::vector<QuenchingSpec>& specs, const std::vector<int>& pattern,
    const random_matrix::EnsembleConfig& config);

// Pair-coupling spin model H = -(1/sqrt(N)) sum_{i<j} Jq_ij s_i s_j with
// Jq the quenched coupling matrix.  The couplings carry the normalized
// Gaussian measure, so Z(beta = 0) = 2^N exactly.
struct ReplicaModelConfig {
  int n_spins = 4;
  double beta = 1.0;
  int replicas = 1;
  int gauss_samples = 10000;  // Monte Carlo draws
  int gh_order = 8;           // quadrature points per coupling dimension
  std::uint64_t seed = 1;
  int workers = 1;
};

enum class PartitionMethod { MonteCarlo, Quadrature };

struct PartitionResult {
  double z = 0.0;
  double std_error = 0.0;  // zero for quadrature
  PartitionMethod method = PartitionMethod::MonteCarlo;
};

// Gaussian average of the exact spin sum, E_J[sum_s exp(-beta H)].
// Quadrature needs replicas * N(N-1)/2 <= 12 coupling dimensions.
PartitionResult replica_partition(const ReplicaModelConfig& config,
                                  const QuenchingSpec& spec,
                                  PartitionMethod method);

}  // namespace nclab::quenching
