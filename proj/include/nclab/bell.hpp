#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "nclab/fock.hpp"
#include "nclab/linalg.hpp"

namespace nclab::bell {

enum class Transform { Sign, Clamp };

// Bounded observable built from the coordinate generators:
// Y = sum_a c_a Q_a, rescaled by 1/sqrt(mode count) when `quenched`,
// then pushed through a spectral transform into [-1, 1].
struct ObservableSpec {
  std::vector<double> coefficients;
  Transform transform = Transform::Sign;
  bool quenched = false;

  void validate() const;
};

enum class BackendKind { Fock, Classical };

// Observable order: A1, A2, B1, B2.
struct CHSHConfig {
  std::array<ObservableSpec, 4> observables;
  BackendKind backend = BackendKind::Fock;
  int truncation_level = 3;  // fock backend
  int samples = 10000;       // classical backend
  std::uint64_t seed = 1;    // classical backend
  int workers = 1;
};

// Correlator order: A1B1, A1B2, A2B1, A2B2.
// S is assembled from the stored correlators as c11 + c12 + c21 - c22.
struct CHSHResult {
  double s = 0.0;
  std::array<double, 4> correlators{};
  // <AB> without symmetrization; for real symmetric observables this
  // coincides bitwise with the symmetrized correlators above.
  std::array<double, 4> raw_correlators{};
  std::array<double, 2> side_commutator_norms{};   // [A1,A2], [B1,B2]
  std::array<double, 4> cross_commutator_norms{};  // [Ai,Bj], fock only
  double std_error = 0.0;                          // classical only
  BackendKind backend = BackendKind::Fock;
  int truncation_level = 0;  // 0 for classical
};

// Spectral sign/clamp of the expression matrix on the given basis.
// Zero eigenvalues (relative band 1e-12) sign to +1.
fock::OperatorMatrix bounded_observable(const ObservableSpec& spec,
                                        std::shared_ptr<const fock::FockBasis> basis);

CHSHResult chsh_value(const CHSHConfig& config);

// Coefficient-space search over the four observables.  Each candidate
// direction comes from angles on [0, 2pi): c = (cos t1, sin t1 cos t2, ...).
struct SearchConfig {
  int modes = 2;
  Transform transform = Transform::Sign;
  bool quenched = false;
  int grid_points = 5;    // per angle, <= 9
  int refine_steps = 6;   // coordinate-descent sweeps
  BackendKind backend = BackendKind::Fock;
  int truncation_level = 3;
  int samples = 10000;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct SearchTraceRow {
  bool refined = false;  // false: coarse grid, true: refinement
  std::int64_t index = 0;
  double s = 0.0;
  std::vector<double> angles;  // 4 * (modes - 1), observable-major
};

struct SearchResult {
  CHSHConfig best_config;
  CHSHResult best;
  std::vector<SearchTraceRow> trace;
};

SearchResult maximize_chsh(const SearchConfig& config);

}  // namespace nclab::bell
