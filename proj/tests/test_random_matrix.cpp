#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "nclab/errors.hpp"
#include "nclab/linalg.hpp"
#include "nclab/random_matrix.hpp"

using namespace nclab::random_matrix;
using nclab::linalg::Matrix;

namespace {

// Canonical form used to verify the dedupe: lexicographically smallest
// first-occurrence relabeling over all cyclic rotations.
std::vector<int> canon(const std::vector<int>& pattern) {
  std::vector<int> best;
  const std::size_t n = pattern.size();
  for (std::size_t shift = 0; shift < n; ++shift) {
    std::vector<int> relabeled;
    std::vector<int> map;
    for (std::size_t i = 0; i < n; ++i) {
      const int color = pattern[(i + shift) % n];
      auto it = std::find(map.begin(), map.end(), color);
      if (it == map.end()) {
        map.push_back(color);
        relabeled.push_back(static_cast<int>(map.size()) - 1);
      } else {
        relabeled.push_back(static_cast<int>(it - map.begin()));
      }
    }
    if (best.empty() || relabeled < best) best = relabeled;
  }
  return best;
}

}  // namespace

TEST_CASE("replica samples are symmetric, seed-deterministic and distinct") {
  EnsembleConfig config;
  config.n = 16;
  config.replicas = 2;
  config.samples = 4;
  config.seed = 7;

  const auto a = sample_replicas(config, 1).replicas;
  const auto b = sample_replicas(config, 1).replicas;
  REQUIRE(a.size() == 2);
  for (std::size_t r = 0; r < a.size(); ++r) {
    CHECK(a[r].rows() == 16);
    CHECK(nclab::linalg::asymmetry(a[r]) == 0.0);
    for (std::size_t i = 0; i < a[r].size(); ++i)
      CHECK(a[r].data()[i] == b[r].data()[i]);
  }

  const auto c = sample_replicas(config, 2).replicas;
  CHECK(a[0](0, 0) != c[0](0, 0));
  CHECK(a[0](0, 0) != a[1](0, 0));

  EnsembleConfig reseeded = config;
  reseeded.seed = 8;
  const auto d = sample_replicas(reseeded, 1).replicas;
  CHECK(a[0](0, 0) != d[0](0, 0));
}

TEST_CASE("normalized trace product matches a hand computation") {
  Matrix m(2, 2);
  m(0, 0) = 1.0;
  m(0, 1) = 2.0;
  m(1, 0) = 2.0;
  m(1, 1) = -1.0;
  // each factor is normalized by 1/sqrt(n) inside, then (1/n) tr:
  // M^2 = [[5, 0], [0, 5]], so tr((M/sqrt 2)^2) / 2 = (10 / 2) / 2
  const double got = normalized_trace_product({&m, &m}, 2);
  CHECK(got == doctest::Approx(2.5).epsilon(1e-15));

  const double single = normalized_trace_product({&m}, 2);
  CHECK(single == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("estimate aggregates mean and standard error") {
  const auto est = estimate_of({1.0, 2.0, 3.0, 4.0});
  CHECK(est.value == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(est.std_error == doctest::Approx(std::sqrt(5.0 / 12.0)).epsilon(1e-12));
  CHECK(est.samples == 4);

  const auto one = estimate_of({3.25});
  CHECK(one.value == 3.25);
  CHECK(one.std_error == 0.0);

  CHECK_THROWS_AS(estimate_of({}), nclab::InvalidInputError);
}

TEST_CASE("semicircle moments appear at moderate size") {
  EnsembleConfig config;
  config.n = 64;
  config.replicas = 2;
  config.samples = 48;
  config.seed = 3;

  const auto second = trace_moment(config, {0, 0});
  CHECK(std::abs(second.value - 1.0) < 4.0 * second.std_error + 0.05);

  const auto fourth = trace_moment(config, {0, 0, 0, 0});
  CHECK(std::abs(fourth.value - 2.0) < 4.0 * fourth.std_error + 0.1);

  const auto mixed = trace_moment(config, {0, 1, 0, 1});
  CHECK(std::abs(mixed.value) < 4.0 * mixed.std_error + 0.1);

  const auto odd = trace_moment(config, {0, 0, 0});
  CHECK(std::abs(odd.value) < 4.0 * odd.std_error + 0.05);
}

TEST_CASE("traces are invariant under cyclic rotation of the pattern") {
  EnsembleConfig config;
  config.n = 24;
  config.replicas = 2;
  config.samples = 6;
  config.seed = 11;
  const auto a = trace_moment(config, {0, 1, 0, 1});
  const auto b = trace_moment(config, {1, 0, 1, 0});
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-10));
}

TEST_CASE("free prediction reproduces non-crossing pair counts") {
  CHECK(free_prediction({0, 0}, 2) == 1.0);
  CHECK(free_prediction({0, 0, 0, 0}, 1) == 2.0);
  CHECK(free_prediction({0, 1, 0, 1}, 2) == 0.0);
  CHECK(free_prediction({0, 1, 1, 0}, 2) == 1.0);
  CHECK(free_prediction({0}, 1) == 0.0);
  CHECK(free_prediction({0, 0, 0}, 1) == 0.0);
  CHECK(free_prediction({0, 0, 0, 0, 0, 0}, 1) == 5.0);
  CHECK(free_prediction({0, 0, 1, 1, 0, 0}, 2) == 2.0);
  CHECK_THROWS_AS(free_prediction({}, 2), nclab::InvalidInputError);
  CHECK_THROWS_AS(free_prediction({0, 2}, 2), nclab::InvalidInputError);
}

TEST_CASE("canonical patterns are unique up to rotation and relabeling") {
  const auto patterns = canonical_patterns(2, 4);
  CHECK(!patterns.empty());
  for (const auto& p : patterns) {
    CHECK(!p.empty());
    CHECK(p.size() <= 4);
    CHECK(p[0] == 0);
  }
  for (std::size_t i = 0; i < patterns.size(); ++i)
    for (std::size_t j = i + 1; j < patterns.size(); ++j)
      CHECK(canon(patterns[i]) != canon(patterns[j]));

  // every rotation-relabel class of length <= 3 over 2 colors is covered
  const auto small = canonical_patterns(2, 3);
  std::vector<std::vector<int>> classes;
  for (int len = 1; len <= 3; ++len) {
    std::vector<int> p(static_cast<std::size_t>(len), 0);
    while (true) {
      const auto c = canon(p);
      bool seen = false;
      for (const auto& existing : classes) seen = seen || existing == c;
      if (!seen) classes.push_back(c);
      int pos = len - 1;
      while (pos >= 0 && p[static_cast<std::size_t>(pos)] == 1) {
        p[static_cast<std::size_t>(pos)] = 0;
        --pos;
      }
      if (pos < 0) break;
      p[static_cast<std::size_t>(pos)] = 1;
    }
  }
  CHECK(small.size() == classes.size());
}

TEST_CASE("freeness report compares estimates against predictions") {
  EnsembleConfig config;
  config.n = 48;
  config.replicas = 2;
  config.samples = 32;
  config.seed = 5;

  const auto report = freeness_report(config, 4);
  CHECK(!report.rows.empty());
  double worst = 0.0;
  for (const auto& row : report.rows) {
    CHECK(row.estimate.samples == 32);
    if (row.pattern == std::vector<int>{0, 0})
      CHECK(row.prediction == 1.0);
    if (row.pattern == std::vector<int>{0, 1, 0, 1})
      CHECK(row.prediction == 0.0);
    worst = std::max(worst, std::abs(row.zscore));
  }
  CHECK(report.max_abs_zscore == doctest::Approx(worst).epsilon(1e-15));
  // at this size everything should sit well inside the z = 4 band
  CHECK(report.max_abs_zscore < 4.0);
}

TEST_CASE("configuration guards") {
  EnsembleConfig config;
  config.n = 1;
  CHECK_THROWS_AS(sample_replicas(config, 0), nclab::InvalidInputError);
  config.n = 64;
  config.replicas = 0;
  CHECK_THROWS_AS(sample_replicas(config, 0), nclab::InvalidInputError);
  config.replicas = 2;
  config.samples = 0;
  CHECK_THROWS_AS(sample_replicas(config, 0), nclab::InvalidInputError);
  config.samples = 4;
  CHECK_THROWS_AS(sample_replicas(config, -1), nclab::InvalidInputError);

  EnsembleConfig huge;
  huge.n = 20000;
  CHECK_THROWS_AS(sample_replicas(huge, 0), nclab::CapacityError);

  EnsembleConfig ok;
  CHECK_THROWS_AS(trace_moment(ok, {}), nclab::InvalidInputError);
  CHECK_THROWS_AS(trace_moment(ok, {0, 7}), nclab::InvalidInputError);
  CHECK_THROWS_AS(canonical_patterns(0, 4), nclab::InvalidInputError);
  CHECK_THROWS_AS(canonical_patterns(2, 0), nclab::InvalidInputError);
  CHECK_THROWS_AS(canonical_patterns(2, 9), nclab::InvalidInputError);

  Matrix m(2, 2), w(3, 3);
  CHECK_THROWS_AS(normalized_trace_product({}, 2), nclab::InvalidInputError);
  CHECK_THROWS_AS(normalized_trace_product({&m, &w}, 2), nclab::InvalidInputError);
}
