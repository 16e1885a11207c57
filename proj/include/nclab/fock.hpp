#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "nclab/linalg.hpp"
#include "nclab/wick.hpp"

// Finite-section representations of the ladder algebra. The free basis
// carries words (full Fock space: creators prepend a letter, annihilators
// remove a matching first letter); the bosonic basis carries occupation
// tuples with the usual sqrt(n) ladder amplitudes. Vacuum is index 0 in
// both. Truncation is exact for vacuum moments of degree <= 2 * depth.
namespace nclab::fock {

class FockBasis {
 public:
  virtual ~FockBasis() = default;
  virtual std::size_t dimension() const = 0;
  virtual int modes() const = 0;
  // "free" or "bose"
  virtual const char* kind() const = 0;
  // Truncation depth: max word length (free) or max total occupation (bose).
  virtual int depth() const = 0;
  virtual std::string label(std::size_t index) const = 0;
  virtual bool same_as(const FockBasis& other) const = 0;
  virtual linalg::Matrix creator(int mode) const = 0;
  virtual linalg::Matrix annihilator(int mode) const = 0;
};

// Words of length <= max_word_length over `modes` letters, ordered by
// (length, lexicographic). Dimension sum_{l<=L} modes^l.
class FreeFockBasis final : public FockBasis {
 public:
  FreeFockBasis(int modes, int max_word_length);

  std::size_t dimension() const override { return dimension_; }
  int modes() const override { return modes_; }
  const char* kind() const override { return "free"; }
  int depth() const override { return max_word_length_; }
  std::string label(std::size_t index) const override;
  bool same_as(const FockBasis& other) const override;
  linalg::Matrix creator(int mode) const override;
  linalg::Matrix annihilator(int mode) const override;

  int max_word_length() const { return max_word_length_; }
  std::size_t index_of(const std::vector<int>& word) const;
  std::vector<int> word_at(std::size_t index) const;

 private:
  int modes_;
  int max_word_length_;
  std::size_t dimension_;
  std::vector<std::size_t> level_offset_;  // index of first word per length
};

// Occupation tuples with total <= max_occupation, ordered by
// (total, lexicographic). Dimension C(max_occupation + modes, modes).
class BoseFockBasis final : public FockBasis {
 public:
  BoseFockBasis(int modes, int max_occupation);

  std::size_t dimension() const override { return occupations_.size(); }
  int modes() const override { return modes_; }
  const char* kind() const override { return "bose"; }
  int depth() const override { return max_occupation_; }
  std::string label(std::size_t index) const override;
  bool same_as(const FockBasis& other) const override;
  linalg::Matrix creator(int mode) const override;
  linalg::Matrix annihilator(int mode) const override;

  int max_occupation() const { return max_occupation_; }
  const std::vector<int>& occupation_at(std::size_t index) const {
    return occupations_[index];
  }
  std::size_t index_of(const std::vector<int>& occupation) const;
  // Total occupation of basis state `index`.
  int total_occupation(std::size_t index) const;

 private:
  int modes_;
  int max_occupation_;
  std::vector<std::vector<int>> occupations_;
  std::map<std::vector<int>, std::size_t> index_;
};

struct OperatorMatrix {
  std::shared_ptr<const FockBasis> basis;
  linalg::Matrix mat;
};

OperatorMatrix creator_matrix(std::shared_ptr<const FockBasis> basis, int mode);
OperatorMatrix annihilator_matrix(std::shared_ptr<const FockBasis> basis, int mode);
// Sum of coefficient-weighted products of generator matrices, factors
// multiplied in word order (rightmost letter acts first on a ket).
OperatorMatrix expr_matrix(const wick::OperatorExpr& expr,
                           std::shared_ptr<const FockBasis> basis);
// AB - BA; both operands must live on the same basis.
OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b);
double vacuum_expectation(const OperatorMatrix& om);

// Row k compares the product of the first k+1 factors between the matrix
// representation and the wick engine.
struct CrosscheckRow {
  std::size_t factors = 0;
  double matrix_value = 0.0;
  double wick_value = 0.0;
  double deviation = 0.0;
};
struct CrosscheckReport {
  std::vector<CrosscheckRow> rows;
  double max_deviation = 0.0;
  bool ok = true;  // every deviation < 1e-9
};

// Requires a Kronecker weight table, statistics matching the basis kind,
// and total degree within the exact-truncation bound 2 * depth.
CrosscheckReport crosscheck(const std::vector<wick::OperatorExpr>& factors,
                            const wick::ContractionRule& rule,
                            std::shared_ptr<const FockBasis> basis);

}  // namespace nclab::fock
