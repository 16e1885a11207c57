#pragma once

#include <cstdint>
#include <vector>

// Vacuum moments of words in mode-indexed ladder generators under two
// contraction statistics:
//   Bose      - all complete pairings contribute (classical/Isserlis
//               combinatorics; counts are double factorials),
//   Boltzmann - only non-crossing pairings contribute (free/semicircular
//               combinatorics; counts are Catalan numbers).
// A pair (i < j) contributes only when letter i annihilates and letter j
// creates, weighted by the rule's mode-pair weight.
namespace nclab::wick {

enum class Statistics { Bose, Boltzmann };

struct Generator {
  int mode = 0;
  bool dagger = false;  // true: creator, false: annihilator
  auto operator<=>(const Generator&) const = default;
};

using Word = std::vector<Generator>;

inline Generator creator(int mode) { return {mode, true}; }
inline Generator annihilator(int mode) { return {mode, false}; }

// Finite real-linear combination of words, kept canonical: terms sorted by
// word, one term per word, exact-zero coefficients dropped.
class OperatorExpr {
 public:
  struct Term {
    double coefficient = 0.0;
    Word word;
    bool operator==(const Term&) const = default;
  };

  OperatorExpr() = default;

  static OperatorExpr identity();                       // empty word, coeff 1
  static OperatorExpr generator(Generator g);           // single letter
  // A_mode + A_mode^dagger (the self-adjoint coordinate combination)
  static OperatorExpr coordinate(int mode);

  OperatorExpr& add_term(double coefficient, Word word);

  const std::vector<Term>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  // Largest word length over terms; 0 for the identity or empty expr.
  int degree() const;
  // Largest mode index referenced; -1 when no letters occur.
  int max_mode() const;
  // Letters reversed and daggers flipped in every word.
  OperatorExpr adjoint() const;
  bool operator==(const OperatorExpr&) const = default;

 private:
  std::vector<Term> terms_;
};

// Symmetric nonnegative-diagonal weight table over modes plus the chosen
// statistics. weight[a][b] multiplies a contraction of an annihilator of
// mode a with a creator of mode b.
struct ContractionRule {
  Statistics statistics = Statistics::Boltzmann;
  std::vector<std::vector<double>> weight;

  // Kronecker-delta table: weight = identity of the given mode count.
  static ContractionRule kronecker(Statistics s, int modes);
  // Diagonal table, e.g. from resonance_weight.
  static ContractionRule diagonal(Statistics s, const std::vector<double>& d);
  // Arbitrary table; must be square and symmetric.
  static ContractionRule table(Statistics s, std::vector<std::vector<double>> w);

  int modes() const { return static_cast<int>(weight.size()); }
};

// Degree guards for the pairing enumerations (capacity errors above these).
inline constexpr int max_boltzmann_length = 24;
inline constexpr int max_bose_length = 16;

// <vacuum| word |vacuum> under the rule. Odd length gives 0, the empty word
// gives 1. Throws InvalidInputError for modes outside the weight table and
// CapacityError above the degree guards.
double vacuum_moment(const Word& word, const ContractionRule& rule);

// Moment of an ordered product of expressions: multinomial expansion of the
// factor terms, each concatenated word evaluated by vacuum_moment.
double expr_moment(const std::vector<OperatorExpr>& factors,
                   const ContractionRule& rule);

// Number of complete pairings of n points: all pairings (Bose) or
// non-crossing pairings (Boltzmann), counted by explicit enumeration.
// n must be even and within the degree guards.
std::int64_t count_pairings(int n, Statistics statistics);

// Sum over complete pairings of positions {0..k-1} of the product of
// kernel[i][j] over pairs, non-crossing only under Boltzmann. This is the
// moment formula for a family of k self-adjoint elements with covariance
// kernel K: Isserlis under Bose, free Wick under Boltzmann. The kernel must
// be square and symmetric; odd k gives 0, k = 0 gives 1.
double pairing_moment(const std::vector<std::vector<double>>& kernel,
                      Statistics statistics);

}  // namespace nclab::wick
