#include "nclab/wick.hpp"

#include <algorithm>
#include <bit>
#include <cstddef>
#include <string>

#include "nclab/errors.hpp"

namespace nclab::wick {

// ---------------------------------------------------------------- exprs --

OperatorExpr OperatorExpr::identity() {
  OperatorExpr e;
  e.add_term(1.0, {});
  return e;
}

OperatorExpr OperatorExpr::generator(Generator g) {
  OperatorExpr e;
  e.add_term(1.0, {g});
  return e;
}

OperatorExpr OperatorExpr::coordinate(int mode) {
  if (mode < 0) throw InvalidInputError("mode index must be nonnegative");
  OperatorExpr e;
  e.add_term(1.0, {annihilator(mode)});
  e.add_term(1.0, {creator(mode)});
  return e;
}

OperatorExpr& OperatorExpr::add_term(double coefficient, Word word) {
  for (const Generator& g : word)
    if (g.mode < 0) throw InvalidInputError("mode index must be nonnegative");
  auto it = std::lower_bound(
      terms_.begin(), terms_.end(), word,
      [](const Term& t, const Word& w) { return t.word < w; });
  if (it != terms_.end() && it->word == word) {
    it->coefficient += coefficient;
    if (it->coefficient == 0.0) terms_.erase(it);
  } else if (coefficient != 0.0) {
    terms_.insert(it, Term{coefficient, std::move(word)});
  }
  return *this;
}

int OperatorExpr::degree() const {
  std::size_t d = 0;
  for (const Term& t : terms_) d = std::max(d, t.word.size());
  return static_cast<int>(d);
}

int OperatorExpr::max_mode() const {
  int m = -1;
  for (const Term& t : terms_)
    for (const Generator& g : t.word) m = std::max(m, g.mode);
  return m;
}

OperatorExpr OperatorExpr::adjoint() const {
  OperatorExpr out;
  for (const Term& t : terms_) {
    Word w(t.word.rbegin(), t.word.rend());
    for (Generator& g : w) g.dagger = !g.dagger;
    out.add_term(t.coefficient, std::move(w));
  }
  return out;
}

// ----------------------------------------------------------------- rules --

ContractionRule ContractionRule::kronecker(Statistics s, int modes) {
  if (modes < 1) throw InvalidInputError("contraction rule needs >= 1 mode");
  ContractionRule r;
  r.statistics = s;
  r.weight.assign(modes, std::vector<double>(modes, 0.0));
  for (int i = 0; i < modes; ++i) r.weight[i][i] = 1.0;
  return r;
}

ContractionRule ContractionRule::diagonal(Statistics s, const std::vector<double>& d) {
  if (d.empty()) throw InvalidInputError("contraction rule needs >= 1 mode");
  ContractionRule r;
  r.statistics = s;
  const int m = static_cast<int>(d.size());
  r.weight.assign(m, std::vector<double>(m, 0.0));
  for (int i = 0; i < m; ++i) r.weight[i][i] = d[i];
  return r;
}

ContractionRule ContractionRule::table(Statistics s, std::vector<std::vector<double>> w) {
  const std::size_t m = w.size();
  if (m == 0) throw InvalidInputError("contraction rule needs >= 1 mode");
  for (const auto& row : w)
    if (row.size() != m) throw InvalidInputError("weight table must be square");
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (w[i][j] != w[j][i])
        throw InvalidInputError("weight table must be symmetric");
  ContractionRule r;
  r.statistics = s;
  r.weight = std::move(w);
  return r;
}

// --------------------------------------------------------- enumerations --

namespace {

void check_length_guard(std::size_t n, Statistics s) {
  const std::size_t guard =
      s == Statistics::Bose ? max_bose_length : max_boltzmann_length;
  if (n > guard)
    throw CapacityError("pairing enumeration guard exceeded: length " +
                        std::to_string(n) + " > " + std::to_string(guard) +
                        (s == Statistics::Bose ? " (bose)" : " (boltzmann)"));
}

// Non-crossing pairings of word positions [lo, hi): the leftmost position
// must open an arc as an annihilator, its partner j splits the rest into an
// inside and an outside block that pair independently.
double noncrossing_word_sum(const Word& w,
                            const std::vector<std::vector<double>>& weight,
                            int lo, int hi) {
  if (lo == hi) return 1.0;
  if (w[lo].dagger) return 0.0;
  double total = 0.0;
  for (int j = lo + 1; j < hi; j += 2) {
    if (!w[j].dagger) continue;
    const double wt = weight[w[lo].mode][w[j].mode];
    if (wt == 0.0) continue;
    const double inside = noncrossing_word_sum(w, weight, lo + 1, j);
    if (inside == 0.0) continue;
    total += wt * inside * noncrossing_word_sum(w, weight, j + 1, hi);
  }
  return total;
}

// All pairings over the positions still present in mask; the lowest
// remaining position must be an annihilator and pairs with any later
// remaining creator.
double all_pairings_word_sum(const Word& w,
                             const std::vector<std::vector<double>>& weight,
                             std::uint32_t mask) {
  if (mask == 0) return 1.0;
  const int i = std::countr_zero(mask);
  if (w[i].dagger) return 0.0;
  const std::uint32_t rest = mask & (mask - 1);  // clear lowest bit
  double total = 0.0;
  for (std::uint32_t m = rest; m != 0; m &= m - 1) {
    const int j = std::countr_zero(m);
    if (!w[j].dagger) continue;
    const double wt = weight[w[i].mode][w[j].mode];
    if (wt == 0.0) continue;
    total += wt * all_pairings_word_sum(w, weight, rest & ~(1u << j));
  }
  return total;
}

std::int64_t count_noncrossing(int lo, int hi) {
  if (lo == hi) return 1;
  std::int64_t total = 0;
  for (int j = lo + 1; j < hi; j += 2)
    total += count_noncrossing(lo + 1, j) * count_noncrossing(j + 1, hi);
  return total;
}

std::int64_t count_all(std::uint32_t mask) {
  if (mask == 0) return 1;
  const std::uint32_t rest = mask & (mask - 1);
  std::int64_t total = 0;
  for (std::uint32_t m = rest; m != 0; m &= m - 1)
    total += count_all(rest & ~(1u << std::countr_zero(m)));
  return total;
}

// Kernel-weighted analogues over abstract positions (no dagger roles).
double noncrossing_kernel_sum(const std::vector<std::vector<double>>& k,
                              int lo, int hi) {
  if (lo == hi) return 1.0;
  double total = 0.0;
  for (int j = lo + 1; j < hi; j += 2) {
    const double wt = k[lo][j];
    if (wt == 0.0) continue;
    const double inside = noncrossing_kernel_sum(k, lo + 1, j);
    if (inside == 0.0) continue;
    total += wt * inside * noncrossing_kernel_sum(k, j + 1, hi);
  }
  return total;
}

double all_pairings_kernel_sum(const std::vector<std::vector<double>>& k,
                               std::uint32_t mask) {
  if (mask == 0) return 1.0;
  const int i = std::countr_zero(mask);
  const std::uint32_t rest = mask & (mask - 1);
  double total = 0.0;
  for (std::uint32_t m = rest; m != 0; m &= m - 1) {
    const int j = std::countr_zero(m);
    const double wt = k[i][j];
    if (wt == 0.0) continue;
    total += wt * all_pairings_kernel_sum(k, rest & ~(1u << j));
  }
  return total;
}

}  // namespace

// ---------------------------------------------------------------- moments --

double vacuum_moment(const Word& word, const ContractionRule& rule) {
  const int modes = rule.modes();
  if (modes < 1) throw InvalidInputError("contraction rule has no modes");
  for (const Generator& g : word) {
    if (g.mode < 0 || g.mode >= modes)
      throw InvalidInputError("mode " + std::to_string(g.mode) +
                              " outside the weight table (modes = " +
                              std::to_string(modes) + ")");
  }
  const std::size_t n = word.size();
  if (n == 0) return 1.0;
  if (n % 2 != 0) return 0.0;
  check_length_guard(n, rule.statistics);
  if (rule.statistics == Statistics::Boltzmann)
    return noncrossing_word_sum(word, rule.weight, 0, static_cast<int>(n));
  return all_pairings_word_sum(word, rule.weight,
                               n >= 32 ? ~0u : ((1u << n) - 1u));
}

double expr_moment(const std::vector<OperatorExpr>& factors,
                   const ContractionRule& rule) {
  if (factors.empty()) return 1.0;
  std::size_t max_len = 0;
  for (const OperatorExpr& f : factors) {
    if (f.empty()) return 0.0;  // the zero expression annihilates a product
    max_len += static_cast<std::size_t>(f.degree());
    if (f.max_mode() >= rule.modes())
      throw InvalidInputError("mode " + std::to_string(f.max_mode()) +
                              " outside the weight table (modes = " +
                              std::to_string(rule.modes()) + ")");
  }
  check_length_guard(max_len, rule.statistics);

  const std::size_t k = factors.size();
  std::vector<std::size_t> pick(k, 0);
  double total = 0.0;
  Word word;
  word.reserve(max_len);
  while (true) {
    double coeff = 1.0;
    word.clear();
    for (std::size_t f = 0; f < k; ++f) {
      const auto& term = factors[f].terms()[pick[f]];
      coeff *= term.coefficient;
      word.insert(word.end(), term.word.begin(), term.word.end());
    }
    if (coeff != 0.0) total += coeff * vacuum_moment(word, rule);
    std::size_t f = 0;
    for (; f < k; ++f) {
      if (++pick[f] < factors[f].terms().size()) break;
      pick[f] = 0;
    }
    if (f == k) break;
  }
  return total;
}

std::int64_t count_pairings(int n, Statistics statistics) {
  if (n < 0) throw InvalidInputError("pairing count needs n >= 0");
  if (n % 2 != 0) throw InvalidInputError("pairing count needs even n");
  check_length_guard(static_cast<std::size_t>(n), statistics);
  if (n == 0) return 1;
  if (statistics == Statistics::Boltzmann) return count_noncrossing(0, n);
  return count_all((1u << n) - 1u);
}

double pairing_moment(const std::vector<std::vector<double>>& kernel,
                      Statistics statistics) {
  const std::size_t k = kernel.size();
  for (const auto& row : kernel)
    if (row.size() != k) throw InvalidInputError("pairing kernel must be square");
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j)
      if (kernel[i][j] != kernel[j][i])
        throw InvalidInputError("pairing kernel must be symmetric");
  if (k == 0) return 1.0;
  if (k % 2 != 0) return 0.0;
  check_length_guard(k, statistics);
  if (statistics == Statistics::Boltzmann)
    return noncrossing_kernel_sum(kernel, 0, static_cast<int>(k));
  return all_pairings_kernel_sum(kernel, (1u << k) - 1u);
}

}  // namespace nclab::wick
