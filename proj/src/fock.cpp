#include "nclab/fock.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "nclab/errors.hpp"
#include "nclab/kernels.hpp"

namespace nclab::fock {

namespace {

constexpr std::size_t basis_dimension_guard = 200000;
constexpr std::size_t dense_matrix_guard = 5000;

void check_dense(std::size_t dim) {
  if (dim > dense_matrix_guard)
    throw CapacityError("dense operator matrix guard exceeded: dimension " +
                        std::to_string(dim));
}

}  // namespace

// ------------------------------------------------------------ free basis --

FreeFockBasis::FreeFockBasis(int modes, int max_word_length)
    : modes_(modes), max_word_length_(max_word_length) {
  if (modes < 1) throw InvalidInputError("free basis needs >= 1 mode");
  if (max_word_length < 1)
    throw InvalidInputError("free basis needs word length >= 1");
  level_offset_.assign(static_cast<std::size_t>(max_word_length) + 2, 0);
  std::size_t dim = 0;
  std::size_t level = 1;
  for (int l = 0; l <= max_word_length; ++l) {
    level_offset_[static_cast<std::size_t>(l)] = dim;
    if (level > basis_dimension_guard || dim > basis_dimension_guard - level)
      throw CapacityError("free basis dimension guard exceeded");
    dim += level;
    level *= static_cast<std::size_t>(modes);
  }
  level_offset_[static_cast<std::size_t>(max_word_length) + 1] = dim;
  dimension_ = dim;
}

std::size_t FreeFockBasis::index_of(const std::vector<int>& word) const {
  const std::size_t l = word.size();
  if (l > static_cast<std::size_t>(max_word_length_))
    throw InvalidInputError("word longer than the basis truncation");
  std::size_t digits = 0;
  for (int letter : word) {
    if (letter < 0 || letter >= modes_)
      throw InvalidInputError("letter outside the mode range");
    digits = digits * static_cast<std::size_t>(modes_) +
             static_cast<std::size_t>(letter);
  }
  return level_offset_[l] + digits;
}

std::vector<int> FreeFockBasis::word_at(std::size_t index) const {
  if (index >= dimension_) throw InvalidInputError("basis index out of range");
  std::size_t l = 0;
  while (level_offset_[l + 1] <= index) ++l;
  std::size_t digits = index - level_offset_[l];
  std::vector<int> word(l, 0);
  for (std::size_t i = l; i-- > 0;) {
    word[i] = static_cast<int>(digits % static_cast<std::size_t>(modes_));
    digits /= static_cast<std::size_t>(modes_);
  }
  return word;
}

std::string FreeFockBasis::label(std::size_t index) const {
  const std::vector<int> w = word_at(index);
  if (w.empty()) return "vac";
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s += '.';
    s += std::to_string(w[i]);
  }
  return s;
}

bool FreeFockBasis::same_as(const FockBasis& other) const {
  const auto* o = dynamic_cast<const FreeFockBasis*>(&other);
  return o && o->modes_ == modes_ && o->max_word_length_ == max_word_length_;
}

linalg::Matrix FreeFockBasis::creator(int mode) const {
  if (mode < 0 || mode >= modes_)
    throw InvalidInputError("creator mode out of range");
  check_dense(dimension_);
  linalg::Matrix m(dimension_, dimension_);
  // words of maximal length are annihilated by the truncation
  for (std::size_t col = 0; col < level_offset_[static_cast<std::size_t>(max_word_length_)]; ++col) {
    std::vector<int> w = word_at(col);
    w.insert(w.begin(), mode);
    m(index_of(w), col) = 1.0;
  }
  return m;
}

linalg::Matrix FreeFockBasis::annihilator(int mode) const {
  if (mode < 0 || mode >= modes_)
    throw InvalidInputError("annihilator mode out of range");
  check_dense(dimension_);
  linalg::Matrix m(dimension_, dimension_);
  for (std::size_t col = 1; col < dimension_; ++col) {
    std::vector<int> w = word_at(col);
    if (w.front() != mode) continue;
    w.erase(w.begin());
    m(index_of(w), col) = 1.0;
  }
  return m;
}

// ------------------------------------------------------------ bose basis --

namespace {

void enumerate_occupations(int modes, int total, std::vector<int>& current,
                           std::vector<std::vector<int>>& out) {
  const int slot = static_cast<int>(current.size());
  if (slot == modes - 1) {
    current.push_back(total);
    out.push_back(current);
    current.pop_back();
    return;
  }
  for (int n = 0; n <= total; ++n) {
    current.push_back(n);
    enumerate_occupations(modes, total - n, current, out);
    current.pop_back();
  }
}

}  // namespace

BoseFockBasis::BoseFockBasis(int modes, int max_occupation)
    : modes_(modes), max_occupation_(max_occupation) {
  if (modes < 1) throw InvalidInputError("bose basis needs >= 1 mode");
  if (max_occupation < 1)
    throw InvalidInputError("bose basis needs max occupation >= 1");
  // dimension C(max_occupation + modes, modes), guarded before enumeration
  long double dim = 1.0L;
  for (int i = 1; i <= modes; ++i)
    dim = dim * static_cast<long double>(max_occupation + i) / i;
  if (dim > static_cast<long double>(basis_dimension_guard))
    throw CapacityError("bose basis dimension guard exceeded");
  std::vector<int> current;
  for (int total = 0; total <= max_occupation; ++total)
    enumerate_occupations(modes, total, current, occupations_);
  for (std::size_t i = 0; i < occupations_.size(); ++i)
    index_.emplace(occupations_[i], i);
}

std::string BoseFockBasis::label(std::size_t index) const {
  if (index >= occupations_.size())
    throw InvalidInputError("basis index out of range");
  std::string s;
  for (std::size_t i = 0; i < occupations_[index].size(); ++i) {
    if (i) s += '.';
    s += std::to_string(occupations_[index][i]);
  }
  return s;
}

bool BoseFockBasis::same_as(const FockBasis& other) const {
  const auto* o = dynamic_cast<const BoseFockBasis*>(&other);
  return o && o->modes_ == modes_ && o->max_occupation_ == max_occupation_;
}

std::size_t BoseFockBasis::index_of(const std::vector<int>& occupation) const {
  auto it = index_.find(occupation);
  if (it == index_.end())
    throw InvalidInputError("occupation tuple outside the basis");
  return it->second;
}

int BoseFockBasis::total_occupation(std::size_t index) const {
  if (index >= occupations_.size())
    throw InvalidInputError("basis index out of range");
  int t = 0;
  for (int n : occupations_[index]) t += n;
  return t;
}

linalg::Matrix BoseFockBasis::creator(int mode) const {
  if (mode < 0 || mode >= modes_)
    throw InvalidInputError("creator mode out of range");
  check_dense(dimension());
  linalg::Matrix m(dimension(), dimension());
  for (std::size_t col = 0; col < occupations_.size(); ++col) {
    if (total_occupation(col) >= max_occupation_) continue;  // truncated away
    std::vector<int> n = occupations_[col];
    const double amp = std::sqrt(static_cast<double>(n[mode] + 1));
    ++n[mode];
    m(index_of(n), col) = amp;
  }
  return m;
}

linalg::Matrix BoseFockBasis::annihilator(int mode) const {
  if (mode < 0 || mode >= modes_)
    throw InvalidInputError("annihilator mode out of range");
  check_dense(dimension());
  linalg::Matrix m(dimension(), dimension());
  for (std::size_t col = 0; col < occupations_.size(); ++col) {
    if (occupations_[col][mode] == 0) continue;
    std::vector<int> n = occupations_[col];
    const double amp = std::sqrt(static_cast<double>(n[mode]));
    --n[mode];
    m(index_of(n), col) = amp;
  }
  return m;
}

// -------------------------------------------------------------- operators --

OperatorMatrix creator_matrix(std::shared_ptr<const FockBasis> basis, int mode) {
  if (!basis) throw InvalidInputError("null basis");
  return {basis, basis->creator(mode)};
}

OperatorMatrix annihilator_matrix(std::shared_ptr<const FockBasis> basis, int mode) {
  if (!basis) throw InvalidInputError("null basis");
  return {basis, basis->annihilator(mode)};
}

OperatorMatrix expr_matrix(const wick::OperatorExpr& expr,
                           std::shared_ptr<const FockBasis> basis) {
  if (!basis) throw InvalidInputError("null basis");
  if (expr.max_mode() >= basis->modes())
    throw InvalidInputError("expression mode " + std::to_string(expr.max_mode()) +
                            " outside the basis (modes = " +
                            std::to_string(basis->modes()) + ")");
  const std::size_t dim = basis->dimension();
  check_dense(dim);
  std::map<std::pair<int, bool>, linalg::Matrix> letters;
  auto letter = [&](const wick::Generator& g) -> const linalg::Matrix& {
    auto key = std::make_pair(g.mode, g.dagger);
    auto it = letters.find(key);
    if (it == letters.end())
      it = letters.emplace(key, g.dagger ? basis->creator(g.mode)
                                         : basis->annihilator(g.mode)).first;
    return it->second;
  };
  linalg::Matrix acc(dim, dim);
  for (const auto& term : expr.terms()) {
    if (term.word.empty()) {
      for (std::size_t i = 0; i < dim; ++i) acc(i, i) += term.coefficient;
      continue;
    }
    linalg::Matrix prod = letter(term.word.front());
    for (std::size_t i = 1; i < term.word.size(); ++i)
      prod = linalg::matmul(prod, letter(term.word[i]));
    kernels::axpy(term.coefficient, prod.data(), acc.data(), acc.size());
  }
  return {std::move(basis), std::move(acc)};
}

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
  if (!a.basis || !b.basis) throw InvalidInputError("null basis");
  if (!a.basis->same_as(*b.basis))
    throw InvalidInputError("commutator operands live on different bases");
  return {a.basis, linalg::matmul(a.mat, b.mat) - linalg::matmul(b.mat, a.mat)};
}

double vacuum_expectation(const OperatorMatrix& om) {
  if (om.mat.rows() == 0) throw InvalidInputError("empty operator matrix");
  return om.mat(0, 0);
}

CrosscheckReport crosscheck(const std::vector<wick::OperatorExpr>& factors,
                            const wick::ContractionRule& rule,
                            std::shared_ptr<const FockBasis> basis) {
  if (!basis) throw InvalidInputError("null basis");
  const bool bose = std::string(basis->kind()) == "bose";
  if (bose != (rule.statistics == wick::Statistics::Bose))
    throw InvalidInputError("contraction statistics does not match the basis kind");
  if (rule.modes() < basis->modes())
    throw InvalidInputError("weight table smaller than the basis mode count");
  for (int i = 0; i < rule.modes(); ++i)
    for (int j = 0; j < rule.modes(); ++j)
      if (rule.weight[i][j] != (i == j ? 1.0 : 0.0))
        throw InvalidInputError("crosscheck requires a Kronecker weight table");

  int total_degree = 0;
  for (const auto& f : factors) total_degree += f.degree();
  if (total_degree > 2 * basis->depth())
    throw CapacityError("crosscheck degree " + std::to_string(total_degree) +
                        " exceeds the exact-truncation bound " +
                        std::to_string(2 * basis->depth()));

  CrosscheckReport report;
  linalg::Matrix prod = linalg::Matrix::identity(basis->dimension());
  std::vector<wick::OperatorExpr> prefix;
  prefix.reserve(factors.size());
  for (std::size_t k = 0; k < factors.size(); ++k) {
    prod = linalg::matmul(prod, expr_matrix(factors[k], basis).mat);
    prefix.push_back(factors[k]);
    CrosscheckRow row;
    row.factors = k + 1;
    row.matrix_value = prod(0, 0);
    row.wick_value = wick::expr_moment(prefix, rule);
    row.deviation = std::abs(row.matrix_value - row.wick_value);
    report.max_deviation = std::max(report.max_deviation, row.deviation);
    report.rows.push_back(row);
  }
  report.ok = report.max_deviation < 1e-9;
  return report;
}

}  // namespace nclab::fock
