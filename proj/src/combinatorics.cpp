#include "nsmc/combinatorics.hpp"

#include <mutex>
#include <stdexcept>
#include <vector>

namespace nsmc {

void IntPolynomial::set(unsigned degree, BigInt value) {
  if (value == 0)
    coeffs_.erase(degree);
  else
    coeffs_[degree] = std::move(value);
}

BigInt IntPolynomial::coeff(unsigned degree) const {
  auto it = coeffs_.find(degree);
  return it == coeffs_.end() ? BigInt(0) : it->second;
}

BigInt IntPolynomial::eval_at_one() const {
  BigInt total = 0;
  for (const auto& [deg, c] : coeffs_) total += c;
  return total;
}

IntPolynomial poly_next(const IntPolynomial& p) {
  IntPolynomial out;
  std::map<unsigned, BigInt> square;
  for (const auto& [da, ca] : p.coeffs())
    for (const auto& [db, cb] : p.coeffs()) square[da + db] += ca * cb;
  square[1] += 1;
  for (auto& [deg, c] : square) out.set(deg, std::move(c));
  return out;
}

const IntPolynomial& picard_poly(int n) {
  if (n < 0) throw std::domain_error("picard_poly: n must be >= 0");
  static std::vector<IntPolynomial> table{IntPolynomial::monomial_z()};
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  while (static_cast<int>(table.size()) <= n) table.push_back(poly_next(table.back()));
  return table[static_cast<std::size_t>(n)];
}

namespace {

constexpr unsigned kTruncCap = 64;

// z + p^2 with degrees above the cap discarded; low coefficients are
// unaffected, which makes deep-iteration coefficient queries cheap.
IntPolynomial poly_next_truncated(const IntPolynomial& p) {
  IntPolynomial out;
  std::map<unsigned, BigInt> square;
  for (const auto& [da, ca] : p.coeffs()) {
    if (da > kTruncCap) break;
    for (const auto& [db, cb] : p.coeffs()) {
      if (da + db > kTruncCap) break;
      square[da + db] += ca * cb;
    }
  }
  square[1] += 1;
  for (auto& [deg, c] : square) out.set(deg, std::move(c));
  return out;
}

const IntPolynomial& picard_poly_truncated(int n) {
  static std::vector<IntPolynomial> table{IntPolynomial::monomial_z()};
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  while (static_cast<int>(table.size()) <= n) table.push_back(poly_next_truncated(table.back()));
  return table[static_cast<std::size_t>(n)];
}

}  // namespace

BigInt coeff_A(int m, int n) {
  if (n < 0) throw std::domain_error("coeff_A: n must be >= 0");
  if (m < 1 || (n < 63 && m > (1LL << n)))
    throw std::domain_error("coeff_A: m outside 1..2^n");
  if (n > 10 && static_cast<unsigned>(m) <= kTruncCap)
    return picard_poly_truncated(n).coeff(static_cast<unsigned>(m));
  return picard_poly(n).coeff(static_cast<unsigned>(m));
}

BigInt catalan(int M) {
  if (M < 0) throw std::domain_error("catalan: M must be >= 0");
  BigInt num = 1;
  for (int i = M + 2; i <= 2 * M; ++i) num *= i;  // (2M)!/(M+1)!
  BigInt den = 1;
  for (int i = 2; i <= M; ++i) den *= i;  // M!
  return num / den;
}

BigInt d_sequence(int n, int d) {
  if (n < 0) throw std::domain_error("d_sequence: n must be >= 0");
  if (d < 1) throw std::domain_error("d_sequence: d must be >= 1");
  BigInt value = 1;
  const BigInt d2 = BigInt(d) * d;
  for (int i = 0; i < n; ++i) value = 1 + d2 * value * value;
  return value;
}

DBoundsReport d_bounds_check(int k, int l, int d) {
  if (d != 3) throw std::invalid_argument("d_bounds_check: bounds are stated for d = 3 only");
  if (k < 1 || l < 1) throw std::domain_error("d_bounds_check: k,l must be >= 1");

  const BigInt nine_dl = 9 * d_sequence(l, d);

  // (9 D(l))^{2^k} by repeated squaring.
  BigInt power = nine_dl;
  for (int i = 0; i < k; ++i) power *= power;

  DBoundsReport report;
  report.ratio = BigRat(9 * d_sequence(k + l, d), power);

  const BigRat base = 1 + BigRat(1, 9 * d_sequence(l, d) * d_sequence(l, d));
  BigRat upper = 1;
  BigRat sq = base;
  for (long long e = (1LL << k) - 1; e > 0; e >>= 1) {
    if (e & 1) upper *= sq;
    sq *= sq;
  }
  report.upper = upper;

  report.holds = report.ratio >= 1 && report.ratio <= report.upper;
  return report;
}

}  // namespace nsmc
