#pragma once

#include <map>

#include <boost/multiprecision/cpp_int.hpp>

namespace nsmc {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

/// Sparse integer polynomial; zero coefficients are never stored.
class IntPolynomial {
 public:
  IntPolynomial() = default;

  static IntPolynomial monomial_z() {
    IntPolynomial p;
    p.coeffs_[1] = 1;
    return p;
  }

  void set(unsigned degree, BigInt value);
  BigInt coeff(unsigned degree) const;
  unsigned degree() const { return coeffs_.empty() ? 0 : coeffs_.rbegin()->first; }
  bool is_zero() const { return coeffs_.empty(); }
  BigInt eval_at_one() const;
  const std::map<unsigned, BigInt>& coeffs() const { return coeffs_; }

  bool operator==(const IntPolynomial&) const = default;

 private:
  std::map<unsigned, BigInt> coeffs_;
};

/// One step of the quadratic recursion: returns z + p(z)^2.
IntPolynomial poly_next(const IntPolynomial& p);

/// The degree-count polynomial of the n-th Picard iterate: p_0(z) = z and
/// p_{n+1}(z) = z + p_n(z)^2, so deg p_n = 2^n and the coefficient of z^k
/// counts the iterate's degree-k term group. Results are cached; readers
/// are safe to call concurrently.
const IntPolynomial& picard_poly(int n);

/// Coefficient A(m,n) of z^m in picard_poly(n). Requires 1 <= m <= 2^n.
BigInt coeff_A(int m, int n);

/// Exact Catalan number (2M)! / (M! (M+1)!). The coefficients A(M,n)
/// stabilize in n to catalan(M-1).
BigInt catalan(int M);

/// D(0) = 1, D(n+1) = 1 + d^2 D(n)^2, exact.
BigInt d_sequence(int n, int d);

struct DBoundsReport {
  bool holds = false;
  BigRat ratio;  // 9 D(k+l) / (9 D(l))^{2^k}
  BigRat upper;  // (1 + 1/(9 D(l)^2))^{2^k - 1}
};

/// Checks 1 <= ratio <= upper in exact rational arithmetic. Only stated
/// for d = 3; other d are rejected as unsupported.
DBoundsReport d_bounds_check(int k, int l, int d);

}  // namespace nsmc
