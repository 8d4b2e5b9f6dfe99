#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rawbfst/numkernel.hpp"

namespace rawbfst::poly {

/// Fixed-length vector of nonnegative integers; doubles as monomial exponent.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::size_t dim) : entries_(dim, 0) {}
  MultiIndex(std::initializer_list<int> entries) : entries_(entries) {}
  explicit MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {}

  std::size_t dim() const { return entries_.size(); }
  int operator[](std::size_t d) const { return entries_[d]; }
  int& operator[](std::size_t d) { return entries_[d]; }
  const std::vector<int>& entries() const { return entries_; }

  int abs() const;

  auto operator<=>(const MultiIndex&) const = default;
  bool operator==(const MultiIndex&) const = default;

 private:
  std::vector<int> entries_;
};

/// Graded lexicographic: total degree first, then lexicographic with the
/// first coordinate most significant (higher power first).
bool graded_lex_less(const MultiIndex& a, const MultiIndex& b);

/// All j in N_0^dim with |j|_1 <= max_degree, in graded lexicographic order.
/// The length is binomial(dim + max_degree, dim).
std::vector<MultiIndex> enumerate_multi_indices(int dim, int max_degree);

/// binomial(n, k) as double (exact for the sizes used here).
double binomial(int n, int k);

/// Sparse polynomial in `dim` real variables: monomial exponent -> coefficient.
/// Exact zeros are never stored.
class MultivariatePolynomial {
 public:
  using TermMap = std::map<MultiIndex, double>;

  MultivariatePolynomial() = default;
  explicit MultivariatePolynomial(std::size_t dim) : dim_(dim) {}

  static MultivariatePolynomial constant(std::size_t dim, double value);
  /// The coordinate function x_var.
  static MultivariatePolynomial variable(std::size_t dim, std::size_t var);
  /// Univariate coefficients (ascending powers) placed on variable `var`.
  static MultivariatePolynomial from_univariate(std::size_t dim, std::size_t var,
                                                std::span<const double> coeffs);

  std::size_t dim() const { return dim_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;
  /// Highest exponent of variable `var` among the stored terms.
  int degree_in(std::size_t var) const;
  double coefficient(const MultiIndex& exponent) const;

  /// Adds `coeff` to the term with the given exponent, dropping exact zeros.
  void add_term(const MultiIndex& exponent, double coeff);

  MultivariatePolynomial& operator+=(const MultivariatePolynomial& other);
  MultivariatePolynomial& operator-=(const MultivariatePolynomial& other);
  MultivariatePolynomial& operator*=(double factor);

  friend MultivariatePolynomial operator+(MultivariatePolynomial a, const MultivariatePolynomial& b) {
    return a += b;
  }
  friend MultivariatePolynomial operator-(MultivariatePolynomial a, const MultivariatePolynomial& b) {
    return a -= b;
  }
  friend MultivariatePolynomial operator*(MultivariatePolynomial a, double f) { return a *= f; }
  friend MultivariatePolynomial operator*(double f, MultivariatePolynomial a) { return a *= f; }

 private:
  std::size_t dim_ = 0;
  TermMap terms_;
};

MultivariatePolynomial poly_mul(const MultivariatePolynomial& p, const MultivariatePolynomial& q);
double poly_eval(const MultivariatePolynomial& p, std::span<const double> x);

/// r(w) = p(c + M w) with M of size dim(p) x E; the result lives in E variables.
MultivariatePolynomial affine_substitute(const MultivariatePolynomial& p,
                                         const Eigen::VectorXd& c,
                                         const Eigen::MatrixXd& M);

/// Legendre polynomial L_q normalized by L_q(1) = 1, ascending coefficients.
std::vector<double> legendre_coeffs(int q);

/// p_j(x) = prod_d sqrt(2 j_d + 1) L_{j_d}(x_d).
MultivariatePolynomial tensor_legendre(const MultiIndex& j);

/// Scaled Hermite weight Delta^{-|iota|/2} prod_d H_{iota_d}(x_d).
MultivariatePolynomial scaled_hermite_weight_poly(const MultiIndex& iota, double delta);

/// E[p(xi)] for xi with independent coordinates clamped to [-r, r].
double expect_truncated_gaussian(const MultivariatePolynomial& p, const num::TruncatedMomentTable& moments);
double expect_truncated_gaussian(const MultivariatePolynomial& p, double r);

/// Integrates out variables [first, dim) against independent clamped
/// standard normals; returns a polynomial in the first `first` variables.
MultivariatePolynomial expect_truncated_gaussian_partial(const MultivariatePolynomial& p, std::size_t first,
                                                         const num::TruncatedMomentTable& moments);

/// Flat term list for repeated evaluation on hot paths.
class CompiledPolynomial {
 public:
  CompiledPolynomial() = default;
  explicit CompiledPolynomial(const MultivariatePolynomial& p);

  std::size_t dim() const { return dim_; }
  double operator()(std::span<const double> x) const;

 private:
  std::size_t dim_ = 0;
  int max_exp_ = 0;
  std::vector<int> exponents_;  // row-major terms x dim
  std::vector<double> coeffs_;
  // Univariate fast path: dense ascending coefficients for Horner.
  std::vector<double> dense_;
};

}  // namespace rawbfst::poly
