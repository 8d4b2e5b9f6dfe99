#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "rawbfst/polynomial.hpp"
#include "rawbfst/rawbfst.hpp"

/// Brute-force references: direct simulation, quadrature and closed forms.
/// Nothing in the production path depends on this library.
namespace rawbfst::oracle {

struct OracleEstimate {
  double mean = 0.0;
  double std_error = 0.0;  ///< sample standard deviation / sqrt(n)
  std::size_t n = 0;
};

/// Average of H_{iota,Delta}(xi) y(x + b(x) Delta + sigma(x) sqrt(Delta) xi)
/// over n fresh draws; with `clamp` the innovation is replaced by [xi]_clamp
/// in both places. Uses the oracle stream namespace.
OracleEstimate mc_weighted_conditional(const Target& y, const EulerModel& model, const poly::MultiIndex& iota,
                                       double delta, std::optional<double> clamp, std::span<const double> x,
                                       std::size_t n, std::uint64_t seed);

/// Simulation counterpart of Estimator::evaluate over the same coefficients.
OracleEstimate mc_estimator(const Estimator& est, const poly::MultiIndex& iota, std::span<const double> x,
                            std::size_t n, std::uint64_t seed);

// Test problem y(x) = x^2 exp(-x^2/2) with its second derivative and the exact
// weighted conditional expectation z(x) = E[(xi^2 - 1)/Delta y(x + sqrt(Delta) xi)].
double test_function(double x);
double y_second_derivative(double x);
double closed_form_z(double x, double delta);

/// sqrt(int |z(x) - y''(x)|^2 phi(x) dx).
double discretization_error(double delta);

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive Gauss-Kronrod (15-point pairs) on [a, b].
/// Throws NumericalError if the error estimate misses max(abs_tol, rel_tol |value|) by more than a
/// factor of 100, ignoring the rounding floor of the integrand.
QuadResult integrate(const std::function<double(double)>& f, double a, double b, double abs_tol = 1e-13,
                     double rel_tol = 1e-12);

/// int f(x) phi(x) dx over the real line.
QuadResult gaussian_expectation(const std::function<double(double)>& f, double abs_tol = 1e-13, double rel_tol = 1e-12);

/// E[min(max(xi, -r), r)^q] by quadrature of the clamped integrand.
double truncated_moment_quadrature(int q, double r);

/// n-point rules (Golub-Welsch); Hermite weights sum to 1 (probabilists').
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
QuadratureRule gauss_hermite(int n);
QuadratureRule gauss_legendre(int n);

/// Tensor Gauss-Hermite expectation, exact for polynomials up to the given per-variable degree.
double gauss_hermite_expectation(const poly::MultivariatePolynomial& p);

/// Tensor Gauss-Legendre average over the uniform law on [-1, 1]^D.
double uniform_cube_expectation(const poly::MultivariatePolynomial& p);

}  // namespace rawbfst::oracle
