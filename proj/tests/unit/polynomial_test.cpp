#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "rawbfst/error.hpp"
#include "rawbfst/oracle.hpp"
#include "rawbfst/polynomial.hpp"
#include "rawbfst/random.hpp"

using namespace rawbfst::poly;

namespace {

MultivariatePolynomial random_poly(std::mt19937_64& gen, std::size_t dim, int degree) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MultivariatePolynomial p(dim);
  for (const auto& j : enumerate_multi_indices(static_cast<int>(dim), degree)) p.add_term(j, u(gen));
  return p;
}

}  // namespace

TEST(MultiIndices, UnivariateOrder) {
  const auto v = enumerate_multi_indices(1, 5);
  ASSERT_EQ(v.size(), 6u);
  for (int q = 0; q <= 5; ++q) EXPECT_EQ(v[static_cast<std::size_t>(q)], MultiIndex{q});
}

TEST(MultiIndices, SizesAreBinomial) {
  EXPECT_EQ(enumerate_multi_indices(2, 2).size(), 6u);
  for (int q : {5, 6, 7}) EXPECT_EQ(enumerate_multi_indices(1, q).size(), static_cast<std::size_t>(q + 1));
  for (int d = 1; d <= 4; ++d) {
    for (int q = 0; q <= 8; ++q) {
      EXPECT_EQ(static_cast<double>(enumerate_multi_indices(d, q).size()), binomial(d + q, d));
    }
  }
}

TEST(MultiIndices, GradedLexicographic) {
  const auto v = enumerate_multi_indices(2, 2);
  const std::vector<MultiIndex> expected{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  EXPECT_EQ(v, expected);
  const auto w = enumerate_multi_indices(3, 4);
  for (std::size_t k = 1; k < w.size(); ++k) EXPECT_TRUE(graded_lex_less(w[k - 1], w[k]));
}

TEST(Legendre, LowOrders) {
  EXPECT_EQ(legendre_coeffs(0), std::vector<double>({1.0}));
  EXPECT_EQ(legendre_coeffs(1), std::vector<double>({0.0, 1.0}));
  EXPECT_EQ(legendre_coeffs(2), std::vector<double>({-0.5, 0.0, 1.5}));
  for (int q = 0; q <= 12; ++q) {
    double at_one = 0.0;
    for (double c : legendre_coeffs(q)) at_one += c;
    EXPECT_NEAR(at_one, 1.0, 1e-12) << q;
  }
}

TEST(Legendre, OrthogonalityByGaussLegendre) {
  const auto rule = rawbfst::oracle::gauss_legendre(10);
  for (int p = 0; p <= 7; ++p) {
    for (int q = 0; q <= 7; ++q) {
      const auto lp = MultivariatePolynomial::from_univariate(1, 0, legendre_coeffs(p));
      const auto lq = MultivariatePolynomial::from_univariate(1, 0, legendre_coeffs(q));
      double acc = 0.0;
      for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double x = rule.nodes[k];
        acc += rule.weights[k] * poly_eval(lp, {&x, 1}) * poly_eval(lq, {&x, 1});
      }
      EXPECT_NEAR(acc, p == q ? 2.0 / (2 * q + 1) : 0.0, 1e-12);
    }
  }
}

TEST(TensorLegendre, Examples) {
  const auto one = tensor_legendre(MultiIndex{0, 0, 0});
  EXPECT_EQ(one.terms().size(), 1u);
  EXPECT_EQ(one.coefficient(MultiIndex{0, 0, 0}), 1.0);
  const auto p1 = tensor_legendre(MultiIndex{1});
  EXPECT_EQ(p1.terms().size(), 1u);
  EXPECT_NEAR(p1.coefficient(MultiIndex{1}), std::sqrt(3.0), 1e-15);
}

TEST(TensorLegendre, OrthonormalUnderUniform) {
  const auto basis = enumerate_multi_indices(2, 3);
  for (const auto& a : basis) {
    for (const auto& b : basis) {
      const double e = rawbfst::oracle::uniform_cube_expectation(poly_mul(tensor_legendre(a), tensor_legendre(b)));
      EXPECT_NEAR(e, a == b ? 1.0 : 0.0, 1e-12);
    }
  }
}

TEST(TensorLegendre, ValueAtOnes) {
  for (const auto& j : enumerate_multi_indices(3, 5)) {
    const std::vector<double> ones(3, 1.0);
    double expected = 1.0;
    for (int v : j.entries()) expected *= std::sqrt(2.0 * v + 1.0);
    EXPECT_NEAR(poly_eval(tensor_legendre(j), ones), expected, 1e-10 * expected);
  }
}

TEST(AffineSubstitute, Examples) {
  const auto x2 = MultivariatePolynomial::from_univariate(1, 0, std::vector<double>{0.0, 0.0, 1.0});
  const auto same = affine_substitute(x2, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
  EXPECT_EQ(same.terms(), x2.terms());
  const double a = 1.5;
  const double m = -0.7;
  const auto r = affine_substitute(x2, Eigen::VectorXd::Constant(1, a), Eigen::MatrixXd::Constant(1, 1, m));
  EXPECT_NEAR(r.coefficient(MultiIndex{2}), m * m, 1e-15);
  EXPECT_NEAR(r.coefficient(MultiIndex{1}), 2 * a * m, 1e-15);
  EXPECT_NEAR(r.coefficient(MultiIndex{0}), a * a, 1e-15);
}

TEST(AffineSubstitute, RandomEvaluation) {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_poly(gen, 2, 4);
    Eigen::VectorXd c(2);
    Eigen::MatrixXd M(2, 2);
    c << n01(gen), n01(gen);
    M << n01(gen), n01(gen), n01(gen), n01(gen);
    const auto r = affine_substitute(p, c, M);
    EXPECT_LE(r.degree(), p.degree());
    for (int k = 0; k < 20; ++k) {
      Eigen::VectorXd w(2);
      w << n01(gen), n01(gen);
      const Eigen::VectorXd x = c + M * w;
      const double lhs = poly_eval(r, {w.data(), 2});
      const double rhs = poly_eval(p, {x.data(), 2});
      EXPECT_NEAR(lhs, rhs, 1e-9 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST(AffineSubstitute, Linear) {
  std::mt19937_64 gen(12);
  const auto p = random_poly(gen, 2, 3);
  const auto q = random_poly(gen, 2, 3);
  Eigen::VectorXd c(2);
  c << 0.3, -1.2;
  Eigen::MatrixXd M(2, 2);
  M << 1.1, 0.2, -0.4, 0.9;
  const auto lhs = affine_substitute(2.0 * p + (-3.0) * q, c, M);
  const auto rhs = 2.0 * affine_substitute(p, c, M) + (-3.0) * affine_substitute(q, c, M);
  for (const auto& [e, v] : lhs.terms()) EXPECT_NEAR(v, rhs.coefficient(e), 1e-12);
  for (const auto& [e, v] : rhs.terms()) EXPECT_NEAR(v, lhs.coefficient(e), 1e-12);
}

TEST(AffineSubstitute, DimensionMismatch) {
  const auto p = MultivariatePolynomial::variable(2, 0);
  EXPECT_THROW(affine_substitute(p, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1)), rawbfst::ConfigError);
}

TEST(PolyMul, Examples) {
  const auto xp1 = MultivariatePolynomial::from_univariate(1, 0, std::vector<double>{1.0, 1.0});
  const auto xm1 = MultivariatePolynomial::from_univariate(1, 0, std::vector<double>{-1.0, 1.0});
  const auto prod = poly_mul(xp1, xm1);
  EXPECT_EQ(prod.terms().size(), 2u);  // the x term cancels exactly and is not stored
  EXPECT_EQ(prod.coefficient(MultiIndex{2}), 1.0);
  EXPECT_EQ(prod.coefficient(MultiIndex{0}), -1.0);
  EXPECT_EQ(poly_mul(xp1, MultivariatePolynomial::constant(1, 1.0)).terms(), xp1.terms());
  EXPECT_THROW(poly_mul(xp1, MultivariatePolynomial::constant(2, 1.0)), rawbfst::ConfigError);
}

TEST(PolyMul, RandomEvaluation) {
  std::mt19937_64 gen(13);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_poly(gen, 3, 3);
    const auto q = random_poly(gen, 3, 2);
    const std::vector<double> x{n01(gen), n01(gen), n01(gen)};
    const double lhs = poly_eval(poly_mul(p, q), x);
    const double rhs = poly_eval(p, x) * poly_eval(q, x);
    EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(rhs)));
  }
}

TEST(Compiled, MatchesInterpreted) {
  std::mt19937_64 gen(14);
  std::normal_distribution<double> n01;
  for (std::size_t dim : {1u, 2u, 3u}) {
    const auto p = random_poly(gen, dim, 6);
    const CompiledPolynomial c(p);
    for (int k = 0; k < 20; ++k) {
      std::vector<double> x(dim);
      for (auto& v : x) v = n01(gen);
      EXPECT_NEAR(c(x), poly_eval(p, x), 1e-12 * std::max(1.0, std::abs(poly_eval(p, x))));
    }
  }
}

TEST(ScaledHermiteWeight, Examples) {
  const auto w = scaled_hermite_weight_poly(MultiIndex{2}, 0.25);
  EXPECT_EQ(w.terms().size(), 2u);
  EXPECT_NEAR(w.coefficient(MultiIndex{2}), 4.0, 1e-15);
  EXPECT_NEAR(w.coefficient(MultiIndex{0}), -4.0, 1e-15);
  const auto w0 = scaled_hermite_weight_poly(MultiIndex{0, 0}, 0.1);
  EXPECT_EQ(w0.coefficient(MultiIndex{0, 0}), 1.0);
}

TEST(TruncatedExpectation, Examples) {
  EXPECT_DOUBLE_EQ(expect_truncated_gaussian(MultivariatePolynomial::constant(2, 1.0), 0.7), 1.0);
  const auto x1x2 = poly_mul(MultivariatePolynomial::variable(2, 0), MultivariatePolynomial::variable(2, 1));
  EXPECT_EQ(expect_truncated_gaussian(x1x2, 2.0), 0.0);
}

TEST(TruncatedExpectation, AgainstMonteCarlo) {
  std::mt19937_64 gen(15);
  const auto p = random_poly(gen, 1, 6);
  const double r = 2.0;
  const double exact = expect_truncated_gaussian(p, r);
  auto rng = rawbfst::make_stream(15, rawbfst::StreamNamespace::kOracle, 1);
  const CompiledPolynomial cp(p);
  constexpr int n = 10'000'000;
  double mean = 0.0;
  double m2 = 0.0;
  for (int k = 1; k <= n; ++k) {
    const double w = std::clamp(rng.normal(), -r, r);
    const double v = cp({&w, 1});
    const double d = v - mean;
    mean += d / k;
    m2 += d * (v - mean);
  }
  const double se = std::sqrt(m2 / (n - 1.0) / n);
  EXPECT_LT(std::abs(mean - exact), 4.0 * se);
}

TEST(TruncatedExpectation, LargeRadiusMatchesGaussHermite) {
  std::mt19937_64 gen(16);
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = random_poly(gen, 2, 6);
    EXPECT_NEAR(expect_truncated_gaussian(p, 40.0), rawbfst::oracle::gauss_hermite_expectation(p), 1e-9);
  }
}

TEST(TruncatedExpectation, PartialThenFullEqualsFull) {
  std::mt19937_64 gen(17);
  const auto p = random_poly(gen, 3, 5);
  const auto m = rawbfst::num::truncated_moments(6, 1.3);
  const auto partial = expect_truncated_gaussian_partial(p, 1, m);
  EXPECT_EQ(partial.dim(), 1u);
  EXPECT_NEAR(expect_truncated_gaussian(partial, m), expect_truncated_gaussian(p, m), 1e-12);
}
