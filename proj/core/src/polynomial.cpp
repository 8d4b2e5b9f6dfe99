#include "rawbfst/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>

#include "rawbfst/error.hpp"

namespace rawbfst::poly {

int MultiIndex::abs() const { return std::accumulate(entries_.begin(), entries_.end(), 0); }

bool graded_lex_less(const MultiIndex& a, const MultiIndex& b) {
  const int da = a.abs();
  const int db = b.abs();
  if (da != db) return da < db;
  // Same degree: the index with the larger leading exponent comes first.
  return std::lexicographical_compare(a.entries().begin(), a.entries().end(), b.entries().begin(),
                                      b.entries().end(), std::greater<>());
}

std::vector<MultiIndex> enumerate_multi_indices(int dim, int max_degree) {
  if (dim < 1) throw ConfigError("enumerate_multi_indices: dimension must be >= 1");
  if (max_degree < 0) throw ConfigError("enumerate_multi_indices: degree must be >= 0");
  std::vector<MultiIndex> out;
  MultiIndex cur(static_cast<std::size_t>(dim));
  // Depth-first fill of every coordinate with the remaining degree budget.
  std::function<void(std::size_t, int)> fill = [&](std::size_t d, int budget) {
    if (d + 1 == cur.dim()) {
      for (int e = 0; e <= budget; ++e) {
        cur[d] = e;
        out.push_back(cur);
      }
      cur[d] = 0;
      return;
    }
    for (int e = 0; e <= budget; ++e) {
      cur[d] = e;
      fill(d + 1, budget - e);
    }
    cur[d] = 0;
  };
  fill(0, max_degree);
  std::sort(out.begin(), out.end(), graded_lex_less);
  return out;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

// --- MultivariatePolynomial ----------------------------------------------

MultivariatePolynomial MultivariatePolynomial::constant(std::size_t dim, double value) {
  MultivariatePolynomial p(dim);
  p.add_term(MultiIndex(dim), value);
  return p;
}

MultivariatePolynomial MultivariatePolynomial::variable(std::size_t dim, std::size_t var) {
  MultivariatePolynomial p(dim);
  MultiIndex e(dim);
  e[var] = 1;
  p.add_term(e, 1.0);
  return p;
}

MultivariatePolynomial MultivariatePolynomial::from_univariate(std::size_t dim, std::size_t var,
                                                               std::span<const double> coeffs) {
  MultivariatePolynomial p(dim);
  MultiIndex e(dim);
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    e[var] = static_cast<int>(k);
    p.add_term(e, coeffs[k]);
  }
  return p;
}

int MultivariatePolynomial::degree() const {
  int deg = 0;
  for (const auto& [e, c] : terms_) deg = std::max(deg, e.abs());
  return deg;
}

int MultivariatePolynomial::degree_in(std::size_t var) const {
  int deg = 0;
  for (const auto& [e, c] : terms_) deg = std::max(deg, e[var]);
  return deg;
}

double MultivariatePolynomial::coefficient(const MultiIndex& exponent) const {
  const auto it = terms_.find(exponent);
  return it == terms_.end() ? 0.0 : it->second;
}

void MultivariatePolynomial::add_term(const MultiIndex& exponent, double coeff) {
  if (exponent.dim() != dim_) throw ConfigError("add_term: exponent dimension mismatch");
  if (coeff == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(exponent, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == 0.0) terms_.erase(it);
  }
}

MultivariatePolynomial& MultivariatePolynomial::operator+=(const MultivariatePolynomial& other) {
  if (other.dim_ != dim_) throw ConfigError("polynomial addition: dimension mismatch");
  for (const auto& [e, c] : other.terms_) add_term(e, c);
  return *this;
}

MultivariatePolynomial& MultivariatePolynomial::operator-=(const MultivariatePolynomial& other) {
  if (other.dim_ != dim_) throw ConfigError("polynomial subtraction: dimension mismatch");
  for (const auto& [e, c] : other.terms_) add_term(e, -c);
  return *this;
}

MultivariatePolynomial& MultivariatePolynomial::operator*=(double factor) {
  if (factor == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= factor;
    it = it->second == 0.0 ? terms_.erase(it) : std::next(it);
  }
  return *this;
}

MultivariatePolynomial poly_mul(const MultivariatePolynomial& p, const MultivariatePolynomial& q) {
  if (p.dim() != q.dim()) throw ConfigError("poly_mul: dimension mismatch");
  MultivariatePolynomial out(p.dim());
  MultiIndex e(p.dim());
  for (const auto& [ep, cp] : p.terms()) {
    for (const auto& [eq, cq] : q.terms()) {
      for (std::size_t d = 0; d < p.dim(); ++d) e[d] = ep[d] + eq[d];
      out.add_term(e, cp * cq);
    }
  }
  return out;
}

namespace {

// powers[d][k] = x_d^k for k <= max exponent.
std::vector<std::vector<double>> power_table(const MultivariatePolynomial& p, std::span<const double> x) {
  std::vector<std::vector<double>> pw(p.dim());
  for (std::size_t d = 0; d < p.dim(); ++d) {
    const int deg = p.degree_in(d);
    pw[d].resize(static_cast<std::size_t>(deg) + 1);
    pw[d][0] = 1.0;
    for (int k = 1; k <= deg; ++k) pw[d][static_cast<std::size_t>(k)] = pw[d][static_cast<std::size_t>(k - 1)] * x[d];
  }
  return pw;
}

}  // namespace

double poly_eval(const MultivariatePolynomial& p, std::span<const double> x) {
  if (x.size() != p.dim()) throw ConfigError("poly_eval: dimension mismatch");
  if (p.dim() == 1) {
    // Horner over the (sparse) univariate coefficient list.
    const int deg = p.degree();
    double acc = 0.0;
    auto it = p.terms().rbegin();
    for (int k = deg; k >= 0; --k) {
      acc *= x[0];
      if (it != p.terms().rend() && it->first[0] == k) {
        acc += it->second;
        ++it;
      }
    }
    return acc;
  }
  const auto pw = power_table(p, x);
  double acc = 0.0;
  for (const auto& [e, c] : p.terms()) {
    double t = c;
    for (std::size_t d = 0; d < p.dim(); ++d) t *= pw[d][static_cast<std::size_t>(e[d])];
    acc += t;
  }
  return acc;
}

MultivariatePolynomial affine_substitute(const MultivariatePolynomial& p, const Eigen::VectorXd& c,
                                         const Eigen::MatrixXd& M) {
  const auto dim = p.dim();
  if (static_cast<std::size_t>(c.size()) != dim || static_cast<std::size_t>(M.rows()) != dim) {
    throw ConfigError("affine_substitute: dimension mismatch");
  }
  const auto out_dim = static_cast<std::size_t>(M.cols());

  // Powers of each affine form l_d(w) = c_d + sum_e M_de w_e.
  std::vector<std::vector<MultivariatePolynomial>> powers(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    MultivariatePolynomial form = MultivariatePolynomial::constant(out_dim, c(static_cast<Eigen::Index>(d)));
    for (std::size_t e = 0; e < out_dim; ++e) {
      form += MultivariatePolynomial::variable(out_dim, e) * M(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(e));
    }
    const int deg = p.degree_in(d);
    powers[d].reserve(static_cast<std::size_t>(deg) + 1);
    powers[d].push_back(MultivariatePolynomial::constant(out_dim, 1.0));
    for (int k = 1; k <= deg; ++k) powers[d].push_back(poly_mul(powers[d].back(), form));
  }

  MultivariatePolynomial out(out_dim);
  for (const auto& [e, coeff] : p.terms()) {
    MultivariatePolynomial term = MultivariatePolynomial::constant(out_dim, coeff);
    for (std::size_t d = 0; d < dim; ++d) {
      if (e[d] > 0) term = poly_mul(term, powers[d][static_cast<std::size_t>(e[d])]);
    }
    out += term;
  }
  return out;
}

std::vector<double> legendre_coeffs(int q) {
  if (q < 0) throw ConfigError("legendre_coeffs: degree must be >= 0");
  // (2q-2r)! / (r! (q-r)! (q-2r)!) = C(2q-2r, q-r) * C(q-r, r), both exact in 64-bit integers.
  auto choose = [](int n, int k) {
    std::uint64_t c = 1;
    for (int i = 1; i <= k; ++i) c = c * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return c;
  };
  std::vector<double> coeffs(static_cast<std::size_t>(q) + 1, 0.0);
  const double scale = std::ldexp(1.0, -q);
  for (int r = 0; 2 * r <= q; ++r) {
    const auto mag = static_cast<double>(choose(2 * q - 2 * r, q - r) * choose(q - r, r));
    coeffs[static_cast<std::size_t>(q - 2 * r)] = (r % 2 == 0 ? 1.0 : -1.0) * mag * scale;
  }
  return coeffs;
}

MultivariatePolynomial tensor_legendre(const MultiIndex& j) {
  const auto dim = j.dim();
  MultivariatePolynomial out = MultivariatePolynomial::constant(dim, 1.0);
  for (std::size_t d = 0; d < dim; ++d) {
    if (j[d] == 0) continue;
    const auto coeffs = legendre_coeffs(j[d]);
    out = poly_mul(out, MultivariatePolynomial::from_univariate(dim, d, coeffs) * std::sqrt(2.0 * j[d] + 1.0));
  }
  return out;
}

MultivariatePolynomial scaled_hermite_weight_poly(const MultiIndex& iota, double delta) {
  if (!(delta > 0.0)) throw ConfigError("scaled_hermite_weight_poly: Delta must be positive");
  const auto dim = iota.dim();
  MultivariatePolynomial out = MultivariatePolynomial::constant(dim, std::pow(delta, -0.5 * iota.abs()));
  for (std::size_t d = 0; d < dim; ++d) {
    if (iota[d] == 0) continue;
    const auto coeffs = num::hermite_coeffs(iota[d]);
    out = poly_mul(out, MultivariatePolynomial::from_univariate(dim, d, coeffs));
  }
  return out;
}

double expect_truncated_gaussian(const MultivariatePolynomial& p, const num::TruncatedMomentTable& moments) {
  double acc = 0.0;
  for (const auto& [e, c] : p.terms()) {
    double t = c;
    for (std::size_t d = 0; d < p.dim() && t != 0.0; ++d) {
      if (e[d] > moments.max_order()) throw NumericalError("expect_truncated_gaussian: moment table too short");
      t *= moments[e[d]];
    }
    acc += t;
  }
  return acc;
}

double expect_truncated_gaussian(const MultivariatePolynomial& p, double r) {
  int max_exp = 0;
  for (std::size_t d = 0; d < p.dim(); ++d) max_exp = std::max(max_exp, p.degree_in(d));
  return expect_truncated_gaussian(p, num::truncated_moments(max_exp + (max_exp % 2), r));
}

MultivariatePolynomial expect_truncated_gaussian_partial(const MultivariatePolynomial& p, std::size_t first,
                                                         const num::TruncatedMomentTable& moments) {
  if (first > p.dim()) throw ConfigError("expect_truncated_gaussian_partial: split beyond dimension");
  MultivariatePolynomial out(first);
  MultiIndex kept(first);
  for (const auto& [e, c] : p.terms()) {
    double t = c;
    for (std::size_t d = first; d < p.dim() && t != 0.0; ++d) {
      if (e[d] > moments.max_order()) throw NumericalError("expect_truncated_gaussian_partial: moment table too short");
      t *= moments[e[d]];
    }
    for (std::size_t d = 0; d < first; ++d) kept[d] = e[d];
    out.add_term(kept, t);
  }
  return out;
}

// --- CompiledPolynomial ----------------------------------------------------

CompiledPolynomial::CompiledPolynomial(const MultivariatePolynomial& p) : dim_(p.dim()) {
  if (dim_ == 1) {
    dense_.assign(static_cast<std::size_t>(p.degree()) + 1, 0.0);
    for (const auto& [e, c] : p.terms()) dense_[static_cast<std::size_t>(e[0])] = c;
    return;
  }
  for (const auto& [e, c] : p.terms()) {
    for (std::size_t d = 0; d < dim_; ++d) {
      exponents_.push_back(e[d]);
      max_exp_ = std::max(max_exp_, e[d]);
    }
    coeffs_.push_back(c);
  }
}

double CompiledPolynomial::operator()(std::span<const double> x) const {
  if (dim_ == 1) {
    double acc = 0.0;
    for (auto it = dense_.rbegin(); it != dense_.rend(); ++it) acc = acc * x[0] + *it;
    return acc;
  }
  const auto stride = static_cast<std::size_t>(max_exp_) + 1;
  std::vector<double> pw(dim_ * stride);
  for (std::size_t d = 0; d < dim_; ++d) {
    pw[d * stride] = 1.0;
    for (std::size_t k = 1; k < stride; ++k) pw[d * stride + k] = pw[d * stride + k - 1] * x[d];
  }
  double acc = 0.0;
  for (std::size_t t = 0; t < coeffs_.size(); ++t) {
    double v = coeffs_[t];
    for (std::size_t d = 0; d < dim_; ++d) v *= pw[d * stride + static_cast<std::size_t>(exponents_[t * dim_ + d])];
    acc += v;
  }
  return acc;
}

}  // namespace rawbfst::poly
