#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hoc/tensor.hpp"

namespace hoc {

using Exponents = std::vector<int>;

/// Multivariate polynomial, sum of coeff * prod_i x_i^{e_i}. Zero coefficients
/// are never stored.
class PolyFunction {
 public:
  explicit PolyFunction(std::size_t dim);
  PolyFunction(std::size_t dim, const std::map<Exponents, double>& terms);

  std::size_t dim() const noexcept { return dim_; }
  int degree() const noexcept;
  const std::map<Exponents, double>& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }

  /// Adds coeff to the monomial with the given exponents.
  void add_term(const Exponents& exponents, double coeff);

  double operator()(std::span<const double> x) const;

  PolyFunction partial(std::size_t variable) const;
  PolyFunction partial(std::span<const std::size_t> variables) const;

  PolyFunction& operator+=(const PolyFunction& other);
  PolyFunction& operator*=(double c);
  friend PolyFunction operator+(PolyFunction a, const PolyFunction& b) { return a += b; }
  friend PolyFunction operator*(double c, PolyFunction f) { return f *= c; }

 private:
  struct Factor {
    std::size_t variable;
    int power;
  };
  struct FlatTerm {
    double coeff;
    std::vector<Factor> factors;
  };
  void rebuild();

  std::size_t dim_;
  std::map<Exponents, double> terms_;
  std::vector<FlatTerm> flat_;
};

double eval(const PolyFunction& f, std::span<const double> x);

/// All order-k partial derivatives of f as polynomials, one per canonical
/// index tuple, ready to be evaluated at many points.
class DerivativeField {
 public:
  DerivativeField(const PolyFunction& f, std::size_t order);

  std::size_t order() const noexcept { return order_; }
  SymTensor at(std::span<const double> x) const;
  /// True when every partial of this order is a constant polynomial.
  bool is_constant() const noexcept;
  const std::vector<PolyFunction>& partials() const noexcept { return partials_; }

 private:
  std::size_t order_;
  std::size_t dim_;
  std::vector<PolyFunction> partials_;
};

/// Exact k-th derivative tensor of f at x (zero tensor beyond the degree).
SymTensor derivative_tensor(const PolyFunction& f, std::size_t k, std::span<const double> x);

/// E f under independent coordinates, given raw moments moment(i, k) = E X_i^k.
double expectation(const PolyFunction& f,
                   const std::function<double(std::size_t, int)>& moment);

/// Symbolic check that f and all its partials of order < d have mean zero
/// under any product of centered coordinates: every monomial keeps at least
/// one variable with exponent exactly one.
bool centered_under_centered_inputs(const PolyFunction& f, std::size_t d);

/// Coefficients a_{i1..id} of a homogeneous multilinear polynomial, given on
/// strictly increasing index tuples.
struct MultilinearSpec {
  std::size_t dim = 0;
  std::size_t order = 0;
  std::vector<std::pair<std::vector<std::size_t>, double>> coeffs;
};

struct Multilinear {
  PolyFunction function;
  SymTensor hypermatrix;  // symmetrized, zero on repeated indices
};

/// Builds f(X) = sum a X_{i1}...X_{id} and its hypermatrix A, for which
/// derivative_tensor(f, d, x) == A at every x. Rejects nonzero coefficients on
/// repeated indices and unsorted tuples.
Multilinear from_multilinear(const MultilinearSpec& spec);

struct GradNormCheck {
  double lhs;  // |grad |f^{(k-1)}|_Op| by central differences
  double rhs;  // |f^{(k)}|_Op
  bool holds;
};

/// Finite-difference check that the modulus of the gradient of
/// x -> |f^{(k-1)}(x)|_Op is dominated by |f^{(k)}(x)|_Op.
GradNormCheck gradnorm_lemma_check(const PolyFunction& f, std::size_t k,
                                   std::span<const double> x, double h = 1e-5,
                                   double tolerance = 1e-3);

void to_json(nlohmann::json& j, const PolyFunction& f);
PolyFunction poly_from_json(const nlohmann::json& j);
void to_json(nlohmann::json& j, const MultilinearSpec& spec);
MultilinearSpec multilinear_from_json(const nlohmann::json& j);

}  // namespace hoc
