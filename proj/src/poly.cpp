#include "hoc/poly.hpp"

#include <algorithm>
#include <cmath>

#include "hoc/error.hpp"

namespace hoc {
namespace {

double int_pow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

}  // namespace

PolyFunction::PolyFunction(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw InvalidInput("PolyFunction: dimension must be positive");
}

PolyFunction::PolyFunction(std::size_t dim, const std::map<Exponents, double>& terms)
    : PolyFunction(dim) {
  for (const auto& [e, c] : terms) {
    if (e.size() != dim) throw InvalidInput("PolyFunction: exponent length must equal dim");
    if (std::any_of(e.begin(), e.end(), [](int p) { return p < 0; })) {
      throw InvalidInput("PolyFunction: exponents must be nonnegative");
    }
    if (c != 0.0) terms_[e] += c;
  }
  std::erase_if(terms_, [](const auto& kv) { return kv.second == 0.0; });
  rebuild();
}

int PolyFunction::degree() const noexcept {
  int deg = 0;
  for (const auto& [e, c] : terms_) {
    int total = 0;
    for (int p : e) total += p;
    deg = std::max(deg, total);
  }
  return deg;
}

void PolyFunction::add_term(const Exponents& exponents, double coeff) {
  if (exponents.size() != dim_) throw InvalidInput("PolyFunction: exponent length must equal dim");
  if (std::any_of(exponents.begin(), exponents.end(), [](int p) { return p < 0; })) {
    throw InvalidInput("PolyFunction: exponents must be nonnegative");
  }
  const double updated = (terms_.count(exponents) ? terms_[exponents] : 0.0) + coeff;
  if (updated == 0.0) {
    terms_.erase(exponents);
  } else {
    terms_[exponents] = updated;
  }
  rebuild();
}

void PolyFunction::rebuild() {
  flat_.clear();
  flat_.reserve(terms_.size());
  for (const auto& [e, c] : terms_) {
    FlatTerm term{c, {}};
    for (std::size_t i = 0; i < e.size(); ++i)
      if (e[i] > 0) term.factors.push_back({i, e[i]});
    flat_.push_back(std::move(term));
  }
}

double PolyFunction::operator()(std::span<const double> x) const {
  if (x.size() != dim_) throw InvalidInput("PolyFunction: point dimension mismatch");
  double sum = 0.0;
  for (const auto& term : flat_) {
    double p = term.coeff;
    for (const auto& f : term.factors) p *= int_pow(x[f.variable], f.power);
    sum += p;
  }
  return sum;
}

PolyFunction PolyFunction::partial(std::size_t variable) const {
  if (variable >= dim_) throw InvalidInput("PolyFunction::partial: variable out of range");
  std::map<Exponents, double> out;
  for (const auto& [e, c] : terms_) {
    if (e[variable] == 0) continue;
    Exponents de = e;
    de[variable] -= 1;
    out[de] += c * e[variable];
  }
  return PolyFunction(dim_, out);
}

PolyFunction PolyFunction::partial(std::span<const std::size_t> variables) const {
  PolyFunction g = *this;
  for (std::size_t v : variables) {
    g = g.partial(v);
    if (g.is_zero()) break;
  }
  return g;
}

PolyFunction& PolyFunction::operator+=(const PolyFunction& other) {
  if (other.dim_ != dim_) throw InvalidInput("PolyFunction: dimension mismatch");
  for (const auto& [e, c] : other.terms_) terms_[e] += c;
  std::erase_if(terms_, [](const auto& kv) { return kv.second == 0.0; });
  rebuild();
  return *this;
}

PolyFunction& PolyFunction::operator*=(double c) {
  if (c == 0.0) {
    terms_.clear();
  } else {
    for (auto& kv : terms_) kv.second *= c;
  }
  rebuild();
  return *this;
}

double eval(const PolyFunction& f, std::span<const double> x) { return f(x); }

DerivativeField::DerivativeField(const PolyFunction& f, std::size_t order)
    : order_(order), dim_(f.dim()) {
  if (order == 0) throw InvalidInput("DerivativeField: order must be at least 1");
  const SymTensor shape(order, dim_);
  partials_.reserve(shape.canonical_size());
  for (std::size_t k = 0; k < shape.canonical_size(); ++k) {
    partials_.push_back(f.partial(shape.canonical_index(k)));
  }
}

SymTensor DerivativeField::at(std::span<const double> x) const {
  SymTensor t(order_, dim_);
  for (std::size_t k = 0; k < partials_.size(); ++k) {
    if (!partials_[k].is_zero()) t.set_canonical_value(k, partials_[k](x));
  }
  return t;
}

bool DerivativeField::is_constant() const noexcept {
  return std::all_of(partials_.begin(), partials_.end(),
                     [](const PolyFunction& p) { return p.degree() == 0; });
}

SymTensor derivative_tensor(const PolyFunction& f, std::size_t k, std::span<const double> x) {
  if (x.size() != f.dim()) throw InvalidInput("derivative_tensor: point dimension mismatch");
  return DerivativeField(f, k).at(x);
}

double expectation(const PolyFunction& f,
                   const std::function<double(std::size_t, int)>& moment) {
  double sum = 0.0;
  for (const auto& [e, c] : f.terms()) {
    double p = c;
    for (std::size_t i = 0; i < e.size() && p != 0.0; ++i)
      if (e[i] > 0) p *= moment(i, e[i]);
    sum += p;
  }
  return sum;
}

bool centered_under_centered_inputs(const PolyFunction& f, std::size_t d) {
  auto all_terms_have_bare_factor = [](const PolyFunction& g) {
    return std::all_of(g.terms().begin(), g.terms().end(), [](const auto& kv) {
      return std::find(kv.first.begin(), kv.first.end(), 1) != kv.first.end();
    });
  };
  if (!all_terms_have_bare_factor(f)) return false;
  for (std::size_t k = 1; k < d; ++k) {
    const DerivativeField field(f, k);
    for (const auto& p : field.partials())
      if (!all_terms_have_bare_factor(p)) return false;
  }
  return true;
}

Multilinear from_multilinear(const MultilinearSpec& spec) {
  if (spec.dim == 0 || spec.order == 0) {
    throw InvalidInput("multilinear spec: dim and order must be positive");
  }
  if (spec.order > spec.dim) {
    throw InvalidInput("multilinear spec: order exceeds dimension, no strictly increasing tuples");
  }
  PolyFunction f(spec.dim);
  SymTensor a(spec.order, spec.dim);
  std::map<Exponents, double> terms;
  for (const auto& [index, value] : spec.coeffs) {
    if (index.size() != spec.order) throw InvalidInput("multilinear spec: index arity mismatch");
    for (std::size_t i : index)
      if (i >= spec.dim) throw InvalidInput("multilinear spec: index out of range");
    auto sorted = index;
    std::sort(sorted.begin(), sorted.end());
    const bool repeated = std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
    if (repeated) {
      if (value != 0.0) {
        throw InvalidInput("multilinear spec: nonzero coefficient on a repeated index");
      }
      continue;
    }
    if (!std::is_sorted(index.begin(), index.end())) {
      throw InvalidInput("multilinear spec: index tuples must be strictly increasing");
    }
    Exponents e(spec.dim, 0);
    for (std::size_t i : index) e[i] = 1;
    terms[e] += value;
    a.set(index, a.at(index) + value);
  }
  return {PolyFunction(spec.dim, terms), std::move(a)};
}

GradNormCheck gradnorm_lemma_check(const PolyFunction& f, std::size_t k,
                                   std::span<const double> x, double h, double tolerance) {
  if (k < 2) throw InvalidInput("gradnorm_lemma_check: k must be at least 2");
  if (x.size() != f.dim()) throw InvalidInput("gradnorm_lemma_check: point dimension mismatch");
  const DerivativeField lower(f, k - 1);
  OpNormOptions options;
  options.restarts = 8;
  auto phi = [&](std::span<const double> y) { return pointwise_op_norm(lower.at(y), options); };

  std::vector<double> y(x.begin(), x.end());
  double sq = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = x[i] + h;
    const double up = phi(y);
    y[i] = x[i] - h;
    const double down = phi(y);
    y[i] = x[i];
    const double g = (up - down) / (2.0 * h);
    sq += g * g;
  }
  GradNormCheck out;
  out.lhs = std::sqrt(sq);
  out.rhs = pointwise_op_norm(derivative_tensor(f, k, x), options);
  out.holds = out.lhs <= out.rhs + tolerance;
  return out;
}

void to_json(nlohmann::json& j, const PolyFunction& f) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [e, c] : f.terms()) terms.push_back({{"exponents", e}, {"coeff", c}});
  j = {{"dim", f.dim()}, {"terms", terms}};
}

PolyFunction poly_from_json(const nlohmann::json& j) {
  const auto dim = j.at("dim").get<std::size_t>();
  std::map<Exponents, double> terms;
  for (const auto& t : j.at("terms")) {
    terms[t.at("exponents").get<Exponents>()] += t.at("coeff").get<double>();
  }
  return PolyFunction(dim, terms);
}

void to_json(nlohmann::json& j, const MultilinearSpec& spec) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& [index, value] : spec.coeffs) coeffs.push_back({{"index", index}, {"value", value}});
  j = {{"dim", spec.dim}, {"order", spec.order}, {"coeffs", coeffs}};
}

MultilinearSpec multilinear_from_json(const nlohmann::json& j) {
  MultilinearSpec spec;
  spec.dim = j.at("dim").get<std::size_t>();
  spec.order = j.at("order").get<std::size_t>();
  for (const auto& c : j.at("coeffs")) {
    spec.coeffs.emplace_back(c.at("index").get<std::vector<std::size_t>>(), c.at("value").get<double>());
  }
  return spec;
}

}  // namespace hoc
