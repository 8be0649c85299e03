#include "hoc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>

#include "hoc/error.hpp"
#include "hoc/linalg.hpp"
#include "hoc/parallel.hpp"
#include "hoc/rng.hpp"

namespace hoc {
namespace detail {

struct TensorLayout {
  std::size_t order;
  std::size_t dim;
  std::vector<SymTensor::Index> tuples;       // lexicographic, non-decreasing
  std::vector<std::uint64_t> multiplicities;  // d! / prod(count_i!)
  // tail_count[L][v]: non-decreasing tuples of length L with values in [v, n)
  std::vector<std::vector<std::size_t>> tail_count;

  std::size_t rank(std::span<const std::size_t> sorted) const {
    std::size_t r = 0;
    std::size_t lo = 0;
    for (std::size_t j = 0; j < order; ++j) {
      const std::size_t remaining = order - 1 - j;
      for (std::size_t v = lo; v < sorted[j]; ++v) r += tail_count[remaining][v];
      lo = sorted[j];
    }
    return r;
  }
};

namespace {

std::uint64_t factorial(std::size_t k) {
  std::uint64_t f = 1;
  for (std::size_t i = 2; i <= k; ++i) f *= i;
  return f;
}

std::shared_ptr<const TensorLayout> build_layout(std::size_t order, std::size_t dim) {
  auto layout = std::make_shared<TensorLayout>();
  layout->order = order;
  layout->dim = dim;

  layout->tail_count.assign(order + 1, std::vector<std::size_t>(dim + 1, 0));
  for (std::size_t v = 0; v <= dim; ++v) layout->tail_count[0][v] = 1;
  for (std::size_t len = 1; len <= order; ++len) {
    // tuples starting at value v or later: either start exactly at v or skip v
    layout->tail_count[len][dim] = 0;
    for (std::size_t v = dim; v-- > 0;) {
      layout->tail_count[len][v] = layout->tail_count[len - 1][v] + layout->tail_count[len][v + 1];
    }
  }

  SymTensor::Index current(order, 0);
  const std::uint64_t d_fact = factorial(order);
  for (;;) {
    layout->tuples.push_back(current);
    std::uint64_t denom = 1;
    std::size_t run = 1;
    for (std::size_t j = 1; j <= order; ++j) {
      if (j < order && current[j] == current[j - 1]) {
        ++run;
      } else {
        denom *= factorial(run);
        run = 1;
      }
    }
    layout->multiplicities.push_back(d_fact / denom);

    // advance to next non-decreasing tuple
    std::size_t pos = order;
    while (pos > 0 && current[pos - 1] == dim - 1) --pos;
    if (pos == 0) break;
    const std::size_t next = current[pos - 1] + 1;
    for (std::size_t j = pos - 1; j < order; ++j) current[j] = next;
  }
  return layout;
}

std::shared_ptr<const TensorLayout> layout_for(std::size_t order, std::size_t dim) {
  static std::mutex mutex;
  static std::map<std::pair<std::size_t, std::size_t>, std::shared_ptr<const TensorLayout>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{order, dim}];
  if (!slot) slot = build_layout(order, dim);
  return slot;
}

}  // namespace
}  // namespace detail

SymTensor::SymTensor(std::size_t order, std::size_t dim) : order_(order), dim_(dim) {
  if (order == 0 || dim == 0) throw InvalidInput("SymTensor: order and dim must be positive");
  layout_ = detail::layout_for(order, dim);
  values_.assign(layout_->tuples.size(), 0.0);
}

SymTensor SymTensor::from_vector(std::span<const double> v) {
  SymTensor t(1, v.size());
  for (std::size_t i = 0; i < v.size(); ++i) t.values_[i] = v[i];
  return t;
}

SymTensor SymTensor::from_matrix(std::span<const double> a, std::size_t n) {
  if (a.size() != n * n) throw InvalidInput("SymTensor::from_matrix: size mismatch");
  SymTensor t(2, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) t.set({i, j}, a[i * n + j]);
  return t;
}

SymTensor SymTensor::rank_one(std::span<const double> v, std::size_t order) {
  SymTensor t(order, v.size());
  for (std::size_t k = 0; k < t.canonical_size(); ++k) {
    double p = 1.0;
    for (std::size_t i : t.canonical_index(k)) p *= v[i];
    t.values_[k] = p;
  }
  return t;
}

std::size_t SymTensor::canonical_size() const noexcept { return values_.size(); }

const SymTensor::Index& SymTensor::canonical_index(std::size_t k) const {
  return layout_->tuples.at(k);
}

std::uint64_t SymTensor::multiplicity(std::size_t k) const {
  return layout_->multiplicities.at(k);
}

std::size_t SymTensor::slot(std::span<const std::size_t> index) const {
  if (index.size() != order_) throw InvalidInput("SymTensor: index arity does not match order");
  Index sorted(index.begin(), index.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.back() >= dim_) throw InvalidInput("SymTensor: index out of range");
  return layout_->rank(sorted);
}

double SymTensor::at(std::initializer_list<std::size_t> index) const {
  return at(std::span<const std::size_t>(index.begin(), index.size()));
}

void SymTensor::set(std::initializer_list<std::size_t> index, double value) {
  set(std::span<const std::size_t>(index.begin(), index.size()), value);
}

std::vector<double> SymTensor::expanded() const {
  std::size_t total = 1;
  for (std::size_t j = 0; j < order_; ++j) total *= dim_;
  std::vector<double> out(total);
  Index idx(order_, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (std::size_t j = order_; j-- > 0;) {
      idx[j] = rem % dim_;
      rem /= dim_;
    }
    out[flat] = at(idx);
  }
  return out;
}

double SymTensor::form(std::span<const double> v) const {
  if (v.size() != dim_) throw InvalidInput("SymTensor::form: vector length mismatch");
  double sum = 0.0;
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (values_[k] == 0.0) continue;
    double p = static_cast<double>(layout_->multiplicities[k]) * values_[k];
    for (std::size_t i : layout_->tuples[k]) p *= v[i];
    sum += p;
  }
  return sum;
}

std::vector<double> SymTensor::partial_contraction(std::span<const double> v) const {
  if (v.size() != dim_) throw InvalidInput("SymTensor::partial_contraction: length mismatch");
  std::vector<double> grad(dim_, 0.0);
  std::vector<double> prefix(order_ + 1);
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (values_[k] == 0.0) continue;
    const Index& c = layout_->tuples[k];
    const double w = static_cast<double>(layout_->multiplicities[k]) * values_[k];
    prefix[0] = 1.0;
    for (std::size_t j = 0; j < order_; ++j) prefix[j + 1] = prefix[j] * v[c[j]];
    double suffix = 1.0;
    for (std::size_t j = order_; j-- > 0;) {
      grad[c[j]] += w * prefix[j] * suffix;
      suffix *= v[c[j]];
    }
  }
  const double inv_order = 1.0 / static_cast<double>(order_);
  for (double& g : grad) g *= inv_order;
  return grad;
}

SymTensor& SymTensor::operator*=(double c) {
  for (double& x : values_) x *= c;
  return *this;
}

SymTensor& SymTensor::operator+=(const SymTensor& other) {
  if (other.order_ != order_ || other.dim_ != dim_) throw InvalidInput("SymTensor: shape mismatch");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  return *this;
}

double contract(const SymTensor& t, const std::vector<std::vector<double>>& vectors) {
  if (vectors.size() != t.order()) throw InvalidInput("contract: need exactly d vectors");
  for (const auto& v : vectors) {
    if (v.size() != t.dim()) throw InvalidInput("contract: vector length must equal dim");
  }
  const std::size_t d = t.order(), n = t.dim();
  // Sum over the full index grid; d and n are small wherever this is used.
  SymTensor::Index idx(d, 0);
  double sum = 0.0;
  for (;;) {
    double p = t.at(idx);
    if (p != 0.0) {
      for (std::size_t j = 0; j < d && p != 0.0; ++j) p *= vectors[j][idx[j]];
      sum += p;
    }
    std::size_t j = d;
    while (j > 0 && ++idx[j - 1] == n) idx[--j] = 0;
    if (j == 0) break;
  }
  return sum;
}

double hs_norm(const SymTensor& t) {
  double sum = 0.0;
  for (std::size_t k = 0; k < t.canonical_size(); ++k) {
    const double v = t.canonical_value(k);
    sum += static_cast<double>(t.multiplicity(k)) * v * v;
  }
  return std::sqrt(sum);
}

double max_abs_entry(const SymTensor& t) {
  double m = 0.0;
  for (std::size_t k = 0; k < t.canonical_size(); ++k) m = std::max(m, std::fabs(t.canonical_value(k)));
  return m;
}

namespace {

double euclidean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void normalize(std::vector<double>& v) {
  const double norm = euclidean(v);
  for (double& x : v) x /= norm;
}

struct PowerResult {
  double value;  // sign * T[v^d], maximized
  std::vector<double> vector;
};

// Shifted symmetric higher-order power iteration maximizing sign * T[v^d].
PowerResult shifted_power(const SymTensor& t, double sign, double shift, std::vector<double> v,
                          double tol, std::size_t max_iter) {
  double value = sign * t.form(v);
  PowerResult best{value, v};
  for (std::size_t it = 0; it < max_iter; ++it) {
    std::vector<double> g = t.partial_contraction(v);
    for (std::size_t i = 0; i < v.size(); ++i) g[i] = sign * g[i] + shift * v[i];
    const double norm = euclidean(g);
    if (norm == 0.0) break;
    for (double& x : g) x /= norm;
    const double next = sign * t.form(g);
    v = std::move(g);
    if (next > best.value) best = {next, v};
    const bool converged = std::fabs(next - value) <= tol * shift;
    value = next;
    if (converged) break;
  }
  return best;
}

double iterative_op_norm(const SymTensor& t, const OpNormOptions& opt) {
  const double shift = hs_norm(t);
  if (shift == 0.0) return 0.0;
  const std::size_t n = t.dim();
  const std::size_t runs = 2 * std::max<std::size_t>(opt.restarts, 1);
  std::vector<PowerResult> results(runs);

  parallel_for(runs, [&](std::size_t r) {
    const double sign = (r % 2 == 0) ? 1.0 : -1.0;
    Rng rng(opt.seed, r / 2);
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal();
    normalize(v);
    results[r] = shifted_power(t, sign, shift, std::move(v), opt.tolerance, opt.max_iterations);
  });

  std::size_t best = 0;
  for (std::size_t r = 1; r < runs; ++r)
    if (results[r].value > results[best].value) best = r;
  const double sign = (best % 2 == 0) ? 1.0 : -1.0;
  // polish the winner well past the restart tolerance
  const PowerResult polished =
      shifted_power(t, sign, shift, results[best].vector, 1e-16, opt.max_iterations);
  return std::max(results[best].value, polished.value);
}

// Deterministic near-uniform points on S^{n-1}, n in {2, 3, 4}.
std::vector<std::vector<double>> sphere_grid(std::size_t n) {
  std::vector<std::vector<double>> pts;
  if (n == 2) {
    constexpr std::size_t count = 4000;
    for (std::size_t k = 0; k < count; ++k) {
      const double a = 2.0 * std::numbers::pi * (static_cast<double>(k) + 0.5) / count;
      pts.push_back({std::cos(a), std::sin(a)});
    }
  } else if (n == 3) {
    constexpr std::size_t count = 100000;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t k = 0; k < count; ++k) {
      const double z = 1.0 - 2.0 * (static_cast<double>(k) + 0.5) / count;
      const double r = std::sqrt(1.0 - z * z);
      const double a = golden * static_cast<double>(k);
      pts.push_back({r * std::cos(a), r * std::sin(a), z});
    }
  } else {
    // Halton points pushed through the measure-preserving map of the unit
    // cube onto S^3.
    constexpr std::size_t count = 100000;
    auto halton = [](std::size_t i, std::size_t base) {
      double f = 1.0, r = 0.0;
      for (std::size_t k = i; k > 0; k /= base) {
        f /= static_cast<double>(base);
        r += f * static_cast<double>(k % base);
      }
      return r;
    };
    for (std::size_t k = 1; k <= count; ++k) {
      const double u1 = halton(k, 2), u2 = halton(k, 3), u3 = halton(k, 5);
      const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
      const double t2 = 2.0 * std::numbers::pi * u2, t3 = 2.0 * std::numbers::pi * u3;
      pts.push_back({a * std::sin(t2), a * std::cos(t2), b * std::sin(t3), b * std::cos(t3)});
    }
  }
  return pts;
}

// Projected gradient ascent of sign * T[v^d] on the sphere with adaptive step.
double refine_on_sphere(const SymTensor& t, double sign, std::vector<double> v) {
  const double d = static_cast<double>(t.order());
  double value = sign * t.form(v);
  double step = 0.1;
  for (int it = 0; it < 20000 && step > 1e-16; ++it) {
    std::vector<double> g = t.partial_contraction(v);
    double radial = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) radial += g[i] * v[i];
    std::vector<double> cand(v.size());
    double tangent = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double gi = sign * d * (g[i] - radial * v[i]);
      tangent += gi * gi;
      cand[i] = v[i] + step * gi;
    }
    if (std::sqrt(tangent) < 1e-15 * std::max(1.0, std::fabs(value))) break;
    normalize(cand);
    const double next = sign * t.form(cand);
    if (next > value) {
      v = std::move(cand);
      value = next;
      step *= 2.0;
    } else {
      step *= 0.5;
    }
  }
  return value;
}

double certified_op_norm(const SymTensor& t) {
  const std::size_t n = t.dim(), d = t.order();
  if (n > 4 || d > 4) {
    throw UnsupportedSize("op_norm(certified): supported for n <= 4 and d <= 4 only");
  }
  if (d == 1) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = t.canonical_value(i);
    return euclidean(v);
  }
  if (n == 1) return std::fabs(t.canonical_value(0));

  const auto grid = sphere_grid(n);
  std::vector<std::pair<double, std::size_t>> scored(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) scored[k] = {std::fabs(t.form(grid[k])), k};
  const std::size_t keep = std::min<std::size_t>(10, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + keep, scored.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first; });

  double best = scored.front().first;
  for (std::size_t j = 0; j < keep; ++j) {
    const auto& v = grid[scored[j].second];
    const double sign = t.form(v) >= 0.0 ? 1.0 : -1.0;
    best = std::max(best, refine_on_sphere(t, sign, v));
  }
  return best;
}

}  // namespace

double op_norm(const SymTensor& t, OpNormMode mode, const OpNormOptions& options) {
  if (mode == OpNormMode::certified) return certified_op_norm(t);
  if (t.order() == 1) {
    std::vector<double> v(t.dim());
    for (std::size_t i = 0; i < t.dim(); ++i) v[i] = t.canonical_value(i);
    return euclidean(v);
  }
  return iterative_op_norm(t, options);
}

double pointwise_op_norm(const SymTensor& t, const OpNormOptions& options) {
  if (t.order() == 1) return op_norm(t);
  if (t.order() == 2) {
    const std::size_t n = t.dim();
    if (n == 1) return std::fabs(t.canonical_value(0));
    if (n == 2) {
      const double a = t.at({0, 0}), b = t.at({0, 1}), c = t.at({1, 1});
      const double mid = 0.5 * (a + c);
      const double rad = std::hypot(0.5 * (a - c), b);
      return std::fabs(mid) + rad;
    }
    const auto eig = linalg::jacobi_eigenvalues(t.expanded(), n);
    return std::max(std::fabs(eig.front()), std::fabs(eig.back()));
  }
  return op_norm(t, OpNormMode::iterative, options);
}

void to_json(nlohmann::json& j, const SymTensor& t) {
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t k = 0; k < t.canonical_size(); ++k) {
    if (t.canonical_value(k) == 0.0) continue;
    entries.push_back({{"index", t.canonical_index(k)}, {"value", t.canonical_value(k)}});
  }
  j = {{"order", t.order()}, {"dim", t.dim()}, {"entries", entries}};
}

SymTensor tensor_from_json(const nlohmann::json& j) {
  const auto order = j.at("order").get<std::size_t>();
  const auto dim = j.at("dim").get<std::size_t>();
  SymTensor t(order, dim);
  for (const auto& e : j.at("entries")) {
    const auto index = e.at("index").get<SymTensor::Index>();
    if (!std::is_sorted(index.begin(), index.end())) {
      throw InvalidInput("tensor JSON: index tuples must be non-decreasing");
    }
    t.set(index, e.at("value").get<double>());
  }
  return t;
}

}  // namespace hoc
