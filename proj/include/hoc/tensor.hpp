#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <json.hpp>

namespace hoc {

namespace detail {
struct TensorLayout;
}

/// Dense symmetric d-linear form on R^n.
///
/// Only one value per multiset of indices is stored (the canonical,
/// non-decreasing index tuple) together with its multiplicity, i.e. the number
/// of distinct orderings of that tuple. Lookup through any permutation of a
/// tuple hits the same storage slot.
class SymTensor {
 public:
  using Index = std::vector<std::size_t>;

  SymTensor(std::size_t order, std::size_t dim);

  /// Order-1 tensor from a vector.
  static SymTensor from_vector(std::span<const double> v);
  /// Order-2 tensor from a row-major symmetric matrix; the upper triangle wins.
  static SymTensor from_matrix(std::span<const double> a, std::size_t n);
  /// v (x) v (x) ... (x) v, d times.
  static SymTensor rank_one(std::span<const double> v, std::size_t order);

  std::size_t order() const noexcept { return order_; }
  std::size_t dim() const noexcept { return dim_; }

  /// Number of canonical index tuples, C(n + d - 1, d).
  std::size_t canonical_size() const noexcept;
  const Index& canonical_index(std::size_t k) const;
  /// Number of orderings of canonical tuple k (multinomial coefficient).
  std::uint64_t multiplicity(std::size_t k) const;
  double canonical_value(std::size_t k) const { return values_[k]; }
  void set_canonical_value(std::size_t k, double v) { values_.at(k) = v; }

  /// Slot of an arbitrary (not necessarily sorted) index tuple.
  std::size_t slot(std::span<const std::size_t> index) const;
  double at(std::span<const std::size_t> index) const { return values_[slot(index)]; }
  void set(std::span<const std::size_t> index, double value) { values_[slot(index)] = value; }
  double at(std::initializer_list<std::size_t> index) const;
  void set(std::initializer_list<std::size_t> index, double value);

  /// The full n^d array in row-major order.
  std::vector<double> expanded() const;

  /// T[v, ..., v].
  double form(std::span<const double> v) const;
  /// T[v, ..., v, .] as a vector (d-1 copies of v).
  std::vector<double> partial_contraction(std::span<const double> v) const;

  SymTensor& operator*=(double c);
  SymTensor& operator+=(const SymTensor& other);
  friend SymTensor operator*(double c, SymTensor t) { return t *= c; }
  friend SymTensor operator+(SymTensor a, const SymTensor& b) { return a += b; }

 private:
  std::size_t order_;
  std::size_t dim_;
  std::shared_ptr<const detail::TensorLayout> layout_;
  std::vector<double> values_;
};

/// Multilinear form value T[v_1, ..., v_d]. Requires exactly d vectors of
/// length n.
double contract(const SymTensor& t, const std::vector<std::vector<double>>& vectors);

/// Euclidean norm of the expanded n^d array.
double hs_norm(const SymTensor& t);

/// Largest absolute entry.
double max_abs_entry(const SymTensor& t);

enum class OpNormMode { iterative, certified };

struct OpNormOptions {
  std::size_t restarts = 64;
  double tolerance = 1e-10;
  std::size_t max_iterations = 10000;
  std::uint64_t seed = 0x5eed;
};

/// sup over unit v of |T[v, ..., v]|, which for symmetric forms equals the
/// supremum over independent unit vectors v_1..v_d.
///
/// iterative: shifted symmetric higher-order power method (shift hs_norm(T))
/// with random restarts on +T and -T, best candidate polished to full
/// precision.
///
/// certified: deterministic sphere-grid search followed by projected-gradient
/// refinement of the ten best grid points. Only for n <= 4 and d <= 4; larger
/// sizes throw UnsupportedSize.
double op_norm(const SymTensor& t, OpNormMode mode = OpNormMode::iterative,
               const OpNormOptions& options = {});

/// Operator norm with the cheapest exact method for the order: Euclidean norm
/// for d = 1, symmetric eigensolver for d = 2, iterative otherwise.
double pointwise_op_norm(const SymTensor& t, const OpNormOptions& options = {});

void to_json(nlohmann::json& j, const SymTensor& t);
SymTensor tensor_from_json(const nlohmann::json& j);

}  // namespace hoc
