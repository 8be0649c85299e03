#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "hoc/error.hpp"
#include "hoc/linalg.hpp"
#include "hoc/rng.hpp"
#include "hoc/tensor.hpp"

using hoc::SymTensor;

namespace {

SymTensor random_tensor(std::size_t d, std::size_t n, std::uint64_t seed) {
  SymTensor t(d, n);
  hoc::Rng rng(seed, 0);
  for (std::size_t k = 0; k < t.canonical_size(); ++k) t.set_canonical_value(k, rng.normal());
  return t;
}

SymTensor identity(std::size_t n) {
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) a[i * n + i] = 1.0;
  return SymTensor::from_matrix(a, n);
}

// Independent oracle: brute-force sum over the full n^d grid.
double brute_contract(const SymTensor& t, const std::vector<std::vector<double>>& v) {
  const std::size_t d = t.order(), n = t.dim();
  std::vector<std::size_t> idx(d, 0);
  double sum = 0;
  while (true) {
    double term = t.at(idx);
    for (std::size_t k = 0; k < d; ++k) term *= v[k][idx[k]];
    sum += term;
    std::size_t pos = 0;
    while (pos < d && ++idx[pos] == n) idx[pos++] = 0;
    if (pos == d) break;
  }
  return sum;
}

}  // namespace

TEST_CASE("layout invariants") {
  for (std::size_t d : {1u, 2u, 3u, 4u}) {
    for (std::size_t n : {1u, 2u, 3u, 5u}) {
      const SymTensor t(d, n);
      std::uint64_t total = 0;
      for (std::size_t k = 0; k < t.canonical_size(); ++k) {
        total += t.multiplicity(k);
        const auto& idx = t.canonical_index(k);
        CHECK(std::is_sorted(idx.begin(), idx.end()));
        CHECK(t.slot(idx) == k);
      }
      CHECK(total == static_cast<std::uint64_t>(std::pow(n, d)));
      CHECK(t.expanded().size() == static_cast<std::size_t>(std::pow(n, d)));
    }
  }
}

TEST_CASE("lookup is permutation invariant") {
  SymTensor t(3, 4);
  t.set({2, 0, 3}, 1.5);
  std::vector<std::size_t> idx = {0, 2, 3};
  do {
    CHECK(t.at(idx) == 1.5);
  } while (std::next_permutation(idx.begin(), idx.end()));
}

TEST_CASE("contract examples") {
  const SymTensor id = identity(2);
  CHECK(hoc::contract(id, {{1, 0}, {0, 1}}) == 0.0);
  CHECK(hoc::contract(id, {{1, 0}, {1, 0}}) == 1.0);
  const SymTensor t = random_tensor(3, 3, 1);
  const std::vector<double> a = {0.3, -1, 2}, b = {1, 1, -0.5}, c = {0.2, 0.1, 0.7};
  CHECK(hoc::contract(t, {a, b, c}) == doctest::Approx(hoc::contract(t, {b, a, c})));
  CHECK(hoc::contract(t, {a, b, c}) == doctest::Approx(brute_contract(t, {a, b, c})));
  CHECK(t.form(a) == doctest::Approx(hoc::contract(t, {a, a, a})));
  CHECK_THROWS_AS(hoc::contract(t, {a, b}), hoc::InvalidInput);
  CHECK_THROWS_AS(hoc::contract(t, {a, b, {1.0}}), hoc::InvalidInput);
}

TEST_CASE("partial contraction is the gradient of the form over d") {
  const SymTensor t = random_tensor(4, 3, 2);
  const std::vector<double> v = {0.4, -0.2, 0.9};
  const auto g = t.partial_contraction(v);
  for (std::size_t i = 0; i < 3; ++i) {
    std::vector<double> e(3, 0.0);
    e[i] = 1.0;
    CHECK(g[i] == doctest::Approx(hoc::contract(t, {v, v, v, e})));
  }
}

TEST_CASE("hs_norm examples") {
  CHECK(hoc::hs_norm(identity(3)) == doctest::Approx(std::sqrt(3.0)));
  CHECK(hoc::hs_norm(SymTensor(3, 4)) == 0.0);
  const std::vector<double> ones = {1.0, 1.0};
  CHECK(hoc::hs_norm(SymTensor::rank_one(ones, 3)) == doctest::Approx(std::sqrt(8.0)));
  const SymTensor t = random_tensor(3, 4, 3);
  const auto full = t.expanded();
  CHECK(hoc::hs_norm(t) == doctest::Approx(std::sqrt(std::inner_product(full.begin(), full.end(), full.begin(), 0.0))));
}

TEST_CASE("op_norm examples") {
  const SymTensor swap = SymTensor::from_matrix(std::vector<double>{0, 1, 1, 0}, 2);
  CHECK(hoc::op_norm(swap) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(hoc::op_norm(swap, hoc::OpNormMode::certified) == doctest::Approx(1.0).epsilon(1e-10));
  const SymTensor r1 = SymTensor::rank_one(std::vector<double>{0.6, 0.8}, 3);
  CHECK(hoc::op_norm(r1) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(hoc::max_abs_entry(swap) == 1.0);
  CHECK(hoc::max_abs_entry(SymTensor(2, 3)) == 0.0);
  CHECK(hoc::op_norm(SymTensor(3, 3)) == 0.0);
}

TEST_CASE("iterative matches certified on n = 3, d = 3") {
  const SymTensor t = random_tensor(3, 3, 42);
  const double it = hoc::op_norm(t);
  const double ce = hoc::op_norm(t, hoc::OpNormMode::certified);
  CHECK(std::fabs(it - ce) <= 1e-4 * ce);
}

TEST_CASE("d = 2 op norm is the largest absolute eigenvalue") {
  for (std::size_t n : {2u, 4u, 7u}) {
    const SymTensor t = random_tensor(2, n, 50 + n);
    const auto ev = hoc::linalg::jacobi_eigenvalues(t.expanded(), n);
    const double expect = std::max(std::fabs(ev.front()), std::fabs(ev.back()));
    CHECK(hoc::op_norm(t) == doctest::Approx(expect).epsilon(1e-8));
    CHECK(hoc::pointwise_op_norm(t) == doctest::Approx(expect).epsilon(1e-8));
  }
}

TEST_CASE("norm properties") {
  for (std::uint64_t s = 0; s < 8; ++s) {
    const SymTensor t = random_tensor(2 + s % 3, 2 + s % 3, 500 + s);
    const double op = hoc::op_norm(t);
    CHECK(op <= hoc::hs_norm(t) * (1 + 1e-12));
    CHECK(hoc::max_abs_entry(t) <= hoc::hs_norm(t));
    CHECK(hoc::op_norm(-2.5 * t) == doctest::Approx(2.5 * op).epsilon(1e-8));
  }
}

TEST_CASE("certified mode refuses large sizes") {
  CHECK_THROWS_AS(hoc::op_norm(SymTensor(3, 5), hoc::OpNormMode::certified), hoc::UnsupportedSize);
  CHECK_THROWS_AS(hoc::op_norm(SymTensor(5, 2), hoc::OpNormMode::certified), hoc::UnsupportedSize);
}

TEST_CASE("tensor JSON round trip") {
  const SymTensor t = random_tensor(3, 2, 9);
  nlohmann::json j = t;
  const SymTensor back = hoc::tensor_from_json(j);
  for (std::size_t k = 0; k < t.canonical_size(); ++k) CHECK(back.canonical_value(k) == t.canonical_value(k));
  nlohmann::json bad = {{"order", 2}, {"dim", 2}, {"entries", {{{"index", {1, 0}}, {"value", 1.0}}}}};
  CHECK_THROWS_AS(hoc::tensor_from_json(bad), hoc::InvalidInput);
}
