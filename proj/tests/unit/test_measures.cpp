#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "hoc/error.hpp"
#include "hoc/measures.hpp"
#include "hoc/poly.hpp"
#include "hoc/rng.hpp"
#include "hoc/stats.hpp"

using hoc::CoordSpec;
using hoc::MeasureSpec;
constexpr double kPi = std::numbers::pi;

TEST_CASE("sampling sanity") {
  const std::size_t m = 1000000;
  const auto g = hoc::sample(MeasureSpec::product(CoordSpec::gaussian(), 2), m, 1);
  for (std::size_t j = 0; j < 2; ++j) {
    double s = 0;
    for (std::size_t i = 0; i < m; ++i) s += g.row(i)[j];
    CHECK(std::fabs(s / m) < 4.0 / std::sqrt(double(m)));
  }
  const auto u = hoc::sample(MeasureSpec::product(CoordSpec::uniform01(), 3), 100000, 2);
  CHECK(*std::min_element(u.data.begin(), u.data.end()) >= 0.0);
  CHECK(*std::max_element(u.data.begin(), u.data.end()) <= 1.0);
  const auto l = hoc::sample(MeasureSpec::product(CoordSpec::laplace(), 1), m, 3);
  CHECK(hoc::summarize(l.data).variance == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("sampling is deterministic in the seed") {
  const auto spec = MeasureSpec::product(CoordSpec::exponential(2.0), 2);
  CHECK(hoc::sample(spec, 20000, 5).data == hoc::sample(spec, 20000, 5).data);
  CHECK(hoc::sample(spec, 20000, 5).data != hoc::sample(spec, 20000, 6).data);
}

TEST_CASE("closed-form moments") {
  CHECK(hoc::variance(CoordSpec::gaussian(1.0, 2.0)) == doctest::Approx(4.0));
  CHECK(hoc::variance(CoordSpec::laplace(0.0, 1.0)) == doctest::Approx(2.0));
  CHECK(hoc::variance(CoordSpec::exponential(2.0)) == doctest::Approx(0.25));
  CHECK(hoc::variance(CoordSpec::uniform01()) == doctest::Approx(1.0 / 12.0));
  CHECK(hoc::variance(CoordSpec::student(20.0)) == doctest::Approx(1.0 / 37.0));
  CHECK(hoc::raw_moment(CoordSpec::gaussian(), 4) == doctest::Approx(3.0));
  CHECK(std::isinf(hoc::raw_moment(CoordSpec::student(2.0), 4)));
}

TEST_CASE("catalog Poincare constants") {
  CHECK(hoc::poincare_constant(CoordSpec::gaussian()) == 1.0);
  CHECK(hoc::poincare_constant(CoordSpec::uniform01()) == doctest::Approx(1.0 / (kPi * kPi)));
  CHECK(hoc::poincare_constant(CoordSpec::laplace(0.0, 1.0)) == 4.0);
  CHECK(hoc::poincare_constant(CoordSpec::exponential(1.0)) == 4.0);
  MeasureSpec mixed;
  mixed.coords = {CoordSpec::gaussian(), CoordSpec::laplace(0.0, 1.0), CoordSpec::uniform01()};
  CHECK(hoc::poincare_constant(mixed) == 4.0);
  CHECK_THROWS_AS(hoc::poincare_constant(CoordSpec::student(20.0)), hoc::Uncertified);
}

TEST_CASE("spectral-gap oracle against classical spectra") {
  const auto u = hoc::spectral_gap_oracle([](double) { return 0.0; }, 0.0, 1.0, 400);
  CHECK(std::fabs(u.lambda1 - kPi * kPi) <= 1e-3 * kPi * kPi);
  CHECK(u.reliable);
  const auto g = hoc::spectral_gap_oracle([](double x) { return -0.5 * x * x; }, -8.0, 8.0, 2000);
  CHECK(std::fabs(g.lambda1 - 1.0) <= 1e-3);
  CHECK(g.reliable);
  CHECK(std::fabs(g.steps[1].lambda1 - g.steps[0].lambda1) < 1e-3 * g.lambda1);
}

TEST_CASE("exponential oracle and truncation") {
  // Neumann problem on [0, L] for Exp(1): lambda_1 = 1/4 + (pi/L)^2
  const double l = 40.0;
  const auto r = hoc::spectral_gap_oracle([](double x) { return -x; }, 0.0, l, 8000);
  const double exact = 0.25 + (kPi / l) * (kPi / l);
  CHECK(r.lambda1 == doctest::Approx(exact).epsilon(1e-3));
  // the catalog truncation is wide enough to recover sigma^2 = 4
  const auto wide = hoc::catalog_oracle(CoordSpec::exponential(1.0));
  CHECK(std::fabs(wide.sigma2 - 4.0) <= 2e-2 * 4.0);
  const auto lap = hoc::catalog_oracle(CoordSpec::laplace(0.0, 1.0));
  CHECK(std::fabs(lap.sigma2 - 4.0) <= 2e-2 * 4.0);
}

TEST_CASE("catalog oracle confirms the closed forms") {
  CHECK(hoc::catalog_oracle(CoordSpec::gaussian()).sigma2 == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(hoc::catalog_oracle(CoordSpec::gaussian(0.0, 2.0)).sigma2 == doctest::Approx(4.0).epsilon(1e-3));
  CHECK(hoc::catalog_oracle(CoordSpec::uniform01()).sigma2 == doctest::Approx(1.0 / (kPi * kPi)).epsilon(1e-3));
  CHECK(hoc::catalog_oracle(CoordSpec::uniform01()).csv().rfind("grid,lambda1,sigma2\n", 0) == 0);
}

TEST_CASE("custom densities need certification") {
  auto c = CoordSpec::custom_density({[](double x) { return -0.5 * x * x; }, -8.0, 8.0});
  CHECK_THROWS_AS(hoc::poincare_constant(c), hoc::Uncertified);
  c = hoc::certify_custom(c);
  CHECK(hoc::poincare_constant(c) == doctest::Approx(1.0).epsilon(1e-3));
  hoc::Rng rng(1, 0);
  double s2 = 0;
  for (int i = 0; i < 100000; ++i) {
    const double x = hoc::draw(c, rng);
    s2 += x * x;
  }
  CHECK(s2 / 100000 == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("student weight constant") {
  // u = x is an eigenfunction of -(p (1+x^2) u')' / p with eigenvalue 2(alpha - 1)
  const auto r = hoc::student_weight_oracle(CoordSpec::student(20.0));
  CHECK(r.sigma2 == doctest::Approx(1.0 / 38.0).epsilon(1e-3));
  CHECK(r.reliable);
}

TEST_CASE("weighted norms") {
  MeasureSpec constant = MeasureSpec::product(CoordSpec::gaussian(), 2);
  constant.weight = hoc::WeightSpec{hoc::WeightSpec::Kind::constant, 0.7};
  const auto c = hoc::weighted_norm(constant, 4.0, 1000, 1);
  CHECK(c.estimate == 0.7);
  CHECK(c.se == 0.0);

  MeasureSpec g = MeasureSpec::product(CoordSpec::gaussian(), 1);
  g.weight = hoc::WeightSpec{hoc::WeightSpec::Kind::sqrt_one_plus_square, 1.0};
  const auto w2 = hoc::weighted_norm(g, 2.0, 1000000, 2);
  CHECK(std::fabs(w2.estimate - std::sqrt(2.0)) < 5 * w2.se + 1e-3);
  CHECK_FALSE(w2.divergent);
  const auto w4 = hoc::weighted_norm(g, 4.0, 1000000, 2);
  CHECK(w2.estimate <= w4.estimate);

  MeasureSpec heavy = MeasureSpec::product(CoordSpec::student(2.0), 1);
  heavy.weight = hoc::WeightSpec{hoc::WeightSpec::Kind::sqrt_one_plus_square, 1.0};
  CHECK(hoc::weighted_norm(heavy, 8.0, 1000000, 3).divergent);
}

TEST_CASE("empirical Poincare inequality for random quadratics") {
  const std::vector<CoordSpec> laws = {CoordSpec::gaussian(), CoordSpec::laplace(0.0, 1.0),
                                       CoordSpec::exponential(1.0), CoordSpec::uniform01()};
  hoc::Rng rng(900, 0);
  const std::size_t m = 50000;
  for (std::size_t li = 0; li <= laws.size(); ++li) {
    MeasureSpec spec;
    if (li < laws.size()) {
      spec = MeasureSpec::product(laws[li], 3);
    } else {
      spec.coords = laws;  // tensorization: mixed product
      spec.coords.pop_back();
    }
    const std::size_t n = spec.dim();
    const double sigma2 = hoc::poincare_constant(spec);
    const auto xs = hoc::sample(spec, m, 10 + li);
    for (int q = 0; q < 20; ++q) {
      hoc::PolyFunction f(n);
      for (std::size_t i = 0; i < n; ++i) {
        hoc::Exponents e(n, 0);
        e[i] = 1;
        f.add_term(e, rng.normal());
        for (std::size_t j = i; j < n; ++j) {
          hoc::Exponents e2(n, 0);
          e2[i] += 1;
          e2[j] += 1;
          f.add_term(e2, rng.normal());
        }
      }
      std::vector<double> v(m), g2(m);
      std::vector<hoc::PolyFunction> grad;
      for (std::size_t i = 0; i < n; ++i) grad.push_back(f.partial(i));
      for (std::size_t r = 0; r < m; ++r) {
        v[r] = f(xs.row(r));
        double s = 0;
        for (const auto& gi : grad) s += gi(xs.row(r)) * gi(xs.row(r));
        g2[r] = s;
      }
      const auto vs = hoc::summarize(v);
      std::vector<double> centred(m);
      for (std::size_t r = 0; r < m; ++r) centred[r] = (v[r] - vs.mean) * (v[r] - vs.mean);
      const auto var = hoc::summarize(centred);
      const auto grad_mean = hoc::summarize(g2);
      const double rel = std::hypot(var.standard_error / var.mean, grad_mean.standard_error / grad_mean.mean);
      CHECK(var.mean <= sigma2 * grad_mean.mean * (1 + 5 * rel));
    }
  }
}

TEST_CASE("measure JSON") {
  const nlohmann::json j = {{"dim", 3}, {"coords", {{{"dist", "laplace"}, {"params", {{"loc", 0.0}, {"scale", 2.0}}}}}}};
  const MeasureSpec m = hoc::measure_from_json(j);
  CHECK(m.dim() == 3);
  CHECK(m.coords[2].scale == 2.0);
  nlohmann::json back = m;
  CHECK(hoc::measure_from_json(back).coords[1].dist == hoc::Dist::laplace);
  CHECK_THROWS(hoc::measure_from_json({{"dim", 2}, {"coords", {{{"dist", "cauchy"}}}}}));
  CHECK_THROWS(hoc::measure_from_json({{"dim", 3}, {"coords", {{{"dist", "gaussian"}}, {{"dist", "gaussian"}}}}}));
}
