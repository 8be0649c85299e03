#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "hoc/bounds.hpp"
#include "hoc/error.hpp"
#include "hoc/measures.hpp"
#include "hoc/poly.hpp"
#include "hoc/verify.hpp"

namespace {

std::vector<double> x1x2_values(std::size_t m, std::uint64_t seed) {
  const auto s = hoc::sample(hoc::MeasureSpec::product(hoc::CoordSpec::gaussian(), 2), m, seed);
  std::vector<double> v(m);
  for (std::size_t i = 0; i < m; ++i) v[i] = s.data[2 * i] * s.data[2 * i + 1];
  return v;
}

std::vector<double> normals(std::size_t m, std::uint64_t seed) {
  return hoc::sample(hoc::MeasureSpec::product(hoc::CoordSpec::gaussian(), 1), m, seed).data;
}

}  // namespace

TEST_CASE("empirical Lp") {
  const std::vector<double> three(100, 3.0);
  const auto c = hoc::empirical_lp(three, 4.0);
  CHECK(c.value == doctest::Approx(3.0));
  CHECK(c.se == doctest::Approx(0.0));

  const auto z = normals(200000, 11);
  const auto l2 = hoc::empirical_lp(z, 2.0);
  CHECK(l2.value == doctest::Approx(1.0).epsilon(0.01));
  CHECK(l2.se > 0.0);
  CHECK(std::abs(l2.value - 1.0) < 5 * l2.se);
  // E|Z|^4 = 3
  CHECK(hoc::empirical_lp(z, 4.0).value == doctest::Approx(std::pow(3.0, 0.25)).epsilon(0.01));
  double prev = 0;
  for (double p = 1.0; p <= 8.0; p += 0.5) {
    const double v = hoc::empirical_lp(z, p).value;
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("Wilson interval") {
  const auto w = hoc::wilson_interval(0, 1000);
  CHECK(w.low == 0.0);
  CHECK(w.high == doctest::Approx(hoc::kZ95 * hoc::kZ95 / (1000 + hoc::kZ95 * hoc::kZ95)));
  const auto h = hoc::wilson_interval(500, 1000);
  CHECK((h.low + h.high) / 2 == doctest::Approx(0.5));
  CHECK(h.high - h.low == doctest::Approx(2 * hoc::kZ95 * std::sqrt(0.25 / 1000)).epsilon(0.01));
}

TEST_CASE("empirical tail") {
  const auto z = normals(100000, 12);
  const double mx = std::abs(*std::max_element(z.begin(), z.end(), [](double a, double b) {
    return std::abs(a) < std::abs(b);
  }));
  const std::vector<double> grid = {0.0, 0.5, 1.0, 1.96, 3.0, mx * 1.01};
  const auto tail = hoc::empirical_tail(z, grid);
  REQUIRE(tail.size() == grid.size());
  CHECK(tail[0].fraction == 1.0);
  CHECK(tail.back().hits == 0);
  CHECK(tail.back().ci.high == doctest::Approx(3.84 / 100000).epsilon(0.01));
  CHECK(tail[3].fraction == doctest::Approx(0.05).epsilon(0.05));
  for (std::size_t i = 1; i < tail.size(); ++i) CHECK(tail[i].fraction <= tail[i - 1].fraction);
  for (const auto& pt : tail) CHECK((pt.ci.low <= pt.fraction && pt.fraction <= pt.ci.high));
  CHECK_THROWS_AS(hoc::empirical_tail(std::vector<double>(999, 0.0), grid), hoc::InvalidInput);
}

TEST_CASE("empirical exponential moment") {
  const std::vector<double> ones(100000, 1.0);
  CHECK(hoc::empirical_exp_moment(ones, 0.0, 0.5).value == 1.0);
  CHECK(hoc::empirical_exp_moment(ones, std::numbers::ln2, 0.5).value == doctest::Approx(2.0));
  CHECK_THROWS_AS(hoc::empirical_exp_moment(std::vector<double>(1000, 1.0), 1.0, 1.0),
                  hoc::InvalidInput);
  CHECK_NOTHROW(hoc::empirical_exp_moment(std::vector<double>(1000, 1.0), 1.0, 1.0, true));

  // E exp(a |Z|^2) = (1 - 2a)^{-1/2}
  const auto z = normals(200000, 13);
  const auto e = hoc::empirical_exp_moment(z, 0.1, 2.0);
  CHECK(std::abs(e.value - 1.0 / std::sqrt(0.8)) < 5 * e.se);
  CHECK_FALSE(e.unstable);
}

TEST_CASE("exp-moment certificate for x1 x2 holds") {
  const hoc::PolyFunction f(2, {{{1, 1}, 1.0}});
  const auto measure = hoc::MeasureSpec::product(hoc::CoordSpec::gaussian(), 2);
  const auto cert = hoc::exp_moment_certificate(hoc::profile_from_function(f, measure, 2, 20000, 1));
  const auto values = x1x2_values(200000, 2);
  const auto report = hoc::exp_moment_report(values, cert);
  const auto ledger = hoc::check_certificate(cert, report, {hoc::Slack::Rule::se_multiple, 3.0});
  CHECK(ledger.pass);
  CHECK(report.estimate[0] < 2.0);
  CHECK(report.estimate[0] > 1.0);
}

TEST_CASE("check_certificate mechanics") {
  const auto values = x1x2_values(50000, 3);
  const std::vector<double> grid = {0.5, 1.0, 2.0, 4.0};
  const auto report = hoc::tail_report(values, grid);

  // a bound equal to the estimate passes with zero slack
  hoc::Certificate exact;
  exact.kind = hoc::CertificateKind::tail;
  exact.theorem = "test";
  exact.evaluator = [&](double t) {
    const auto it = std::find(grid.begin(), grid.end(), t);
    return report.estimate[it - grid.begin()];
  };
  CHECK(hoc::check_certificate(exact, report, {hoc::Slack::Rule::se_multiple, 0.0}).pass);

  // a bound at a tenth of the truth is caught
  hoc::Certificate low = exact;
  low.evaluator = [&](double t) { return exact.evaluate(t) / 10.0; };
  const auto caught = hoc::check_certificate(low, report, {hoc::Slack::Rule::wilson});
  CHECK_FALSE(caught.pass);

  hoc::Certificate wrong = exact;
  wrong.kind = hoc::CertificateKind::moment;
  CHECK_THROWS_AS(hoc::check_certificate(wrong, report), hoc::InvalidInput);
}

TEST_CASE("korr tail certificate against x1 x2") {
  const hoc::PolyFunction f(2, {{{1, 1}, 1.0}});
  const auto measure = hoc::MeasureSpec::product(hoc::CoordSpec::gaussian(), 2);
  const auto profile = hoc::profile_from_function(f, measure, 2, 20000, 4);
  const auto values = x1x2_values(100000, 5);
  std::vector<double> grid;
  for (int j = 0; j < 12; ++j) grid.push_back(std::pow(2.0, (j - 4) / 2.0));
  const auto report = hoc::tail_report(values, grid);
  const auto ledger =
      hoc::check_certificate(hoc::korr_tail_certificate(profile), report, {hoc::Slack::Rule::wilson});
  CHECK(ledger.pass);
  CHECK(ledger.points.size() == grid.size());

  // Shrinking sigma a hundredfold makes the bound fall below the data at
  // moderate t. A tenfold shrink is still dominated: the e^2 prefactor and the
  // 1/(d e) rate leave that much room.
  hoc::DerivativeProfile tiny = profile;
  tiny.sigma /= 100.0;
  CHECK_FALSE(hoc::check_certificate(hoc::korr_tail_certificate(tiny), report,
                                     {hoc::Slack::Rule::wilson}).pass);
  hoc::DerivativeProfile tenth = profile;
  tenth.sigma /= 10.0;
  CHECK(hoc::check_certificate(hoc::korr_tail_certificate(tenth), report,
                               {hoc::Slack::Rule::wilson}).pass);
}

TEST_CASE("intervals shrink like m^{-1/2}") {
  const std::vector<double> grid = {1.0};
  const auto small = hoc::tail_report(x1x2_values(40000, 6), grid);
  const auto large = hoc::tail_report(x1x2_values(160000, 6), grid);
  const double ws = small.ci_high[0] - small.ci_low[0];
  const double wl = large.ci_high[0] - large.ci_low[0];
  CHECK(ws / wl == doctest::Approx(2.0).epsilon(0.1));
  const auto ms = hoc::moment_report(x1x2_values(40000, 7), std::vector<double>{2.0});
  const auto ml = hoc::moment_report(x1x2_values(160000, 7), std::vector<double>{2.0});
  CHECK(ms.se[0] / ml.se[0] == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("reports are deterministic and serialize") {
  const std::vector<double> grid = {0.5, 1.0};
  const auto a = hoc::tail_report(x1x2_values(20000, 8), grid);
  const auto b = hoc::tail_report(x1x2_values(20000, 8), grid);
  CHECK(a.estimate == b.estimate);
  CHECK(a.ci_low == b.ci_low);
  const nlohmann::json j = a;
  CHECK(j.at("kind") == "tail");
  CHECK(j.at("samples") == 20000);
  const hoc::Slack s{hoc::Slack::Rule::se_multiple, 5.0};
  CHECK(s.describe().find('5') != std::string::npos);
}
