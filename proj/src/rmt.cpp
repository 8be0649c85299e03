#include "hoc/rmt.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "hoc/error.hpp"
#include "hoc/linalg.hpp"
#include "hoc/parallel.hpp"
#include "hoc/rng.hpp"
#include "hoc/stats.hpp"

namespace hoc {

std::vector<double> wigner_matrix(const WignerEnsemble& ens, std::uint64_t seed, std::size_t index) {
  const std::size_t n = ens.n;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Rng rng(seed, index);
  std::vector<double> a(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j; k < n; ++k) {
      const double v = draw(ens.entry, rng) * scale;
      a[j * n + k] = v;
      a[k * n + j] = v;
    }
  }
  return a;
}

EigenSample sample_ensemble(const WignerEnsemble& ens, std::size_t m, std::uint64_t seed) {
  if (ens.n < 2) throw InvalidInput("sample_ensemble: N must be at least 2");
  if (m < 1) throw InvalidInput("sample_ensemble: need at least one draw");
  const std::size_t n = ens.n;
  std::vector<double> values(m * n);
  std::vector<char> ok(m, 1);
  parallel_for(m, [&](std::size_t i) {
    const std::vector<double> a = wigner_matrix(ens, seed, i);
    try {
      const std::vector<double> ev = linalg::symmetric_eigenvalues(a, n);
      std::copy(ev.begin(), ev.end(), values.begin() + static_cast<std::ptrdiff_t>(i * n));
    } catch (const NonConvergence&) {
      ok[i] = 0;
    }
  });

  EigenSample es;
  es.n = n;
  es.sigma_n2 = ens.sigma_n2();
  for (std::size_t i = 0; i < m; ++i) {
    if (!ok[i]) {
      ++es.discarded;
      continue;
    }
    es.values.insert(es.values.end(), values.begin() + static_cast<std::ptrdiff_t>(i * n),
                     values.begin() + static_cast<std::ptrdiff_t>((i + 1) * n));
  }
  es.draws = m - es.discarded;
  if (es.discarded * 1000 >= m && es.discarded > 0) {
    throw NonConvergence("sample_ensemble: " + std::to_string(es.discarded) + " of " +
                         std::to_string(m) + " draws discarded");
  }
  return es;
}

double UnivariatePoly::operator()(double x) const {
  double v = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * x + *it;
  return v;
}

UnivariatePoly UnivariatePoly::derivative() const {
  UnivariatePoly d;
  for (std::size_t k = 1; k < coeffs.size(); ++k) d.coeffs.push_back(static_cast<double>(k) * coeffs[k]);
  return d;
}

double UnivariatePoly::second_derivative_sup() const {
  for (std::size_t k = 3; k < coeffs.size(); ++k) {
    if (coeffs[k] != 0.0) return std::numeric_limits<double>::infinity();
  }
  return coeffs.size() > 2 ? 2.0 * std::fabs(coeffs[2]) : 0.0;
}

Calibration calibrate(const WignerEnsemble& ens, const UnivariatePoly& f, std::size_t m_cal,
                      std::uint64_t seed) {
  if (m_cal < 500) throw InvalidInput("calibrate: need at least 500 calibration draws");
  const EigenSample es = sample_ensemble(ens, m_cal, seed);
  const std::size_t n = es.n;
  const std::size_t m = es.draws;
  const UnivariatePoly fp = f.derivative();

  Calibration cal;
  cal.n = n;
  cal.draws = m;
  cal.f = f;
  std::vector<double> column(m);
  auto per_index = [&](auto&& transform, std::vector<double>& mean, std::vector<double>& se) {
    mean.resize(n);
    se.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < m; ++i) column[i] = transform(es.draw(i)[j]);
      const Summary s = summarize(column);
      mean[j] = s.mean;
      se[j] = s.standard_error;
    }
  };
  per_index([](double x) { return x; }, cal.mean_lambda, cal.se_lambda);
  per_index([&](double x) { return f(x); }, cal.mean_f, cal.se_f);
  per_index([&](double x) { return fp(x); }, cal.mean_fprime, cal.se_fprime);

  // S~_N = h(lambda) - K with h = sum f(l_j) - sum l_j E f'(l_j); the error in
  // K is the standard error of the mean of h over the calibration draws.
  std::vector<double> h(m), grad(m);
  for (std::size_t i = 0; i < m; ++i) {
    CompensatedSum hs, gs;
    for (std::size_t j = 0; j < n; ++j) {
      const double x = es.draw(i)[j];
      hs.add(f(x) - x * cal.mean_fprime[j]);
      const double g = fp(x);
      gs.add(g * g);
    }
    h[i] = hs.value();
    grad[i] = gs.value();
  }
  cal.offset_se = summarize(h).standard_error;
  cal.gradient_sq = summarize(grad).mean;
  return cal;
}

namespace {

void check_calibration(const EigenSample& es, const UnivariatePoly& f, const Calibration& cal) {
  if (cal.draws == 0) throw InvalidInput("linear statistic: calibration missing");
  if (cal.n != es.n) throw InvalidInput("linear statistic: calibration is for a different N");
  if (!(cal.f == f)) throw InvalidInput("linear statistic: calibration is for a different f");
}

}  // namespace

std::vector<double> linear_stat(const EigenSample& es, const UnivariatePoly& f,
                                const Calibration& cal) {
  check_calibration(es, f, cal);
  std::vector<double> out(es.draws);
  for (std::size_t i = 0; i < es.draws; ++i) {
    CompensatedSum s;
    const auto row = es.draw(i);
    for (std::size_t j = 0; j < es.n; ++j) s.add(f(row[j]) - cal.mean_f[j]);
    out[i] = s.value();
  }
  return out;
}

std::vector<double> recentered_stat(const EigenSample& es, const UnivariatePoly& f,
                                    const Calibration& cal) {
  std::vector<double> out = linear_stat(es, f, cal);
  for (std::size_t i = 0; i < es.draws; ++i) {
    CompensatedSum s;
    s.add(out[i]);
    const auto row = es.draw(i);
    for (std::size_t j = 0; j < es.n; ++j) s.add(-(row[j] - cal.mean_lambda[j]) * cal.mean_fprime[j]);
    out[i] = s.value();
  }
  return out;
}

RmtCertificates rmt_certificates(const WignerEnsemble& ens, double second_derivative_bound,
                                 double gradient_sq) {
  const double l = second_derivative_bound;
  if (!(l > 0.0) || std::isinf(l)) throw InvalidInput("rmt_certificates: ||f''||_inf must be finite and positive");
  if (!(gradient_sq >= 0.0)) throw InvalidInput("rmt_certificates: gradient integral must be nonnegative");
  const double n = static_cast<double>(ens.n);
  const double sigma = std::sqrt(ens.sigma2());
  const double n4 = std::pow(n, 0.25);
  constexpr double e = std::numbers::e;

  RmtCertificates out;
  Certificate& em = out.exp_moment;
  em.kind = CertificateKind::exp_moment;
  em.theorem = "3.2";
  em.constants = {{"c", kUniversalC},
                  {"sigma", sigma},
                  {"sigma_n2", ens.sigma_n2()},
                  {"N", n},
                  {"L", l},
                  {"d", 2.0},
                  {"power", 0.5},
                  {"level", 2.0},
                  {"coefficient", kUniversalC * n4 / (std::numbers::sqrt2 * sigma * std::sqrt(l))}};
  em.evaluator = [](double) { return 2.0; };

  Certificate& tail = out.tail;
  tail.kind = CertificateKind::tail;
  tail.theorem = "3.2";
  tail.constants = {{"sigma", sigma}, {"N", n}, {"L", l}, {"d", 2.0}, {"gradient_sq", gradient_sq},
                    {"prefactor", e * e}};
  const double g = std::sqrt(gradient_sq);
  tail.evaluator = [=](double t) {
    if (t <= 0.0) return 1.0;
    double eta = std::sqrt(t) * n4 / std::sqrt(l);
    if (g > 0.0) eta = std::min(eta, t * std::sqrt(n) / g);
    return std::min(1.0, e * e * std::exp(-eta / (sigma * 2.0 * e)));
  };
  return out;
}

}  // namespace hoc
