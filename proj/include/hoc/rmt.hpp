#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hoc/bounds.hpp"
#include "hoc/measures.hpp"

namespace hoc {

/// Symmetric N x N matrix (xi_jk / sqrt N) with independent entries xi_jk,
/// j <= k, drawn from one catalog law; xi_kj = xi_jk.
struct WignerEnsemble {
  std::size_t n = 0;
  CoordSpec entry = CoordSpec::gaussian();

  double sigma2() const { return poincare_constant(entry); }
  /// Poincare constant of the eigenvalue law, 2 sigma^2 / N.
  double sigma_n2() const { return 2.0 * sigma2() / static_cast<double>(n); }
};

/// Row-major draw x N matrix of ascending eigenvalues.
struct EigenSample {
  std::size_t n = 0;
  std::size_t draws = 0;
  std::size_t discarded = 0;  // eigensolver failures, dropped
  double sigma_n2 = 0.0;
  std::vector<double> values;

  std::span<const double> draw(std::size_t i) const { return {values.data() + i * n, n}; }
};

/// Fills a row-major symmetric matrix for draw `index` of the ensemble.
std::vector<double> wigner_matrix(const WignerEnsemble& ens, std::uint64_t seed, std::size_t index);

/// m independent draws; draw i uses substream i of the seed. Throws
/// NonConvergence when 0.1% of the draws or more had to be discarded.
EigenSample sample_ensemble(const WignerEnsemble& ens, std::size_t m, std::uint64_t seed);

/// Polynomial of one variable, coeffs[k] multiplies x^k.
struct UnivariatePoly {
  std::vector<double> coeffs;

  double operator()(double x) const;
  UnivariatePoly derivative() const;
  /// sup |f''| over R; infinite above degree 2.
  double second_derivative_sup() const;
  bool operator==(const UnivariatePoly&) const = default;
};

/// Per-index expectations of the eigenvalue law estimated on an independent run.
struct Calibration {
  std::size_t n = 0;
  std::size_t draws = 0;
  UnivariatePoly f;
  std::vector<double> mean_lambda, se_lambda;
  std::vector<double> mean_f, se_f;
  std::vector<double> mean_fprime, se_fprime;
  double gradient_sq = 0.0;  // E sum_i f'(lambda_i)^2
  /// Standard error of the constant that recentres S~_N.
  double offset_se = 0.0;
};

Calibration calibrate(const WignerEnsemble& ens, const UnivariatePoly& f, std::size_t m_cal,
                      std::uint64_t seed);

/// S_N = sum_j (f(lambda_j) - E f(lambda_j)) per draw.
std::vector<double> linear_stat(const EigenSample& es, const UnivariatePoly& f,
                                const Calibration& cal);
/// S~_N = S_N - sum_j (lambda_j - E lambda_j) E f'(lambda_j) per draw.
std::vector<double> recentered_stat(const EigenSample& es, const UnivariatePoly& f,
                                    const Calibration& cal);

struct RmtCertificates {
  Certificate exp_moment;  // for S~_N
  Certificate tail;        // for S_N
};

/// Exponential moment with coefficient c N^{1/4} / (sqrt 2 sigma L^{1/2}) and
/// power 1/2; tail e^2 exp(-(1/(2 sigma e)) min(t N^{1/2} / G^{1/2},
/// t^{1/2} N^{1/4} / L^{1/2})) with G = E sum_i f'(lambda_i)^2 from calibration.
RmtCertificates rmt_certificates(const WignerEnsemble& ens, double second_derivative_bound,
                                 double gradient_sq);

}  // namespace hoc
