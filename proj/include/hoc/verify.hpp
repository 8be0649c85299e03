#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hoc/bounds.hpp"

namespace hoc {

/// z quantile of the two-sided 95% interval.
inline constexpr double kZ95 = 1.959963984540054;

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

/// (mean |v|^p)^{1/p} with a delta-method standard error. Needs m >= 2.
Estimate empirical_lp(std::span<const double> values, double p);

struct WilsonInterval {
  double low = 0.0;
  double high = 1.0;
};
WilsonInterval wilson_interval(std::size_t hits, std::size_t m, double z = kZ95);

struct TailPoint {
  double t = 0.0;
  std::size_t hits = 0;
  double fraction = 0.0;  // P(|f| >= t)
  WilsonInterval ci;
};

/// Empirical P(|v| >= t) per grid point with Wilson 95% intervals. Needs m >= 10^3.
std::vector<TailPoint> empirical_tail(std::span<const double> values,
                                      std::span<const double> t_grid);

struct ExpMomentEstimate {
  double value = 0.0;
  double se = 0.0;
  double first_half = 0.0;
  double second_half = 0.0;
  bool unstable = false;  // half-sample estimates differ by more than 10%
};

/// Sample mean of exp(a |v|^r). Needs m >= 10^5 unless allow_small is set.
ExpMomentEstimate empirical_exp_moment(std::span<const double> values, double a, double r,
                                       bool allow_small = false);

/// Empirical side of a domination check: one row per grid point x (t for
/// tails, p for moments, a single row for exponential moments).
struct EmpiricalReport {
  CertificateKind kind = CertificateKind::tail;
  std::size_t samples = 0;
  std::vector<double> x;
  std::vector<double> estimate;
  std::vector<double> se;
  std::vector<double> ci_low;   // tails only
  std::vector<double> ci_high;  // tails only
  bool unstable = false;
};

EmpiricalReport tail_report(std::span<const double> values, std::span<const double> t_grid);
EmpiricalReport moment_report(std::span<const double> values, std::span<const double> p_grid);
/// Exponential moment at the certificate's coefficient and power.
EmpiricalReport exp_moment_report(std::span<const double> values, const Certificate& cert,
                                  bool allow_small = false);

/// Allowed shortfall of a bound below the empirical value.
///   se_multiple: k * SE
///   wilson: estimate - ci_low for tails, kZ95 * SE otherwise
struct Slack {
  enum class Rule { se_multiple, wilson };
  Rule rule = Rule::se_multiple;
  double k = 5.0;
  /// Extra standard error added in quadrature (calibration error).
  double extra_se = 0.0;

  std::string describe() const;
};

struct CheckPoint {
  double x = 0.0;
  double bound = 0.0;
  double empirical = 0.0;
  double slack = 0.0;
  bool pass = true;
};

struct CheckLedger {
  std::string theorem;
  CertificateKind kind = CertificateKind::tail;
  std::string slack_rule;
  std::vector<CheckPoint> points;
  bool pass = true;
};

/// Passes at x when bound(x) >= empirical(x) - slack(x). Throws InvalidInput on
/// kind mismatch.
CheckLedger check_certificate(const Certificate& cert, const EmpiricalReport& report,
                              const Slack& slack = {});

void to_json(nlohmann::json& j, const CheckLedger& ledger);
void to_json(nlohmann::json& j, const EmpiricalReport& report);

}  // namespace hoc
