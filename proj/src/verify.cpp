#include "hoc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "hoc/error.hpp"
#include "hoc/stats.hpp"

namespace hoc {

Estimate empirical_lp(std::span<const double> values, double p) {
  if (values.size() < 2) throw InvalidInput("empirical_lp: need at least 2 values");
  if (!(p > 0.0)) throw InvalidInput("empirical_lp: p must be positive");
  std::vector<double> powered(values.size());
  std::transform(values.begin(), values.end(), powered.begin(),
                 [p](double v) { return std::pow(std::fabs(v), p); });
  const Summary s = summarize(powered);
  Estimate e;
  e.value = std::pow(s.mean, 1.0 / p);
  // d/dM M^{1/p} = M^{1/p - 1} / p
  e.se = s.mean > 0.0 ? e.value / (p * s.mean) * s.standard_error : 0.0;
  return e;
}

WilsonInterval wilson_interval(std::size_t hits, std::size_t m, double z) {
  if (m == 0) return {};
  const double n = static_cast<double>(m);
  const double k = static_cast<double>(hits);
  const double z2 = z * z;
  const double centre = (k + z2 / 2.0) / (n + z2);
  const double half = z / (n + z2) * std::sqrt(k * (n - k) / n + z2 / 4.0);
  const double low = hits == 0 ? 0.0 : std::max(0.0, centre - half);
  const double high = hits == m ? 1.0 : std::min(1.0, centre + half);
  return {low, high};
}

std::vector<TailPoint> empirical_tail(std::span<const double> values,
                                      std::span<const double> t_grid) {
  if (values.size() < 1000) throw InvalidInput("empirical_tail: need at least 10^3 values");
  std::vector<double> sorted(values.size());
  std::transform(values.begin(), values.end(), sorted.begin(),
                 [](double v) { return std::fabs(v); });
  std::sort(sorted.begin(), sorted.end());
  std::vector<TailPoint> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    TailPoint point;
    point.t = t;
    point.hits = static_cast<std::size_t>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), t));
    point.fraction = static_cast<double>(point.hits) / static_cast<double>(sorted.size());
    point.ci = wilson_interval(point.hits, sorted.size());
    out.push_back(point);
  }
  return out;
}

ExpMomentEstimate empirical_exp_moment(std::span<const double> values, double a, double r,
                                       bool allow_small) {
  if (values.size() < (allow_small ? 2u : 100000u)) {
    throw InvalidInput("empirical_exp_moment: need at least 10^5 values");
  }
  std::vector<double> terms(values.size());
  std::transform(values.begin(), values.end(), terms.begin(),
                 [a, r](double v) { return a == 0.0 ? 1.0 : std::exp(a * std::pow(std::fabs(v), r)); });
  const Summary all = summarize(terms);
  const std::size_t half = terms.size() / 2;
  const std::span<const double> view(terms);
  ExpMomentEstimate e;
  e.value = all.mean;
  e.se = all.standard_error;
  e.first_half = summarize(view.first(half)).mean;
  e.second_half = summarize(view.subspan(half)).mean;
  const double scale = std::max(e.first_half, e.second_half);
  e.unstable = scale > 0.0 && std::fabs(e.first_half - e.second_half) > 0.1 * scale;
  return e;
}

EmpiricalReport tail_report(std::span<const double> values, std::span<const double> t_grid) {
  EmpiricalReport report;
  report.kind = CertificateKind::tail;
  report.samples = values.size();
  const double m = static_cast<double>(values.size());
  for (const TailPoint& p : empirical_tail(values, t_grid)) {
    report.x.push_back(p.t);
    report.estimate.push_back(p.fraction);
    report.se.push_back(std::sqrt(p.fraction * (1.0 - p.fraction) / m));
    report.ci_low.push_back(p.ci.low);
    report.ci_high.push_back(p.ci.high);
  }
  return report;
}

EmpiricalReport moment_report(std::span<const double> values, std::span<const double> p_grid) {
  EmpiricalReport report;
  report.kind = CertificateKind::moment;
  report.samples = values.size();
  for (double p : p_grid) {
    const Estimate e = empirical_lp(values, p);
    report.x.push_back(p);
    report.estimate.push_back(e.value);
    report.se.push_back(e.se);
  }
  return report;
}

EmpiricalReport exp_moment_report(std::span<const double> values, const Certificate& cert,
                                  bool allow_small) {
  if (cert.kind != CertificateKind::exp_moment) {
    throw InvalidInput("exp_moment_report: certificate is not an exponential-moment claim");
  }
  const ExpMomentEstimate e = empirical_exp_moment(values, cert.coefficient(), cert.power(), allow_small);
  EmpiricalReport report;
  report.kind = CertificateKind::exp_moment;
  report.samples = values.size();
  report.x = {cert.coefficient()};
  report.estimate = {e.value};
  report.se = {e.se};
  report.unstable = e.unstable;
  return report;
}

std::string Slack::describe() const {
  char buf[160];
  if (rule == Rule::wilson) {
    std::snprintf(buf, sizeof buf, "bound >= empirical - (empirical - wilson95_low); non-tail rows use %.17g*SE",
                  kZ95);
  } else {
    std::snprintf(buf, sizeof buf, "bound >= empirical - %.17g*SE", k);
  }
  std::string out = buf;
  if (extra_se > 0.0) {
    std::snprintf(buf, sizeof buf, "; SE includes calibration error %.17g in quadrature", extra_se);
    out += buf;
  }
  return out;
}

CheckLedger check_certificate(const Certificate& cert, const EmpiricalReport& report,
                              const Slack& slack) {
  if (cert.kind != report.kind) {
    throw InvalidInput("check_certificate: certificate kind " + to_string(cert.kind) +
                       " does not match report kind " + to_string(report.kind));
  }
  CheckLedger ledger;
  ledger.theorem = cert.theorem;
  ledger.kind = cert.kind;
  ledger.slack_rule = slack.describe();
  for (std::size_t i = 0; i < report.x.size(); ++i) {
    CheckPoint point;
    point.x = report.x[i];
    point.bound = cert.evaluate(point.x);
    point.empirical = report.estimate[i];
    const double se = std::hypot(i < report.se.size() ? report.se[i] : 0.0, slack.extra_se);
    if (slack.rule == Slack::Rule::wilson && cert.kind == CertificateKind::tail) {
      point.slack = point.empirical - report.ci_low.at(i);
    } else if (slack.rule == Slack::Rule::wilson) {
      point.slack = kZ95 * se;
    } else {
      point.slack = slack.k * se;
    }
    point.pass = point.bound >= point.empirical - point.slack;
    ledger.pass = ledger.pass && point.pass;
    ledger.points.push_back(point);
  }
  return ledger;
}

void to_json(nlohmann::json& j, const CheckLedger& ledger) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : ledger.points) {
    points.push_back({{"x", p.x}, {"bound", p.bound}, {"empirical", p.empirical},
                      {"slack", p.slack}, {"pass", p.pass}});
  }
  j = {{"theorem", ledger.theorem},
       {"kind", to_string(ledger.kind)},
       {"slack_rule", ledger.slack_rule},
       {"points", points},
       {"pass", ledger.pass}};
}

void to_json(nlohmann::json& j, const EmpiricalReport& report) {
  j = {{"kind", to_string(report.kind)},
       {"samples", report.samples},
       {"x", report.x},
       {"estimate", report.estimate},
       {"se", report.se},
       {"unstable", report.unstable}};
  if (!report.ci_low.empty()) {
    j["ci_low"] = report.ci_low;
    j["ci_high"] = report.ci_high;
  }
}

}  // namespace hoc
