#include "hoc/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "hoc/error.hpp"
#include "hoc/parallel.hpp"
#include "hoc/stats.hpp"

namespace hoc {
namespace {

constexpr double kE = std::numbers::e;
constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kInf = std::numeric_limits<double>::infinity();

double top_moment(const DerivativeProfile& profile, double p) {
  if (profile.top_p) return profile.top_p(p);
  if (profile.top_inf) return *profile.top_inf;
  throw MissingHypothesis("profile lacks ||f^(d)||_{Op,p} and ||f^(d)||_{Op,inf}");
}

}  // namespace

void DerivativeProfile::validate() const {
  if (order < 1) throw InvalidInput("profile: order must be at least 1");
  if (!(sigma > 0.0)) throw InvalidInput("profile: sigma must be positive");
  if (norms2.size() != order - 1) {
    throw InvalidInput("profile: norms2 must list ||f^(k)||_{Op,2} for k = 1..d-1");
  }
  for (double v : norms2)
    if (!(v >= 0.0)) throw InvalidInput("profile: norms must be nonnegative");
  if (top_inf && !(*top_inf >= 0.0)) throw InvalidInput("profile: top_inf must be nonnegative");
  if (!hs2.empty() && hs2.size() != order) {
    throw InvalidInput("profile: hs2 must list ||f^(k)||_{HS,2} for k = 1..d");
  }
}

std::string to_string(CertificateKind kind) {
  switch (kind) {
    case CertificateKind::moment: return "moment";
    case CertificateKind::tail: return "tail";
    case CertificateKind::exp_moment: return "expMoment";
  }
  return "unknown";
}

double Certificate::evaluate(double x) const {
  if (kind == CertificateKind::exp_moment) return level();
  return evaluator(x);
}

void to_json(nlohmann::json& j, const Certificate& c) {
  nlohmann::json constants = nlohmann::json::object();
  for (const auto& [k, v] : c.constants) constants[k] = v;
  j = {{"kind", to_string(c.kind)},
       {"theorem", c.theorem},
       {"constants", constants},
       {"rescale_lambda", c.rescale_lambda}};
}

double pfstep_moment(const DerivativeProfile& profile, double p) {
  profile.validate();
  if (!(p >= 2.0)) throw InvalidInput("pfstep_moment: requires p >= 2");
  const double step = profile.sigma * p / kSqrt2;
  double sum = 0.0;
  double factor = 1.0;
  for (std::size_t k = 1; k < profile.order; ++k) {
    factor *= step;
    sum += factor * profile.norms2[k - 1];
  }
  factor *= step;
  return sum + factor * top_moment(profile, p);
}

Certificate moment_certificate(const DerivativeProfile& profile) {
  profile.validate();
  if (!profile.mean_zero) throw MissingHypothesis("moment certificate: f must have mean zero");
  Certificate c;
  c.kind = CertificateKind::moment;
  c.theorem = "1.1";
  c.constants = {{"sigma", profile.sigma}, {"d", static_cast<double>(profile.order)}};
  c.evaluator = [profile](double p) { return pfstep_moment(profile, p); };
  return c;
}

Certificate exp_moment_certificate(const DerivativeProfile& profile) {
  profile.validate();
  if (!profile.mean_zero) throw MissingHypothesis("exp-moment certificate: f must have mean zero");
  if (!profile.top_inf) throw MissingHypothesis("exp-moment certificate: needs ||f^(d)||_{Op,inf}");
  const std::size_t d = profile.order;
  const double sigma = profile.sigma;
  const double top = *profile.top_inf;

  // operator-norm route
  double lambda_op = std::max(1.0, top);
  for (std::size_t k = 1; k < d; ++k) {
    const double allowed = std::pow(sigma, static_cast<double>(d - k));
    lambda_op = std::max(lambda_op, profile.norms2[k - 1] / allowed);
  }
  double lambda = lambda_op;
  std::string theorem = "1.1";

  // Hilbert-Schmidt route
  if (profile.centered_derivatives && !profile.hs2.empty()) {
    const double lambda_hs = std::max({1.0, top, profile.hs2.back()});
    if (lambda_hs < lambda) {
      lambda = lambda_hs;
      theorem = "1.2";
    }
  }

  Certificate c;
  c.kind = CertificateKind::exp_moment;
  c.theorem = theorem;
  c.rescale_lambda = lambda;
  const double power = 1.0 / static_cast<double>(d);
  c.constants = {{"c", kUniversalC},
                 {"sigma", sigma},
                 {"d", static_cast<double>(d)},
                 {"top_inf", top},
                 {"power", power},
                 {"level", 2.0},
                 {"coefficient", kUniversalC / sigma * std::pow(lambda, -power)}};
  if (!profile.top_inf_exact) c.constants["top_inf_lower_bound_only"] = 1.0;
  for (std::size_t k = 1; k < d; ++k) c.constants["norm2_" + std::to_string(k)] = profile.norms2[k - 1];
  for (std::size_t k = 1; k <= profile.hs2.size(); ++k) {
    c.constants["hs2_" + std::to_string(k)] = profile.hs2[k - 1];
  }
  c.evaluator = [](double) { return 2.0; };
  return c;
}

double korr_eta(const DerivativeProfile& profile, double t) {
  profile.validate();
  if (!profile.top_inf) throw MissingHypothesis("korr_tail: needs ||f^(d)||_{Op,inf}");
  if (t < 0.0) throw InvalidInput("korr_tail: t must be nonnegative");
  const double d = static_cast<double>(profile.order);
  double eta = kInf;
  if (*profile.top_inf > 0.0) {
    eta = kSqrt2 * std::pow(t, 1.0 / d) / (profile.sigma * std::pow(*profile.top_inf, 1.0 / d));
  }
  for (std::size_t k = 1; k < profile.order; ++k) {
    const double norm = profile.norms2[k - 1];
    if (norm <= 0.0) continue;
    const double inv_k = 1.0 / static_cast<double>(k);
    eta = std::min(eta, kSqrt2 * std::pow(t, inv_k) / (profile.sigma * std::pow(norm, inv_k)));
  }
  return eta;
}

double korr_tail(const DerivativeProfile& profile, double t) {
  const double eta = korr_eta(profile, t);
  const double d = static_cast<double>(profile.order);
  return std::min(1.0, kE * kE * std::exp(-eta / (d * kE)));
}

Certificate korr_tail_certificate(const DerivativeProfile& profile) {
  profile.validate();
  if (!profile.top_inf) throw MissingHypothesis("korr_tail: needs ||f^(d)||_{Op,inf}");
  if (!profile.mean_zero) throw MissingHypothesis("korr_tail certificate: f must have mean zero");
  Certificate c;
  c.kind = CertificateKind::tail;
  c.theorem = "1.3";
  c.constants = {{"sigma", profile.sigma},
                 {"d", static_cast<double>(profile.order)},
                 {"top_inf", *profile.top_inf},
                 {"prefactor", kE * kE}};
  if (!profile.top_inf_exact) c.constants["top_inf_lower_bound_only"] = 1.0;
  for (std::size_t k = 1; k < profile.order; ++k) {
    c.constants["norm2_" + std::to_string(k)] = profile.norms2[k - 1];
  }
  c.evaluator = [profile](double t) { return korr_tail(profile, t); };
  return c;
}

double subexp_constant(double gamma) {
  if (!(gamma > 0.0)) throw InvalidInput("subexp_constant: gamma must be positive");
  return 1.0 / (2.0 * gamma * kE);
}

namespace {

double wnorm(const WeightedProfile& profile, std::size_t k) {
  const auto it = profile.wnorms.find(k);
  if (it == profile.wnorms.end()) {
    throw MissingHypothesis("weighted bound: missing ||w||_{2^" + std::to_string(k) + " p} = ||w||_" +
                            std::to_string(std::ldexp(profile.p, static_cast<int>(k))));
  }
  return it->second;
}

void validate(const WeightedProfile& profile) {
  if (profile.order < 1) throw InvalidInput("weighted profile: order must be at least 1");
  if (!(profile.p >= 2.0)) throw InvalidInput("weighted bound: requires p >= 2");
  if (profile.norms2.size() != profile.order - 1) {
    throw InvalidInput("weighted profile: norms2 must list k = 1..d-1");
  }
}

// sum_{k<d} (2^{(k-2)/2} p ||w||_{2^k p})^k ||f^{(k)}||_{Op,2}
double weighted_lower_terms(const WeightedProfile& profile) {
  double sum = 0.0;
  for (std::size_t k = 1; k < profile.order; ++k) {
    const double kk = static_cast<double>(k);
    const double base = std::pow(2.0, (kk - 2.0) / 2.0) * profile.p * wnorm(profile, k);
    sum += std::pow(base, kk) * profile.norms2[k - 1];
  }
  return sum;
}

}  // namespace

WeightedBounds weighted_moment(const WeightedProfile& profile) {
  validate(profile);
  const std::size_t d = profile.order;
  const double dd = static_cast<double>(d);
  const double head = std::pow(2.0, (dd - 2.0) / 2.0) * profile.p;
  WeightedBounds out;
  if (!profile.top_mixed && !profile.top2dp) {
    throw MissingHypothesis("weighted bound: needs top_mixed or top2dp");
  }
  const double lower = weighted_lower_terms(profile);
  if (profile.top_mixed) {
    const double wfactor = d >= 2 ? std::pow(wnorm(profile, d - 1), dd - 1.0) : 1.0;
    out.first = lower + std::pow(head, dd) * wfactor * *profile.top_mixed;
  }
  if (profile.top2dp) {
    out.second = lower + std::pow(head * wnorm(profile, d), dd) * *profile.top2dp;
  }
  return out;
}

double weighted_moment_iterated(const WeightedProfile& profile) {
  validate(profile);
  if (!profile.top_mixed) throw MissingHypothesis("weighted iteration: needs top_mixed");
  const std::size_t d = profile.order;
  const double root = profile.p / std::numbers::sqrt2;
  double sum = 0.0;
  for (std::size_t k = 1; k < d; ++k) {
    const double binom = static_cast<double>(k * (k - 1) / 2);
    sum += std::pow(2.0, binom) * std::pow(root * wnorm(profile, k), static_cast<double>(k)) *
           profile.norms2[k - 1];
  }
  const double binom_d = static_cast<double>(d * (d - 1) / 2);
  const double wfactor = d >= 2 ? std::pow(wnorm(profile, d - 1), static_cast<double>(d - 1)) : 1.0;
  sum += std::pow(2.0, binom_d) * std::pow(root, static_cast<double>(d)) * wfactor * *profile.top_mixed;
  return sum;
}

double weighted_tail_range(double c_bound, double p, std::size_t d) {
  const double dd = static_cast<double>(d);
  return std::pow(std::pow(2.0, (dd + 5.0) / 2.0) * c_bound * kE * p, dd);
}

double weighted_tail(double c_bound, double p, std::size_t d, double t) {
  if (d < 1) throw InvalidInput("weighted_tail: d must be at least 1");
  if (!(p >= 2.0)) throw InvalidInput("weighted_tail: requires p >= 2");
  if (!(c_bound > 0.0)) throw InvalidInput("weighted_tail: C must be positive");
  const double dd = static_cast<double>(d);
  if (d >= 2 && c_bound < std::pow(2.0, -(dd - 1.0) / 2.0)) {
    throw InvalidInput(
        "weighted_tail: C must be at least 2^{-(d-1)/2}; smaller C needs a separately adapted argument");
  }
  if (t < 0.0) throw InvalidInput("weighted_tail: t must be nonnegative");
  if (t == 0.0) return 1.0;
  const double scale = std::pow(2.0, (dd + 5.0) / 2.0) * c_bound;
  const double prefactor = std::exp(dd / kE);
  double bound;
  if (t <= weighted_tail_range(c_bound, p, d)) {
    bound = prefactor * std::exp(-dd * std::pow(t, 1.0 / dd) / (scale * kE));
  } else {
    bound = prefactor * std::pow(std::pow(scale * p, dd) / t, p);
  }
  return std::min(1.0, bound);
}

Certificate weighted_tail_certificate(double c_bound, double p, std::size_t d) {
  weighted_tail(c_bound, p, d, 0.0);  // validates
  Certificate c;
  c.kind = CertificateKind::tail;
  c.theorem = "1.5";
  c.constants = {{"C", c_bound},
                 {"p", p},
                 {"d", static_cast<double>(d)},
                 {"t_max", weighted_tail_range(c_bound, p, d)}};
  c.evaluator = [=](double t) { return weighted_tail(c_bound, p, d, t); };
  return c;
}

MultilinearCertificates multilinear_certificate(const SymTensor& a, double sigma,
                                                bool unit_variance) {
  if (!(sigma > 0.0)) throw InvalidInput("multilinear_certificate: sigma must be positive");
  MultilinearCertificates out;
  out.hs = hs_norm(a);
  out.inf = max_abs_entry(a);
  out.dim = a.dim();
  out.order = a.order();
  const double d = static_cast<double>(a.order());
  const double n = static_cast<double>(a.dim());

  auto exp_cert = [&](double scale, const std::string& form) {
    Certificate c;
    c.kind = CertificateKind::exp_moment;
    c.theorem = "3.1";
    const double coefficient =
        scale > 0.0 ? kUniversalC / (sigma * std::pow(scale, 1.0 / d)) : kInf;
    c.constants = {{"c", kUniversalC},  {"sigma", sigma}, {"d", d},         {"n", n},
                   {"hs", out.hs},      {"inf", out.inf}, {"power", 1.0 / d}, {"level", 2.0},
                   {"coefficient", coefficient}};
    c.constants[form] = 1.0;
    c.evaluator = [](double) { return 2.0; };
    return c;
  };
  // n^{1/2} ||A||_inf^{1/d} = (n^{d/2} ||A||_inf)^{1/d}
  const double inf_scale = std::pow(n, d / 2.0) * out.inf;
  out.exp_hs = exp_cert(out.hs, "form_hs");
  out.exp_inf = exp_cert(inf_scale, "form_inf");

  if (unit_variance) {
    auto tail_cert = [&](double scale, const std::string& form) {
      Certificate c;
      c.kind = CertificateKind::tail;
      c.theorem = "3.1";
      c.constants = {{"sigma", sigma}, {"d", d}, {"n", n}, {"scale", scale}, {"prefactor", kE * kE}};
      c.constants[form] = 1.0;
      c.evaluator = [=](double t) {
        if (t <= 0.0) return 1.0;
        if (scale <= 0.0) return 0.0;
        const double u = t / scale;
        const double eta = kSqrt2 / (sigma * d * kE) * std::min(u, std::pow(u, 1.0 / d));
        return std::min(1.0, kE * kE * std::exp(-eta));
      };
      return c;
    };
    out.tail_hs = tail_cert(out.hs, "form_hs");
    out.tail_inf = tail_cert(inf_scale, "form_inf");
  }
  return out;
}

MultilinearCertificates multilinear_certificate(const MultilinearSpec& spec,
                                                const MeasureSpec& measure) {
  if (measure.dim() != spec.dim) throw InvalidInput("multilinear_certificate: dimension mismatch");
  if (!is_centered(measure)) {
    throw InvalidInput("multilinear_certificate: input coordinates must be centered (E X_i = 0)");
  }
  const bool unit_variance = std::all_of(measure.coords.begin(), measure.coords.end(),
                                         [](const CoordSpec& c) { return std::fabs(variance(c) - 1.0) < 1e-12; });
  const double sigma = std::sqrt(poincare_constant(measure));
  return multilinear_certificate(from_multilinear(spec).hypermatrix, sigma, unit_variance);
}

DerivativeProfile profile_from_function(const PolyFunction& f, const MeasureSpec& measure,
                                        std::size_t d, std::size_t m, std::uint64_t seed) {
  if (d < 1) throw InvalidInput("profile_from_function: d must be at least 1");
  if (m < 10000) throw InvalidInput("profile_from_function: need at least 10^4 samples");
  if (measure.dim() != f.dim()) throw InvalidInput("profile_from_function: dimension mismatch");

  DerivativeProfile profile;
  profile.order = d;
  profile.sigma = std::sqrt(poincare_constant(measure));

  std::vector<DerivativeField> fields;
  for (std::size_t k = 1; k <= d; ++k) fields.emplace_back(f, k);
  const bool top_constant = fields.back().is_constant();

  OpNormOptions pointwise;
  pointwise.restarts = 8;

  // per-sample |f^(k)|_Op^2 (k < d), |f^(k)|_HS^2 (k <= d), |f^(d)|_Op
  std::vector<std::vector<double>> op_sq(d - 1, std::vector<double>(m));
  std::vector<std::vector<double>> hs_sq(d, std::vector<double>(m));
  auto top_values = std::make_shared<std::vector<double>>(top_constant ? 0 : m);

  const Samples xs = sample(measure, m, seed);
  parallel_for(block_count(m), [&](std::size_t b) {
    const std::size_t end = std::min(m, (b + 1) * kBlockRows);
    for (std::size_t r = b * kBlockRows; r < end; ++r) {
      const auto x = xs.row(r);
      for (std::size_t k = 1; k <= d; ++k) {
        const SymTensor t = fields[k - 1].at(x);
        const double hs = hs_norm(t);
        hs_sq[k - 1][r] = hs * hs;
        if (k < d) {
          const double op = pointwise_op_norm(t, pointwise);
          op_sq[k - 1][r] = op * op;
        } else if (!top_constant) {
          (*top_values)[r] = pointwise_op_norm(t, pointwise);
        }
      }
    }
  });

  auto l2 = [](const std::vector<double>& squares, double& se) {
    const Summary s = summarize(squares);
    const double est = std::sqrt(s.mean);
    se = est > 0.0 ? s.standard_error / (2.0 * est) : 0.0;
    return est;
  };
  for (std::size_t k = 1; k < d; ++k) {
    double se = 0.0;
    profile.norms2.push_back(l2(op_sq[k - 1], se));
    profile.norms2_se.push_back(se);
  }
  for (std::size_t k = 1; k <= d; ++k) {
    double se = 0.0;
    profile.hs2.push_back(l2(hs_sq[k - 1], se));
    profile.hs2_se.push_back(se);
  }

  if (top_constant) {
    const std::vector<double> origin(f.dim(), 0.0);
    const double top = op_norm(fields.back().at(origin));
    profile.top_inf = top;
    profile.top_inf_exact = true;
    profile.top_p = [top](double) { return top; };
  } else {
    profile.top_inf = *std::max_element(top_values->begin(), top_values->end());
    profile.top_inf_exact = false;
    profile.top_p = [top_values](double p) {
      if (std::isinf(p)) return *std::max_element(top_values->begin(), top_values->end());
      CompensatedSum s;
      for (double v : *top_values) s.add(std::pow(v, p));
      return std::pow(s.value() / static_cast<double>(top_values->size()), 1.0 / p);
    };
  }

  auto moment = [&](std::size_t i, int k) { return raw_moment(measure.coords[i], k); };
  double scale = 0.0;
  for (const auto& [e, c] : f.terms()) scale += std::fabs(c);
  const double tol = 1e-10 * std::max(1.0, scale);
  profile.mean_zero = std::fabs(expectation(f, moment)) <= tol;
  profile.centered_derivatives = true;
  for (std::size_t k = 1; k < d && profile.centered_derivatives; ++k) {
    for (const auto& partial : fields[k - 1].partials()) {
      if (std::fabs(expectation(partial, moment)) > tol) {
        profile.centered_derivatives = false;
        break;
      }
    }
  }
  return profile;
}

}  // namespace hoc
