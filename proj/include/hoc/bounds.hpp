#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hoc/measures.hpp"
#include "hoc/poly.hpp"

namespace hoc {

/// Universal constant of the exponential-moment certificates, 1 / (12 e).
inline constexpr double kUniversalC = 1.0 / (12.0 * std::numbers::e);

/// Norms of the derivatives of f that every bound consumes.
struct DerivativeProfile {
  std::size_t order = 1;  // d
  double sigma = 1.0;     // square root of the Poincare constant
  std::vector<double> norms2;  // ||f^{(k)}||_{Op,2}, k = 1..d-1
  std::optional<double> top_inf;  // ||f^{(d)}||_{Op,inf}
  std::function<double(double)> top_p;  // p -> ||f^{(d)}||_{Op,p}
  std::vector<double> hs2;  // ||f^{(k)}||_{HS,2}, k = 1..d (optional)
  bool centered_derivatives = false;  // all partials of order < d integrate to 0
  bool mean_zero = true;
  bool top_inf_exact = true;  // false: top_inf is a sampled lower bound

  // Monte Carlo standard errors, reporting only
  std::vector<double> norms2_se;
  std::vector<double> hs2_se;

  void validate() const;
};

enum class CertificateKind { moment, tail, exp_moment };
std::string to_string(CertificateKind kind);

/// An evaluable bound with every constant instantiated.
///
/// tail: evaluate(t) bounds P(|f| >= t), capped at 1.
/// moment: evaluate(p) bounds ||f||_p.
/// exp_moment: claims E exp(coefficient * |f|^power) <= level; evaluate
/// returns the level.
struct Certificate {
  CertificateKind kind = CertificateKind::tail;
  std::string theorem;
  std::map<std::string, double> constants;
  double rescale_lambda = 1.0;
  std::function<double(double)> evaluator;

  double evaluate(double x) const;
  double coefficient() const { return constants.at("coefficient"); }
  double power() const { return constants.at("power"); }
  double level() const { return constants.at("level"); }
};

void to_json(nlohmann::json& j, const Certificate& c);

/// sum_{k<d} (sigma p / sqrt 2)^k ||f^{(k)}||_{Op,2} + (sigma p / sqrt 2)^d ||f^{(d)}||_{Op,p}.
/// Uses top_inf when top_p is absent. Requires p >= 2.
double pfstep_moment(const DerivativeProfile& profile, double p);
Certificate moment_certificate(const DerivativeProfile& profile);

/// E exp((c / sigma) |f / lambda|^{1/d}) <= 2 with c = 1/(12e). Chooses the
/// operator-norm route or, when the partials are centered and HS norms are
/// available, the Hilbert-Schmidt route, whichever needs the smaller lambda.
Certificate exp_moment_certificate(const DerivativeProfile& profile);

/// eta_f(t); zero norms drop out of the minimum.
double korr_eta(const DerivativeProfile& profile, double t);
/// min(1, e^2 exp(-eta_f(t) / (d e))).
double korr_tail(const DerivativeProfile& profile, double t);
Certificate korr_tail_certificate(const DerivativeProfile& profile);

/// c = 1 / (2 gamma e): ||f||_k <= gamma k for all k implies E e^{c|f|} <= 2.
double subexp_constant(double gamma);

/// Inputs of the weighted-Poincare moment bounds.
struct WeightedProfile {
  std::size_t order = 1;
  double p = 2.0;
  std::map<std::size_t, double> wnorms;  // k -> ||w||_{2^k p}, k = 1..d
  std::vector<double> norms2;  // ||f^{(k)}||_{Op,2}, k = 1..d-1
  std::optional<double> top_mixed;  // || w |f^{(d)}|_Op ||_{2^{d-1} p}
  std::optional<double> top2dp;     // ||f^{(d)}||_{Op, 2^d p}
};

struct WeightedBounds {
  std::optional<double> first;   // uses top_mixed
  std::optional<double> second;  // uses top2dp
};

/// Both weighted moment bounds on ||f||_p. Throws MissingHypothesis naming the
/// missing index 2^k p when a needed weight norm is absent.
WeightedBounds weighted_moment(const WeightedProfile& profile);

/// The iteration behind the first weighted bound with its 2^{C(k,2)} factors:
/// sum_{k<d} 2^{C(k,2)} (p ||w||_{2^k p} / sqrt 2)^k ||f^{(k)}||_{Op,2}
///   + 2^{C(d,2)} (p / sqrt 2)^d ||w||_{2^{d-1} p}^{d-1} top_mixed.
double weighted_moment_iterated(const WeightedProfile& profile);

/// Tail bound from ||w||_{2^d p} <= C. Inside 0 <= t <= (2^{(d+5)/2} C e p)^d:
/// e^{d/e} exp(-d t^{1/d} / (2^{(d+5)/2} C e)); beyond it the moment bound with
/// q = p. Capped at 1. Requires C >= 2^{-(d-1)/2} when d >= 2.
double weighted_tail(double c_bound, double p, std::size_t d, double t);
double weighted_tail_range(double c_bound, double p, std::size_t d);
Certificate weighted_tail_certificate(double c_bound, double p, std::size_t d);

struct MultilinearCertificates {
  double hs = 0.0;    // ||A||_HS
  double inf = 0.0;   // ||A||_inf
  std::size_t dim = 0;
  std::size_t order = 0;
  Certificate exp_hs;
  Certificate exp_inf;
  std::optional<Certificate> tail_hs;   // needs unit-variance inputs
  std::optional<Certificate> tail_inf;
};

/// Certificates for homogeneous multilinear chaos under centered product
/// measures. Throws InvalidInput for non-centered measures.
MultilinearCertificates multilinear_certificate(const MultilinearSpec& spec,
                                                const MeasureSpec& measure);
MultilinearCertificates multilinear_certificate(const SymTensor& hypermatrix, double sigma,
                                                bool unit_variance);

/// Monte Carlo estimate of the derivative profile of a polynomial.
/// ||f^{(d)}||_{Op,inf} is exact when f^{(d)} is constant, otherwise the
/// sample maximum flagged as a lower bound.
DerivativeProfile profile_from_function(const PolyFunction& f, const MeasureSpec& measure,
                                        std::size_t d, std::size_t m, std::uint64_t seed);

}  // namespace hoc
