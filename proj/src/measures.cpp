#include "hoc/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hoc/error.hpp"
#include "hoc/linalg.hpp"
#include "hoc/parallel.hpp"
#include "hoc/rng.hpp"
#include "hoc/stats.hpp"

namespace hoc {
namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double double_factorial_odd(int j) {  // (j-1)!! for even j
  double r = 1.0;
  for (int i = j - 1; i > 1; i -= 2) r *= i;
  return r;
}

double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

// E (loc + scale Y)^k from the standard moments of Y.
template <class StdMoment>
double affine_moment(double loc, double scale, int k, StdMoment std_moment) {
  double sum = 0.0;
  for (int j = 0; j <= k; ++j) {
    const double m = std_moment(j);
    if (m == 0.0) continue;
    sum += binomial(k, j) * std::pow(loc, k - j) * std::pow(scale, j) * m;
  }
  return sum;
}

// Simpson-rule normalized moment of a custom density.
double custom_moment(const CustomDensity& c, int k) {
  constexpr std::size_t n = 20000;
  const double h = (c.upper - c.lower) / n;
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= n; ++i) shift = std::max(shift, c.log_density(c.lower + i * h));
  double mass = 0.0, moment = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = c.lower + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double p = std::exp(c.log_density(x) - shift);
    mass += w * p;
    moment += w * p * std::pow(x, k);
  }
  return moment / mass;
}

std::vector<double> build_inverse_cdf(const CustomDensity& c) {
  constexpr std::size_t cells = 8192;
  constexpr std::size_t table = 4097;
  const double h = (c.upper - c.lower) / cells;
  std::vector<double> cdf(cells + 1, 0.0);
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cells; ++i) shift = std::max(shift, c.log_density(c.lower + (i + 0.5) * h));
  for (std::size_t i = 0; i < cells; ++i) {
    cdf[i + 1] = cdf[i] + std::exp(c.log_density(c.lower + (i + 0.5) * h) - shift);
  }
  for (double& v : cdf) v /= cdf.back();
  std::vector<double> inv(table);
  std::size_t cell = 0;
  for (std::size_t q = 0; q < table; ++q) {
    const double u = static_cast<double>(q) / (table - 1);
    while (cell + 1 < cells && cdf[cell + 1] < u) ++cell;
    const double span = cdf[cell + 1] - cdf[cell];
    const double frac = span > 0.0 ? std::clamp((u - cdf[cell]) / span, 0.0, 1.0) : 0.0;
    inv[q] = c.lower + (cell + frac) * h;
  }
  return inv;
}

}  // namespace

std::string to_string(Dist d) {
  switch (d) {
    case Dist::gaussian: return "gaussian";
    case Dist::laplace: return "laplace";
    case Dist::exponential: return "exponential";
    case Dist::uniform01: return "uniform01";
    case Dist::student: return "student";
    case Dist::custom: return "custom";
  }
  return "unknown";
}

Dist dist_from_string(const std::string& name) {
  for (Dist d : {Dist::gaussian, Dist::laplace, Dist::exponential, Dist::uniform01, Dist::student,
                 Dist::custom}) {
    if (to_string(d) == name) return d;
  }
  throw InvalidInput("unknown distribution tag '" + name + "'");
}

CoordSpec CoordSpec::gaussian(double mean, double sd) {
  if (!(sd > 0.0)) throw InvalidInput("gaussian: sd must be positive");
  CoordSpec c;
  c.dist = Dist::gaussian;
  c.loc = mean;
  c.scale = sd;
  return c;
}

CoordSpec CoordSpec::laplace(double loc, double b) {
  if (!(b > 0.0)) throw InvalidInput("laplace: scale must be positive");
  CoordSpec c;
  c.dist = Dist::laplace;
  c.loc = loc;
  c.scale = b;
  return c;
}

CoordSpec CoordSpec::exponential(double rate) {
  if (!(rate > 0.0)) throw InvalidInput("exponential: rate must be positive");
  CoordSpec c;
  c.dist = Dist::exponential;
  c.scale = 1.0 / rate;
  return c;
}

CoordSpec CoordSpec::uniform01() {
  CoordSpec c;
  c.dist = Dist::uniform01;
  c.loc = 0.0;
  c.scale = 1.0;
  return c;
}

CoordSpec CoordSpec::student(double alpha) {
  if (!(alpha > 1.5)) throw InvalidInput("student: alpha must exceed 3/2 (finite variance)");
  CoordSpec c;
  c.dist = Dist::student;
  c.shape = alpha;
  return c;
}

CoordSpec CoordSpec::custom_density(CustomDensity density) {
  if (!(density.upper > density.lower)) throw InvalidInput("custom density: empty interval");
  CoordSpec c;
  c.dist = Dist::custom;
  c.custom = std::make_shared<const CustomDensity>(std::move(density));
  c.inverse_cdf = std::make_shared<const std::vector<double>>(build_inverse_cdf(*c.custom));
  return c;
}

MeasureSpec MeasureSpec::product(const CoordSpec& c, std::size_t n) {
  MeasureSpec m;
  m.coords.assign(n, c);
  return m;
}

double draw(const CoordSpec& c, Rng& rng) {
  switch (c.dist) {
    case Dist::gaussian: return c.loc + c.scale * rng.normal();
    case Dist::laplace: return c.loc + c.scale * rng.laplace();
    case Dist::exponential: return c.scale * rng.exponential();
    case Dist::uniform01: return c.loc + c.scale * rng.uniform();
    case Dist::student: {
      const double nu = 2.0 * c.shape - 1.0;
      return rng.student_t(nu) / std::sqrt(nu);
    }
    case Dist::custom: {
      const auto& table = *c.inverse_cdf;
      const double pos = rng.uniform() * static_cast<double>(table.size() - 1);
      const auto i = std::min(static_cast<std::size_t>(pos), table.size() - 2);
      const double frac = pos - static_cast<double>(i);
      return table[i] + frac * (table[i + 1] - table[i]);
    }
  }
  return 0.0;
}

Samples sample(const MeasureSpec& spec, std::size_t m, std::uint64_t seed) {
  if (m == 0) throw InvalidInput("sample: need at least one row");
  Samples s;
  s.rows = m;
  s.cols = spec.dim();
  s.data.resize(m * s.cols);
  parallel_for(block_count(m), [&](std::size_t b) {
    Rng rng(seed, b);
    const std::size_t end = std::min(m, (b + 1) * kBlockRows);
    for (std::size_t r = b * kBlockRows; r < end; ++r)
      for (std::size_t j = 0; j < s.cols; ++j) s.data[r * s.cols + j] = draw(spec.coords[j], rng);
  });
  return s;
}

double raw_moment(const CoordSpec& c, int k) {
  if (k < 0) throw InvalidInput("raw_moment: negative order");
  if (k == 0) return 1.0;
  switch (c.dist) {
    case Dist::gaussian:
      return affine_moment(c.loc, c.scale, k, [](int j) { return j % 2 ? 0.0 : double_factorial_odd(j); });
    case Dist::laplace:
      return affine_moment(c.loc, c.scale, k, [](int j) { return j % 2 ? 0.0 : factorial(j); });
    case Dist::exponential: return std::pow(c.scale, k) * factorial(k);
    case Dist::uniform01: {
      const double a = c.loc, b = c.loc + c.scale;
      return (std::pow(b, k + 1) - std::pow(a, k + 1)) / ((k + 1) * c.scale);
    }
    case Dist::student: {
      if (k % 2) return 0.0;
      const double m = k / 2;
      if (k >= 2.0 * c.shape - 1.0) return std::numeric_limits<double>::infinity();
      return std::exp(std::lgamma(m + 0.5) + std::lgamma(c.shape - m - 0.5) - std::lgamma(0.5) -
                      std::lgamma(c.shape - 0.5));
    }
    case Dist::custom: return custom_moment(*c.custom, k);
  }
  return 0.0;
}

double mean(const CoordSpec& c) { return raw_moment(c, 1); }

double variance(const CoordSpec& c) {
  const double m = raw_moment(c, 1);
  return raw_moment(c, 2) - m * m;
}

bool is_centered(const MeasureSpec& spec, double tol) {
  return std::all_of(spec.coords.begin(), spec.coords.end(),
                     [&](const CoordSpec& c) { return std::fabs(mean(c)) <= tol; });
}

double poincare_constant(const CoordSpec& c) {
  switch (c.dist) {
    case Dist::gaussian: return c.scale * c.scale;
    case Dist::laplace: return 4.0 * c.scale * c.scale;
    case Dist::exponential: return 4.0 * c.scale * c.scale;
    case Dist::uniform01: return c.scale * c.scale / (std::numbers::pi * std::numbers::pi);
    case Dist::student:
      throw Uncertified("student: polynomial tails admit no Poincare constant; use the weighted inequality");
    case Dist::custom:
      if (!c.certified_sigma2) {
        throw Uncertified("custom density: run certify_custom (spectral-gap oracle) first");
      }
      return *c.certified_sigma2;
  }
  return 0.0;
}

double poincare_constant(const MeasureSpec& spec) {
  if (spec.coords.empty()) throw InvalidInput("poincare_constant: empty measure");
  double s = 0.0;
  for (const auto& c : spec.coords) s = std::max(s, poincare_constant(c));
  return s;
}

namespace {

double neumann_gap(const std::function<double(double)>& log_density, double lower, double upper,
                   std::size_t n, const std::function<double(double)>& log_weight) {
  const double h = (upper - lower) / static_cast<double>(n);
  std::vector<double> lp(n), face(n - 1);
  for (std::size_t i = 0; i < n; ++i) lp[i] = log_density(lower + (i + 0.5) * h);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double x = lower + (i + 1) * h;
    face[i] = log_density(x) + (log_weight ? 2.0 * log_weight(x) : 0.0);
  }
  const double inv_h2 = 1.0 / (h * h);
  std::vector<double> diag(n, 0.0), off(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    diag[i] += std::exp(face[i] - lp[i]) * inv_h2;
    diag[i + 1] += std::exp(face[i] - lp[i + 1]) * inv_h2;
    off[i] = -std::exp(face[i] - 0.5 * (lp[i] + lp[i + 1])) * inv_h2;
  }
  return linalg::tridiagonal_kth_eigenvalue(diag, off, 1);
}

}  // namespace

std::string OracleReport::csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "grid,lambda1,sigma2\n";
  for (const auto& s : steps) out << s.gridpoints << ',' << s.lambda1 << ',' << s.sigma2 << '\n';
  return out.str();
}

OracleReport spectral_gap_oracle(const std::function<double(double)>& log_density, double lower,
                                 double upper, std::size_t gridpoints,
                                 const std::function<double(double)>& log_weight) {
  if (gridpoints < 200) throw InvalidInput("spectral_gap_oracle: need at least 200 grid points");
  if (!(upper > lower)) throw InvalidInput("spectral_gap_oracle: empty interval");
  OracleReport report;
  report.lower = lower;
  report.upper = upper;
  for (std::size_t n : {gridpoints, 2 * gridpoints}) {
    const double lambda = neumann_gap(log_density, lower, upper, n, log_weight);
    report.steps.push_back({n, lambda, 1.0 / lambda});
  }
  const double coarse = report.steps[0].lambda1, fine = report.steps[1].lambda1;
  report.lambda1 = fine;
  report.sigma2 = 1.0 / fine;
  report.reliable = fine > 0.0 && std::fabs(fine - coarse) <= 1e-3 * std::fabs(fine);
  return report;
}

OracleReport catalog_oracle(const CoordSpec& c) {
  switch (c.dist) {
    case Dist::gaussian: {
      const double s = c.scale, mu = c.loc;
      return spectral_gap_oracle([=](double x) { return -0.5 * (x - mu) * (x - mu) / (s * s); },
                                 mu - 8.0 * s, mu + 8.0 * s, 2000);
    }
    case Dist::laplace: {
      const double b = c.scale, mu = c.loc;
      return spectral_gap_oracle([=](double x) { return -std::fabs(x - mu) / b; }, mu - 400.0 * b,
                                 mu + 400.0 * b, 8000);
    }
    case Dist::exponential: {
      const double theta = c.scale;
      return spectral_gap_oracle([=](double x) { return -x / theta; }, 0.0, 400.0 * theta, 8000);
    }
    case Dist::uniform01:
      return spectral_gap_oracle([](double) { return 0.0; }, c.loc, c.loc + c.scale, 400);
    case Dist::student:
      throw Uncertified("student: no spectral gap; use student_weight_oracle");
    case Dist::custom:
      return spectral_gap_oracle(c.custom->log_density, c.custom->lower, c.custom->upper, 2000);
  }
  throw InvalidInput("catalog_oracle: unknown distribution");
}

CoordSpec certify_custom(CoordSpec c, std::size_t gridpoints) {
  if (c.dist != Dist::custom) throw InvalidInput("certify_custom: not a custom density");
  const auto report =
      spectral_gap_oracle(c.custom->log_density, c.custom->lower, c.custom->upper, gridpoints);
  if (!report.reliable) throw NonConvergence("certify_custom: oracle did not stabilize under refinement");
  c.certified_sigma2 = report.sigma2;
  return c;
}

OracleReport student_weight_oracle(const CoordSpec& c) {
  if (c.dist != Dist::student) throw InvalidInput("student_weight_oracle: not a student coordinate");
  const double alpha = c.shape;
  // truncate where the two-sided tail mass is below 1e-10
  const double half_width = std::max(10.0, std::pow(10.0, 10.0 / (2.0 * alpha - 1.0)));
  return spectral_gap_oracle([=](double x) { return -alpha * std::log1p(x * x); }, -half_width,
                             half_width, 4000,
                             [](double x) { return 0.5 * std::log1p(x * x); });
}

double weight_at(const MeasureSpec& spec, std::span<const double> x) {
  if (!spec.weight) throw InvalidInput("weight_at: measure has no weight");
  const WeightSpec& w = *spec.weight;
  if (w.kind == WeightSpec::Kind::constant) return w.value;
  double m = 0.0;
  for (double xi : x) m = std::max(m, std::sqrt(1.0 + xi * xi));
  return w.value * m;
}

NormEstimate weighted_norm(const MeasureSpec& spec, double p, std::size_t m, std::uint64_t seed) {
  if (!spec.weight) throw InvalidInput("weighted_norm: measure has no weight");
  if (!(p >= 1.0)) throw InvalidInput("weighted_norm: p must be at least 1");
  if (spec.weight->kind == WeightSpec::Kind::constant) return {spec.weight->value, 0.0, false};
  if (m < 32) throw InvalidInput("weighted_norm: need at least 32 samples");

  std::vector<double> powered(m);
  parallel_for(block_count(m), [&](std::size_t b) {
    Rng rng(seed, b);
    std::vector<double> x(spec.dim());
    const std::size_t end = std::min(m, (b + 1) * kBlockRows);
    for (std::size_t r = b * kBlockRows; r < end; ++r) {
      for (std::size_t j = 0; j < x.size(); ++j) x[j] = draw(spec.coords[j], rng);
      powered[r] = std::pow(weight_at(spec, x), p);
    }
  });

  auto estimate_prefix = [&](std::size_t count) {
    const auto s = summarize({powered.data(), count});
    const double est = std::pow(s.mean, 1.0 / p);
    const double se = est / (p * s.mean) * s.standard_error;
    return NormEstimate{est, se, false};
  };

  NormEstimate full = estimate_prefix(m);
  for (std::size_t count = m / 16; count < m; count *= 2) {
    const NormEstimate a = estimate_prefix(count);
    const NormEstimate b = estimate_prefix(std::min(m, count * 2));
    if (std::fabs(b.estimate - a.estimate) > 5.0 * b.se + 0.01 * b.estimate) full.divergent = true;
  }
  // relative SE of E w^p itself, p times that of its p-th root
  if (p * full.se > 0.1 * full.estimate) full.divergent = true;
  return full;
}

void to_json(nlohmann::json& j, const CoordSpec& c) {
  nlohmann::json params = nlohmann::json::object();
  switch (c.dist) {
    case Dist::gaussian: params = {{"mean", c.loc}, {"sd", c.scale}}; break;
    case Dist::laplace: params = {{"loc", c.loc}, {"scale", c.scale}}; break;
    case Dist::exponential: params = {{"rate", 1.0 / c.scale}}; break;
    case Dist::uniform01: break;
    case Dist::student: params = {{"alpha", c.shape}}; break;
    case Dist::custom: params = {{"lower", c.custom->lower}, {"upper", c.custom->upper}}; break;
  }
  j = {{"dist", to_string(c.dist)}, {"params", params}};
}

CoordSpec coord_from_json(const nlohmann::json& j) {
  const Dist dist = dist_from_string(j.at("dist").get<std::string>());
  const nlohmann::json params = j.value("params", nlohmann::json::object());
  switch (dist) {
    case Dist::gaussian: return CoordSpec::gaussian(params.value("mean", 0.0), params.value("sd", 1.0));
    case Dist::laplace: return CoordSpec::laplace(params.value("loc", 0.0), params.value("scale", 1.0));
    case Dist::exponential: return CoordSpec::exponential(params.value("rate", 1.0));
    case Dist::uniform01: return CoordSpec::uniform01();
    case Dist::student: return CoordSpec::student(params.at("alpha").get<double>());
    case Dist::custom: break;
  }
  throw InvalidInput("custom densities cannot be loaded from JSON; construct them in code");
}

void to_json(nlohmann::json& j, const MeasureSpec& spec) {
  nlohmann::json coords = nlohmann::json::array();
  for (const auto& c : spec.coords) coords.push_back(c);
  j = {{"dim", spec.dim()}, {"coords", coords}};
  if (spec.weight) {
    const bool constant = spec.weight->kind == WeightSpec::Kind::constant;
    j["weight"] = {{"kind", constant ? "constant" : "sqrt1px2"},
                   {"params", {{constant ? "value" : "kappa", spec.weight->value}}}};
  }
}

MeasureSpec measure_from_json(const nlohmann::json& j) {
  MeasureSpec spec;
  const auto dim = j.at("dim").get<std::size_t>();
  const auto& coords = j.at("coords");
  if (coords.size() == 1) {
    spec.coords.assign(dim, coord_from_json(coords.front()));
  } else if (coords.size() == dim) {
    for (const auto& c : coords) spec.coords.push_back(coord_from_json(c));
  } else {
    throw InvalidInput("measure JSON: coords must have 1 or dim entries");
  }
  if (dim == 0) throw InvalidInput("measure JSON: dim must be positive");
  if (j.contains("weight")) {
    const auto& w = j.at("weight");
    const auto kind = w.at("kind").get<std::string>();
    const nlohmann::json params = w.value("params", nlohmann::json::object());
    WeightSpec weight;
    if (kind == "constant") {
      weight.kind = WeightSpec::Kind::constant;
      weight.value = params.at("value").get<double>();
    } else if (kind == "sqrt1px2") {
      weight.kind = WeightSpec::Kind::sqrt_one_plus_square;
      const auto& kappa = params.at("kappa");
      if (kappa.is_string() && kappa.get<std::string>() == "certify") {
        const auto it = std::find_if(spec.coords.begin(), spec.coords.end(),
                                     [](const CoordSpec& c) { return c.dist == Dist::student; });
        if (it == spec.coords.end()) throw InvalidInput("weight kappa=certify needs a student coordinate");
        double kappa2 = 0.0;
        for (const auto& c : spec.coords) {
          if (c.dist != Dist::student) throw InvalidInput("weight kappa=certify: all coordinates must be student");
          kappa2 = std::max(kappa2, student_weight_oracle(c).sigma2);
        }
        weight.value = std::sqrt(kappa2);
      } else {
        weight.value = kappa.get<double>();
      }
    } else {
      throw InvalidInput("measure JSON: unknown weight kind '" + kind + "'");
    }
    if (!(weight.value > 0.0)) throw InvalidInput("measure JSON: weight must be positive");
    spec.weight = weight;
  }
  return spec;
}

}  // namespace hoc
