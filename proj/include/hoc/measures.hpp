#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace hoc {

enum class Dist { gaussian, laplace, exponential, uniform01, student, custom };

std::string to_string(Dist d);
Dist dist_from_string(const std::string& name);

/// User-supplied one-dimensional density on a bounded interval, given by its
/// (unnormalized) logarithm.
struct CustomDensity {
  std::function<double(double)> log_density;
  double lower = 0.0;
  double upper = 1.0;
};

/// One coordinate of a product measure.
///
/// Parameter meaning depends on the law:
///   gaussian     loc = mean, scale = standard deviation
///   laplace      loc = location, scale = b (density e^{-|x-loc|/b} / 2b)
///   exponential  scale = mean (1 / rate), support [0, inf)
///   uniform01    uniform on [loc, loc + scale], default [0, 1]
///   student      density proportional to (1 + x^2)^{-shape}; has no
///                Poincare constant, only the weighted one with
///                w(x) = kappa sqrt(1 + x^2)
///   custom       see CustomDensity; needs certify_custom before use
struct CoordSpec {
  Dist dist = Dist::gaussian;
  double loc = 0.0;
  double scale = 1.0;
  double shape = 0.0;
  std::shared_ptr<const CustomDensity> custom;
  std::shared_ptr<const std::vector<double>> inverse_cdf;  // custom sampling table
  std::optional<double> certified_sigma2;

  static CoordSpec gaussian(double mean = 0.0, double sd = 1.0);
  static CoordSpec laplace(double loc = 0.0, double b = 1.0);
  static CoordSpec exponential(double rate = 1.0);
  static CoordSpec uniform01();
  static CoordSpec student(double alpha);
  static CoordSpec custom_density(CustomDensity density);
};

/// Per-coordinate weight for the weighted Poincare inequality,
/// w_i(x) = value (constant) or value * sqrt(1 + x^2). On a product measure
/// the weight is w(x) = max_i w_i(x_i).
struct WeightSpec {
  enum class Kind { constant, sqrt_one_plus_square };
  Kind kind = Kind::constant;
  double value = 1.0;
};

struct MeasureSpec {
  std::vector<CoordSpec> coords;
  std::optional<WeightSpec> weight;

  std::size_t dim() const noexcept { return coords.size(); }
  static MeasureSpec product(const CoordSpec& c, std::size_t n);
};

/// Row-major m x n sample matrix.
struct Samples {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
};

/// Draws m i.i.d. rows. Row block b (of kBlockRows rows) comes from substream b
/// of the seed, so the result depends only on (spec, m, seed).
Samples sample(const MeasureSpec& spec, std::size_t m, std::uint64_t seed);

class Rng;
double draw(const CoordSpec& c, Rng& rng);

double raw_moment(const CoordSpec& c, int k);
double mean(const CoordSpec& c);
double variance(const CoordSpec& c);
bool is_centered(const MeasureSpec& spec, double tol = 1e-12);

/// Poincare constant sigma^2 of one coordinate (closed form for the catalog).
/// Throws Uncertified for custom densities without an oracle run and for laws
/// with no finite constant (student).
double poincare_constant(const CoordSpec& c);
/// Product measure: max over coordinates.
double poincare_constant(const MeasureSpec& spec);

struct OracleStep {
  std::size_t gridpoints;
  double lambda1;
  double sigma2;
};

struct OracleReport {
  std::vector<OracleStep> steps;  // base grid, then doubled grid
  double lambda1 = 0.0;
  double sigma2 = 0.0;
  bool reliable = false;
  double lower = 0.0;
  double upper = 0.0;

  std::string csv() const;
};

/// Smallest nonzero eigenvalue of the Neumann problem -(p w^2 u')' = lambda p u
/// on [lower, upper], with p = exp(log_density) and w = exp(log_weight)
/// (w = 1 when log_weight is empty). Cell-centred finite volumes, symmetrized
/// and solved by bisection; repeated with twice the grid points, and flagged
/// unreliable if lambda moves by more than 1e-3 relative.
OracleReport spectral_gap_oracle(const std::function<double(double)>& log_density, double lower,
                                 double upper, std::size_t gridpoints,
                                 const std::function<double(double)>& log_weight = {});

/// Oracle run with the catalog's default truncation interval and grid.
OracleReport catalog_oracle(const CoordSpec& c);

/// Runs the oracle on a custom density and stores the certified constant.
/// Throws NonConvergence when the oracle flags the result unreliable.
CoordSpec certify_custom(CoordSpec c, std::size_t gridpoints = 2000);

/// kappa^2 for the weighted inequality Var f <= kappa^2 int f'^2 (1 + x^2) dmu
/// of a student coordinate, from the weighted oracle.
OracleReport student_weight_oracle(const CoordSpec& c);

double weight_at(const MeasureSpec& spec, std::span<const double> x);

struct NormEstimate {
  double estimate = 0.0;
  double se = 0.0;
  bool divergent = false;
};

/// Monte Carlo (E w^p)^{1/p} with delta-method standard error. Flagged
/// divergent when the estimate keeps moving across the last sample doublings
/// (m/16 ... m) by more than 5 SE + 1%, or the relative SE of E w^p exceeds 10%.
NormEstimate weighted_norm(const MeasureSpec& spec, double p, std::size_t m, std::uint64_t seed);

void to_json(nlohmann::json& j, const MeasureSpec& spec);
MeasureSpec measure_from_json(const nlohmann::json& j);
CoordSpec coord_from_json(const nlohmann::json& j);
void to_json(nlohmann::json& j, const CoordSpec& c);

}  // namespace hoc
