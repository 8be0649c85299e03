#include "hoc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "hoc/bounds.hpp"
#include "hoc/measures.hpp"
#include "hoc/parallel.hpp"
#include "hoc/poly.hpp"
#include "hoc/report_io.hpp"
#include "hoc/rmt.hpp"
#include "hoc/rng.hpp"
#include "hoc/stats.hpp"
#include "hoc/tensor.hpp"
#include "hoc/verify.hpp"

namespace hoc {

using nlohmann::json;

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::tensor_norm: return "tensor-norm";
    case ExperimentKind::certify: return "certify";
    case ExperimentKind::verify_tails: return "verify-tails";
    case ExperimentKind::weighted: return "weighted";
    case ExperimentKind::multilinear: return "multilinear";
    case ExperimentKind::rmt: return "rmt";
    case ExperimentKind::catalog_oracle: return "catalog-oracle";
  }
  return "unknown";
}

namespace {

const std::map<std::string, ExperimentKind>& kind_names() {
  static const std::map<std::string, ExperimentKind> names = {
      {"tensor-norm", ExperimentKind::tensor_norm}, {"certify", ExperimentKind::certify},
      {"verify-tails", ExperimentKind::verify_tails}, {"weighted", ExperimentKind::weighted},
      {"multilinear", ExperimentKind::multilinear}, {"rmt", ExperimentKind::rmt},
      {"catalog-oracle", ExperimentKind::catalog_oracle}};
  return names;
}

std::size_t line_at(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Line of the first occurrence of "key", or 1 when the key is absent.
std::size_t line_of(const std::string& text, const std::string& key) {
  const auto pos = text.find('"' + key + '"');
  return pos == std::string::npos ? 1 : line_at(text, pos);
}

std::vector<double> read_grid(const std::string& text, const json& root, const std::string& key) {
  const auto& node = root.at(key);
  if (!node.is_array() || node.empty()) throw ConfigError(line_of(text, key), key + " must be a non-empty array");
  std::vector<double> grid;
  for (const auto& v : node) {
    if (!v.is_number()) throw ConfigError(line_of(text, key), key + " entries must be numbers");
    grid.push_back(v.get<double>());
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ConfigError(line_of(text, key), key + " must be strictly increasing");
  }
  return grid;
}

std::size_t read_count(const std::string& text, const json& root, const std::string& key, std::size_t fallback) {
  if (!root.contains(key)) return fallback;
  const auto& v = root.at(key);
  if (!v.is_number_unsigned() || v.get<std::size_t>() == 0) {
    throw ConfigError(line_of(text, key), key + " must be a positive integer");
  }
  return v.get<std::size_t>();
}

void require(const std::string& text, const json& root, std::initializer_list<const char*> keys,
             ExperimentKind kind) {
  for (const char* key : keys) {
    if (!root.contains(key)) {
      throw ConfigError(line_of(text, "kind"), "kind " + to_string(kind) + " requires field \"" + key + "\"");
    }
  }
}

// Runs a section parser and reports its failure at the section's line.
template <class F>
void check_section(const std::string& text, const std::string& key, F&& parse) {
  try {
    parse();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(line_of(text, key), key + ": " + e.what());
  }
}

PolyFunction function_of(const json& body) {
  if (body.contains("function")) return poly_from_json(body.at("function"));
  return from_multilinear(multilinear_from_json(body.at("multilinear"))).function;
}

UnivariatePoly rmt_function(const json& body) {
  const auto& f = body.at("f");
  if (f.value("kind", std::string("polynomial")) != "polynomial") {
    throw InvalidInput("f.kind must be \"polynomial\"");
  }
  return UnivariatePoly{f.at("coeffs").get<std::vector<double>>()};
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(line_at(text, e.byte > 0 ? e.byte - 1 : 0), std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError(1, "config must be a JSON object");

  if (!root.contains("schema")) throw ConfigError(1, "missing \"schema\" (expected \"" + std::string(kConfigSchema) + "\")");
  if (!root.at("schema").is_string() || root.at("schema").get<std::string>() != kConfigSchema) {
    throw ConfigError(line_of(text, "schema"), "unsupported schema, expected \"" + std::string(kConfigSchema) + "\"");
  }
  if (!root.contains("kind") || !root.at("kind").is_string()) throw ConfigError(line_of(text, "kind"), "missing or non-string \"kind\"");
  const auto kind_it = kind_names().find(root.at("kind").get<std::string>());
  if (kind_it == kind_names().end()) {
    throw ConfigError(line_of(text, "kind"), "unknown kind \"" + root.at("kind").get<std::string>() + "\"");
  }
  if (!root.contains("seed")) throw ConfigError(1, "missing \"seed\" (a master seed is mandatory)");
  if (!root.at("seed").is_number_unsigned()) throw ConfigError(line_of(text, "seed"), "seed must be a nonnegative integer");

  ExperimentConfig c;
  c.kind = kind_it->second;
  c.seed = root.at("seed").get<std::uint64_t>();
  c.name = root.value("name", to_string(c.kind));
  c.out = root.value("out", std::string());
  c.samples = read_count(text, root, "samples", c.samples);
  c.profile_samples = read_count(text, root, "profile_samples", c.profile_samples);
  if (root.contains("t_grid")) {
    c.t_grid = read_grid(text, root, "t_grid");
    if (c.t_grid.front() < 0.0) throw ConfigError(line_of(text, "t_grid"), "t_grid must be nonnegative");
  }
  if (root.contains("p_grid")) {
    c.p_grid = read_grid(text, root, "p_grid");
    if (c.p_grid.front() < 2.0) throw ConfigError(line_of(text, "p_grid"), "p_grid entries must be at least 2");
  }
  if (root.contains("slack_se")) {
    if (!root.at("slack_se").is_number() || root.at("slack_se").get<double>() < 0.0) {
      throw ConfigError(line_of(text, "slack_se"), "slack_se must be a nonnegative number");
    }
    c.slack_se = root.at("slack_se").get<double>();
  }
  c.body = root;

  auto check_function = [&] {
    if (root.contains("function")) {
      check_section(text, "function", [&] { poly_from_json(root.at("function")); });
    } else if (root.contains("multilinear")) {
      check_section(text, "multilinear", [&] { from_multilinear(multilinear_from_json(root.at("multilinear"))); });
    } else {
      throw ConfigError(line_of(text, "kind"), "kind " + to_string(c.kind) + " requires \"function\" or \"multilinear\"");
    }
  };
  auto check_order = [&] {
    if (!root.at("d").is_number_unsigned() || root.at("d").get<std::size_t>() == 0) {
      throw ConfigError(line_of(text, "d"), "d must be a positive integer");
    }
  };
  auto check_measure = [&](std::size_t dim) {
    check_section(text, "measure", [&] {
      const MeasureSpec m = measure_from_json(root.at("measure"));
      if (dim != 0 && m.dim() != dim) throw InvalidInput("dimension differs from the function's");
    });
  };
  auto function_dim = [&] { return function_of(root).dim(); };

  switch (c.kind) {
    case ExperimentKind::tensor_norm:
      require(text, root, {"tensor"}, c.kind);
      check_section(text, "tensor", [&] { tensor_from_json(root.at("tensor")); });
      if (root.contains("mode")) {
        const auto mode = root.at("mode");
        if (!mode.is_string() || (mode != "iterative" && mode != "certified" && mode != "both")) {
          throw ConfigError(line_of(text, "mode"), "mode must be iterative, certified or both");
        }
      }
      break;
    case ExperimentKind::certify:
    case ExperimentKind::verify_tails:
      require(text, root, {"measure", "d"}, c.kind);
      check_function();
      check_order();
      check_measure(function_dim());
      if (c.kind == ExperimentKind::verify_tails && c.t_grid.empty()) {
        throw ConfigError(line_of(text, "kind"), "verify-tails requires \"t_grid\"");
      }
      break;
    case ExperimentKind::multilinear:
      require(text, root, {"measure", "multilinear", "t_grid"}, c.kind);
      check_function();
      check_measure(function_dim());
      break;
    case ExperimentKind::weighted:
      require(text, root, {"measure", "d", "p_grid"}, c.kind);
      check_function();
      check_order();
      check_measure(function_dim());
      if (!root.at("measure").contains("weight")) {
        throw ConfigError(line_of(text, "measure"), "weighted experiments need measure.weight");
      }
      if (root.contains("p_tail") && (!root.at("p_tail").is_number() || root.at("p_tail").get<double>() < 2.0)) {
        throw ConfigError(line_of(text, "p_tail"), "p_tail must be a number >= 2");
      }
      break;
    case ExperimentKind::rmt:
      require(text, root, {"N", "entry", "M", "M_cal", "f"}, c.kind);
      read_count(text, root, "N", 0);
      read_count(text, root, "M", 0);
      if (read_count(text, root, "M_cal", 0) < 500) throw ConfigError(line_of(text, "M_cal"), "M_cal must be at least 500");
      if (root.at("N").get<std::size_t>() < 2) throw ConfigError(line_of(text, "N"), "N must be at least 2");
      check_section(text, "entry", [&] {
        const CoordSpec e = coord_from_json(root.at("entry"));
        poincare_constant(e);
      });
      check_section(text, "f", [&] {
        const double l = rmt_function(root).second_derivative_sup();
        if (!(l > 0.0) || std::isinf(l)) throw InvalidInput("||f''||_inf must be finite and positive (degree exactly 2)");
      });
      break;
    case ExperimentKind::catalog_oracle:
      require(text, root, {"coord"}, c.kind);
      check_section(text, "coord", [&] { coord_from_json(root.at("coord")); });
      break;
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(1, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

namespace {

std::vector<double> evaluate(const PolyFunction& f, const Samples& xs) {
  std::vector<double> values(xs.rows);
  parallel_for(block_count(xs.rows), [&](std::size_t b) {
    const std::size_t end = std::min(xs.rows, (b + 1) * kBlockRows);
    for (std::size_t r = b * kBlockRows; r < end; ++r) values[r] = f(xs.row(r));
  });
  return values;
}

Curve make_curve(const std::string& name, const Certificate& cert, const EmpiricalReport& report,
                 bool expect_failure = false) {
  Curve curve;
  curve.name = name;
  curve.theorem = cert.theorem;
  curve.expect_failure = expect_failure;
  curve.t = report.x;
  for (double t : report.x) curve.bound.push_back(cert.evaluate(t));
  curve.empirical = report.estimate;
  curve.ci_low = report.ci_low;
  curve.ci_high = report.ci_high;
  return curve;
}

json profile_json(const DerivativeProfile& p) {
  json j = {{"d", p.order},
            {"sigma", p.sigma},
            {"norms2", p.norms2},
            {"norms2_se", p.norms2_se},
            {"hs2", p.hs2},
            {"hs2_se", p.hs2_se},
            {"centered_derivatives", p.centered_derivatives},
            {"mean_zero", p.mean_zero},
            {"top_inf_exact", p.top_inf_exact}};
  if (p.top_inf) j["top_inf"] = *p.top_inf;
  return j;
}

const Slack wilson_slack{Slack::Rule::wilson, 0.0, 0.0};

struct Collector {
  ExperimentResult result;
  json checks = json::array();

  void add(const std::string& label, const CheckLedger& ledger, bool counts = true) {
    json j = ledger;
    j["label"] = label;
    j["counts_toward_verdict"] = counts;
    checks.push_back(j);
    if (counts) result.pass = result.pass && ledger.pass;
  }
  void add_curve(const std::string& label, const Certificate& cert, const EmpiricalReport& report,
                 bool negative_control = false) {
    const CheckLedger ledger = check_certificate(cert, report, wilson_slack);
    json j = ledger;
    j["label"] = label;
    j["counts_toward_verdict"] = !negative_control;
    if (negative_control) {
      j["negative_control"] = true;
      j["negative_control_failed"] = !ledger.pass;
    }
    checks.push_back(j);
    if (!negative_control) result.pass = result.pass && ledger.pass;
    result.curves.push_back(make_curve(label, cert, report, negative_control));
  }
  ExperimentResult finish() {
    result.report["checks"] = checks;
    result.report["pass"] = result.pass;
    return std::move(result);
  }
};

void run_certify(const ExperimentConfig& c, Collector& out) {
  const MeasureSpec measure = measure_from_json(c.body.at("measure"));
  const PolyFunction f = function_of(c.body);
  const std::size_t d = c.body.at("d").get<std::size_t>();
  const DerivativeProfile profile =
      profile_from_function(f, measure, d, c.profile_samples, derive_seed(c.seed, "profile"));
  const std::vector<double> values = evaluate(f, sample(measure, c.samples, derive_seed(c.seed, "evaluation")));
  const Slack se_slack{Slack::Rule::se_multiple, c.slack_se, 0.0};

  json& r = out.result.report;
  r["profile"] = profile_json(profile);
  r["certificates"] = json::object();

  if (c.kind == ExperimentKind::certify) {
    const Certificate cert = exp_moment_certificate(profile);
    r["certificates"]["exp_moment"] = cert;
    const EmpiricalReport report = exp_moment_report(values, cert);
    r["empirical"]["exp_moment"] = report;
    out.add("exp_moment", check_certificate(cert, report, se_slack));
  }
  if (!c.p_grid.empty()) {
    const Certificate cert = moment_certificate(profile);
    r["certificates"]["moment"] = cert;
    const EmpiricalReport report = moment_report(values, c.p_grid);
    r["empirical"]["moment"] = report;
    out.add("moment", check_certificate(cert, report, se_slack));
  }
  if (!c.t_grid.empty()) {
    const Certificate cert = korr_tail_certificate(profile);
    r["certificates"]["korr_tail"] = cert;
    out.add_curve("korr", cert, tail_report(values, c.t_grid));
  }
}

void run_multilinear(const ExperimentConfig& c, Collector& out) {
  const MeasureSpec measure = measure_from_json(c.body.at("measure"));
  const MultilinearSpec spec = multilinear_from_json(c.body.at("multilinear"));
  const Multilinear ml = from_multilinear(spec);
  const MultilinearCertificates certs = multilinear_certificate(spec, measure);
  const DerivativeProfile profile =
      profile_from_function(ml.function, measure, spec.order, c.profile_samples, derive_seed(c.seed, "profile"));
  const std::vector<double> values =
      evaluate(ml.function, sample(measure, c.samples, derive_seed(c.seed, "evaluation")));
  const Slack se_slack{Slack::Rule::se_multiple, c.slack_se, 0.0};

  json& r = out.result.report;
  const double n = static_cast<double>(spec.dim);
  const double inf_scale = std::pow(n, static_cast<double>(spec.order) / 2.0) * certs.inf;
  r["hypermatrix"] = {{"hs", certs.hs},
                      {"inf", certs.inf},
                      {"n_pow_d_half_inf", inf_scale},
                      {"hs_le_n_pow_d_half_inf", certs.hs <= inf_scale}};
  r["profile"] = profile_json(profile);
  r["certificates"] = {{"exp_hs", certs.exp_hs}, {"exp_inf", certs.exp_inf}};
  out.add("exp_hs", check_certificate(certs.exp_hs, exp_moment_report(values, certs.exp_hs), se_slack));
  out.add("exp_inf", check_certificate(certs.exp_inf, exp_moment_report(values, certs.exp_inf), se_slack));

  const EmpiricalReport tails = tail_report(values, c.t_grid);
  const Certificate korr = korr_tail_certificate(profile);
  r["certificates"]["korr_tail"] = korr;
  out.add_curve("korr", korr, tails);
  if (certs.tail_hs) {
    r["certificates"]["tail_hs"] = *certs.tail_hs;
    r["certificates"]["tail_inf"] = *certs.tail_inf;
    out.add_curve("hs", *certs.tail_hs, tails);
    out.add_curve("inf", *certs.tail_inf, tails);
  } else {
    r["notes"].push_back("tail forms of the multilinear certificate need unit-variance inputs; skipped");
  }
  if (c.body.value("negative_control", false)) {
    DerivativeProfile wrong = profile;
    wrong.sigma /= 10.0;
    const Certificate cert = korr_tail_certificate(wrong);
    out.add_curve("korr-sigma-over-10", cert, tails, true);
  }
}

// Monte Carlo L^q norm of per-sample values.
double lq(const std::vector<double>& v, double q) {
  CompensatedSum s;
  for (double x : v) s.add(std::pow(std::fabs(x), q));
  return std::pow(s.value() / static_cast<double>(v.size()), 1.0 / q);
}

void run_weighted(const ExperimentConfig& c, Collector& out) {
  const MeasureSpec measure = measure_from_json(c.body.at("measure"));
  const PolyFunction f = function_of(c.body);
  const std::size_t d = c.body.at("d").get<std::size_t>();
  const double p_tail = c.body.value("p_tail", 2.0);
  json& r = out.result.report;

  auto moment = [&](std::size_t i, int k) { return raw_moment(measure.coords[i], k); };
  if (std::fabs(expectation(f, moment)) > 1e-10) throw MissingHypothesis("weighted bounds need f with mean zero");

  // derivative norms at profile sample points
  const std::size_t m = c.profile_samples;
  const Samples xs = sample(measure, m, derive_seed(c.seed, "profile"));
  std::vector<DerivativeField> fields;
  for (std::size_t k = 1; k <= d; ++k) fields.emplace_back(f, k);
  std::vector<std::vector<double>> op(d, std::vector<double>(m));
  std::vector<double> weights(m);
  OpNormOptions pointwise;
  pointwise.restarts = 8;
  parallel_for(block_count(m), [&](std::size_t b) {
    const std::size_t end = std::min(m, (b + 1) * kBlockRows);
    for (std::size_t i = b * kBlockRows; i < end; ++i) {
      weights[i] = weight_at(measure, xs.row(i));
      for (std::size_t k = 1; k <= d; ++k) op[k - 1][i] = pointwise_op_norm(fields[k - 1].at(xs.row(i)), pointwise);
    }
  });
  std::vector<double> norms2;
  for (std::size_t k = 1; k < d; ++k) norms2.push_back(lq(op[k - 1], 2.0));
  const bool top_constant = fields.back().is_constant();
  const double top_inf = *std::max_element(op[d - 1].begin(), op[d - 1].end());
  std::vector<double> mixed(m);
  for (std::size_t i = 0; i < m; ++i) mixed[i] = weights[i] * op[d - 1][i];

  const std::vector<double> values = evaluate(f, sample(measure, c.samples, derive_seed(c.seed, "evaluation")));
  const std::uint64_t wseed = derive_seed(c.seed, "weight");

  r["kappa"] = measure.weight->value;
  r["norms2"] = norms2;
  r["top_inf"] = top_inf;
  r["top_inf_exact"] = top_constant;

  // Prop 1.4, both displays, one row per p
  std::map<double, double> first, second;
  json rows = json::array();
  for (double p : c.p_grid) {
    WeightedProfile wp;
    wp.order = d;
    wp.p = p;
    wp.norms2 = norms2;
    json row = {{"p", p}};
    bool divergent = false;
    for (std::size_t k = 1; k <= d; ++k) {
      const double q = std::ldexp(p, static_cast<int>(k));
      const NormEstimate w = weighted_norm(measure, q, m, wseed);
      row["wnorm"][format_number(q)] = {{"estimate", w.estimate}, {"se", w.se}, {"divergent", w.divergent}};
      if (w.divergent) {
        divergent = true;
        continue;
      }
      wp.wnorms[k] = w.estimate;
    }
    wp.top_mixed = lq(mixed, std::ldexp(p, static_cast<int>(d) - 1));
    wp.top2dp = top_constant ? top_inf : lq(op[d - 1], std::ldexp(p, static_cast<int>(d)));
    row["top_mixed"] = *wp.top_mixed;
    row["top2dp"] = *wp.top2dp;
    try {
      const WeightedBounds bounds = weighted_moment(wp);
      first[p] = *bounds.first;
      second[p] = *bounds.second;
      row["bound_first"] = *bounds.first;
      row["bound_second"] = *bounds.second;
      row["bound_iterated"] = weighted_moment_iterated(wp);
    } catch (const MissingHypothesis& e) {
      row["missing"] = e.what();
    }
    row["divergent_weight_norm"] = divergent;
    rows.push_back(row);
  }
  r["moments"] = rows;

  std::vector<double> ps;
  for (const auto& [p, b] : first) ps.push_back(p);
  if (!ps.empty()) {
    const EmpiricalReport report = moment_report(values, ps);
    r["empirical"]["moment"] = report;
    const Slack se_slack{Slack::Rule::se_multiple, c.slack_se, 0.0};
    for (const auto& [label, table] : {std::pair{"first", &first}, std::pair{"second", &second}}) {
      Certificate cert;
      cert.kind = CertificateKind::moment;
      cert.theorem = "1.4";
      const auto values_at = *table;
      cert.evaluator = [values_at](double p) { return values_at.at(p); };
      out.add(std::string("moment_") + label, check_certificate(cert, report, se_slack));
    }
  }

  // Cor 1.5: f / lambda meets (Bed1) with sigma = 1 and (Bed2)
  if (!c.t_grid.empty()) {
    const NormEstimate w = weighted_norm(measure, std::ldexp(p_tail, static_cast<int>(d)), m, wseed);
    if (w.divergent) throw MissingHypothesis("weighted tail: ||w||_{2^d p} appears infinite");
    const double threshold = d >= 2 ? std::pow(2.0, -(static_cast<double>(d) - 1.0) / 2.0) : 0.0;
    const double c_bound = std::max(w.estimate + 3.0 * w.se, threshold);
    double lambda = std::max(1.0, top_inf);
    for (double v : norms2) lambda = std::max(lambda, v);
    const Certificate base = weighted_tail_certificate(c_bound, p_tail, d);
    Certificate cert = base;
    cert.rescale_lambda = lambda;
    cert.constants["lambda"] = lambda;
    cert.evaluator = [base, lambda](double t) { return base.evaluate(t / lambda); };
    r["certificates"]["weighted_tail"] = cert;
    r["weighted_tail"] = {{"C", c_bound},
                          {"p", p_tail},
                          {"lambda", lambda},
                          {"window_upper", lambda * weighted_tail_range(c_bound, p_tail, d)}};
    out.add_curve("weighted", cert, tail_report(values, c.t_grid));
  }
}

void run_rmt(const ExperimentConfig& c, Collector& out) {
  WignerEnsemble ens;
  ens.n = c.body.at("N").get<std::size_t>();
  ens.entry = coord_from_json(c.body.at("entry"));
  const std::size_t draws = c.body.at("M").get<std::size_t>();
  const std::size_t cal_draws = c.body.at("M_cal").get<std::size_t>();
  const UnivariatePoly f = rmt_function(c.body);

  const Calibration cal = calibrate(ens, f, cal_draws, derive_seed(c.seed, "calibration"));
  const EigenSample es = sample_ensemble(ens, draws, derive_seed(c.seed, "evaluation"));
  const std::vector<double> s = linear_stat(es, f, cal);
  const std::vector<double> st = recentered_stat(es, f, cal);
  const RmtCertificates certs = rmt_certificates(ens, f.second_derivative_sup(), cal.gradient_sq);

  json& r = out.result.report;
  const Summary s_sum = summarize(s), st_sum = summarize(st);
  r["ensemble"] = {{"N", ens.n},
                   {"entry", ens.entry},
                   {"sigma2", ens.sigma2()},
                   {"sigma_n2", es.sigma_n2},
                   {"draws", es.draws},
                   {"discarded", es.discarded},
                   {"calibration_draws", cal.draws},
                   {"calibration_discarded", cal_draws - cal.draws}};
  r["calibration"] = {{"gradient_sq", cal.gradient_sq}, {"offset_se", cal.offset_se}};
  r["certificates"] = {{"exp_moment", certs.exp_moment}, {"tail", certs.tail}};

  // calibration error enters through the recentring constant
  const double a = certs.exp_moment.coefficient();
  const ExpMomentEstimate e = empirical_exp_moment(st, a, 0.5, true);
  std::vector<double> shifted(st.size());
  std::transform(st.begin(), st.end(), shifted.begin(), [&](double v) { return v + cal.offset_se; });
  const double up = empirical_exp_moment(shifted, a, 0.5, true).value;
  std::transform(st.begin(), st.end(), shifted.begin(), [&](double v) { return v - cal.offset_se; });
  const double down = empirical_exp_moment(shifted, a, 0.5, true).value;
  const double cal_se = std::fabs(up - down) / 2.0;

  EmpiricalReport report = exp_moment_report(st, certs.exp_moment, true);
  report.unstable = e.unstable;
  out.add("exp_moment", check_certificate(certs.exp_moment, report, {Slack::Rule::se_multiple, c.slack_se, cal_se}));
  r["exp_moment"] = {{"estimate", e.value}, {"se", e.se}, {"calibration_se", cal_se}, {"unstable", e.unstable}};

  const bool variance_drop = st_sum.variance < s_sum.variance;
  const double mean_se = std::hypot(st_sum.standard_error, cal.offset_se);
  const bool centered = std::fabs(st_sum.mean) <= 5.0 * mean_se;
  r["statistics"] = {{"var_S", s_sum.variance},
                     {"var_S_tilde", st_sum.variance},
                     {"mean_S", s_sum.mean},
                     {"mean_S_tilde", st_sum.mean},
                     {"mean_S_tilde_se", mean_se},
                     {"var_S_tilde_below_var_S", variance_drop},
                     {"S_tilde_centered_within_5se", centered}};
  out.result.pass = out.result.pass && variance_drop && centered;

  if (!c.t_grid.empty()) out.add_curve("sn", certs.tail, tail_report(s, c.t_grid));

  std::string csv = "draw,S_N,S_tilde_N\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    csv += std::to_string(i) + ',' + format_number(s[i]) + ',' + format_number(st[i]) + '\n';
  }
  out.result.tables.push_back({"stats.csv", csv});
}

void run_tensor_norm(const ExperimentConfig& c, Collector& out) {
  const SymTensor t = tensor_from_json(c.body.at("tensor"));
  const std::string mode = c.body.value("mode", std::string("both"));
  OpNormOptions options;
  options.seed = derive_seed(c.seed, "op-norm");
  json& r = out.result.report;
  r["order"] = t.order();
  r["dim"] = t.dim();
  r["hs_norm"] = hs_norm(t);
  r["max_abs_entry"] = max_abs_entry(t);
  std::optional<double> iterative, certified;
  if (mode != "certified") iterative = op_norm(t, OpNormMode::iterative, options);
  if (mode != "iterative") {
    try {
      certified = op_norm(t, OpNormMode::certified, options);
    } catch (const UnsupportedSize& e) {
      if (mode == "certified") throw;
      r["certified_unavailable"] = e.what();
    }
  }
  if (iterative) r["op_norm_iterative"] = *iterative;
  if (certified) r["op_norm_certified"] = *certified;
  if (iterative && certified) {
    const double rel = std::fabs(*iterative - *certified) / std::max(*certified, 1e-300);
    r["relative_difference"] = rel;
    out.result.pass = rel <= 1e-4;
  }
  const double op = iterative ? *iterative : *certified;
  r["op_le_hs"] = op <= hs_norm(t) * (1.0 + 1e-12);
}

double closed_form_sigma2(const CoordSpec& c) {
  switch (c.dist) {
    case Dist::gaussian: return c.scale * c.scale;
    case Dist::laplace: return 4.0 * c.scale * c.scale;
    case Dist::exponential: return 4.0 * c.scale * c.scale;
    case Dist::uniform01: return c.scale * c.scale / (std::numbers::pi * std::numbers::pi);
    default: return std::nan("");
  }
}

void run_catalog_oracle(const ExperimentConfig& c, Collector& out) {
  const CoordSpec coord = coord_from_json(c.body.at("coord"));
  json& r = out.result.report;
  OracleReport report;
  if (coord.dist == Dist::student) {
    report = student_weight_oracle(coord);
    r["quantity"] = "kappa2 of the weight kappa sqrt(1 + x^2)";
  } else {
    report = catalog_oracle(coord);
    r["quantity"] = "Poincare constant";
    r["closed_form_sigma2"] = closed_form_sigma2(coord);
    r["relative_difference"] = std::fabs(report.sigma2 - closed_form_sigma2(coord)) / closed_form_sigma2(coord);
  }
  r["coord"] = coord;
  r["lambda1"] = report.lambda1;
  r["sigma2"] = report.sigma2;
  r["reliable"] = report.reliable;
  r["interval"] = {report.lower, report.upper};
  json steps = json::array();
  for (const auto& s : report.steps) steps.push_back({{"gridpoints", s.gridpoints}, {"lambda1", s.lambda1}, {"sigma2", s.sigma2}});
  r["steps"] = steps;
  out.result.pass = report.reliable;
  out.result.tables.push_back({"oracle.csv", report.csv()});
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  Collector out;
  json& r = out.result.report;
  r["schema"] = kConfigSchema;
  r["kind"] = to_string(config.kind);
  r["name"] = config.name;
  r["seed"] = config.seed;
  r["samples"] = config.samples;
  r["config"] = config.body;
  r["config"]["seed"] = config.seed;
  if (config.kind != ExperimentKind::rmt && config.body.contains("samples")) r["config"]["samples"] = config.samples;
  r["constants"] = {{"c", kUniversalC}};
  r["slack"] = {{"tails", wilson_slack.describe()},
                {"moments", Slack{Slack::Rule::se_multiple, config.slack_se, 0.0}.describe()}};
  switch (config.kind) {
    case ExperimentKind::certify:
    case ExperimentKind::verify_tails: run_certify(config, out); break;
    case ExperimentKind::multilinear: run_multilinear(config, out); break;
    case ExperimentKind::weighted: run_weighted(config, out); break;
    case ExperimentKind::rmt: run_rmt(config, out); break;
    case ExperimentKind::tensor_norm: run_tensor_norm(config, out); break;
    case ExperimentKind::catalog_oracle: run_catalog_oracle(config, out); break;
  }
  return out.finish();
}

void write_artifacts(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json report = result.report;
  json files = json::array();
  for (const Curve& curve : result.curves) {
    const std::string csv = tail_csv(curve);
    const std::string stem = "tail-" + curve.name;
    write_file(dir / (stem + ".csv"), csv);
    write_file(dir / (stem + ".svg"), tail_svg(csv, curve.name + " (Theorem " + curve.theorem + ")"));
    files.push_back(stem + ".csv");
    files.push_back(stem + ".svg");
  }
  for (const ExtraTable& t : result.tables) {
    write_file(dir / t.filename, t.content);
    files.push_back(t.filename);
  }
  report["artifacts"] = files;
  write_file(dir / "report.json", report.dump(2) + "\n");
}

// Fixture inventory -------------------------------------------------------

namespace {

json gaussian_measure(std::size_t n) {
  return {{"dim", n}, {"coords", {{{"dist", "gaussian"}, {"params", {{"mean", 0.0}, {"sd", 1.0}}}}}}};
}

json unit_laplace_measure(std::size_t n) {
  return {{"dim", n},
          {"coords", {{{"dist", "laplace"}, {"params", {{"loc", 0.0}, {"scale", std::numbers::sqrt2 / 2.0}}}}}}};
}

json base_config(const std::string& name, const std::string& kind, std::uint64_t seed) {
  return {{"schema", kConfigSchema}, {"kind", kind}, {"name", name}, {"seed", seed}};
}

// Random multilinear chaos with coefficients rounded to 1e-6.
json random_chaos(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed, 0);
  json coeffs = json::array();
  std::vector<std::size_t> idx(d);
  for (std::size_t i = 0; i < d; ++i) idx[i] = i;
  while (true) {
    const double v = std::round(rng.normal() * 1e6) / 1e6;
    coeffs.push_back({{"index", idx}, {"value", v}});
    // next strictly increasing tuple
    std::size_t pos = d;
    while (pos > 0 && idx[pos - 1] == n - d + pos - 1) --pos;
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t i = pos; i < d; ++i) idx[i] = idx[i - 1] + 1;
  }
  return {{"dim", n}, {"order", d}, {"coeffs", coeffs}};
}

std::vector<Fixture> build_fixtures() {
  std::vector<Fixture> out;
  const json x1x2 = {{"dim", 2}, {"terms", {{{"exponents", {1, 1}}, {"coeff", std::numbers::sqrt2 / 2.0}}}}};

  {
    json c = base_config("gaussian-x1x2-expmoment", "certify", 20240101);
    c["measure"] = gaussian_measure(2);
    c["function"] = x1x2;
    c["d"] = 2;
    c["samples"] = 1000000;
    c["slack_se"] = 3.0;
    c["p_grid"] = {2.0, 3.0, 4.0};
    c["t_grid"] = {0.5, 1.0, 2.0, 4.0, 8.0};
    out.push_back({"gaussian-x1x2-expmoment", "1.1", "REFERENCE",
                   "f = x1 x2 / sqrt 2 under the standard 2-D gaussian; E exp(c |f|^{1/2}) <= 2 with c = 1/(12e)", c});
  }
  {
    json c = base_config("gaussian-x1x2-tails", "verify-tails", 20240102);
    c["measure"] = gaussian_measure(2);
    c["function"] = x1x2;
    c["d"] = 2;
    c["samples"] = 1000000;
    c["t_grid"] = {0.5, 1.0, 2.0, 4.0, 8.0};
    out.push_back({"gaussian-x1x2-tails", "1.3", "DERIVED",
                   "eta_f tail certificate for x1 x2 / sqrt 2 against 10^6 gaussian samples", c});
  }
  {
    const json cubic = {{"dim", 3},
                        {"terms",
                         {{{"exponents", {1, 1, 1}}, {"coeff", 1.0}},
                          {{"exponents", {3, 0, 0}}, {"coeff", 0.5}},
                          {{"exponents", {1, 0, 0}}, {"coeff", -1.5}}}}};
    json c = base_config("gaussian-cubic-centered", "certify", 20240103);
    c["measure"] = gaussian_measure(3);
    c["function"] = cubic;
    c["d"] = 3;
    c["samples"] = 1000000;
    c["p_grid"] = {2.0, 4.0};
    c["t_grid"] = {0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
    out.push_back({"gaussian-cubic-centered", "1.2", "DERIVED",
                   "x1 x2 x3 + (x1^3 - 3 x1) / 2: centered partials, Hilbert-Schmidt route compared with the "
                   "operator route",
                   c});
  }

  std::uint64_t seed = 20240200;
  for (const std::size_t d : {2u, 3u}) {
    for (const std::size_t n : {d == 2 ? 2u : 3u, 5u, 10u}) {
      const json chaos = random_chaos(n, d, 7000 + 100 * d + n);
      double var = 0.0;
      for (const auto& e : chaos.at("coeffs")) var += std::pow(e.at("value").get<double>(), 2);
      const double sd = std::sqrt(var);
      json grid = json::array();
      for (int j = 0; j < 12; ++j) grid.push_back(sd * std::pow(2.0, (j - 4) / 2.0));
      for (const std::string law : {"gaussian", "laplace"}) {
        const std::string name = "chaos-d" + std::to_string(d) + "-n" + std::to_string(n) + "-" + law;
        json c = base_config(name, "multilinear", ++seed);
        c["measure"] = law == "gaussian" ? gaussian_measure(n) : unit_laplace_measure(n);
        c["multilinear"] = chaos;
        c["samples"] = 1000000;
        c["t_grid"] = grid;
        c["negative_control"] = true;
        out.push_back({name, "1.3,3.1", "DERIVED",
                       "order-" + std::to_string(d) + " multilinear chaos on " + std::to_string(n) + " unit-variance " +
                           law + " coordinates, fixed-seed coefficients",
                       c});
      }
    }
  }

  const json student_weight = {{"kind", "sqrt1px2"}, {"params", {{"kappa", "certify"}}}};
  {
    json c = base_config("student-d1", "weighted", 20240301);
    c["measure"] = {{"dim", 1}, {"coords", {{{"dist", "student"}, {"params", {{"alpha", 20.0}}}}}}, {"weight", student_weight}};
    c["function"] = {{"dim", 1}, {"terms", {{{"exponents", {1}}, {"coeff", 1.0}}}}};
    c["d"] = 1;
    c["samples"] = 1000000;
    c["p_grid"] = {2.0, 4.0};
    c["t_grid"] = {0.05, 0.1, 0.2, 0.4, 0.8, 1.6, 3.2, 6.4};
    out.push_back({"student-d1", "1.4,1.5", "DERIVED",
                   "f = x under the density (1 + x^2)^{-20} with weight kappa sqrt(1 + x^2), kappa from the weighted "
                   "oracle",
                   c});
  }
  {
    json c = base_config("student-d2", "weighted", 20240302);
    c["measure"] = {{"dim", 2}, {"coords", {{{"dist", "student"}, {"params", {{"alpha", 20.0}}}}}}, {"weight", student_weight}};
    c["function"] = {{"dim", 2}, {"terms", {{{"exponents", {1, 1}}, {"coeff", 1.0}}}}};
    c["d"] = 2;
    c["samples"] = 1000000;
    c["p_grid"] = {2.0, 4.0};
    c["t_grid"] = {0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0};
    out.push_back({"student-d2", "1.4,1.5", "DERIVED",
                   "f = x1 x2 under the 2-D product of (1 + x^2)^{-20} densities with the max-combined weight", c});
  }

  for (const std::size_t n : {50u, 100u, 200u}) {
    const std::string name = "wigner-gaussian-n" + std::to_string(n);
    json c = base_config(name, "rmt", 20240400 + n);
    c["N"] = n;
    c["entry"] = {{"dist", "gaussian"}, {"params", {{"mean", 0.0}, {"sd", 1.0}}}};
    c["M"] = n == 200 ? 1000 : 2000;
    c["M_cal"] = n == 200 ? 1000 : 2000;
    c["f"] = {{"kind", "polynomial"}, {"coeffs", {0.0, 0.0, 0.5}}};
    c["t_grid"] = {1.0, 2.0, 4.0};
    c["slack_se"] = 3.0;
    out.push_back({name, "3.2", "DERIVED",
                   "f(x) = x^2 / 2 linear statistic of a gaussian Wigner matrix, N = " + std::to_string(n), c});
  }
  return out;
}

}  // namespace

const std::vector<Fixture>& list_fixtures() {
  static const std::vector<Fixture> fixtures = build_fixtures();
  return fixtures;
}

std::optional<Fixture> find_fixture(const std::string& name) {
  for (const auto& f : list_fixtures()) {
    if (f.name == name) return f;
  }
  return std::nullopt;
}

std::string fixture_inventory() {
  std::string out;
  for (const auto& f : list_fixtures()) {
    out += f.name + '\t' + f.route + '\t' + f.provenance + '\t' + f.description + '\n';
  }
  return out;
}

}  // namespace hoc
