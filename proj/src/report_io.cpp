#include "hoc/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "hoc/error.hpp"
#include "hoc/experiments.hpp"

namespace hoc {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string tail_csv(const Curve& curve) {
  std::string out = "t,bound,empirical,ci_low,ci_high\n";
  for (std::size_t i = 0; i < curve.t.size(); ++i) {
    out += format_number(curve.t[i]) + ',' + format_number(curve.bound[i]) + ',' +
           format_number(curve.empirical[i]) + ',' + format_number(curve.ci_low[i]) + ',' +
           format_number(curve.ci_high[i]) + '\n';
  }
  return out;
}

namespace {

std::vector<std::vector<std::string>> split_csv(const std::string& csv) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);  // header
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) fields.push_back(cell);
    if (fields.size() != 5) throw InvalidInput("tail_svg: malformed CSV row: " + line);
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

std::string tail_svg(const std::string& csv, const std::string& title) {
  const auto rows = split_csv(csv);
  constexpr double width = 640, height = 420, left = 70, right = 20, top = 40, bottom = 50;
  constexpr double floor_log = -7.0;  // probabilities below 1e-7 sit on the axis

  double t_min = 0.0, t_max = 1.0;
  if (!rows.empty()) {
    t_min = std::stod(rows.front()[0]);
    t_max = std::stod(rows.back()[0]);
    if (t_max <= t_min) t_max = t_min + 1.0;
  }
  auto px = [&](double t) { return left + (t - t_min) / (t_max - t_min) * (width - left - right); };
  auto py = [&](double prob) {
    const double l = prob > 0.0 ? std::max(floor_log, std::log10(prob)) : floor_log;
    return top + (0.0 - l) / (0.0 - floor_log) * (height - top - bottom);
  };
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" viewBox=\"0 0 640 420\">\n";
  svg += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
  svg += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
         title + "</text>\n";
  // axes and decade grid
  svg += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(height - bottom) + "\" x2=\"" + fmt(width - right) +
         "\" y2=\"" + fmt(height - bottom) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(top) + "\" x2=\"" + fmt(left) + "\" y2=\"" +
         fmt(height - bottom) + "\" stroke=\"black\"/>\n";
  for (int decade = 0; decade >= static_cast<int>(floor_log); --decade) {
    const double y = py(std::pow(10.0, decade));
    svg += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(width - right) + "\" y2=\"" +
           fmt(y) + "\" stroke=\"#ddd\"/>\n";
    svg += "<text x=\"" + fmt(left - 6) + "\" y=\"" + fmt(y + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">1e" + std::to_string(decade) +
           "</text>\n";
  }
  svg += "<text x=\"" + fmt(left) + "\" y=\"" + fmt(height - bottom + 18) +
         "\" font-family=\"sans-serif\" font-size=\"10\">" + (rows.empty() ? "" : rows.front()[0]) + "</text>\n";
  svg += "<text x=\"" + fmt(width - right) + "\" y=\"" + fmt(height - bottom + 18) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" +
         (rows.empty() ? "" : rows.back()[0]) + "</text>\n";
  svg += "<text x=\"320\" y=\"" + fmt(height - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">t</text>\n";

  std::string bound_path, empirical_path;
  for (const auto& r : rows) {
    const double x = px(std::stod(r[0]));
    bound_path += fmt(x) + ',' + fmt(py(std::stod(r[1]))) + ' ';
    empirical_path += fmt(x) + ',' + fmt(py(std::stod(r[2]))) + ' ';
  }
  svg += "<polyline fill=\"none\" stroke=\"#c0392b\" stroke-width=\"2\" points=\"" + bound_path + "\"/>\n";
  svg += "<polyline fill=\"none\" stroke=\"#2c3e50\" stroke-width=\"1.5\" stroke-dasharray=\"4 3\" points=\"" +
         empirical_path + "\"/>\n";
  for (const auto& r : rows) {
    const double x = px(std::stod(r[0]));
    svg += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(py(std::stod(r[3]))) + "\" x2=\"" + fmt(x) + "\" y2=\"" +
           fmt(py(std::stod(r[4]))) + "\" stroke=\"#2c3e50\"/>\n";
    svg += "<circle cx=\"" + fmt(x) + "\" cy=\"" + fmt(py(std::stod(r[2]))) +
           "\" r=\"3\" fill=\"#2c3e50\" data-t=\"" + r[0] + "\" data-bound=\"" + r[1] + "\" data-empirical=\"" +
           r[2] + "\" data-ci-low=\"" + r[3] + "\" data-ci-high=\"" + r[4] + "\"/>\n";
  }
  svg += "<text x=\"" + fmt(width - right - 150) + "\" y=\"" + fmt(top + 14) +
         "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#c0392b\">certificate</text>\n";
  svg += "<text x=\"" + fmt(width - right - 150) + "\" y=\"" + fmt(top + 30) +
         "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#2c3e50\">empirical (95% Wilson)</text>\n";
  svg += "</svg>\n";
  return svg;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace hoc
