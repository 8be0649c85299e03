#pragma once

#include <filesystem>
#include <string>

namespace hoc {

struct Curve;

/// %.17g, with "inf", "-inf" and "nan" spelled out.
std::string format_number(double v);

/// Columns t,bound,empirical,ci_low,ci_high.
std::string tail_csv(const Curve& curve);

/// Log-scale plot of bound and empirical tail. Reads its numbers from the CSV
/// text and carries each row's fields verbatim as data attributes.
std::string tail_svg(const std::string& csv, const std::string& title);

void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace hoc
