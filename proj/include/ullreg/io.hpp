#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ullreg/design.hpp"
#include "ullreg/estimators.hpp"
#include "ullreg/functional.hpp"
#include "ullreg/scenario.hpp"

namespace ullreg {

/// Malformed input, with the 1-based line and column of the first problem
/// (column 0 when the whole line is at fault).
class ParseError : public std::invalid_argument {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column);
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Two numeric columns z,x. A first line that does not parse as numbers is
/// taken as a header. Blank lines are skipped.
struct XyData {
  std::vector<double> z;
  std::vector<double> x;
};
XyData read_xy_csv(std::istream& in);

/// Trajectory batch with a header naming copy_id, z and x (any order).
/// Copies are returned in order of first appearance.
std::vector<XyData> read_batch_csv(std::istream& in);

/// Smallest interval holding every z, widened to `domain` when given.
Domain resolve_domain(const std::vector<double>& z, std::optional<Domain> domain);

void write_curve_csv(std::ostream& out, const FittedCurve& curve);
void write_mean_csv(std::ostream& out, const MeanCurve& mean);
void write_surface_csv(std::ostream& out, const Surface& surface);
void write_xy_csv(std::ostream& out, const std::vector<double>& z,
                  const std::vector<double>& x);

/// Scenario files: every field optional, defaults come from `base`.
/// Throws ParseError on malformed JSON and std::invalid_argument on bad
/// field values.
Scenario parse_scenario_json(std::string_view text, const Scenario& base = {});
std::string scenario_to_json(const Scenario& scenario);

/// Preset id ("example2") or path to a JSON file.
Scenario load_scenario(const std::string& id_or_path);

}  // namespace ullreg
