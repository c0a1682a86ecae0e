#include "ullreg/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "ullreg/study.hpp"

namespace ullreg {

ParseError::ParseError(const std::string& what, std::size_t line, std::size_t column)
    : std::invalid_argument("line " + std::to_string(line) +
                            (column > 0 ? ", column " + std::to_string(column) : "") +
                            ": " + what),
      line_(line),
      column_(column) {}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> to_number(std::string_view field) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) return std::nullopt;
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

bool blank(std::string_view line) { return trim(line).empty(); }

}  // namespace

XyData read_xy_csv(std::istream& in) {
  XyData data;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 2) {
      throw ParseError("expected 2 fields z,x, found " + std::to_string(fields.size()),
                       lineno, 0);
    }
    const auto z = to_number(fields[0]);
    const auto x = to_number(fields[1]);
    if (first && !z && !x) {
      first = false;
      continue;
    }
    first = false;
    if (!z) throw ParseError("not a finite number: '" + std::string(fields[0]) + "'", lineno, 1);
    if (!x) throw ParseError("not a finite number: '" + std::string(fields[1]) + "'", lineno, 2);
    data.z.push_back(*z);
    data.x.push_back(*x);
  }
  if (data.z.empty()) throw ParseError("no data rows", lineno, 0);
  return data;
}

std::vector<XyData> read_batch_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!blank(line)) break;
  }
  if (blank(line)) throw ParseError("empty batch file", lineno, 0);
  const auto header = split_fields(line);
  int col_id = -1;
  int col_z = -1;
  int col_x = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "copy_id") col_id = static_cast<int>(c);
    if (header[c] == "z") col_z = static_cast<int>(c);
    if (header[c] == "x") col_x = static_cast<int>(c);
  }
  if (col_id < 0) throw ParseError("header has no copy_id column", lineno, 0);
  if (col_z < 0 || col_x < 0) throw ParseError("header needs z and x columns", lineno, 0);

  std::vector<XyData> copies;
  std::map<std::string, std::size_t, std::less<>> index;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       lineno, 0);
    }
    const auto z = to_number(fields[col_z]);
    const auto x = to_number(fields[col_x]);
    if (!z) throw ParseError("z is not a finite number", lineno, col_z + 1);
    if (!x) throw ParseError("x is not a finite number", lineno, col_x + 1);
    const std::string id(fields[col_id]);
    if (id.empty()) throw ParseError("empty copy_id", lineno, col_id + 1);
    auto it = index.find(id);
    if (it == index.end()) {
      it = index.emplace(id, copies.size()).first;
      copies.emplace_back();
    }
    copies[it->second].z.push_back(*z);
    copies[it->second].x.push_back(*x);
  }
  if (copies.empty()) throw ParseError("no data rows", lineno, 0);
  return copies;
}

Domain resolve_domain(const std::vector<double>& z, std::optional<Domain> domain) {
  if (z.empty()) throw std::invalid_argument("no design points");
  const auto [lo, hi] = std::minmax_element(z.begin(), z.end());
  if (domain) {
    if (!(domain->lo < domain->hi)) throw std::invalid_argument("domain needs lo < hi");
    if (*lo < domain->lo || *hi > domain->hi) {
      throw std::invalid_argument("design points fall outside the declared domain");
    }
    return *domain;
  }
  return Domain{*lo, *hi};
}

void write_curve_csv(std::ostream& out, const FittedCurve& curve) {
  out << "t,estimate,valid\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out << format_double(curve.grid[i]) << ','
        << (curve.valid[i] ? format_double(curve.values[i]) : std::string("nan")) << ','
        << static_cast<int>(curve.valid[i]) << '\n';
  }
}

void write_mean_csv(std::ostream& out, const MeanCurve& mean) {
  out << "t,estimate,count\n";
  for (std::size_t i = 0; i < mean.grid.size(); ++i) {
    out << format_double(mean.grid[i]) << ','
        << (mean.valid(i) ? format_double(mean.values[i]) : std::string("nan")) << ','
        << mean.counts[i] << '\n';
  }
}

void write_surface_csv(std::ostream& out, const Surface& surface) {
  out << "t1,t2,value,count\n";
  for (std::size_t i = 0; i < surface.grid1.size(); ++i) {
    for (std::size_t j = 0; j < surface.grid2.size(); ++j) {
      const std::size_t cell = i * surface.grid2.size() + j;
      out << format_double(surface.grid1[i]) << ',' << format_double(surface.grid2[j])
          << ','
          << (surface.counts[cell] > 0 ? format_double(surface.values[cell])
                                       : std::string("nan"))
          << ',' << surface.counts[cell] << '\n';
    }
  }
}

void write_xy_csv(std::ostream& out, const std::vector<double>& z,
                  const std::vector<double>& x) {
  out << "z,x\n";
  for (std::size_t i = 0; i < z.size(); ++i) {
    out << format_double(z[i]) << ',' << format_double(x[i]) << '\n';
  }
}

namespace {

SwitchVariant parse_switch(std::string_view s) {
  if (s == "blocks") return SwitchVariant::blocks;
  if (s == "alternating") return SwitchVariant::alternating;
  throw std::invalid_argument("unknown switch variant '" + std::string(s) + "'");
}

std::string_view switch_name(SwitchVariant v) {
  return v == SwitchVariant::blocks ? "blocks" : "alternating";
}

template <class T>
void read_field(const nlohmann::json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument(std::string("scenario field '") + key +
                                "' has the wrong type");
  }
}

Scenario scenario_fields(const nlohmann::json& j, const Scenario& base);

}  // namespace

Scenario parse_scenario_json(std::string_view text, const Scenario& base) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // byte offset -> line/column
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError("invalid JSON", line, col);
  }
  if (!j.is_object()) throw ParseError("scenario must be a JSON object", 1, 1);

  try {
    return scenario_fields(j, base);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad scenario field: ") + e.what());
  }
}

namespace {

Scenario scenario_fields(const nlohmann::json& j, const Scenario& base) {
  Scenario s = base;
  if (j.contains("preset")) s = preset_scenario(j.at("preset").get<std::string>());
  static const char* known[] = {"preset", "id", "domain", "n", "design_law", "mixture",
                                "trig_step", "harmonics", "pool_size", "switch_variant",
                                "target", "sigma", "noise", "noise_df",
                                "metric_on_design_range"};
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(std::begin(known), std::end(known),
                     [&](const char* k) { return key == k; }) == std::end(known)) {
      throw std::invalid_argument("unknown scenario field '" + key + "'");
    }
  }
  read_field(j, "id", s.id);
  if (j.contains("domain")) {
    const auto& d = j.at("domain");
    if (!d.is_array() || d.size() != 2) {
      throw std::invalid_argument("scenario field 'domain' must be [lo, hi]");
    }
    s.domain = {d[0].get<double>(), d[1].get<double>()};
  }
  read_field(j, "n", s.n);
  if (j.contains("design_law")) s.design_law = parse_design_law(j.at("design_law").get<std::string>());
  if (j.contains("mixture")) {
    s.mixture.clear();
    for (const auto& c : j.at("mixture")) {
      s.mixture.push_back({c.at("weight").get<double>(), c.at("lo").get<double>(),
                           c.at("hi").get<double>()});
    }
  }
  read_field(j, "trig_step", s.trig_step);
  read_field(j, "harmonics", s.harmonics);
  read_field(j, "pool_size", s.pool_size);
  if (j.contains("switch_variant")) {
    s.switch_variant = parse_switch(j.at("switch_variant").get<std::string>());
  }
  if (j.contains("target")) s.target = parse_target(j.at("target").get<std::string>());
  read_field(j, "sigma", s.sigma);
  if (j.contains("noise")) s.noise = parse_noise(j.at("noise").get<std::string>());
  read_field(j, "noise_df", s.noise_df);
  read_field(j, "metric_on_design_range", s.metric_on_design_range);
  validate(s);
  return s;
}

}  // namespace

std::string scenario_to_json(const Scenario& s) {
  nlohmann::ordered_json j;
  j["id"] = s.id;
  j["domain"] = {s.domain.lo, s.domain.hi};
  j["n"] = s.n;
  j["design_law"] = to_string(s.design_law);
  auto mix = nlohmann::ordered_json::array();
  for (const auto& c : s.mixture) {
    mix.push_back({{"weight", c.weight}, {"lo", c.lo}, {"hi", c.hi}});
  }
  j["mixture"] = mix;
  j["trig_step"] = s.trig_step;
  j["harmonics"] = s.harmonics;
  j["pool_size"] = s.pool_size;
  j["switch_variant"] = switch_name(s.switch_variant);
  j["target"] = to_string(s.target);
  j["sigma"] = s.sigma;
  j["noise"] = to_string(s.noise);
  j["noise_df"] = s.noise_df;
  j["metric_on_design_range"] = s.metric_on_design_range;
  return j.dump(2) + "\n";
}

Scenario load_scenario(const std::string& id_or_path) {
  if (id_or_path.rfind("example", 0) == 0 && id_or_path.find('.') == std::string::npos &&
      id_or_path.find('/') == std::string::npos) {
    return preset_scenario(id_or_path);
  }
  std::ifstream f(id_or_path);
  if (!f) throw std::invalid_argument("cannot open scenario file '" + id_or_path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_scenario_json(ss.str());
}

}  // namespace ullreg
