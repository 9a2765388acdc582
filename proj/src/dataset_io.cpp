#include "iontrap/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "iontrap/constants.hpp"
#include "iontrap/error.hpp"

namespace iontrap {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, std::size_t line) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (!s.empty() && *b == '+') ++b;
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || s.empty())
    throw ValidationError("line " + std::to_string(line) + ": not a number: '" + s + "'");
  return v;
}

std::size_t as_count(double v, std::size_t line) {
  if (!(v >= 1.0) || v != std::floor(v) || v > 1e15)
    throw ValidationError("line " + std::to_string(line) + ": repetitions must be a positive integer");
  return static_cast<std::size_t>(v);
}

}  // namespace

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw ValidationError("missing column '" + name + "'");
}

void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  char buf[32];
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, row[i]);
      os << (i ? "," : "") << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    os << '\n';
  }
}

Table read_csv(std::istream& is) {
  Table t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    t.columns = split(s);
    break;
  }
  if (t.columns.empty()) throw ValidationError("empty CSV input");
  while (std::getline(is, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    const auto cells = split(s);
    if (cells.size() != t.columns.size())
      throw ValidationError("line " + std::to_string(lineno) + ": expected " +
                            std::to_string(t.columns.size()) + " fields, got " +
                            std::to_string(cells.size()));
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_number(c, lineno));
    t.rows.push_back(std::move(row));
  }
  if (t.rows.empty()) throw ValidationError("CSV input has a header but no data rows");
  return t;
}

Table to_table(const RabiDataset& d) {
  Table t{{"energy_nj", "p_down", "repetitions"}, {}};
  for (const auto& p : d.points)
    t.rows.push_back({p.energy * 1e9, p.p_down, static_cast<double>(p.repetitions)});
  return t;
}

RabiDataset rabi_from_table(const Table& t) {
  const auto ce = t.column("energy_nj"), cp = t.column("p_down"), cn = t.column("repetitions");
  RabiDataset d;
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    d.points.push_back({t.rows[i][ce] * 1e-9, t.rows[i][cp], as_count(t.rows[i][cn], i + 2)});
  d.validate();
  return d;
}

Table to_table(const FringeDataset& d) {
  Table t{{"tau_us", "detuning_hz", "p_up", "repetitions"}, {}};
  for (const auto& r : d.records)
    t.rows.push_back({r.wait_time * 1e6, r.detuning / constants::two_pi, r.p_up,
                      static_cast<double>(r.repetitions)});
  return t;
}

FringeDataset fringes_from_table(const Table& t) {
  const auto ct = t.column("tau_us"), cd = t.column("detuning_hz"), cp = t.column("p_up"),
             cn = t.column("repetitions");
  FringeDataset d;
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    d.records.push_back({t.rows[i][ct] * 1e-6, t.rows[i][cd] * constants::two_pi, t.rows[i][cp],
                         as_count(t.rows[i][cn], i + 2)});
  d.validate();
  return d;
}

Table to_table(const std::vector<VisibilityPoint>& v) {
  Table t{{"tau_us", "visibility", "visibility_sigma"}, {}};
  for (const auto& p : v) t.rows.push_back({p.wait_time * 1e6, p.visibility, p.sigma});
  return t;
}

std::vector<VisibilityPoint> visibilities_from_table(const Table& t) {
  const auto ct = t.column("tau_us"), cv = t.column("visibility"), cs = t.column("visibility_sigma");
  std::vector<VisibilityPoint> v;
  for (const auto& row : t.rows) {
    if (!(row[cs] > 0.0)) throw ValidationError("visibility_sigma must be positive");
    v.push_back({row[ct] * 1e-6, row[cv], row[cs]});
  }
  return v;
}

}  // namespace iontrap
