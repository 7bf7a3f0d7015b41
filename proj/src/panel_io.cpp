#include "lsmd/panel_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include "lsmd/errors.hpp"

namespace lsmd {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_real(const std::string& s, long line, const std::string& column) {
  double v = 0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ParseError("bad value '" + s + "' in column " + column, line);
  }
  return v;
}

long parse_int(const std::string& s, long line, const std::string& column) {
  long v = 0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end) {
    throw ParseError("bad integer '" + s + "' in column " + column, line);
  }
  return v;
}

struct Row {
  double y = 0;
  bool pre = false;
  std::optional<double> latent;
  std::vector<double> x;
  long line = 0;
};

}  // namespace

PanelData read_panel(std::istream& in) {
  std::string line;
  long lineno = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") != std::string::npos) header = split(line);
  }
  if (header.empty()) throw ParseError("empty panel file", lineno);

  int c_unit = -1, c_time = -1, c_y = -1, c_pre = -1, c_latent = -1;
  std::vector<std::pair<int, std::string>> xcols;
  for (int j = 0; j < static_cast<int>(header.size()); ++j) {
    const std::string& h = header[static_cast<std::size_t>(j)];
    if (h == "unit") c_unit = j;
    else if (h == "time") c_time = j;
    else if (h == "y") c_y = j;
    else if (h == "pre") c_pre = j;
    else if (h == "y_latent") c_latent = j;
    else if (h.size() > 1 && h[0] == 'x' && h.find_first_not_of("0123456789", 1) == std::string::npos) xcols.emplace_back(j, h);
    else throw ParseError("unknown column '" + h + "'", lineno);
  }
  if (c_unit < 0 || c_time < 0 || c_y < 0) throw ParseError("header must contain unit, time and y", lineno);
  std::sort(xcols.begin(), xcols.end(), [](const auto& a, const auto& b) {
    return std::stol(a.second.substr(1)) < std::stol(b.second.substr(1));
  });

  std::map<long, std::map<long, Row>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::vector<std::string> cells = split(line);
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(cells.size()),
                       lineno);
    }
    const long unit = parse_int(cells[static_cast<std::size_t>(c_unit)], lineno, "unit");
    const long time = parse_int(cells[static_cast<std::size_t>(c_time)], lineno, "time");
    Row r;
    r.line = lineno;
    r.y = parse_real(cells[static_cast<std::size_t>(c_y)], lineno, "y");
    if (c_pre >= 0) {
      const long p = parse_int(cells[static_cast<std::size_t>(c_pre)], lineno, "pre");
      if (p != 0 && p != 1) throw ParseError("pre must be 0 or 1", lineno);
      r.pre = p == 1;
    }
    if (c_latent >= 0) r.latent = parse_real(cells[static_cast<std::size_t>(c_latent)], lineno, "y_latent");
    for (const auto& [j, name] : xcols) r.x.push_back(parse_real(cells[static_cast<std::size_t>(j)], lineno, name));
    if (!rows[unit].emplace(time, std::move(r)).second) {
      throw ParseError("duplicate row for unit " + std::to_string(unit) + ", time " + std::to_string(time), lineno);
    }
  }
  if (rows.empty()) throw ParseError("panel has no data rows", lineno);

  std::set<long> all_times;
  for (const auto& [unit, by_time] : rows) {
    for (const auto& [time, r] : by_time) all_times.insert(time);
  }
  std::vector<long> offending;
  for (const auto& [unit, by_time] : rows) {
    if (by_time.size() != all_times.size()) offending.push_back(unit);
  }
  if (!offending.empty()) {
    std::string msg = "unbalanced panel; units missing periods:";
    for (long u : offending) msg += " " + std::to_string(u);
    throw UnbalancedPanel(msg, offending);
  }
  const std::vector<long> times(all_times.begin(), all_times.end());
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (times[k] != times[k - 1] + 1) {
      throw TimeGap("time gap between periods " + std::to_string(times[k - 1]) + " and " +
                    std::to_string(times[k]));
    }
  }

  // Pre-sample periods must be a common leading block.
  const auto& first = rows.begin()->second;
  std::size_t n_pre = 0;
  for (const auto& [time, r] : first) {
    if (!r.pre) break;
    ++n_pre;
  }
  for (const auto& [unit, by_time] : rows) {
    std::size_t k = 0;
    for (const auto& [time, r] : by_time) {
      if (r.pre != (k < n_pre)) {
        throw ParseError("pre-sample rows must form the same leading block for every unit", r.line);
      }
      ++k;
    }
  }

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(n_pre);
  const auto t = static_cast<Eigen::Index>(times.size()) - p;
  if (t < 1) throw ValidationError("panel has no sample periods");
  const std::size_t k_x = xcols.size();

  PanelData panel;
  panel.y.resize(n, t);
  panel.pre_sample.resize(n, p);
  panel.covariates.assign(k_x, Matrix(n, t));
  for (const auto& [j, name] : xcols) panel.covariate_names.push_back(name);
  Matrix latent(n, t);
  Matrix latent_pre(n, p);
  Eigen::Index i = 0;
  for (const auto& [unit, by_time] : rows) {
    panel.unit_ids.push_back(unit);
    Eigen::Index col = 0;
    for (const auto& [time, r] : by_time) {
      if (col < p) {
        panel.pre_sample(i, col) = r.y;
        if (r.latent) latent_pre(i, col) = *r.latent;
      } else {
        panel.y(i, col - p) = r.y;
        if (r.latent) latent(i, col - p) = *r.latent;
        for (std::size_t k = 0; k < k_x; ++k) panel.covariates[k](i, col - p) = r.x[k];
      }
      ++col;
    }
    ++i;
  }
  panel.time_ids.assign(times.begin() + p, times.end());
  if (c_latent >= 0) {
    SimulationTruth truth;
    truth.y_latent = latent;
    truth.latent_pre_sample = latent_pre;
    panel.truth = std::move(truth);
  }
  return panel;
}

PanelData read_panel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open panel file " + path);
  return read_panel(in);
}

void write_panel(const PanelData& panel, std::ostream& out) {
  const Eigen::Index n = panel.n();
  const Eigen::Index t = panel.t();
  const Eigen::Index p = panel.pre_periods();
  const bool latent = panel.truth && panel.truth->y_latent.rows() == n && panel.truth->y_latent.cols() == t &&
                      panel.truth->latent_pre_sample.cols() == p;
  const std::size_t k_x = panel.covariates.size();

  out << "unit,time,y";
  if (p > 0) out << ",pre";
  if (latent) out << ",y_latent";
  for (std::size_t k = 0; k < k_x; ++k) {
    out << ',' << (k < panel.covariate_names.size() ? panel.covariate_names[k] : "x" + std::to_string(k + 1));
  }
  out << '\n';

  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < n; ++i) {
    const long unit = panel.unit_ids.size() == static_cast<std::size_t>(n) ? panel.unit_ids[static_cast<std::size_t>(i)] : i + 1;
    const long t0 = panel.time_ids.size() == static_cast<std::size_t>(t) ? panel.time_ids.front() : 1;
    for (Eigen::Index c = 0; c < p + t; ++c) {
      const bool pre = c < p;
      out << unit << ',' << t0 - p + c << ',' << (pre ? panel.pre_sample(i, c) : panel.y(i, c - p));
      if (p > 0) out << ',' << (pre ? 1 : 0);
      if (latent) out << ',' << (pre ? panel.truth->latent_pre_sample(i, c) : panel.truth->y_latent(i, c - p));
      for (std::size_t k = 0; k < k_x; ++k) {
        // Covariates are not observed before the sample; write zeros.
        out << ',' << (pre ? 0.0 : panel.covariates[k](i, c - p));
      }
      out << '\n';
    }
  }
  out.flags(flags);
  out.precision(prec);
}

void write_panel(const PanelData& panel, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write panel file " + path);
  write_panel(panel, out);
}

}  // namespace lsmd
