#pragma once

// Dolan-More performance profiles over a (problem x solver) cost table.
//
//   r(p, s)   = cost(p, s) / min_s' cost(p, s')     (+inf when s failed on p)
//   rho_s(t)  = |{p : r(p, s) <= t}| / |P|
//
// Problems no solver solved are dropped from P.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace hcg {

class EmptyTable : public std::invalid_argument {
 public:
  explicit EmptyTable(const std::string& what) : std::invalid_argument(what) {}
};

struct RunCell {
  bool solved = false;
  long iterations = 0;
  long f_evals = 0;
  long g_evals = 0;
  double wall_time_ms = 0.0;
};

struct RunTable {
  std::vector<std::string> problems;
  std::vector<std::string> solvers;
  std::vector<RunCell> cells;  // row-major: problem, then solver

  RunTable() = default;
  RunTable(std::vector<std::string> problems_, std::vector<std::string> solvers_)
      : problems(std::move(problems_)),
        solvers(std::move(solvers_)),
        cells(problems.size() * solvers.size()) {}

  RunCell& at(std::size_t p, std::size_t s) { return cells.at(p * solvers.size() + s); }
  const RunCell& at(std::size_t p, std::size_t s) const { return cells.at(p * solvers.size() + s); }

  void validate() const {
    if (cells.size() != problems.size() * solvers.size())
      throw std::invalid_argument("run table is not rectangular");
  }

  std::size_t solved_count(std::size_t s) const {
    std::size_t c = 0;
    for (std::size_t p = 0; p < problems.size(); ++p) c += at(p, s).solved ? 1 : 0;
    return c;
  }
};

inline nlohmann::json to_json(const RunTable& t) {
  t.validate();
  nlohmann::json cells = nlohmann::json::array();
  for (std::size_t p = 0; p < t.problems.size(); ++p)
    for (std::size_t s = 0; s < t.solvers.size(); ++s) {
      const RunCell& c = t.at(p, s);
      cells.push_back({{"problem", t.problems[p]},
                       {"solver", t.solvers[s]},
                       {"solved", c.solved},
                       {"iterations", c.iterations},
                       {"f_evals", c.f_evals},
                       {"g_evals", c.g_evals},
                       {"wall_time_ms", c.wall_time_ms}});
    }
  return {{"problems", t.problems}, {"solvers", t.solvers}, {"cells", cells}};
}

inline RunTable run_table_from_json(const nlohmann::json& j) {
  RunTable t(j.at("problems").get<std::vector<std::string>>(), j.at("solvers").get<std::vector<std::string>>());
  std::vector<bool> seen(t.cells.size(), false);
  for (const auto& c : j.at("cells")) {
    const auto pname = c.at("problem").get<std::string>();
    const auto sname = c.at("solver").get<std::string>();
    const auto pi = std::find(t.problems.begin(), t.problems.end(), pname);
    const auto si = std::find(t.solvers.begin(), t.solvers.end(), sname);
    if (pi == t.problems.end() || si == t.solvers.end())
      throw std::invalid_argument("run table cell references unknown problem/solver: " + pname + "/" + sname);
    const std::size_t idx = static_cast<std::size_t>(pi - t.problems.begin()) * t.solvers.size() +
                            static_cast<std::size_t>(si - t.solvers.begin());
    RunCell& cell = t.cells[idx];
    cell.solved = c.at("solved").get<bool>();
    cell.iterations = c.at("iterations").get<long>();
    cell.f_evals = c.at("f_evals").get<long>();
    cell.g_evals = c.value("g_evals", 0L);
    cell.wall_time_ms = c.at("wall_time_ms").get<double>();
    seen[idx] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw std::invalid_argument("run table is missing cells");
  return t;
}

enum class CostMetric { Iterations, FEvals, WallTime };

inline const char* to_string(CostMetric m) {
  switch (m) {
    case CostMetric::Iterations: return "iterations";
    case CostMetric::FEvals: return "fevals";
    case CostMetric::WallTime: return "walltime";
  }
  return "?";
}

/// Cost used for ratios. Counts are floored at 1 and wall time at 1 ms so a
/// zero-cost cell cannot produce 0/0 or timer-noise blowups.
inline double cell_cost(const RunCell& c, CostMetric m) {
  switch (m) {
    case CostMetric::Iterations: return std::max(1.0, static_cast<double>(c.iterations));
    case CostMetric::FEvals: return std::max(1.0, static_cast<double>(c.f_evals));
    case CostMetric::WallTime: return std::max(1.0, c.wall_time_ms);
  }
  return 1.0;
}

struct PerformanceRatios {
  std::vector<std::string> problems;  // problems kept (solved by at least one solver)
  std::vector<std::string> solvers;
  std::vector<std::string> dropped;   // solved by nobody
  std::vector<double> r;              // row-major, +inf for failures

  double at(std::size_t p, std::size_t s) const { return r.at(p * solvers.size() + s); }
};

inline PerformanceRatios performance_ratios(const RunTable& table, CostMetric metric) {
  table.validate();
  if (table.problems.empty() || table.solvers.empty()) throw EmptyTable("run table has no problems or no solvers");
  constexpr double inf = std::numeric_limits<double>::infinity();

  PerformanceRatios out;
  out.solvers = table.solvers;
  for (std::size_t p = 0; p < table.problems.size(); ++p) {
    double best = inf;
    for (std::size_t s = 0; s < table.solvers.size(); ++s)
      if (table.at(p, s).solved) best = std::min(best, cell_cost(table.at(p, s), metric));
    if (best == inf) {
      out.dropped.push_back(table.problems[p]);
      continue;
    }
    out.problems.push_back(table.problems[p]);
    for (std::size_t s = 0; s < table.solvers.size(); ++s) {
      const RunCell& c = table.at(p, s);
      out.r.push_back(c.solved ? cell_cost(c, metric) / best : inf);
    }
  }
  if (out.problems.empty()) throw EmptyTable("no problem was solved by any solver");
  return out;
}

struct ProfilePoint {
  double tau = 1.0;
  double rho = 0.0;
};

struct ProfileCurve {
  std::string solver;
  std::vector<ProfilePoint> points;
};

/// 256 log-spaced points on [1, 2^10] by default.
inline std::vector<double> default_tau_grid(std::size_t count = 256, double log2_max = 10.0) {
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i)
    grid[i] = count == 1 ? 1.0 : std::exp2(log2_max * static_cast<double>(i) / static_cast<double>(count - 1));
  return grid;
}

inline ProfileCurve profile_curve(const PerformanceRatios& ratios, std::size_t solver,
                                  const std::vector<double>& tau_grid) {
  if (solver >= ratios.solvers.size()) throw std::out_of_range("profile_curve: solver index");
  if (tau_grid.empty() || tau_grid.front() != 1.0 || !std::is_sorted(tau_grid.begin(), tau_grid.end()))
    throw std::invalid_argument("profile_curve: tau grid must be sorted and start at 1");

  ProfileCurve curve{ratios.solvers[solver], {}};
  const double total = static_cast<double>(ratios.problems.size());
  for (double tau : tau_grid) {
    std::size_t count = 0;
    for (std::size_t p = 0; p < ratios.problems.size(); ++p)
      if (ratios.at(p, solver) <= tau) ++count;
    curve.points.push_back({tau, static_cast<double>(count) / total});
  }
  return curve;
}

inline std::vector<ProfileCurve> profile_curves(const PerformanceRatios& ratios,
                                                const std::vector<double>& tau_grid = default_tau_grid()) {
  std::vector<ProfileCurve> curves;
  for (std::size_t s = 0; s < ratios.solvers.size(); ++s) curves.push_back(profile_curve(ratios, s, tau_grid));
  return curves;
}

enum class ProfileFormat { CSV, SVG };

namespace detail {

inline std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

/// Plot geometry for the SVG emitter; x is log2(tau), y is rho.
struct SvgLayout {
  double width = 640.0;
  double height = 420.0;
  double left = 60.0;
  double right = 150.0;
  double top = 40.0;
  double bottom = 50.0;
  double log2_tau_max = 10.0;

  double x_of(double tau) const {
    return left + (width - left - right) * std::log2(tau) / log2_tau_max;
  }
  double y_of(double rho) const { return top + (height - top - bottom) * (1.0 - rho); }
};

inline std::string emit_csv(const std::vector<ProfileCurve>& curves) {
  if (curves.empty()) throw std::invalid_argument("emit: no curves");
  std::ostringstream os;
  os << "tau";
  for (const auto& c : curves) os << ',' << c.solver;
  os << '\n';
  const std::size_t rows = curves.front().points.size();
  for (const auto& c : curves)
    if (c.points.size() != rows) throw std::invalid_argument("emit: curves use different tau grids");
  for (std::size_t i = 0; i < rows; ++i) {
    os << detail::fmt_num(curves.front().points[i].tau);
    for (const auto& c : curves) os << ',' << detail::fmt_num(c.points[i].rho);
    os << '\n';
  }
  return os.str();
}

inline std::string emit_svg(const std::vector<ProfileCurve>& curves, const std::string& title = "Performance profile",
                            const SvgLayout& layout = {}) {
  if (curves.empty()) throw std::invalid_argument("emit: no curves");
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};
  SvgLayout L = layout;
  for (const auto& c : curves)
    if (!c.points.empty()) L.log2_tau_max = std::max(L.log2_tau_max, std::log2(c.points.back().tau));

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << L.width << "\" height=\"" << L.height
     << "\">\n"
     << "<title>" << detail::xml_escape(title) << "</title>\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  const double x0 = L.x_of(1.0), x1 = L.x_of(std::exp2(L.log2_tau_max));
  const double y0 = L.y_of(0.0), y1 = L.y_of(1.0);
  os << "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n"
     << "<line x1=\"" << detail::fmt_px(x0) << "\" y1=\"" << detail::fmt_px(y0) << "\" x2=\"" << detail::fmt_px(x1)
     << "\" y2=\"" << detail::fmt_px(y0) << "\"/>\n"
     << "<line x1=\"" << detail::fmt_px(x0) << "\" y1=\"" << detail::fmt_px(y0) << "\" x2=\"" << detail::fmt_px(x0)
     << "\" y2=\"" << detail::fmt_px(y1) << "\"/>\n"
     << "</g>\n";

  os << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"black\">\n";
  const int ticks = static_cast<int>(std::floor(L.log2_tau_max));
  for (int k = 0; k <= ticks; k += std::max(1, ticks / 10)) {
    const double x = L.x_of(std::exp2(k));
    os << "<text x=\"" << detail::fmt_px(x) << "\" y=\"" << detail::fmt_px(y0 + 16)
       << "\" text-anchor=\"middle\">2^" << k << "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const double rho = k / 4.0;
    os << "<text x=\"" << detail::fmt_px(x0 - 8) << "\" y=\"" << detail::fmt_px(L.y_of(rho) + 4)
       << "\" text-anchor=\"end\">" << rho << "</text>\n";
  }
  os << "<text x=\"" << detail::fmt_px((x0 + x1) / 2) << "\" y=\"" << detail::fmt_px(L.height - 12)
     << "\" text-anchor=\"middle\">tau (log2 scale)</text>\n"
     << "<text x=\"" << detail::fmt_px((x0 + x1) / 2) << "\" y=\"" << detail::fmt_px(L.top - 16)
     << "\" text-anchor=\"middle\">" << detail::xml_escape(title) << "</text>\n"
     << "</g>\n";

  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& c = curves[i];
    const char* color = palette[i % (sizeof palette / sizeof *palette)];
    os << "<polyline class=\"profile\" data-solver=\"" << detail::xml_escape(c.solver) << "\" fill=\"none\" stroke=\""
       << color << "\" stroke-width=\"2\" points=\"";
    // step plot: hold rho until the next grid point
    for (std::size_t k = 0; k < c.points.size(); ++k) {
      const auto& p = c.points[k];
      if (k > 0) os << ' ' << detail::fmt_px(L.x_of(p.tau)) << ',' << detail::fmt_px(L.y_of(c.points[k - 1].rho));
      if (k > 0) os << ' ';
      os << detail::fmt_px(L.x_of(p.tau)) << ',' << detail::fmt_px(L.y_of(p.rho));
    }
    os << "\"/>\n";
    const double ly = L.top + 18.0 * static_cast<double>(i) + 10.0;
    const double lx = L.width - L.right + 15.0;
    os << "<line x1=\"" << detail::fmt_px(lx) << "\" y1=\"" << detail::fmt_px(ly) << "\" x2=\""
       << detail::fmt_px(lx + 24) << "\" y2=\"" << detail::fmt_px(ly) << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n"
       << "<text x=\"" << detail::fmt_px(lx + 30) << "\" y=\"" << detail::fmt_px(ly + 4)
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << detail::xml_escape(c.solver) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

inline std::string emit(const std::vector<ProfileCurve>& curves, ProfileFormat format,
                        const std::string& title = "Performance profile") {
  return format == ProfileFormat::CSV ? emit_csv(curves) : emit_svg(curves, title);
}

}  // namespace hcg
