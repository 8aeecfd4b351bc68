#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "cli/artifacts.hpp"
#include "cli/run.hpp"
#include "kpplab/error.hpp"

namespace kpplab::cli {

namespace {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t index(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    return it == columns.end() ? columns.size() : static_cast<std::size_t>(it - columns.begin());
  }
  bool has(const std::string& name) const { return index(name) < columns.size(); }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Table read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::format, "cannot open " + path.string());
  Table t;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (t.columns.empty()) {
      t.columns = split(line);
      continue;
    }
    auto row = split(line);
    if (row.size() != t.columns.size()) {
      throw Error(ErrorCode::format, path.string() + ": row has " + std::to_string(row.size()) +
                                         " fields, header has " +
                                         std::to_string(t.columns.size()));
    }
    t.rows.push_back(std::move(row));
  }
  if (t.rows.empty()) throw Error(ErrorCode::format, path.string() + ": no data rows");
  return t;
}

void require(const Table& t, std::initializer_list<const char*> names, const char* kind) {
  for (const char* n : names) {
    if (!t.has(n)) {
      throw Error(ErrorCode::format,
                  std::string("a ") + kind + " CSV needs column '" + n + "'");
    }
  }
}

double parse(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::format, "not a number: '" + s + "'");
}

struct Series {
  std::string name;
  std::vector<double> x, y;
  bool points = false;  // scatter instead of polyline
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string render(const std::vector<Series>& series, const std::string& xlabel,
                   const std::string& ylabel, std::optional<std::pair<double, double>> yrange) {
  const double width = 720, height = 440, left = 70, right = 170, top = 20, bottom = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) throw Error(ErrorCode::format, "no finite points to plot");
  if (yrange) std::tie(y0, y1) = *yrange;
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) y1 = y0 + 1.0;
  const double pw = width - left - right, ph = height - top - bottom;
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" "
      << "font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<g class=\"axes\" stroke=\"black\">\n"
      << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\""
      << top + ph << "\"/>\n<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
      << "\" y2=\"" << top + ph << "\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    svg << "<line x1=\"" << sx(xv) << "\" y1=\"" << top + ph << "\" x2=\"" << sx(xv) << "\" y2=\""
        << top + ph + 5 << "\"/><text x=\"" << sx(xv) << "\" y=\"" << top + ph + 18
        << "\" text-anchor=\"middle\" stroke=\"none\">" << format_double(std::round(xv * 1e3) / 1e3)
        << "</text>\n<line x1=\"" << left - 5 << "\" y1=\"" << sy(yv) << "\" x2=\"" << left
        << "\" y2=\"" << sy(yv) << "\"/><text x=\"" << left - 8 << "\" y=\"" << sy(yv) + 4
        << "\" text-anchor=\"end\" stroke=\"none\">" << format_double(std::round(yv * 1e3) / 1e3)
        << "</text>\n";
  }
  svg << "</g>\n<text x=\"" << left + pw / 2 << "\" y=\"" << height - 10
      << "\" text-anchor=\"middle\">" << xlabel << "</text>\n<text x=\"16\" y=\"" << top + ph / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << top + ph / 2 << ")\">" << ylabel
      << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* colour = kPalette[k % std::size(kPalette)];
    if (s.points) {
      svg << "<g class=\"series\" fill=\"" << colour << "\">\n";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        svg << "<circle cx=\"" << sx(s.x[i]) << "\" cy=\"" << sy(s.y[i]) << "\" r=\"2\"/>\n";
      }
      svg << "</g>\n";
    } else {
      svg << "<polyline class=\"series\" fill=\"none\" stroke=\"" << colour
          << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        svg << sx(s.x[i]) << ',' << sy(s.y[i]) << ' ';
      }
      svg << "\"/>\n";
    }
    const double ly = top + 10 + 18 * static_cast<double>(k);
    svg << "<g class=\"legend\"><rect x=\"" << left + pw + 15 << "\" y=\"" << ly - 8
        << "\" width=\"12\" height=\"12\" fill=\"" << colour << "\"/><text x=\""
        << left + pw + 32 << "\" y=\"" << ly + 2 << "\">" << s.name << "</text></g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

PlotKind parse_plot_kind(const std::string& name) {
  if (name == "profile") return PlotKind::profile;
  if (name == "front") return PlotKind::front;
  if (name == "martingale") return PlotKind::martingale;
  throw Error(ErrorCode::format, "unknown plot kind '" + name + "' (profile, front, martingale)");
}

std::string plot_svg(const std::filesystem::path& csv, PlotKind kind) {
  const Table t = read_csv(csv);
  std::vector<Series> series;
  switch (kind) {
    case PlotKind::profile: {
      require(t, {"x", "value"}, "profile");
      const std::size_t ix = t.index("x"), iv = t.index("value"), is = t.index("source");
      std::map<std::string, std::size_t> slot;
      for (const auto& row : t.rows) {
        const std::string name = is < t.columns.size() ? row[is] : "profile";
        auto [it, fresh] = slot.emplace(name, series.size());
        if (fresh) series.push_back({name, {}, {}, false});
        series[it->second].x.push_back(parse(row[ix]));
        series[it->second].y.push_back(parse(row[iv]));
      }
      return render(series, "x", "u", std::make_pair(0.0, 1.0));
    }
    case PlotKind::front: {
      require(t, {"t", "m_half"}, "front");
      Series pts{"m_half", {}, {}, true};
      Series fit{"fit c t + s ln t + C", {}, {}, false};
      const std::size_t it = t.index("t"), im = t.index("m_half"), ifit = t.index("fit");
      for (const auto& row : t.rows) {
        pts.x.push_back(parse(row[it]));
        pts.y.push_back(parse(row[im]));
        if (ifit < t.columns.size()) {
          fit.x.push_back(pts.x.back());
          fit.y.push_back(parse(row[ifit]));
        }
      }
      series.push_back(std::move(pts));
      if (!fit.x.empty()) series.push_back(std::move(fit));
      return render(series, "t", "front position", std::nullopt);
    }
    case PlotKind::martingale: {
      require(t, {"replica", "n", "W_n", "D_n"}, "martingale");
      const std::size_t in = t.index("n"), iw = t.index("W_n"), id = t.index("D_n");
      std::map<long, std::array<double, 3>> acc;  // sum W, sum D, count
      for (const auto& row : t.rows) {
        auto& a = acc[std::lround(parse(row[in]))];
        a[0] += parse(row[iw]);
        a[1] += parse(row[id]);
        a[2] += 1.0;
      }
      Series w{"mean W_n", {}, {}, false}, d{"mean D_n", {}, {}, false};
      for (const auto& [n, a] : acc) {
        w.x.push_back(static_cast<double>(n));
        w.y.push_back(a[0] / a[2]);
        d.x.push_back(static_cast<double>(n));
        d.y.push_back(a[1] / a[2]);
      }
      series = {w, d};
      return render(series, "n", "ensemble mean", std::nullopt);
    }
  }
  throw Error(ErrorCode::format, "unknown plot kind");
}

}  // namespace kpplab::cli
