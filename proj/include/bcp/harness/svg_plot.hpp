#pragma once

// Static SVG line charts of a summary: one panel per (instance, H), one line
// per beta with a shaded +-1 std band. Coordinates are printed with fixed
// precision so identical input gives identical bytes.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "bcp/harness/aggregate.hpp"
#include "bcp/json_io.hpp"

namespace bcp::harness {

struct PlotOptions {
  enum class Metric { kMember, kMixture };
  Metric metric = Metric::kMember;
  bool log_x = false;
  int panel_width = 480;
  int panel_height = 320;
  int columns = 2;
  std::string title = "sub-optimality";
};

// y-range actually used for a panel; exposed for tests.
struct AxisRange {
  double lo = 0.0;
  double hi = 1.0;
};

namespace detail {

inline std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  return s == "-0.00" ? "0.00" : s;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

inline constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

struct Series {
  std::string beta;
  std::vector<int> k;
  std::vector<double> mean, sd;
};

struct Panel {
  std::string instance_id;
  int H = 0;
  std::vector<Series> series;
};

inline std::vector<Panel> build_panels(const std::vector<SummaryRow>& rows, const PlotOptions& opt) {
  std::map<std::tuple<std::string, int>, std::map<std::pair<double, std::string>, Series>> grouped;
  for (const auto& r : rows) {
    auto& s = grouped[{r.instance_id, r.H}][{label_order(r.beta), r.beta}];
    s.beta = r.beta;
    s.k.push_back(r.k);
    const bool mix = opt.metric == PlotOptions::Metric::kMixture;
    s.mean.push_back(mix ? r.mean_mixture : r.mean_member);
    s.sd.push_back(mix ? r.std_mixture : r.std_member);
  }
  std::vector<Panel> panels;
  for (auto& [key, by_beta] : grouped) {
    Panel p{std::get<0>(key), std::get<1>(key), {}};
    for (auto& [bk, s] : by_beta) {
      std::vector<std::size_t> order(s.k.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s.k[a] < s.k[b]; });
      Series sorted{s.beta, {}, {}, {}};
      for (std::size_t i : order) {
        sorted.k.push_back(s.k[i]);
        sorted.mean.push_back(s.mean[i]);
        sorted.sd.push_back(s.sd[i]);
      }
      p.series.push_back(std::move(sorted));
    }
    panels.push_back(std::move(p));
  }
  return panels;
}

inline AxisRange y_range(const Panel& p) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : p.series)
    for (std::size_t i = 0; i < s.k.size(); ++i) {
      if (!std::isfinite(s.mean[i])) continue;
      lo = std::min(lo, s.mean[i] - s.sd[i]);
      hi = std::max(hi, s.mean[i] + s.sd[i]);
    }
  if (!std::isfinite(lo)) return {0.0, 1.0};
  lo = std::min(lo, 0.0);
  if (hi - lo < 1e-12) hi = lo + 1.0;
  const double pad = 0.05 * (hi - lo);
  return {lo == 0.0 ? 0.0 : lo - pad, hi + pad};
}

}  // namespace detail

inline std::vector<AxisRange> plot_ranges(const std::vector<SummaryRow>& rows, const PlotOptions& opt = {}) {
  std::vector<AxisRange> out;
  for (const auto& p : detail::build_panels(rows, opt)) out.push_back(detail::y_range(p));
  return out;
}

inline std::string render_svg(const std::vector<SummaryRow>& rows, const PlotOptions& opt = {}) {
  if (rows.empty()) throw std::invalid_argument("emit_plot: empty summary");
  const auto panels = detail::build_panels(rows, opt);
  const int cols = std::max(1, std::min<int>(opt.columns, static_cast<int>(panels.size())));
  const int prow = (static_cast<int>(panels.size()) + cols - 1) / cols;
  const int W = opt.panel_width, Hh = opt.panel_height;
  const double ml = 60, mr = 90, mt = 30, mb = 40;

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(W * cols) +
                    "\" height=\"" + std::to_string(Hh * prow) + "\" viewBox=\"0 0 " + std::to_string(W * cols) +
                    " " + std::to_string(Hh * prow) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (std::size_t pi = 0; pi < panels.size(); ++pi) {
    const auto& p = panels[pi];
    const double ox = static_cast<double>(pi % cols) * W, oy = static_cast<double>(pi / cols) * Hh;
    const double x0 = ox + ml, x1 = ox + W - mr, y0 = oy + Hh - mb, y1 = oy + mt;

    int kmin = p.series.front().k.front(), kmax = kmin;
    for (const auto& s : p.series) {
      kmin = std::min(kmin, s.k.front());
      kmax = std::max(kmax, s.k.back());
    }
    const bool logx = opt.log_x && kmin >= 1;
    auto xt = [&](double k) { return logx ? std::log10(k) : k; };
    const double xa = xt(kmin), xb = kmax > kmin ? xt(kmax) : xt(kmin) + 1.0;
    const AxisRange yr = detail::y_range(p);
    auto px = [&](double k) { return x0 + (xt(k) - xa) / (xb - xa) * (x1 - x0); };
    auto py = [&](double y) { return y0 - (y - yr.lo) / (yr.hi - yr.lo) * (y0 - y1); };

    svg += "<g>\n";
    svg += "<text x=\"" + detail::fmt2((x0 + x1) / 2) + "\" y=\"" + detail::fmt2(oy + 18) +
           "\" text-anchor=\"middle\">" + detail::xml_escape(p.instance_id + ", H = " + std::to_string(p.H)) +
           "</text>\n";
    svg += "<rect x=\"" + detail::fmt2(x0) + "\" y=\"" + detail::fmt2(y1) + "\" width=\"" +
           detail::fmt2(x1 - x0) + "\" height=\"" + detail::fmt2(y0 - y1) +
           "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
    for (int t = 0; t <= 4; ++t) {
      const double yv = yr.lo + (yr.hi - yr.lo) * t / 4.0;
      svg += "<text x=\"" + detail::fmt2(x0 - 6) + "\" y=\"" + detail::fmt2(py(yv) + 4) +
             "\" text-anchor=\"end\">" + detail::tick_label(yv) + "</text>\n";
      const double kv = logx ? std::pow(10.0, xa + (xb - xa) * t / 4.0) : kmin + (kmax - kmin) * t / 4.0;
      svg += "<text x=\"" + detail::fmt2(px(kv)) + "\" y=\"" + detail::fmt2(y0 + 16) +
             "\" text-anchor=\"middle\">" + detail::tick_label(kv) + "</text>\n";
    }
    svg += "<text x=\"" + detail::fmt2((x0 + x1) / 2) + "\" y=\"" + detail::fmt2(y0 + 32) +
           "\" text-anchor=\"middle\">k</text>\n";
    svg += "<text x=\"" + detail::fmt2(ox + 14) + "\" y=\"" + detail::fmt2((y0 + y1) / 2) +
           "\" text-anchor=\"middle\" transform=\"rotate(-90 " + detail::fmt2(ox + 14) + " " +
           detail::fmt2((y0 + y1) / 2) + ")\">" + detail::xml_escape(opt.title) + "</text>\n";

    for (std::size_t si = 0; si < p.series.size(); ++si) {
      const auto& s = p.series[si];
      const char* color = detail::kPalette[si % std::size(detail::kPalette)];
      std::string band, line;
      for (std::size_t i = 0; i < s.k.size(); ++i)
        band += (i ? " " : "") + detail::fmt2(px(s.k[i])) + "," + detail::fmt2(py(s.mean[i] + s.sd[i]));
      for (std::size_t i = s.k.size(); i-- > 0;)
        band += " " + detail::fmt2(px(s.k[i])) + "," + detail::fmt2(py(s.mean[i] - s.sd[i]));
      for (std::size_t i = 0; i < s.k.size(); ++i)
        line += (i ? " " : "") + detail::fmt2(px(s.k[i])) + "," + detail::fmt2(py(s.mean[i]));
      svg += "<polygon points=\"" + band + "\" fill=\"" + color + "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
      svg += "<polyline points=\"" + line + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
      const double ly = y1 + 14.0 * (si + 1);
      svg += "<line x1=\"" + detail::fmt2(x1 + 10) + "\" y1=\"" + detail::fmt2(ly - 4) + "\" x2=\"" +
             detail::fmt2(x1 + 30) + "\" y2=\"" + detail::fmt2(ly - 4) + "\" stroke=\"" + color +
             "\" stroke-width=\"2\"/>\n";
      svg += "<text x=\"" + detail::fmt2(x1 + 34) + "\" y=\"" + detail::fmt2(ly) + "\">&#946; = " +
             detail::xml_escape(s.beta) + "</text>\n";
    }
    svg += "</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

inline void emit_plot(const std::vector<SummaryRow>& rows, const std::string& path, const PlotOptions& opt = {}) {
  write_text_file(path, render_svg(rows, opt));
}

}  // namespace bcp::harness
