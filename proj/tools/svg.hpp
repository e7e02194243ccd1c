#pragma once

// Minimal deterministic SVG emission for the exploratory maps. Numbers
// are formatted with to_chars so byte-identical output only depends on
// the rendered content.

#include <charconv>
#include <cmath>
#include <string>

#include "modality/explore.hpp"

namespace modality::svg {

inline std::string num(double v) {
  char buf[32];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

class Canvas {
 public:
  Canvas(double width, double height) : w_(width), h_(height) {
    body_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w_) + "\" height=\"" +
             num(h_) + "\" viewBox=\"0 0 " + num(w_) + " " + num(h_) + "\">\n";
    body_ += "<rect x=\"0\" y=\"0\" width=\"" + num(w_) + "\" height=\"" + num(h_) +
             "\" fill=\"white\"/>\n";
  }

  void rect(double x, double y, double w, double h, const std::string& fill) {
    body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) +
             "\" height=\"" + num(h) + "\" fill=\"" + fill + "\"/>\n";
  }
  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            bool dashed = false) {
    body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" +
             num(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"1\"";
    if (dashed) body_ += " stroke-dasharray=\"4 3\"";
    body_ += "/>\n";
  }
  void text(double x, double y, const std::string& s, int size = 11,
            const std::string& anchor = "middle") {
    body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-family=\"monospace\" font-size=\"" +
             std::to_string(size) + "\" text-anchor=\"" + anchor + "\">" + s + "</text>\n";
  }

  std::string finish() { return body_ + "</svg>\n"; }

 private:
  double w_, h_;
  std::string body_;
};

struct Frame {
  double left = 60, top = 20, width = 640, height = 420, bottom_pad = 40;
};

inline double bw_axis_value(const BandwidthGrid& g, std::size_t row) {
  return g.log10_display ? std::log10(g.values[row]) : g.values[row];
}

inline void draw_axes(Canvas& c, const Frame& f, double x_lo, double x_hi,
                      const BandwidthGrid& bws, const std::string& xlab) {
  c.line(f.left, f.top, f.left, f.top + f.height, "black");
  c.line(f.left, f.top + f.height, f.left + f.width, f.top + f.height, "black");
  for (int t = 0; t <= 4; ++t) {
    const double frac = t / 4.0;
    const double x = f.left + frac * f.width;
    c.line(x, f.top + f.height, x, f.top + f.height + 4, "black");
    c.text(x, f.top + f.height + 16, num(x_lo + frac * (x_hi - x_lo)));
  }
  const double v_top = bw_axis_value(bws, 0);
  const double v_bot = bw_axis_value(bws, bws.size() - 1);
  for (int t = 0; t <= 4; ++t) {
    const double frac = t / 4.0;
    const double y = f.top + frac * f.height;
    c.line(f.left - 4, y, f.left, y, "black");
    c.text(f.left - 8, y + 4, num(std::round((v_top + frac * (v_bot - v_top)) * 1e4) / 1e4), 11,
           "end");
  }
  c.text(f.left + f.width / 2, f.top + f.height + 32, xlab);
}

inline std::string render_sizer(const SiZerMap& map, const std::string& xlab = "x") {
  Frame f;
  Canvas c(f.left + f.width + 20, f.top + f.height + f.bottom_pad);
  static const char* colors[] = {"", "red", "orchid", "blue", "grey"};
  const double cw = f.width / map.m_x;
  const double ch = f.height / map.m_bw;
  for (int row = 0; row < map.m_bw; ++row)
    for (int col = 0; col < map.m_x; ++col)
      c.rect(f.left + col * cw, f.top + row * ch, cw + 0.5, ch + 0.5,
             colors[map.state(row, col)]);
  draw_axes(c, f, map.range_x.first, map.range_x.second, map.range_bws, xlab);
  return c.finish();
}

inline std::string render_mode_forest(const ModeForest& forest, const std::string& xlab = "x") {
  Frame f;
  Canvas c(f.left + f.width + 20, f.top + f.height + f.bottom_pad);
  const double cw = f.width / forest.m_x;
  const double ch = f.height / forest.m_bw;
  for (int row = 0; row < forest.m_bw; ++row)
    for (int col = 0; col < forest.m_x; ++col) {
      const double pct = forest.at(row, col);
      if (pct <= 0.0) continue;
      const int grey = static_cast<int>(std::lround(235.0 - 2.05 * pct));
      const std::string fill =
          "rgb(" + std::to_string(grey) + "," + std::to_string(grey) + "," + std::to_string(grey) + ")";
      c.rect(f.left + col * cw, f.top + row * ch, cw + 0.5, ch + 0.5, fill);
    }
  draw_axes(c, f, forest.range_x.first, forest.range_x.second, forest.range_bws, xlab);
  return c.finish();
}

inline std::string render_mode_tree(const ModeTree& tree, double x_lo, double x_hi,
                                    const std::string& xlab = "x") {
  Frame f;
  Canvas c(f.left + f.width + 20, f.top + f.height + f.bottom_pad);
  const auto& bws = tree.bandwidths;
  const auto rows = bws.size();
  auto x_pix = [&](double x) { return f.left + (x - x_lo) / (x_hi - x_lo) * f.width; };
  auto y_pix = [&](std::size_t row) {
    return rows > 1 ? f.top + f.height * static_cast<double>(row) / static_cast<double>(rows - 1)
                    : f.top;
  };
  // connect every mode to its nearest mode at the coarser level
  for (std::size_t level = 1; level < tree.traces.size(); ++level) {
    const auto& coarse = tree.traces[level - 1];
    if (coarse.empty()) continue;
    for (double m : tree.traces[level]) {
      const double parent = coarse[nearest_index(coarse, m)];
      c.line(x_pix(parent), y_pix(level - 1), x_pix(m), y_pix(level), "black");
    }
  }
  // dashed horizontal markers where splits happen
  for (const auto& sp : tree.splits) {
    std::size_t row = 0;
    for (std::size_t r = 0; r < rows; ++r)
      if (bws.values[r] == sp.bandwidth) row = r;
    double lo = sp.child_locations.front(), hi = sp.child_locations.front();
    for (double v : sp.child_locations) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    c.line(x_pix(lo), y_pix(row), x_pix(hi), y_pix(row), "black", true);
  }
  draw_axes(c, f, x_lo, x_hi, bws, xlab);
  return c.finish();
}

}  // namespace modality::svg
