#include "dgbench/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace dgbench {

namespace {

std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string fmt_g(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  out.reserve(s.size());
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

// Linear white -> steel blue ramp.
std::string cell_color(double fraction) {
  const double f = std::clamp(fraction, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(255.0 + f * (31.0 - 255.0)));
  const int g = static_cast<int>(std::lround(255.0 + f * (78.0 - 255.0)));
  const int b = static_cast<int>(std::lround(255.0 + f * (140.0 - 255.0)));
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::io, "cannot open file '" + path + "'");
  out << content;
  require(out.good(), ErrorKind::io, "write failed for '" + path + "'");
}

}  // namespace

std::string render_heatmap_svg(const DiscreteJoint& joint,
                               const std::vector<std::string>& cell_names,
                               const std::vector<std::string>& label_names,
                               const std::string& title) {
  require(cell_names.size() == joint.M && label_names.size() == joint.K,
          ErrorKind::logic, "render_heatmap: name counts must match (M, K)");
  const int cw = 84, ch = 46, left = 130, top = title.empty() ? 54 : 78;
  const int width = left + cw * static_cast<int>(joint.K) + 20;
  const int height = top + ch * static_cast<int>(joint.M) + 20;
  double vmax = 0.0;
  for (double v : joint.mass) vmax = std::max(vmax, v);
  if (vmax <= 0.0) vmax = 1.0;

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
       std::to_string(width) + "\" height=\"" + std::to_string(height) +
       "\" font-family=\"monospace\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  if (!title.empty()) {
    s += "<text x=\"" + std::to_string(left) + "\" y=\"24\" font-size=\"14\">" +
         escape_xml(title) + "</text>\n";
  }
  for (std::size_t l = 0; l < joint.K; ++l) {
    const int x = left + static_cast<int>(l) * cw + cw / 2;
    s += "<text x=\"" + std::to_string(x) + "\" y=\"" +
         std::to_string(top - 10) + "\" text-anchor=\"middle\">" +
         escape_xml(label_names[l]) + "</text>\n";
  }
  for (std::size_t c = 0; c < joint.M; ++c) {
    const int y = top + static_cast<int>(c) * ch + ch / 2 + 4;
    s += "<text x=\"" + std::to_string(left - 8) + "\" y=\"" +
         std::to_string(y) + "\" text-anchor=\"end\">" +
         escape_xml(cell_names[c]) + "</text>\n";
    for (std::size_t l = 0; l < joint.K; ++l) {
      const double v = joint.at(c, l);
      const int x = left + static_cast<int>(l) * cw;
      const int yy = top + static_cast<int>(c) * ch;
      s += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(yy) +
           "\" width=\"" + std::to_string(cw) + "\" height=\"" +
           std::to_string(ch) + "\" fill=\"" + cell_color(v / vmax) +
           "\" stroke=\"#cccccc\"/>\n";
      const std::string tcol = v / vmax > 0.6 ? "#ffffff" : "#000000";
      s += "<text x=\"" + std::to_string(x + cw / 2) + "\" y=\"" +
           std::to_string(yy + ch / 2 + 4) +
           "\" text-anchor=\"middle\" fill=\"" + tcol + "\">" + fmt3(v) +
           "</text>\n";
    }
  }
  s += "</svg>\n";
  return s;
}

void render_heatmap(const DiscreteJoint& joint,
                    const std::vector<std::string>& cell_names,
                    const std::vector<std::string>& label_names,
                    const std::string& path, const std::string& title) {
  write_file(path, render_heatmap_svg(joint, cell_names, label_names, title));
}

std::string render_curves_svg(const std::vector<double>& x,
                              const std::vector<CurveSeries>& series,
                              const std::string& x_label,
                              const std::string& y_label,
                              const std::string& title) {
  require(!x.empty() && !series.empty(), ErrorKind::logic,
          "render_curves: empty input");
  for (const auto& s : series) {
    require(s.y.size() == x.size(), ErrorKind::logic,
            "render_curves: series length mismatch");
  }
  const int width = 560, height = 360, left = 70, right = 30, top = 50,
            bottom = 60;
  const int pw = width - left - right, ph = height - top - bottom;
  double xmin = x.front(), xmax = x.front(), ymin = 0.0, ymax = 0.0;
  for (double v : x) {
    xmin = std::min(xmin, v);
    xmax = std::max(xmax, v);
  }
  for (const auto& s : series) {
    for (double v : s.y) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (ymax <= ymin) ymax = ymin + 1.0;
  auto px = [&](double v) {
    return left + (v - xmin) / (xmax - xmin) * pw;
  };
  auto py = [&](double v) {
    return top + (1.0 - (v - ymin) / (ymax - ymin)) * ph;
  };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
       std::to_string(width) + "\" height=\"" + std::to_string(height) +
       "\" font-family=\"monospace\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  s += "<text x=\"" + std::to_string(left) + "\" y=\"24\" font-size=\"14\">" +
       escape_xml(title) + "</text>\n";
  s += "<rect x=\"" + std::to_string(left) + "\" y=\"" + std::to_string(top) +
       "\" width=\"" + std::to_string(pw) + "\" height=\"" +
       std::to_string(ph) + "\" fill=\"none\" stroke=\"#000000\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fy = ymin + (ymax - ymin) * i / 4.0;
    const double fx = xmin + (xmax - xmin) * i / 4.0;
    s += "<text x=\"" + std::to_string(left - 6) + "\" y=\"" +
         fmt_g(py(fy) + 4) + "\" text-anchor=\"end\">" + fmt3(fy) +
         "</text>\n";
    s += "<text x=\"" + fmt_g(px(fx)) + "\" y=\"" +
         std::to_string(top + ph + 18) + "\" text-anchor=\"middle\">" +
         fmt3(fx) + "</text>\n";
  }
  s += "<text x=\"" + std::to_string(left + pw / 2) + "\" y=\"" +
       std::to_string(height - 14) + "\" text-anchor=\"middle\">" +
       escape_xml(x_label) + "</text>\n";
  s += "<text x=\"18\" y=\"" + std::to_string(top + ph / 2) +
       "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       std::to_string(top + ph / 2) + ")\">" + escape_xml(y_label) +
       "</text>\n";
  int legend_y = top + 14;
  for (const auto& sr : series) {
    std::string pts;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!pts.empty()) pts += " ";
      pts += fmt_g(px(x[i])) + "," + fmt_g(py(sr.y[i]));
    }
    s += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" +
         sr.color + "\" stroke-width=\"2\"/>\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
      s += "<circle cx=\"" + fmt_g(px(x[i])) + "\" cy=\"" + fmt_g(py(sr.y[i])) +
           "\" r=\"3\" fill=\"" + sr.color + "\"/>\n";
    }
    s += "<text x=\"" + std::to_string(left + pw - 6) + "\" y=\"" +
         std::to_string(legend_y) + "\" text-anchor=\"end\" fill=\"" +
         sr.color + "\">" + escape_xml(sr.name) + "</text>\n";
    legend_y += 16;
  }
  s += "</svg>\n";
  return s;
}

void render_curves(const std::vector<double>& x,
                   const std::vector<CurveSeries>& series,
                   const std::string& x_label, const std::string& y_label,
                   const std::string& title, const std::string& path) {
  write_file(path, render_curves_svg(x, series, x_label, y_label, title));
}

}  // namespace dgbench
