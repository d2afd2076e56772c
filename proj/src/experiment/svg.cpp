#include "pfuse/experiment/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace pfuse::experiment {

namespace {

const char* const kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2",
                                "#59a14f", "#edc948", "#b07aa1", "#ff9da7"};

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string header(int width, int height) {
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" "
      << "font-size=\"11\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return out.str();
}

std::string text(double x, double y, const std::string& s, const char* anchor = "middle") {
  return "<text x=\"" + fixed(x) + "\" y=\"" + fixed(y) + "\" text-anchor=\"" + anchor + "\">" +
         s + "</text>\n";
}

}  // namespace

std::string gauc_bars_svg(const EvaluationTable& t) {
  const std::vector<std::pair<const char*, const std::vector<double>*>> methods = {
      {"ranking", &t.ranking}, {"formula", &t.formula}, {"pantheon", &t.pantheon}};
  double lo = 1.0;
  double hi = 0.0;
  for (const auto& [name, values] : methods) {
    for (double v : *values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  lo = std::max(0.0, lo - 0.02);
  hi = std::min(1.0, hi + 0.02);
  if (!(hi > lo)) hi = lo + 0.01;

  const int width = 760;
  const int height = 360;
  const double left = 50;
  const double right = 20;
  const double top = 30;
  const double bottom = 60;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  const double group_w = plot_w / static_cast<double>(std::max<std::size_t>(1, t.objectives.size()));
  const double bar_w = group_w * 0.8 / static_cast<double>(methods.size());
  auto y_of = [&](double v) { return top + plot_h * (1.0 - (v - lo) / (hi - lo)); };

  std::ostringstream out;
  out << header(width, height);
  out << text(width / 2.0, 18, "GAUC per objective");
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    const double y = y_of(v);
    out << "<line x1=\"" << fixed(left) << "\" y1=\"" << fixed(y) << "\" x2=\""
        << fixed(width - right) << "\" y2=\"" << fixed(y) << "\" stroke=\"#dddddd\"/>\n";
    out << text(left - 4, y + 4, fixed(v, 3), "end");
  }
  for (std::size_t o = 0; o < t.objectives.size(); ++o) {
    const double gx = left + group_w * static_cast<double>(o) + group_w * 0.1;
    for (std::size_t m = 0; m < methods.size(); ++m) {
      const double v = methods[m].second->at(o);
      const double x = gx + bar_w * static_cast<double>(m);
      const double y = y_of(v);
      out << "<rect x=\"" << fixed(x) << "\" y=\"" << fixed(y) << "\" width=\"" << fixed(bar_w)
          << "\" height=\"" << fixed(top + plot_h - y) << "\" fill=\"" << kPalette[m]
          << "\"><title>" << methods[m].first << ' ' << t.objectives[o] << ' ' << fixed(v, 4)
          << "</title></rect>\n";
    }
    out << text(left + group_w * (static_cast<double>(o) + 0.5), top + plot_h + 16,
                t.objectives[o]);
  }
  for (std::size_t m = 0; m < methods.size(); ++m) {
    const double x = left + 120.0 * static_cast<double>(m);
    out << "<rect x=\"" << fixed(x) << "\" y=\"" << height - 22 << "\" width=\"12\" height=\"12\" "
        << "fill=\"" << kPalette[m] << "\"/>\n";
    out << text(x + 16, height - 12, methods[m].first, "start");
  }
  out << "</svg>\n";
  return out.str();
}

std::string weight_trajectories_svg(const std::vector<std::string>& objectives,
                                    const std::vector<nlohmann::ordered_json>& trail) {
  const int width = 760;
  const int height = 360;
  const double left = 50;
  const double right = 110;
  const double top = 30;
  const double bottom = 40;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  // Point k is the weight vector in force during round k; the last point is
  // the vector after the final action.
  std::vector<std::vector<double>> series(objectives.size());
  std::vector<bool> replaced;
  for (const auto& r : trail) {
    for (std::size_t o = 0; o < objectives.size(); ++o) {
      series[o].push_back(r.at("weights").at(objectives[o]).get<double>());
    }
    replaced.push_back(r.at("action").get<std::string>() == "replace_base");
  }
  if (!trail.empty()) {
    for (std::size_t o = 0; o < objectives.size(); ++o) {
      series[o].push_back(trail.back().at("weights_after").at(objectives[o]).get<double>());
    }
  }
  double hi = 0.0;
  for (const auto& s : series) {
    for (double v : s) hi = std::max(hi, v);
  }
  hi = hi > 0.0 ? hi * 1.1 : 1.0;
  const std::size_t points = trail.size() + 1;
  auto x_of = [&](std::size_t k) {
    return left + (points > 1 ? plot_w * static_cast<double>(k) / static_cast<double>(points - 1)
                              : plot_w / 2.0);
  };
  auto y_of = [&](double v) { return top + plot_h * (1.0 - v / hi); };

  std::ostringstream out;
  out << header(width, height);
  out << text((left + width - right) / 2.0, 18, "Objective weights over IPPO rounds");
  for (int k = 0; k <= 4; ++k) {
    const double v = hi * k / 4.0;
    out << "<line x1=\"" << fixed(left) << "\" y1=\"" << fixed(y_of(v)) << "\" x2=\""
        << fixed(left + plot_w) << "\" y2=\"" << fixed(y_of(v)) << "\" stroke=\"#dddddd\"/>\n";
    out << text(left - 4, y_of(v) + 4, fixed(v, 3), "end");
  }
  for (std::size_t k = 0; k < replaced.size(); ++k) {
    if (!replaced[k]) continue;
    out << "<line x1=\"" << fixed(x_of(k + 1)) << "\" y1=\"" << fixed(top) << "\" x2=\""
        << fixed(x_of(k + 1)) << "\" y2=\"" << fixed(top + plot_h)
        << "\" stroke=\"#999999\" stroke-dasharray=\"3,3\"><title>base replaced after round "
        << k << "</title></line>\n";
  }
  for (std::size_t o = 0; o < objectives.size(); ++o) {
    const char* color = kPalette[o % std::size(kPalette)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < series[o].size(); ++k) {
      out << (k ? " " : "") << fixed(x_of(k)) << ',' << fixed(y_of(series[o][k]));
    }
    out << "\"/>\n";
    const double ly = top + 14.0 * static_cast<double>(o);
    out << "<rect x=\"" << fixed(left + plot_w + 12) << "\" y=\"" << fixed(ly) << "\" width=\"10\" "
        << "height=\"10\" fill=\"" << color << "\"/>\n";
    out << text(left + plot_w + 26, ly + 9, objectives[o], "start");
  }
  out << text(left + plot_w / 2.0, height - 10, "round");
  out << "</svg>\n";
  return out.str();
}

std::string kendall_table_svg(const EvaluationTable& t) {
  const int row_h = 22;
  const int width = 300;
  const int height = row_h * static_cast<int>(t.objectives.size() + 2) + 10;
  std::ostringstream out;
  out << header(width, height);
  out << text(width / 2.0, 16, "Kendall tau vs ranking predictions");
  const double cols[] = {60, 170, 250};
  out << text(cols[0], 2 * row_h, "pxtr") << text(cols[1], 2 * row_h, "formula")
      << text(cols[2], 2 * row_h, "pantheon");
  for (std::size_t o = 0; o < t.objectives.size(); ++o) {
    const double y = row_h * static_cast<double>(o + 3);
    out << text(cols[0], y, t.objectives[o]) << text(cols[1], y, fixed(t.kendall_formula.at(o), 4))
        << text(cols[2], y, fixed(t.kendall_pantheon.at(o), 4));
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace pfuse::experiment
