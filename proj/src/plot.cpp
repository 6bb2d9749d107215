#include "rpgrasp/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace rpgrasp {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  // Avoid "-0.00" so equal geometry always prints equally.
  return std::string(buf) == "-0.00" ? "0.00" : buf;
}

std::string rank_colour(std::size_t rank, std::size_t count) {
  const double t = count > 1 ? static_cast<double>(rank) / static_cast<double>(count - 1) : 0.0;
  const int r = static_cast<int>(std::lround(220.0 * (1.0 - t) + 30.0 * t));
  const int b = static_cast<int>(std::lround(30.0 * (1.0 - t) + 220.0 * t));
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x40%02x", r, b);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axes {
  int u;
  int v;
  const char* name;
};

}  // namespace

std::vector<Segment> gripper_segments(const GripperSpec& spec, const GripperConfig& cfg) {
  const LinkPoses links = forward_kinematics(spec, cfg);
  std::vector<Segment> out;
  out.reserve(kLinkCount);
  for (std::size_t i = 0; i < kLinkCount; ++i) {
    const Capsule c = spec.capsule(i);
    out.push_back({links[i].position(), links[i].transform_point(Eigen::Vector3d(c.length, 0.0, 0.0))});
  }
  return out;
}

std::vector<std::size_t> weight_ranks(const std::vector<WeightedPoint>& kernels) {
  std::vector<std::size_t> order(kernels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return kernels[a].weight > kernels[b].weight; });
  std::vector<std::size_t> rank(kernels.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;
  return rank;
}

std::string render_svg(const PlotLayers& layers, const PlotOptions& options) {
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  auto grow = [&](const Eigen::Vector3d& p) {
    if (!p.allFinite()) return;
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  };
  for (const auto& p : layers.cloud) grow(p);
  for (const auto& s : layers.links) {
    grow(s.a);
    grow(s.b);
  }
  for (const auto& k : layers.kernels) grow(k.position);
  if (!(lo.array() <= hi.array()).all()) {
    lo.setConstant(-0.5);
    hi.setConstant(0.5);
  }
  const Eigen::Vector3d centre = 0.5 * (lo + hi);
  const double extent = std::max((hi - lo).maxCoeff(), 1e-6);
  const double inner = options.panel - 2.0 * options.margin;
  const double scale = inner / extent;
  const double top = options.title.empty() ? 0.0 : 24.0;

  const Axes panels[3] = {{0, 1, "top (x-y)"}, {0, 2, "front (x-z)"}, {1, 2, "side (y-z)"}};
  const std::vector<std::size_t> ranks = weight_ranks(layers.kernels);
  std::vector<std::size_t> draw_order(layers.kernels.size());
  for (std::size_t i = 0; i < ranks.size(); ++i) draw_order[ranks.size() - 1 - ranks[i]] = i;

  std::ostringstream svg;
  const double width = 3.0 * options.panel;
  const double height = options.panel + top + 18.0;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
      << "\" viewBox=\"0 0 " << fmt(width) << ' ' << fmt(height) << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!options.title.empty())
    svg << "<text x=\"" << fmt(options.margin) << "\" y=\"16\" font-family=\"sans-serif\" font-size=\"13\">"
        << escape(options.title) << "</text>\n";

  for (int k = 0; k < 3; ++k) {
    const Axes& ax = panels[k];
    const double ox = k * options.panel;
    auto px = [&](const Eigen::Vector3d& p) { return ox + options.panel / 2.0 + scale * (p[ax.u] - centre[ax.u]); };
    auto py = [&](const Eigen::Vector3d& p) {
      return top + options.panel / 2.0 - scale * (p[ax.v] - centre[ax.v]);
    };
    svg << "<g>\n<rect x=\"" << fmt(ox + 1) << "\" y=\"" << fmt(top + 1) << "\" width=\"" << fmt(options.panel - 2)
        << "\" height=\"" << fmt(options.panel - 2) << "\" fill=\"none\" stroke=\"#bbbbbb\"/>\n";
    svg << "<text x=\"" << fmt(ox + options.margin) << "\" y=\"" << fmt(top + options.panel + 14)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << ax.name << "</text>\n";
    for (const auto& p : layers.cloud)
      svg << "<circle cx=\"" << fmt(px(p)) << "\" cy=\"" << fmt(py(p)) << "\" r=\"" << fmt(options.point_radius)
          << "\" fill=\"#888888\"/>\n";
    for (const auto& s : layers.links)
      svg << "<line x1=\"" << fmt(px(s.a)) << "\" y1=\"" << fmt(py(s.a)) << "\" x2=\"" << fmt(px(s.b)) << "\" y2=\""
          << fmt(py(s.b)) << "\" stroke=\"#1a7a1a\" stroke-width=\"2.5\" stroke-linecap=\"round\"/>\n";
    for (std::size_t i : draw_order) {
      const auto& p = layers.kernels[i].position;
      svg << "<circle cx=\"" << fmt(px(p)) << "\" cy=\"" << fmt(py(p)) << "\" r=\""
          << fmt(1.5 * options.point_radius) << "\" fill=\"" << rank_colour(ranks[i], ranks.size()) << "\"/>\n";
    }
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace rpgrasp
