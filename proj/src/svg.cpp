#include "svg.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <vector>

namespace vpl::cli {

namespace {

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

struct SvgDoc {
  std::ofstream os;
  SvgDoc(const std::string& path, const std::string& config_line, double x0, double y0,
         double w, double h) {
    os.open(path);
    if (!os) throw std::runtime_error("cannot open output file: " + path);
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<!-- " << config_line << " -->\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << fixed6(x0) << ' '
       << fixed6(y0) << ' ' << fixed6(w) << ' ' << fixed6(h) << "\" width=\"640\" "
       << "height=\"640\">\n";
  }
  ~SvgDoc() { os << "</svg>\n"; }

  void polyline(const std::vector<std::pair<double, double>>& pts, const char* stroke,
                double width, const char* dash = nullptr) {
    if (pts.empty()) return;
    os << "<path fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << fixed6(width)
       << "\"";
    if (dash) os << " stroke-dasharray=\"" << dash << "\"";
    os << " d=\"";
    for (std::size_t k = 0; k < pts.size(); ++k)
      os << (k == 0 ? 'M' : 'L') << fixed6(pts[k].first) << ' ' << fixed6(pts[k].second);
    os << "\"/>\n";
  }

  void circle(double cx, double cy, double r, const char* stroke, double width) {
    os << "<circle cx=\"" << fixed6(cx) << "\" cy=\"" << fixed6(cy) << "\" r=\"" << fixed6(r)
       << "\" fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << fixed6(width)
       << "\"/>\n";
  }

  void dot(double cx, double cy, double r, const char* fill) {
    os << "<circle cx=\"" << fixed6(cx) << "\" cy=\"" << fixed6(cy) << "\" r=\"" << fixed6(r)
       << "\" fill=\"" << fill << "\"/>\n";
  }
};

}  // namespace

void write_patch_svg(const std::string& path, const vpl::PatchState<double>& state,
                     const std::string& config_line) {
  const auto& g = *state.w.w.grid();
  vpl::DiskPoissonSolver<double> solver(state.w.w.grid());
  auto pot = vpl::augmented_potential(state.w, state.params.omega, solver);

  // Crossings of Phi = mu along rings and spokes, ordered by angle around
  // the core center.
  const vpl::Vec2d center = vpl::moment_center(state.w.w);
  std::vector<std::pair<double, vpl::Vec2d>> boundary;
  const double mu = state.mu;
  for (Eigen::Index i = 0; i < g.n_r(); ++i)
    for (Eigen::Index j = 0; j < g.n_theta(); ++j) {
      const Eigen::Index jn = (j + 1) % g.n_theta();
      const double a = pot.phi(i, j) - mu, b = pot.phi(i, jn) - mu;
      if ((a > 0) != (b > 0) && a != b) {
        const double t = a / (a - b);
        const double th = g.theta(j) + t * g.dtheta();
        const vpl::Vec2d p(g.r(i) * std::cos(th), g.r(i) * std::sin(th));
        boundary.emplace_back(std::atan2(p.y() - center.y(), p.x() - center.x()), p);
      }
      if (i + 1 < g.n_r()) {
        const double c = pot.phi(i + 1, j) - mu;
        if ((a > 0) != (c > 0) && a != c) {
          const double t = a / (a - c);
          const double r = g.r(i) + t * g.dr();
          const vpl::Vec2d p(r * g.cos_theta(j), r * g.sin_theta(j));
          boundary.emplace_back(std::atan2(p.y() - center.y(), p.x() - center.x()), p);
        }
      }
    }
  std::sort(boundary.begin(), boundary.end(),
            [](const auto& u, const auto& v) { return u.first < v.first; });

  SvgDoc doc(path, config_line, -1.05, -1.05, 2.1, 2.1);
  doc.circle(0.0, 0.0, 1.0, "#333333", 0.006);
  std::vector<std::pair<double, double>> pts;
  pts.reserve(boundary.size() + 1);
  for (const auto& [ang, p] : boundary) pts.emplace_back(p.x(), -p.y());
  if (!pts.empty()) pts.push_back(pts.front());
  doc.polyline(pts, "#c0392b", 0.004);
  doc.dot(center.x(), -center.y(), 0.008, "#2c3e50");
}

void write_profile_svg(const std::string& path, const vpl::PatchState<double>& state,
                       const std::string& config_line) {
  const double eps = 1.0 / std::sqrt(vpl::pi_v<double> * state.params.lambda);
  const vpl::Vec2d center = vpl::moment_center(state.w.w);
  vpl::CoreDirectEval<double> phi(state.w, state.params.omega);
  auto prof = vpl::rescaled_profiles(state);
  const double mu = prof.mu_direct;

  // Plot domain: rho in [-2, 2] (signed along the x-ray), V in [-0.6, 0.4].
  const auto map_x = [](double rho) { return rho; };
  const auto map_y = [](double v) { return -3.0 * v; };  // flip + scale for aspect

  std::vector<std::pair<double, double>> measured, reference;
  for (int k = -200; k <= 200; ++k) {
    const double rho = k / 100.0;
    const vpl::Vec2d p = center + vpl::Vec2d(eps * rho, 0.0);
    if (p.squaredNorm() < 1.0)
      measured.emplace_back(map_x(rho), map_y(vpl::pi_v<double> * (phi(p) - mu)));
    reference.emplace_back(map_x(rho), map_y(vpl::rankine(std::abs(rho))));
  }

  SvgDoc doc(path, config_line, -2.1, -1.35, 4.2, 2.4);
  doc.polyline({{-2.0, 0.0}, {2.0, 0.0}}, "#888888", 0.006);
  doc.polyline({{0.0, -1.25}, {0.0, 1.0}}, "#888888", 0.006);
  doc.polyline(reference, "#2980b9", 0.012, "0.04,0.02");
  doc.polyline(measured, "#c0392b", 0.008);
}

}  // namespace vpl::cli
