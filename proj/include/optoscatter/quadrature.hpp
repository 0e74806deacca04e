#pragma once

// Composite Gauss-Legendre quadrature with breakpoint seeding and adaptive
// bisection. Used for packet-norm checks, the long-time unitarity integral
// and the transient photon-number integrals over the continuum detuning.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "optoscatter/common.hpp"

namespace optoscatter {

struct GlRule {
  std::vector<double> nodes;    // on (-1, 1)
  std::vector<double> weights;
};

// Nodes and weights by Newton iteration on the Legendre recurrence.
inline const GlRule& gl_rule(int n) {
  static std::map<int, GlRule> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  GlRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 1; i <= m; ++i) {
    double z = std::cos(pi * (i - 0.25) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::fabs(z - z1) < 1e-15) break;
    }
    rule.nodes[i - 1] = -z;
    rule.nodes[n - i] = z;
    rule.weights[i - 1] = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.weights[n - i] = rule.weights[i - 1];
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

template <typename F>
double gl_integrate(const F& f, double a, double b, int order = 15) {
  const GlRule& r = gl_rule(order);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i)
    acc += r.weights[i] * f(mid + half * r.nodes[i]);
  return acc * half;
}

struct AdaptiveResult {
  double value = 0.0;
  double error = 0.0;       // accumulated panel error estimates
  double worst_a = 0.0;     // least-converged panel
  double worst_b = 0.0;
  double worst_err = 0.0;
  long evaluations = 0;
};

struct AdaptiveOptions {
  double rel_tol = 1e-6;
  double abs_tol = 0.0;
  int max_depth = 40;
  int order = 15;
  bool throw_on_failure = true;
};

namespace detail {

template <typename F>
void adapt_panel(const F& f, double a, double b, double whole, int depth,
                 double tol, const AdaptiveOptions& opt, AdaptiveResult& out) {
  const double mid = 0.5 * (a + b);
  const double left = gl_integrate(f, a, mid, opt.order);
  const double right = gl_integrate(f, mid, b, opt.order);
  out.evaluations += 2 * opt.order;
  const double err = std::fabs(left + right - whole);
  if (err <= tol || depth >= opt.max_depth) {
    out.value += left + right;
    out.error += err;
    if (err > out.worst_err) {
      out.worst_err = err;
      out.worst_a = a;
      out.worst_b = b;
    }
    if (err > tol && opt.throw_on_failure)
      throw quadrature_error("adaptive quadrature: panel [" +
                             std::to_string(a) + ", " + std::to_string(b) +
                             "] failed to converge (err " + std::to_string(err) +
                             " > " + std::to_string(tol) + ")");
    return;
  }
  adapt_panel(f, a, mid, left, depth + 1, 0.5 * tol, opt, out);
  adapt_panel(f, mid, b, right, depth + 1, 0.5 * tol, opt, out);
}

}  // namespace detail

// Adaptive integration of f over [a, b]; `breakpoints` seed the initial panel
// boundaries (sharp features of the integrand).
template <typename F>
AdaptiveResult adaptive_integrate(const F& f, double a, double b,
                                  std::vector<double> breakpoints,
                                  const AdaptiveOptions& opt = {}) {
  if (!(b > a)) throw invalid_parameter_error("adaptive_integrate: b <= a");
  breakpoints.push_back(a);
  breakpoints.push_back(b);
  std::sort(breakpoints.begin(), breakpoints.end());
  std::vector<double> edges;
  for (double x : breakpoints) {
    if (x < a || x > b) continue;
    if (edges.empty() || x - edges.back() > 1e-12 * (b - a)) edges.push_back(x);
  }
  if (b - edges.back() > 1e-12 * (b - a))
    edges.push_back(b);
  else
    edges.back() = b;

  // One cheap first pass to scale the tolerance.
  double rough = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i)
    rough += std::fabs(gl_integrate(f, edges[i], edges[i + 1], opt.order));
  const double tol_total =
      std::max(opt.abs_tol, opt.rel_tol * std::max(rough, 1e-300));

  AdaptiveResult out;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double whole = gl_integrate(f, edges[i], edges[i + 1], opt.order);
    out.evaluations += opt.order;
    detail::adapt_panel(f, edges[i], edges[i + 1], whole, 0,
                        tol_total * (edges[i + 1] - edges[i]) / (b - a), opt,
                        out);
  }
  return out;
}

// Fixed composite panel grid, graded geometrically toward every breakpoint so
// that features of width `min_scale` are resolved. Refinement is uniform
// panel splitting; nodes are Gauss-Legendre per panel.
struct PanelGrid {
  std::vector<double> panel_edges;  // sorted, size = panels + 1
  int order = 12;

  std::vector<double> nodes;
  std::vector<double> weights;

  void build_nodes() {
    const GlRule& r = gl_rule(order);
    nodes.clear();
    weights.clear();
    for (std::size_t i = 0; i + 1 < panel_edges.size(); ++i) {
      const double a = panel_edges[i], b = panel_edges[i + 1];
      const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (std::size_t j = 0; j < r.nodes.size(); ++j) {
        nodes.push_back(mid + half * r.nodes[j]);
        weights.push_back(half * r.weights[j]);
      }
    }
  }

  PanelGrid refined(int factor) const {
    PanelGrid g;
    g.order = order;
    for (std::size_t i = 0; i + 1 < panel_edges.size(); ++i) {
      const double a = panel_edges[i], b = panel_edges[i + 1];
      for (int k = 0; k < factor; ++k)
        g.panel_edges.push_back(a + (b - a) * k / factor);
    }
    g.panel_edges.push_back(panel_edges.back());
    g.build_nodes();
    return g;
  }
};

inline PanelGrid graded_panels(double a, double b,
                               const std::vector<double>& breakpoints,
                               double min_scale, int order = 12) {
  if (!(b > a)) throw invalid_parameter_error("graded_panels: b <= a");
  std::vector<double> pts{a, b};
  for (double x : breakpoints)
    if (x > a && x < b) pts.push_back(x);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [&](double u, double v) {
                          return std::fabs(u - v) < 0.25 * min_scale;
                        }),
            pts.end());

  std::vector<double> edges;
  edges.push_back(a);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double lo = pts[i], hi = pts[i + 1];
    const double mid = 0.5 * (lo + hi);
    // geometric ladder out of lo and into hi
    std::vector<double> fwd, bwd;
    for (double d = min_scale; lo + d < mid; d *= 2.0) fwd.push_back(lo + d);
    for (double d = min_scale; hi - d > mid; d *= 2.0) bwd.push_back(hi - d);
    for (double x : fwd) edges.push_back(x);
    edges.push_back(mid);
    for (auto it = bwd.rbegin(); it != bwd.rend(); ++it) edges.push_back(*it);
    edges.push_back(hi);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  PanelGrid g;
  g.order = order;
  g.panel_edges = std::move(edges);
  g.build_nodes();
  return g;
}

}  // namespace optoscatter
