#pragma once

// Transient cavity dynamics from the exact Laplace-domain solution: the
// two-photon amplitude A_m(t), the one-photon continuum amplitudes B_{m,k}(t)
// as rational-term batches inverted by residues, the photon probabilities
// P1(t), P2(t), the equal-time correlation g2, coupling-strength scans and
// the sideband-resonance predictor.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "optoscatter/common.hpp"
#include "optoscatter/core.hpp"
#include "optoscatter/franck_condon.hpp"
#include "optoscatter/quadrature.hpp"
#include "optoscatter/rational.hpp"

namespace optoscatter {

struct TransientTrace {
  std::vector<double> times;
  std::vector<double> p1;
  std::vector<double> p2;
  std::vector<double> g2;  // NaN where undefined
};

inline double pole_cluster_tol(const SystemParams& params) {
  return 1e-9 * std::max(params.omega_m, params.gamma_c);
}

// g2 = 2 P2 / (2 P2 + P1)^2; NaN when both probabilities sit below the
// floating floor (undefined correlation, distinct from zero).
inline double g2_of_probs(double p1, double p2) {
  if (p1 < 0.0 || p2 < 0.0)
    throw invalid_parameter_error("g2_of_probs: probabilities must be >= 0");
  if (p1 < 1e-300 && p2 < 1e-300)
    return std::numeric_limits<double>::quiet_NaN();
  const double denom = 2.0 * p2 + p1;
  return 2.0 * p2 / (denom * denom);
}

// Coupling strengths at which two incident photons on single-photon
// resonance can enter the cavity simultaneously: g0 = sqrt(n/2).
inline std::vector<double> sideband_resonances(int n_max) {
  if (n_max < 0)
    throw invalid_parameter_error("sideband_resonances: n_max must be >= 0");
  std::vector<double> g;
  g.reserve(n_max + 1);
  for (int n = 0; n <= n_max; ++n) g.push_back(std::sqrt(0.5 * n));
  return g;
}

// Two-photon cavity amplitude in the Laplace domain: one rational term per
// intermediate phonon index and packet orientation.
inline std::vector<RationalTerm> laplace_a(int m, int n0,
                                           const SystemParams& params,
                                           const PhotonPacket& packet,
                                           const Truncation& trunc) {
  if (m < 0 || n0 < 0)
    throw invalid_parameter_error("laplace_a: indices must be >= 0");
  if (m > trunc.n_ph || n0 > trunc.n_ph)
    throw invalid_parameter_error("laplace_a: index exceeds n_ph");
  const double w = params.omega_m, gc = params.gamma_c, nu = params.nu;
  const double eps = packet.epsilon;
  const double norm = packet_norm(packet);
  const double base_pref = 2.0 * std::sqrt(2.0) * pi * norm * gc;

  const cplx pole_pair(-2.0 * eps,
                       -(packet.delta1 + packet.delta2 + n0 * w));
  const cplx pole_cavity2(-gc, -(m * w - 4.0 * nu));

  std::vector<double> f(trunc.n_ph + 1);
  double fmax = 0.0;
  for (int n = 0; n <= trunc.n_ph; ++n) {
    f[n] = fc_overlap(m, n, -params.beta0) * fc_overlap(n, n0, -params.beta0);
    fmax = std::max(fmax, std::fabs(f[n]));
  }

  std::vector<RationalTerm> terms;
  const double deltas[2] = {packet.delta1, packet.delta2};
  for (int n = 0; n <= trunc.n_ph; ++n) {
    if (std::fabs(f[n]) < 1e-16 * fmax) continue;
    for (double dj : deltas) {
      const cplx pole_filter(-eps - 0.5 * gc, -(dj - nu + n * w));
      terms.emplace_back(cplx(base_pref * f[n]),
                         std::vector<cplx>{pole_pair, pole_cavity2, pole_filter});
    }
  }
  return terms;
}

namespace detail {

// One Laplace-domain term of the continuum amplitude with the detuning of
// the observed mode left symbolic: poles marked k_dep get -i*dk added, and
// an optional detuning-Lorentzian scalar multiplies the prefactor.
struct BTermTemplate {
  cplx pref;
  double scalar_delta = std::numeric_limits<double>::quiet_NaN();
  struct Pole {
    cplx base;
    bool k_dep;
  };
  std::vector<Pole> poles;

  RationalTerm instantiate(double dk, double eps) const {
    cplx p = pref;
    if (!std::isnan(scalar_delta)) p /= cplx(dk - scalar_delta, eps);
    std::vector<cplx> ps;
    ps.reserve(poles.size());
    for (const auto& pl : poles)
      ps.push_back(pl.k_dep ? pl.base + cplx(0.0, -dk) : pl.base);
    return RationalTerm(p, std::move(ps));
  }
};

inline std::vector<BTermTemplate> b_term_templates(int m, int n0,
                                                   const SystemParams& params,
                                                   const PhotonPacket& packet,
                                                   const Truncation& trunc) {
  const double w = params.omega_m, gc = params.gamma_c, nu = params.nu;
  const double beta = params.beta0;
  const double eps = packet.epsilon;
  const double norm = packet_norm(packet);
  const double xi = std::sqrt(gc / (2.0 * pi));
  const double deltas[2] = {packet.delta1, packet.delta2};

  std::vector<BTermTemplate> out;
  const BTermTemplate::Pole pole_cavity1{
      cplx(-0.5 * gc, -(-nu + m * w)), true};
  const cplx pole_pair(-2.0 * eps, -(packet.delta1 + packet.delta2 + n0 * w));

  // direct filtering of one packet photon through the cavity
  const double f_direct = fc_overlap(m, n0, -beta);
  for (int j = 0; j < 2; ++j) {
    const double da = deltas[j], db = deltas[1 - j];
    BTermTemplate t;
    t.pref = -2.0 * pi * xi * norm * f_direct;
    t.scalar_delta = db;
    t.poles = {pole_cavity1, {cplx(-eps, -(da + n0 * w)), true}};
    out.push_back(std::move(t));
  }

  // paths through the two-photon state and sequential one-photon paths
  const int dim = trunc.n_ph + 1;
  std::vector<double> f2(dim * dim), f3(dim * dim);
  double fmax2 = 0.0, fmax3 = 0.0;
  for (int n = 0; n < dim; ++n)
    for (int l = 0; l < dim; ++l) {
      const double fl = fc_overlap(l, n0, -beta);
      f2[n * dim + l] =
          fc_overlap(m, n, beta) * fc_overlap(n, l, -beta) * fl;
      f3[n * dim + l] =
          fc_overlap(m, n, -beta) * fc_overlap(n, l, beta) * fl;
      fmax2 = std::max(fmax2, std::fabs(f2[n * dim + l]));
      fmax3 = std::max(fmax3, std::fabs(f3[n * dim + l]));
    }

  for (int n = 0; n < dim; ++n) {
    const cplx pole_cavity2(-gc, -(n * w - 4.0 * nu));
    for (int l = 0; l < dim; ++l) {
      const double fv2 = f2[n * dim + l];
      const double fv3 = f3[n * dim + l];
      for (int j = 0; j < 2; ++j) {
        const double da = deltas[j];
        const cplx pole_filter(-eps - 0.5 * gc, -(da - nu + l * w));
        if (std::fabs(fv2) >= 1e-16 * fmax2) {
          BTermTemplate t;
          t.pref = -4.0 * pi * iu * xi * norm * gc * fv2;
          t.poles = {pole_cavity1,
                     {pole_pair, false},
                     {pole_cavity2, false},
                     {pole_filter, false}};
          out.push_back(std::move(t));
        }
        if (std::fabs(fv3) >= 1e-16 * fmax3) {
          BTermTemplate t;
          t.pref = -2.0 * pi * iu * xi * norm * gc * fv3;
          t.poles = {pole_cavity1,
                     {pole_pair, false},
                     {cplx(-eps, -(da + n * w)), true},
                     {pole_filter, false}};
          out.push_back(std::move(t));
        }
      }
    }
  }
  return out;
}

}  // namespace detail

// Continuum amplitude B_{m,k} in the Laplace domain at observed detuning
// k_detuning.
inline std::vector<RationalTerm> laplace_b(int m, double k_detuning, int n0,
                                           const SystemParams& params,
                                           const PhotonPacket& packet,
                                           const Truncation& trunc) {
  if (m < 0 || n0 < 0)
    throw invalid_parameter_error("laplace_b: indices must be >= 0");
  if (m > trunc.n_ph || n0 > trunc.n_ph)
    throw invalid_parameter_error("laplace_b: index exceeds n_ph");
  std::vector<RationalTerm> terms;
  for (const auto& tmpl : detail::b_term_templates(m, n0, params, packet, trunc))
    terms.push_back(tmpl.instantiate(k_detuning, packet.epsilon));
  return terms;
}

namespace detail {

// Residues of many rational-term batches collected over shared poles, one
// coefficient row per batch. Evaluating all rows at a time t then costs one
// complex exp per distinct pole.
struct SharedPoleTable {
  std::vector<cplx> poles;
  std::vector<cplx> dpoles;
  std::vector<std::vector<cplx>> coeff;   // [row][pole index]
  std::vector<std::vector<cplx>> dcoeff;  // [row][dpole index]
  std::vector<cplx> expbuf, dexpbuf;

  void reset(std::size_t rows) {
    poles.clear();
    dpoles.clear();
    coeff.assign(rows, {});
    dcoeff.assign(rows, {});
  }

  void add_term(std::size_t row, const RationalTerm& term, double cluster_tol) {
    const auto clusters = cluster_poles(term.poles, cluster_tol);
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      cplx denom(1.0);
      for (std::size_t o = 0; o < clusters.size(); ++o) {
        if (o == c) continue;
        const cplx diff = clusters[c].value - clusters[o].value;
        denom *= diff;
        if (clusters[o].multiplicity == 2) denom *= diff;
      }
      if (clusters[c].multiplicity == 1) {
        add(row, poles, coeff, clusters[c].value, term.prefactor / denom);
      } else {
        cplx sum_inv(0.0);
        for (std::size_t o = 0; o < clusters.size(); ++o) {
          if (o == c) continue;
          sum_inv += static_cast<double>(clusters[o].multiplicity) /
                     (clusters[c].value - clusters[o].value);
        }
        add(row, dpoles, dcoeff, clusters[c].value, term.prefactor / denom);
        add(row, poles, coeff, clusters[c].value,
            -term.prefactor * sum_inv / denom);
      }
    }
  }

  void prepare(double t) {
    expbuf.resize(poles.size());
    for (std::size_t i = 0; i < poles.size(); ++i)
      expbuf[i] = std::exp(poles[i] * t);
    dexpbuf.resize(dpoles.size());
    for (std::size_t i = 0; i < dpoles.size(); ++i)
      dexpbuf[i] = t * std::exp(dpoles[i] * t);
  }

  cplx eval_row(std::size_t row) const {
    cplx acc(0.0);
    const auto& cs = coeff[row];
    for (std::size_t i = 0; i < cs.size(); ++i) acc += cs[i] * expbuf[i];
    const auto& ds = dcoeff[row];
    for (std::size_t i = 0; i < ds.size(); ++i) acc += ds[i] * dexpbuf[i];
    return acc;
  }

 private:
  void add(std::size_t row, std::vector<cplx>& ps,
           std::vector<std::vector<cplx>>& cs, cplx s, cplx a) {
    std::size_t idx = ps.size();
    for (std::size_t i = 0; i < ps.size(); ++i)
      if (ps[i] == s) {
        idx = i;
        break;
      }
    if (idx == ps.size()) ps.push_back(s);
    auto& rowv = cs[row];
    if (rowv.size() <= idx) rowv.resize(idx + 1, cplx(0.0));
    rowv[idx] += a;
  }
};

}  // namespace detail

// Photon probabilities and g2 for a packet scattering off a cavity whose
// mirror starts in `mirror`. P2 comes from the two-photon amplitudes, P1 from
// the continuum integral over the observed-photon detuning, carried out on a
// graded composite Gauss-Legendre grid refined until self-consistent.
inline TransientTrace probabilities(const MirrorInit& mirror,
                                    const SystemParams& params,
                                    const PhotonPacket& packet,
                                    const Truncation& trunc,
                                    std::vector<double> times) {
  for (double t : times)
    if (t < 0.0)
      throw invalid_parameter_error("probabilities: times must be >= 0");

  const int n0_max = mirror.max_label(trunc.tol);
  if (trunc.n_ph < n0_max + 1) {
    double deficit = 0.0;
    try {
      mirror.weights(trunc.n_ph, &deficit);
    } catch (const truncation_error&) {
      deficit = 1.0;
    }
    throw truncation_error(
        "probabilities: mirror state not representable at n_ph = " +
        std::to_string(trunc.n_ph) + " (weight deficit " +
        std::to_string(deficit) + "); raise n_ph above " +
        std::to_string(n0_max));
  }

  const bool pure = mirror.is_pure_like();
  std::vector<cplx> coeffs;
  std::vector<double> weights;
  std::vector<int> labels;  // n0 values with support
  if (pure) {
    coeffs = mirror.coherent_coefficients();
    for (std::size_t n = 0; n < coeffs.size(); ++n)
      if (std::norm(coeffs[n]) > 0.0) labels.push_back(static_cast<int>(n));
  } else {
    double deficit = 0.0;
    weights = mirror.weights(n0_max, &deficit);
    if (deficit > trunc.tol)
      throw truncation_error("probabilities: thermal weight deficit " +
                             std::to_string(deficit) + " exceeds tol");
    for (std::size_t n = 0; n < weights.size(); ++n)
      if (weights[n] > 0.0) labels.push_back(static_cast<int>(n));
  }

  const double ctol = pole_cluster_tol(params);
  const int dim = trunc.n_ph + 1;

  TransientTrace trace;
  trace.times = std::move(times);
  const std::size_t nt = trace.times.size();
  trace.p1.assign(nt, 0.0);
  trace.p2.assign(nt, 0.0);
  trace.g2.assign(nt, std::numeric_limits<double>::quiet_NaN());
  if (nt == 0) return trace;

  // ---- P2 ----------------------------------------------------------------
  // rows: pure -> final phonon index m; mixed -> (n0, m) with weights
  {
    detail::SharedPoleTable table;
    std::vector<double> row_weight;
    if (pure) {
      table.reset(dim);
      row_weight.assign(dim, 1.0);
      for (int n0 : labels) {
        const cplx c = coeffs[n0];
        for (int m = 0; m < dim; ++m)
          for (auto term : laplace_a(m, n0, params, packet, trunc)) {
            term.prefactor *= c;
            table.add_term(m, term, ctol);
          }
      }
    } else {
      table.reset(labels.size() * dim);
      row_weight.assign(labels.size() * dim, 0.0);
      for (std::size_t i = 0; i < labels.size(); ++i)
        for (int m = 0; m < dim; ++m) {
          row_weight[i * dim + m] = weights[labels[i]];
          for (const auto& term : laplace_a(m, labels[i], params, packet, trunc))
            table.add_term(i * dim + m, term, ctol);
        }
    }
    for (std::size_t it = 0; it < nt; ++it) {
      table.prepare(trace.times[it]);
      double acc = 0.0;
      for (std::size_t r = 0; r < row_weight.size(); ++r)
        acc += row_weight[r] * std::norm(table.eval_row(r));
      trace.p2[it] = acc;
    }
  }

  // ---- P1 ----------------------------------------------------------------
  const double window = trunc.window(params, packet);
  const double t_max =
      *std::max_element(trace.times.begin(), trace.times.end());
  const int order = 16;

  // feature ladders in the observed detuning
  std::vector<double> breakpoints;
  const double ladder_base[5] = {packet.delta1, packet.delta2, -params.nu,
                                 -3.0 * params.nu,
                                 packet.delta1 + packet.delta2 + params.nu};
  for (double b : ladder_base)
    for (int k = -(trunc.n_ph + 2); k <= trunc.n_ph + 2; ++k)
      breakpoints.push_back(b + k * params.omega_m);
  const double min_scale = 0.5 * std::min(packet.epsilon, 0.25 * params.gamma_c);
  PanelGrid grid = graded_panels(-window, window, breakpoints, min_scale, order);

  // cap panel width so the t_max oscillations of the integrand stay resolved
  if (t_max > 0.0) {
    const double h_max = 1.5 * order / t_max;
    std::vector<double> edges;
    for (std::size_t i = 0; i + 1 < grid.panel_edges.size(); ++i) {
      const double a = grid.panel_edges[i], b = grid.panel_edges[i + 1];
      edges.push_back(a);
      const int parts = static_cast<int>(std::ceil((b - a) / h_max));
      for (int k = 1; k < parts; ++k) edges.push_back(a + (b - a) * k / parts);
    }
    edges.push_back(grid.panel_edges.back());
    grid.panel_edges = std::move(edges);
    grid.build_nodes();
  }

  // templates for every (n0, m) pair in play
  std::vector<std::vector<std::vector<detail::BTermTemplate>>> templates(
      labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    templates[i].resize(dim);
    for (int m = 0; m < dim; ++m)
      templates[i][m] =
          detail::b_term_templates(m, labels[i], params, packet, trunc);
  }

  auto eval_grid = [&](const PanelGrid& g, std::vector<double>& p1_out) {
    p1_out.assign(nt, 0.0);
    detail::SharedPoleTable table;
    const std::size_t rows = pure ? static_cast<std::size_t>(dim)
                                  : labels.size() * dim;
    std::vector<double> row_weight(rows, 1.0);
    if (!pure)
      for (std::size_t i = 0; i < labels.size(); ++i)
        for (int m = 0; m < dim; ++m)
          row_weight[i * dim + m] = weights[labels[i]];

    for (std::size_t node = 0; node < g.nodes.size(); ++node) {
      const double dk = g.nodes[node];
      const double wq = g.weights[node];
      table.reset(rows);
      for (std::size_t i = 0; i < labels.size(); ++i)
        for (int m = 0; m < dim; ++m)
          for (const auto& tmpl : templates[i][m]) {
            RationalTerm term = tmpl.instantiate(dk, packet.epsilon);
            if (pure) term.prefactor *= coeffs[labels[i]];
            const std::size_t row =
                pure ? static_cast<std::size_t>(m) : i * dim + m;
            table.add_term(row, term, ctol);
          }
      for (std::size_t it = 0; it < nt; ++it) {
        table.prepare(trace.times[it]);
        double acc = 0.0;
        for (std::size_t r = 0; r < rows; ++r)
          acc += row_weight[r] * std::norm(table.eval_row(r));
        p1_out[it] += wq * acc;
      }
    }
  };

  std::vector<double> p1_coarse, p1_fine;
  eval_grid(grid, p1_coarse);
  PanelGrid fine = grid.refined(2);
  eval_grid(fine, p1_fine);
  double max_diff = 0.0;
  for (std::size_t it = 0; it < nt; ++it)
    max_diff = std::max(max_diff, std::fabs(p1_fine[it] - p1_coarse[it]));
  int refinement = 2;
  while (max_diff > trunc.quad_tol && refinement <= 8) {
    refinement *= 2;
    p1_coarse = p1_fine;
    fine = grid.refined(refinement);
    eval_grid(fine, p1_fine);
    max_diff = 0.0;
    for (std::size_t it = 0; it < nt; ++it)
      max_diff = std::max(max_diff, std::fabs(p1_fine[it] - p1_coarse[it]));
  }
  if (max_diff > trunc.quad_tol) {
    // locate the least-converged panel for the report
    std::size_t worst = 0;
    double worst_w = 0.0;
    for (std::size_t i = 0; i + 1 < grid.panel_edges.size(); ++i) {
      const double width = grid.panel_edges[i + 1] - grid.panel_edges[i];
      if (width > worst_w) {
        worst_w = width;
        worst = i;
      }
    }
    throw quadrature_error(
        "probabilities: continuum quadrature not converged (|dP1| = " +
        std::to_string(max_diff) + " > quad_tol, worst panel [" +
        std::to_string(grid.panel_edges[worst]) + ", " +
        std::to_string(grid.panel_edges[worst + 1]) + "])");
  }
  trace.p1 = p1_fine;

  for (std::size_t it = 0; it < nt; ++it) {
    const double denom = 2.0 * trace.p2[it] + trace.p1[it];
    if (denom > 1e-10)
      trace.g2[it] = g2_of_probs(trace.p1[it], trace.p2[it]);
  }
  return trace;
}

// Packet construction rule for coupling scans: detunings may track the
// single-photon resonance -nu(g0).
struct PacketRule {
  bool delta1_minus_nu = true;
  double delta1 = 0.0;
  bool delta2_minus_nu = true;
  double delta2 = 0.0;
  double epsilon = 0.01;

  PhotonPacket resolve(const SystemParams& params) const {
    const double d1 = delta1_minus_nu ? -params.nu : delta1;
    const double d2 = delta2_minus_nu ? -params.nu : delta2;
    return PhotonPacket(d1, d2, epsilon);
  }
};

// g2 at probe time t_probe for a list of coupling strengths.
inline std::vector<std::pair<double, double>> g2_scan(
    const std::vector<double>& g0_values, double t_probe,
    const MirrorInit& mirror, const SystemParams& base_params,
    const PacketRule& rule, const Truncation& trunc) {
  if (!(t_probe > 0.0))
    throw invalid_parameter_error("g2_scan: t_probe must be > 0");
  std::vector<std::pair<double, double>> out;
  out.reserve(g0_values.size());
  for (double g0 : g0_values) {
    const SystemParams params = base_params.with_g0(g0);
    const PhotonPacket packet = rule.resolve(params);
    const TransientTrace tr =
        probabilities(mirror, params, packet, trunc, {t_probe});
    out.emplace_back(g0, tr.g2[0]);
  }
  return out;
}

}  // namespace optoscatter
