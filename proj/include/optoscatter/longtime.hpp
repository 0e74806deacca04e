#pragma once

// Long-time two-photon scattering amplitudes. The four physical channels
// (direct reflection, single-photon scattering, sequential two-photon
// scattering, cascade two-photon scattering) are assembled into the full
// exchange-symmetric amplitude. The sequential and cascade channels carry
// triple phonon sums which are evaluated by sequential contraction along the
// coupling chain, O(n_ph^2) per point instead of O(n_ph^3).

#include <cmath>
#include <vector>

#include "optoscatter/common.hpp"
#include "optoscatter/core.hpp"
#include "optoscatter/franck_condon.hpp"

namespace optoscatter {

// The six resonance denominators of the scattering channels at one point of
// the detuning plane, for one set of intermediate phonon indices and one
// packet orientation (drive detuning delta_a). All have strictly positive
// imaginary part for gamma_c, epsilon > 0.
struct ResonanceDenominators {
  cplx emit_line;     // single-photon emission at dp, intermediate n
  cplx drive_line;    // packet drive at dp
  cplx pair_drive;    // two-photon packet drive at dp+dq
  cplx pair_mixed;    // one absorbed + one still incident, intermediate l
  cplx drive_mid;     // packet drive at dp, intermediate n'
  cplx pair_cavity;   // both photons inside, intermediate n'
};

inline ResonanceDenominators denominators(const SystemParams& sp,
                                          const PhotonPacket& pk, int n0, int m,
                                          int n, int nprime, int l, double dp,
                                          double dq, double delta_a) {
  const double w = sp.omega_m, nu = sp.nu, gc = sp.gamma_c, eps = pk.epsilon;
  ResonanceDenominators d;
  d.emit_line = cplx(dp + nu + (m - n) * w, 0.5 * gc);
  d.drive_line = cplx(dp - delta_a + (m - n0) * w, eps);
  d.pair_drive = cplx(dp + dq - pk.delta1 - pk.delta2 + (m - n0) * w, 2.0 * eps);
  d.pair_mixed = cplx(dp + dq - delta_a + nu + (m - l) * w, 0.5 * gc + eps);
  d.drive_mid = cplx(dp - delta_a + (m - nprime) * w, eps);
  d.pair_cavity = cplx(dp + dq + 4.0 * nu + (m - nprime) * w, gc);
  return d;
}

// Evaluation context for a fixed (params, packet, truncation, n0) tuple.
// Holds the coupling table and the n0 coupling column so repeated grid
// evaluation touches no table construction.
struct AmplitudeContext {
  SystemParams params;
  PhotonPacket packet;
  Truncation trunc;
  int n0 = 0;
  FcTable fc;                    // <m| exp(+beta0 (b^dag-b)) |n>
  std::vector<double> fc_n0;     // <l~(1)|n0> = fc(n0, l)

  AmplitudeContext(const SystemParams& params_, const PhotonPacket& packet_,
                   const Truncation& trunc_, int n0_,
                   FcOrder order = FcOrder::exact)
      : params(params_), packet(packet_), trunc(trunc_), n0(n0_) {
    if (n0 < 0) throw invalid_parameter_error("AmplitudeContext: n0 must be >= 0");
    if (trunc.n_ph < n0 + 1)
      throw invalid_parameter_error(
          "AmplitudeContext: truncation n_ph must exceed the initial phonon label");
    fc = fc_table(params.beta0, trunc.n_ph + 1, order);
    fc_n0.resize(fc.dim);
    for (int l = 0; l < fc.dim; ++l) fc_n0[l] = fc(n0, l);
  }

  int dim() const { return fc.dim; }
};

namespace detail {

struct LongtimeScratch {
  std::vector<cplx> v1, v2, v3;
  void ensure(int dim) {
    if (static_cast<int>(v1.size()) < dim) {
      v1.resize(dim);
      v2.resize(dim);
      v3.resize(dim);
    }
  }
};

inline LongtimeScratch& longtime_scratch() {
  thread_local LongtimeScratch s;
  return s;
}

}  // namespace detail

// Direct two-photon reflection off the fixed mirror; the mirror state is
// unchanged. Not exchange-symmetrized (that happens in longtime_amplitude;
// for this channel the exchange swap doubles as the packet-orientation swap).
inline cplx amp_reflect(const AmplitudeContext& ctx, int m, double dp, double dq) {
  if (m < 0) throw invalid_parameter_error("amp_reflect: m must be >= 0");
  if (m != ctx.n0) return cplx(0.0);
  const double eps = ctx.packet.epsilon;
  return 1.0 / (cplx(dp - ctx.packet.delta1, eps) * cplx(dq - ctx.packet.delta2, eps));
}

// One photon scatters through the cavity while the other reflects.
inline cplx amp_single(const AmplitudeContext& ctx, int m, double dp, double dq) {
  if (m < 0) throw invalid_parameter_error("amp_single: m must be >= 0");
  const auto& sp = ctx.params;
  const auto& pk = ctx.packet;
  const double w = sp.omega_m, eps = pk.epsilon, gc = sp.gamma_c;
  const int dim = ctx.dim();

  cplx chain(0.0);
  for (int n = 0; n < dim; ++n) {
    const double f2 = ctx.fc(m, n) * ctx.fc(ctx.n0, n);
    if (f2 == 0.0) continue;
    const cplx emit_line(dp + sp.nu + (m - n) * w, 0.5 * gc);
    chain += f2 / emit_line;
  }

  const bool degenerate = pk.delta1 == pk.delta2;
  cplx total(0.0);
  for (int orient = 0; orient < (degenerate ? 1 : 2); ++orient) {
    const double da = orient == 0 ? pk.delta1 : pk.delta2;
    const double db = orient == 0 ? pk.delta2 : pk.delta1;
    const cplx drive_line(dp - da + (m - ctx.n0) * w, eps);
    const cplx reflect_line(dq - db, eps);
    total += chain / (drive_line * reflect_line);
  }
  if (degenerate) total *= 2.0;
  return -iu * gc * total;
}

// Sequential two-photon scattering: the second photon enters after the first
// has left; at most one photon is ever inside.
inline cplx amp_sequential(const AmplitudeContext& ctx, int m, double dp, double dq) {
  if (m < 0) throw invalid_parameter_error("amp_sequential: m must be >= 0");
  const auto& sp = ctx.params;
  const auto& pk = ctx.packet;
  const double w = sp.omega_m, eps = pk.epsilon, gc = sp.gamma_c, nu = sp.nu;
  const int dim = ctx.dim();
  auto& ws = detail::longtime_scratch();
  ws.ensure(dim);

  const cplx pair_drive(dp + dq - pk.delta1 - pk.delta2 + (m - ctx.n0) * w, 2.0 * eps);
  const bool degenerate = pk.delta1 == pk.delta2;
  cplx total(0.0);
  for (int orient = 0; orient < (degenerate ? 1 : 2); ++orient) {
    const double da = orient == 0 ? pk.delta1 : pk.delta2;
    for (int l = 0; l < dim; ++l) {
      const cplx pair_mixed(dp + dq - da + nu + (m - l) * w, 0.5 * gc + eps);
      ws.v1[l] = ctx.fc_n0[l] / pair_mixed;
    }
    for (int np = 0; np < dim; ++np) {
      cplx acc(0.0);
      for (int l = 0; l < dim; ++l) acc += ctx.fc(np, l) * ws.v1[l];
      const cplx drive_mid(dp - da + (m - np) * w, eps);
      ws.v2[np] = acc / drive_mid;
    }
    for (int n = 0; n < dim; ++n) {
      cplx acc(0.0);
      for (int np = 0; np < dim; ++np) acc += ctx.fc(np, n) * ws.v2[np];
      ws.v3[n] = acc;
    }
    cplx sum(0.0);
    for (int n = 0; n < dim; ++n) {
      const cplx emit_line(dp + nu + (m - n) * w, 0.5 * gc);
      sum += ctx.fc(m, n) * ws.v3[n] / emit_line;
    }
    total += sum;
  }
  if (degenerate) total *= 2.0;
  return -gc * gc * total / pair_drive;
}

// Cascade two-photon scattering with both photons inside the cavity; the
// mirror picks up the 4 nu two-photon shift while they are.
inline cplx amp_cascade(const AmplitudeContext& ctx, int m, double dp, double dq) {
  if (m < 0) throw invalid_parameter_error("amp_cascade: m must be >= 0");
  const auto& sp = ctx.params;
  const auto& pk = ctx.packet;
  const double w = sp.omega_m, eps = pk.epsilon, gc = sp.gamma_c, nu = sp.nu;
  const int dim = ctx.dim();
  auto& ws = detail::longtime_scratch();
  ws.ensure(dim);

  const cplx pair_drive(dp + dq - pk.delta1 - pk.delta2 + (m - ctx.n0) * w, 2.0 * eps);
  const bool degenerate = pk.delta1 == pk.delta2;
  cplx total(0.0);
  for (int orient = 0; orient < (degenerate ? 1 : 2); ++orient) {
    const double da = orient == 0 ? pk.delta1 : pk.delta2;
    for (int l = 0; l < dim; ++l) {
      const cplx pair_mixed(dp + dq - da + nu + (m - l) * w, 0.5 * gc + eps);
      ws.v1[l] = ctx.fc_n0[l] / pair_mixed;
    }
    for (int np = 0; np < dim; ++np) {
      cplx acc(0.0);
      for (int l = 0; l < dim; ++l) acc += ctx.fc(l, np) * ws.v1[l];
      const cplx pair_cavity(dp + dq + 4.0 * nu + (m - np) * w, gc);
      ws.v2[np] = acc / pair_cavity;
    }
    for (int n = 0; n < dim; ++n) {
      cplx acc(0.0);
      for (int np = 0; np < dim; ++np) acc += ctx.fc(n, np) * ws.v2[np];
      ws.v3[n] = acc;
    }
    cplx sum(0.0);
    for (int n = 0; n < dim; ++n) {
      const cplx emit_line(dp + nu + (m - n) * w, 0.5 * gc);
      sum += ctx.fc(m, n) * ws.v3[n] / emit_line;
    }
    total += sum;
  }
  if (degenerate) total *= 2.0;
  return -2.0 * gc * gc * total / pair_drive;
}

// Full long-time amplitude on final mirror state |m>, normalized by the
// packet constant and symmetrized in the two outgoing detunings. The
// modulus-one evolution phase is dropped; it cancels in every observable.
inline cplx longtime_amplitude(const AmplitudeContext& ctx, int m, double dp,
                               double dq) {
  const cplx fwd = amp_reflect(ctx, m, dp, dq) + amp_single(ctx, m, dp, dq) +
                   amp_sequential(ctx, m, dp, dq) + amp_cascade(ctx, m, dp, dq);
  const cplx rev = amp_reflect(ctx, m, dq, dp) + amp_single(ctx, m, dq, dp) +
                   amp_sequential(ctx, m, dq, dp) + amp_cascade(ctx, m, dq, dp);
  return packet_norm(ctx.packet) * (fwd + rev);
}

}  // namespace optoscatter
