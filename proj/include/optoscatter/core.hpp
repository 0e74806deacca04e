#pragma once

// Physical parameters, photon-packet descriptors, mirror initial states and
// truncation policy shared by every other module. All frequencies are
// expressed in units of the mechanical frequency (omega_m = 1), all times in
// units of 1/omega_m.

#include <cmath>
#include <cstdint>
#include <variant>
#include <vector>

#include "optoscatter/common.hpp"

namespace optoscatter {

struct SystemParams {
  double omega_m = 1.0;  // fixed normalization unit
  double g0 = 0.0;       // radiation-pressure coupling
  double gamma_c = 0.1;  // cavity decay rate
  double beta0 = 0.0;    // g0/omega_m, single-photon displacement
  double nu = 0.0;       // g0^2/omega_m, single-photon frequency shift

  SystemParams() = default;
  SystemParams(double g0_, double gamma_c_) : g0(g0_), gamma_c(gamma_c_) {
    if (!(g0 >= 0.0))
      throw invalid_parameter_error("SystemParams: g0 must be >= 0");
    if (!(gamma_c > 0.0))
      throw invalid_parameter_error("SystemParams: gamma_c must be > 0");
    beta0 = g0 / omega_m;
    nu = g0 * g0 / omega_m;
  }

  SystemParams with_g0(double g0_) const { return SystemParams(g0_, gamma_c); }
};

struct PhotonPacket {
  double delta1 = 0.0;   // center detuning of photon 1
  double delta2 = 0.0;   // center detuning of photon 2
  double epsilon = 0.0;  // spectral half-width

  PhotonPacket() = default;
  PhotonPacket(double d1, double d2, double eps)
      : delta1(d1), delta2(d2), epsilon(eps) {
    if (!(epsilon > 0.0))
      throw invalid_parameter_error("PhotonPacket: epsilon must be > 0");
  }
};

// Mirror initial state: number state, pure superposition of number states,
// or a thermal mixture.
struct FockInit {
  int n0 = 0;
};
struct PureInit {
  std::vector<cplx> coefficients;  // c_{n0}, normalized
};
struct ThermalInit {
  double nbar = 0.0;
};

class MirrorInit {
 public:
  using Variant = std::variant<FockInit, PureInit, ThermalInit>;

  static MirrorInit fock(int n0) {
    if (n0 < 0) throw invalid_parameter_error("MirrorInit: n0 must be >= 0");
    return MirrorInit(FockInit{n0});
  }

  static MirrorInit pure(std::vector<cplx> coeffs) {
    if (coeffs.empty())
      throw invalid_parameter_error("MirrorInit: empty coefficient list");
    double norm2 = 0.0;
    for (const cplx& c : coeffs) norm2 += std::norm(c);
    if (std::abs(norm2 - 1.0) > 1e-12)
      throw invalid_parameter_error(
          "MirrorInit: pure-state coefficients not normalized (|sum|c|^2 - 1| = " +
          std::to_string(std::abs(norm2 - 1.0)) + ")");
    return MirrorInit(PureInit{std::move(coeffs)});
  }

  static MirrorInit thermal(double nbar) {
    if (!(nbar >= 0.0))
      throw invalid_parameter_error("MirrorInit: nbar must be >= 0");
    return MirrorInit(ThermalInit{nbar});
  }

  const Variant& state() const { return state_; }

  bool is_pure_like() const { return !std::holds_alternative<ThermalInit>(state_); }

  // Coherent amplitudes c_{n0}. Fock |n0> is the 1-element special case.
  std::vector<cplx> coherent_coefficients() const {
    if (const auto* f = std::get_if<FockInit>(&state_)) {
      std::vector<cplx> c(static_cast<std::size_t>(f->n0) + 1, cplx(0.0));
      c.back() = 1.0;
      return c;
    }
    if (const auto* p = std::get_if<PureInit>(&state_)) return p->coefficients;
    throw invalid_parameter_error("MirrorInit: thermal state has no coherent amplitudes");
  }

  // Statistical weights p_{n0} truncated at max_n0 (inclusive). For thermal
  // states p_n = nbar^n / (1+nbar)^(n+1); the truncation deficit is the
  // missing tail weight.
  std::vector<double> weights(int max_n0, double* deficit = nullptr) const {
    std::vector<double> p(static_cast<std::size_t>(max_n0) + 1, 0.0);
    if (const auto* f = std::get_if<FockInit>(&state_)) {
      if (f->n0 > max_n0)
        throw truncation_error("MirrorInit: Fock label exceeds truncation");
      p[static_cast<std::size_t>(f->n0)] = 1.0;
      if (deficit) *deficit = 0.0;
      return p;
    }
    if (const auto* ps = std::get_if<PureInit>(&state_)) {
      double tail = 0.0;
      for (std::size_t n = 0; n < ps->coefficients.size(); ++n) {
        if (static_cast<int>(n) <= max_n0)
          p[n] = std::norm(ps->coefficients[n]);
        else
          tail += std::norm(ps->coefficients[n]);
      }
      if (deficit) *deficit = tail;
      return p;
    }
    const auto& th = std::get<ThermalInit>(state_);
    if (th.nbar == 0.0) {
      p[0] = 1.0;
      if (deficit) *deficit = 0.0;
      return p;
    }
    const double ratio = th.nbar / (1.0 + th.nbar);
    double w = 1.0 / (1.0 + th.nbar);
    double sum = 0.0;
    for (int n = 0; n <= max_n0; ++n) {
      p[static_cast<std::size_t>(n)] = w;
      sum += w;
      w *= ratio;
    }
    if (deficit) *deficit = 1.0 - sum;
    return p;
  }

  // Largest initial phonon label carrying weight above `tol` of the total.
  int max_label(double tol) const {
    if (const auto* f = std::get_if<FockInit>(&state_)) return f->n0;
    if (const auto* p = std::get_if<PureInit>(&state_)) {
      int last = 0;
      for (std::size_t n = 0; n < p->coefficients.size(); ++n)
        if (std::norm(p->coefficients[n]) > 0.0) last = static_cast<int>(n);
      return last;
    }
    const auto& th = std::get<ThermalInit>(state_);
    if (th.nbar == 0.0) return 0;
    // tail weight beyond M is (nbar/(1+nbar))^(M+1)
    const double r = th.nbar / (1.0 + th.nbar);
    int m = 0;
    double tail = r;
    while (tail > tol && m < 512) {
      ++m;
      tail *= r;
    }
    return m;
  }

 private:
  explicit MirrorInit(Variant v) : state_(std::move(v)) {}
  Variant state_;
};

struct Truncation {
  int n_ph = 8;            // max phonon index kept in every sum
  double tol = 1e-8;       // truncation target
  double k_window = 0.0;   // half-width of the detuning integration window
  double quad_tol = 1e-6;  // quadrature relative tolerance

  Truncation() = default;
  Truncation(int n_ph_, double tol_ = 1e-8, double k_window_ = 0.0,
             double quad_tol_ = 1e-6)
      : n_ph(n_ph_), tol(tol_), k_window(k_window_), quad_tol(quad_tol_) {
    if (n_ph < 1) throw invalid_parameter_error("Truncation: n_ph must be >= 1");
    if (!(tol > 0.0)) throw invalid_parameter_error("Truncation: tol must be > 0");
    if (!(quad_tol > 0.0))
      throw invalid_parameter_error("Truncation: quad_tol must be > 0");
  }

  // Default window: wide enough for the cavity Lorentzian tails and all
  // phonon sidebands retained by n_ph.
  double window(const SystemParams& p, const PhotonPacket& pk) const {
    if (k_window > 0.0) return k_window;
    return 40.0 * std::max(p.gamma_c, pk.epsilon) + 4.0 * p.omega_m * (n_ph + 1);
  }
};

// Normalization constant of the two-photon Lorentzian packet.
inline double packet_norm(const PhotonPacket& packet) {
  if (!(packet.epsilon > 0.0))
    throw invalid_parameter_error("packet_norm: epsilon must be > 0");
  const double eps = packet.epsilon;
  const double d = packet.delta1 - packet.delta2;
  const double bracket = 1.0 + 4.0 * eps * eps / (d * d + 4.0 * eps * eps);
  return eps / pi / std::sqrt(bracket);
}

// Two-photon amplitude of the incident packet on final mirror state m, at
// detunings (dp, dq). Vanishes unless m equals the initial mirror label.
inline cplx initial_amplitude_c(int m, double dp, double dq,
                                const PhotonPacket& packet, int n0) {
  if (m < 0 || n0 < 0)
    throw invalid_parameter_error("initial_amplitude_c: indices must be >= 0");
  if (m != n0) return cplx(0.0);
  const double eps = packet.epsilon;
  const cplx ieps(0.0, eps);
  const cplx a = 1.0 / ((dp - packet.delta1 + ieps) * (dq - packet.delta2 + ieps));
  const cplx b = 1.0 / ((dp - packet.delta2 + ieps) * (dq - packet.delta1 + ieps));
  return packet_norm(packet) * (a + b);
}

}  // namespace optoscatter
