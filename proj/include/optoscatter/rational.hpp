#pragma once

// Laplace-domain rational terms (scalar prefactor over a product of simple
// pole factors) and their exact inverse transform by residues. Poles that
// coincide within the clustering tolerance are merged into a double pole;
// higher confluence is rejected.

#include <cmath>
#include <cstring>
#include <string>
#include <unordered_map>
#include <vector>

#include "optoscatter/common.hpp"

namespace optoscatter {

struct RationalTerm {
  cplx prefactor{0.0};
  std::vector<cplx> poles;

  RationalTerm() = default;
  RationalTerm(cplx pref, std::vector<cplx> p)
      : prefactor(pref), poles(std::move(p)) {
    for (const cplx& s : poles)
      if (s.real() > 1e-12)
        throw invalid_parameter_error(
            "RationalTerm: pole with positive real part (" +
            std::to_string(s.real()) + ")");
  }
};

namespace detail {

struct PoleCluster {
  cplx value;
  int multiplicity;
};

inline std::vector<PoleCluster> cluster_poles(const std::vector<cplx>& poles,
                                              double tol) {
  std::vector<PoleCluster> clusters;
  for (const cplx& s : poles) {
    bool merged = false;
    for (auto& c : clusters) {
      if (std::abs(s - c.value) < tol) {
        if (c.multiplicity >= 2)
          throw confluence_error(
              "pole confluence beyond multiplicity 2 near s = (" +
              std::to_string(c.value.real()) + ", " +
              std::to_string(c.value.imag()) + ")");
        c.value = 0.5 * (c.value + s);
        ++c.multiplicity;
        merged = true;
        break;
      }
    }
    if (!merged) clusters.push_back({s, 1});
  }
  return clusters;
}

}  // namespace detail

inline constexpr double default_pole_cluster_tol = 1e-9;

// Exponential-sum representation f(t) = sum_i a_i e^{s_i t}
//                                      + sum_j b_j t e^{d_j t},
// the result of inverting a batch of rational terms. Residues at identical
// poles are accumulated so evaluation cost depends on distinct poles only.
struct ExpSum {
  std::vector<cplx> poles;
  std::vector<cplx> coeff;
  std::vector<cplx> dpoles;  // double-pole t-coefficients
  std::vector<cplx> dcoeff;

  cplx eval(double t) const {
    cplx acc(0.0);
    for (std::size_t i = 0; i < poles.size(); ++i)
      acc += coeff[i] * std::exp(poles[i] * t);
    for (std::size_t j = 0; j < dpoles.size(); ++j)
      acc += dcoeff[j] * t * std::exp(dpoles[j] * t);
    return acc;
  }

  void add_term(const RationalTerm& term,
                double cluster_tol = default_pole_cluster_tol) {
    const auto clusters = detail::cluster_poles(term.poles, cluster_tol);
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      cplx denom(1.0);
      for (std::size_t o = 0; o < clusters.size(); ++o) {
        if (o == c) continue;
        const cplx diff = clusters[c].value - clusters[o].value;
        denom *= diff;
        if (clusters[o].multiplicity == 2) denom *= diff;
      }
      if (clusters[c].multiplicity == 1) {
        push(poles, coeff, clusters[c].value, term.prefactor / denom);
      } else {
        // residue of e^{st}/((s-d)^2 prod) at the double pole d
        cplx sum_inv(0.0);
        for (std::size_t o = 0; o < clusters.size(); ++o) {
          if (o == c) continue;
          sum_inv += static_cast<double>(clusters[o].multiplicity) /
                     (clusters[c].value - clusters[o].value);
        }
        push(dpoles, dcoeff, clusters[c].value, term.prefactor / denom);
        push(poles, coeff, clusters[c].value,
             -term.prefactor * sum_inv / denom);
      }
    }
  }

 private:
  void push(std::vector<cplx>& ps, std::vector<cplx>& cs, cplx s, cplx a) {
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (ps[i] == s) {
        cs[i] += a;
        return;
      }
    }
    ps.push_back(s);
    cs.push_back(a);
  }
};

// Inverse Laplace transform of a batch of rational terms at time t.
inline cplx invert(const std::vector<RationalTerm>& terms, double t,
                   double cluster_tol = default_pole_cluster_tol) {
  if (t < 0.0) throw invalid_parameter_error("invert: t must be >= 0");
  ExpSum sum;
  for (const auto& term : terms) sum.add_term(term, cluster_tol);
  return sum.eval(t);
}

// lim_{s->inf} s * f~(s): the time-domain value at t = 0+. Nonzero only for
// terms with a single pole factor.
inline cplx initial_value_limit(const std::vector<RationalTerm>& terms) {
  cplx acc(0.0);
  for (const auto& term : terms)
    if (term.poles.size() == 1) acc += term.prefactor;
  return acc;
}

}  // namespace optoscatter
