#pragma once

// Displaced-number-state overlaps <m| exp(beta (b^dag - b)) |n> and the small
// coupling tables built from them. Evaluation goes through log-factorials and
// a rescaled associated-Laguerre recurrence so that indices up to several
// hundred stay finite.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "optoscatter/common.hpp"
#include "optoscatter/core.hpp"

namespace optoscatter {

namespace detail {

// Associated Laguerre L_degree^order(x) for x >= 0 via the degree recurrence,
// rescaled on the fly; returns log of |L| and its sign.
inline void laguerre_log(int degree, int order, double x, double& log_abs,
                         double& sign) {
  double lo = 1.0;            // L_0
  double hi = 1.0 + order - x;  // L_1
  double logscale = 0.0;
  if (degree == 0) {
    hi = lo;
  } else {
    for (int r = 1; r < degree; ++r) {
      const double next =
          ((2.0 * r + order + 1.0 - x) * hi - (r + order) * lo) / (r + 1.0);
      lo = hi;
      hi = next;
      const double mag = std::fabs(hi);
      if (mag > 1e280) {
        hi *= 1e-280;
        lo *= 1e-280;
        logscale += 280.0 * std::log(10.0);
      } else if (mag > 0.0 && mag < 1e-280) {
        hi *= 1e280;
        lo *= 1e280;
        logscale -= 280.0 * std::log(10.0);
      }
    }
  }
  if (hi == 0.0) {
    log_abs = -std::numeric_limits<double>::infinity();
    sign = 0.0;
    return;
  }
  log_abs = std::log(std::fabs(hi)) + logscale;
  sign = hi > 0.0 ? 1.0 : -1.0;
}

}  // namespace detail

// Franck-Condon factor <m| exp(beta (b^dag - b)) |n>, real for real beta.
inline double fc_overlap(int m, int n, double beta) {
  if (m < 0 || n < 0)
    throw invalid_parameter_error("fc_overlap: indices must be >= 0");
  if (beta == 0.0) return m == n ? 1.0 : 0.0;
  // The two index orderings differ exactly by a parity factor; evaluating the
  // ordered branch once keeps that relation bit-exact.
  if (m > n) {
    const double base = fc_overlap(n, m, beta);
    return ((m - n) % 2 != 0) ? -base : base;
  }
  const int d = n - m;
  const double x = beta * beta;
  double log_l, sign_l;
  detail::laguerre_log(m, d, x, log_l, sign_l);
  if (sign_l == 0.0) return 0.0;
  double log_pref = 0.5 * (std::lgamma(m + 1.0) - std::lgamma(n + 1.0)) - 0.5 * x;
  double sign = sign_l;
  if (d > 0) {
    log_pref += d * std::log(std::fabs(beta));
    if (beta > 0.0 && d % 2 != 0) sign = -sign;  // (-beta)^d
  }
  return sign * std::exp(log_pref + log_l);
}

// The four overlap combinations entering the equations of motion. Coaxial
// displacements compose without extra phase, so each reduces to one
// fc_overlap call at a signed displacement.
enum class OverlapKind {
  m2_n1,  // <m~(2)|n~(1)>  -> fc(m, n, -beta0)
  m1_n2,  // <m~(1)|n~(2)>  -> fc(m, n, +beta0)
  m1_n,   // <m~(1)|n>      -> fc(m, n, -beta0)
  m_n1    // <m|n~(1)>      -> fc(m, n, +beta0)
};

inline double overlap_combo(OverlapKind kind, int m, int n,
                            const SystemParams& params) {
  switch (kind) {
    case OverlapKind::m2_n1:
    case OverlapKind::m1_n:
      return fc_overlap(m, n, -params.beta0);
    case OverlapKind::m1_n2:
    case OverlapKind::m_n1:
      return fc_overlap(m, n, params.beta0);
  }
  throw invalid_parameter_error("overlap_combo: unknown kind");
}

enum class FcOrder { exact, zeroth, first };

inline FcOrder fc_order_from_string(const std::string& s) {
  if (s == "exact") return FcOrder::exact;
  if (s == "zeroth") return FcOrder::zeroth;
  if (s == "first") return FcOrder::first;
  throw invalid_parameter_error("unknown fc order '" + s + "'");
}

inline const char* to_string(FcOrder o) {
  switch (o) {
    case FcOrder::exact: return "exact";
    case FcOrder::zeroth: return "zeroth";
    case FcOrder::first: return "first";
  }
  return "?";
}

// Dense table D[m][n] = <m| exp(beta (b^dag - b)) |n>, optionally replaced by
// its zeroth- or first-order small-displacement expansion.
struct FcTable {
  double beta = 0.0;
  int dim = 0;
  FcOrder order = FcOrder::exact;
  std::vector<double> values;  // row-major, dim x dim

  double operator()(int m, int n) const {
    return values[static_cast<std::size_t>(m) * dim + n];
  }

  // <m| exp(-beta (b^dag - b)) |n> equals the transposed entry.
  double transposed(int m, int n) const { return (*this)(n, m); }
};

inline FcTable fc_table(double beta, int dim, FcOrder order = FcOrder::exact) {
  if (dim < 1) throw invalid_parameter_error("fc_table: dim must be >= 1");
  FcTable t;
  t.beta = beta;
  t.dim = dim;
  t.order = order;
  t.values.assign(static_cast<std::size_t>(dim) * dim, 0.0);
  auto at = [&](int m, int n) -> double& {
    return t.values[static_cast<std::size_t>(m) * dim + n];
  };
  switch (order) {
    case FcOrder::exact:
      for (int m = 0; m < dim; ++m)
        for (int n = 0; n < dim; ++n) at(m, n) = fc_overlap(m, n, beta);
      break;
    case FcOrder::zeroth:
      for (int m = 0; m < dim; ++m) at(m, m) = 1.0;
      break;
    case FcOrder::first:
      // D = I + beta (sqrt(n+1) delta_{m,n+1} - sqrt(n) delta_{m,n-1})
      for (int m = 0; m < dim; ++m) at(m, m) = 1.0;
      for (int n = 0; n < dim; ++n) {
        if (n + 1 < dim) at(n + 1, n) = beta * std::sqrt(n + 1.0);
        if (n - 1 >= 0) at(n - 1, n) = -beta * std::sqrt(static_cast<double>(n));
      }
      break;
  }
  return t;
}

// Smallest n_ph such that the retained weight of the widest displacement
// ladder (2 beta0 away from n0) captures all but `tol` of the norm.
inline int recommended_n_ph(const SystemParams& params, int n0_max, double tol) {
  int n_ph = std::max(2, n0_max + 1);
  if (params.beta0 == 0.0) return n_ph;
  const double two_beta = 2.0 * params.beta0;
  for (int cand = n_ph; cand <= 256; ++cand) {
    double kept = 0.0;
    for (int n = 0; n <= cand; ++n) {
      const double f = fc_overlap(n0_max, n, two_beta);
      kept += f * f;
    }
    if (1.0 - kept < tol) return cand;
  }
  throw truncation_error("recommended_n_ph: no truncation below 256 meets tol");
}

}  // namespace optoscatter
