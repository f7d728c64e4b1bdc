#pragma once

// Escape time of phi' = q phi^2 + b phi + k from 0 to an upper limit, i.e.
// the definite integral of 1 / g over [0, upper]. Closed form plus an
// adaptive Gauss-Kronrod evaluation used as an internal cross-check.

#include <array>
#include <cmath>
#include <functional>
#include <limits>

#include "evtobs/error.hpp"

namespace evtobs {

/// Closed form of \int_0^upper ds / (q s^2 + b s + k) for k, q > 0, b >= 0.
/// The arctan and rational branches use z = upper / (2k + b upper), which
/// avoids cancellation between endpoint terms.
template <typename Scalar>
Scalar quadratic_escape_time(Scalar k, Scalar b, Scalar q, Scalar upper,
                             Scalar disc_tol = Scalar(1e-12)) {
  if (!(k > 0) || !(q > 0) || !(b >= 0))
    throw Error(ErrorCode::NonpositiveCoefficient, "escape-time polynomial needs k, q > 0, b >= 0");
  if (!(upper >= 0)) throw Error(ErrorCode::NonpositiveCoefficient, "upper limit must be >= 0");
  const Scalar z = upper / (2 * k + b * upper);
  const Scalar disc = b * b - 4 * q * k;
  if (std::abs(disc) <= disc_tol * (b * b + 4 * q * k)) return 2 * z;
  if (disc < 0) {
    const Scalar w = std::sqrt(-disc);
    return 2 * std::atan(w * z) / w;
  }
  // 2 atanh(s z) / s with 1 - s z formed without cancellation (b - s = 4qk / (b + s)).
  const Scalar s = std::sqrt(disc);
  const Scalar num = 2 * k + (b + s) * upper;
  const Scalar den = 2 * k + 4 * q * k * upper / (b + s);
  return std::log(num / den) / s;
}

/// Adaptive 7/15-point Gauss-Kronrod quadrature.
template <typename Scalar, typename F>
Scalar gauss_kronrod(const F& f, Scalar lo, Scalar hi, Scalar rel_tol = Scalar(1e-13),
                     int max_depth = 40) {
  static constexpr std::array<double, 8> xk = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr std::array<double, 8> wk = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> wg = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

  std::function<Scalar(Scalar, Scalar, int)> segment = [&](Scalar a, Scalar b, int depth) {
    const Scalar mid = (a + b) / 2, half = (b - a) / 2;
    const Scalar fc = f(mid);
    Scalar kron = Scalar(wk[7]) * fc;
    Scalar gauss = Scalar(wg[3]) * fc;
    for (int j = 0; j < 7; ++j) {
      const Scalar dx = half * Scalar(xk[j]);
      const Scalar sum = f(mid - dx) + f(mid + dx);
      kron += Scalar(wk[j]) * sum;
      if (j % 2 == 1) gauss += Scalar(wg[j / 2]) * sum;
    }
    kron *= half;
    gauss *= half;
    if (depth >= max_depth || std::abs(kron - gauss) <= rel_tol * std::abs(kron))
      return kron;
    return segment(a, mid, depth + 1) + segment(mid, b, depth + 1);
  };
  if (hi == lo) return Scalar(0);
  return segment(lo, hi, 0);
}

/// Same integral by quadrature; used to cross-check the closed form.
template <typename Scalar>
Scalar quadratic_escape_time_numeric(Scalar k, Scalar b, Scalar q, Scalar upper) {
  return gauss_kronrod<Scalar>([&](Scalar s) { return Scalar(1) / (q * s * s + b * s + k); },
                               Scalar(0), upper);
}

}  // namespace evtobs
