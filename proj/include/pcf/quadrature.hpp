// Adaptive Simpson integration with caller-supplied initial split points.
//
// The split points matter: several integrands here have sharp interior peaks
// (Laplace-type factors exp(k*h(s))) that a purely recursive scheme can miss
// if the first panels straddle the peak.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pcf/errors.hpp"

namespace pcf {

struct QuadratureOptions {
  double abs_tol = 1e-12;
  int max_depth = 48;          // per-panel bisection depth
  std::vector<double> splits;  // interior split points, need not be sorted
};

namespace detail {

struct SimpsonState {
  const std::function<double(double)>* f;
  int max_depth;
  std::uint64_t evals = 0;
  double worst_panel_err = 0.0;
};

inline double simpson(double fa, double fm, double fb, double h) {
  return h / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adapt(SimpsonState& st, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = (*st.f)(lm);
  const double frm = (*st.f)(rm);
  st.evals += 2;
  const double left = simpson(fa, flm, fm, m - a);
  const double right = simpson(fm, frm, fb, b - m);
  const double err = left + right - whole;
  if (depth >= st.max_depth || std::fabs(err) <= 15.0 * tol) {
    if (depth >= st.max_depth) {
      st.worst_panel_err = std::max(st.worst_panel_err, std::fabs(err) / 15.0);
    }
    return left + right + err / 15.0;  // Richardson correction
  }
  return adapt(st, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
         adapt(st, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

}  // namespace detail

// Integrates f over [a,b].  Throws NumericError if panels hit the recursion
// cap while still exceeding the tolerance budget by a wide margin.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               const QuadratureOptions& opt = {}) {
  if (!(b > a)) return 0.0;
  std::vector<double> pts;
  pts.push_back(a);
  for (double s : opt.splits) {
    if (s > a && s < b) pts.push_back(s);
  }
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());

  detail::SimpsonState st{&f, opt.max_depth};
  double total = 0.0;
  const double panel_tol = opt.abs_tol / static_cast<double>(pts.size() - 1);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double lo = pts[i], hi = pts[i + 1];
    const double mid = 0.5 * (lo + hi);
    const double flo = f(lo), fmid = f(mid), fhi = f(hi);
    st.evals += 3;
    const double whole = detail::simpson(flo, fmid, fhi, hi - lo);
    total += detail::adapt(st, lo, hi, flo, fmid, fhi, whole, panel_tol, 0);
  }
  if (st.worst_panel_err > 1e3 * opt.abs_tol) {
    throw NumericError("adaptive Simpson failed to converge: residual panel error " +
                       std::to_string(st.worst_panel_err) + " after " +
                       std::to_string(st.evals) + " evaluations on [" + std::to_string(a) +
                       "," + std::to_string(b) + "]");
  }
  return total;
}

}  // namespace pcf
