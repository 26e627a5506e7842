#include "pcf/tree_analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "pcf/errors.hpp"
#include "pcf/quadrature.hpp"

namespace pcf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_alpha(double alpha, bool allow_zero) {
  if (std::isnan(alpha) || alpha == kInf || alpha < 0.0 || (!allow_zero && alpha == 0.0)) {
    throw ValidationError("alpha out of range");
  }
}

void require_time(double t) {
  if (std::isnan(t) || t < 0.0) throw ValidationError("time must be >= 0 (or +inf)");
}

// log of a positive big integer, accurate to a few ulps of the result.
double log_cpp_int(const boost::multiprecision::cpp_int& x) {
  if (x <= 0) throw ContractError("log_cpp_int: value must be positive");
  const unsigned m = boost::multiprecision::msb(x);
  if (m <= 52) return std::log(x.convert_to<double>());
  const unsigned shift = m - 52;
  const auto hi = boost::multiprecision::cpp_int(x >> shift).convert_to<std::uint64_t>();
  return std::log(double(hi)) + double(shift) * 0.6931471805599453094;
}

constexpr std::uint64_t kExactCountBudget = 100000;  // max d*k for exact counts

}  // namespace

double open_prob(double alpha, double t) {
  require_alpha(alpha, /*allow_zero=*/true);
  require_time(t);
  if (t == kInf) return 1.0 / (1.0 + alpha);
  return -std::expm1(-(1.0 + alpha) * t) / (1.0 + alpha);
}

double percolation_time(double alpha, double t) {
  require_alpha(alpha, /*allow_zero=*/true);
  require_time(t);
  // 1 - e^{-tau} == open_prob(alpha, t); expm1/log1p keep both tails sharp.
  return -std::log1p(std::expm1(-(1.0 + alpha) * t) / (1.0 + alpha));
}

double meanfield_time(double alpha, double t) {
  require_alpha(alpha, /*allow_zero=*/true);
  require_time(t);
  if (alpha == 0.0) return t;
  if (t == kInf) return 1.0 / alpha;
  return -std::expm1(-alpha * t) / alpha;
}

double critical_alpha(std::uint32_t d) {
  if (d < 2) throw ValidationError("critical_alpha: branching degree must be >= 2");
  return double(d) - 1.0;
}

double critical_time(std::uint32_t d, double alpha) {
  if (d < 2) throw ValidationError("critical_time: branching degree must be >= 2");
  require_alpha(alpha, /*allow_zero=*/true);
  if (!(alpha < double(d) - 1.0)) {
    throw ValidationError("critical_time: requires alpha < d - 1");
  }
  // Solves open_prob(alpha, t) == 1/d.
  return -std::log1p(-(1.0 + alpha) / double(d)) / (1.0 + alpha);
}

namespace {

// Integrand machinery for the frozen-at-random-time subtree probability.
//
// Averaging p^a (1-p)^b over the freeze time, with p the open-and-joined
// probability at that time, reduces by the substitution
//     s = (1 - (1+alpha) p)^{alpha/(1+alpha)}
// to the unit-interval integral of p(s)^a (1-p(s))^b with
//     p(s) = (1 - s^{(1+alpha)/alpha}) / (1+alpha);
// the freeze-density prefactor cancels exactly.  The integrand is evaluated
// as exp(h - M) with h = a log p + b log(1-p) and M the maximum of h over
// the reachable range p in [0, 1/(1+alpha)], so that the quadrature always
// works on a function with values in [0, 1] and the result is returned in
// log space.  The s-image of the maximiser is seeded as a panel split: the
// peak is interior for a/(a+b) < 1/(1+alpha) and sharpens like 1/sqrt(a+b),
// so quadratures that only refine from the endpoints can miss it entirely.
struct ClusterIntegrand {
  double alpha;
  double a;
  double b;
  double q;        // (1+alpha)/alpha
  double log_max;  // M

  double p_of_s(double s) const {
    if (s <= 0.0) return 1.0 / (1.0 + alpha);
    if (s >= 1.0) return 0.0;
    return -std::expm1(q * std::log(s)) / (1.0 + alpha);
  }
  double h_of_p(double p) const {
    double h = 0.0;
    if (a > 0.0) {
      if (p <= 0.0) return -kInf;
      h += a * std::log(p);
    }
    if (b > 0.0) h += b * std::log1p(-p);
    return h;
  }
  double operator()(double s) const {
    const double h = h_of_p(p_of_s(s));
    return h == -kInf ? 0.0 : std::exp(h - log_max);
  }
};

}  // namespace

double log_cluster_prob(double alpha, std::uint64_t edge_count, std::uint64_t boundary_count) {
  require_alpha(alpha, /*allow_zero=*/false);
  if (edge_count == 0 && boundary_count == 0) return 0.0;  // probability one
  ClusterIntegrand f;
  f.alpha = alpha;
  f.a = double(edge_count);
  f.b = double(boundary_count);
  f.q = (1.0 + alpha) / alpha;
  const double p_sup = 1.0 / (1.0 + alpha);

  QuadratureOptions opt;
  opt.abs_tol = 1e-13;
  opt.max_depth = 48;
  opt.splits = {0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875};

  double peak_p;  // maximiser of h over [0, p_sup]
  if (edge_count == 0) {
    peak_p = 0.0;  // h decreasing; peak at s = 1
  } else {
    const double p_star = f.a / (f.a + f.b);
    if (p_star >= p_sup) {
      peak_p = p_sup;  // peak at s = 0
    } else {
      peak_p = p_star;
      const double s_star = std::pow(1.0 - (1.0 + alpha) * p_star, 1.0 / f.q);
      opt.splits.push_back(0.5 * s_star);
      opt.splits.push_back(s_star);
      opt.splits.push_back(0.5 * (1.0 + s_star));
    }
  }
  f.log_max = f.h_of_p(peak_p);

  const double integral = adaptive_simpson([&f](double s) { return f(s); }, 0.0, 1.0, opt);
  if (!(integral > 0.0)) {
    throw NumericError("log_cluster_prob: quadrature returned a non-positive mass");
  }
  return f.log_max + std::log(integral);
}

double cluster_prob(double alpha, std::uint64_t edge_count, std::uint64_t boundary_count) {
  if (edge_count == 0 && boundary_count == 0) return 1.0;
  return std::exp(log_cluster_prob(alpha, edge_count, boundary_count));
}

SubtreeCount count_subtrees(std::uint32_t d, std::uint64_t k) {
  if (d < 1) throw ValidationError("count_subtrees: branching degree must be >= 1");
  if (k < 1) throw ValidationError("count_subtrees: subtree size must be >= 1");
  SubtreeCount out;
  const std::uint64_t dk = std::uint64_t(d) * k;
  // The count is binom(d k, k-1) / k; the division is exact.
  if (dk <= kExactCountBudget) {
    boost::multiprecision::cpp_int r = 1;
    for (std::uint64_t j = 1; j + 1 <= k; ++j) {
      r *= dk - j + 1;
      r /= j;  // r is binom(dk, j) here, so the division is exact
    }
    boost::multiprecision::cpp_int q, rem;
    boost::multiprecision::divide_qr(r, boost::multiprecision::cpp_int(k), q, rem);
    if (rem != 0) throw ContractError("count_subtrees: expected exact division by k");
    out.value = q;
    out.log_value = log_cpp_int(q);
    out.exact = true;
  } else {
    out.log_value = std::lgamma(double(dk) + 1.0) - std::lgamma(double(k)) -
                    std::lgamma(double(dk - k) + 2.0) - std::log(double(k));
    out.exact = false;
  }
  return out;
}

ClusterSizePmf root_cluster_size_pmf(std::uint32_t d, double alpha, std::uint64_t k_max) {
  if (d < 2) throw ValidationError("root_cluster_size_pmf: branching degree must be >= 2");
  require_alpha(alpha, /*allow_zero=*/false);
  if (k_max < 1) throw ValidationError("root_cluster_size_pmf: k_max must be >= 1");
  ClusterSizePmf pmf;
  pmf.d = d;
  pmf.alpha = alpha;
  pmf.k_max = k_max;
  pmf.p.assign(k_max + 1, 0.0);
  pmf.log_p.assign(k_max + 1, -kInf);

  const bool exact_counts = std::uint64_t(d) * k_max <= kExactCountBudget;
  // binom(d k, k-1), updated in place across k (exact integer arithmetic).
  boost::multiprecision::cpp_int binom = 1;
  double sum = 0.0, comp = 0.0;  // Kahan
  for (std::uint64_t k = 1; k <= k_max; ++k) {
    double log_count;
    if (exact_counts) {
      boost::multiprecision::cpp_int q, rem;
      boost::multiprecision::divide_qr(binom, boost::multiprecision::cpp_int(k), q, rem);
      if (rem != 0) throw ContractError("root_cluster_size_pmf: expected exact division by k");
      log_count = log_cpp_int(q);
    } else {
      const double dk = double(d) * double(k);
      log_count = std::lgamma(dk + 1.0) - std::lgamma(double(k)) -
                  std::lgamma(dk - double(k) + 2.0) - std::log(double(k));
    }
    const std::uint64_t a = k - 1;
    const std::uint64_t b = std::uint64_t(d - 1) * k + 1;
    const double lp = log_count + log_cluster_prob(alpha, a, b);
    pmf.log_p[k] = lp;
    pmf.p[k] = std::exp(lp);
    const double y = pmf.p[k] - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    if (exact_counts && k < k_max) {
      // binom(d(k+1), k) = binom(dk, k-1) * prod(dk+i) / (k * prod(dk-k+i)).
      const std::uint64_t dk = std::uint64_t(d) * k;
      std::uint64_t num = 1, den = k;
      for (std::uint32_t i = 1; i <= d; ++i) num *= dk + i;
      for (std::uint32_t i = 2; i <= d; ++i) den *= dk - k + i;
      binom *= num;
      boost::multiprecision::cpp_int q, rem;
      boost::multiprecision::divide_qr(binom, boost::multiprecision::cpp_int(den), q, rem);
      if (rem != 0) throw ContractError("root_cluster_size_pmf: binomial update lost exactness");
      binom = q;
    }
  }
  pmf.mass_deficit = 1.0 - sum;
  return pmf;
}

TailFit fit_tail_exponent(const ClusterSizePmf& pmf, std::uint64_t k_lo, std::uint64_t k_hi) {
  if (k_lo < 10) throw ValidationError("fit_tail_exponent: k_lo must be >= 10");
  if (!(k_lo < k_hi) || k_hi > pmf.k_max) {
    throw ValidationError("fit_tail_exponent: window must satisfy k_lo < k_hi <= k_max");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(k_hi - k_lo + 1);
  for (std::uint64_t k = k_lo; k <= k_hi; ++k) {
    const double y = pmf.log_p[k];
    if (!std::isfinite(y)) throw NumericError("fit_tail_exponent: log-pmf not finite in window");
    const double x = std::log(double(k));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (!(denom > 0.0)) throw NumericError("fit_tail_exponent: degenerate abscissa");
  TailFit fit;
  const double slope = (n * sxy - sx * sy) / denom;
  fit.exponent = -slope;
  fit.intercept = (sy - slope * sx) / n;
  fit.k_lo = k_lo;
  fit.k_hi = k_hi;
  fit.max_residual = 0.0;
  for (std::uint64_t k = k_lo; k <= k_hi; ++k) {
    const double r = std::fabs(pmf.log_p[k] - (fit.intercept + slope * std::log(double(k))));
    fit.max_residual = std::max(fit.max_residual, r);
  }
  return fit;
}

double extrapolated_total_mass(const ClusterSizePmf& pmf) {
  const std::uint64_t K = pmf.k_max;
  if (K < 50) throw ValidationError("extrapolated_total_mass: needs k_max >= 50");
  double sum = 0.0, comp = 0.0;
  for (std::uint64_t k = 1; k <= K; ++k) {
    const double y = pmf.p[k] - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  double tail;
  if (pmf.alpha > double(pmf.d) - 1.0) {
    // Exponentially decaying tail: continue geometrically with the ratio
    // estimated over the last stretch of the table.
    const std::uint64_t m = std::max<std::uint64_t>(1, std::min<std::uint64_t>(K / 10, 200));
    const double ratio = std::exp((pmf.log_p[K] - pmf.log_p[K - m]) / double(m));
    if (!(ratio > 0.0) || ratio >= 1.0) {
      throw NumericError("extrapolated_total_mass: tail ratio not in (0,1)");
    }
    tail = pmf.p[K] * ratio / (1.0 - ratio);
  } else {
    // Power-law tail: integral continuation of the fitted C k^{-g}.
    const TailFit fit = fit_tail_exponent(pmf, std::max<std::uint64_t>(10, K / 10), K);
    if (!(fit.exponent > 1.0 + 1e-6)) {
      throw NumericError("extrapolated_total_mass: tail exponent too shallow to sum");
    }
    tail = std::exp(fit.intercept) * std::pow(double(K) + 0.5, 1.0 - fit.exponent) /
           (fit.exponent - 1.0);
  }
  return sum + tail;
}

double star_open_bound(std::uint32_t degree, double alpha) {
  if (degree < 1) throw ValidationError("star_open_bound: degree must be >= 1");
  require_alpha(alpha, /*allow_zero=*/true);
  const double m = double(degree);
  // Integrand decays like exp(-(1+alpha) z^2); cut where that factor alone
  // is ~1e-33 of the bulk.
  const double z_hi = std::sqrt(76.0 / (1.0 + alpha));
  QuadratureOptions opt;
  opt.abs_tol = 1e-13;
  opt.max_depth = 48;
  for (int i = 1; i < 8; ++i) opt.splits.push_back(z_hi * double(i) / 8.0);
  const double integral = adaptive_simpson(
      [m, alpha](double z) {
        const double gauss = std::exp(-(1.0 + alpha) * z * z);
        if (m == 1.0) return gauss;
        return gauss * std::pow(std::erfc(z), m - 1.0);
      },
      0.0, z_hi, opt);
  return 2.0 * m / std::sqrt(3.14159265358979323846) * integral;
}

double alpha_star(std::uint32_t d, double p_c) {
  if (d < 1) throw ValidationError("alpha_star: degree parameter must be >= 1");
  if (!(p_c > 0.0) || !(p_c < 1.0)) throw ValidationError("alpha_star: p_c must lie in (0,1)");
  const std::uint32_t m = 2 * d;
  double lo = 1e-9;
  if (!(star_open_bound(m, lo) > p_c)) {
    throw BracketError("alpha_star: bound already below p_c at alpha ~ 0");
  }
  double hi = 1.0;
  while (star_open_bound(m, hi) >= p_c) {
    hi *= 2.0;
    if (hi > 1e12) throw BracketError("alpha_star: no sign change up to alpha = 1e12");
  }
  if (hi > 1.0) lo = hi / 2.0;
  for (int it = 0; it < 200 && (hi - lo) > 1e-9 * std::max(1.0, lo); ++it) {
    const double mid = 0.5 * (lo + hi);
    (star_open_bound(m, mid) > p_c ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void write_pmf_csv(std::ostream& out, const ClusterSizePmf& pmf) {
  out << "k,p_k,log_p_k\n";
  char buf[80];
  for (std::uint64_t k = 1; k <= pmf.k_max; ++k) {
    std::snprintf(buf, sizeof(buf), "%llu,%.17g,%.17g\n", static_cast<unsigned long long>(k),
                  pmf.p[k], pmf.log_p[k]);
    out << buf;
  }
}

}  // namespace pcf
