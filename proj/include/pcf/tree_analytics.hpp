// Closed-form and quadrature-based quantities for the freezing process on
// regular rooted trees, plus the mean-field and star-graph companions.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace pcf {

// Probability that a fixed tree edge is open *and* joined its child into the
// root cluster by time t (t = +infinity allowed); increasing in t with
// supremum 1/(1+alpha).
double open_prob(double alpha, double t);

// Time change mapping the freezing process at parameter time t onto plain
// bond percolation with p = open_prob(alpha, t); satisfies
// 1 - exp(-percolation_time(alpha, t)) == open_prob(alpha, t).
double percolation_time(double alpha, double t);

// Same time change for the mean-field (complete-graph) limit.
double meanfield_time(double alpha, double t);

// Threshold freeze rate below which an infinite root cluster has positive
// probability on the infinite d-ary tree.
double critical_alpha(std::uint32_t d);

// For alpha < critical_alpha(d): the time at which open_prob reaches 1/d.
double critical_time(std::uint32_t d, double alpha);

// Probability that the root cluster occupies one fixed rooted subtree with
// `edge_count` internal edges and `boundary_count` closed frontier edges,
// averaged over the freeze time.  log_cluster_prob returns the natural log
// (finite for all valid inputs; the probability itself may underflow).
double cluster_prob(double alpha, std::uint64_t edge_count, std::uint64_t boundary_count);
double log_cluster_prob(double alpha, std::uint64_t edge_count, std::uint64_t boundary_count);

// Number of k-vertex subtrees of the infinite d-ary tree containing the root.
// `value` is exact when d*k fits the exact-arithmetic budget (d*k <= 100000);
// `log_value` is always populated (relative accuracy ~1e-12 on the count).
struct SubtreeCount {
  boost::multiprecision::cpp_int value;
  double log_value = 0.0;
  bool exact = false;
};
SubtreeCount count_subtrees(std::uint32_t d, std::uint64_t k);

// P(root cluster has exactly k vertices) for k = 1..k_max on the infinite
// d-ary tree: count_subtrees(d,k) * cluster_prob(alpha, k-1, (d-1)k+1),
// assembled in log space so deep tails remain meaningful.
struct ClusterSizePmf {
  std::uint32_t d = 2;
  double alpha = 1.0;
  std::uint64_t k_max = 0;
  std::vector<double> p;      // index k; p[0] unused
  std::vector<double> log_p;  // natural logs
  double mass_deficit = 0.0;  // 1 - sum of p[1..k_max]
};
ClusterSizePmf root_cluster_size_pmf(std::uint32_t d, double alpha, std::uint64_t k_max);

// Least-squares fit of log p_k against log k over k in [k_lo, k_hi];
// exponent is the negated slope (so a k^{-g} tail reports g > 0).
struct TailFit {
  double exponent = 0.0;
  double intercept = 0.0;  // fitted log p_k at k = 1
  std::uint64_t k_lo = 0;
  std::uint64_t k_hi = 0;
  double max_residual = 0.0;  // worst |log p_k - fit| over the window
};
TailFit fit_tail_exponent(const ClusterSizePmf& pmf, std::uint64_t k_lo, std::uint64_t k_hi);

// Sum of the pmf plus a tail estimate beyond k_max: geometric continuation
// when the tail decays exponentially (alpha > critical_alpha), power-law
// integral continuation otherwise.  Approaches 1 when no infinite cluster
// exists; the shortfall below 1 estimates P(root cluster is infinite).
double extrapolated_total_mass(const ClusterSizePmf& pmf);

// Upper bound for the probability that a given vertex of a degree-`degree`
// vertex-star is warm at all finite times, from the half-Gaussian freeze-race
// comparison: (2m/sqrt(pi)) * Int_0^inf exp(-(1+alpha) z^2) erfc(z)^{m-1} dz.
// Decreasing in alpha, equal to 1 at alpha = 0.
double star_open_bound(std::uint32_t degree, double alpha);

// Smallest alpha at which star_open_bound(2d, alpha) drops to p_c; above it
// the bound certifies absence of an infinite warm cluster on the
// degree-2d lattice whose site-percolation threshold is p_c.
double alpha_star(std::uint32_t d, double p_c);

// CSV dump "k,p_k,log_p_k", one row per k = 1..k_max.
void write_pmf_csv(std::ostream& out, const ClusterSizePmf& pmf);

}  // namespace pcf
