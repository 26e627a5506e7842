// Monte Carlo layer: replica orchestration over seeded streams, crossing
// detection, crossing-probability estimation, critical-rate bisection, and
// log-log cluster-size histograms.
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <vector>

#include "pcf/engine.hpp"
#include "pcf/graph.hpp"

namespace pcf {

struct BernoulliEstimate {
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  double p_hat = 0.0;
  double ci_low = 0.0;   // 95% Wilson interval
  double ci_high = 1.0;
};

BernoulliEstimate wilson_estimate(std::uint64_t successes, std::uint64_t trials);

enum class RunVariant : std::uint8_t { pcf, warm, percolation };

struct ReplicaPlan {
  const GraphTopology* graph = nullptr;
  const PriorityOrder* priorities = nullptr;  // null = identity order
  double alpha = 1.0;
  std::uint64_t replicas = 1;
  std::uint64_t base_seed = 0;
  std::uint64_t stream_offset = 0;  // replica i uses stream_id = offset + i
  RunVariant variant = RunVariant::pcf;
  double percolation_t = 0.0;  // only read when variant == percolation
  double t_max = kInfiniteTime;
  std::uint32_t threads = 1;  // 0 = hardware concurrency
};

// Runs every replica and hands each result to the sink under a lock.
// Replica i is fully determined by (base_seed, stream_offset + i), so any
// order- and thread-count-independent aggregation is deterministic.
void run_replicas(const ReplicaPlan& plan,
                  const std::function<void(std::uint64_t, const RunResult&)>& sink);

// Cluster census of a static configuration (components of open edges,
// singletons included); event_count reports the number of open edges.
RunResult census_of(const GraphTopology& g, const Configuration& c);

// True iff open edges connect the left column to the right column; a
// single-column grid crosses vacuously.  Union-find with two virtual
// terminals.  Throws ContractError for non-grid topologies.
bool has_lr_crossing(const Configuration& config, const GraphTopology& grid);

// Crossing probability of the freezing process run to absorption on the
// width-(n+1), height-n grid (crossing along the width).
BernoulliEstimate estimate_crossing_prob(std::uint32_t n, double alpha, std::uint64_t replicas,
                                         std::uint64_t base_seed, std::uint32_t threads = 1);

// Same grid and crossing event under plain bond percolation at time t
// (edge open with probability 1 - e^{-t}).
BernoulliEstimate estimate_percolation_crossing_prob(std::uint32_t n, double t,
                                                     std::uint64_t replicas,
                                                     std::uint64_t base_seed,
                                                     std::uint32_t threads = 1);

struct AlphaCPoint {
  double alpha = 0.0;
  BernoulliEstimate estimate;
};

struct AlphaCResult {
  double alpha_lo = 0.0;
  double alpha_hi = 0.0;
  bool budget_exhausted = false;  // budget ran out before reaching target width
  std::uint64_t replicas_used = 0;
  std::vector<AlphaCPoint> points;  // endpoint checks first, then bisection path
};

// Bisection for the rate at which the crossing probability passes 1/2,
// with adaptive replica allocation: each test point draws batches until its
// Wilson interval excludes 1/2 or its share of the budget is spent (then it
// branches on p_hat alone).  Throws BracketError unless the initial
// estimates satisfy p(alpha_lo) > 1/2 > p(alpha_hi).
AlphaCResult estimate_alpha_c(std::uint32_t n, double alpha_lo, double alpha_hi,
                              double target_width, std::uint64_t replica_budget,
                              std::uint64_t base_seed, std::uint32_t threads = 1);

struct SizeHistogram {
  struct Bin {
    std::uint64_t k_lo = 0;
    std::uint64_t k_hi = 0;
    std::uint64_t count = 0;
  };
  std::vector<Bin> bins;  // disjoint, ordered; counts >= min_per_bin except the last
  std::uint64_t total_clusters = 0;
  std::uint64_t min_per_bin = 1;

  static double center(const Bin& b);  // geometric midpoint sqrt(k_lo * k_hi)
  double density(const Bin& b) const;  // count / (integer width * total)
};

// Greedy bin widening over ascending sizes until each bin holds at least
// min_per_bin clusters.  Throws ValidationError on empty input.
SizeHistogram size_histogram(const std::vector<RunResult>& results, std::uint64_t min_per_bin);
SizeHistogram size_histogram_from_counts(const std::map<std::uint64_t, std::uint64_t>& counts,
                                         std::uint64_t min_per_bin);

// Unweighted least squares of log(density) on log(center) over bins whose
// centers lie in [center_lo, center_hi]; returns the slope (negative for
// decaying densities).  Throws ValidationError with fewer than two bins.
double fit_histogram_slope(const SizeHistogram& hist, double center_lo, double center_hi);

struct CrossingRecord {
  double alpha = 0.0;  // or percolation time, as documented by the producer
  std::uint32_t n = 0;
  BernoulliEstimate estimate;
};

// CSV: "alpha,n,trials,successes,p_hat,ci_low,ci_high".
void write_crossing_csv(std::ostream& out, const std::vector<CrossingRecord>& rows);
// CSV: "k_center,k_lo,k_hi,count,density".
void write_histogram_csv(std::ostream& out, const SizeHistogram& hist);

}  // namespace pcf
