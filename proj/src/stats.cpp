#include "pcf/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <thread>

#include "pcf/errors.hpp"

namespace pcf {

BernoulliEstimate wilson_estimate(std::uint64_t successes, std::uint64_t trials) {
  if (trials == 0) throw ValidationError("wilson_estimate: trials must be >= 1");
  if (successes > trials) throw ValidationError("wilson_estimate: successes exceed trials");
  const double z = 1.959963984540054;  // 97.5% normal quantile
  const double n = double(trials);
  const double p = double(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  BernoulliEstimate e;
  e.successes = successes;
  e.trials = trials;
  e.p_hat = p;
  e.ci_low = std::max(0.0, centre - half);
  e.ci_high = std::min(1.0, centre + half);
  return e;
}

RunResult census_of(const GraphTopology& g, const Configuration& c) {
  const std::uint32_t nv = g.vertex_count;
  const std::uint32_t ne = g.edge_count();
  if (c.edge_open.size() != ne || c.vertex_frozen.size() != nv) {
    throw ValidationError("census_of: configuration does not match the graph");
  }
  std::vector<std::uint32_t> parent(nv);
  std::vector<std::uint32_t> size(nv, 1);
  std::vector<std::uint8_t> touches(g.is_boundary);
  for (std::uint32_t v = 0; v < nv; ++v) parent[v] = v;
  auto find = [&parent](std::uint32_t v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  std::uint64_t open_edges = 0;
  for (std::uint32_t e = 0; e < ne; ++e) {
    if (!c.edge_open[e]) continue;
    ++open_edges;
    std::uint32_t a = find(g.edges[e][0]), b = find(g.edges[e][1]);
    if (a == b) continue;
    if (size[a] < size[b]) std::swap(a, b);
    parent[b] = a;
    size[a] += size[b];
    touches[a] |= touches[b];
  }
  RunResult res;
  res.final = c;
  for (std::uint32_t v = 0; v < nv; ++v) {
    if (find(v) == v) res.cluster_sizes.push_back(size[v]);
  }
  std::sort(res.cluster_sizes.begin(), res.cluster_sizes.end());
  if (nv > 0) {
    const std::uint32_t r0 = find(0);
    res.root_cluster_size = size[r0];
    res.root_touched_boundary = touches[r0] != 0;
  }
  res.event_count = open_edges;
  return res;
}

void run_replicas(const ReplicaPlan& plan,
                  const std::function<void(std::uint64_t, const RunResult&)>& sink) {
  if (plan.graph == nullptr) throw ValidationError("run_replicas: plan has no graph");
  if (plan.replicas < 1) throw ValidationError("run_replicas: replicas must be >= 1");
  const GraphTopology& g = *plan.graph;
  PriorityOrder identity_order;
  const PriorityOrder* priorities = plan.priorities;
  if (priorities == nullptr) {
    identity_order = PriorityOrder::identity(g.vertex_count);
    priorities = &identity_order;
  }
  std::uint32_t threads = plan.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::uint32_t(std::min<std::uint64_t>(threads, plan.replicas));

  std::atomic<std::uint64_t> next{0};
  std::mutex sink_mutex;
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&]() {
    try {
      for (;;) {
        const std::uint64_t i = next.fetch_add(1);
        if (i >= plan.replicas) return;
        const ClockSet clocks =
            sample_clocks(g, plan.alpha, plan.base_seed, plan.stream_offset + i);
        RunResult res;
        switch (plan.variant) {
          case RunVariant::pcf:
            res = run_pcf(g, *priorities, clocks, plan.t_max);
            break;
          case RunVariant::warm:
            res = run_warm_pcf(g, *priorities, clocks, plan.t_max);
            break;
          case RunVariant::percolation:
            res = census_of(g, run_percolation(g, clocks, plan.percolation_t));
            break;
        }
        std::lock_guard<std::mutex> lock(sink_mutex);
        sink(i, res);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::uint32_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

bool has_lr_crossing(const Configuration& config, const GraphTopology& grid) {
  if (grid.kind != GraphKind::grid) {
    throw ContractError("has_lr_crossing: topology is not a grid");
  }
  const std::uint32_t w = grid.grid_width, h = grid.grid_height;
  const std::uint32_t nv = grid.vertex_count;
  if (config.edge_open.size() != grid.edge_count()) {
    throw ValidationError("has_lr_crossing: configuration does not match the grid");
  }
  std::vector<std::uint32_t> parent(nv + 2);
  std::vector<std::uint32_t> size(nv + 2, 1);
  for (std::uint32_t v = 0; v < nv + 2; ++v) parent[v] = v;
  auto find = [&parent](std::uint32_t v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  auto unite = [&](std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size[a] < size[b]) std::swap(a, b);
    parent[b] = a;
    size[a] += size[b];
  };
  const std::uint32_t left = nv, right = nv + 1;
  for (std::uint32_t y = 0; y < h; ++y) {
    unite(left, grid.grid_index(0, y));
    unite(right, grid.grid_index(w - 1, y));
  }
  const std::uint32_t ne = grid.edge_count();
  for (std::uint32_t e = 0; e < ne; ++e) {
    if (config.edge_open[e]) unite(grid.edges[e][0], grid.edges[e][1]);
  }
  return find(left) == find(right);
}

namespace {

BernoulliEstimate crossing_estimate(const GraphTopology& g, const ReplicaPlan& plan) {
  std::uint64_t crossings = 0;
  run_replicas(plan, [&](std::uint64_t, const RunResult& res) {
    if (has_lr_crossing(res.final, g)) ++crossings;
  });
  return wilson_estimate(crossings, plan.replicas);
}

}  // namespace

BernoulliEstimate estimate_crossing_prob(std::uint32_t n, double alpha, std::uint64_t replicas,
                                         std::uint64_t base_seed, std::uint32_t threads) {
  if (n < 2) throw ValidationError("estimate_crossing_prob: n must be >= 2");
  const GraphTopology g = build_grid(n + 1, n);
  ReplicaPlan plan;
  plan.graph = &g;
  plan.alpha = alpha;
  plan.replicas = replicas;
  plan.base_seed = base_seed;
  plan.variant = RunVariant::pcf;
  plan.threads = threads;
  return crossing_estimate(g, plan);
}

BernoulliEstimate estimate_percolation_crossing_prob(std::uint32_t n, double t,
                                                     std::uint64_t replicas,
                                                     std::uint64_t base_seed,
                                                     std::uint32_t threads) {
  if (n < 2) throw ValidationError("estimate_percolation_crossing_prob: n must be >= 2");
  if (!(t >= 0.0)) throw ValidationError("estimate_percolation_crossing_prob: t must be >= 0");
  const GraphTopology g = build_grid(n + 1, n);
  ReplicaPlan plan;
  plan.graph = &g;
  plan.alpha = 1.0;  // vertex clocks are sampled but never consulted
  plan.replicas = replicas;
  plan.base_seed = base_seed;
  plan.variant = RunVariant::percolation;
  plan.percolation_t = t;
  plan.threads = threads;
  return crossing_estimate(g, plan);
}

namespace {

// One bisection test point: draws batches until the Wilson interval excludes
// 1/2 or the point budget is gone.  Streams never collide across points:
// the caller advances stream_cursor by every replica spent.
BernoulliEstimate probe_point(const GraphTopology& g, double alpha, std::uint64_t point_budget,
                              std::uint64_t base_seed, std::uint64_t& stream_cursor,
                              std::uint32_t threads, bool& decided) {
  std::uint64_t successes = 0, trials = 0;
  std::uint64_t batch = 512;
  BernoulliEstimate est;
  decided = false;
  while (trials < point_budget) {
    const std::uint64_t take = std::min(batch, point_budget - trials);
    ReplicaPlan plan;
    plan.graph = &g;
    plan.alpha = alpha;
    plan.replicas = take;
    plan.base_seed = base_seed;
    plan.stream_offset = stream_cursor;
    plan.variant = RunVariant::pcf;
    plan.threads = threads;
    std::uint64_t crossings = 0;
    run_replicas(plan, [&](std::uint64_t, const RunResult& res) {
      if (has_lr_crossing(res.final, g)) ++crossings;
    });
    stream_cursor += take;
    successes += crossings;
    trials += take;
    est = wilson_estimate(successes, trials);
    if (est.ci_low > 0.5 || est.ci_high < 0.5) {
      decided = true;
      break;
    }
    batch *= 2;
  }
  return est;
}

}  // namespace

AlphaCResult estimate_alpha_c(std::uint32_t n, double alpha_lo, double alpha_hi,
                              double target_width, std::uint64_t replica_budget,
                              std::uint64_t base_seed, std::uint32_t threads) {
  if (n < 2) throw ValidationError("estimate_alpha_c: n must be >= 2");
  if (!(alpha_lo > 0.0) || !(alpha_hi > alpha_lo)) {
    throw ValidationError("estimate_alpha_c: need 0 < alpha_lo < alpha_hi");
  }
  if (!(target_width > 0.0)) throw ValidationError("estimate_alpha_c: target_width must be > 0");
  if (replica_budget < 1) throw ValidationError("estimate_alpha_c: empty replica budget");

  const GraphTopology g = build_grid(n + 1, n);
  // Share the budget over the expected number of test points: two endpoint
  // checks plus one point per bisection halving.
  const double halvings = std::ceil(std::log2((alpha_hi - alpha_lo) / target_width));
  const std::uint64_t expected_points = 2 + std::uint64_t(std::max(1.0, halvings));
  const std::uint64_t point_cap = std::max<std::uint64_t>(64, replica_budget / expected_points);

  AlphaCResult out;
  out.alpha_lo = alpha_lo;
  out.alpha_hi = alpha_hi;
  std::uint64_t stream_cursor = 0;
  std::uint64_t spent = 0;
  auto remaining = [&]() { return replica_budget > spent ? replica_budget - spent : 0; };

  auto spend_point = [&](double alpha, bool& decided) {
    const std::uint64_t budget = std::min<std::uint64_t>(point_cap, remaining());
    if (budget == 0) {
      decided = false;
      return BernoulliEstimate{};
    }
    const std::uint64_t before = stream_cursor;
    BernoulliEstimate est = probe_point(g, alpha, budget, base_seed, stream_cursor, threads,
                                        decided);
    spent += stream_cursor - before;
    out.points.push_back({alpha, est});
    return est;
  };

  bool decided = false;
  const BernoulliEstimate at_lo = spend_point(alpha_lo, decided);
  if (!(at_lo.p_hat > 0.5)) {
    throw BracketError("estimate_alpha_c: crossing probability at alpha_lo is not above 1/2");
  }
  const BernoulliEstimate at_hi = spend_point(alpha_hi, decided);
  if (!(at_hi.p_hat < 0.5)) {
    throw BracketError("estimate_alpha_c: crossing probability at alpha_hi is not below 1/2");
  }

  while (out.alpha_hi - out.alpha_lo > target_width) {
    if (remaining() == 0) {
      out.budget_exhausted = true;
      break;
    }
    const double mid = 0.5 * (out.alpha_lo + out.alpha_hi);
    const BernoulliEstimate est = spend_point(mid, decided);
    if (est.trials == 0) {
      out.budget_exhausted = true;
      break;
    }
    // Crossing probability decreases in the freeze rate, so p > 1/2 puts the
    // threshold above mid.
    if (est.p_hat > 0.5) {
      out.alpha_lo = mid;
    } else {
      out.alpha_hi = mid;
    }
  }
  out.replicas_used = spent;
  return out;
}

double SizeHistogram::center(const Bin& b) {
  return std::sqrt(double(b.k_lo) * double(b.k_hi));
}

double SizeHistogram::density(const Bin& b) const {
  const double width = double(b.k_hi - b.k_lo + 1);
  return double(b.count) / (width * double(total_clusters));
}

SizeHistogram size_histogram_from_counts(const std::map<std::uint64_t, std::uint64_t>& counts,
                                         std::uint64_t min_per_bin) {
  if (min_per_bin < 1) throw ValidationError("size_histogram: min_per_bin must be >= 1");
  if (counts.empty()) throw ValidationError("size_histogram: no cluster sizes supplied");
  SizeHistogram hist;
  hist.min_per_bin = min_per_bin;
  std::uint64_t bin_lo = 0, bin_count = 0, last_k = 0;
  for (const auto& [k, c] : counts) {
    if (c == 0) continue;
    if (bin_count == 0) bin_lo = k;
    bin_count += c;
    last_k = k;
    hist.total_clusters += c;
    if (bin_count >= min_per_bin) {
      hist.bins.push_back({bin_lo, k, bin_count});
      bin_count = 0;
    }
  }
  if (bin_count > 0) hist.bins.push_back({bin_lo, last_k, bin_count});  // trailing partial bin
  return hist;
}

SizeHistogram size_histogram(const std::vector<RunResult>& results, std::uint64_t min_per_bin) {
  std::map<std::uint64_t, std::uint64_t> counts;
  for (const RunResult& r : results) {
    for (const std::uint64_t k : r.cluster_sizes) ++counts[k];
  }
  return size_histogram_from_counts(counts, min_per_bin);
}

double fit_histogram_slope(const SizeHistogram& hist, double center_lo, double center_hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::uint64_t n = 0;
  for (const auto& b : hist.bins) {
    const double c = SizeHistogram::center(b);
    if (c < center_lo || c > center_hi || b.count == 0) continue;
    const double x = std::log(c);
    const double y = std::log(hist.density(b));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) throw ValidationError("fit_histogram_slope: fewer than two bins in the window");
  const double denom = double(n) * sxx - sx * sx;
  if (!(std::fabs(denom) > 0.0)) throw NumericError("fit_histogram_slope: degenerate abscissa");
  return (double(n) * sxy - sx * sy) / denom;
}

void write_crossing_csv(std::ostream& out, const std::vector<CrossingRecord>& rows) {
  out << "alpha,n,trials,successes,p_hat,ci_low,ci_high\n";
  char buf[200];
  for (const CrossingRecord& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g,%u,%llu,%llu,%.17g,%.17g,%.17g\n", r.alpha, r.n,
                  static_cast<unsigned long long>(r.estimate.trials),
                  static_cast<unsigned long long>(r.estimate.successes), r.estimate.p_hat,
                  r.estimate.ci_low, r.estimate.ci_high);
    out << buf;
  }
}

void write_histogram_csv(std::ostream& out, const SizeHistogram& hist) {
  out << "k_center,k_lo,k_hi,count,density\n";
  char buf[200];
  for (const auto& b : hist.bins) {
    std::snprintf(buf, sizeof(buf), "%.17g,%llu,%llu,%llu,%.17g\n", SizeHistogram::center(b),
                  static_cast<unsigned long long>(b.k_lo),
                  static_cast<unsigned long long>(b.k_hi),
                  static_cast<unsigned long long>(b.count), hist.density(b));
    out << buf;
  }
}

}  // namespace pcf
