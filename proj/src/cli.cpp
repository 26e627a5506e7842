#include "pcf/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcf/engine.hpp"
#include "pcf/errors.hpp"
#include "pcf/graph.hpp"
#include "pcf/oracle.hpp"
#include "pcf/stats.hpp"
#include "pcf/tree_analytics.hpp"

namespace pcf {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
  char b[48];
  std::snprintf(b, sizeof(b), "%.17g", v);
  return b;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp + " for writing");
    f << content;
    f.flush();
    if (!f) {
      std::remove(tmp.c_str());
      throw IoError("write to " + tmp + " failed");
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoError("cannot move " + tmp + " into place at " + path);
  }
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["command"] = c.command;
  j["grid"] = c.grid_spec;
  j["tree-d"] = c.tree_d;
  j["tree-depth"] = c.tree_depth;
  j["edge-list"] = c.edge_list_path;
  j["graph"] = c.graph_name;
  j["alpha"] = c.alpha;
  j["alphas"] = c.alphas;
  j["alpha-range"] = c.alpha_range;
  j["replicas"] = c.replicas;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["variant"] = c.variant;
  j["t"] = c.percolation_t;
  if (std::isfinite(c.t_max)) {
    j["t-max"] = c.t_max;
  } else {
    j["t-max"] = "inf";
  }
  j["histogram"] = c.histogram_min;
  j["n-values"] = c.n_values;
  j["n"] = c.n;
  j["alpha-lo"] = c.alpha_lo;
  j["alpha-hi"] = c.alpha_hi;
  j["target-width"] = c.target_width;
  j["budget"] = c.budget;
  j["d"] = c.d;
  j["k-max"] = c.k_max;
  j["fit-lo"] = c.fit_lo;
  j["fit-hi"] = c.fit_hi;
  j["times"] = c.times;
  j["degree"] = c.degree;
  j["p-c"] = c.p_c;
  j["config"] = c.config_path;
  j["out"] = c.out_path;
  j["format"] = c.format;
  j["gnuplot"] = c.gnuplot;
  return j;
}

// Reads "key = value" lines ('#' starts a comment) in file order.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config file " + path);
  auto trim = [](const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  std::vector<std::pair<std::string, std::string>> items;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string key = eq == std::string::npos ? std::string() : trim(line.substr(0, eq));
    if (key.empty()) {
      throw UsageError("config file " + path + " line " + std::to_string(lineno) +
                       ": expected key = value");
    }
    items.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return items;
}

GraphTopology graph_from_config(const ExperimentConfig& c) {
  int specs = 0;
  if (!c.grid_spec.empty()) ++specs;
  if (c.tree_d > 0) ++specs;
  if (!c.edge_list_path.empty()) ++specs;
  if (specs != 1) {
    throw UsageError("choose exactly one graph: --grid WxH, --tree-d/--tree-depth, or --edge-list");
  }
  if (!c.grid_spec.empty()) {
    const std::size_t x = c.grid_spec.find_first_of("xX");
    if (x == std::string::npos || x == 0 || x + 1 >= c.grid_spec.size()) {
      throw UsageError("--grid expects WIDTHxHEIGHT, e.g. 128x129");
    }
    std::uint64_t w = 0, h = 0;
    try {
      w = std::stoull(c.grid_spec.substr(0, x));
      h = std::stoull(c.grid_spec.substr(x + 1));
    } catch (const std::exception&) {
      throw UsageError("--grid expects WIDTHxHEIGHT with integer sides");
    }
    if (w == 0 || h == 0 || w > 0xffffffffull || h > 0xffffffffull) {
      throw UsageError("--grid sides must be positive 32-bit integers");
    }
    return build_grid(std::uint32_t(w), std::uint32_t(h));
  }
  if (c.tree_d > 0) return build_rooted_tree(c.tree_d, c.tree_depth);
  return load_edge_list_file(c.edge_list_path);
}

GraphTopology named_graph(const std::string& name) {
  using E = std::array<std::uint32_t, 2>;
  if (name == "edge") return build_generic(2, std::vector<E>{{0, 1}}, {});
  if (name == "p3") return build_generic(3, std::vector<E>{{0, 1}, {1, 2}}, {});
  if (name == "p4") return build_generic(4, std::vector<E>{{0, 1}, {1, 2}, {2, 3}}, {});
  if (name == "c3") return build_generic(3, std::vector<E>{{0, 1}, {1, 2}, {0, 2}}, {});
  if (name == "c4") return build_generic(4, std::vector<E>{{0, 1}, {1, 2}, {2, 3}, {0, 3}}, {});
  if (name == "s3") return build_generic(4, std::vector<E>{{0, 1}, {0, 2}, {0, 3}}, {});
  throw UsageError("--graph must be one of edge, p3, p4, c3, c4, s3");
}

RunVariant variant_from(const std::string& name) {
  if (name == "pcf") return RunVariant::pcf;
  if (name == "warm") return RunVariant::warm;
  if (name == "percolation") return RunVariant::percolation;
  throw UsageError("--variant must be pcf, warm, or percolation");
}

std::vector<double> sweep_values(const ExperimentConfig& c) {
  std::vector<double> xs = c.alphas;
  if (!c.alpha_range.empty()) {
    double lo = 0, hi = 0, step = 0;
    char colon1 = 0, colon2 = 0;
    std::istringstream is(c.alpha_range);
    is >> lo >> colon1 >> hi >> colon2 >> step;
    if (!is || colon1 != ':' || colon2 != ':' || !(step > 0.0) || hi < lo) {
      throw UsageError("--alpha-range expects lo:hi:step with step > 0");
    }
    for (double v = lo; v <= hi + 0.5 * step; v += step) xs.push_back(v);
  }
  if (xs.empty()) throw UsageError("no sweep values: give --alpha and/or --alpha-range");
  return xs;
}

json estimate_to_json(const BernoulliEstimate& e) {
  return json{{"successes", e.successes}, {"trials", e.trials},     {"p_hat", e.p_hat},
              {"ci_low", e.ci_low},       {"ci_high", e.ci_high}};
}

// ---------------------------------------------------------------- simulate

void cmd_simulate(const ExperimentConfig& cfg, json& results, std::string& csv, json& summary) {
  const GraphTopology g = graph_from_config(cfg);
  const RunVariant variant = variant_from(cfg.variant);

  ReplicaPlan plan;
  plan.graph = &g;
  plan.alpha = cfg.alpha;
  plan.replicas = cfg.replicas;
  plan.base_seed = cfg.seed;
  plan.variant = variant;
  plan.percolation_t = cfg.percolation_t;
  plan.t_max = cfg.t_max;
  plan.threads = cfg.threads;

  struct Row {
    std::uint64_t clusters = 0, largest = 0, root_size = 0, events = 0;
    bool root_touch = false;
    int crossed = -1;  // -1: not a grid
  };
  std::vector<Row> rows(cfg.replicas);
  std::map<std::uint64_t, std::uint64_t> size_counts;
  const bool is_grid = g.kind == GraphKind::grid;
  double sum_clusters = 0, sum_largest = 0, sum_root = 0, sum_events = 0;
  std::uint64_t crossings = 0, root_touches = 0;

  run_replicas(plan, [&](std::uint64_t i, const RunResult& res) {
    Row& r = rows[i];
    r.clusters = res.cluster_sizes.size();
    r.largest = res.cluster_sizes.empty() ? 0 : res.cluster_sizes.back();
    r.root_size = res.root_cluster_size;
    r.root_touch = res.root_touched_boundary;
    r.events = res.event_count;
    if (is_grid) r.crossed = has_lr_crossing(res.final, g) ? 1 : 0;
    if (cfg.histogram_min > 0) {
      for (const std::uint64_t k : res.cluster_sizes) ++size_counts[k];
    }
    sum_clusters += double(r.clusters);
    sum_largest += double(r.largest);
    sum_root += double(r.root_size);
    sum_events += double(r.events);
    crossings += r.crossed == 1 ? 1 : 0;
    root_touches += r.root_touch ? 1 : 0;
  });

  const double n = double(cfg.replicas);
  json aggregate{{"mean_cluster_count", sum_clusters / n},
                 {"mean_largest_cluster", sum_largest / n},
                 {"mean_root_cluster_size", sum_root / n},
                 {"root_touched_fraction", double(root_touches) / n},
                 {"mean_event_count", sum_events / n}};
  if (is_grid) aggregate["crossing"] = estimate_to_json(wilson_estimate(crossings, cfg.replicas));

  results = json{{"graph", {{"vertices", g.vertex_count}, {"edges", g.edge_count()}}},
                 {"alpha", cfg.alpha},
                 {"variant", cfg.variant},
                 {"replicas", cfg.replicas},
                 {"aggregate", aggregate}};

  std::ostringstream os;
  if (cfg.histogram_min > 0) {
    const SizeHistogram hist = size_histogram_from_counts(size_counts, cfg.histogram_min);
    json bins = json::array();
    for (const auto& b : hist.bins) {
      bins.push_back({{"k_lo", b.k_lo},
                      {"k_hi", b.k_hi},
                      {"count", b.count},
                      {"center", SizeHistogram::center(b)},
                      {"density", hist.density(b)}});
    }
    results["histogram"] =
        json{{"min_per_bin", hist.min_per_bin}, {"total_clusters", hist.total_clusters},
             {"bins", bins}};
    write_histogram_csv(os, hist);
  } else {
    os << "replica,cluster_count,largest_cluster,root_cluster_size,root_touched_boundary,"
          "event_count,crossed\n";
    for (std::uint64_t i = 0; i < cfg.replicas; ++i) {
      const Row& r = rows[i];
      os << i << ',' << r.clusters << ',' << r.largest << ',' << r.root_size << ','
         << (r.root_touch ? 1 : 0) << ',' << r.events << ',';
      if (r.crossed >= 0) os << r.crossed;
      os << '\n';
    }
  }
  csv = os.str();
  summary = json{{"replicas", cfg.replicas}, {"aggregate", aggregate}};
}

// ----------------------------------------------------------- crossing-curve

void cmd_crossing_curve(const ExperimentConfig& cfg, json& results, std::string& csv,
                        json& summary) {
  if (cfg.n_values.empty()) throw UsageError("crossing-curve needs --n (comma list allowed)");
  const std::vector<double> xs = sweep_values(cfg);
  const bool percolation = cfg.variant == "percolation";
  if (!percolation && cfg.variant != "pcf") {
    throw UsageError("crossing-curve supports --variant pcf or percolation");
  }
  std::vector<CrossingRecord> rows;
  json records = json::array();
  for (const std::uint32_t n : cfg.n_values) {
    for (const double x : xs) {
      // In percolation mode the sweep variable is the time t (the "alpha"
      // column of the CSV carries it), since the freeze rate plays no role.
      const BernoulliEstimate est =
          percolation
              ? estimate_percolation_crossing_prob(n, x, cfg.replicas, cfg.seed, cfg.threads)
              : estimate_crossing_prob(n, x, cfg.replicas, cfg.seed, cfg.threads);
      rows.push_back({x, n, est});
      json rec = estimate_to_json(est);
      rec["alpha"] = x;
      rec["n"] = n;
      records.push_back(rec);
    }
  }
  results = json{{"mode", percolation ? "percolation" : "pcf"},
                 {"replicas_per_point", cfg.replicas},
                 {"points", records}};
  std::ostringstream os;
  write_crossing_csv(os, rows);
  csv = os.str();
  summary = json{{"points", rows.size()}};
}

// --------------------------------------------------------- estimate-alpha-c

void cmd_estimate_alpha_c(const ExperimentConfig& cfg, json& results, std::string& csv,
                          json& summary) {
  const AlphaCResult r = estimate_alpha_c(cfg.n, cfg.alpha_lo, cfg.alpha_hi, cfg.target_width,
                                          cfg.budget, cfg.seed, cfg.threads);
  json points = json::array();
  std::vector<CrossingRecord> rows;
  for (const AlphaCPoint& p : r.points) {
    json rec = estimate_to_json(p.estimate);
    rec["alpha"] = p.alpha;
    points.push_back(rec);
    rows.push_back({p.alpha, cfg.n, p.estimate});
  }
  results = json{{"n", cfg.n},
                 {"alpha_lo", r.alpha_lo},
                 {"alpha_hi", r.alpha_hi},
                 {"width", r.alpha_hi - r.alpha_lo},
                 {"budget_exhausted", r.budget_exhausted},
                 {"replicas_used", r.replicas_used},
                 {"points", points}};
  std::ostringstream os;
  write_crossing_csv(os, rows);
  csv = os.str();
  summary = json{{"alpha_lo", r.alpha_lo},
                 {"alpha_hi", r.alpha_hi},
                 {"budget_exhausted", r.budget_exhausted},
                 {"replicas_used", r.replicas_used}};
}

// ----------------------------------------------------------------- tree-pmf

void cmd_tree_pmf(const ExperimentConfig& cfg, json& results, std::string& csv, json& summary) {
  const ClusterSizePmf pmf = root_cluster_size_pmf(cfg.d, cfg.alpha, cfg.k_max);
  results = json{{"d", pmf.d}, {"alpha", pmf.alpha}, {"k_max", pmf.k_max},
                 {"mass_deficit", pmf.mass_deficit}};
  json p = json::array(), log_p = json::array();
  for (std::uint64_t k = 1; k <= pmf.k_max; ++k) {
    p.push_back(pmf.p[k]);
    log_p.push_back(pmf.log_p[k]);
  }
  results["p"] = p;
  results["log_p"] = log_p;

  const std::uint64_t lo = cfg.fit_lo > 0 ? cfg.fit_lo : 100;
  const std::uint64_t hi = cfg.fit_hi > 0 ? cfg.fit_hi : std::min<std::uint64_t>(pmf.k_max, 10000);
  if (lo >= 10 && lo < hi && hi <= pmf.k_max) {
    const TailFit fit = fit_tail_exponent(pmf, lo, hi);
    results["tail_fit"] = json{{"exponent", fit.exponent},
                               {"intercept", fit.intercept},
                               {"k_lo", fit.k_lo},
                               {"k_hi", fit.k_hi},
                               {"max_residual", fit.max_residual}};
  }
  if (pmf.k_max >= 50) {
    try {
      results["extrapolated_total_mass"] = extrapolated_total_mass(pmf);
    } catch (const Error& e) {
      results["extrapolated_total_mass_error"] = e.what();
    }
  }
  std::ostringstream os;
  write_pmf_csv(os, pmf);
  csv = os.str();
  summary = json{{"k_max", pmf.k_max}, {"mass_deficit", pmf.mass_deficit}};
}

// ------------------------------------------------------------ tree-analytic

void cmd_tree_analytic(const ExperimentConfig& cfg, json& results, std::string& csv,
                       json& summary) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> ts = cfg.times;
  if (ts.empty()) ts = {0.25, 0.5, 1.0, 2.0, 4.0};
  const double ac = critical_alpha(cfg.d);
  const bool subcritical_rate = cfg.alpha < ac;

  std::ostringstream os;
  os << "quantity,t,value\n";
  results = json{{"d", cfg.d}, {"alpha", cfg.alpha}, {"critical_alpha", ac}};
  os << "critical_alpha,," << fmt17(ac) << '\n';
  if (subcritical_rate) {
    const double tc = critical_time(cfg.d, cfg.alpha);
    results["critical_time"] = tc;
    os << "critical_time,," << fmt17(tc) << '\n';
  } else {
    results["critical_time"] = nullptr;
  }
  json rows = json::array();
  for (const double t : ts) {
    const double po = open_prob(cfg.alpha, t);
    const double pt = percolation_time(cfg.alpha, t);
    const double mt = meanfield_time(cfg.alpha, t);
    rows.push_back({{"t", t}, {"open_prob", po}, {"percolation_time", pt},
                    {"meanfield_time", mt}});
    os << "open_prob," << fmt17(t) << ',' << fmt17(po) << '\n';
    os << "percolation_time," << fmt17(t) << ',' << fmt17(pt) << '\n';
    os << "meanfield_time," << fmt17(t) << ',' << fmt17(mt) << '\n';
  }
  results["rows"] = rows;
  const double po_inf = open_prob(cfg.alpha, inf);
  const double pt_inf = percolation_time(cfg.alpha, inf);
  const double mt_inf = meanfield_time(cfg.alpha, inf);
  results["open_prob_limit"] = po_inf;
  results["percolation_time_limit"] = pt_inf;
  results["meanfield_time_limit"] = mt_inf;
  os << "open_prob,inf," << fmt17(po_inf) << '\n';
  os << "percolation_time,inf," << fmt17(pt_inf) << '\n';
  os << "meanfield_time,inf," << fmt17(mt_inf) << '\n';
  csv = os.str();
  summary = json{{"critical_alpha", ac}};
}

// ------------------------------------------------------------- oracle-check

void cmd_oracle_check(const ExperimentConfig& cfg, json& results, std::string& csv,
                      json& summary) {
  const GraphTopology g =
      cfg.edge_list_path.empty() ? named_graph(cfg.graph_name) : load_edge_list_file(cfg.edge_list_path);
  const StateSpace space = enumerate_states(g);
  const FinalDistribution dist = final_distribution(space, cfg.alpha);

  ReplicaPlan plan;
  plan.graph = &g;
  plan.alpha = cfg.alpha;
  plan.replicas = cfg.replicas;
  plan.base_seed = cfg.seed;
  plan.variant = RunVariant::pcf;
  plan.threads = cfg.threads;
  std::map<std::uint32_t, std::uint64_t> counts;
  std::vector<std::uint64_t> edge_open_counts(g.edge_count(), 0);
  run_replicas(plan, [&](std::uint64_t, const RunResult& res) {
    ++counts[space.ordinal_of(res.final)];
    for (std::uint32_t e = 0; e < g.edge_count(); ++e) {
      if (res.final.edge_open[e]) ++edge_open_counts[e];
    }
  });

  auto bits = [](const std::vector<std::uint8_t>& v) {
    std::string s;
    for (const std::uint8_t b : v) s.push_back(b ? '1' : '0');
    return s;
  };

  json states = json::array();
  std::ostringstream os;
  os << "state,open_edges,frozen_vertices,exact,successes,trials,p_hat,ci_low,ci_high\n";
  for (std::size_t i = 0; i < space.absorbing.size(); ++i) {
    const std::uint32_t ordinal = space.absorbing[i];
    const Configuration& c = space.states[ordinal];
    const std::uint64_t hits = counts.count(ordinal) ? counts.at(ordinal) : 0;
    const BernoulliEstimate est = wilson_estimate(hits, cfg.replicas);
    json rec = estimate_to_json(est);
    rec["state"] = ordinal;
    rec["open_edges"] = bits(c.edge_open);
    rec["frozen_vertices"] = bits(c.vertex_frozen);
    rec["exact"] = dist.probability[i];
    states.push_back(rec);
    os << ordinal << ',' << bits(c.edge_open) << ',' << bits(c.vertex_frozen) << ','
       << fmt17(dist.probability[i]) << ',' << est.successes << ',' << est.trials << ','
       << fmt17(est.p_hat) << ',' << fmt17(est.ci_low) << ',' << fmt17(est.ci_high) << '\n';
  }

  json marginals = json::array();
  for (std::uint32_t e = 0; e < g.edge_count(); ++e) {
    const double exact = marginal(dist, space,
                                  [e](const Configuration& c) { return c.edge_open[e] != 0; });
    json rec = estimate_to_json(wilson_estimate(edge_open_counts[e], cfg.replicas));
    rec["edge"] = e;
    rec["exact"] = exact;
    marginals.push_back(rec);
  }

  results = json{{"graph", cfg.edge_list_path.empty() ? cfg.graph_name : cfg.edge_list_path},
                 {"alpha", cfg.alpha},
                 {"replicas", cfg.replicas},
                 {"state_count", space.states.size()},
                 {"absorbing_count", space.absorbing.size()},
                 {"states", states},
                 {"edge_open_marginals", marginals}};
  csv = os.str();
  summary = json{{"state_count", space.states.size()},
                 {"absorbing_count", space.absorbing.size()}};
}

// --------------------------------------------------------------- star-bound

void cmd_star_bound(const ExperimentConfig& cfg, json& results, std::string& csv, json& summary) {
  std::vector<double> xs;
  try {
    xs = sweep_values(cfg);
  } catch (const UsageError&) {
    if (!(cfg.p_c > 0.0)) throw;  // no sweep and no threshold request: nothing to do
  }
  json bounds = json::array();
  std::ostringstream os;
  os << "alpha,bound\n";
  for (const double a : xs) {
    const double f = star_open_bound(cfg.degree, a);
    bounds.push_back({{"alpha", a}, {"bound", f}});
    os << fmt17(a) << ',' << fmt17(f) << '\n';
  }
  results = json{{"degree", cfg.degree}, {"bounds", bounds}};
  summary = json{{"points", xs.size()}};
  if (cfg.p_c > 0.0) {
    if (cfg.degree % 2 != 0) {
      throw UsageError("--p-c needs an even --degree (the lattice degree 2d)");
    }
    const double as = alpha_star(cfg.degree / 2, cfg.p_c);
    results["alpha_star"] =
        json{{"p_c", cfg.p_c}, {"value", as}, {"bound_at_value", star_open_bound(cfg.degree, as)}};
    summary["alpha_star"] = as;
  }
  csv = os.str();
}

std::string gnuplot_stub(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "# gnuplot stub for " << cfg.command << " output\n";
  os << "set datafile separator ','\n";
  if (cfg.command == "tree-pmf" || (cfg.command == "simulate" && cfg.histogram_min > 0)) {
    os << "set logscale xy\n";
  }
  if (cfg.command == "crossing-curve" || cfg.command == "estimate-alpha-c") {
    os << "plot '" << cfg.out_path << "' skip 1 using 1:5 with linespoints title 'p_hat'\n";
  } else if (cfg.command == "tree-pmf") {
    os << "plot '" << cfg.out_path << "' skip 1 using 1:2 with points title 'p_k'\n";
  } else if (cfg.command == "simulate" && cfg.histogram_min > 0) {
    os << "plot '" << cfg.out_path << "' skip 1 using 1:5 with points title 'density'\n";
  } else if (cfg.command == "star-bound") {
    os << "plot '" << cfg.out_path << "' skip 1 using 1:2 with linespoints title 'bound'\n";
  } else {
    os << "# no default plot for this command\n";
  }
  return os.str();
}

}  // namespace

ExperimentConfig parse_args(const std::vector<std::string>& args) {
  ExperimentConfig cfg;
  cfg.argv = args;

  CLI::App app{"Simulation and exact-analysis toolkit for bond percolation with "
               "rate-alpha cluster freezing"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  app.require_subcommand(1);

  auto add_common = [&cfg](CLI::App* sub, bool with_replicas) {
    sub->add_option("--seed", cfg.seed, "base RNG seed (required; no wall-clock default)")
        ->required();
    sub->add_option("--out", cfg.out_path, "output file (default: stdout)");
    sub->add_option("--format", cfg.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", cfg.threads, "worker threads (0 = hardware)");
    sub->add_flag("--gnuplot", cfg.gnuplot, "also write a gnuplot stub next to CSV output");
    sub->add_option("--config", cfg.config_path, "key = value defaults file (command line wins)");
    if (with_replicas) sub->add_option("--replicas", cfg.replicas, "Monte Carlo replicas");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "run replicas on one graph");
  simulate->add_option("--grid", cfg.grid_spec, "grid WIDTHxHEIGHT");
  simulate->add_option("--tree-d", cfg.tree_d, "rooted tree branching degree");
  simulate->add_option("--tree-depth", cfg.tree_depth, "rooted tree depth");
  simulate->add_option("--edge-list", cfg.edge_list_path, "edge-list file");
  simulate->add_option("--alpha", cfg.alpha, "freeze rate");
  simulate->add_option("--variant", cfg.variant, "pcf | warm | percolation")
      ->check(CLI::IsMember({"pcf", "warm", "percolation"}));
  simulate->add_option("--t", cfg.percolation_t, "percolation time (percolation variant)");
  simulate->add_option("--t-max", cfg.t_max, "stop processing clocks after this time");
  simulate->add_option("--histogram", cfg.histogram_min,
                       "emit cluster-size histogram with this min count per bin");
  add_common(simulate, true);

  CLI::App* curve = app.add_subcommand("crossing-curve", "crossing probability sweep");
  curve->add_option("--n", cfg.n_values, "grid size parameter(s), comma separated")
      ->delimiter(',');
  curve->add_option("--alpha", cfg.alphas, "sweep values, comma separated")->delimiter(',');
  curve->add_option("--alpha-range", cfg.alpha_range, "sweep shorthand lo:hi:step");
  curve->add_option("--variant", cfg.variant, "pcf | percolation")
      ->check(CLI::IsMember({"pcf", "percolation"}));
  add_common(curve, true);

  CLI::App* alphac = app.add_subcommand("estimate-alpha-c", "bisect the critical freeze rate");
  alphac->add_option("--n", cfg.n, "grid size parameter");
  alphac->add_option("--alpha-lo", cfg.alpha_lo, "bracket low end");
  alphac->add_option("--alpha-hi", cfg.alpha_hi, "bracket high end");
  alphac->add_option("--target-width", cfg.target_width, "stop when the bracket is this narrow");
  alphac->add_option("--budget", cfg.budget, "total replica budget");
  add_common(alphac, false);

  CLI::App* pmf = app.add_subcommand("tree-pmf", "exact root-cluster size distribution");
  pmf->add_option("--d", cfg.d, "branching degree");
  pmf->add_option("--alpha", cfg.alpha, "freeze rate");
  pmf->add_option("--k-max", cfg.k_max, "largest cluster size tabulated");
  pmf->add_option("--fit-lo", cfg.fit_lo, "tail-fit window lower end (default 100)");
  pmf->add_option("--fit-hi", cfg.fit_hi, "tail-fit window upper end (default min(k_max,1e4))");
  add_common(pmf, false);

  CLI::App* analytic = app.add_subcommand("tree-analytic", "closed-form tree quantities");
  analytic->add_option("--d", cfg.d, "branching degree");
  analytic->add_option("--alpha", cfg.alpha, "freeze rate");
  analytic->add_option("--t", cfg.times, "evaluation times, comma separated")->delimiter(',');
  add_common(analytic, false);

  CLI::App* oracle = app.add_subcommand("oracle-check", "exact chain vs engine Monte Carlo");
  oracle->add_option("--graph", cfg.graph_name, "named graph: edge|p3|p4|c3|c4|s3");
  oracle->add_option("--edge-list", cfg.edge_list_path, "edge-list file (overrides --graph)");
  oracle->add_option("--alpha", cfg.alpha, "freeze rate");
  add_common(oracle, true);

  CLI::App* star = app.add_subcommand("star-bound", "half-Gaussian freeze-race upper bound");
  star->add_option("--degree", cfg.degree, "star degree (lattice degree 2d)");
  star->add_option("--alpha", cfg.alphas, "evaluation rates, comma separated")->delimiter(',');
  star->add_option("--alpha-range", cfg.alpha_range, "sweep shorthand lo:hi:step");
  star->add_option("--p-c", cfg.p_c, "site threshold: also solve star bound == p_c");
  add_common(star, false);

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back(kToolName);
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e);  // --help / --version served
      cfg.command.clear();
      return cfg;
    }
    throw UsageError(e.what());
  }
  CLI::App* sub = app.get_subcommands().front();
  cfg.command = sub->get_name();

  // Config files supply defaults: inject each file key the command line did
  // not set, then re-parse.  The second pass sees every key as given, so it
  // injects nothing and recursion stops there.
  if (!cfg.config_path.empty()) {
    std::vector<std::string> injected;
    for (const auto& [key, value] : read_config_file(cfg.config_path)) {
      const std::string flag = "--" + key;
      const CLI::Option* opt = sub->get_option_no_throw(flag);
      if (opt == nullptr || flag == "--config") {
        throw UsageError("config file key '" + key + "' is not an option of " + cfg.command);
      }
      if (opt->count() == 0) injected.push_back(flag + "=" + value);
    }
    if (!injected.empty()) {
      const auto at = std::find(args.begin(), args.end(), cfg.command);
      std::vector<std::string> merged(args.begin(), at + 1);
      merged.insert(merged.end(), injected.begin(), injected.end());
      merged.insert(merged.end(), at + 1, args.end());
      ExperimentConfig full = parse_args(merged);
      full.argv = args;  // the manifest records what the user actually typed
      return full;
    }
  }
  return cfg;
}

int execute(const ExperimentConfig& cfg) {
  if (cfg.command.empty()) return 0;  // help/version already served
  const auto t0 = std::chrono::steady_clock::now();
  json results;
  std::string csv;
  json summary;

  if (cfg.command == "simulate") {
    cmd_simulate(cfg, results, csv, summary);
  } else if (cfg.command == "crossing-curve") {
    cmd_crossing_curve(cfg, results, csv, summary);
  } else if (cfg.command == "estimate-alpha-c") {
    cmd_estimate_alpha_c(cfg, results, csv, summary);
  } else if (cfg.command == "tree-pmf") {
    cmd_tree_pmf(cfg, results, csv, summary);
  } else if (cfg.command == "tree-analytic") {
    cmd_tree_analytic(cfg, results, csv, summary);
  } else if (cfg.command == "oracle-check") {
    cmd_oracle_check(cfg, results, csv, summary);
  } else if (cfg.command == "star-bound") {
    cmd_star_bound(cfg, results, csv, summary);
  } else {
    throw UsageError("unknown command: " + cfg.command);
  }

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json manifest{{"tool", kToolName},         {"version", kToolVersion},
                {"command", cfg.command},    {"argv", cfg.argv},
                {"config", config_to_json(cfg)}, {"elapsed_seconds", elapsed}};

  std::string payload;
  if (cfg.format == "json") {
    payload = json{{"manifest", manifest}, {"results", results}}.dump(2);
    payload.push_back('\n');
  } else {
    payload = csv;
  }

  if (cfg.out_path.empty()) {
    std::cout << payload;
  } else {
    write_text_atomic(cfg.out_path, payload);
    manifest["results_summary"] = summary;
    write_text_atomic(cfg.out_path + ".manifest.json", manifest.dump(2) + "\n");
    if (cfg.gnuplot && cfg.format == "csv") {
      write_text_atomic(cfg.out_path + ".gp", gnuplot_stub(cfg));
    }
  }
  return 0;
}

int run_cli(int argc, const char* const* argv) {
  try {
    const std::vector<std::string> args(argv + 1, argv + argc);
    const ExperimentConfig cfg = parse_args(args);
    return execute(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return int(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 70;
  }
}

}  // namespace pcf
