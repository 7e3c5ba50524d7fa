#include "ecmws/workload.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ecmws/estimator.hpp"

namespace ecmws {

Family family_from_string(const std::string& s) {
  if (s == "epigenomics") return Family::kEpigenomics;
  if (s == "genome") return Family::kGenome;
  if (s == "montage") return Family::kMontage;
  if (s == "layered") return Family::kLayered;
  throw std::invalid_argument("unknown workflow family: " + s);
}

std::string to_string(Family f) {
  switch (f) {
    case Family::kEpigenomics: return "epigenomics";
    case Family::kGenome: return "genome";
    case Family::kMontage: return "montage";
    case Family::kLayered: return "layered";
  }
  return "?";
}

void GenSpec::validate() const {
  if (workflows < 0 || tasks < 1) throw std::invalid_argument("need >= 0 workflows of >= 1 task");
  if (rho < 0.0) throw std::invalid_argument("rho must be non-negative");
  if (!(min_workload > 0.0) || max_workload < min_workload) {
    throw std::invalid_argument("bad workload range");
  }
  if (min_gbits < 0.0 || max_gbits < min_gbits) throw std::invalid_argument("bad data size range");
  if (!(t_term > 0.0) || !(tau > 0.0)) throw std::invalid_argument("bad horizon");
}

namespace {

using Edges = std::vector<std::pair<int, int>>;

void chain(Edges& e, int from, int to) {
  for (int i = from; i < to; ++i) e.emplace_back(i, i + 1);
}

// Joins leftover components by an edge from lower to higher id.
void connect_components(int n, Edges& edges) {
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    }
    return x;
  };
  for (const auto& [a, b] : edges) parent[static_cast<std::size_t>(find(a))] = find(b);
  // The lowest id of each component, in increasing order.
  std::vector<int> heads;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (int v = 0; v < n; ++v) {
    const int r = find(v);
    if (!seen[static_cast<std::size_t>(r)]) {
      seen[static_cast<std::size_t>(r)] = 1;
      heads.push_back(v);
    }
  }
  for (std::size_t i = 1; i < heads.size(); ++i) edges.emplace_back(heads[0], heads[i]);
}

Edges epigenomics(int n) {
  Edges e;
  if (n < 4) {
    chain(e, 0, n - 1);
    return e;
  }
  // 0 splits into pipelines that merge at n-2, then the final task n-1.
  const int inner = n - 3;
  const int pipes = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(inner)))));
  int id = 1;
  for (int p = 0; p < pipes; ++p) {
    const int len = inner / pipes + (p < inner % pipes ? 1 : 0);
    if (len == 0) continue;
    e.emplace_back(0, id);
    chain(e, id, id + len - 1);
    e.emplace_back(id + len - 1, n - 2);
    id += len;
  }
  e.emplace_back(n - 2, n - 1);
  return e;
}

Edges genome(int n, std::mt19937_64& rng) {
  // A merge tree grown from the exit task; ids are reversed at the end so
  // edges point from leaves (low ids) towards the root.
  Edges tree;
  std::vector<int> frontier{0};
  int next = 1;
  std::uniform_int_distribution<int> fan(2, 4);
  while (next < n) {
    std::vector<int> grown;
    for (int parent : frontier) {
      const int kids = std::min(fan(rng), n - next);
      for (int c = 0; c < kids; ++c) {
        tree.emplace_back(next, parent);
        grown.push_back(next++);
      }
      if (next >= n) break;
    }
    frontier = std::move(grown);
  }
  Edges e;
  for (const auto& [child, parent] : tree) e.emplace_back(n - 1 - child, n - 1 - parent);
  return e;
}

Edges montage(int n) {
  Edges e;
  if (n < 8) {
    if (n >= 4) {
      // Diamond plus chain.
      e.emplace_back(0, 1);
      e.emplace_back(0, 2);
      e.emplace_back(1, 3);
      e.emplace_back(2, 3);
      chain(e, 3, n - 1);
    } else {
      chain(e, 0, n - 1);
    }
    return e;
  }
  // source, a projections, a-1 pairwise diffs, one concat, a corrections,
  // one final add; surplus tasks trail the add as a chain.
  const int a = (n - 2) / 3;
  const int proj = 1;
  const int diff = proj + a;
  const int concat = diff + a - 1;
  const int corr = concat + 1;
  const int add = corr + a;
  for (int i = 0; i < a; ++i) e.emplace_back(0, proj + i);
  for (int i = 0; i + 1 < a; ++i) {
    e.emplace_back(proj + i, diff + i);
    e.emplace_back(proj + i + 1, diff + i);
    e.emplace_back(diff + i, concat);
  }
  for (int i = 0; i < a; ++i) {
    e.emplace_back(concat, corr + i);
    e.emplace_back(proj + i, corr + i);
    e.emplace_back(corr + i, add);
  }
  chain(e, add, n - 1);
  return e;
}

Edges layered(int n, double p, std::mt19937_64& rng) {
  Edges e;
  const int layers = std::max(1, std::min(n, static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))))));
  std::vector<int> start;
  int id = 0;
  for (int l = 0; l < layers; ++l) {
    start.push_back(id);
    id += n / layers + (l < n % layers ? 1 : 0);
  }
  start.push_back(n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int l = 1; l < layers; ++l) {
    const int lo = start[static_cast<std::size_t>(l - 1)];
    const int hi = start[static_cast<std::size_t>(l)];
    for (int v = hi; v < start[static_cast<std::size_t>(l + 1)]; ++v) {
      bool any = false;
      for (int w = lo; w < hi; ++w) {
        if (u(rng) < p) {
          e.emplace_back(w, v);
          any = true;
        }
      }
      if (!any) e.emplace_back(lo + static_cast<int>(u(rng) * (hi - lo)), v);
    }
  }
  return e;
}

double log_uniform(double lo, double hi, std::mt19937_64& rng) {
  if (lo == hi) return lo;
  if (lo <= 0.0) return std::uniform_real_distribution<double>(lo, hi)(rng);
  return std::exp(std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(rng));
}

}  // namespace

std::vector<std::pair<int, int>> family_structure(Family family, int n, double edge_probability,
                                                  std::mt19937_64& rng) {
  if (n < 1) throw std::invalid_argument("a workflow needs at least one task");
  Edges e;
  switch (family) {
    case Family::kEpigenomics: e = epigenomics(n); break;
    case Family::kGenome: e = genome(n, rng); break;
    case Family::kMontage: e = montage(n); break;
    case Family::kLayered: e = layered(n, edge_probability, rng); break;
  }
  connect_components(n, e);
  return e;
}

std::vector<Workflow> generate(const GenSpec& spec, const Topology& topology) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const double avg_mips = avg_frequency(topology);
  const double avg_bw = avg_bandwidth(topology);
  std::uniform_real_distribution<double> arrival(0.0, spec.t_term);
  std::vector<Workflow> out;
  for (int w = 0; w < spec.workflows; ++w) {
    const auto structure = family_structure(spec.family, spec.tasks, spec.edge_probability, rng);
    std::vector<double> loads;
    for (int i = 0; i < spec.tasks; ++i) loads.push_back(log_uniform(spec.min_workload, spec.max_workload, rng));
    std::vector<Workflow::EdgeSpec> edges;
    for (const auto& [a, b] : structure) {
      edges.push_back({a, b, log_uniform(spec.min_gbits, spec.max_gbits, rng)});
    }
    const double submit = arrival(rng);
    // Placeholder deadline, replaced once the span is estimated.
    Workflow wf(w, submit, submit + 1.0, loads, edges);
    const double eft = estimate_workflow(wf, avg_mips, avg_bw, spec.tau).finish();
    wf.set_deadline(submit + (eft - submit) * (1.0 + spec.rho));
    out.push_back(std::move(wf));
  }
  return out;
}

std::vector<GridCell> grid(const GridSpec& spec) {
  std::vector<GridCell> cells;
  std::uint64_t index = 0;
  for (int count : spec.workflow_counts) {
    for (int tasks : spec.task_counts) {
      for (double rho : spec.rhos) {
        for (int i = 0; i < spec.instances_per_cell; ++i, ++index) {
          GridCell c;
          c.workflows = count;
          c.tasks = tasks;
          c.rho = rho;
          c.instance = i;
          c.family = spec.families.empty()
                         ? static_cast<Family>(i % 4)
                         : spec.families[static_cast<std::size_t>(i) % spec.families.size()];
          // splitmix64 step keeps cell seeds well spread.
          std::uint64_t z = spec.seed + 0x9e3779b97f4a7c15ULL * (index + 1);
          z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
          z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
          c.seed = z ^ (z >> 31);
          cells.push_back(c);
        }
      }
    }
  }
  return cells;
}

void write_manifest_csv(std::ostream& out, const std::vector<GridCell>& cells,
                        const std::vector<std::string>& files) {
  out << "instance,file,workflows,tasks,rho,family,seed\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    out << i << ',' << (i < files.size() ? files[i] : "") << ',' << c.workflows << ','
        << c.tasks << ',' << c.rho << ',' << to_string(c.family) << ',' << c.seed << '\n';
  }
}

PriceSchedule reference_prices(int dc) {
  std::array<double, 24> h{};
  switch (((dc % 4) + 4) % 4) {
    case 0:  // widest swing, evening peak
      for (int i = 0; i < 24; ++i) h[static_cast<std::size_t>(i)] = i < 6 ? 0.09 : (i < 15 ? 0.16 : (i < 21 ? 0.31 : 0.14));
      break;
    case 1:
      for (int i = 0; i < 24; ++i) h[static_cast<std::size_t>(i)] = (i >= 12 && i < 22) ? 0.19 : 0.12;
      break;
    case 2:
      for (int i = 0; i < 24; ++i) h[static_cast<std::size_t>(i)] = (i >= 7 && i < 19) ? 0.23 : 0.14;
      break;
    default:
      for (int i = 0; i < 24; ++i) h[static_cast<std::size_t>(i)] = (i >= 6 && i < 18) ? 0.25 : 0.15;
      break;
  }
  return PriceSchedule(h);
}

Topology reference_topology(int dcs, int clusters_per_dc, std::uint64_t seed, double congestion_p) {
  if (dcs < 1 || clusters_per_dc < 1) throw std::invalid_argument("need at least one DC and cluster");
  struct ServerType {
    double mips;
    double watts;
  };
  static constexpr std::array<ServerType, 6> kServers{
      {{500, 50}, {250, 25}, {600, 100}, {300, 50}, {800, 200}, {400, 100}}};
  // Cores per cluster type and the server types each admits.
  static constexpr std::array<int, 5> kCores{4, 8, 4, 8, 4};
  static constexpr std::array<std::array<int, 2>, 5> kAdmits{{{0, 1}, {0, 1}, {2, 3}, {2, 3}, {4, 5}}};
  std::mt19937_64 rng(seed);
  std::vector<DataCenter> out;
  for (int k = 0; k < dcs; ++k) {
    DataCenter dc;
    dc.price = reference_prices(k);
    for (int j = 0; j < clusters_per_dc; ++j) {
      const int type = j % 5;
      Cluster cl;
      cl.type = type + 1;
      for (int c = 0; c < kCores[static_cast<std::size_t>(type)]; ++c) {
        const auto& st = kServers[static_cast<std::size_t>(kAdmits[static_cast<std::size_t>(type)][rng() % 2])];
        cl.servers.push_back({{}, st.mips, st.watts});
      }
      dc.clusters.push_back(cl);
    }
    out.push_back(dc);
  }
  return Topology(out, BandwidthModel(80.0, 100.0, congestion_p, seed));
}

}  // namespace ecmws
