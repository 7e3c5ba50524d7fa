// Acceptance gate: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.
//
//   acceptance [criterion ...]     run a subset, e.g. `acceptance 1 7`

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../test_support.hpp"
#include "ecmws/heuristics.hpp"
#include "ecmws/orchestrator.hpp"
#include "ecmws/workload.hpp"

using namespace ecmws;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Wall-clock budget check folded into the criterion outcome.
Outcome within(Outcome o, double seconds, double budget) {
  o.detail += fmt(", %.2f s (budget %.0f s)", seconds, budget);
  if (seconds >= budget) o.pass = false;
  return o;
}

// --- 1 ---------------------------------------------------------------------

constexpr double kCostRelTol = 1e-9;

// 1-second midpoint quadrature; steps are cut at whole seconds so no step
// crosses an hour boundary.
double quadrature(double watts, const PriceSchedule& price, double begin, double end) {
  double sum = 0.0;
  double t = begin;
  while (t < end) {
    const double next = std::min(end, std::floor(t) + 1.0);
    sum += price.at(0.5 * (t + next)) * (next - t);
    t = next;
  }
  return watts / 1000.0 * sum / kSecondsPerHour;
}

Outcome cost_model() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::array<double, 24> hourly{};
    for (auto& h : hourly) h = 0.02 + 0.5 * unit(rng);
    const PriceSchedule price(hourly);
    const double begin = 3.0 * kSecondsPerDay * unit(rng);
    const double end = begin + 1.5 * kSecondsPerDay * unit(rng);
    const double watts = 10.0 + 400.0 * unit(rng);
    const double exact = cost_integral(watts, price, begin, end);
    const double quad = quadrature(watts, price, begin, end);
    worst = std::max(worst, std::abs(exact - quad) / std::max(quad, 1e-300));
  }
  const double tier = cost_integral(200.0, PriceSchedule::two_tier(0.16, 0.19), 7 * 3600.0, 9 * 3600.0);
  return {worst <= kCostRelTol && tier == 0.070,
          fmt("max rel err %.2e over 1000 cases, 07:00-09:00 two-tier = %.17g", worst, tier)};
}

// --- 2 ---------------------------------------------------------------------

Outcome transfer_oracle() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int checked = 0;
  int wrong = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const double b_in = 1.0 + 199.0 * unit(rng);
    const double b_out = 1.0 + 199.0 * unit(rng);
    const auto topo = testing::uniform_topology(2, 2, 2, 1000.0, 100.0, b_in, b_out);
    const double s = 500.0 * unit(rng);
    const auto slot = static_cast<std::int64_t>(rng() % 1000);
    const ServerRef a{0, 0, 0};
    const ServerRef same{0, 0, 1};
    const ServerRef cluster{0, 1, 0};
    const ServerRef dc{1, 1, 1};
    wrong += transfer_time(topo, a, same, s, slot) != 0.0;
    wrong += transfer_time(topo, a, cluster, s, slot) != s / b_in;
    wrong += transfer_time(topo, a, dc, s, slot) != s / b_out;
    checked += 3;
  }
  return {wrong == 0, fmt("%d/%d closed-form matches", checked - wrong, checked)};
}

// --- 3 ---------------------------------------------------------------------

Outcome estimator_oracle() {
  std::mt19937_64 rng(303);
  const auto topo = testing::example_topology();
  const double mips = avg_frequency(topo);
  const double bw = avg_bandwidth(topo);
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 12);
    const double submit = static_cast<double>(rng() % 10000);
    const auto wf = testing::random_dag(rng, n, 0.35, 0, submit, submit + 1e6);
    const auto est = estimate_workflow(wf, topo, 600.0);
    const auto oracle = testing::brute_force_finish(wf, mips, bw, slot_boundary(submit, 600.0));
    for (int i = 0; i < n; ++i) {
      mismatches += est.tasks[static_cast<std::size_t>(i)].finish != oracle[static_cast<std::size_t>(i)];
    }
  }
  return {mismatches == 0, fmt("%d task finish mismatches on 200 DAGs", mismatches)};
}

// --- 4 ---------------------------------------------------------------------

constexpr double kRankTol = 1e-12;

int brute_force_overlap(const std::vector<Interval>& ivs) {
  int best = 0;
  for (const auto& probe : ivs) {
    if (!(probe.end > probe.begin)) continue;
    int count = 0;
    for (const auto& iv : ivs) count += iv.begin <= probe.begin && probe.begin < iv.end;
    best = std::max(best, count);
  }
  return best;
}

Outcome sequencing_fixtures() {
  const CwsWeights w;
  WorkflowFactors g1;
  g1.wl = 0.72;
  g1.st = 0.30;
  g1.ct = 1.0;
  WorkflowFactors g2;
  g2.wl = 0.28;
  g2.st = 0.16;
  g2.ct = 1.0;
  const double r1 = cws_rank(g1, w);
  const double r2 = cws_rank(g2, w);
  const bool ranks = std::abs(r1 - 0.664) < kRankTol && std::abs(r2 - 0.520) < kRankTol;

  std::mt19937_64 rng(404);
  int overlap_bad = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Interval> ivs;
    const int n = 1 + static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) {
      const double a = static_cast<double>(rng() % 25);
      const double b = static_cast<double>(rng() % 25);
      ivs.push_back({std::min(a, b), std::max(a, b)});
    }
    overlap_bad += max_overlap(ivs) != brute_force_overlap(ivs);
  }

  int bldp_bad = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const double submit = static_cast<double>(rng() % 5000);
    const auto wf = testing::random_dag(rng, 2 + static_cast<int>(rng() % 25), 0.25, 0, submit,
                                        submit + 5000.0);
    const auto est = estimate_workflow(wf, 475.0, 35.0, 600.0);
    const auto table = bldp_subdeadlines(wf, est, 4.0);
    for (const auto& t : wf.tasks()) {
      const double d = table.subdeadline[static_cast<std::size_t>(t.id)];
      if (t.is_exit() && d != wf.deadline()) ++bldp_bad;
      for (int s : t.succs) bldp_bad += d > table.subdeadline[static_cast<std::size_t>(s)];
    }
  }
  return {ranks && overlap_bad == 0 && bldp_bad == 0,
          fmt("ranks (%.15f, %.15f), %d overlap mismatches, %d sub-deadline violations", r1, r2,
              overlap_bad, bldp_bad)};
}

// --- 5 ---------------------------------------------------------------------

Outcome ts3_safety() {
  std::mt19937_64 rng(505);
  int violations = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto wf = testing::random_dag(rng, 1 + static_cast<int>(rng() % 30), 0.2);
    const auto est = estimate_workflow(wf, 475.0, 35.0, 600.0);
    const auto table = bldp_subdeadlines(wf, est, 4.0);
    const auto order = task_sequence(wf, est, TaskSorting::kBottleneckRank, &table);
    std::vector<int> pos(wf.size(), -1);
    for (std::size_t i = 0; i < order.size(); ++i) pos[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
    if (order.size() != wf.size()) ++violations;
    for (const auto& t : wf.tasks()) {
      for (int s : t.succs) violations += pos[static_cast<std::size_t>(s)] <= pos[static_cast<std::size_t>(t.id)];
    }
  }
  return {violations == 0, fmt("%d precedence violations over 500 DAGs", violations)};
}

// --- 6 ---------------------------------------------------------------------

Outcome dara_optimality() {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int wrong = 0;
  int feasible = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<DataCenter> dcs;
    for (int k = 0; k < 3; ++k) {
      DataCenter dc;
      std::array<double, 24> h{};
      for (auto& p : h) p = 0.05 + 0.35 * unit(rng);
      dc.price = PriceSchedule(h);
      for (int j = 0; j < 2; ++j) {
        Cluster cl;
        // Half the scenarios draw from a few types so ratios tie.
        for (int l = 0; l < 3; ++l) {
          if (trial % 2 == 0) {
            const double mips = 250.0 * static_cast<double>(1 + rng() % 3);
            cl.servers.push_back({{}, mips, mips / 10.0});
          } else {
            cl.servers.push_back({{}, 200.0 + 800.0 * unit(rng), 20.0 + 180.0 * unit(rng)});
          }
        }
        dc.clusters.push_back(cl);
      }
      dcs.push_back(dc);
    }
    const Topology topo(dcs, BandwidthModel(80.0, 100.0, 0.0, 1));
    ScheduleState st(topo, 600.0);
    for (int b = 0; b < 6; ++b) {
      const Workflow bg(100 + b, 0.0, 1e9, {1000.0 + 50000.0 * unit(rng)}, {});
      st.place_task(bg, 0, topo.server_at(static_cast<int>(rng() % 18)).ref);
    }
    const Workflow wf(0, 0.0, 1e9, {500.0 + 20000.0 * unit(rng)}, {});
    const double est_start = kSecondsPerDay * unit(rng);
    const double sub = 120.0 * unit(rng);
    const auto choice = dara(st, wf, 0, est_start, sub);

    int k = 0;
    for (int c = 1; c < 3; ++c) {
      if (topo.dc(c).price.at(est_start) < topo.dc(k).price.at(est_start)) k = c;
    }
    // Exhaustive scan of the cheapest DC: min cost among servers finishing by
    // the sub-deadline, else the best MIPS per watt (earliest finish on ties).
    double best_cost = std::numeric_limits<double>::infinity();
    std::set<ServerRef> argmin;
    double ratio = -1.0;
    for (const auto& s : topo.servers()) {
      if (s.ref.dc == k) ratio = std::max(ratio, s.mips / s.watts);
    }
    ServerRef ratio_best;
    double ratio_eft = std::numeric_limits<double>::infinity();
    for (const auto& s : topo.servers()) {
      if (s.ref.dc != k) continue;
      const auto c = st.preview(wf, 0, s.ref);
      if (s.mips / s.watts == ratio && c.eft < ratio_eft) {
        ratio_eft = c.eft;
        ratio_best = s.ref;
      }
      if (c.eft > sub) continue;
      if (c.cost < best_cost) argmin.clear();
      if (c.cost <= best_cost) {
        best_cost = c.cost;
        argmin.insert(s.ref);
      }
    }
    if (!argmin.empty()) {
      ++feasible;
      wrong += argmin.count(choice) == 0;
    } else {
      wrong += !(choice == ratio_best);
    }
  }
  return {wrong == 0, fmt("%d/200 choices differ (%d scenarios had a feasible server)", wrong, feasible)};
}

// --- 7 ---------------------------------------------------------------------

constexpr double kGradStep = 1e-4;
constexpr double kGradTol = 1e-4;

Outcome gradient_integrity() {
  // Six servers: DC 0 holds 2 x 2, DC 1 holds one cluster of 2.
  const auto topo = testing::shaped_topology({{2, 2}, {2}});
  const auto models = EmbedModels::create(7);
  const int dim = state_dim(models, topo);
  Rng rng(77);
  ActorCritic net(dim, topo.num_dcs(), topo.max_servers_per_dc(), ActorCriticSpec{}, rng);
  const std::vector<int> spd{topo.servers_in_dc(0), topo.servers_in_dc(1)};

  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PpoBatch batch;
  const int n = 8;
  batch.states = Matrix(n, dim);
  for (Eigen::Index i = 0; i < batch.states.size(); ++i) batch.states(i) = u(rng);
  batch.old_logprob.resize(n);
  batch.advantages.resize(n);
  batch.returns.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto a = act(net, batch.states.row(i).transpose(), spd, &rng);
    batch.actions.push_back(a.action);
    batch.old_logprob(i) = a.logprob + 0.05 * u(rng);
    batch.advantages(i) = u(rng);
    batch.returns(i) = u(rng);
  }
  const PpoHyper hyper;
  auto loss = [&](bool grad) {
    if (grad) {
      for (auto* p : net.params()) p->zero_grad();
    }
    return ppo_loss(net, batch, spd, hyper, grad).total;
  };
  const auto results = grad_check(net.params(), loss, kGradStep, kGradTol, 64);
  double worst = 0.0;
  int failed = 0;
  int entries = 0;
  for (const auto& r : results) {
    worst = std::max(worst, r.rel_error);
    failed += !r.pass;
    entries += r.entries_checked;
  }
  return {failed == 0,
          fmt("%zu tensors, %d entries, worst rel err %.2e (state dim %d)", results.size(), entries,
              worst, dim)};
}

// --- 8 ---------------------------------------------------------------------

constexpr double kGaeTol = 1e-10;

Outcome gae_identities() {
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double worst0 = 0.0;
  double worst1 = 0.0;
  const double gamma = 0.99;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 50);
    std::vector<double> r(static_cast<std::size_t>(n));
    std::vector<double> v(static_cast<std::size_t>(n));
    std::vector<int> d(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
      r[static_cast<std::size_t>(t)] = u(rng);
      v[static_cast<std::size_t>(t)] = u(rng);
      d[static_cast<std::size_t>(t)] = rng() % 8 == 0;
    }
    const double last = u(rng);
    const auto a0 = gae(r, v, d, last, gamma, 0.0);
    const auto a1 = gae(r, v, d, last, gamma, 1.0);
    for (int t = 0; t < n; ++t) {
      const auto ts = static_cast<std::size_t>(t);
      const double next = d[ts] ? 0.0 : (t + 1 < n ? v[ts + 1] : last);
      worst0 = std::max(worst0, std::abs(a0[ts] - (r[ts] + gamma * next - v[ts])));
      double g = 0.0;
      double disc = 1.0;
      int k = t;
      for (; k < n; ++k) {
        g += disc * r[static_cast<std::size_t>(k)];
        if (d[static_cast<std::size_t>(k)]) break;
        disc *= gamma;
      }
      if (k == n) g += disc * last;
      worst1 = std::max(worst1, std::abs(a1[ts] - (g - v[ts])));
    }
  }
  return {worst0 <= kGaeTol && worst1 <= kGaeTol,
          fmt("max |A - delta| %.1e (lambda 0), max |A - (G - V)| %.1e (lambda 1)", worst0, worst1)};
}

// --- 9 ---------------------------------------------------------------------

Outcome masking_soundness() {
  const std::vector<int> spd{2, 5};
  Rng rng(909);
  ActorCritic net(20, 2, 5, ActorCriticSpec{{64, 32}, 32}, rng);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  int out_of_range = 0;
  int leaked = 0;
  std::array<int, 2> per_dc{};
  for (int i = 0; i < 10000; ++i) {
    Vector s(20);
    for (auto& x : s) x = u(rng);
    const auto a = act(net, s, spd, &rng);
    const int omega = spd[static_cast<std::size_t>(a.action.dc)];
    ++per_dc[static_cast<std::size_t>(a.action.dc)];
    out_of_range += a.action.server >= omega;
    Matrix logits;
    Vector values;
    net.forward(s.transpose(), logits, values);
    const Vector p = masked_softmax(logits.row(0).tail(5).transpose(), server_mask(omega, 5));
    for (int l = omega; l < 5; ++l) leaked += p(l) != 0.0;
  }
  return {out_of_range == 0 && leaked == 0 && per_dc[0] > 0 && per_dc[1] > 0,
          fmt("%d out-of-range servers, %d nonzero masked probabilities (DC draws %d/%d)",
              out_of_range, leaked, per_dc[0], per_dc[1])};
}

// --- 10 --------------------------------------------------------------------

constexpr int kBenchIterations = 100;
constexpr double kRewardGain = 0.10;
constexpr double kBaselineSlack = 1.05;
constexpr int kBenchEpisodesPerIteration = 5;
constexpr int kBenchEpochs = 20;

// Two DCs with six servers each; cheap hours of the two price profiles are
// offset by twelve hours. DC0 holds the lowest-watt servers, so ranking by
// watts x price keeps picking DC0 even in the hours where DC1's 600/100
// servers are cheaper per instruction.
Topology micro_topology() {
  std::vector<DataCenter> dcs(2);
  std::array<double, 24> p0{};
  std::array<double, 24> p1{};
  for (int h = 0; h < 24; ++h) {
    p0[static_cast<std::size_t>(h)] = h < 12 ? 0.08 : 0.20;
    p1[static_cast<std::size_t>(h)] = h < 12 ? 0.20 : 0.08;
  }
  dcs[0].price = PriceSchedule(p0);
  dcs[1].price = PriceSchedule(p1);
  auto cluster = [](int type, double mips, double watts) {
    Cluster c;
    c.type = type;
    for (int l = 0; l < 3; ++l) c.servers.push_back({{}, mips, watts});
    return c;
  };
  dcs[0].clusters = {cluster(2, 250.0, 25.0), cluster(1, 500.0, 50.0)};
  dcs[1].clusters = {cluster(3, 600.0, 100.0), cluster(6, 400.0, 100.0)};
  return Topology(dcs, BandwidthModel(80.0, 100.0, 0.3, 10));
}

Outcome learning_signal() {
  const auto topo = micro_topology();
  EcmwsConfig cfg;
  GenSpec g;
  g.workflows = 10;
  g.tasks = 20;
  g.rho = 0.4;
  g.seed = 10;
  const auto wfs = generate(g, topo);

  auto bundle = PolicyBundle::create(topo, cfg, 10);
  SchedulingEnv env(topo, cfg, {wfs}, bundle.models, bundle.dim_price);
  RappoOptions opt;
  opt.iterations = kBenchIterations;
  opt.steps = kBenchEpisodesPerIteration * static_cast<int>(env.mean_episode_length());
  opt.epochs = kBenchEpochs;
  opt.seed = 10;
  const auto log = rappo_train(env, bundle.net, opt);
  const double first = log.front().episode_reward;
  const double last = log.back().episode_reward;
  const double gain = (last - first) / std::abs(first);

  const auto z = [&](Algorithm a) { return run_algorithm(a, cfg, topo, wfs, &bundle); };
  const auto ecmws = z(Algorithm::kEcmws);
  EcmwsConfig policy_only = cfg;
  policy_only.conf_thresh = 0.0;
  const auto pure = run_algorithm(Algorithm::kEcmws, policy_only, topo, wfs, &bundle);
  const double greedy = z(Algorithm::kGreedy).z;
  const double dara_z = z(Algorithm::kDara).z;
  const double heft = z(Algorithm::kHeft).z;
  const bool pass = gain >= kRewardGain && ecmws.z <= greedy &&
                    ecmws.z <= kBaselineSlack * std::min(dara_z, heft);
  return {pass, fmt("episode reward %.5g -> %.5g (%+.1f%%), Z ecmws %.5g (policy %d/%d) greedy "
                    "%.5g dara %.5g heft %.5g, policy alone %.5g with %d misses",
                    first, last, 100.0 * gain, ecmws.z, ecmws.policy_decisions,
                    ecmws.policy_decisions + ecmws.reserve_decisions, greedy, dara_z, heft,
                    pure.z, deadline_misses(pure.feasibility))};
}

// --- 11 --------------------------------------------------------------------

Outcome determinism() {
  const auto topo = reference_topology(2, 3, 11);
  GenSpec g;
  g.workflows = 12;
  g.tasks = 15;
  g.seed = 11;
  auto csv = [&](const PolicyBundle& b) {
    EcmwsConfig cfg;
    cfg.conf_thresh = 0.0;
    const auto r = run_algorithm(Algorithm::kEcmws, cfg, topo, generate(g, topo), &b);
    std::ostringstream out;
    write_assignment_csv(out, r.log);
    return std::make_pair(out.str(), r.policy_decisions);
  };
  const auto a = csv(PolicyBundle::create(topo, EcmwsConfig{}, 11, ActorCriticSpec{{64, 32}, 32}));
  const auto b = csv(PolicyBundle::create(topo, EcmwsConfig{}, 11, ActorCriticSpec{{64, 32}, 32}));
  return {a.first == b.first && !a.first.empty(),
          fmt("%zu-byte logs %s, %d policy decisions", a.first.size(),
              a.first == b.first ? "identical" : "differ", a.second)};
}

// --- 12 --------------------------------------------------------------------

// Peak number of estimated task intervals open at once across the stream.
int stream_contention(const Topology& topo, const std::vector<Workflow>& wfs, double tau) {
  std::vector<Interval> all;
  for (const auto& wf : wfs) {
    for (const auto& t : estimate_workflow(wf, topo, tau).tasks) all.push_back({t.start, t.finish});
  }
  return max_overlap(all);
}

Outcome feasibility_accounting() {
  const auto topo = reference_topology(2, 5, 12);
  const EcmwsConfig cfg;
  int misses = 0;
  int contention = 0;
  int instances = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    for (auto fam : {Family::kEpigenomics, Family::kGenome, Family::kMontage, Family::kLayered}) {
      GenSpec g;
      g.workflows = 8;
      g.tasks = 20;
      g.rho = 1.0;
      g.family = fam;
      g.seed = seed;
      const auto wfs = generate(g, topo);
      contention = std::max(contention, stream_contention(topo, wfs, cfg.tau));
      misses += deadline_misses(run_algorithm(Algorithm::kDara, cfg, topo, wfs).feasibility);
      ++instances;
    }
  }
  const bool abundant = topo.total_servers() >= 2 * contention;
  return {abundant && misses == 0,
          fmt("%d deadline misses on %d instances, %d servers vs peak contention %d", misses,
              instances, topo.total_servers(), contention)};
}

struct Criterion {
  int id;
  const char* name;
  double budget;  // seconds; 0 = none
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "cost-model exactness", 5.0, cost_model},
      {2, "transfer-time oracle", 1.0, transfer_oracle},
      {3, "estimator oracle", 10.0, estimator_oracle},
      {4, "sequencing fixtures", 0.0, sequencing_fixtures},
      {5, "TS3 topological safety", 0.0, ts3_safety},
      {6, "DARA optimality within the DC", 0.0, dara_optimality},
      {7, "gradient integrity", 30.0, gradient_integrity},
      {8, "GAE identities", 0.0, gae_identities},
      {9, "masking soundness", 0.0, masking_soundness},
      {10, "learning signal", 900.0, learning_signal},
      {11, "determinism", 0.0, determinism},
      {12, "feasibility accounting", 0.0, feasibility_accounting},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && wanted.count(c.id) == 0) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget > 0.0) {
      o = within(o, secs, c.budget);
    } else {
      o.detail += fmt(", %.2f s", secs);
    }
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed;
}
