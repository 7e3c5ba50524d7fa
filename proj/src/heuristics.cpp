#include "ecmws/heuristics.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

#include "ecmws/sequencer.hpp"

namespace ecmws {

int cheapest_dc(const Topology& topology, double t) {
  int best = 0;
  double best_price = std::numeric_limits<double>::infinity();
  for (int k = 0; k < topology.num_dcs(); ++k) {
    const double p = price_at(topology.dc(k), t);
    if (p < best_price) {
      best_price = p;
      best = k;
    }
  }
  return best;
}

ServerRef best_ratio_server(const Topology& topology, int k) {
  ServerRef best{k, 0, 0};
  double best_ratio = -1.0;
  const auto& dc = topology.dc(k);
  for (const auto& cl : dc.clusters) {
    for (const auto& s : cl.servers) {
      const double ratio = s.mips / s.watts;
      if (ratio > best_ratio) {
        best_ratio = ratio;
        best = s.ref;
      }
    }
  }
  return best;
}

ServerRef dara(const ScheduleState& state, const Workflow& workflow, int task,
               double est_start, double subdeadline) {
  const auto& topo = state.topology();
  const int k = cheapest_dc(topo, est_start);
  const Server& top = topo.server(best_ratio_server(topo, k));
  const double top_ratio = top.mips / top.watts;

  ServerRef cheapest;
  double cheapest_cost = 0.0;
  bool feasible_found = false;
  ServerRef fallback;
  double fallback_eft = 0.0;
  bool fallback_set = false;
  for (const auto& cl : topo.dc(k).clusters) {
    for (const auto& s : cl.servers) {
      const auto c = state.preview(workflow, task, s.ref);
      if (c.eft <= subdeadline && (!feasible_found || c.cost <= cheapest_cost)) {
        cheapest = s.ref;
        cheapest_cost = c.cost;
        feasible_found = true;
      }
      // Equal-ratio servers are told apart by their finish time.
      if (s.mips / s.watts == top_ratio && (!fallback_set || c.eft < fallback_eft)) {
        fallback = s.ref;
        fallback_eft = c.eft;
        fallback_set = true;
      }
    }
  }
  return feasible_found ? cheapest : fallback;
}

namespace {

struct RankedTask {
  std::size_t item = 0;
  int task = 0;
  double rank = 0.0;
};

std::vector<RankedTask> merged_by_upward_rank(const std::vector<BatchItem>& batch) {
  std::vector<RankedTask> tasks;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto ranks = upward_rank(*batch[b].workflow, *batch[b].estimate);
    for (int i = 0; i < static_cast<int>(ranks.size()); ++i) {
      tasks.push_back({b, i, ranks[static_cast<std::size_t>(i)]});
    }
  }
  std::stable_sort(tasks.begin(), tasks.end(), [](const RankedTask& a, const RankedTask& b) {
    if (a.rank != b.rank) return a.rank > b.rank;
    return std::tie(a.item, a.task) < std::tie(b.item, b.task);
  });
  return tasks;
}

}  // namespace

std::vector<Assignment> heft_batch(const std::vector<BatchItem>& batch, ScheduleState& state) {
  std::vector<Assignment> out;
  const auto& topo = state.topology();
  for (const auto& rt : merged_by_upward_rank(batch)) {
    const auto& wf = *batch[rt.item].workflow;
    CandidateTiming best;
    best.eft = std::numeric_limits<double>::infinity();
    for (const auto& s : topo.servers()) {
      const auto c = state.preview(wf, rt.task, s.ref);
      if (c.eft < best.eft) best = c;
    }
    out.push_back(state.place_task(wf, rt.task, best.server));
  }
  return out;
}

std::vector<Assignment> greedy_cheapest(const std::vector<BatchItem>& batch,
                                        ScheduleState& state) {
  std::vector<Assignment> out;
  const auto& topo = state.topology();
  for (const auto& item : batch) {
    const auto& wf = *item.workflow;
    for (int i : task_sequence(wf, *item.estimate, TaskSorting::kUpwardRank, nullptr)) {
      const double t = item.estimate->tasks[static_cast<std::size_t>(i)].start;
      ServerRef best = topo.servers().front().ref;
      double best_rate = std::numeric_limits<double>::infinity();
      for (const auto& s : topo.servers()) {
        const double rate = s.watts * price_at(topo.dc(s.ref.dc), t);
        if (rate < best_rate) {
          best_rate = rate;
          best = s.ref;
        }
      }
      out.push_back(state.place_task(wf, i, best));
    }
  }
  return out;
}

}  // namespace ecmws
