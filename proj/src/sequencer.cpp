#include "ecmws/sequencer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ecmws {

void CwsWeights::validate() const {
  for (double a : {slack, workload, contention}) {
    if (a < 0.0 || a > 1.0) throw std::invalid_argument("CWS weights must lie in [0, 1]");
  }
  if (std::abs(slack + workload + contention - 1.0) > 1e-9) {
    throw std::invalid_argument("CWS weights must sum to 1");
  }
}

double cws_rank(const WorkflowFactors& f, const CwsWeights& w) {
  return w.slack * f.st + w.workload * f.wl + w.contention * f.ct;
}

int max_overlap(std::vector<Interval> intervals) {
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& a, const Interval& b) { return a.begin < b.begin; });
  // Min-heap of end times of the intervals still open.
  std::vector<double> open;
  int best = 0;
  for (const auto& iv : intervals) {
    if (!(iv.end > iv.begin)) continue;
    while (!open.empty() && open.front() <= iv.begin) {
      std::pop_heap(open.begin(), open.end(), std::greater<>());
      open.pop_back();
    }
    open.push_back(iv.end);
    std::push_heap(open.begin(), open.end(), std::greater<>());
    best = std::max(best, static_cast<int>(open.size()));
  }
  return best;
}

int compute_contention(const WorkflowEstimate& estimate) {
  std::vector<Interval> intervals;
  intervals.reserve(estimate.tasks.size());
  for (const auto& t : estimate.tasks) intervals.push_back({t.start, t.finish});
  return std::max(1, max_overlap(std::move(intervals)));
}

std::vector<CwsEntry> cws_order(const std::vector<const Workflow*>& batch,
                                const std::vector<const WorkflowEstimate*>& estimates,
                                const CwsWeights& weights) {
  if (batch.empty()) throw std::invalid_argument("empty workflow batch");
  if (batch.size() != estimates.size()) throw std::invalid_argument("estimate count mismatch");
  weights.validate();

  std::vector<CwsEntry> entries(batch.size());
  double max_wl = 0.0;
  double max_slack = 0.0;
  int max_ct = 0;
  for (std::size_t w = 0; w < batch.size(); ++w) {
    auto& f = entries[w].factors;
    entries[w].index = w;
    f.wl = batch[w]->total_workload();
    f.slack = batch[w]->deadline() - estimates[w]->finish();
    f.negative_slack = f.slack < 0.0;
    f.contention = compute_contention(*estimates[w]);
    max_wl = std::max(max_wl, f.wl);
    max_slack = std::max(max_slack, f.slack);
    max_ct = std::max(max_ct, f.contention);
  }
  for (auto& e : entries) {
    auto& f = e.factors;
    f.st = max_slack > 0.0 ? std::max(0.0, f.slack) / max_slack : 0.0;
    f.wl = f.wl / max_wl;
    f.ct = static_cast<double>(f.contention) / static_cast<double>(max_ct);
    f.rank = cws_rank(f, weights);
  }
  std::sort(entries.begin(), entries.end(), [&](const CwsEntry& a, const CwsEntry& b) {
    if (a.factors.rank != b.factors.rank) return a.factors.rank < b.factors.rank;
    const auto* wa = batch[a.index];
    const auto* wb = batch[b.index];
    if (wa->submit() != wb->submit()) return wa->submit() < wb->submit();
    return wa->id() < wb->id();
  });
  return entries;
}

SubdeadlineTable bldp_subdeadlines(const Workflow& workflow,
                                   const WorkflowEstimate& estimate, double beta) {
  if (!(beta > 1.0)) throw std::invalid_argument("bottleneck base must exceed 1");
  const auto n = workflow.size();
  SubdeadlineTable t;
  t.level.assign(n, 0);
  t.rank_dp.assign(n, 0.0);
  t.subdeadline.assign(n, 0.0);
  const auto& order = workflow.topological_order();

  int max_level = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto& task = workflow.task(*it);
    int level = 1;
    for (int s : task.succs) level = std::max(level, t.level[static_cast<std::size_t>(s)] + 1);
    t.level[static_cast<std::size_t>(*it)] = level;
    max_level = std::max(max_level, level);
  }
  t.level_population.assign(static_cast<std::size_t>(max_level) + 1, 0);
  for (int l : t.level) ++t.level_population[static_cast<std::size_t>(l)];

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int i = *it;
    const auto& task = workflow.task(i);
    const double work = estimate.tasks[static_cast<std::size_t>(i)].work;
    if (task.is_exit()) {
      t.rank_dp[static_cast<std::size_t>(i)] = work;
      continue;
    }
    double best = 0.0;
    for (int s : task.succs) {
      best = std::max(best, t.rank_dp[static_cast<std::size_t>(s)] +
                                estimate.edge_trans(workflow, i, s));
    }
    const int l = t.level[static_cast<std::size_t>(i)];
    const double ratio =
        static_cast<double>(t.level_population[static_cast<std::size_t>(l)]) /
        static_cast<double>(t.level_population[static_cast<std::size_t>(l - 1)]);
    t.rank_dp[static_cast<std::size_t>(i)] = best + work + std::pow(beta, ratio);
  }

  t.rank_dp0 = 0.0;
  for (const auto& task : workflow.tasks()) {
    if (task.is_entry()) t.rank_dp0 = std::max(t.rank_dp0, t.rank_dp[static_cast<std::size_t>(task.id)]);
  }
  // Nothing runs before the entry tasks' estimated start (the slot boundary),
  // so the window opens there.
  double origin = workflow.deadline();
  for (const auto& task : workflow.tasks()) {
    if (task.is_entry()) origin = std::min(origin, estimate.tasks[static_cast<std::size_t>(task.id)].start);
  }
  origin = std::max(origin, workflow.submit());
  const double window = workflow.deadline() - origin;
  for (std::size_t i = 0; i < n; ++i) {
    if (workflow.task(static_cast<int>(i)).is_exit()) {
      t.subdeadline[i] = workflow.deadline();
      continue;
    }
    const double frac = (t.rank_dp0 - t.rank_dp[i] + estimate.tasks[i].work) / t.rank_dp0;
    t.subdeadline[i] = std::min(workflow.deadline(), origin + window * frac);
  }
  return t;
}

TaskSorting task_sorting_from_string(const std::string& s) {
  if (s == "TS1" || s == "ts1" || s == "1") return TaskSorting::kUpwardRank;
  if (s == "TS2" || s == "ts2" || s == "2") return TaskSorting::kDownwardRank;
  if (s == "TS3" || s == "ts3" || s == "3") return TaskSorting::kBottleneckRank;
  throw std::invalid_argument("unknown task sorting strategy: " + s);
}

std::string to_string(TaskSorting s) {
  switch (s) {
    case TaskSorting::kUpwardRank: return "TS1";
    case TaskSorting::kDownwardRank: return "TS2";
    case TaskSorting::kBottleneckRank: return "TS3";
  }
  return "?";
}

std::vector<double> upward_rank(const Workflow& workflow, const WorkflowEstimate& estimate) {
  std::vector<double> rank(workflow.size(), 0.0);
  const auto& order = workflow.topological_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int i = *it;
    double best = 0.0;
    for (int s : workflow.task(i).succs) {
      best = std::max(best, estimate.edge_trans(workflow, i, s) + rank[static_cast<std::size_t>(s)]);
    }
    rank[static_cast<std::size_t>(i)] = best + estimate.tasks[static_cast<std::size_t>(i)].work;
  }
  return rank;
}

std::vector<double> downward_rank(const Workflow& workflow, const WorkflowEstimate& estimate) {
  std::vector<double> rank(workflow.size(), 0.0);
  for (int i : workflow.topological_order()) {
    double best = 0.0;
    for (int p : workflow.task(i).preds) {
      best = std::max(best, estimate.edge_trans(workflow, p, i) +
                                estimate.tasks[static_cast<std::size_t>(p)].work +
                                rank[static_cast<std::size_t>(p)]);
    }
    rank[static_cast<std::size_t>(i)] = best;
  }
  return rank;
}

std::vector<int> task_sequence(const Workflow& workflow,
                               const WorkflowEstimate& estimate, TaskSorting strategy,
                               const SubdeadlineTable* subdeadlines) {
  std::vector<double> key;
  bool descending = true;
  switch (strategy) {
    case TaskSorting::kUpwardRank:
      key = upward_rank(workflow, estimate);
      break;
    case TaskSorting::kDownwardRank:
      key = downward_rank(workflow, estimate);
      descending = false;
      break;
    case TaskSorting::kBottleneckRank:
      if (subdeadlines == nullptr) {
        throw std::invalid_argument("TS3 needs the sub-deadline table");
      }
      key = subdeadlines->rank_dp;
      break;
  }
  std::vector<int> order(workflow.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double ka = key[static_cast<std::size_t>(a)];
    const double kb = key[static_cast<std::size_t>(b)];
    if (ka != kb) return descending ? ka > kb : ka < kb;
    return a < b;
  });
  return order;
}

}  // namespace ecmws
