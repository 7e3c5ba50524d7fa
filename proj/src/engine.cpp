#include "ecmws/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "ecmws/estimator.hpp"

namespace ecmws {

double transfer_time(const Topology& topology, const ServerRef& src,
                     const ServerRef& dst, double gbits, std::int64_t slot) {
  const int e = transfer_class(topology, src, dst);
  if (e == 0 || gbits == 0.0) return 0.0;
  return gbits / effective_bandwidth(topology.bandwidth(), e, slot);
}

double cost_integral(double watts, const PriceSchedule& price, double begin, double end) {
  if (end < begin) throw std::invalid_argument("cost interval ends before it begins");
  if (begin < 0.0) throw std::invalid_argument("negative time");
  double price_seconds = 0.0;
  auto hour = static_cast<std::int64_t>(std::floor(begin / kSecondsPerHour));
  double seg_begin = begin;
  while (seg_begin < end) {
    const double seg_end = std::min(end, static_cast<double>(hour + 1) * kSecondsPerHour);
    price_seconds += (seg_end - seg_begin) * price.hour(static_cast<int>(hour % 24));
    seg_begin = seg_end;
    ++hour;
  }
  return watts / 1000.0 * price_seconds / kSecondsPerHour;
}

double cost_integral(const Topology& topology, const ServerRef& server,
                     double begin, double end) {
  return cost_integral(topology.server(server).watts, topology.dc(server.dc).price, begin, end);
}

ScheduleState::ScheduleState(const Topology& topology, double tau, double t_term)
    : topology_(&topology), tau_(tau), t_term_(t_term),
      avail_(static_cast<std::size_t>(topology.total_servers()), 0.0) {
  if (!(tau > 0.0) || tau > t_term) {
    throw std::invalid_argument("slot length must lie in (0, T_term]");
  }
}

std::int64_t ScheduleState::slot_of(double t) const {
  return static_cast<std::int64_t>(std::floor(t / tau_));
}

double ScheduleState::available(const ServerRef& ref) const {
  return avail_[static_cast<std::size_t>(topology_->flat_index(ref))];
}

const Assignment* ScheduleState::find(const TaskRef& ref) const {
  auto it = index_.find(ref);
  return it == index_.end() ? nullptr : &log_[it->second];
}

CandidateTiming ScheduleState::preview(const Workflow& workflow, int task,
                                       const ServerRef& server) const {
  const auto& t = workflow.task(task);
  const auto& srv = topology_->server(server);
  CandidateTiming c;
  c.server = server;
  double ready = t.is_entry() ? slot_boundary(workflow.submit(), tau_) : 0.0;
  for (int p : t.preds) {
    const auto* a = find({workflow.id(), p});
    if (a == nullptr) {
      throw std::logic_error("task " + std::to_string(task) + " of workflow " +
                             std::to_string(workflow.id()) + " has an unplaced predecessor");
    }
    ready = std::max(ready, a->finish);
  }
  c.est = std::max(ready, avail_[static_cast<std::size_t>(topology_->flat_index(server))]);
  const std::int64_t slot = slot_of(c.est);
  for (const auto& e : t.in_edges) {
    const auto* a = find({workflow.id(), e.pred});
    c.trans_time = std::max(c.trans_time, transfer_time(*topology_, a->server, server, e.gbits, slot));
  }
  c.work_time = t.workload / srv.mips;
  c.eft = c.est + (c.trans_time + c.work_time);
  c.cost = cost_integral(srv.watts, topology_->dc(server.dc).price, c.est, c.eft);
  return c;
}

const Assignment& ScheduleState::place_task(const Workflow& workflow, int task,
                                            const ServerRef& server) {
  const TaskRef ref{workflow.id(), task};
  if (placed(ref)) {
    throw std::logic_error("task " + std::to_string(task) + " of workflow " +
                           std::to_string(workflow.id()) + " is already placed");
  }
  const auto c = preview(workflow, task, server);
  Assignment a;
  a.task = ref;
  a.server = server;
  a.start = c.est;
  a.finish = c.eft;
  a.work_time = c.work_time;
  a.trans_time = c.trans_time;
  a.cost = c.cost;
  avail_[static_cast<std::size_t>(topology_->flat_index(server))] = a.finish;
  index_[ref] = log_.size();
  log_.push_back(a);
  total_cost_ += a.cost;
  return log_.back();
}

std::vector<FeasibilityEntry> feasibility_report(const ScheduleState& state,
                                                 const std::vector<Workflow>& workflows) {
  std::vector<FeasibilityEntry> report;
  report.reserve(workflows.size());
  for (const auto& wf : workflows) {
    FeasibilityEntry e;
    e.workflow = wf.id();
    e.deadline = wf.deadline();
    for (const auto& t : wf.tasks()) {
      const auto* a = state.find({wf.id(), t.id});
      if (a == nullptr) {
        throw std::logic_error("workflow " + std::to_string(wf.id()) + " is not fully placed");
      }
      e.finish = std::max(e.finish, a->finish);
    }
    e.met = e.finish <= e.deadline;
    report.push_back(e);
  }
  return report;
}

int deadline_misses(const std::vector<FeasibilityEntry>& report) {
  return static_cast<int>(std::count_if(report.begin(), report.end(),
                                        [](const FeasibilityEntry& e) { return !e.met; }));
}

double rpd(double z, double z_star) {
  if (!(z_star > 0.0)) throw std::invalid_argument("reference cost must be positive");
  return (z - z_star) / z_star * 100.0;
}

void write_assignment_csv(std::ostream& out, const std::vector<Assignment>& log) {
  out << "w,i,k,j,l,T_B,T_F,cost\n";
  char buf[256];
  for (const auto& a : log) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%d,%d,%d,%.17g,%.17g,%.17g\n", a.task.workflow,
                  a.task.task, a.server.dc, a.server.cluster, a.server.server, a.start,
                  a.finish, a.cost);
    out << buf;
  }
}

}  // namespace ecmws
