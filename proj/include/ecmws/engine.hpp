// Slot-driven execution ledger.

#ifndef ECMWS_ENGINE_HPP_
#define ECMWS_ENGINE_HPP_

#include <cstdint>
#include <map>
#include <ostream>
#include <vector>

#include "ecmws/model.hpp"

namespace ecmws {

// Exact timing and cost of a task on one server, computed without mutating
// the ledger.
struct CandidateTiming {
  ServerRef server;
  double est = 0.0;  // earliest start
  double eft = 0.0;  // earliest finish
  double work_time = 0.0;
  double trans_time = 0.0;
  double cost = 0.0;
};

// Transfer time of `gbits` from src to dst during `slot`. Same-cluster
// transfers are free.
double transfer_time(const Topology& topology, const ServerRef& src,
                     const ServerRef& dst, double gbits, std::int64_t slot);

// Energy cost of running a server of `watts` over [begin, end] under a
// daily-periodic hourly price, summed exactly over hour segments.
double cost_integral(double watts, const PriceSchedule& price, double begin, double end);
double cost_integral(const Topology& topology, const ServerRef& server,
                     double begin, double end);

class ScheduleState {
 public:
  ScheduleState(const Topology& topology, double tau, double t_term = kSecondsPerDay);

  const Topology& topology() const { return *topology_; }
  double tau() const { return tau_; }
  double t_term() const { return t_term_; }
  double now() const { return now_; }
  void set_now(double t) { now_ = t; }
  std::int64_t slot_of(double t) const;

  double available(const ServerRef& ref) const;
  double available_at(int flat) const { return avail_[static_cast<std::size_t>(flat)]; }
  const std::vector<Assignment>& log() const { return log_; }
  double total_cost() const { return total_cost_; }
  const Assignment* find(const TaskRef& ref) const;
  bool placed(const TaskRef& ref) const { return find(ref) != nullptr; }

  CandidateTiming preview(const Workflow& workflow, int task, const ServerRef& server) const;
  const Assignment& place_task(const Workflow& workflow, int task, const ServerRef& server);

 private:
  const Topology* topology_;
  double tau_;
  double t_term_;
  double now_ = 0.0;
  std::vector<double> avail_;
  std::vector<Assignment> log_;
  std::map<TaskRef, std::size_t> index_;
  double total_cost_ = 0.0;
};

struct FeasibilityEntry {
  int workflow = 0;
  double finish = 0.0;
  double deadline = 0.0;
  bool met = false;
};

std::vector<FeasibilityEntry> feasibility_report(const ScheduleState& state,
                                                 const std::vector<Workflow>& workflows);
int deadline_misses(const std::vector<FeasibilityEntry>& report);

// Relative percentage deviation of z from the best cost z_star.
double rpd(double z, double z_star);

// Columns: w,i,k,j,l,T_B,T_F,cost
void write_assignment_csv(std::ostream& out, const std::vector<Assignment>& log);

}  // namespace ecmws

#endif  // ECMWS_ENGINE_HPP_
