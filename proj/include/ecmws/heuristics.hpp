// Deadline-assured reserve allocator and comparison baselines.

#ifndef ECMWS_HEURISTICS_HPP_
#define ECMWS_HEURISTICS_HPP_

#include <vector>

#include "ecmws/engine.hpp"
#include "ecmws/estimator.hpp"
#include "ecmws/model.hpp"

namespace ecmws {

// Cheapest DC at time t; ties go to the lower index.
int cheapest_dc(const Topology& topology, double t);

// Server with the highest MIPS-per-watt ratio inside DC k, first in (j, l)
// order on ties.
ServerRef best_ratio_server(const Topology& topology, int k);

// Picks the DC with the lowest price at the task's estimated start, then the
// cheapest server of that DC able to finish by `subdeadline`. With no such
// server, returns the DC's best performance-per-watt server, the earliest
// finishing one when several share that ratio.
ServerRef dara(const ScheduleState& state, const Workflow& workflow, int task,
               double est_start, double subdeadline);

struct BatchItem {
  const Workflow* workflow = nullptr;
  const WorkflowEstimate* estimate = nullptr;
};

// List scheduling of the merged batch by upward rank, minimum finish time
// per task regardless of cost.
std::vector<Assignment> heft_batch(const std::vector<BatchItem>& batch, ScheduleState& state);

// Every task on the server with the lowest power x price at its estimated
// start; deadlines and queueing are ignored.
std::vector<Assignment> greedy_cheapest(const std::vector<BatchItem>& batch,
                                        ScheduleState& state);

}  // namespace ecmws

#endif  // ECMWS_HEURISTICS_HPP_
