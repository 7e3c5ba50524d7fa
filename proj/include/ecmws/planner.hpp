// Configuration of the scheduling pipeline and the slot-by-slot decision
// plan. Sequencing depends only on estimates, so the full order of
// placement decisions is known before any server is chosen.

#ifndef ECMWS_PLANNER_HPP_
#define ECMWS_PLANNER_HPP_

#include <vector>

#include "ecmws/estimator.hpp"
#include "ecmws/model.hpp"
#include "ecmws/sequencer.hpp"

namespace ecmws {

struct EcmwsConfig {
  double t_term = kSecondsPerDay;
  double tau = 600.0;
  CwsWeights weights;
  double beta = 4.0;
  TaskSorting strategy = TaskSorting::kBottleneckRank;
  double conf_thresh = 0.5;

  void validate() const;
};

Json to_json(const EcmwsConfig& c);
// Missing keys keep their defaults.
EcmwsConfig config_from_json(const Json& j);

struct Decision {
  std::size_t workflow = 0;  // index into the workflow list
  int task = 0;
  double subdeadline = 0.0;
  double est_start = 0.0;  // estimated earliest start
  double clock = 0.0;      // end of the slot in which the decision is taken
};

struct SchedulePlan {
  std::vector<Decision> decisions;
  std::vector<WorkflowEstimate> estimates;   // per workflow
  std::vector<SubdeadlineTable> subdeadlines;  // per workflow
  std::vector<WorkflowFactors> factors;       // per workflow
  std::vector<double> slot_end;               // per workflow; decision clock
  std::vector<std::size_t> accepted;          // workflows in scheduling order
  std::vector<std::size_t> rejected;          // submitted at or after T_term
  std::vector<std::size_t> slot_offsets;      // decisions[slot_offsets[s] ..] start slot s
};

// Slots are half-open: arrivals in [t, t + tau) are sequenced together at
// the slot end.
SchedulePlan plan_schedule(const EcmwsConfig& config, const Topology& topology,
                           const std::vector<Workflow>& workflows);

}  // namespace ecmws

#endif  // ECMWS_PLANNER_HPP_
