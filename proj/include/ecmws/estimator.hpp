#ifndef ECMWS_ESTIMATOR_HPP_
#define ECMWS_ESTIMATOR_HPP_

#include <vector>

#include "ecmws/model.hpp"

namespace ecmws {

// Topology-averaged time estimates for one task.
struct TaskEstimate {
  double work = 0.0;    // W / mean frequency
  double trans = 0.0;   // max over predecessors of S / mean bandwidth
  double start = 0.0;   // estimated earliest start
  double finish = 0.0;  // start + trans + work
};

struct WorkflowEstimate {
  std::vector<TaskEstimate> tasks;
  double avg_mips = 0.0;
  double avg_bandwidth = 0.0;

  // Estimated transfer time on the edge pred -> task.
  double edge_trans(const Workflow& wf, int pred, int task) const;
  double finish() const;  // max over tasks
};

double avg_frequency(const Topology& topology);

// Mean bandwidth over all ordered server pairs, counting same-cluster pairs
// as zero.
double avg_bandwidth(const Topology& topology);

// Entry tasks start at the next slot boundary after submission.
double slot_boundary(double submit, double tau);

// A zero mean bandwidth means every server shares one cluster, so all
// transfers are local and cost nothing.
WorkflowEstimate estimate_workflow(const Workflow& workflow, double avg_mips,
                                   double avg_bw, double tau);
WorkflowEstimate estimate_workflow(const Workflow& workflow,
                                   const Topology& topology, double tau);

}  // namespace ecmws

#endif  // ECMWS_ESTIMATOR_HPP_
