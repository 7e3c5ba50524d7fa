// Workflow ordering, sub-deadline partitioning and task ordering.

#ifndef ECMWS_SEQUENCER_HPP_
#define ECMWS_SEQUENCER_HPP_

#include <string>
#include <utility>
#include <vector>

#include "ecmws/estimator.hpp"
#include "ecmws/model.hpp"

namespace ecmws {

struct CwsWeights {
  double slack = 0.4;     // alpha1
  double workload = 0.2;  // alpha2
  double contention = 0.4;  // alpha3

  void validate() const;
};

struct WorkflowFactors {
  double wl = 0.0;
  double st = 0.0;
  double ct = 0.0;
  double slack = 0.0;
  int contention = 0;
  double rank = 0.0;
  bool negative_slack = false;
};

double cws_rank(const WorkflowFactors& f, const CwsWeights& w);

struct Interval {
  double begin = 0.0;
  double end = 0.0;
};

// Maximum number of half-open intervals overlapping at any instant.
int max_overlap(std::vector<Interval> intervals);
int compute_contention(const WorkflowEstimate& estimate);

struct CwsEntry {
  std::size_t index = 0;  // position in the input batch
  WorkflowFactors factors;
};

// Sorted ascending by rank, ties broken by (submit time, workflow id).
std::vector<CwsEntry> cws_order(const std::vector<const Workflow*>& batch,
                                const std::vector<const WorkflowEstimate*>& estimates,
                                const CwsWeights& weights);

struct SubdeadlineTable {
  std::vector<int> level;
  std::vector<int> level_population;  // indexed by level, [0] unused
  std::vector<double> rank_dp;
  double rank_dp0 = 0.0;
  std::vector<double> subdeadline;
};

// Sub-deadlines split the window [EST, d_w], EST being the entry tasks'
// estimated start; a workflow starting at time zero gets d_w scaled by the
// rank fraction.
SubdeadlineTable bldp_subdeadlines(const Workflow& workflow,
                                   const WorkflowEstimate& estimate, double beta);

enum class TaskSorting { kUpwardRank = 1, kDownwardRank = 2, kBottleneckRank = 3 };

TaskSorting task_sorting_from_string(const std::string& s);
std::string to_string(TaskSorting s);

std::vector<double> upward_rank(const Workflow& workflow, const WorkflowEstimate& estimate);
std::vector<double> downward_rank(const Workflow& workflow, const WorkflowEstimate& estimate);

std::vector<int> task_sequence(const Workflow& workflow,
                               const WorkflowEstimate& estimate, TaskSorting strategy,
                               const SubdeadlineTable* subdeadlines);

}  // namespace ecmws

#endif  // ECMWS_SEQUENCER_HPP_
