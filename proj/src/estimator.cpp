#include "ecmws/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ecmws {

double WorkflowEstimate::edge_trans(const Workflow& wf, int pred, int task) const {
  if (avg_bandwidth <= 0.0) return 0.0;
  return wf.task(task).data_from(pred) / avg_bandwidth;
}

double WorkflowEstimate::finish() const {
  double f = 0.0;
  for (const auto& t : tasks) f = std::max(f, t.finish);
  return f;
}

double avg_frequency(const Topology& topology) {
  if (topology.total_servers() == 0) {
    throw std::invalid_argument("topology has no servers");
  }
  double sum = 0.0;
  for (const auto& s : topology.servers()) sum += s.mips;
  return sum / topology.total_servers();
}

double avg_bandwidth(const Topology& topology) {
  const double total = topology.total_servers();
  if (total <= 0.0) throw std::invalid_argument("topology has no servers");
  double intra_pairs = 0.0;
  for (const auto& dc : topology.datacenters()) {
    for (std::size_t j = 0; j < dc.clusters.size(); ++j) {
      for (std::size_t jj = j + 1; jj < dc.clusters.size(); ++jj) {
        intra_pairs += static_cast<double>(dc.clusters[j].servers.size()) *
                       static_cast<double>(dc.clusters[jj].servers.size());
      }
    }
  }
  double inter_pairs = 0.0;
  for (int k = 0; k < topology.num_dcs(); ++k) {
    for (int kk = k + 1; kk < topology.num_dcs(); ++kk) {
      inter_pairs += static_cast<double>(topology.servers_in_dc(k)) *
                     static_cast<double>(topology.servers_in_dc(kk));
    }
  }
  const auto& bw = topology.bandwidth();
  return (bw.b_in() * intra_pairs + bw.b_out() * inter_pairs) / (total * total);
}

double slot_boundary(double submit, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("slot length must be positive");
  return std::ceil(submit / tau) * tau;
}

WorkflowEstimate estimate_workflow(const Workflow& workflow, double avg_mips,
                                   double avg_bw, double tau) {
  if (!(avg_mips > 0.0)) throw std::invalid_argument("mean frequency must be positive");
  if (avg_bw < 0.0) throw std::invalid_argument("mean bandwidth must be non-negative");
  WorkflowEstimate est;
  est.avg_mips = avg_mips;
  est.avg_bandwidth = avg_bw;
  est.tasks.resize(workflow.size());
  const double entry_start = slot_boundary(workflow.submit(), tau);
  for (int i : workflow.topological_order()) {
    const auto& task = workflow.task(i);
    auto& e = est.tasks[static_cast<std::size_t>(i)];
    e.work = task.workload / avg_mips;
    if (task.is_entry()) {
      e.start = entry_start;
    } else {
      double start = 0.0;
      double trans = 0.0;
      for (const auto& edge : task.in_edges) {
        start = std::max(start, est.tasks[static_cast<std::size_t>(edge.pred)].finish);
        if (avg_bw > 0.0) trans = std::max(trans, edge.gbits / avg_bw);
      }
      e.start = start;
      e.trans = trans;
    }
    e.finish = e.start + e.trans + e.work;
  }
  return est;
}

WorkflowEstimate estimate_workflow(const Workflow& workflow,
                                   const Topology& topology, double tau) {
  return estimate_workflow(workflow, avg_frequency(topology),
                           avg_bandwidth(topology), tau);
}

}  // namespace ecmws
