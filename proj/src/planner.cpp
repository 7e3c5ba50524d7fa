#include "ecmws/planner.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace ecmws {

void EcmwsConfig::validate() const {
  if (!(tau > 0.0) || tau > t_term) throw std::invalid_argument("need 0 < tau <= T_term");
  weights.validate();
  if (!(beta > 1.0)) throw std::invalid_argument("beta must exceed 1");
  if (conf_thresh < 0.0 || conf_thresh > 1.0) {
    throw std::invalid_argument("confidence threshold must lie in [0, 1]");
  }
}

Json to_json(const EcmwsConfig& c) {
  return {{"t_term", c.t_term},
          {"tau", c.tau},
          {"alpha", {c.weights.slack, c.weights.workload, c.weights.contention}},
          {"beta", c.beta},
          {"strategy", to_string(c.strategy)},
          {"conf_thresh", c.conf_thresh}};
}

EcmwsConfig config_from_json(const Json& j) {
  EcmwsConfig c;
  c.t_term = j.value("t_term", c.t_term);
  c.tau = j.value("tau", c.tau);
  if (j.contains("alpha")) {
    const auto a = j.at("alpha").get<std::vector<double>>();
    if (a.size() != 3) throw std::invalid_argument("alpha needs three weights");
    c.weights = {a[0], a[1], a[2]};
  }
  c.beta = j.value("beta", c.beta);
  if (j.contains("strategy")) c.strategy = task_sorting_from_string(j.at("strategy").get<std::string>());
  c.conf_thresh = j.value("conf_thresh", c.conf_thresh);
  c.validate();
  return c;
}

SchedulePlan plan_schedule(const EcmwsConfig& config, const Topology& topology,
                           const std::vector<Workflow>& workflows) {
  config.validate();
  const std::size_t n = workflows.size();
  SchedulePlan plan;
  plan.estimates.resize(n);
  plan.subdeadlines.resize(n);
  plan.factors.resize(n);
  plan.slot_end.assign(n, 0.0);

  const double avg_mips = avg_frequency(topology);
  const double avg_bw = avg_bandwidth(topology);

  std::vector<std::size_t> by_submit(n);
  std::iota(by_submit.begin(), by_submit.end(), 0);
  std::stable_sort(by_submit.begin(), by_submit.end(), [&](std::size_t a, std::size_t b) {
    if (workflows[a].submit() != workflows[b].submit()) {
      return workflows[a].submit() < workflows[b].submit();
    }
    return workflows[a].id() < workflows[b].id();
  });

  std::size_t next = 0;
  for (double t = 0.0; t < config.t_term; t += config.tau) {
    const double t_end = std::min(t + config.tau, config.t_term);
    std::vector<std::size_t> batch;
    while (next < n && workflows[by_submit[next]].submit() < t_end) {
      batch.push_back(by_submit[next++]);
    }
    plan.slot_offsets.push_back(plan.decisions.size());
    if (batch.empty()) continue;

    std::vector<const Workflow*> wfs;
    std::vector<const WorkflowEstimate*> ests;
    for (std::size_t w : batch) {
      plan.estimates[w] = estimate_workflow(workflows[w], avg_mips, avg_bw, config.tau);
      wfs.push_back(&workflows[w]);
    }
    for (std::size_t w : batch) ests.push_back(&plan.estimates[w]);
    for (const auto& entry : cws_order(wfs, ests, config.weights)) {
      const std::size_t w = batch[entry.index];
      plan.factors[w] = entry.factors;
      plan.slot_end[w] = t_end;
      plan.accepted.push_back(w);
      const auto& wf = workflows[w];
      const auto& est = plan.estimates[w];
      plan.subdeadlines[w] = bldp_subdeadlines(wf, est, config.beta);
      for (int i : task_sequence(wf, est, config.strategy, &plan.subdeadlines[w])) {
        Decision d;
        d.workflow = w;
        d.task = i;
        d.subdeadline = plan.subdeadlines[w].subdeadline[static_cast<std::size_t>(i)];
        d.est_start = est.tasks[static_cast<std::size_t>(i)].start;
        d.clock = t_end;
        plan.decisions.push_back(d);
      }
    }
  }
  for (; next < n; ++next) plan.rejected.push_back(by_submit[next]);
  return plan;
}

}  // namespace ecmws
