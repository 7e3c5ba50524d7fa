#include "ecmws/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include "ecmws/heuristics.hpp"

namespace ecmws {

PolicyBundle PolicyBundle::create(const Topology& topology, const EcmwsConfig& config,
                                  std::uint64_t seed, const ActorCriticSpec& spec,
                                  int dim_price) {
  PolicyBundle b;
  b.models = EmbedModels::create(seed);
  b.config = config;
  b.spec = spec;
  b.dim_price = dim_price;
  b.num_dcs = topology.num_dcs();
  b.max_servers = topology.max_servers_per_dc();
  Rng rng(seed + 1);
  b.net = ActorCritic(state_dim(b.models, topology, dim_price), b.num_dcs, b.max_servers, spec, rng);
  return b;
}

Json to_json(const PolicyBundle& b) {
  return {{"format", "ecmws-policy"},
          {"version", 1},
          {"config", to_json(b.config)},
          {"dim_price", b.dim_price},
          {"num_dcs", b.num_dcs},
          {"max_servers", b.max_servers},
          {"encoder", b.spec.encoder},
          {"head_hidden", b.spec.head_hidden},
          {"task_model", save_params(b.models.task.params())},
          {"resource_model", save_params(b.models.resource.params())},
          {"policy", save_params(b.net.params())}};
}

PolicyBundle bundle_from_json(const Json& j, const Topology& topology) {
  if (j.value("format", "") != "ecmws-policy" || j.value("version", 0) != 1) {
    throw std::invalid_argument("not an ecmws-policy v1 checkpoint");
  }
  if (j.at("num_dcs").get<int>() != topology.num_dcs() ||
      j.at("max_servers").get<int>() != topology.max_servers_per_dc()) {
    throw std::invalid_argument("checkpoint was trained for a different topology shape");
  }
  ActorCriticSpec spec;
  spec.encoder = j.at("encoder").get<std::vector<int>>();
  spec.head_hidden = j.at("head_hidden").get<int>();
  PolicyBundle b = PolicyBundle::create(topology, config_from_json(j.at("config")), 0, spec,
                                        j.at("dim_price").get<int>());
  load_params(j.at("task_model"), b.models.task.params());
  load_params(j.at("resource_model"), b.models.resource.params());
  load_params(j.at("policy"), b.net.params());
  return b;
}

CcraChoice ccra(const PolicyBundle& bundle, double conf_thresh, const ScheduleState& state,
                const Workflow& workflow, const SubdeadlineTable& subdeadlines,
                const Decision& decision) {
  const auto& topo = state.topology();
  std::vector<int> spd;
  for (int k = 0; k < topo.num_dcs(); ++k) spd.push_back(topo.servers_in_dc(k));
  const Vector s = observe(bundle.models, bundle.config, state, workflow, subdeadlines,
                           decision.task, bundle.dim_price);
  const auto a = act(bundle.net, s, spd, nullptr);
  CcraChoice c;
  c.confidence = a.confidence;
  if (a.confidence >= conf_thresh) {
    c.server = topo.from_local_index(a.action.dc, a.action.server);
    c.from_policy = true;
  } else {
    c.server = dara(state, workflow, decision.task, decision.est_start, decision.subdeadline);
  }
  return c;
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "ecmws") return Algorithm::kEcmws;
  if (s == "dara") return Algorithm::kDara;
  if (s == "heft") return Algorithm::kHeft;
  if (s == "greedy") return Algorithm::kGreedy;
  throw std::invalid_argument("unknown algorithm: " + s);
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kEcmws: return "ecmws";
    case Algorithm::kDara: return "dara";
    case Algorithm::kHeft: return "heft";
    case Algorithm::kGreedy: return "greedy";
  }
  return "?";
}

RunResult run_algorithm(Algorithm algorithm, const EcmwsConfig& config, const Topology& topology,
                        const std::vector<Workflow>& workflows, const PolicyBundle* bundle) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto plan = plan_schedule(config, topology, workflows);
  ScheduleState state(topology, config.tau, config.t_term);
  RunResult r;
  r.algorithm = algorithm;

  if (algorithm == Algorithm::kEcmws || algorithm == Algorithm::kDara) {
    const PolicyBundle* policy = algorithm == Algorithm::kEcmws ? bundle : nullptr;
    for (const auto& d : plan.decisions) {
      state.set_now(d.clock);
      const auto& wf = workflows[d.workflow];
      ServerRef server;
      if (policy != nullptr) {
        const auto c = ccra(*policy, config.conf_thresh, state, wf, plan.subdeadlines[d.workflow], d);
        server = c.server;
        ++(c.from_policy ? r.policy_decisions : r.reserve_decisions);
      } else {
        server = dara(state, wf, d.task, d.est_start, d.subdeadline);
        ++r.reserve_decisions;
      }
      state.place_task(wf, d.task, server);
    }
  } else {
    // Baselines take each slot's arrivals as one batch, in scheduling order.
    std::size_t pos = 0;
    while (pos < plan.accepted.size()) {
      const double clock = plan.slot_end[plan.accepted[pos]];
      std::vector<BatchItem> batch;
      for (; pos < plan.accepted.size() && plan.slot_end[plan.accepted[pos]] == clock; ++pos) {
        const std::size_t w = plan.accepted[pos];
        batch.push_back({&workflows[w], &plan.estimates[w]});
      }
      state.set_now(clock);
      if (algorithm == Algorithm::kHeft) {
        heft_batch(batch, state);
      } else {
        greedy_cheapest(batch, state);
      }
    }
  }

  r.log = state.log();
  r.z = state.total_cost();
  std::vector<Workflow> accepted;
  for (std::size_t w : plan.accepted) accepted.push_back(workflows[w]);
  r.feasibility = feasibility_report(state, accepted);
  for (std::size_t w : plan.rejected) r.rejected.push_back(workflows[w].id());
  r.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

GraphCorpus collect_graphs(const EcmwsConfig& config, const Topology& topology,
                           const std::vector<Workflow>& workflows, int stride) {
  if (stride < 1) throw std::invalid_argument("stride must be positive");
  const auto plan = plan_schedule(config, topology, workflows);
  ScheduleState state(topology, config.tau, config.t_term);
  GraphCorpus corpus;
  int count = 0;
  for (const auto& d : plan.decisions) {
    state.set_now(d.clock);
    const auto& wf = workflows[d.workflow];
    if (count++ % stride == 0) {
      corpus.task.push_back(build_task_graph(wf, plan.subdeadlines[d.workflow], state, d.task));
      corpus.resource.push_back(build_resource_graph(state));
    }
    state.place_task(wf, d.task, dara(state, wf, d.task, d.est_start, d.subdeadline));
  }
  return corpus;
}

Json to_json(const EmbedModels& models) {
  return {{"format", "ecmws-embed"},
          {"version", 1},
          {"task_model", save_params(models.task.params())},
          {"resource_model", save_params(models.resource.params())}};
}

EmbedModels embed_models_from_json(const Json& j) {
  if (j.value("format", "") != "ecmws-embed") throw std::runtime_error("not an embedding checkpoint");
  EmbedModels m = EmbedModels::create(0);
  load_params(j.at("task_model"), m.task.params());
  load_params(j.at("resource_model"), m.resource.params());
  return m;
}

Json run_manifest(const RunResult& result, const EcmwsConfig& config,
                  const std::vector<Workflow>& workflows) {
  Json per = Json::array();
  for (const auto& e : result.feasibility) {
    per.push_back({{"workflow", e.workflow}, {"finish", e.finish}, {"deadline", e.deadline},
                   {"met", e.met}});
  }
  return {{"algorithm", to_string(result.algorithm)},
          {"config", to_json(config)},
          {"workflows", workflows.size()},
          {"z", result.z},
          {"deadline_misses", deadline_misses(result.feasibility)},
          {"rejected", result.rejected},
          {"policy_decisions", result.policy_decisions},
          {"reserve_decisions", result.reserve_decisions},
          {"runtime_seconds", result.runtime_seconds},
          {"per_workflow", per}};
}

}  // namespace ecmws
