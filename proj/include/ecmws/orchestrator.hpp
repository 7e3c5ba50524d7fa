// Confidence-gated allocation and the slot loop that drives every algorithm.

#ifndef ECMWS_ORCHESTRATOR_HPP_
#define ECMWS_ORCHESTRATOR_HPP_

#include <optional>
#include <string>
#include <vector>

#include "ecmws/engine.hpp"
#include "ecmws/planner.hpp"
#include "ecmws/rappo.hpp"

namespace ecmws {

// Everything needed to run the learned allocator: both embedding models, the
// actor-critic and the algorithm parameters it was trained with.
struct PolicyBundle {
  EmbedModels models;
  ActorCritic net;
  EcmwsConfig config;
  ActorCriticSpec spec;
  int dim_price = kDimPrice;
  int num_dcs = 0;
  int max_servers = 0;

  // Fresh, untrained bundle sized for `topology`.
  static PolicyBundle create(const Topology& topology, const EcmwsConfig& config,
                             std::uint64_t seed, const ActorCriticSpec& spec = {},
                             int dim_price = kDimPrice);
};

Json to_json(const PolicyBundle& bundle);
// Throws when the checkpoint does not fit the topology.
PolicyBundle bundle_from_json(const Json& j, const Topology& topology);

struct CcraChoice {
  ServerRef server;
  bool from_policy = false;
  double confidence = 0.0;
};

// The greedy policy action when its confidence reaches the threshold,
// otherwise the reserve allocator.
CcraChoice ccra(const PolicyBundle& bundle, double conf_thresh, const ScheduleState& state,
                const Workflow& workflow, const SubdeadlineTable& subdeadlines,
                const Decision& decision);

enum class Algorithm { kEcmws, kDara, kHeft, kGreedy };

Algorithm algorithm_from_string(const std::string& s);
std::string to_string(Algorithm a);

struct RunResult {
  Algorithm algorithm = Algorithm::kEcmws;
  double z = 0.0;
  std::vector<Assignment> log;
  std::vector<FeasibilityEntry> feasibility;
  std::vector<int> rejected;  // workflow ids submitted at or after T_term
  int policy_decisions = 0;
  int reserve_decisions = 0;
  double runtime_seconds = 0.0;
};

// kEcmws without a bundle runs the reserve allocator alone, which equals a
// threshold of 1 for any non-degenerate policy.
RunResult run_algorithm(Algorithm algorithm, const EcmwsConfig& config, const Topology& topology,
                        const std::vector<Workflow>& workflows,
                        const PolicyBundle* bundle = nullptr);

// Embedding training data: the task and resource graphs seen before every
// `stride`-th placement of a reserve-allocator run.
struct GraphCorpus {
  std::vector<Graph> task;
  std::vector<Graph> resource;
};

GraphCorpus collect_graphs(const EcmwsConfig& config, const Topology& topology,
                           const std::vector<Workflow>& workflows, int stride = 1);

Json to_json(const EmbedModels& models);
EmbedModels embed_models_from_json(const Json& j);

Json run_manifest(const RunResult& result, const EcmwsConfig& config,
                  const std::vector<Workflow>& workflows);

}  // namespace ecmws

#endif  // ECMWS_ORCHESTRATOR_HPP_
