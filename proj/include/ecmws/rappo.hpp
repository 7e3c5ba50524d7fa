// Scheduling MDP, actor-critic network with factored masked actions, GAE and
// the clipped-surrogate training loop.

#ifndef ECMWS_RAPPO_HPP_
#define ECMWS_RAPPO_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "ecmws/engine.hpp"
#include "ecmws/graph_embed.hpp"
#include "ecmws/nn.hpp"
#include "ecmws/planner.hpp"

namespace ecmws {

inline constexpr int kDimPrice = 24;
inline constexpr int kParamDim = 7;

struct EmbedModels {
  GraphAutoencoder task;
  GraphAutoencoder resource;

  static EmbedModels create(std::uint64_t seed);
};

// Per DC, the mean price of each of the next `dim_price` hours starting at
// `now`, min-max scaled by the lowest and highest hourly price of any DC.
Vector price_state(const Topology& topology, double now, int dim_price = kDimPrice);
// [alpha1, alpha2, alpha3, beta, one-hot task sorting]
Vector param_state(const EcmwsConfig& config);
int state_dim(const EmbedModels& models, const Topology& topology, int dim_price = kDimPrice);
Vector assemble_state(const Vector& task, const Vector& server, const Vector& price,
                      const Vector& params);
Vector observe(const EmbedModels& models, const EcmwsConfig& config, const ScheduleState& state,
               const Workflow& workflow, const SubdeadlineTable& subdeadlines, int task,
               int dim_price = kDimPrice);

struct ActorCriticSpec {
  std::vector<int> encoder{512, 256};
  int head_hidden = 128;
};

// Shared tanh encoder feeding an actor head (DC logits then server logits)
// and a scalar critic head.
class ActorCritic {
 public:
  struct Cache {
    Mlp::Cache encoder;
    Mlp::Cache actor;
    Mlp::Cache critic;
  };

  ActorCritic() = default;
  ActorCritic(int state_dim, int num_dcs, int max_servers, const ActorCriticSpec& spec, Rng& rng);

  int state_dim() const { return encoder_.in(); }
  int num_dcs() const { return num_dcs_; }
  int max_servers() const { return max_servers_; }
  int action_dim() const { return num_dcs_ + max_servers_; }

  // One state per row; logits are B x action_dim, values B.
  void forward(const Matrix& states, Matrix& logits, Vector& values) const;
  void forward(const Matrix& states, Matrix& logits, Vector& values, Cache& cache) const;
  void backward(const Matrix& dlogits, const Vector& dvalues, const Cache& cache);

  std::vector<Tensor*> params();
  std::vector<const Tensor*> params() const;

 private:
  Mlp encoder_;
  Mlp actor_;
  Mlp critic_;
  int num_dcs_ = 0;
  int max_servers_ = 0;
};

struct Action {
  int dc = 0;
  int server = 0;  // index inside the DC, clusters then servers
};

// omega^k ones followed by zeros up to omega_max.
std::vector<int> server_mask(int servers_in_dc, int max_servers);

struct ActResult {
  Action action;
  double logprob = 0.0;
  double value = 0.0;
  double confidence = 0.0;  // product of the two head maxima
};

// Samples both heads with `rng`, or takes the argmax of each when rng is null.
ActResult act(const ActorCritic& net, const Vector& state, const std::vector<int>& servers_per_dc,
              Rng* rng);

// -C (1 + max(0, (T_F - d) / (T_F - T_B))); zero-length runs carry no
// overshoot term.
double reward(const Assignment& assignment, double subdeadline);

// done[t] marks the last step of an episode; `last_value` bootstraps a
// truncated final step.
std::vector<double> gae(const std::vector<double>& rewards, const std::vector<double>& values,
                        const std::vector<int>& dones, double last_value, double gamma,
                        double lambda);
std::vector<double> discounted_returns(const std::vector<double>& rewards,
                                       const std::vector<int>& dones, double last_value,
                                       double gamma);

struct PpoHyper {
  double clip = 0.1;
  double vf_coef = 0.5;
  double ent_coef = 0.01;
};

struct PpoBatch {
  Matrix states;
  std::vector<Action> actions;
  Vector old_logprob;
  Vector advantages;
  Vector returns;
};

struct PpoLoss {
  double total = 0.0;
  double policy = 0.0;   // clipped surrogate, maximized
  double value = 0.0;    // mean squared error
  double entropy = 0.0;  // mean joint entropy
  double clip_fraction = 0.0;
};

// total = -policy + vf_coef * value - ent_coef * entropy. With
// accumulate_grad the gradients of total are added to the network.
PpoLoss ppo_loss(ActorCritic& net, const PpoBatch& batch,
                 const std::vector<int>& servers_per_dc, const PpoHyper& hyper,
                 bool accumulate_grad);

class SchedulingEnv {
 public:
  struct StepResult {
    double reward = 0.0;
    bool done = false;
    Assignment assignment;
  };

  SchedulingEnv(const Topology& topology, const EcmwsConfig& config,
                std::vector<std::vector<Workflow>> pool, const EmbedModels& models,
                int dim_price = kDimPrice);

  int state_dim() const;
  std::size_t pool_size() const { return pool_.size(); }
  const std::vector<int>& servers_per_dc() const { return servers_per_dc_; }
  const Topology& topology() const { return *topology_; }
  // Mean number of decisions per episode over the pool.
  double mean_episode_length() const;

  Vector reset(std::size_t instance);
  Vector observation() const;
  StepResult step(const Action& action);
  bool done() const { return cursor_ >= plan_.decisions.size(); }
  const ScheduleState& schedule() const { return *state_; }
  const Decision& current() const { return plan_.decisions.at(cursor_); }

 private:
  const Topology* topology_;
  EcmwsConfig config_;
  std::vector<std::vector<Workflow>> pool_;
  std::vector<std::size_t> episode_length_;
  const EmbedModels* models_;
  int dim_price_;
  std::vector<int> servers_per_dc_;
  std::size_t instance_ = 0;
  SchedulePlan plan_;
  std::optional<ScheduleState> state_;
  std::size_t cursor_ = 0;
};

struct RappoOptions {
  int iterations = 100;
  int steps = 256;
  int epochs = 100;
  int minibatches = 4;
  PpoHyper hyper;
  double gamma = 0.99;
  double lambda = 0.95;
  double lr = 3e-4;
  std::uint64_t seed = 1;
  bool normalize_advantages = true;
};

struct IterationStats {
  int iteration = 0;
  double mean_reward = 0.0;      // raw per-step reward
  double episode_reward = 0.0;   // mean_reward x mean episode length
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double reward_scale = 1.0;
  int episodes_finished = 0;
};

// Rewards are multiplied by a scale fixed from the first batch (inverse mean
// magnitude) before advantages are computed.
std::vector<IterationStats> rappo_train(
    SchedulingEnv& env, ActorCritic& net, const RappoOptions& options,
    const std::function<void(const IterationStats&)>& on_iteration = {});

// Columns: iter,mean_reward,episode_reward,policy_loss,value_loss,entropy
void write_training_log(std::ostream& out, const std::vector<IterationStats>& log);

}  // namespace ecmws

#endif  // ECMWS_RAPPO_HPP_
