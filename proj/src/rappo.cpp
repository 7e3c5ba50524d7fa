#include "ecmws/rappo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ecmws {

EmbedModels EmbedModels::create(std::uint64_t seed) {
  Rng rng(seed);
  EmbedModels m;
  m.task = GraphAutoencoder("task", kTaskFeatures, EmbedSpec::task_default(), rng);
  m.resource = GraphAutoencoder("resource", kResourceFeatures, EmbedSpec::resource_default(), rng);
  return m;
}

Vector price_state(const Topology& topology, double now, int dim_price) {
  if (dim_price <= 0) throw std::invalid_argument("price horizon must be positive");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& dc : topology.datacenters()) {
    lo = std::min(lo, dc.price.min());
    hi = std::max(hi, dc.price.max());
  }
  Vector out(topology.num_dcs() * dim_price);
  for (int k = 0; k < topology.num_dcs(); ++k) {
    const auto& price = topology.dc(k).price;
    for (int h = 0; h < dim_price; ++h) {
      const double begin = now + h * kSecondsPerHour;
      // Integral of a 1 kW load over one hour equals the mean hourly price.
      const double mean = cost_integral(1000.0, price, begin, begin + kSecondsPerHour);
      out(k * dim_price + h) = hi > lo ? (mean - lo) / (hi - lo) : 0.0;
    }
  }
  return out;
}

Vector param_state(const EcmwsConfig& config) {
  Vector v = Vector::Zero(kParamDim);
  v(0) = config.weights.slack;
  v(1) = config.weights.workload;
  v(2) = config.weights.contention;
  v(3) = config.beta;
  v(3 + static_cast<int>(config.strategy)) = 1.0;
  return v;
}

int state_dim(const EmbedModels& models, const Topology& topology, int dim_price) {
  return models.task.embedding_dim() + resource_embedding_size(models.resource, topology) +
         topology.num_dcs() * dim_price + kParamDim;
}

Vector assemble_state(const Vector& task, const Vector& server, const Vector& price,
                      const Vector& params) {
  if (params.size() != kParamDim) throw std::invalid_argument("parameter block must have 7 entries");
  Vector s(task.size() + server.size() + price.size() + params.size());
  s << task, server, price, params;
  return s;
}

Vector observe(const EmbedModels& models, const EcmwsConfig& config, const ScheduleState& state,
               const Workflow& workflow, const SubdeadlineTable& subdeadlines, int task,
               int dim_price) {
  const auto& topo = state.topology();
  const Vector s_task = embed_task(models.task, build_task_graph(workflow, subdeadlines, state, task));
  const Vector s_server = embed_resources(models.resource, build_resource_graph(state), topo);
  return assemble_state(s_task, s_server, price_state(topo, state.now(), dim_price),
                        param_state(config));
}

ActorCritic::ActorCritic(int state_dim, int num_dcs, int max_servers, const ActorCriticSpec& spec,
                         Rng& rng)
    : num_dcs_(num_dcs), max_servers_(max_servers) {
  if (state_dim <= 0 || num_dcs <= 0 || max_servers <= 0) {
    throw std::invalid_argument("network dimensions must be positive");
  }
  MlpSpec enc{spec.encoder, std::vector<Activation>(spec.encoder.size(), Activation::kTanh)};
  encoder_ = Mlp("encoder", state_dim, enc, rng);
  const int width = encoder_.out();
  actor_ = Mlp("actor", width,
               {{spec.head_hidden, num_dcs + max_servers}, {Activation::kTanh, Activation::kIdentity}},
               rng);
  critic_ = Mlp("critic", width, {{spec.head_hidden, 1}, {Activation::kTanh, Activation::kIdentity}},
                rng);
}

void ActorCritic::forward(const Matrix& states, Matrix& logits, Vector& values) const {
  const Matrix h = encoder_.forward(states);
  logits = actor_.forward(h);
  values = critic_.forward(h).col(0);
}

void ActorCritic::forward(const Matrix& states, Matrix& logits, Vector& values,
                          Cache& cache) const {
  const Matrix h = encoder_.forward(states, cache.encoder);
  logits = actor_.forward(h, cache.actor);
  values = critic_.forward(h, cache.critic).col(0);
}

void ActorCritic::backward(const Matrix& dlogits, const Vector& dvalues, const Cache& cache) {
  Matrix dh = actor_.backward(dlogits, cache.actor);
  dh += critic_.backward(Matrix(dvalues), cache.critic);
  encoder_.backward(dh, cache.encoder);
}

std::vector<Tensor*> ActorCritic::params() {
  std::vector<Tensor*> out;
  for (auto* m : {&encoder_, &actor_, &critic_}) {
    for (auto* p : m->params()) out.push_back(p);
  }
  return out;
}

std::vector<const Tensor*> ActorCritic::params() const {
  std::vector<const Tensor*> out;
  for (const auto* m : {&encoder_, &actor_, &critic_}) {
    for (const auto* p : m->params()) out.push_back(p);
  }
  return out;
}

std::vector<int> server_mask(int servers_in_dc, int max_servers) {
  if (servers_in_dc <= 0 || servers_in_dc > max_servers) {
    throw std::invalid_argument("DC server count outside [1, omega_max]");
  }
  std::vector<int> mask(static_cast<std::size_t>(max_servers), 0);
  std::fill(mask.begin(), mask.begin() + servers_in_dc, 1);
  return mask;
}

namespace {

int pick(const Vector& probs, Rng* rng) {
  if (rng == nullptr) {
    Eigen::Index best = 0;
    probs.maxCoeff(&best);
    return static_cast<int>(best);
  }
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(*rng);
  double acc = 0.0;
  int last = 0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (probs(i) <= 0.0) continue;
    acc += probs(i);
    last = static_cast<int>(i);
    if (u < acc) return last;
  }
  return last;
}

}  // namespace

ActResult act(const ActorCritic& net, const Vector& state, const std::vector<int>& servers_per_dc,
              Rng* rng) {
  const int m = net.num_dcs();
  const int w = net.max_servers();
  if (static_cast<int>(servers_per_dc.size()) != m) throw std::invalid_argument("DC count mismatch");
  Matrix logits;
  Vector values;
  net.forward(state.transpose(), logits, values);
  const Vector z = logits.row(0).transpose();
  const Vector dc_logp = masked_log_softmax(z.head(m), std::vector<int>(static_cast<std::size_t>(m), 1));
  const Vector dc_p = dc_logp.array().exp();
  ActResult r;
  r.action.dc = pick(dc_p, rng);
  const auto mask = server_mask(servers_per_dc[static_cast<std::size_t>(r.action.dc)], w);
  const Vector srv_logp = masked_log_softmax(z.tail(w), mask);
  const Vector srv_p = masked_softmax(z.tail(w), mask);
  r.action.server = pick(srv_p, rng);
  r.logprob = dc_logp(r.action.dc) + srv_logp(r.action.server);
  r.value = values(0);
  r.confidence = dc_p.maxCoeff() * srv_p.maxCoeff();
  return r;
}

double reward(const Assignment& a, double subdeadline) {
  const double duration = a.finish - a.start;
  const double overshoot = duration > 0.0 ? std::max(0.0, (a.finish - subdeadline) / duration) : 0.0;
  return -a.cost * (1.0 + overshoot);
}

std::vector<double> gae(const std::vector<double>& rewards, const std::vector<double>& values,
                        const std::vector<int>& dones, double last_value, double gamma,
                        double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) throw std::invalid_argument("trace length mismatch");
  std::vector<double> adv(n, 0.0);
  double running = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double next_value = dones[t] ? 0.0 : (t + 1 < n ? values[t + 1] : last_value);
    const double delta = rewards[t] + gamma * next_value - values[t];
    running = delta + (dones[t] ? 0.0 : gamma * lambda * running);
    adv[t] = running;
  }
  return adv;
}

std::vector<double> discounted_returns(const std::vector<double>& rewards,
                                       const std::vector<int>& dones, double last_value,
                                       double gamma) {
  const std::size_t n = rewards.size();
  if (dones.size() != n) throw std::invalid_argument("trace length mismatch");
  std::vector<double> g(n, 0.0);
  double running = last_value;
  for (std::size_t t = n; t-- > 0;) {
    running = rewards[t] + (dones[t] ? 0.0 : gamma * running);
    g[t] = running;
  }
  return g;
}

PpoLoss ppo_loss(ActorCritic& net, const PpoBatch& batch, const std::vector<int>& servers_per_dc,
                 const PpoHyper& hyper, bool accumulate_grad) {
  const int m = net.num_dcs();
  const int w = net.max_servers();
  const auto b = static_cast<Eigen::Index>(batch.actions.size());
  if (b == 0 || batch.states.rows() != b || batch.old_logprob.size() != b ||
      batch.advantages.size() != b || batch.returns.size() != b) {
    throw std::invalid_argument("inconsistent PPO batch");
  }
  std::vector<std::vector<int>> masks;
  for (int k = 0; k < m; ++k) masks.push_back(server_mask(servers_per_dc[static_cast<std::size_t>(k)], w));

  ActorCritic::Cache cache;
  Matrix logits;
  Vector values;
  net.forward(batch.states, logits, values, cache);

  const double inv_b = 1.0 / static_cast<double>(b);
  Matrix dlogits = Matrix::Zero(b, m + w);
  Vector dvalues = Vector::Zero(b);
  PpoLoss out;
  int clipped = 0;
  const std::vector<int> all_dc(static_cast<std::size_t>(m), 1);
  for (Eigen::Index i = 0; i < b; ++i) {
    const Vector z = logits.row(i).transpose();
    const Vector dc_logp = masked_log_softmax(z.head(m), all_dc);
    const Vector p = dc_logp.array().exp();
    const auto& act = batch.actions[static_cast<std::size_t>(i)];

    // Per-DC server distributions and their entropies.
    std::vector<Vector> q_logp(static_cast<std::size_t>(m));
    Vector h_srv(m);
    for (int k = 0; k < m; ++k) {
      q_logp[static_cast<std::size_t>(k)] = masked_log_softmax(z.tail(w), masks[static_cast<std::size_t>(k)]);
      double h = 0.0;
      for (int s = 0; s < w; ++s) {
        if (!masks[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)]) continue;
        const double ls = q_logp[static_cast<std::size_t>(k)](s);
        h -= std::exp(ls) * ls;
      }
      h_srv(k) = h;
    }
    double h_dc = 0.0;
    for (int k = 0; k < m; ++k) h_dc -= p(k) * dc_logp(k);
    const double mixed = p.dot(h_srv);
    out.entropy += (h_dc + mixed) * inv_b;

    const auto& qa_logp = q_logp[static_cast<std::size_t>(act.dc)];
    const double logp = dc_logp(act.dc) + qa_logp(act.server);
    const double ratio = std::exp(logp - batch.old_logprob(i));
    const double adv = batch.advantages(i);
    const double clipped_ratio = std::clamp(ratio, 1.0 - hyper.clip, 1.0 + hyper.clip);
    const double surr1 = ratio * adv;
    const double surr2 = clipped_ratio * adv;
    out.policy += std::min(surr1, surr2) * inv_b;
    if (std::abs(ratio - 1.0) > hyper.clip) ++clipped;

    const double err = values(i) - batch.returns(i);
    out.value += err * err * inv_b;

    if (!accumulate_grad) continue;
    // Policy term: d(-surrogate)/d logp.
    const double g_logp = surr1 <= surr2 ? -ratio * adv * inv_b : 0.0;
    for (int k = 0; k < m; ++k) dlogits(i, k) += g_logp * ((k == act.dc ? 1.0 : 0.0) - p(k));
    for (int s = 0; s < w; ++s) {
      const double q = masks[static_cast<std::size_t>(act.dc)][static_cast<std::size_t>(s)]
                           ? std::exp(qa_logp(s)) : 0.0;
      dlogits(i, m + s) += g_logp * ((s == act.server ? 1.0 : 0.0) - q);
    }
    // Entropy term: d(-ent_coef * H)/dz.
    const double g_h = -hyper.ent_coef * inv_b;
    for (int k = 0; k < m; ++k) {
      const double dh = -p(k) * (dc_logp(k) + h_dc) + p(k) * (h_srv(k) - mixed);
      dlogits(i, k) += g_h * dh;
    }
    for (int k = 0; k < m; ++k) {
      const auto& mask = masks[static_cast<std::size_t>(k)];
      const auto& lq = q_logp[static_cast<std::size_t>(k)];
      for (int s = 0; s < w; ++s) {
        if (!mask[static_cast<std::size_t>(s)]) continue;
        const double q = std::exp(lq(s));
        dlogits(i, m + s) += g_h * p(k) * (-q * (lq(s) + h_srv(k)));
      }
    }
    dvalues(i) = hyper.vf_coef * 2.0 * err * inv_b;
  }
  out.total = -out.policy + hyper.vf_coef * out.value - hyper.ent_coef * out.entropy;
  out.clip_fraction = static_cast<double>(clipped) * inv_b;
  if (!std::isfinite(out.total)) {
    char buf[200];
    std::snprintf(buf, sizeof(buf), "non-finite PPO loss (policy %g, value %g, entropy %g)",
                  out.policy, out.value, out.entropy);
    throw std::runtime_error(buf);
  }
  if (accumulate_grad) net.backward(dlogits, dvalues, cache);
  return out;
}

SchedulingEnv::SchedulingEnv(const Topology& topology, const EcmwsConfig& config,
                             std::vector<std::vector<Workflow>> pool, const EmbedModels& models,
                             int dim_price)
    : topology_(&topology), config_(config), pool_(std::move(pool)), models_(&models),
      dim_price_(dim_price) {
  if (pool_.empty()) throw std::invalid_argument("environment needs at least one instance");
  for (int k = 0; k < topology.num_dcs(); ++k) servers_per_dc_.push_back(topology.servers_in_dc(k));
  for (const auto& inst : pool_) {
    const auto n = plan_schedule(config_, topology, inst).decisions.size();
    if (n == 0) throw std::invalid_argument("instance has no schedulable task");
    episode_length_.push_back(n);
  }
}

int SchedulingEnv::state_dim() const { return ecmws::state_dim(*models_, *topology_, dim_price_); }

double SchedulingEnv::mean_episode_length() const {
  const double total = static_cast<double>(
      std::accumulate(episode_length_.begin(), episode_length_.end(), std::size_t{0}));
  return total / static_cast<double>(episode_length_.size());
}

Vector SchedulingEnv::reset(std::size_t instance) {
  instance_ = instance % pool_.size();
  plan_ = plan_schedule(config_, *topology_, pool_[instance_]);
  state_.emplace(*topology_, config_.tau, config_.t_term);
  cursor_ = 0;
  state_->set_now(current().clock);
  return observation();
}

Vector SchedulingEnv::observation() const {
  const auto& d = current();
  return observe(*models_, config_, *state_, pool_[instance_][d.workflow],
                 plan_.subdeadlines[d.workflow], d.task, dim_price_);
}

SchedulingEnv::StepResult SchedulingEnv::step(const Action& action) {
  if (done()) throw std::logic_error("episode already finished");
  if (action.dc < 0 || action.dc >= topology_->num_dcs() || action.server < 0 ||
      action.server >= servers_per_dc_[static_cast<std::size_t>(action.dc)]) {
    throw std::out_of_range("action outside the masked action space");
  }
  const auto& d = current();
  const auto ref = topology_->from_local_index(action.dc, action.server);
  StepResult r;
  r.assignment = state_->place_task(pool_[instance_][d.workflow], d.task, ref);
  r.reward = reward(r.assignment, d.subdeadline);
  ++cursor_;
  r.done = done();
  if (!r.done) state_->set_now(current().clock);
  return r;
}

std::vector<IterationStats> rappo_train(
    SchedulingEnv& env, ActorCritic& net, const RappoOptions& options,
    const std::function<void(const IterationStats&)>& on_iteration) {
  if (options.iterations < 0 || options.steps <= 0 || options.epochs <= 0 ||
      options.minibatches <= 0 || options.minibatches > options.steps) {
    throw std::invalid_argument("bad training options");
  }
  if (net.state_dim() != env.state_dim()) throw std::invalid_argument("network/state size mismatch");
  Rng rng(options.seed);
  Adam::Options adam_opts;
  adam_opts.lr = options.lr;
  Adam adam(net.params(), adam_opts);
  const auto& spd = env.servers_per_dc();
  const auto steps = static_cast<std::size_t>(options.steps);

  std::size_t instance = 0;
  Vector obs = env.reset(instance);
  double scale = 0.0;
  std::vector<IterationStats> log;
  for (int it = 1; it <= options.iterations; ++it) {
    Matrix states(static_cast<Eigen::Index>(steps), net.state_dim());
    std::vector<Action> actions(steps);
    std::vector<double> logps(steps);
    std::vector<double> rewards(steps);
    std::vector<double> values(steps);
    std::vector<int> dones(steps);
    IterationStats stats;
    stats.iteration = it;
    for (std::size_t t = 0; t < steps; ++t) {
      const auto a = act(net, obs, spd, &rng);
      states.row(static_cast<Eigen::Index>(t)) = obs.transpose();
      actions[t] = a.action;
      logps[t] = a.logprob;
      values[t] = a.value;
      const auto sr = env.step(a.action);
      rewards[t] = sr.reward;
      dones[t] = sr.done ? 1 : 0;
      if (sr.done) {
        ++stats.episodes_finished;
        obs = env.reset(++instance);
      } else {
        obs = env.observation();
      }
    }
    double last_value = 0.0;
    if (!dones.back()) {
      Matrix logits;
      Vector v;
      net.forward(obs.transpose(), logits, v);
      last_value = v(0);
    }
    const double mean_abs =
        std::accumulate(rewards.begin(), rewards.end(), 0.0,
                        [](double acc, double r) { return acc + std::abs(r); }) /
        static_cast<double>(steps);
    if (scale == 0.0) scale = mean_abs > 0.0 ? 1.0 / mean_abs : 1.0;
    std::vector<double> scaled(steps);
    for (std::size_t t = 0; t < steps; ++t) scaled[t] = rewards[t] * scale;
    const auto adv = gae(scaled, values, dones, last_value, options.gamma, options.lambda);

    const std::size_t mb_count = static_cast<std::size_t>(options.minibatches);
    int updates = 0;
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
      for (std::size_t mb = 0; mb < mb_count; ++mb) {
        const std::size_t begin = mb * steps / mb_count;
        const std::size_t end = (mb + 1) * steps / mb_count;
        const auto len = static_cast<Eigen::Index>(end - begin);
        PpoBatch batch;
        batch.states = states.middleRows(static_cast<Eigen::Index>(begin), len);
        batch.actions.assign(actions.begin() + static_cast<std::ptrdiff_t>(begin),
                             actions.begin() + static_cast<std::ptrdiff_t>(end));
        batch.old_logprob.resize(len);
        batch.advantages.resize(len);
        batch.returns.resize(len);
        for (Eigen::Index i = 0; i < len; ++i) {
          const std::size_t t = begin + static_cast<std::size_t>(i);
          batch.old_logprob(i) = logps[t];
          batch.advantages(i) = adv[t];
          batch.returns(i) = adv[t] + values[t];
        }
        if (options.normalize_advantages && len > 1) {
          const double mean = batch.advantages.mean();
          const double sd = std::sqrt((batch.advantages.array() - mean).square().mean());
          batch.advantages = (batch.advantages.array() - mean) / (sd + 1e-8);
        }
        adam.zero_grad();
        const auto loss = ppo_loss(net, batch, spd, options.hyper, true);
        adam.step();
        stats.policy_loss += loss.policy;
        stats.value_loss += loss.value;
        stats.entropy += loss.entropy;
        ++updates;
      }
    }
    stats.policy_loss /= updates;
    stats.value_loss /= updates;
    stats.entropy /= updates;
    stats.mean_reward = std::accumulate(rewards.begin(), rewards.end(), 0.0) / static_cast<double>(steps);
    stats.episode_reward = stats.mean_reward * env.mean_episode_length();
    stats.reward_scale = scale;
    log.push_back(stats);
    if (on_iteration) on_iteration(stats);
  }
  return log;
}

void write_training_log(std::ostream& out, const std::vector<IterationStats>& log) {
  out << "iter,mean_reward,episode_reward,policy_loss,value_loss,entropy\n";
  char buf[256];
  for (const auto& s : log) {
    std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g,%.10g,%.10g\n", s.iteration,
                  s.mean_reward, s.episode_reward, s.policy_loss, s.value_loss, s.entropy);
    out << buf;
  }
}

}  // namespace ecmws
