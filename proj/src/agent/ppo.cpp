#include "petrihh/agent/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

namespace petrihh::agent {

namespace {

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v); });
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

Environment::Outcome SchedulingEnvAdapter::step(int action) {
  env::StepResult r = env_.step(action);
  return Outcome{std::move(r.observation), r.reward, r.done,
                 r.info.decisions_made};
}

void PpoConfig::validate() const {
  const auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(gamma >= 0.0 && gamma <= 1.0, "gamma must lie in [0, 1]");
  require(gae_lambda >= 0.0 && gae_lambda <= 1.0, "lambda must lie in [0, 1]");
  require(clip_epsilon > 0.0, "clip epsilon must be positive");
  require(learning_rate > 0.0, "learning rate must be positive");
  require(rollout_decisions >= 1, "rollout length must be >= 1");
  require(epochs >= 1, "epochs must be >= 1");
  require(minibatch_size >= 1, "minibatch size must be >= 1");
  require(total_decisions >= 1, "training budget must be >= 1");
  require(!hidden.empty(), "need at least one hidden layer");
}

Advantage compute_gae(std::span<const double> rewards,
                      std::span<const double> values,
                      std::span<const std::uint8_t> dones, double gamma,
                      double lambda, double last_value) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) {
    throw std::invalid_argument("GAE inputs have mismatched lengths");
  }
  Advantage out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double running = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double next_value = t + 1 < n ? values[t + 1] : last_value;
    const double live = dones[t] ? 0.0 : 1.0;
    const double delta = rewards[t] + gamma * next_value * live - values[t];
    running = delta + gamma * lambda * live * running;
    out.advantages[t] = running;
    out.returns[t] = running + values[t];
  }
  return out;
}

void normalize(std::span<double> values) {
  if (values.size() < 2) return;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double std = std::sqrt(var / n);
  for (double& v : values) v = (v - mean) / (std + 1e-8);
}

LossOutput ppo_loss(const PolicyParams& params, std::span<const Sample> batch,
                    const PpoConfig& config) {
  if (batch.empty()) throw std::invalid_argument("empty PPO batch");
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const double eps = config.clip_epsilon;

  LossOutput out;
  out.gradient.actor.assign(params.actor.param_count(), 0.0);
  out.gradient.critic.assign(params.critic.param_count(), 0.0);

  Mlp::Cache actor_cache;
  Mlp::Cache critic_cache;
  std::vector<double> grad_logits;
  int clipped = 0;
  for (const Sample& s : batch) {
    params.actor.forward(s.observation, actor_cache);
    const Distribution dist =
        masked_softmax(actor_cache.activations.back(), s.mask);
    if (s.action < 0 || s.action >= params.action_count() || !s.mask[s.action]) {
      throw std::invalid_argument("PPO sample holds a masked action");
    }
    const double log_prob = dist.log_probs[s.action];
    const double ratio = std::exp(log_prob - s.old_log_prob);
    const double unclipped = ratio * s.advantage;
    const double clipped_term = std::clamp(ratio, 1.0 - eps, 1.0 + eps) * s.advantage;
    out.policy_loss -= std::min(unclipped, clipped_term) * inv_b;
    if (std::abs(ratio - 1.0) > eps) ++clipped;
    out.approx_kl += ((ratio - 1.0) - (log_prob - s.old_log_prob)) * inv_b;
    const double entropy = dist.entropy();
    out.entropy += entropy * inv_b;

    grad_logits.assign(dist.probs.size(), 0.0);
    if (unclipped <= clipped_term) {
      const double coef = -s.advantage * ratio * inv_b;
      for (std::size_t i = 0; i < dist.probs.size(); ++i) {
        if (!s.mask[i]) continue;
        grad_logits[i] +=
            coef * ((static_cast<int>(i) == s.action ? 1.0 : 0.0) - dist.probs[i]);
      }
    }
    if (config.entropy_coef != 0.0) {
      const double coef = config.entropy_coef * inv_b;
      for (std::size_t i = 0; i < dist.probs.size(); ++i) {
        if (!s.mask[i] || dist.probs[i] <= 0.0) continue;
        grad_logits[i] += coef * dist.probs[i] * (dist.log_probs[i] + entropy);
      }
    }
    params.actor.backward(actor_cache, grad_logits, out.gradient.actor);

    params.critic.forward(s.observation, critic_cache);
    const double error = critic_cache.activations.back()[0] - s.return_target;
    out.value_loss += error * error * inv_b;
    const double grad_value = config.value_coef * 2.0 * error * inv_b;
    params.critic.backward(critic_cache, std::span<const double>(&grad_value, 1),
                           out.gradient.critic);
  }
  out.clip_fraction = static_cast<double>(clipped) * inv_b;
  out.loss = out.policy_loss + config.value_coef * out.value_loss -
             config.entropy_coef * out.entropy;
  if (!std::isfinite(out.loss)) {
    throw DivergenceError("PPO loss is not finite (policy " +
                          fmt(out.policy_loss) + ", value " +
                          fmt(out.value_loss) + ", entropy " +
                          fmt(out.entropy) + ")");
  }
  return out;
}

Adam::Adam(const PolicyParams& params, double learning_rate)
    : learning_rate_(learning_rate) {
  m_.actor.assign(params.actor.param_count(), 0.0);
  m_.critic.assign(params.critic.param_count(), 0.0);
  v_ = m_;
}

void Adam::step(PolicyParams& params, const PolicyGradient& gradient) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const auto update = [&](std::span<double> p, const std::vector<double>& g,
                          std::vector<double>& m, std::vector<double>& v) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      p[i] -= learning_rate_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + epsilon_);
    }
  };
  update(params.actor.params(), gradient.actor, m_.actor, v_.actor);
  update(params.critic.params(), gradient.critic, m_.critic, v_.critic);
}

double clip_gradient(PolicyGradient& gradient, double max_norm) {
  double sq = 0.0;
  for (double g : gradient.actor) sq += g * g;
  for (double g : gradient.critic) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / (norm + 1e-12);
    for (double& g : gradient.actor) g *= scale;
    for (double& g : gradient.critic) g *= scale;
  }
  return norm;
}

TrainResult train(const EnvFactory& make_env, const PpoConfig& config) {
  config.validate();
  std::unique_ptr<Environment> env = make_env();
  TrainResult result;
  result.params = make_policy(env->observation_size(), env->action_count(),
                              config.hidden, config.seed);
  PolicyParams& params = result.params;
  Adam adam(params, config.learning_rate);
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  std::vector<double> observation = env->reset();
  double episode_return = 0.0;
  double last_mean_reward = std::numeric_limits<double>::quiet_NaN();
  std::vector<Transition> rollout;
  std::vector<int> order;
  std::vector<Sample> minibatch;

  while (result.decisions < config.total_decisions) {
    rollout.clear();
    long long rollout_decisions = 0;
    double finished_return_sum = 0.0;
    int finished = 0;
    while (rollout_decisions < config.rollout_decisions &&
           result.decisions < config.total_decisions) {
      ActionMask mask = env->action_mask();
      const PolicyOutput out = forward(params, observation, mask);
      const int action = select_action(out.distribution, SelectionMode::kSample, rng);
      Environment::Outcome outcome = env->step(action);

      rollout.push_back(Transition{std::move(observation), action,
                                   out.distribution.log_probs[action], out.value,
                                   outcome.reward, outcome.done, std::move(mask)});
      rollout_decisions += outcome.decisions;
      result.decisions += outcome.decisions;
      ++result.agent_steps;
      episode_return += outcome.reward;
      if (outcome.done) {
        finished_return_sum += episode_return;
        ++finished;
        ++result.episodes;
        episode_return = 0.0;
        observation = env->reset();
      } else {
        observation = std::move(outcome.observation);
      }
    }

    const double last_value =
        rollout.back().done
            ? 0.0
            : forward(params, observation, env->action_mask()).value;
    std::vector<double> rewards, values;
    std::vector<std::uint8_t> dones;
    for (const auto& t : rollout) {
      rewards.push_back(t.reward);
      values.push_back(t.value);
      dones.push_back(t.done ? 1 : 0);
    }
    const Advantage adv = compute_gae(rewards, values, dones, config.gamma,
                                      config.gae_lambda, last_value);

    TrainLogRow row;
    row.update_idx = static_cast<int>(result.log.size());
    row.steps = result.decisions;
    row.episodes = finished;
    if (finished > 0) last_mean_reward = finished_return_sum / finished;
    row.mean_ep_reward = last_mean_reward;

    order.resize(rollout.size());
    std::iota(order.begin(), order.end(), 0);
    int minibatches = 0;
    std::vector<double> mb_advantages;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1],
                  order[rng.uniform_int(0, static_cast<std::int64_t>(i) - 1)]);
      }
      for (std::size_t start = 0; start < order.size();
           start += config.minibatch_size) {
        const std::size_t end =
            std::min(order.size(), start + config.minibatch_size);
        mb_advantages.clear();
        for (std::size_t k = start; k < end; ++k) {
          mb_advantages.push_back(adv.advantages[order[k]]);
        }
        if (config.normalize_advantages) normalize(mb_advantages);
        minibatch.clear();
        for (std::size_t k = start; k < end; ++k) {
          const Transition& t = rollout[order[k]];
          minibatch.push_back(Sample{t.observation, t.mask, t.action, t.log_prob,
                                     mb_advantages[k - start],
                                     adv.returns[order[k]]});
        }
        LossOutput loss;
        try {
          loss = ppo_loss(params, minibatch, config);
        } catch (const DivergenceError& e) {
          throw TrainingDivergedError(e.what(), result.log);
        }
        clip_gradient(loss.gradient, config.max_grad_norm);
        adam.step(params, loss.gradient);
        if (!all_finite(params.actor.params()) ||
            !all_finite(params.critic.params())) {
          throw TrainingDivergedError("parameters became non-finite", result.log);
        }
        row.loss += loss.loss;
        row.policy_loss += loss.policy_loss;
        row.value_loss += loss.value_loss;
        row.entropy += loss.entropy;
        row.clip_frac += loss.clip_fraction;
        ++minibatches;
      }
    }
    const double inv = 1.0 / minibatches;
    row.loss *= inv;
    row.policy_loss *= inv;
    row.value_loss *= inv;
    row.entropy *= inv;
    row.clip_frac *= inv;
    result.log.push_back(row);
  }
  return result;
}

std::string training_log_csv(const std::vector<TrainLogRow>& log) {
  std::ostringstream out;
  out << "update_idx,steps,mean_ep_reward,loss,policy_loss,value_loss,entropy,"
         "clip_frac\n";
  for (const auto& r : log) {
    out << r.update_idx << ',' << r.steps << ',' << fmt(r.mean_ep_reward) << ','
        << fmt(r.loss) << ',' << fmt(r.policy_loss) << ',' << fmt(r.value_loss)
        << ',' << fmt(r.entropy) << ',' << fmt(r.clip_frac) << '\n';
  }
  return out.str();
}

Time evaluate(const PolicyParams& params, env::SchedulingEnv& env,
              SelectionMode mode, Rng& rng) {
  std::vector<double> observation = env.reset();
  while (!env.done()) {
    const ActionMask mask = env.action_space().mask;
    const PolicyOutput out = forward(params, observation, mask);
    observation = env.step(select_action(out.distribution, mode, rng)).observation;
  }
  return env.clock();
}

}  // namespace petrihh::agent
