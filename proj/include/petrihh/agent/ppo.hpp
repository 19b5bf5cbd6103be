#ifndef PETRIHH_AGENT_PPO_HPP_
#define PETRIHH_AGENT_PPO_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "petrihh/agent/policy.hpp"
#include "petrihh/env.hpp"

namespace petrihh::agent {

// What the trainer needs from an environment. `decisions` counts the
// underlying environment decisions one step consumed (the commitment
// window in hyper mode); training budgets are measured in decisions.
class Environment {
 public:
  struct Outcome {
    std::vector<double> observation;
    double reward = 0.0;
    bool done = false;
    int decisions = 1;
  };

  virtual ~Environment() = default;
  virtual int observation_size() const = 0;
  virtual int action_count() const = 0;
  virtual std::vector<double> reset() = 0;
  virtual ActionMask action_mask() const = 0;
  virtual Outcome step(int action) = 0;
};

class SchedulingEnvAdapter : public Environment {
 public:
  explicit SchedulingEnvAdapter(env::SchedulingEnv env) : env_(std::move(env)) {}

  int observation_size() const override { return env_.observation_size(); }
  int action_count() const override { return env_.action_count(); }
  std::vector<double> reset() override { return env_.reset(); }
  ActionMask action_mask() const override { return env_.action_space().mask; }
  Outcome step(int action) override;

  env::SchedulingEnv& env() { return env_; }

 private:
  env::SchedulingEnv env_;
};

using EnvFactory = std::function<std::unique_ptr<Environment>()>;

struct PpoConfig {
  double gamma = 1.0;
  double gae_lambda = 0.95;
  double clip_epsilon = 0.2;
  double value_coef = 0.5;
  double entropy_coef = 0.03;
  double learning_rate = 1e-3;
  double max_grad_norm = 0.5;
  int rollout_decisions = 2048;
  int epochs = 10;
  int minibatch_size = 256;
  long long total_decisions = 200000;
  bool normalize_advantages = true;
  SelectionMode selection = SelectionMode::kGreedy;  // for evaluation
  std::vector<int> hidden = {64, 64};
  std::uint64_t seed = 0;

  void validate() const;
};

// One agent-level step. In hyper mode `reward` is the commitment-window
// sum of per-decision rewards.
struct Transition {
  std::vector<double> observation;
  int action = 0;
  double log_prob = 0.0;
  double value = 0.0;
  double reward = 0.0;
  bool done = false;
  ActionMask mask;
};

struct Advantage {
  std::vector<double> advantages;
  std::vector<double> returns;  // advantage + value
};

// GAE over one rollout. `dones[t]` ends the episode after step t, which
// zeroes the bootstrap; the step after the last one bootstraps from
// `last_value`.
Advantage compute_gae(std::span<const double> rewards,
                      std::span<const double> values,
                      std::span<const std::uint8_t> dones, double gamma,
                      double lambda, double last_value = 0.0);

// In-place standardisation to mean 0, std 1 (population std).
void normalize(std::span<double> values);

struct Sample {
  std::span<const double> observation;
  std::span<const std::uint8_t> mask;
  int action = 0;
  double old_log_prob = 0.0;
  double advantage = 0.0;
  double return_target = 0.0;
};

struct PolicyGradient {
  std::vector<double> actor;
  std::vector<double> critic;
};

struct LossOutput {
  double loss = 0.0;
  double policy_loss = 0.0;   // -mean clipped surrogate
  double value_loss = 0.0;    // mean squared value error
  double entropy = 0.0;       // mean policy entropy
  double clip_fraction = 0.0; // share of samples with |ratio - 1| > epsilon
  double approx_kl = 0.0;
  PolicyGradient gradient;
};

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// loss = policy_loss + value_coef * value_loss - entropy_coef * entropy,
// with the exact gradient with respect to actor and critic parameters.
LossOutput ppo_loss(const PolicyParams& params, std::span<const Sample> batch,
                    const PpoConfig& config);

// First and second moment estimates, bias corrected.
class Adam {
 public:
  Adam(const PolicyParams& params, double learning_rate);
  void step(PolicyParams& params, const PolicyGradient& gradient);
  void set_learning_rate(double lr) { learning_rate_ = lr; }

 private:
  double learning_rate_;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double epsilon_ = 1e-8;
  long long t_ = 0;
  PolicyGradient m_;
  PolicyGradient v_;
};

// Scales the gradient so its global L2 norm is at most max_norm; returns
// the norm before scaling.
double clip_gradient(PolicyGradient& gradient, double max_norm);

struct TrainLogRow {
  int update_idx = 0;
  long long steps = 0;  // environment decisions so far
  double mean_ep_reward = 0.0;
  double loss = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_frac = 0.0;
  int episodes = 0;  // episodes finished during this rollout
};

class TrainingDivergedError : public std::runtime_error {
 public:
  TrainingDivergedError(const std::string& what, std::vector<TrainLogRow> log)
      : std::runtime_error(what), log_(std::move(log)) {}
  const std::vector<TrainLogRow>& log() const { return log_; }

 private:
  std::vector<TrainLogRow> log_;
};

struct TrainResult {
  PolicyParams params;
  std::vector<TrainLogRow> log;
  long long decisions = 0;
  long long agent_steps = 0;
  int episodes = 0;
};

TrainResult train(const EnvFactory& make_env, const PpoConfig& config);

std::string training_log_csv(const std::vector<TrainLogRow>& log);

// One episode with exploration governed by `mode`; returns the makespan.
Time evaluate(const PolicyParams& params, env::SchedulingEnv& env,
              SelectionMode mode, Rng& rng);

}  // namespace petrihh::agent

#endif  // PETRIHH_AGENT_PPO_HPP_
