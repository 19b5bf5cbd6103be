#include "petrihh/agent/policy.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace petrihh::agent {

namespace {

constexpr const char* kCheckpointMagic = "petrihh-checkpoint";
constexpr int kCheckpointVersion = 1;

}  // namespace

PolicyParams make_policy(int observation_size, int action_count,
                         const std::vector<int>& hidden, std::uint64_t seed) {
  std::vector<int> actor_sizes{observation_size};
  actor_sizes.insert(actor_sizes.end(), hidden.begin(), hidden.end());
  std::vector<int> critic_sizes = actor_sizes;
  actor_sizes.push_back(action_count);
  critic_sizes.push_back(1);

  PolicyParams params{Mlp(actor_sizes), Mlp(critic_sizes)};
  Rng rng(seed);
  // Small output gain keeps the initial policy close to uniform.
  params.actor.init(rng, 1.0, 0.01);
  params.critic.init(rng, 1.0, 1.0);
  return params;
}

double Distribution::entropy() const {
  double h = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (mask[i] && probs[i] > 0.0) h -= probs[i] * log_probs[i];
  }
  return h;
}

Distribution masked_softmax(std::span<const double> logits,
                            std::span<const std::uint8_t> mask) {
  if (logits.size() != mask.size()) {
    throw std::invalid_argument("mask width does not match action count");
  }
  Distribution d;
  d.logits.assign(logits.begin(), logits.end());
  d.mask.assign(mask.begin(), mask.end());
  double max_logit = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask[i]) max_logit = std::max(max_logit, logits[i]);
  }
  if (max_logit == -std::numeric_limits<double>::infinity()) {
    throw std::invalid_argument("every action is masked");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask[i]) sum += std::exp(logits[i] - max_logit);
  }
  const double log_sum = std::log(sum);
  d.probs.assign(logits.size(), 0.0);
  d.log_probs.assign(logits.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!mask[i]) continue;
    d.log_probs[i] = logits[i] - max_logit - log_sum;
    d.probs[i] = std::exp(d.log_probs[i]);
  }
  return d;
}

PolicyOutput forward(const PolicyParams& params,
                     std::span<const double> observation,
                     std::span<const std::uint8_t> mask) {
  PolicyOutput out;
  const std::vector<double> logits = params.actor.forward(observation);
  out.distribution = masked_softmax(logits, mask);
  out.value = params.critic.forward(observation)[0];
  return out;
}

std::optional<SelectionMode> parse_selection(std::string_view name) {
  if (name == "greedy") return SelectionMode::kGreedy;
  if (name == "sample") return SelectionMode::kSample;
  return std::nullopt;
}

int select_action(const Distribution& distribution, SelectionMode mode,
                  Rng& rng) {
  const auto& p = distribution.probs;
  int best = -1;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!distribution.mask[i]) continue;
    if (best < 0 || p[i] > p[best]) best = static_cast<int>(i);
  }
  if (mode == SelectionMode::kGreedy) return best;

  const double u = rng.uniform01();
  double cumulative = 0.0;
  int last = best;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!distribution.mask[i] || p[i] <= 0.0) continue;
    cumulative += p[i];
    last = static_cast<int>(i);
    if (u < cumulative) return last;
  }
  return last;  // rounding left u above the final cumulative sum
}

void save_checkpoint(const std::filesystem::path& path,
                     const PolicyParams& params,
                     const std::map<std::string, std::string>& metadata) {
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot write " + path.string());
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "observation_size " << params.observation_size() << '\n';
  out << "action_count " << params.action_count() << '\n';
  for (const auto& [key, value] : metadata) {
    out << "meta " << key << ' ' << value << '\n';
  }
  const auto dump = [&out](const char* name, const Mlp& net) {
    out << name;
    for (int s : net.sizes()) out << ' ' << s;
    out << '\n';
    char buf[32];
    std::size_t i = 0;
    for (double v : net.params()) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << buf << (++i % 8 == 0 ? '\n' : ' ');
    }
    out << '\n';
  };
  dump("actor", params.actor);
  dump("critic", params.critic);
  if (!out) throw CheckpointError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path,
                           std::optional<int> expected_observation_size) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open " + path.string());

  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kCheckpointMagic) {
    throw CheckpointError(path.string() + " is not a checkpoint");
  }
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " +
                          std::to_string(version));
  }

  Checkpoint ckpt;
  int observation_size = -1;
  int action_count = -1;
  const auto read_net = [&](Mlp& net) {
    std::string line;
    std::getline(in, line);
    std::istringstream shape(line);
    std::vector<int> sizes;
    for (int s; shape >> s;) sizes.push_back(s);
    net = Mlp(sizes);
    for (double& v : net.params()) {
      if (!(in >> v)) throw CheckpointError("truncated parameter block");
    }
  };

  bool have_actor = false;
  bool have_critic = false;
  for (std::string key; in >> key;) {
    if (key == "observation_size") {
      in >> observation_size;
    } else if (key == "action_count") {
      in >> action_count;
    } else if (key == "meta") {
      std::string name, value;
      in >> name;
      std::getline(in >> std::ws, value);
      ckpt.metadata[name] = value;
    } else if (key == "actor") {
      read_net(ckpt.params.actor);
      have_actor = true;
    } else if (key == "critic") {
      read_net(ckpt.params.critic);
      have_critic = true;
    } else {
      throw CheckpointError("unexpected field '" + key + "'");
    }
  }
  if (!have_actor || !have_critic) {
    throw CheckpointError("checkpoint lacks actor or critic parameters");
  }
  if (ckpt.params.observation_size() != observation_size ||
      ckpt.params.critic.input_size() != observation_size ||
      ckpt.params.action_count() != action_count) {
    throw CheckpointError("checkpoint header disagrees with network shapes");
  }
  if (expected_observation_size &&
      *expected_observation_size != observation_size) {
    throw CheckpointError("checkpoint observation width " +
                          std::to_string(observation_size) +
                          " does not match environment width " +
                          std::to_string(*expected_observation_size));
  }
  return ckpt;
}

}  // namespace petrihh::agent
