#ifndef PETRIHH_AGENT_POLICY_HPP_
#define PETRIHH_AGENT_POLICY_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "petrihh/agent/mlp.hpp"
#include "petrihh/random.hpp"

namespace petrihh::agent {

using ActionMask = std::vector<std::uint8_t>;

// Separate actor (observation -> logits) and critic (observation -> value)
// trunks.
struct PolicyParams {
  Mlp actor;
  Mlp critic;

  int observation_size() const { return actor.input_size(); }
  int action_count() const { return actor.output_size(); }
};

PolicyParams make_policy(int observation_size, int action_count,
                         const std::vector<int>& hidden, std::uint64_t seed);

// Categorical distribution over actions; masked actions have probability
// exactly 0 and log-probability -inf.
struct Distribution {
  std::vector<double> logits;
  std::vector<double> probs;
  std::vector<double> log_probs;
  ActionMask mask;

  double entropy() const;
};

struct PolicyOutput {
  Distribution distribution;
  double value = 0.0;
};

Distribution masked_softmax(std::span<const double> logits,
                            std::span<const std::uint8_t> mask);

PolicyOutput forward(const PolicyParams& params,
                     std::span<const double> observation,
                     std::span<const std::uint8_t> mask);

enum class SelectionMode { kSample, kGreedy };

std::optional<SelectionMode> parse_selection(std::string_view name);

// Greedy: highest probability, lowest index on ties. Sample: one
// multinomial draw.
int select_action(const Distribution& distribution, SelectionMode mode,
                  Rng& rng);

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  PolicyParams params;
  std::map<std::string, std::string> metadata;
};

// Plain-text dump: a versioned header, the metadata, the network shapes
// and every parameter at round-trip precision.
void save_checkpoint(const std::filesystem::path& path,
                     const PolicyParams& params,
                     const std::map<std::string, std::string>& metadata = {});
// Rejects a checkpoint whose observation width differs from
// `expected_observation_size` when one is given.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           std::optional<int> expected_observation_size = {});

}  // namespace petrihh::agent

#endif  // PETRIHH_AGENT_POLICY_HPP_
