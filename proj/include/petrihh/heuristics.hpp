#ifndef PETRIHH_HEURISTICS_HPP_
#define PETRIHH_HEURISTICS_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "petrihh/jssp.hpp"
#include "petrihh/petri.hpp"

namespace petrihh::heuristics {

// The low-level dispatching rules. Indices are stable: they are the
// hyper-heuristic action ids.
enum class Rule { kFifo = 0, kSpt, kSps, kLtwr, kSpsr, kLptn, kLwt };

inline constexpr int kRuleCount = 7;
inline constexpr std::array<Rule, kRuleCount> kAllRules = {
    Rule::kFifo, Rule::kSpt,  Rule::kSps, Rule::kLtwr,
    Rule::kSpsr, Rule::kLptn, Rule::kLwt};

std::string_view rule_name(Rule rule);
// Case-insensitive; accepts the abbreviations FIFO, SPT, SPS, LTWR, SPSR,
// LPTN, LWT.
std::optional<Rule> parse_rule(std::string_view name);
Rule rule_from_index(int index);
inline int rule_index(Rule rule) { return static_cast<int>(rule); }

// Which priority key SPT and LTWR use.
//   kAggregate: SPT ranks jobs by total processing time, LTWR by remaining
//     work, both ascending. These reproduce the reference Taillard
//     baseline makespans exactly.
//   kTextbook: SPT ranks by the next operation's processing time, LTWR by
//     remaining work descending.
// The other five rules are identical under both conventions.
enum class KeyConvention { kAggregate, kTextbook };

std::string_view convention_name(KeyConvention convention);
std::optional<KeyConvention> parse_convention(std::string_view name);

// What a rule may look at for one valid action (one set guard bit).
struct ActionContext {
  int transition = 0;
  int job = 0;
  int machine = 0;
  Time ready_time = 0;      // clock when the job's front operation became dispatchable
  Time p_next = 0;          // duration of the front operation
  int ops_remaining = 0;    // unfinished operations of the job
  Time work_remaining = 0;  // their total duration
  int seq_length = 0;       // operations in the job
  Time total_work = 0;      // total duration of the job
};

struct DispatchContext {
  Time clock = 0;
  std::vector<ActionContext> actions;
};

using Priority = std::int64_t;

// The rule picks the action with the smallest key.
Priority score(Rule rule, const DispatchContext& context,
               const ActionContext& action,
               KeyConvention convention = KeyConvention::kAggregate);

DispatchContext build_context(const jssp::CompiledNet& compiled,
                              const petri::Marking& marking,
                              const petri::GuardMask& mask);

class EmptyMaskError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Masked argmin of `score`, ties to the lowest transition id.
int select(Rule rule, const DispatchContext& context,
           KeyConvention convention = KeyConvention::kAggregate);
int select(Rule rule, const jssp::CompiledNet& compiled,
           const petri::Marking& marking, const petri::GuardMask& mask,
           KeyConvention convention = KeyConvention::kAggregate);

struct Rollout {
  jssp::Schedule schedule;
  Time makespan = 0;
  int decisions = 0;
};

Rollout simulate_with_heuristic(
    const jssp::JsspInstance& instance, Rule rule,
    KeyConvention convention = KeyConvention::kAggregate);

}  // namespace petrihh::heuristics

#endif  // PETRIHH_HEURISTICS_HPP_
