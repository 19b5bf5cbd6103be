#ifndef PETRIHH_ENV_HPP_
#define PETRIHH_ENV_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "petrihh/heuristics.hpp"
#include "petrihh/jssp.hpp"
#include "petrihh/petri.hpp"

namespace petrihh::env {

// kHyper: an action is a dispatching rule, applied for `commitment`
// consecutive decisions. kFlat: an action is a controllable transition.
enum class Mode { kHyper, kFlat };

std::string_view mode_name(Mode mode);
std::optional<Mode> parse_mode(std::string_view name);

struct EnvConfig {
  Mode mode = Mode::kHyper;
  int commitment = 1;  // forced to 1 in flat mode
  // Terminal reward is -makespan / reward_scale. Defaults to the SPT
  // rollout makespan of the instance.
  std::optional<double> reward_scale;
  std::uint64_t seed = 0;
  heuristics::KeyConvention convention = heuristics::KeyConvention::kAggregate;
  bool record_trace = false;
};

struct StepInfo {
  Time clock = 0;
  int decisions_made = 0;     // dispatch decisions taken by this call
  int env_actions_fired = 0;  // all transition firings, autonomous included
  petri::GuardMask mask;      // guard mask after the call
};

struct StepResult {
  std::vector<double> observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

struct ActionSpace {
  int size = 0;
  petri::GuardMask mask;
};

struct TraceRow {
  int decision_idx = 0;
  Time clock = 0;
  std::string rule_or_transition;
  int fired_transition = 0;
  int job = 0;
  int machine = 0;
};

class InvalidActionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EpisodeDoneError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Scheduling environment over the compiled Petri net. The agent never
// sees a state without a valid dispatch: autonomous firings and time
// advances are consumed inside reset/step.
//
// Observation layout (all entries in [0, 1]):
//   [0, P)           token count of each place over its capacity
//                    (queue/completed: job length, buffer/transit: jobs,
//                    others: 1)
//   [P, P+m)         remaining busy time per machine / total work
//   [P+m, P+m+n)     remaining work per job / total work
//   [P+m+n, P+m+2n)  remaining operations per job / job length
//   P+m+2n           clock / total work
class SchedulingEnv {
 public:
  SchedulingEnv(jssp::JsspInstance instance, EnvConfig config = {});

  std::vector<double> reset();
  // Hyper mode: `action` is a rule index. Flat mode: a transition id.
  StepResult step(int action);
  StepResult step_flat(int transition);
  std::vector<double> observe() const;

  ActionSpace action_space() const;
  int action_count() const;
  int observation_size() const;

  bool done() const;
  Time clock() const { return marking_.clock; }
  int decisions() const { return decisions_; }
  int step_calls() const { return step_calls_; }
  double reward_scale() const { return reward_scale_; }
  const jssp::Schedule& schedule() const { return recorder_.schedule(); }
  const std::vector<TraceRow>& trace() const { return trace_; }

  const EnvConfig& config() const { return config_; }
  const jssp::JsspInstance& instance() const { return instance_; }
  const jssp::CompiledNet& compiled() const { return compiled_; }
  const petri::Marking& marking() const { return marking_; }

 private:
  void dispatch(int transition, const std::string& label, StepInfo& info);
  StepResult finish_step(StepInfo info);
  petri::FiringObserver observer(int& fired);

  jssp::JsspInstance instance_;
  EnvConfig config_;
  jssp::CompiledNet compiled_;
  petri::Marking marking_;
  jssp::ScheduleRecorder recorder_;
  std::vector<TraceRow> trace_;
  double reward_scale_ = 1.0;
  double total_work_ = 1.0;
  int decisions_ = 0;
  int step_calls_ = 0;
  bool started_ = false;
};

// Per-decision CSV: decision_idx,clock,rule_or_transition,fired_transition,job,machine
std::string trace_csv(const std::vector<TraceRow>& trace);

}  // namespace petrihh::env

#endif  // PETRIHH_ENV_HPP_
