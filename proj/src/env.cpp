#include "petrihh/env.hpp"

#include <sstream>

namespace petrihh::env {

std::string_view mode_name(Mode mode) {
  return mode == Mode::kHyper ? "hyper" : "flat";
}

std::optional<Mode> parse_mode(std::string_view name) {
  if (name == "hyper") return Mode::kHyper;
  if (name == "flat") return Mode::kFlat;
  return std::nullopt;
}

SchedulingEnv::SchedulingEnv(jssp::JsspInstance instance, EnvConfig config)
    : instance_(std::move(instance)),
      config_(config),
      compiled_(jssp::instance_to_net(instance_)),
      marking_(compiled_.initial),
      recorder_(compiled_) {
  if (config_.commitment < 1) {
    throw std::invalid_argument("commitment must be >= 1");
  }
  if (config_.mode == Mode::kFlat) config_.commitment = 1;
  if (config_.reward_scale) {
    if (!(*config_.reward_scale > 0.0)) {
      throw std::invalid_argument("reward_scale must be positive");
    }
    reward_scale_ = *config_.reward_scale;
  } else {
    reward_scale_ = static_cast<double>(
        heuristics::simulate_with_heuristic(instance_, heuristics::Rule::kSpt,
                                            config_.convention)
            .makespan);
  }
  total_work_ = static_cast<double>(instance_.total_work());
}

petri::FiringObserver SchedulingEnv::observer(int& fired) {
  return [this, &fired](int t, const petri::Token& token, Time clock) {
    recorder_(t, token, clock);
    ++fired;
  };
}

std::vector<double> SchedulingEnv::reset() {
  marking_ = compiled_.initial;
  recorder_ = jssp::ScheduleRecorder(compiled_);
  trace_.clear();
  decisions_ = 0;
  step_calls_ = 0;
  started_ = true;
  int fired = 0;
  petri::run_autonomous_in_place(compiled_.net, marking_, observer(fired));
  return observe();
}

bool SchedulingEnv::done() const {
  return petri::is_terminal(compiled_.net, marking_);
}

int SchedulingEnv::action_count() const {
  return config_.mode == Mode::kHyper
             ? heuristics::kRuleCount
             : static_cast<int>(compiled_.net.controllable().size());
}

ActionSpace SchedulingEnv::action_space() const {
  ActionSpace space;
  space.size = action_count();
  if (config_.mode == Mode::kHyper) {
    space.mask.assign(space.size, 1);
  } else {
    space.mask = petri::guard_mask(compiled_.net, marking_);
  }
  return space;
}

int SchedulingEnv::observation_size() const {
  return static_cast<int>(compiled_.net.places().size()) +
         instance_.n_machines() + 2 * instance_.n_jobs() + 1;
}

std::vector<double> SchedulingEnv::observe() const {
  const auto& net = compiled_.net;
  const int n = instance_.n_jobs();
  std::vector<double> obs;
  obs.reserve(observation_size());

  std::vector<double> capacity(net.places().size(), 1.0);
  for (int j = 0; j < n; ++j) {
    const double length = static_cast<double>(instance_.ops(j).size());
    capacity[compiled_.queue_place[j]] = length;
    capacity[compiled_.completed_place[j]] = length;
  }
  for (int p : compiled_.buffer_place) capacity[p] = n;
  capacity[compiled_.dispatch_place] = n;
  capacity[compiled_.finished_place] = n;
  for (std::size_t p = 0; p < net.places().size(); ++p) {
    obs.push_back(static_cast<double>(marking_.places[p].size()) / capacity[p]);
  }

  for (int busy : compiled_.busy_place) {
    const auto& tokens = marking_.places[busy];
    double remaining = 0.0;
    if (!tokens.empty()) {
      const auto& tok = tokens.front();
      const Time left = tok.entry_time +
                        net.operation(tok.color, tok.op).duration -
                        marking_.clock;
      remaining = static_cast<double>(std::max<Time>(left, 0)) / total_work_;
    }
    obs.push_back(remaining);
  }

  std::vector<double> ops_left(n);
  for (int j = 0; j < n; ++j) {
    const auto& done = marking_.places[compiled_.completed_place[j]];
    Time work = 0;
    for (const auto& op : instance_.ops(j)) work += op.duration;
    for (const auto& tok : done) work -= instance_.ops(j)[tok.op].duration;
    obs.push_back(static_cast<double>(work) / total_work_);
    const double length = static_cast<double>(instance_.ops(j).size());
    ops_left[j] = (length - static_cast<double>(done.size())) / length;
  }
  obs.insert(obs.end(), ops_left.begin(), ops_left.end());
  obs.push_back(static_cast<double>(marking_.clock) / total_work_);
  return obs;
}

void SchedulingEnv::dispatch(int transition, const std::string& label,
                             StepInfo& info) {
  const auto [job, machine] =
      compiled_.controllable_selection[compiled_.net.controllable_index(transition)];
  if (config_.record_trace) {
    trace_.push_back(TraceRow{decisions_, marking_.clock, label, transition,
                              job, machine});
  }
  auto obs = observer(info.env_actions_fired);
  petri::fire_in_place(compiled_.net, marking_, transition, obs);
  ++decisions_;
  ++info.decisions_made;
  petri::run_autonomous_in_place(compiled_.net, marking_, obs);
}

StepResult SchedulingEnv::finish_step(StepInfo info) {
  ++step_calls_;
  StepResult result;
  result.done = done();
  if (result.done) {
    result.reward = -static_cast<double>(marking_.clock) / reward_scale_;
  }
  info.clock = marking_.clock;
  info.mask = action_space().mask;
  result.info = std::move(info);
  result.observation = observe();
  return result;
}

StepResult SchedulingEnv::step(int action) {
  if (config_.mode == Mode::kFlat) return step_flat(action);
  if (!started_) reset();
  if (done()) throw EpisodeDoneError("step called after the episode ended");
  if (action < 0 || action >= heuristics::kRuleCount) {
    throw InvalidActionError("rule index " + std::to_string(action) +
                             " outside [0, 7)");
  }
  const heuristics::Rule rule = heuristics::rule_from_index(action);
  const std::string label(heuristics::rule_name(rule));
  StepInfo info;
  for (int i = 0; i < config_.commitment && !done(); ++i) {
    const petri::GuardMask mask = petri::guard_mask(compiled_.net, marking_);
    const int t =
        heuristics::select(rule, compiled_, marking_, mask, config_.convention);
    dispatch(t, label, info);
  }
  return finish_step(std::move(info));
}

StepResult SchedulingEnv::step_flat(int transition) {
  if (!started_) reset();
  if (done()) throw EpisodeDoneError("step called after the episode ended");
  const auto& controllable = compiled_.net.controllable();
  if (transition < 0 || transition >= static_cast<int>(controllable.size()) ||
      !petri::is_enabled(compiled_.net, marking_, controllable[transition])) {
    throw InvalidActionError("transition " + std::to_string(transition) +
                             " is masked at clock " +
                             std::to_string(marking_.clock));
  }
  StepInfo info;
  dispatch(controllable[transition], "T" + std::to_string(transition), info);
  return finish_step(std::move(info));
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
  std::ostringstream out;
  out << "decision_idx,clock,rule_or_transition,fired_transition,job,machine\n";
  for (const auto& row : trace) {
    out << row.decision_idx << ',' << row.clock << ',' << row.rule_or_transition
        << ',' << row.fired_transition << ',' << row.job << ',' << row.machine
        << '\n';
  }
  return out.str();
}

}  // namespace petrihh::env
