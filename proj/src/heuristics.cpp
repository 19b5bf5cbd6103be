#include "petrihh/heuristics.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace petrihh::heuristics {

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

std::string_view rule_name(Rule rule) {
  switch (rule) {
    case Rule::kFifo: return "FIFO";
    case Rule::kSpt: return "SPT";
    case Rule::kSps: return "SPS";
    case Rule::kLtwr: return "LTWR";
    case Rule::kSpsr: return "SPSR";
    case Rule::kLptn: return "LPTN";
    case Rule::kLwt: return "LWT";
  }
  return "?";
}

std::optional<Rule> parse_rule(std::string_view name) {
  for (Rule rule : kAllRules) {
    if (iequals(name, rule_name(rule))) return rule;
  }
  return std::nullopt;
}

Rule rule_from_index(int index) {
  if (index < 0 || index >= kRuleCount) {
    throw std::out_of_range("rule index " + std::to_string(index) +
                            " outside [0, 7)");
  }
  return kAllRules[index];
}

std::string_view convention_name(KeyConvention convention) {
  return convention == KeyConvention::kAggregate ? "aggregate" : "textbook";
}

std::optional<KeyConvention> parse_convention(std::string_view name) {
  if (iequals(name, "aggregate")) return KeyConvention::kAggregate;
  if (iequals(name, "textbook")) return KeyConvention::kTextbook;
  return std::nullopt;
}

Priority score(Rule rule, const DispatchContext& context,
               const ActionContext& action, KeyConvention convention) {
  const bool aggregate = convention == KeyConvention::kAggregate;
  switch (rule) {
    case Rule::kFifo: return action.ready_time;
    case Rule::kSpt: return aggregate ? action.total_work : action.p_next;
    case Rule::kSps: return action.seq_length;
    case Rule::kLtwr:
      return aggregate ? action.work_remaining : -action.work_remaining;
    case Rule::kSpsr: return action.ops_remaining;
    case Rule::kLptn: return -action.p_next;
    case Rule::kLwt: return -(context.clock - action.ready_time);
  }
  return 0;
}

DispatchContext build_context(const jssp::CompiledNet& compiled,
                              const petri::Marking& marking,
                              const petri::GuardMask& mask) {
  DispatchContext context;
  context.clock = marking.clock;
  const auto& net = compiled.net;
  for (std::size_t bit = 0; bit < mask.size(); ++bit) {
    if (!mask[bit]) continue;
    const auto [job, machine] = compiled.controllable_selection[bit];
    const auto& queue = marking.places[compiled.queue_place[job]];
    const auto& done = marking.places[compiled.completed_place[job]];
    const auto& ready = marking.places[compiled.ready_place[job]];

    ActionContext a;
    a.transition = net.controllable()[bit];
    a.job = job;
    a.machine = machine;
    a.ready_time = ready.empty() ? marking.clock : ready.front().entry_time;
    a.p_next = net.operation(job, queue.front().op).duration;
    a.ops_remaining = static_cast<int>(queue.size());
    for (const auto& token : queue) {
      a.work_remaining += net.operation(job, token.op).duration;
    }
    a.seq_length = static_cast<int>(queue.size() + done.size());
    a.total_work = a.work_remaining;
    for (const auto& token : done) {
      a.total_work += net.operation(job, token.op).duration;
    }
    context.actions.push_back(a);
  }
  return context;
}

int select(Rule rule, const DispatchContext& context,
           KeyConvention convention) {
  if (context.actions.empty()) {
    throw EmptyMaskError("no valid action to dispatch");
  }
  const ActionContext* best = nullptr;
  Priority best_key = 0;
  for (const auto& action : context.actions) {
    const Priority key = score(rule, context, action, convention);
    if (!best || key < best_key ||
        (key == best_key && action.transition < best->transition)) {
      best = &action;
      best_key = key;
    }
  }
  return best->transition;
}

int select(Rule rule, const jssp::CompiledNet& compiled,
           const petri::Marking& marking, const petri::GuardMask& mask,
           KeyConvention convention) {
  return select(rule, build_context(compiled, marking, mask), convention);
}

Rollout simulate_with_heuristic(const jssp::JsspInstance& instance, Rule rule,
                                KeyConvention convention) {
  const jssp::CompiledNet compiled = jssp::instance_to_net(instance);
  const auto& net = compiled.net;
  petri::Marking marking = compiled.initial;
  jssp::ScheduleRecorder recorder(compiled);
  const petri::FiringObserver observer =
      [&recorder](int t, const petri::Token& token, Time clock) {
        recorder(t, token, clock);
      };

  Rollout rollout;
  petri::run_autonomous_in_place(net, marking, observer);
  while (!petri::is_terminal(net, marking)) {
    const petri::GuardMask mask = petri::guard_mask(net, marking);
    const int t = select(rule, compiled, marking, mask, convention);
    petri::fire_in_place(net, marking, t, observer);
    ++rollout.decisions;
    petri::run_autonomous_in_place(net, marking, observer);
  }
  rollout.schedule = recorder.schedule();
  rollout.makespan = marking.clock;
  return rollout;
}

}  // namespace petrihh::heuristics
