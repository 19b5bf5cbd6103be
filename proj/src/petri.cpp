#include "petrihh/petri.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace petrihh::petri {

namespace {

bool carries_resource(PlaceKind kind) { return kind == PlaceKind::kResourceIdle; }

void check_marking(const PetriNet& net, const Marking& marking) {
  if (marking.places.size() != net.places().size()) {
    throw StructuralError("marking has " +
                          std::to_string(marking.places.size()) +
                          " places, net has " +
                          std::to_string(net.places().size()));
  }
}

bool enabled_unchecked(const PetriNet& net, const Marking& marking,
                       const Transition& t) {
  for (int p : t.inputs) {
    if (marking.places[p].empty()) return false;
  }
  const Token& front = marking.places[t.inputs.front()].front();
  if (t.color_filter) {
    if (!front.is_job()) return false;
    if (t.color_filter->job && front.color != *t.color_filter->job) {
      return false;
    }
    if (t.color_filter->machine &&
        net.operation(front.color, front.op).machine !=
            *t.color_filter->machine) {
      return false;
    }
  }
  if (t.kind == TransitionKind::kTimedCompletion) {
    if (!front.is_job()) return false;
    const Time sojourn = marking.clock - front.entry_time;
    if (sojourn < net.operation(front.color, front.op).duration) return false;
  }
  return true;
}

const char* kind_label(PlaceKind kind) {
  switch (kind) {
    case PlaceKind::kJobQueue: return "job_queue";
    case PlaceKind::kMachineBuffer: return "machine_buffer";
    case PlaceKind::kMachineBusy: return "machine_busy";
    case PlaceKind::kCompleted: return "completed";
    case PlaceKind::kResourceIdle: return "resource_idle";
    case PlaceKind::kTransit: return "transit";
  }
  return "?";
}

}  // namespace

int PetriNet::add_place(PlaceKind kind, std::string name) {
  const int id = static_cast<int>(places_.size());
  places_.push_back(Place{id, kind, std::move(name)});
  return id;
}

int PetriNet::add_transition(TransitionKind kind, std::string name,
                             std::vector<int> inputs,
                             std::vector<int> outputs,
                             std::optional<ColorFilter> filter) {
  const auto check_place = [&](int p) {
    if (p < 0 || p >= static_cast<int>(places_.size())) {
      throw StructuralError("transition " + name + " references unknown place " +
                            std::to_string(p));
    }
  };
  for (int p : inputs) check_place(p);
  for (int p : outputs) check_place(p);
  if (inputs.empty() || carries_resource(places_[inputs.front()].kind)) {
    throw StructuralError("transition " + name +
                          " needs a job-carrying primary input");
  }
  const auto job_places = [&](const std::vector<int>& ps) {
    return std::count_if(ps.begin(), ps.end(), [&](int p) {
      return !carries_resource(places_[p].kind);
    });
  };
  if (job_places(inputs) != 1 || job_places(outputs) != 1) {
    throw StructuralError("transition " + name +
                          " must move exactly one job token");
  }
  if (kind == TransitionKind::kTimedCompletion &&
      places_[inputs.front()].kind != PlaceKind::kMachineBusy) {
    throw StructuralError("timed transition " + name +
                          " must consume from a machine_busy place");
  }

  const int id = static_cast<int>(transitions_.size());
  transitions_.push_back(Transition{id, kind, std::move(name), std::move(inputs),
                                    std::move(outputs), filter});
  if (kind == TransitionKind::kControllable) {
    controllable_index_.push_back(static_cast<int>(controllable_.size()));
    controllable_.push_back(id);
  } else {
    controllable_index_.push_back(-1);
  }
  return id;
}

void PetriNet::set_operation_data(
    std::vector<std::vector<OperationData>> data) {
  operations_ = std::move(data);
}

const OperationData& PetriNet::operation(int job, int op) const {
  if (job < 0 || job >= static_cast<int>(operations_.size()) || op < 0 ||
      op >= static_cast<int>(operations_[job].size())) {
    throw StructuralError("no operation data for colour (" +
                          std::to_string(job) + ", " + std::to_string(op) + ")");
  }
  return operations_[job][op];
}

const Place& PetriNet::place(int id) const {
  if (id < 0 || id >= static_cast<int>(places_.size())) {
    throw StructuralError("unknown place " + std::to_string(id));
  }
  return places_[id];
}

const Transition& PetriNet::transition(int id) const {
  if (id < 0 || id >= static_cast<int>(transitions_.size())) {
    throw StructuralError("unknown transition " + std::to_string(id));
  }
  return transitions_[id];
}

int PetriNet::controllable_index(int id) const {
  transition(id);
  return controllable_index_[id];
}

Marking PetriNet::empty_marking() const {
  Marking m;
  m.places.resize(places_.size());
  return m;
}

bool is_enabled(const PetriNet& net, const Marking& marking, int transition) {
  check_marking(net, marking);
  return enabled_unchecked(net, marking, net.transition(transition));
}

std::vector<int> enabled_transitions(const PetriNet& net,
                                     const Marking& marking) {
  check_marking(net, marking);
  std::vector<int> out;
  for (const Transition& t : net.transitions()) {
    if (enabled_unchecked(net, marking, t)) out.push_back(t.id);
  }
  return out;
}

void fire_in_place(const PetriNet& net, Marking& marking, int transition,
                   const FiringObserver& observer) {
  check_marking(net, marking);
  const Transition& t = net.transition(transition);
  if (!enabled_unchecked(net, marking, t)) {
    throw DisabledTransitionError("transition " + t.name + " (" +
                                  std::to_string(t.id) +
                                  ") is not enabled at clock " +
                                  std::to_string(marking.clock));
  }
  Token carried;
  for (std::size_t i = 0; i < t.inputs.size(); ++i) {
    auto& tokens = marking.places[t.inputs[i]];
    if (i == 0) carried = tokens.front();
    tokens.pop_front();
  }
  if (observer) observer(t.id, carried, marking.clock);
  for (int p : t.outputs) {
    if (carries_resource(net.places()[p].kind)) {
      marking.places[p].push_back(Token{kResourceColor, -1, marking.clock});
    } else {
      Token moved = carried;
      moved.entry_time = marking.clock;
      marking.places[p].push_back(moved);
    }
  }
}

Marking fire(const PetriNet& net, const Marking& marking, int transition) {
  Marking next = marking;
  fire_in_place(net, next, transition);
  return next;
}

bool advance_clock_in_place(const PetriNet& net, Marking& marking) {
  check_marking(net, marking);
  Time next = std::numeric_limits<Time>::max();
  for (const Transition& t : net.transitions()) {
    if (t.kind != TransitionKind::kTimedCompletion) continue;
    const auto& busy = marking.places[t.inputs.front()];
    if (busy.empty() || !busy.front().is_job()) continue;
    const Token& tok = busy.front();
    next = std::min(next, tok.entry_time + net.operation(tok.color, tok.op).duration);
  }
  if (next == std::numeric_limits<Time>::max()) return false;
  marking.clock = std::max(marking.clock, next);
  return true;
}

AdvanceResult advance_clock(const PetriNet& net, const Marking& marking) {
  AdvanceResult result{marking, false};
  result.stalled = !advance_clock_in_place(net, result.marking);
  return result;
}

GuardMask guard_mask(const PetriNet& net, const Marking& marking) {
  check_marking(net, marking);
  GuardMask mask(net.controllable().size(), 0);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = enabled_unchecked(net, marking,
                                net.transitions()[net.controllable()[i]])
                  ? 1
                  : 0;
  }
  return mask;
}

bool any_set(const GuardMask& mask) {
  return std::any_of(mask.begin(), mask.end(), [](auto b) { return b != 0; });
}

bool is_terminal(const PetriNet& net, const Marking& marking) {
  check_marking(net, marking);
  for (const Place& p : net.places()) {
    if (p.kind == PlaceKind::kCompleted || carries_resource(p.kind)) continue;
    if (!marking.places[p.id].empty()) return false;
  }
  return true;
}

int run_autonomous_in_place(const PetriNet& net, Marking& marking,
                            const FiringObserver& observer) {
  check_marking(net, marking);
  std::size_t tokens = 0;
  for (const auto& p : marking.places) tokens += p.size();
  const std::size_t max_idle_firings =
      std::max<std::size_t>(1, net.transitions().size() * tokens);

  int fired = 0;
  std::size_t firings_since_advance = 0;
  for (;;) {
    bool any_fired = false;
    for (const Transition& t : net.transitions()) {
      if (t.kind == TransitionKind::kControllable) continue;
      if (!enabled_unchecked(net, marking, t)) continue;
      fire_in_place(net, marking, t.id, observer);
      ++fired;
      any_fired = true;
      if (++firings_since_advance > max_idle_firings) {
        throw LivelockError("no clock progress after " +
                            std::to_string(firings_since_advance) +
                            " autonomous firings at clock " +
                            std::to_string(marking.clock));
      }
    }
    if (any_fired) continue;
    if (is_terminal(net, marking)) return fired;
    for (int c : net.controllable()) {
      if (enabled_unchecked(net, marking, net.transitions()[c])) return fired;
    }
    const Time before = marking.clock;
    if (!advance_clock_in_place(net, marking)) {
      throw LivelockError("net is stuck at clock " + std::to_string(before) +
                          ": nothing enabled and no machine busy");
    }
    if (marking.clock > before) firings_since_advance = 0;
  }
}

Marking run_autonomous(const PetriNet& net, const Marking& marking) {
  Marking next = marking;
  run_autonomous_in_place(net, next);
  return next;
}

std::string to_dot(const PetriNet& net, const Marking& marking) {
  check_marking(net, marking);
  std::ostringstream out;
  out << "digraph petri_net {\n"
      << "  rankdir=TB;\n"
      << "  label=\"clock = " << marking.clock << "\";\n";
  for (const Place& p : net.places()) {
    out << "  p" << p.id << " [shape=circle, label=\"" << p.name << "\\n"
        << marking.places[p.id].size() << "\", tooltip=\"" << kind_label(p.kind)
        << "\"];\n";
  }
  for (const Transition& t : net.transitions()) {
    out << "  t" << t.id << " [shape=box, style=filled, fillcolor=black, "
        << "fontcolor=white, height=0.1, label=\"" << t.name << "\"";
    if (t.kind == TransitionKind::kControllable) out << ", peripheries=2";
    out << "];\n";
    for (int p : t.inputs) out << "  p" << p << " -> t" << t.id << ";\n";
    for (int p : t.outputs) out << "  t" << t.id << " -> p" << p << ";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace petrihh::petri
