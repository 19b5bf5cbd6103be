#ifndef PETRIHH_PETRI_HPP_
#define PETRIHH_PETRI_HPP_

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace petrihh {

using Time = std::int64_t;

namespace petri {

// Colour reserved for uncoloured resource tokens (machine idle, job ready).
inline constexpr int kResourceColor = -1;

struct Token {
  int color = kResourceColor;  // job id, or kResourceColor
  int op = -1;                 // operation index within the job
  Time entry_time = 0;

  bool is_job() const { return color >= 0; }
  friend bool operator==(const Token&, const Token&) = default;
};

enum class PlaceKind {
  kJobQueue,
  kMachineBuffer,
  kMachineBusy,
  kCompleted,
  kResourceIdle,
  kTransit,
};

enum class TransitionKind {
  kControllable,
  kColorRouting,  // immediate, uncontrolled; filter optional
  kTimedCompletion,
};

// Predicate on the front token of a transition's primary input place.
struct ColorFilter {
  std::optional<int> job;
  std::optional<int> machine;  // machine of the token's operation
};

struct Place {
  int id = 0;
  PlaceKind kind = PlaceKind::kTransit;
  std::string name;
};

struct Transition {
  int id = 0;
  TransitionKind kind = TransitionKind::kColorRouting;
  std::string name;
  // inputs[0] is the primary input: it supplies the job token that the
  // firing carries forward. Remaining inputs are resource places.
  std::vector<int> inputs;
  std::vector<int> outputs;
  std::optional<ColorFilter> color_filter;
};

class StructuralError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class DisabledTransitionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class LivelockError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Marking {
  std::vector<std::deque<Token>> places;
  Time clock = 0;

  std::size_t count(int place) const { return places.at(place).size(); }
  friend bool operator==(const Marking&, const Marking&) = default;
};

// Bit i set iff controllable transition with index i is enabled.
using GuardMask = std::vector<std::uint8_t>;

// Per-colour data: the machine and the processing time of operation
// (job, op). Timed completions read their sojourn threshold from here.
struct OperationData {
  int machine = 0;
  Time duration = 0;
};

class PetriNet {
 public:
  int add_place(PlaceKind kind, std::string name);
  // Validates the arc structure: exactly one job-carrying input (the
  // first) and exactly one job-carrying output. Resource places are those
  // of kind kResourceIdle.
  int add_transition(TransitionKind kind, std::string name,
                     std::vector<int> inputs, std::vector<int> outputs,
                     std::optional<ColorFilter> filter = std::nullopt);

  void set_operation_data(std::vector<std::vector<OperationData>> data);
  const OperationData& operation(int job, int op) const;

  const std::vector<Place>& places() const { return places_; }
  const std::vector<Transition>& transitions() const { return transitions_; }
  const Place& place(int id) const;
  const Transition& transition(int id) const;

  // Controllable transitions in creation order; index == GuardMask bit.
  const std::vector<int>& controllable() const { return controllable_; }
  // Index of transition `id` among controllables, or -1.
  int controllable_index(int id) const;

  // Marking with every place empty at clock 0, sized for this net.
  Marking empty_marking() const;

 private:
  std::vector<Place> places_;
  std::vector<Transition> transitions_;
  std::vector<int> controllable_;
  std::vector<int> controllable_index_;
  std::vector<std::vector<OperationData>> operations_;
};

// Called once per firing with the fired transition, the job token it
// carried (with its pre-firing entry time) and the clock.
using FiringObserver =
    std::function<void(int transition, const Token& token, Time clock)>;

bool is_enabled(const PetriNet& net, const Marking& marking, int transition);
std::vector<int> enabled_transitions(const PetriNet& net,
                                     const Marking& marking);

Marking fire(const PetriNet& net, const Marking& marking, int transition);
void fire_in_place(const PetriNet& net, Marking& marking, int transition,
                   const FiringObserver& observer = nullptr);

struct AdvanceResult {
  Marking marking;
  bool stalled = false;
};

// Moves the clock to the earliest time a timed completion becomes
// enabled. Returns false (stalled) when no machine is busy.
bool advance_clock_in_place(const PetriNet& net, Marking& marking);
AdvanceResult advance_clock(const PetriNet& net, const Marking& marking);

GuardMask guard_mask(const PetriNet& net, const Marking& marking);
bool any_set(const GuardMask& mask);

// True when every job token sits in a kCompleted place.
bool is_terminal(const PetriNet& net, const Marking& marking);

// Fires non-controllable transitions in ascending id order and advances
// time until a controllable transition is enabled or the marking is
// terminal. Returns the number of transitions fired.
int run_autonomous_in_place(const PetriNet& net, Marking& marking,
                            const FiringObserver& observer = nullptr);
Marking run_autonomous(const PetriNet& net, const Marking& marking);

// Graphviz rendering of a marking: places as circles with token counts,
// transitions as bars, controllable transitions double-bordered.
std::string to_dot(const PetriNet& net, const Marking& marking);

}  // namespace petri
}  // namespace petrihh

#endif  // PETRIHH_PETRI_HPP_
