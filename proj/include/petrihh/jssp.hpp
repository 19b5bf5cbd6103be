#ifndef PETRIHH_JSSP_HPP_
#define PETRIHH_JSSP_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "petrihh/petri.hpp"

namespace petrihh::jssp {

struct Operation {
  int machine = 0;
  Time duration = 0;
  friend bool operator==(const Operation&, const Operation&) = default;
};

class InstanceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Jobs x machines instance. Every job visits its machines in the stored
// order; durations are positive integers.
class JsspInstance {
 public:
  JsspInstance(int n_machines, std::vector<std::vector<Operation>> jobs,
               std::string name = {});

  int n_jobs() const { return static_cast<int>(jobs_.size()); }
  int n_machines() const { return n_machines_; }
  const std::vector<Operation>& ops(int job) const { return jobs_.at(job); }
  const std::vector<std::vector<Operation>>& jobs() const { return jobs_; }
  int total_operations() const;
  Time total_work() const;
  int max_job_length() const;
  const std::string& name() const { return name_; }
  std::string size_label() const;  // e.g. "15x15"

  friend bool operator==(const JsspInstance& a, const JsspInstance& b) {
    return a.n_machines_ == b.n_machines_ && a.jobs_ == b.jobs_;
  }

 private:
  int n_machines_;
  std::vector<std::vector<Operation>> jobs_;
  std::string name_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Taillard layout: "n_jobs n_machines", then the n_jobs x n_machines
// processing-time matrix, then the machine matrix (1-indexed). Lines
// starting with '#' and blank lines are ignored. In strict mode anything
// after the machine matrix is an error.
JsspInstance parse_taillard(std::string_view text, bool strict = true,
                            std::string name = {});
std::string serialize_taillard(const JsspInstance& instance);

// Resolves `name_or_path` as an existing file, else as
// `<data_dir>/<name>.txt`.
JsspInstance load_instance(const std::string& name_or_path,
                           const std::filesystem::path& data_dir);
std::filesystem::path default_data_dir();

// Seeded generator for tests: durations uniform in [min_duration,
// max_duration], an independent random machine permutation per job.
JsspInstance random_instance(int n_jobs, int n_machines, std::uint64_t seed,
                             Time min_duration = 1, Time max_duration = 9);

struct OpTimes {
  Time start = 0;
  Time end = 0;
};

class IncompleteScheduleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Start/completion per operation; unset entries are unscheduled.
struct Schedule {
  std::vector<std::vector<std::optional<OpTimes>>> ops;

  static Schedule empty_for(const JsspInstance& instance);
  bool complete() const;
};

struct OpRef {
  int job = 0;
  int op = 0;
  friend bool operator==(const OpRef&, const OpRef&) = default;
};

struct OverlapViolation {
  OpRef first;
  OpRef second;
  int machine = 0;
};

struct ValidationReport {
  std::vector<OpRef> precedence_violations;  // op starting before its predecessor ends
  std::vector<OverlapViolation> overlap_violations;
  std::vector<OpRef> duration_violations;  // end - start != duration
  Time makespan = 0;

  bool feasible() const {
    return precedence_violations.empty() && overlap_violations.empty() &&
           duration_violations.empty();
  }
};

ValidationReport validate_schedule(const JsspInstance& instance,
                                   const Schedule& schedule);
Time makespan(const Schedule& schedule);

// CSV with header job,op,machine,start,end; one row per operation.
std::string schedule_csv(const JsspInstance& instance, const Schedule& schedule);

// The compiled net plus the place/transition indices that give its
// places meaning. Controllable transitions come first, in (job, machine)
// order, so a transition id is also its GuardMask bit.
struct CompiledNet {
  petri::PetriNet net;
  petri::Marking initial;

  std::vector<int> queue_place;      // per job
  std::vector<int> ready_place;      // per job, resource token = job idle
  std::vector<int> completed_place;  // per job
  std::vector<int> buffer_place;     // per machine
  std::vector<int> idle_place;       // per machine
  std::vector<int> busy_place;       // per machine
  int dispatch_place = -1;
  int finished_place = -1;

  // select_transition[job][machine], -1 when the job never uses machine.
  std::vector<std::vector<int>> select_transition;
  std::vector<int> start_transition;       // per machine
  std::vector<int> completion_transition;  // per machine

  struct Selection {
    int job = 0;
    int machine = 0;
  };
  std::vector<Selection> controllable_selection;  // per GuardMask bit

  int n_jobs() const { return static_cast<int>(queue_place.size()); }
  int n_machines() const { return static_cast<int>(buffer_place.size()); }
};

// Per job: a FIFO queue of operation tokens and a ready place. A
// controllable select(j, m) takes the front token of j's queue, when
// that operation runs on m and the job is idle, into the shared dispatch
// place; colour routing moves it to m's buffer. Each machine starts the
// front of its buffer when idle; the timed completion returns the machine
// and forwards the token, which is routed back by colour to the job's
// completed place while the job becomes ready again.
CompiledNet instance_to_net(const JsspInstance& instance);

// Firing observer: S = clock at machine start, C = clock at completion.
// An operation appears in the schedule once it has completed.
class ScheduleRecorder {
 public:
  explicit ScheduleRecorder(const CompiledNet& compiled);
  void operator()(int transition, const petri::Token& token, Time clock);
  const Schedule& schedule() const { return schedule_; }

 private:
  std::vector<int> start_machine_;       // transition -> machine or -1
  std::vector<int> completion_machine_;  // transition -> machine or -1
  std::vector<std::vector<Time>> starts_;
  Schedule schedule_;
};

}  // namespace petrihh::jssp

#endif  // PETRIHH_JSSP_HPP_
