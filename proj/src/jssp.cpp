#include "petrihh/jssp.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "petrihh/random.hpp"

#ifndef PETRIHH_DATA_DIR
#define PETRIHH_DATA_DIR "data"
#endif

namespace petrihh::jssp {

JsspInstance::JsspInstance(int n_machines,
                           std::vector<std::vector<Operation>> jobs,
                           std::string name)
    : n_machines_(n_machines), jobs_(std::move(jobs)), name_(std::move(name)) {
  if (n_machines_ < 1) throw InstanceError("instance needs at least one machine");
  if (jobs_.empty()) throw InstanceError("instance needs at least one job");
  for (std::size_t j = 0; j < jobs_.size(); ++j) {
    if (jobs_[j].empty()) {
      throw InstanceError("job " + std::to_string(j) + " has no operations");
    }
    for (std::size_t k = 0; k < jobs_[j].size(); ++k) {
      const Operation& op = jobs_[j][k];
      if (op.duration <= 0) {
        throw InstanceError("operation (" + std::to_string(j) + ", " +
                            std::to_string(k) + ") has non-positive duration");
      }
      if (op.machine < 0 || op.machine >= n_machines_) {
        throw InstanceError("operation (" + std::to_string(j) + ", " +
                            std::to_string(k) + ") uses unknown machine " +
                            std::to_string(op.machine));
      }
    }
  }
}

int JsspInstance::total_operations() const {
  int total = 0;
  for (const auto& job : jobs_) total += static_cast<int>(job.size());
  return total;
}

Time JsspInstance::total_work() const {
  Time total = 0;
  for (const auto& job : jobs_) {
    for (const auto& op : job) total += op.duration;
  }
  return total;
}

int JsspInstance::max_job_length() const {
  std::size_t longest = 0;
  for (const auto& job : jobs_) longest = std::max(longest, job.size());
  return static_cast<int>(longest);
}

std::string JsspInstance::size_label() const {
  return std::to_string(n_jobs()) + "x" + std::to_string(n_machines_);
}

namespace {

struct DataLine {
  int number = 0;
  std::vector<long long> values;
};

// Splits into non-comment, non-blank lines of integers.
class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  std::optional<DataLine> next() {
    while (pos_ < text_.size()) {
      std::size_t end = text_.find('\n', pos_);
      if (end == std::string_view::npos) end = text_.size();
      const std::string_view line = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
      ++line_number_;

      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string_view::npos || line[first] == '#') continue;
      return DataLine{line_number_, parse_numbers(line)};
    }
    return std::nullopt;
  }

  int line_number() const { return line_number_; }

 private:
  std::vector<long long> parse_numbers(std::string_view line) const {
    std::vector<long long> values;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' ||
                                 line[i] == '\r' || line[i] == ',')) {
        ++i;
      }
      if (i >= line.size()) break;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t' &&
             line[j] != '\r' && line[j] != ',') {
        ++j;
      }
      const std::string_view word = line.substr(i, j - i);
      long long value = 0;
      const auto [ptr, ec] =
          std::from_chars(word.data(), word.data() + word.size(), value);
      if (ec != std::errc{} || ptr != word.data() + word.size()) {
        throw ParseError(line_number_,
                         "expected an integer, got '" + std::string(word) + "'");
      }
      values.push_back(value);
      i = j;
    }
    return values;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_number_ = 0;
};

DataLine expect_line(LineReader& reader, std::size_t count,
                     const std::string& what) {
  auto line = reader.next();
  if (!line) {
    throw ParseError(reader.line_number() + 1,
                     "unexpected end of input, expected " + what);
  }
  if (line->values.size() != count) {
    throw ParseError(line->number, "expected " + std::to_string(count) +
                                       " values in " + what + ", got " +
                                       std::to_string(line->values.size()));
  }
  return *line;
}

}  // namespace

JsspInstance parse_taillard(std::string_view text, bool strict,
                            std::string name) {
  LineReader reader(text);
  const DataLine header = expect_line(reader, 2, "header 'n_jobs n_machines'");
  const long long n_jobs = header.values[0];
  const long long n_machines = header.values[1];
  if (n_jobs < 1 || n_machines < 1) {
    throw ParseError(header.number, "job and machine counts must be positive");
  }

  std::vector<std::vector<Operation>> jobs(
      n_jobs, std::vector<Operation>(n_machines));
  for (long long j = 0; j < n_jobs; ++j) {
    const DataLine row =
        expect_line(reader, n_machines, "times row " + std::to_string(j + 1));
    for (long long k = 0; k < n_machines; ++k) {
      if (row.values[k] <= 0) {
        throw ParseError(row.number, "processing time must be positive, got " +
                                         std::to_string(row.values[k]));
      }
      jobs[j][k].duration = row.values[k];
    }
  }
  for (long long j = 0; j < n_jobs; ++j) {
    const DataLine row =
        expect_line(reader, n_machines, "machines row " + std::to_string(j + 1));
    std::vector<bool> seen(n_machines, false);
    for (long long k = 0; k < n_machines; ++k) {
      const long long machine = row.values[k];
      if (machine < 1 || machine > n_machines) {
        throw ParseError(row.number, "machine index " + std::to_string(machine) +
                                         " outside [1, " +
                                         std::to_string(n_machines) + "]");
      }
      if (seen[machine - 1]) {
        throw ParseError(row.number, "machine " + std::to_string(machine) +
                                         " repeated within job " +
                                         std::to_string(j + 1));
      }
      seen[machine - 1] = true;
      jobs[j][k].machine = static_cast<int>(machine - 1);
    }
  }
  if (strict) {
    if (auto extra = reader.next()) {
      throw ParseError(extra->number, "trailing data after machine matrix");
    }
  }
  return JsspInstance(static_cast<int>(n_machines), std::move(jobs),
                      std::move(name));
}

std::string serialize_taillard(const JsspInstance& instance) {
  for (const auto& job : instance.jobs()) {
    if (static_cast<int>(job.size()) != instance.n_machines()) {
      throw InstanceError(
          "Taillard layout needs every job to visit every machine once");
    }
  }
  std::ostringstream out;
  if (!instance.name().empty()) out << "# " << instance.name() << "\n";
  out << instance.n_jobs() << " " << instance.n_machines() << "\n";
  for (const auto& job : instance.jobs()) {
    for (std::size_t k = 0; k < job.size(); ++k) {
      out << (k ? " " : "") << job[k].duration;
    }
    out << "\n";
  }
  for (const auto& job : instance.jobs()) {
    for (std::size_t k = 0; k < job.size(); ++k) {
      out << (k ? " " : "") << job[k].machine + 1;
    }
    out << "\n";
  }
  return out.str();
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("PETRIHH_DATA_DIR")) return env;
  return PETRIHH_DATA_DIR;
}

JsspInstance load_instance(const std::string& name_or_path,
                           const std::filesystem::path& data_dir) {
  std::filesystem::path path(name_or_path);
  if (!std::filesystem::is_regular_file(path)) {
    path = data_dir / (name_or_path + ".txt");
  }
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open instance '" + name_or_path +
                             "' (tried " + path.string() + ")");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_taillard(buffer.str(), true, path.stem().string());
}

JsspInstance random_instance(int n_jobs, int n_machines, std::uint64_t seed,
                             Time min_duration, Time max_duration) {
  Rng rng(seed);
  std::vector<std::vector<Operation>> jobs(n_jobs);
  for (auto& job : jobs) {
    std::vector<int> order(n_machines);
    std::iota(order.begin(), order.end(), 0);
    for (int i = n_machines - 1; i > 0; --i) {
      std::swap(order[i], order[rng.uniform_int(0, i)]);
    }
    for (int machine : order) {
      job.push_back(Operation{machine, rng.uniform_int(min_duration, max_duration)});
    }
  }
  return JsspInstance(n_machines, std::move(jobs),
                      "rand" + std::to_string(n_jobs) + "x" +
                          std::to_string(n_machines) + "s" + std::to_string(seed));
}

Schedule Schedule::empty_for(const JsspInstance& instance) {
  Schedule s;
  s.ops.resize(instance.n_jobs());
  for (int j = 0; j < instance.n_jobs(); ++j) s.ops[j].resize(instance.ops(j).size());
  return s;
}

bool Schedule::complete() const {
  for (const auto& job : ops) {
    for (const auto& op : job) {
      if (!op) return false;
    }
  }
  return true;
}

ValidationReport validate_schedule(const JsspInstance& instance,
                                   const Schedule& schedule) {
  if (static_cast<int>(schedule.ops.size()) != instance.n_jobs()) {
    throw IncompleteScheduleError("schedule has " +
                                  std::to_string(schedule.ops.size()) +
                                  " jobs, instance has " +
                                  std::to_string(instance.n_jobs()));
  }
  for (int j = 0; j < instance.n_jobs(); ++j) {
    if (schedule.ops[j].size() != instance.ops(j).size()) {
      throw IncompleteScheduleError("job " + std::to_string(j) +
                                    " has the wrong number of operations");
    }
    for (std::size_t k = 0; k < schedule.ops[j].size(); ++k) {
      if (!schedule.ops[j][k]) {
        throw IncompleteScheduleError("operation (" + std::to_string(j) + ", " +
                                      std::to_string(k) + ") is unscheduled");
      }
    }
  }

  ValidationReport report;
  std::vector<std::vector<OpRef>> by_machine(instance.n_machines());
  for (int j = 0; j < instance.n_jobs(); ++j) {
    const auto& ops = instance.ops(j);
    for (int k = 0; k < static_cast<int>(ops.size()); ++k) {
      const OpTimes& t = *schedule.ops[j][k];
      if (t.end - t.start != ops[k].duration) {
        report.duration_violations.push_back({j, k});
      }
      if (k + 1 < static_cast<int>(ops.size()) &&
          schedule.ops[j][k + 1]->start < t.start + ops[k].duration) {
        report.precedence_violations.push_back({j, k + 1});
      }
      by_machine[ops[k].machine].push_back({j, k});
      report.makespan = std::max(report.makespan, t.end);
    }
  }
  for (int m = 0; m < instance.n_machines(); ++m) {
    const auto& ops = by_machine[m];
    for (std::size_t a = 0; a < ops.size(); ++a) {
      for (std::size_t b = a + 1; b < ops.size(); ++b) {
        const OpTimes& x = *schedule.ops[ops[a].job][ops[a].op];
        const OpTimes& y = *schedule.ops[ops[b].job][ops[b].op];
        if (x.start < y.end && y.start < x.end) {
          report.overlap_violations.push_back({ops[a], ops[b], m});
        }
      }
    }
  }
  return report;
}

Time makespan(const Schedule& schedule) {
  bool any = false;
  Time best = 0;
  for (const auto& job : schedule.ops) {
    for (const auto& op : job) {
      if (!op) continue;
      best = any ? std::max(best, op->end) : op->end;
      any = true;
    }
  }
  if (!any) throw IncompleteScheduleError("makespan of an empty schedule");
  return best;
}

std::string schedule_csv(const JsspInstance& instance,
                         const Schedule& schedule) {
  std::ostringstream out;
  out << "job,op,machine,start,end\n";
  for (int j = 0; j < instance.n_jobs(); ++j) {
    for (std::size_t k = 0; k < instance.ops(j).size(); ++k) {
      const auto& t = schedule.ops.at(j).at(k);
      if (!t) continue;
      out << j << ',' << k << ',' << instance.ops(j)[k].machine << ','
          << t->start << ',' << t->end << '\n';
    }
  }
  return out.str();
}

CompiledNet instance_to_net(const JsspInstance& instance) {
  using petri::ColorFilter;
  using petri::PlaceKind;
  using petri::TransitionKind;

  CompiledNet c;
  const int n = instance.n_jobs();
  const int m = instance.n_machines();
  auto& net = c.net;

  for (int j = 0; j < n; ++j) {
    const std::string tag = "J" + std::to_string(j);
    c.queue_place.push_back(net.add_place(PlaceKind::kJobQueue, tag + "_queue"));
    c.ready_place.push_back(net.add_place(PlaceKind::kResourceIdle, tag + "_ready"));
    c.completed_place.push_back(net.add_place(PlaceKind::kCompleted, tag + "_done"));
  }
  c.dispatch_place = net.add_place(PlaceKind::kTransit, "dispatch");
  c.finished_place = net.add_place(PlaceKind::kTransit, "finished");
  for (int k = 0; k < m; ++k) {
    const std::string tag = "M" + std::to_string(k);
    c.buffer_place.push_back(net.add_place(PlaceKind::kMachineBuffer, tag + "_buffer"));
    c.idle_place.push_back(net.add_place(PlaceKind::kResourceIdle, tag + "_idle"));
    c.busy_place.push_back(net.add_place(PlaceKind::kMachineBusy, tag + "_busy"));
  }

  c.select_transition.assign(n, std::vector<int>(m, -1));
  for (int j = 0; j < n; ++j) {
    std::set<int> used;
    for (const auto& op : instance.ops(j)) used.insert(op.machine);
    for (int k : used) {
      c.select_transition[j][k] = net.add_transition(
          TransitionKind::kControllable,
          "select_J" + std::to_string(j) + "_M" + std::to_string(k),
          {c.queue_place[j], c.ready_place[j]}, {c.dispatch_place},
          ColorFilter{std::nullopt, k});
      c.controllable_selection.push_back({j, k});
    }
  }
  for (int k = 0; k < m; ++k) {
    net.add_transition(TransitionKind::kColorRouting,
                       "route_M" + std::to_string(k), {c.dispatch_place},
                       {c.buffer_place[k]}, ColorFilter{std::nullopt, k});
  }
  for (int k = 0; k < m; ++k) {
    c.start_transition.push_back(net.add_transition(
        TransitionKind::kColorRouting, "start_M" + std::to_string(k),
        {c.buffer_place[k], c.idle_place[k]}, {c.busy_place[k]}));
  }
  for (int k = 0; k < m; ++k) {
    c.completion_transition.push_back(net.add_transition(
        TransitionKind::kTimedCompletion, "finish_M" + std::to_string(k),
        {c.busy_place[k]}, {c.finished_place, c.idle_place[k]}));
  }
  for (int j = 0; j < n; ++j) {
    net.add_transition(TransitionKind::kColorRouting,
                       "return_J" + std::to_string(j), {c.finished_place},
                       {c.completed_place[j], c.ready_place[j]},
                       ColorFilter{j, std::nullopt});
  }

  std::vector<std::vector<petri::OperationData>> data(n);
  for (int j = 0; j < n; ++j) {
    for (const auto& op : instance.ops(j)) {
      data[j].push_back({op.machine, op.duration});
    }
  }
  net.set_operation_data(std::move(data));

  c.initial = net.empty_marking();
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < static_cast<int>(instance.ops(j).size()); ++k) {
      c.initial.places[c.queue_place[j]].push_back(petri::Token{j, k, 0});
    }
    c.initial.places[c.ready_place[j]].push_back(petri::Token{});
  }
  for (int k = 0; k < m; ++k) {
    c.initial.places[c.idle_place[k]].push_back(petri::Token{});
  }
  return c;
}

ScheduleRecorder::ScheduleRecorder(const CompiledNet& compiled) {
  const std::size_t count = compiled.net.transitions().size();
  start_machine_.assign(count, -1);
  completion_machine_.assign(count, -1);
  for (int k = 0; k < compiled.n_machines(); ++k) {
    start_machine_[compiled.start_transition[k]] = k;
    completion_machine_[compiled.completion_transition[k]] = k;
  }
  schedule_.ops.resize(compiled.n_jobs());
  starts_.resize(compiled.n_jobs());
  for (int j = 0; j < compiled.n_jobs(); ++j) {
    const auto ops = compiled.initial.places[compiled.queue_place[j]].size();
    schedule_.ops[j].resize(ops);
    starts_[j].assign(ops, 0);
  }
}

void ScheduleRecorder::operator()(int transition, const petri::Token& token,
                                  Time clock) {
  if (start_machine_[transition] >= 0) {
    starts_[token.color][token.op] = clock;
  } else if (completion_machine_[transition] >= 0) {
    schedule_.ops[token.color][token.op] =
        OpTimes{starts_[token.color][token.op], clock};
  }
}

}  // namespace petrihh::jssp
