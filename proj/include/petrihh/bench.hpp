#ifndef PETRIHH_BENCH_HPP_
#define PETRIHH_BENCH_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "petrihh/agent/ppo.hpp"
#include "petrihh/env.hpp"
#include "petrihh/heuristics.hpp"
#include "petrihh/jssp.hpp"

namespace petrihh::bench {

struct RunConfig {
  std::vector<std::string> instances = {"ta01"};
  std::vector<heuristics::Rule> rules = {heuristics::kAllRules.begin(),
                                         heuristics::kAllRules.end()};
  heuristics::KeyConvention convention = heuristics::KeyConvention::kAggregate;
  env::Mode mode = env::Mode::kHyper;
  std::vector<int> commitments = {5};
  std::vector<std::uint64_t> seeds = {0};
  agent::PpoConfig ppo;  // total_decisions is the per-run budget
  agent::SelectionMode selection = agent::SelectionMode::kGreedy;
  int samples = 10;
  std::filesystem::path out_dir = "results";
  std::filesystem::path data_dir = jssp::default_data_dir();
  std::optional<std::filesystem::path> checkpoint;
  bool export_trace = false;
};

// Makespan of every requested rule on one instance.
struct HeuristicRow {
  std::string instance;
  std::string size;
  std::vector<heuristics::Rule> rules;
  std::vector<Time> makespans;

  Time best() const;
  heuristics::Rule best_rule() const;  // first rule attaining best()
};

std::vector<HeuristicRow> run_heuristics(const RunConfig& config);
std::string heuristics_csv(const std::vector<HeuristicRow>& rows);
std::string heuristics_markdown(const std::vector<HeuristicRow>& rows);

// Best makespan over all seven rules, for gap columns.
Time best_heuristic(const jssp::JsspInstance& instance,
                    heuristics::KeyConvention convention);

// Relative gap in percent: (makespan - best) / best * 100.
double gap_percent(Time makespan, Time best);

struct ResultRow {
  std::string instance;
  std::string size;
  env::Mode mode = env::Mode::kHyper;
  int commitment = 1;
  std::uint64_t seed = 0;
  Time makespan = 0;
  Time best_heuristic = 0;

  double gap() const { return gap_percent(makespan, best_heuristic); }
};

std::string results_csv(const std::vector<ResultRow>& rows);
// Per (instance, commitment): best and mean makespan over seeds.
std::string results_markdown(const std::vector<ResultRow>& rows);

struct TrainedRun {
  ResultRow row;
  agent::TrainResult training;
  std::filesystem::path checkpoint;
};

// Trains one policy and evaluates it greedily. Writes the checkpoint and
// its training log into config.out_dir.
TrainedRun train_one(const jssp::JsspInstance& instance, int commitment,
                     std::uint64_t seed, const RunConfig& config);

// File stem shared by a run's checkpoint and training log.
std::string run_stem(const std::string& instance, env::Mode mode,
                     int commitment, std::uint64_t seed);

struct EvalResult {
  std::vector<Time> makespans;  // one entry for greedy, k for sampling
  Time min = 0;
  double median = 0.0;
  jssp::Schedule schedule;  // of the best rollout
  std::vector<env::TraceRow> trace;
};

// Rollouts of a loaded policy; every schedule is revalidated.
EvalResult evaluate_policy(const agent::PolicyParams& params,
                           const jssp::JsspInstance& instance,
                           env::EnvConfig env_config, agent::SelectionMode mode,
                           int samples, std::uint64_t seed);

double median(std::vector<Time> values);

// Raised when a schedule fails revalidation before being written.
class InfeasibleScheduleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Subcommands. Each writes its outputs under config.out_dir and returns
// the process exit code: 0 only if every requested run completed.
int cmd_heuristics(const RunConfig& config);
int cmd_train(const RunConfig& config);
int cmd_ablate_commitment(const RunConfig& config);
int cmd_eval(const RunConfig& config);

}  // namespace petrihh::bench

#endif  // PETRIHH_BENCH_HPP_
