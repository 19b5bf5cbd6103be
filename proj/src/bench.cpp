#include "petrihh/bench.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

namespace petrihh::bench {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<jssp::JsspInstance> load_all(const RunConfig& config) {
  if (config.instances.empty()) throw std::invalid_argument("no instances given");
  std::vector<jssp::JsspInstance> out;
  for (const auto& name : config.instances) {
    out.push_back(jssp::load_instance(name, config.data_dir));
  }
  return out;
}

void require_feasible(const jssp::JsspInstance& instance,
                      const jssp::Schedule& schedule, Time expected_makespan) {
  const auto report = jssp::validate_schedule(instance, schedule);
  if (!report.feasible() || report.makespan != expected_makespan) {
    throw InfeasibleScheduleError("schedule for " + instance.name() +
                                  " failed revalidation");
  }
}

std::string gantt_csv(const jssp::JsspInstance& instance,
                      const jssp::Schedule& schedule) {
  struct Bar {
    int machine, job, op;
    Time start, end;
  };
  std::vector<Bar> bars;
  for (int j = 0; j < instance.n_jobs(); ++j) {
    for (std::size_t k = 0; k < instance.ops(j).size(); ++k) {
      const auto& t = *schedule.ops[j][k];
      bars.push_back({instance.ops(j)[k].machine, j, static_cast<int>(k), t.start, t.end});
    }
  }
  std::sort(bars.begin(), bars.end(), [](const Bar& a, const Bar& b) {
    return std::tie(a.machine, a.start, a.job) < std::tie(b.machine, b.start, b.job);
  });
  std::ostringstream out;
  out << "machine,job,op,start,end\n";
  for (const auto& b : bars) {
    out << b.machine << ',' << b.job << ',' << b.op << ',' << b.start << ','
        << b.end << '\n';
  }
  return out.str();
}

int run_guarded(const char* command, int (*body)(const RunConfig&),
                const RunConfig& config) {
  try {
    return body(config);
  } catch (const std::exception& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return 1;
  }
}

int heuristics_body(const RunConfig& config) {
  const auto rows = run_heuristics(config);
  std::filesystem::create_directories(config.out_dir);
  write_file(config.out_dir / "results.csv", heuristics_csv(rows));
  write_file(config.out_dir / "results.md", heuristics_markdown(rows));
  std::cout << heuristics_markdown(rows);
  return 0;
}

std::vector<ResultRow> train_grid(const RunConfig& config,
                                  const std::vector<int>& commitments) {
  std::vector<ResultRow> rows;
  std::vector<std::filesystem::path> logs;
  for (const auto& instance : load_all(config)) {
    for (int x : commitments) {
      for (std::uint64_t seed : config.seeds) {
        std::cerr << "training " << instance.name() << " mode="
                  << env::mode_name(config.mode) << " x=" << x
                  << " seed=" << seed << '\n';
        const TrainedRun run = train_one(instance, x, seed, config);
        std::cerr << "  greedy makespan " << run.row.makespan << " (gap "
                  << fixed(run.row.gap(), 2) << "%)\n";
        rows.push_back(run.row);
        logs.push_back(config.out_dir /
                       ("training_log_" +
                        run_stem(instance.name(), config.mode, x, seed) + ".csv"));
      }
    }
  }
  if (logs.size() == 1) {
    std::filesystem::copy_file(logs[0], config.out_dir / "training_log.csv",
                               std::filesystem::copy_options::overwrite_existing);
  }
  return rows;
}

int train_body(const RunConfig& config) {
  std::filesystem::create_directories(config.out_dir);
  const auto rows = train_grid(config, config.commitments);
  write_file(config.out_dir / "results.csv", results_csv(rows));
  write_file(config.out_dir / "results.md", results_markdown(rows));
  std::cout << results_markdown(rows);
  return 0;
}

int eval_body(const RunConfig& config) {
  if (!config.checkpoint) throw std::invalid_argument("--checkpoint is required");
  const agent::Checkpoint ckpt = agent::load_checkpoint(*config.checkpoint);
  const auto meta = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = ckpt.metadata.find(key);
    if (it == ckpt.metadata.end()) return std::nullopt;
    return it->second;
  };

  std::string instance_name;
  if (!config.instances.empty()) {
    instance_name = config.instances.front();
  } else if (auto name = meta("instance")) {
    instance_name = *name;
  } else {
    throw std::invalid_argument("no instance given and none in the checkpoint");
  }
  const auto instance = jssp::load_instance(instance_name, config.data_dir);

  env::EnvConfig env_config;
  env_config.mode = config.mode;
  if (auto mode = meta("mode")) env_config.mode = env::parse_mode(*mode).value_or(config.mode);
  env_config.commitment = 1;
  if (!config.commitments.empty()) {
    env_config.commitment = config.commitments.front();
  } else if (auto x = meta("commitment")) {
    env_config.commitment = std::stoi(*x);
  }
  env_config.convention = config.convention;
  env_config.record_trace = config.export_trace;

  const env::SchedulingEnv probe(instance, env_config);
  if (probe.observation_size() != ckpt.params.observation_size()) {
    throw agent::CheckpointError(
        "checkpoint observation width " +
        std::to_string(ckpt.params.observation_size()) +
        " does not match instance width " +
        std::to_string(probe.observation_size()));
  }
  if (probe.action_count() != ckpt.params.action_count()) {
    throw agent::CheckpointError("checkpoint action count does not match the mode");
  }

  const std::uint64_t seed = config.seeds.empty() ? 0 : config.seeds.front();
  const EvalResult result = evaluate_policy(ckpt.params, instance, env_config,
                                            config.selection, config.samples, seed);
  const Time best = best_heuristic(instance, config.convention);

  std::filesystem::create_directories(config.out_dir);
  std::ostringstream csv;
  csv << "instance,size,mode,commitment,selection,samples,min,median,"
         "best_heuristic,gap_pct\n";
  const bool sampled = config.selection == agent::SelectionMode::kSample;
  csv << instance.name() << ',' << instance.size_label() << ','
      << env::mode_name(env_config.mode) << ',' << env_config.commitment << ','
      << (sampled ? "sample" : "greedy") << ',' << result.makespans.size() << ','
      << result.min << ',' << fixed(result.median, 1) << ',' << best << ','
      << fixed(gap_percent(result.min, best), 2) << '\n';
  write_file(config.out_dir / "results.csv", csv.str());

  std::ostringstream draws;
  draws << "draw,makespan\n";
  for (std::size_t i = 0; i < result.makespans.size(); ++i) {
    draws << i << ',' << result.makespans[i] << '\n';
  }
  write_file(config.out_dir / "rollouts.csv", draws.str());

  if (config.export_trace) {
    write_file(config.out_dir / "trace.csv", env::trace_csv(result.trace));
    write_file(config.out_dir / "gantt.csv", gantt_csv(instance, result.schedule));
    write_file(config.out_dir / "schedule.csv",
               jssp::schedule_csv(instance, result.schedule));
    write_file(config.out_dir / "net.dot",
               petri::to_dot(probe.compiled().net, probe.compiled().initial));
  }
  std::cout << instance.name() << ' ' << (sampled ? "sample" : "greedy")
            << " min " << result.min << " median " << fixed(result.median, 1)
            << " best-heuristic " << best << " gap "
            << fixed(gap_percent(result.min, best), 2) << "%\n";
  return 0;
}

}  // namespace

Time HeuristicRow::best() const {
  return *std::min_element(makespans.begin(), makespans.end());
}

heuristics::Rule HeuristicRow::best_rule() const {
  const auto it = std::min_element(makespans.begin(), makespans.end());
  return rules[it - makespans.begin()];
}

std::vector<HeuristicRow> run_heuristics(const RunConfig& config) {
  if (config.rules.empty()) throw std::invalid_argument("no rules given");
  std::vector<HeuristicRow> rows;
  for (const auto& instance : load_all(config)) {
    HeuristicRow row{instance.name(), instance.size_label(), config.rules, {}};
    for (auto rule : config.rules) {
      const auto rollout =
          heuristics::simulate_with_heuristic(instance, rule, config.convention);
      require_feasible(instance, rollout.schedule, rollout.makespan);
      row.makespans.push_back(rollout.makespan);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string heuristics_csv(const std::vector<HeuristicRow>& rows) {
  std::ostringstream out;
  out << "instance,size,rule,makespan\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.rules.size(); ++i) {
      out << row.instance << ',' << row.size << ','
          << heuristics::rule_name(row.rules[i]) << ',' << row.makespans[i] << '\n';
    }
  }
  return out.str();
}

std::string heuristics_markdown(const std::vector<HeuristicRow>& rows) {
  if (rows.empty()) return {};
  const auto& rules = rows.front().rules;
  std::ostringstream out;
  out << "| Instance | Size |";
  for (auto rule : rules) out << ' ' << heuristics::rule_name(rule) << " |";
  out << " Best |\n|---|---|";
  for (std::size_t i = 0; i <= rules.size(); ++i) out << "---:|";
  out << '\n';
  std::vector<double> sums(rules.size() + 1, 0.0);
  for (const auto& row : rows) {
    out << "| " << row.instance << " | " << row.size << " |";
    for (std::size_t i = 0; i < rules.size(); ++i) {
      out << ' ' << row.makespans[i] << " |";
      sums[i] += static_cast<double>(row.makespans[i]);
    }
    out << ' ' << row.best() << " |\n";
    sums.back() += static_cast<double>(row.best());
  }
  out << "| Average | |";
  for (double s : sums) out << ' ' << fixed(s / rows.size(), 1) << " |";
  out << '\n';
  return out.str();
}

Time best_heuristic(const jssp::JsspInstance& instance,
                    heuristics::KeyConvention convention) {
  Time best = 0;
  for (auto rule : heuristics::kAllRules) {
    const Time span =
        heuristics::simulate_with_heuristic(instance, rule, convention).makespan;
    if (best == 0 || span < best) best = span;
  }
  return best;
}

double gap_percent(Time makespan, Time best) {
  return static_cast<double>(makespan - best) / static_cast<double>(best) * 100.0;
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  out << "instance,size,mode,commitment,seed,makespan,best_heuristic,gap_pct\n";
  for (const auto& r : rows) {
    out << r.instance << ',' << r.size << ',' << env::mode_name(r.mode) << ','
        << r.commitment << ',' << r.seed << ',' << r.makespan << ','
        << r.best_heuristic << ',' << fixed(r.gap(), 2) << '\n';
  }
  return out.str();
}

std::string results_markdown(const std::vector<ResultRow>& rows) {
  struct Group {
    std::string instance, size;
    env::Mode mode;
    int commitment;
    Time best_heuristic;
    std::vector<Time> spans;
  };
  std::vector<Group> groups;
  for (const auto& r : rows) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
      return g.instance == r.instance && g.mode == r.mode &&
             g.commitment == r.commitment;
    });
    if (it == groups.end()) {
      groups.push_back({r.instance, r.size, r.mode, r.commitment, r.best_heuristic, {}});
      it = groups.end() - 1;
    }
    it->spans.push_back(r.makespan);
  }
  std::ostringstream out;
  out << "| Instance | Size | Mode | x | Seeds | Best | Mean | Best-Heuristic | "
         "Gap (best) | Gap (mean) |\n"
         "|---|---|---|---:|---:|---:|---:|---:|---:|---:|\n";
  for (const auto& g : groups) {
    const Time best = *std::min_element(g.spans.begin(), g.spans.end());
    const double mean =
        std::accumulate(g.spans.begin(), g.spans.end(), 0.0) / g.spans.size();
    const double mean_gap = (mean - g.best_heuristic) / g.best_heuristic * 100.0;
    out << "| " << g.instance << " | " << g.size << " | " << env::mode_name(g.mode)
        << " | " << g.commitment << " | " << g.spans.size() << " | " << best
        << " | " << fixed(mean, 1) << " | " << g.best_heuristic << " | "
        << fixed(gap_percent(best, g.best_heuristic), 2) << "% | "
        << fixed(mean_gap, 2) << "% |\n";
  }
  return out.str();
}

std::string run_stem(const std::string& instance, env::Mode mode,
                     int commitment, std::uint64_t seed) {
  return instance + "_" + std::string(env::mode_name(mode)) + "_x" +
         std::to_string(commitment) + "_s" + std::to_string(seed);
}

TrainedRun train_one(const jssp::JsspInstance& instance, int commitment,
                     std::uint64_t seed, const RunConfig& config) {
  env::EnvConfig env_config;
  env_config.mode = config.mode;
  env_config.commitment = commitment;
  env_config.convention = config.convention;
  env_config.seed = seed;

  agent::PpoConfig ppo = config.ppo;
  ppo.seed = seed;
  TrainedRun run;
  run.training = agent::train(
      [&] {
        return std::make_unique<agent::SchedulingEnvAdapter>(
            env::SchedulingEnv(instance, env_config));
      },
      ppo);

  env::SchedulingEnv env(instance, env_config);
  Rng rng(seed);
  run.row.makespan =
      agent::evaluate(run.training.params, env, agent::SelectionMode::kGreedy, rng);
  require_feasible(instance, env.schedule(), run.row.makespan);
  run.row.instance = instance.name();
  run.row.size = instance.size_label();
  run.row.mode = env_config.mode;
  run.row.commitment = env.config().commitment;
  run.row.seed = seed;
  run.row.best_heuristic = best_heuristic(instance, config.convention);

  std::filesystem::create_directories(config.out_dir);
  const std::string stem = run_stem(instance.name(), config.mode, commitment, seed);
  run.checkpoint = config.out_dir / (stem + ".ckpt");
  agent::save_checkpoint(
      run.checkpoint, run.training.params,
      {{"instance", instance.name()},
       {"mode", std::string(env::mode_name(env_config.mode))},
       {"commitment", std::to_string(env.config().commitment)},
       {"seed", std::to_string(seed)},
       {"decisions", std::to_string(run.training.decisions)},
       {"convention", std::string(heuristics::convention_name(config.convention))}});
  write_file(config.out_dir / ("training_log_" + stem + ".csv"),
             agent::training_log_csv(run.training.log));
  return run;
}

double median(std::vector<Time> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return static_cast<double>(values[mid]);
  return (values[mid - 1] + values[mid]) / 2.0;
}

EvalResult evaluate_policy(const agent::PolicyParams& params,
                           const jssp::JsspInstance& instance,
                           env::EnvConfig env_config, agent::SelectionMode mode,
                           int samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("need at least one sample");
  const int runs = mode == agent::SelectionMode::kGreedy ? 1 : samples;
  env::SchedulingEnv env(instance, env_config);
  Rng rng(seed);
  EvalResult result;
  for (int i = 0; i < runs; ++i) {
    const Time span = agent::evaluate(params, env, mode, rng);
    require_feasible(instance, env.schedule(), span);
    if (result.makespans.empty() || span < result.min) {
      result.min = span;
      result.schedule = env.schedule();
      result.trace = env.trace();
    }
    result.makespans.push_back(span);
  }
  result.median = median(result.makespans);
  return result;
}

int cmd_heuristics(const RunConfig& config) {
  return run_guarded("heuristics", heuristics_body, config);
}
int cmd_train(const RunConfig& config) {
  return run_guarded("train", train_body, config);
}
int cmd_ablate_commitment(const RunConfig& config) {
  return run_guarded("ablate-commitment", train_body, config);
}
int cmd_eval(const RunConfig& config) {
  return run_guarded("eval", eval_body, config);
}

}  // namespace petrihh::bench
