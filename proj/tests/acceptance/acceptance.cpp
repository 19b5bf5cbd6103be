// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
// and exits non-zero if any criterion fails.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "petrihh/agent/ppo.hpp"
#include "petrihh/bench.hpp"
#include "support/optimum.hpp"
#include "support/rollouts.hpp"

using namespace petrihh;
using heuristics::Rule;

namespace {

const std::vector<std::string> kHeads = {"ta01", "ta11", "ta21", "ta31",
                                         "ta41", "ta51", "ta61", "ta71"};

// Reference per-rule makespans, columns in kAllRules order
// (FIFO, SPT, SPS, LTWR, SPSR, LPTN, LWT), plus the best-heuristic column.
struct Reference {
  std::array<Time, 7> rules;
  Time best;
};
const std::map<std::string, Reference> kReference = {
    {"ta01", {{1486, 1454, 1486, 1454, 1486, 1639, 1486}, 1454}},
    {"ta11", {{1701, 1771, 1701, 1771, 1671, 1712, 1701}, 1671}},
    {"ta21", {{2089, 2114, 2089, 2114, 2111, 2016, 2089}, 2016}},
    {"ta31", {{2277, 2312, 2277, 2312, 2277, 2260, 2277}, 2260}},
    {"ta41", {{2543, 2661, 2543, 2661, 2543, 2634, 2543}, 2543}},
    {"ta51", {{3590, 3564, 3590, 3561, 3590, 3664, 3590}, 3496}},
    {"ta61", {{3690, 3619, 3690, 3619, 3690, 3572, 3690}, 3572}},
    {"ta71", {{6270, 6359, 6270, 6312, 6270, 6282, 6270}, 6248}},
};

constexpr double kBaselineTolerance = 0.03;
constexpr double kLearningTolerance = 0.02;
constexpr Time kTa01Reference = 1454;
constexpr double kSampleGreedyTolerance = 0.01;
constexpr long long kBudget = 200000;

int failures = 0;
bool rerun = false;  // determinism reruns compare outputs only

void report(int id, bool pass, const std::string& detail) {
  if (rerun) return;
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

jssp::JsspInstance load(const std::string& name) {
  return jssp::load_instance(name, jssp::default_data_dir());
}

Time rollout_constant(const jssp::JsspInstance& inst, Rule rule, int commitment) {
  env::SchedulingEnv env(inst, env::EnvConfig{env::Mode::kHyper, commitment});
  env.reset();
  while (!env.done()) env.step(heuristics::rule_index(rule));
  return env.clock();
}

// Criterion 1: FIFO, SPS and LWT coincide on every head instance.
std::string criterion1() {
  bool pass = true;
  double slowest = 0.0;
  std::ostringstream csv;
  for (const auto& name : kHeads) {
    const auto inst = load(name);
    const auto t0 = std::chrono::steady_clock::now();
    const Time fifo = heuristics::simulate_with_heuristic(inst, Rule::kFifo).makespan;
    const Time sps = heuristics::simulate_with_heuristic(inst, Rule::kSps).makespan;
    const Time lwt = heuristics::simulate_with_heuristic(inst, Rule::kLwt).makespan;
    const double elapsed = seconds_since(t0);
    slowest = std::max(slowest, elapsed);
    const Time reference = kReference.at(name).rules[0];
    if (fifo != sps || fifo != lwt || fifo != reference || elapsed >= 1.0) {
      pass = false;
      std::printf("  %s: FIFO %lld SPS %lld LWT %lld reference %lld (%.3f s)\n",
                  name.c_str(), static_cast<long long>(fifo),
                  static_cast<long long>(sps), static_cast<long long>(lwt),
                  static_cast<long long>(reference), elapsed);
    }
    csv << name << ',' << fifo << ',' << sps << ',' << lwt << '\n';
  }
  report(1, pass,
         "FIFO = SPS = LWT = reference column on 8 head instances, slowest " +
             fmt("%.3f", slowest) + " s per instance (limit 1 s)");
  return csv.str();
}

// Criterion 2: every rule within 3% of the reference value; best likewise.
std::string criterion2() {
  bench::RunConfig config;
  config.instances = kHeads;
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = bench::run_heuristics(config);
  const double elapsed = seconds_since(t0);
  bool pass = elapsed < 30.0;
  double worst = 0.0, worst_best = 0.0;
  int exact = 0;
  for (const auto& row : rows) {
    const auto& ref = kReference.at(row.instance);
    for (std::size_t i = 0; i < row.rules.size(); ++i) {
      const Time reference = ref.rules[heuristics::rule_index(row.rules[i])];
      const double dev = std::abs(static_cast<double>(row.makespans[i] - reference)) / reference;
      worst = std::max(worst, dev);
      exact += row.makespans[i] == reference;
      if (dev > kBaselineTolerance) {
        pass = false;
        std::printf("  %s %s: %lld vs %lld\n", row.instance.c_str(),
                    std::string(heuristics::rule_name(row.rules[i])).c_str(),
                    static_cast<long long>(row.makespans[i]),
                    static_cast<long long>(reference));
      }
    }
    const double dev_best =
        std::abs(static_cast<double>(row.best() - ref.best)) / ref.best;
    worst_best = std::max(worst_best, dev_best);
    if (dev_best > kBaselineTolerance) {
      pass = false;
      std::printf("  %s best: %lld vs %lld\n", row.instance.c_str(),
                  static_cast<long long>(row.best()), static_cast<long long>(ref.best));
    }
  }
  report(2, pass,
         std::to_string(exact) + "/56 rule makespans exact, worst deviation " +
             fmt("%.2f", worst * 100) + "%, worst best-heuristic deviation " +
             fmt("%.2f", worst_best * 100) + "% (limit 3%), " +
             fmt("%.2f", elapsed) + " s (limit 30 s)");
  return bench::heuristics_csv(rows);
}

// Criterion 3: constant hyper policies equal the heuristic rollouts.
std::string criterion3() {
  std::vector<jssp::JsspInstance> instances;
  for (const auto& name : kHeads) instances.push_back(load(name));
  for (int seed = 0; seed < 20; ++seed) {
    instances.push_back(jssp::random_instance(2 + seed % 7, 2 + seed % 5, 3000 + seed));
  }
  bool pass = true;
  int checks = 0;
  std::ostringstream csv;
  for (const auto& inst : instances) {
    for (auto rule : heuristics::kAllRules) {
      const Time expected = heuristics::simulate_with_heuristic(inst, rule).makespan;
      for (int x : {1, 5}) {
        const Time got = rollout_constant(inst, rule, x);
        ++checks;
        if (got != expected) {
          pass = false;
          std::printf("  %s %s x=%d: %lld vs %lld\n", inst.name().c_str(),
                      std::string(heuristics::rule_name(rule)).c_str(), x,
                      static_cast<long long>(got), static_cast<long long>(expected));
        }
        csv << inst.name() << ',' << heuristics::rule_name(rule) << ',' << x
            << ',' << got << '\n';
      }
    }
  }
  report(3, pass,
         std::to_string(checks) + " constant-rule hyper rollouts (28 instances, 7 rules, x in {1,5}) "
         "equal the heuristic rollouts");
  return csv.str();
}

// Criterion 4: random instances, random rules or random flat actions.
void criterion4() {
  Rng rng(4);
  const auto t0 = std::chrono::steady_clock::now();
  int violations = 0, mismatched = 0;
  for (int i = 0; i < 1000; ++i) {
    const int n = static_cast<int>(rng.uniform_int(1, 6));
    const int m = static_cast<int>(rng.uniform_int(1, 6));
    const auto inst = jssp::random_instance(n, m, 40000 + i);
    jssp::Schedule schedule;
    Time clock = 0;
    if (i % 2 == 0) {
      env::SchedulingEnv env(
          inst, env::EnvConfig{env::Mode::kHyper, static_cast<int>(rng.uniform_int(1, 4))});
      env.reset();
      while (!env.done()) env.step(static_cast<int>(rng.uniform_int(0, 6)));
      schedule = env.schedule();
      clock = env.clock();
    } else {
      const auto r = testing::random_flat_rollout(jssp::instance_to_net(inst), rng);
      schedule = r.schedule;
      clock = r.terminal.clock;
    }
    const auto report = jssp::validate_schedule(inst, schedule);
    violations += static_cast<int>(report.precedence_violations.size() +
                                   report.overlap_violations.size() +
                                   report.duration_violations.size());
    mismatched += report.makespan != clock;
  }
  const double elapsed = seconds_since(t0);
  report(4, violations == 0 && mismatched == 0 && elapsed < 10.0,
         "1000 random instances: " + std::to_string(violations) + " violations, " +
             std::to_string(mismatched) + " makespan/clock mismatches, " +
             fmt("%.2f", elapsed) + " s (limit 10 s)");
}

// Criterion 5: nothing beats the enumerated optimum on 3x3 instances.
void criterion5() {
  Rng rng(5);
  const auto t0 = std::chrono::steady_clock::now();
  int below = 0, headroom = 0, disagreements = 0;
  const int count = 100;
  for (int i = 0; i < count; ++i) {
    const auto inst = jssp::random_instance(3, 3, 50000 + i);
    const Time opt = testing::optimal_makespan_active(inst);
    disagreements += opt != testing::optimal_makespan_sequences(inst);
    Time best = std::numeric_limits<Time>::max();
    for (auto rule : heuristics::kAllRules) {
      const Time span = heuristics::simulate_with_heuristic(inst, rule).makespan;
      best = std::min(best, span);
      below += span < opt;
    }
    headroom += best > opt;
    for (int k = 0; k < 20; ++k) {
      env::SchedulingEnv env(inst);
      env.reset();
      while (!env.done()) env.step(static_cast<int>(rng.uniform_int(0, 6)));
      below += env.clock() < opt;
    }
  }
  const double elapsed = seconds_since(t0);
  report(5, below == 0 && headroom > 0 && disagreements == 0 && elapsed < 60.0,
         std::to_string(count) + " random 3x3 instances: " + std::to_string(below) +
             " rollouts below the optimum, best heuristic above optimum on " +
             std::to_string(headroom) + ", oracle disagreements " +
             std::to_string(disagreements) + ", " + fmt("%.2f", elapsed) + " s");
}

// Criterion 6: analytic loss gradient vs central differences; GAE limits.
void criterion6() {
  Rng rng(6);
  double worst = 0.0;
  for (int net = 0; net < 20; ++net) {
    const int obs = static_cast<int>(rng.uniform_int(2, 6));
    const int actions = static_cast<int>(rng.uniform_int(2, 7));
    auto params = agent::make_policy(obs, actions, {8, 6}, 600 + net);
    Rng init(net);
    params.actor.init(init, 1.0, 1.0);
    agent::PpoConfig config;

    std::vector<std::vector<double>> observations(10);
    std::vector<agent::ActionMask> masks(10);
    std::vector<agent::Sample> batch;
    for (int i = 0; i < 10; ++i) {
      for (int k = 0; k < obs; ++k) observations[i].push_back(rng.normal());
      masks[i].assign(actions, 1);
      masks[i][rng.uniform_int(0, actions - 1)] = rng.uniform01() < 0.5;
      int a = 0;
      do a = static_cast<int>(rng.uniform_int(0, actions - 1)); while (!masks[i][a]);
      const double lp = agent::forward(params, observations[i], masks[i]).distribution.log_probs[a];
      // Interior or far outside the clip range, away from its kinks.
      const double shifts[] = {0.0, 0.1, -0.1, 0.6, -0.6};
      batch.push_back(agent::Sample{observations[i], masks[i], a,
                                    lp - std::log1p(shifts[rng.uniform_int(0, 4)]),
                                    rng.normal(), rng.normal()});
    }
    const auto analytic = agent::ppo_loss(params, batch, config);
    const double h = 1e-6;
    const auto check = [&](std::span<double> p, const std::vector<double>& g) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double saved = p[i];
        p[i] = saved + h;
        const double up = agent::ppo_loss(params, batch, config).loss;
        p[i] = saved - h;
        const double down = agent::ppo_loss(params, batch, config).loss;
        p[i] = saved;
        const double numeric = (up - down) / (2 * h);
        const double scale = std::max({std::abs(numeric), std::abs(g[i]), 1e-6});
        worst = std::max(worst, std::abs(numeric - g[i]) / scale);
      }
    };
    check(params.actor.params(), analytic.gradient.actor);
    check(params.critic.params(), analytic.gradient.critic);
  }

  double gae_error = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(1, 30));
    std::vector<double> r(n), v(n);
    std::vector<std::uint8_t> d(n, 0);
    for (int t = 0; t < n; ++t) {
      r[t] = rng.normal();
      v[t] = rng.normal();
      d[t] = rng.uniform01() < 0.2;
    }
    const double gamma = rng.uniform01();
    const double last = rng.normal();
    const auto td = agent::compute_gae(r, v, d, gamma, 0.0, last);
    for (int t = 0; t < n; ++t) {
      const double next = d[t] ? 0.0 : (t + 1 < n ? v[t + 1] : last);
      gae_error = std::max(gae_error, std::abs(td.advantages[t] - (r[t] + gamma * next - v[t])));
    }
    const auto mc = agent::compute_gae(r, v, d, gamma, 1.0, last);
    for (int t = 0; t < n; ++t) {
      double ret = 0.0, discount = 1.0;
      int k = t;
      for (; k < n; ++k) {
        ret += discount * r[k];
        discount *= gamma;
        if (d[k]) break;
      }
      if (k == n) ret += discount * last;
      gae_error = std::max(gae_error, std::abs(mc.advantages[t] - (ret - v[t])));
    }
  }
  report(6, worst < 1e-4 && gae_error <= 1e-12,
         "max relative gradient error " + fmt("%.2e", worst) +
             " over 20 nets (limit 1e-4), GAE lambda 0/1 max error " +
             fmt("%.2e", gae_error) + " (limit 1e-12)");
}

struct Trained {
  bench::TrainedRun run;
  double seconds = 0.0;
};

Trained train(const jssp::JsspInstance& inst, int commitment, std::uint64_t seed,
              const std::filesystem::path& out) {
  bench::RunConfig config;
  config.ppo.total_decisions = kBudget;
  config.out_dir = out;
  const auto t0 = std::chrono::steady_clock::now();
  Trained t{bench::train_one(inst, commitment, seed, config), 0.0};
  t.seconds = seconds_since(t0);
  std::printf("  trained x=%d seed=%llu: greedy %lld in %.1f s\n", commitment,
              static_cast<unsigned long long>(seed),
              static_cast<long long>(t.run.row.makespan), t.seconds);
  std::fflush(stdout);
  return t;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

int main() {
  const auto work = std::filesystem::temp_directory_path() / "petrihh_acceptance";
  std::filesystem::remove_all(work);

  const std::string csv1 = criterion1();
  const std::string csv2 = criterion2();
  const std::string csv3 = criterion3();
  criterion4();
  criterion5();
  criterion6();

  const auto ta01 = load("ta01");
  const Trained first = train(ta01, 5, 0, work / "run1");
  const Time limit7 = kTa01Reference;
  report(7, first.run.row.makespan <= limit7 * (1 + kLearningTolerance) && first.seconds <= 900,
         "ta01 hyper x=5 seed 0, 2e5 decisions: greedy " +
             std::to_string(first.run.row.makespan) + " (limit " +
             fmt("%.2f", limit7 * (1 + kLearningTolerance)) + "), " +
             fmt("%.1f", first.seconds) + " s (limit 900 s)");

  // Criterion 8: equal budgets, three seeds per commitment length.
  std::vector<Time> x5{first.run.row.makespan}, x1000;
  for (std::uint64_t seed : {1, 2}) x5.push_back(train(ta01, 5, seed, work / "ablate").run.row.makespan);
  for (std::uint64_t seed : {0, 1, 2}) x1000.push_back(train(ta01, 1000, seed, work / "ablate").run.row.makespan);
  std::set<Time> static_spans;
  for (auto rule : heuristics::kAllRules) {
    static_spans.insert(heuristics::simulate_with_heuristic(ta01, rule).makespan);
  }
  const double mean5 = std::accumulate(x5.begin(), x5.end(), 0.0) / x5.size();
  const double mean1000 = std::accumulate(x1000.begin(), x1000.end(), 0.0) / x1000.size();
  const bool members = std::all_of(x1000.begin(), x1000.end(),
                                   [&](Time t) { return static_spans.count(t) > 0; });
  report(8, mean5 <= mean1000 && members,
         "ta01 mean greedy makespan x=5 " + fmt("%.1f", mean5) + " vs x=1000 " +
             fmt("%.1f", mean1000) + "; x=1000 results " +
             (members ? "are" : "are not") + " static-rule makespans");

  // Criterion 9: greedy vs median of 10 samples on the seed-0 policy.
  const env::EnvConfig env_config{env::Mode::kHyper, 5};
  const auto greedy = bench::evaluate_policy(first.run.training.params, ta01, env_config,
                                             agent::SelectionMode::kGreedy, 1, 0);
  const auto sampled = bench::evaluate_policy(first.run.training.params, ta01, env_config,
                                              agent::SelectionMode::kSample, 10, 0);
  const double diff = std::abs(greedy.min - sampled.median);
  report(9, diff <= kSampleGreedyTolerance * greedy.min,
         "greedy " + std::to_string(greedy.min) + ", median of 10 samples " +
             fmt("%.1f", sampled.median) + ", difference " +
             fmt("%.2f", 100.0 * diff / greedy.min) + "% (limit 1%)");

  // Criterion 10: rerun 1-3 and 7, compare result files byte for byte.
  rerun = true;
  const bool same1 = criterion1() == csv1;
  const bool same2 = criterion2() == csv2;
  const bool same3 = criterion3() == csv3;
  const Trained second = train(ta01, 5, 0, work / "run2");
  const auto stem = bench::run_stem("ta01", env::Mode::kHyper, 5, 0);
  const bool same7 =
      bench::results_csv({first.run.row}) == bench::results_csv({second.run.row}) &&
      slurp(work / "run1" / ("training_log_" + stem + ".csv")) ==
          slurp(work / "run2" / ("training_log_" + stem + ".csv")) &&
      slurp(first.run.checkpoint) == slurp(second.run.checkpoint);
  rerun = false;
  report(10, same1 && same2 && same3 && same7,
         std::string("identical reruns: criterion 1 ") + (same1 ? "yes" : "no") +
             ", 2 " + (same2 ? "yes" : "no") + ", 3 " + (same3 ? "yes" : "no") +
             ", 7 (results, training log, checkpoint) " + (same7 ? "yes" : "no"));

  std::filesystem::remove_all(work);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
