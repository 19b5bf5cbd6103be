// Command-line front end: heuristics, train, ablate-commitment, eval.
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "petrihh/bench.hpp"

using namespace petrihh;

namespace {

struct Flags {
  std::vector<std::string> instances;
  std::vector<std::string> rules;
  std::string mode = "hyper";
  std::vector<int> commit;
  double steps = 2e5;
  std::vector<std::uint64_t> seeds;
  std::string select = "greedy";
  std::string out = "results";
  std::string data_dir;
  std::string convention = "aggregate";
  int samples = 10;
  std::string checkpoint;
  bool trace = false;
  double lr = 0.0;
  double entropy = -1.0;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--instances", f.instances, "Instance names or paths")
      ->delimiter(',');
  cmd->add_option("--out", f.out, "Output directory")->capture_default_str();
  cmd->add_option("--data-dir", f.data_dir, "Directory holding <name>.txt instances");
  cmd->add_option("--convention", f.convention, "Rule keys: aggregate or textbook")
      ->capture_default_str();
}

void add_training(CLI::App* cmd, Flags& f) {
  cmd->add_option("--mode", f.mode, "hyper or flat")->capture_default_str();
  cmd->add_option("--commit", f.commit, "Commitment length(s)")->delimiter(',');
  cmd->add_option("--steps", f.steps, "Training budget in decisions")
      ->capture_default_str();
  cmd->add_option("--seed", f.seeds, "Seed(s)")->delimiter(',');
  cmd->add_option("--lr", f.lr, "Learning rate override");
  cmd->add_option("--entropy-coef", f.entropy, "Entropy coefficient override");
}

bench::RunConfig to_config(const Flags& f) {
  bench::RunConfig c;
  if (!f.instances.empty()) c.instances = f.instances;
  if (!f.rules.empty()) {
    c.rules.clear();
    for (const auto& name : f.rules) {
      auto rule = heuristics::parse_rule(name);
      if (!rule) throw CLI::ValidationError("--rules", "unknown rule " + name);
      c.rules.push_back(*rule);
    }
  }
  auto mode = env::parse_mode(f.mode);
  if (!mode) throw CLI::ValidationError("--mode", "expected hyper or flat");
  c.mode = *mode;
  auto conv = heuristics::parse_convention(f.convention);
  if (!conv) throw CLI::ValidationError("--convention", "expected aggregate or textbook");
  c.convention = *conv;
  auto select = agent::parse_selection(f.select);
  if (!select) throw CLI::ValidationError("--select", "expected greedy or sample");
  c.selection = *select;
  c.commitments = f.commit;
  if (!f.seeds.empty()) c.seeds = f.seeds;
  c.ppo.total_decisions = static_cast<long long>(f.steps);
  if (f.lr > 0.0) c.ppo.learning_rate = f.lr;
  if (f.entropy >= 0.0) c.ppo.entropy_coef = f.entropy;
  c.samples = f.samples;
  c.out_dir = f.out;
  if (!f.data_dir.empty()) c.data_dir = f.data_dir;
  if (!f.checkpoint.empty()) c.checkpoint = f.checkpoint;
  c.export_trace = f.trace;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Petri-net job-shop scheduler with dispatching rules and a PPO hyper-heuristic"};
  app.require_subcommand(1);
  Flags f;

  auto* heur = app.add_subcommand("heuristics", "Makespan of each dispatching rule");
  add_common(heur, f);
  heur->add_option("--rules", f.rules, "Subset of FIFO,SPT,SPS,LTWR,SPSR,LPTN,LWT")
      ->delimiter(',');

  auto* train = app.add_subcommand("train", "Train a policy per instance and seed");
  add_common(train, f);
  add_training(train, f);

  auto* ablate = app.add_subcommand("ablate-commitment",
                                    "Train across commitment lengths and seeds");
  add_common(ablate, f);
  add_training(ablate, f);

  auto* eval = app.add_subcommand("eval", "Roll out a trained checkpoint");
  add_common(eval, f);
  eval->add_option("--checkpoint", f.checkpoint, "Checkpoint file")->required();
  eval->add_option("--commit", f.commit, "Commitment length (default: checkpoint's)")
      ->expected(1);
  eval->add_option("--select", f.select, "greedy or sample")->capture_default_str();
  eval->add_option("--samples", f.samples, "Draws when sampling")->capture_default_str();
  eval->add_option("--seed", f.seeds, "Sampling seed")->expected(1);
  eval->add_flag("--trace", f.trace, "Write trace.csv, gantt.csv, schedule.csv and net.dot");

  CLI11_PARSE(app, argc, argv);

  try {
    bench::RunConfig config = to_config(f);
    if (heur->parsed()) {
      if (f.instances.empty()) {
        config.instances = {"ta01", "ta11", "ta21", "ta31",
                            "ta41", "ta51", "ta61", "ta71"};
      }
      return bench::cmd_heuristics(config);
    }
    if (train->parsed()) {
      if (config.commitments.empty()) config.commitments = {5};
      return bench::cmd_train(config);
    }
    if (ablate->parsed()) {
      if (config.commitments.empty()) config.commitments = {1, 5, 1000};
      if (f.seeds.empty()) config.seeds = {0, 1, 2};
      return bench::cmd_ablate_commitment(config);
    }
    if (f.instances.empty()) config.instances.clear();  // take the checkpoint's
    return bench::cmd_eval(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
