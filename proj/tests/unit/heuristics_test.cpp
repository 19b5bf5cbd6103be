#include <map>
#include <numeric>

#include "doctest.h"
#include "petrihh/heuristics.hpp"
#include "support/optimum.hpp"

using namespace petrihh;
using namespace petrihh::heuristics;

namespace {

ActionContext action(int transition, Time p_next, Time work_remaining = 0,
                     Time ready_time = 0) {
  ActionContext a;
  a.transition = transition;
  a.job = transition;
  a.p_next = p_next;
  a.work_remaining = work_remaining;
  a.total_work = work_remaining;
  a.ready_time = ready_time;
  a.ops_remaining = 1;
  a.seq_length = 1;
  return a;
}

Time run(const jssp::JsspInstance& inst, Rule rule,
         KeyConvention conv = KeyConvention::kAggregate) {
  return simulate_with_heuristic(inst, rule, conv).makespan;
}

}  // namespace

TEST_CASE("textbook SPT picks the shortest next operation") {
  DispatchContext ctx{0, {action(0, 4), action(1, 2), action(2, 9)}};
  CHECK(select(Rule::kSpt, ctx, KeyConvention::kTextbook) == 1);
  CHECK(select(Rule::kLptn, ctx) == 2);
}

TEST_CASE("ties go to the lowest transition id") {
  DispatchContext ctx{0, {action(5, 1, 8), action(3, 1, 8), action(4, 1, 2)}};
  CHECK(select(Rule::kLtwr, ctx, KeyConvention::kTextbook) == 3);
  CHECK(select(Rule::kFifo, ctx) == 3);
}

TEST_CASE("LWT prefers the longest wait") {
  DispatchContext ctx{10, {action(0, 1, 1, 7), action(1, 1, 1, 3)}};
  CHECK(select(Rule::kLwt, ctx) == 1);
  CHECK(select(Rule::kFifo, ctx) == 1);
}

TEST_CASE("a single valid action is forced under every rule") {
  DispatchContext ctx{4, {action(6, 3, 3, 2)}};
  for (auto rule : kAllRules) {
    for (auto conv : {KeyConvention::kAggregate, KeyConvention::kTextbook}) {
      CHECK(select(rule, ctx, conv) == 6);
    }
  }
}

TEST_CASE("empty action set is an error") {
  CHECK_THROWS_AS(select(Rule::kSpt, DispatchContext{}), EmptyMaskError);
}

TEST_CASE("SPT and LPTN diverge on a shared first machine") {
  // Both jobs start on M0; job1's first operation is the short one.
  const auto inst = jssp::parse_taillard("2 2\n3 2\n1 4\n1 2\n1 2");
  CHECK(run(inst, Rule::kSpt, KeyConvention::kTextbook) == 7);
  CHECK(run(inst, Rule::kLptn) == 9);
  CHECK(testing::optimal_makespan_active(inst) == 7);
}

TEST_CASE("build_context reads the marking") {
  const auto inst = jssp::parse_taillard("2 2\n3 2\n1 4\n1 2\n1 2");
  const auto c = jssp::instance_to_net(inst);
  const auto m = petri::run_autonomous(c.net, c.initial);
  const auto ctx = build_context(c, m, petri::guard_mask(c.net, m));
  REQUIRE(ctx.actions.size() == 2);
  const auto& a = ctx.actions[1];
  CHECK(a.job == 1);
  CHECK(a.machine == 0);
  CHECK(a.p_next == 1);
  CHECK(a.ops_remaining == 2);
  CHECK(a.work_remaining == 5);
  CHECK(a.seq_length == 2);
  CHECK(a.total_work == 5);
  CHECK(a.ready_time == 0);
}

TEST_CASE("ready times coincide with the clock, so FIFO, SPS and LWT agree") {
  for (int seed = 0; seed < 40; ++seed) {
    const auto inst = jssp::random_instance(2 + seed % 6, 2 + seed % 4, seed);
    const Time fifo = run(inst, Rule::kFifo);
    CHECK(run(inst, Rule::kSps) == fifo);
    CHECK(run(inst, Rule::kLwt) == fifo);
  }
}

TEST_CASE("rule names") {
  for (auto rule : kAllRules) {
    CHECK(parse_rule(rule_name(rule)) == rule);
    CHECK(rule_from_index(rule_index(rule)) == rule);
  }
  CHECK(parse_rule("ltwr") == Rule::kLtwr);
  CHECK_FALSE(parse_rule("EDD").has_value());
  CHECK(parse_convention("textbook") == KeyConvention::kTextbook);
}

TEST_CASE("rollouts are deterministic and feasible") {
  const auto inst = jssp::random_instance(8, 5, 3);
  for (auto rule : kAllRules) {
    const auto a = simulate_with_heuristic(inst, rule);
    const auto b = simulate_with_heuristic(inst, rule);
    CHECK(a.makespan == b.makespan);
    CHECK(a.decisions == inst.total_operations());
    const auto report = jssp::validate_schedule(inst, a.schedule);
    CHECK(report.feasible());
    CHECK(report.makespan == a.makespan);
  }
}

TEST_CASE("best rule is never worse than the average rule") {
  for (int seed = 0; seed < 20; ++seed) {
    const auto inst = jssp::random_instance(6, 4, 100 + seed);
    std::vector<Time> spans;
    for (auto rule : kAllRules) spans.push_back(run(inst, rule));
    const double mean =
        std::accumulate(spans.begin(), spans.end(), 0.0) / spans.size();
    CHECK(*std::min_element(spans.begin(), spans.end()) <= mean);
  }
}

TEST_CASE("ta01 makespans per rule") {
  const auto inst = jssp::load_instance("ta01", jssp::default_data_dir());
  const std::map<Rule, Time> expected = {
      {Rule::kFifo, 1486}, {Rule::kSpt, 1454},  {Rule::kSps, 1486},
      {Rule::kLtwr, 1454}, {Rule::kSpsr, 1486}, {Rule::kLptn, 1639},
      {Rule::kLwt, 1486}};
  for (const auto& [rule, span] : expected) {
    CAPTURE(rule_name(rule));
    CHECK(run(inst, rule) == span);
  }
}
