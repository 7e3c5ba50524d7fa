#include <algorithm>
#include <map>
#include <sstream>

#include "doctest.h"
#include "ecmws/orchestrator.hpp"
#include "ecmws/workload.hpp"
#include "test_support.hpp"

using namespace ecmws;

namespace {

std::vector<Workflow> stream(std::uint64_t seed, int workflows, int tasks, double horizon) {
  std::mt19937_64 rng(seed);
  std::vector<Workflow> out;
  for (int w = 0; w < workflows; ++w) {
    const double submit = static_cast<double>(rng() % static_cast<std::uint64_t>(horizon));
    out.push_back(testing::random_dag(rng, tasks, 0.3, w, submit, submit + 3000.0));
  }
  return out;
}

std::string csv_of(const RunResult& r) {
  std::ostringstream out;
  write_assignment_csv(out, r.log);
  return out.str();
}

const ActorCriticSpec kSmallNet{{32, 16}, 16};

}  // namespace

TEST_CASE("config json") {
  EcmwsConfig c;
  c.tau = 300.0;
  c.strategy = TaskSorting::kUpwardRank;
  c.conf_thresh = 0.8;
  const auto back = config_from_json(to_json(c));
  CHECK(back.tau == 300.0);
  CHECK(back.strategy == TaskSorting::kUpwardRank);
  CHECK(back.conf_thresh == 0.8);
  CHECK(config_from_json(Json::object()).beta == 4.0);
  EcmwsConfig bad;
  bad.tau = 0.0;
  CHECK_THROWS(bad.validate());
  bad = EcmwsConfig{};
  bad.conf_thresh = 1.5;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("planner slots are half-open") {
  const auto topo = testing::uniform_topology(1, 1, 2, 1000.0, 100.0);
  const std::vector<double> one{1000.0};
  const std::vector<Workflow> wfs{
      Workflow(0, 599.9, 5000.0, one, {}),
      Workflow(1, 600.0, 5000.0, one, {}),
      Workflow(2, 0.0, 5000.0, one, {}),
      Workflow(3, 86400.0, 90000.0, one, {}),
  };
  const auto plan = plan_schedule(EcmwsConfig{}, topo, wfs);
  CHECK(plan.slot_end[0] == 600.0);
  CHECK(plan.slot_end[1] == 1200.0);
  CHECK(plan.slot_end[2] == 600.0);
  CHECK(plan.rejected == std::vector<std::size_t>{3});
  CHECK(plan.accepted.size() == 3);
  CHECK(plan.decisions.size() == 3);
  CHECK(plan.accepted.back() == 1);
}

TEST_CASE("planner decision order") {
  const auto topo = testing::example_topology();
  const auto wfs = stream(3, 12, 8, 5000.0);
  for (auto strategy : {TaskSorting::kDownwardRank, TaskSorting::kUpwardRank,
                        TaskSorting::kBottleneckRank}) {
    EcmwsConfig c;
    c.strategy = strategy;
    const auto plan = plan_schedule(c, topo, wfs);
    CHECK(plan.decisions.size() == 96);
    std::map<std::size_t, std::vector<int>> seen;
    for (std::size_t i = 0; i < plan.decisions.size(); ++i) {
      const auto& d = plan.decisions[i];
      if (i > 0) CHECK(d.clock >= plan.decisions[i - 1].clock);
      CHECK(d.clock == plan.slot_end[d.workflow]);
      CHECK(d.clock > wfs[d.workflow].submit());
      CHECK(d.clock - c.tau <= wfs[d.workflow].submit());
      // Every predecessor is decided first.
      for (int p : wfs[d.workflow].task(d.task).preds) {
        const auto& done = seen[d.workflow];
        CHECK(std::find(done.begin(), done.end(), p) != done.end());
      }
      seen[d.workflow].push_back(d.task);
    }
    // Workflows are not interleaved.
    std::vector<std::size_t> order;
    for (const auto& d : plan.decisions) {
      if (order.empty() || order.back() != d.workflow) order.push_back(d.workflow);
    }
    CHECK(order == plan.accepted);
  }
}

TEST_CASE("empty stream costs nothing") {
  const auto topo = testing::example_topology();
  for (auto algo : {Algorithm::kEcmws, Algorithm::kDara, Algorithm::kHeft, Algorithm::kGreedy}) {
    const auto r = run_algorithm(algo, EcmwsConfig{}, topo, {});
    CHECK(r.z == 0.0);
    CHECK(r.log.empty());
  }
}

TEST_CASE("a single task costs its own energy") {
  const auto topo = testing::uniform_topology(2, 1, 2, 1000.0, 100.0);
  const std::vector<Workflow> wfs{Workflow(0, 100.0, 5000.0, {1000.0}, {})};
  for (auto algo : {Algorithm::kEcmws, Algorithm::kDara, Algorithm::kHeft, Algorithm::kGreedy}) {
    const auto r = run_algorithm(algo, EcmwsConfig{}, topo, wfs);
    REQUIRE(r.log.size() == 1);
    CHECK(r.log[0].start >= 600.0);
    CHECK(r.log[0].finish - r.log[0].start == doctest::Approx(1.0));
    // 100 W for 1 s at 0.16 per kWh.
    CHECK(r.z == doctest::Approx(100.0 * 0.16 / 3.6e6));
    CHECK(r.feasibility.size() == 1);
    CHECK(r.feasibility[0].met);
  }
}

TEST_CASE("late submissions are rejected") {
  const auto topo = testing::example_topology();
  EcmwsConfig c;
  c.t_term = 3600.0;
  const std::vector<Workflow> wfs{Workflow(4, 100.0, 5000.0, {1000.0}, {}),
                                  Workflow(9, 3600.0, 9000.0, {1000.0}, {})};
  for (auto algo : {Algorithm::kEcmws, Algorithm::kDara, Algorithm::kHeft, Algorithm::kGreedy}) {
    const auto r = run_algorithm(algo, c, topo, wfs);
    CHECK(r.rejected == std::vector<int>{9});
    REQUIRE(r.log.size() == 1);
    CHECK(r.log[0].task.workflow == 4);
  }
}

TEST_CASE("schedules respect precedence, slots and server exclusivity") {
  const auto topo = testing::example_topology(0.3);
  const auto wfs = stream(5, 10, 10, 7200.0);
  const auto plan = plan_schedule(EcmwsConfig{}, topo, wfs);
  std::map<int, double> slot_end;
  for (std::size_t w = 0; w < wfs.size(); ++w) slot_end[wfs[w].id()] = plan.slot_end[w];
  const auto bundle = PolicyBundle::create(topo, EcmwsConfig{}, 3, kSmallNet);
  for (auto algo : {Algorithm::kEcmws, Algorithm::kDara, Algorithm::kHeft, Algorithm::kGreedy}) {
    INFO(to_string(algo));
    EcmwsConfig c;
    c.conf_thresh = 0.0;
    const auto r = run_algorithm(algo, c, topo, wfs, &bundle);
    REQUIRE(r.log.size() == 100);
    std::map<TaskRef, Assignment> by_task;
    double total = 0.0;
    for (const auto& a : r.log) {
      by_task[a.task] = a;
      total += a.cost;
      CHECK(a.start >= slot_end[a.task.workflow] - 1e-9);
      CHECK(a.cost == doctest::Approx(cost_integral(topo, a.server, a.start, a.finish)));
    }
    CHECK(r.z == doctest::Approx(total));
    for (const auto& wf : wfs) {
      for (const auto& t : wf.tasks()) {
        const auto& a = by_task.at({wf.id(), t.id});
        for (int p : t.preds) CHECK(a.start >= by_task.at({wf.id(), p}).finish - 1e-9);
      }
    }
    std::map<ServerRef, std::vector<std::pair<double, double>>> busy;
    for (const auto& a : r.log) busy[a.server].push_back({a.start, a.finish});
    for (auto& [ref, spans] : busy) {
      std::sort(spans.begin(), spans.end());
      for (std::size_t i = 1; i < spans.size(); ++i) CHECK(spans[i].first >= spans[i - 1].second - 1e-9);
    }
  }
}

TEST_CASE("confidence threshold") {
  const auto topo = testing::example_topology();
  const auto wfs = stream(7, 6, 6, 4000.0);
  const auto bundle = PolicyBundle::create(topo, EcmwsConfig{}, 11, kSmallNet);
  EcmwsConfig c;

  c.conf_thresh = 0.0;
  const auto always = run_algorithm(Algorithm::kEcmws, c, topo, wfs, &bundle);
  CHECK(always.policy_decisions == 36);
  CHECK(always.reserve_decisions == 0);

  c.conf_thresh = 1.0;
  const auto never = run_algorithm(Algorithm::kEcmws, c, topo, wfs, &bundle);
  CHECK(never.policy_decisions == 0);
  const auto dara = run_algorithm(Algorithm::kDara, c, topo, wfs);
  const auto fallback = run_algorithm(Algorithm::kEcmws, c, topo, wfs, nullptr);
  CHECK(csv_of(never) == csv_of(dara));
  CHECK(csv_of(fallback) == csv_of(dara));
  CHECK(never.z == dara.z);
}

TEST_CASE("runs are deterministic") {
  const auto topo = reference_topology(2, 3, 4);
  GenSpec g;
  g.workflows = 8;
  g.tasks = 12;
  g.t_term = 7200.0;
  const auto wfs = generate(g, topo);
  const auto bundle = PolicyBundle::create(topo, EcmwsConfig{}, 2, kSmallNet);
  EcmwsConfig c;
  c.t_term = 7200.0;
  c.conf_thresh = 0.2;
  for (auto algo : {Algorithm::kEcmws, Algorithm::kDara, Algorithm::kHeft, Algorithm::kGreedy}) {
    const auto a = run_algorithm(algo, c, topo, wfs, &bundle);
    const auto b = run_algorithm(algo, c, topo, wfs, &bundle);
    CHECK(csv_of(a) == csv_of(b));
    CHECK(a.z == b.z);
  }
}

TEST_CASE("policy bundle json") {
  const auto topo = testing::example_topology();
  EcmwsConfig c;
  c.beta = 2.0;
  const auto bundle = PolicyBundle::create(topo, c, 5, kSmallNet);
  const Json j = to_json(bundle);
  const auto back = bundle_from_json(Json::parse(j.dump()), topo);
  CHECK(back.config.beta == 2.0);
  CHECK(back.spec.encoder == kSmallNet.encoder);
  CHECK(to_json(back).dump() == j.dump());

  const auto wfs = stream(1, 4, 5, 3000.0);
  EcmwsConfig run = c;
  run.conf_thresh = 0.0;
  CHECK(csv_of(run_algorithm(Algorithm::kEcmws, run, topo, wfs, &bundle)) ==
        csv_of(run_algorithm(Algorithm::kEcmws, run, topo, wfs, &back)));

  CHECK_THROWS(bundle_from_json(j, testing::uniform_topology(2, 2, 2, 1000.0, 100.0)));
  Json wrong = j;
  wrong["format"] = "other";
  CHECK_THROWS(bundle_from_json(wrong, topo));
}

TEST_CASE("algorithm names") {
  for (auto a : {Algorithm::kEcmws, Algorithm::kDara, Algorithm::kHeft, Algorithm::kGreedy}) {
    CHECK(algorithm_from_string(to_string(a)) == a);
  }
  CHECK_THROWS(algorithm_from_string("random"));
}

TEST_CASE("run manifest") {
  const auto topo = testing::example_topology();
  const auto wfs = stream(2, 3, 4, 3000.0);
  const auto r = run_algorithm(Algorithm::kDara, EcmwsConfig{}, topo, wfs);
  const Json m = run_manifest(r, EcmwsConfig{}, wfs);
  CHECK(m.at("algorithm") == "dara");
  CHECK(m.at("z").get<double>() == r.z);
  CHECK(m.contains("config"));
}
