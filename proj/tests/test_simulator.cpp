#include <cmath>

#include "doctest.h"

#include "amr/simulator.hpp"
#include "support/oracles.hpp"

namespace {

amr::SimConfig fast_config() {
  amr::SimConfig cfg;
  cfg.ts_iterations = 60;
  cfg.seed_tabu = 3;
  cfg.seed_sim = 4;
  return cfg;
}

}  // namespace

TEST_CASE("a fully static instance reduces to the prior plan") {
  amr::StaticInstance inst = support::clustered_instance(12, 6);
  const amr::DynamicInstance dyn = amr::dynamize(inst, 0.0, 0.5, 1);
  const amr::SimConfig cfg = fast_config();
  const amr::SimMetrics m = amr::run(dyn, cfg);
  CHECK(m.n_dynamic == 0);
  CHECK(m.timeline.empty());
  CHECK(m.tau == 1.0);
  CHECK(m.tau_vacuous);
  CHECK(m.cost.total() == doctest::Approx(m.stage1_cost));
}

TEST_CASE("the fleet cap follows the dynamic degree") {
  amr::StaticInstance inst = support::clustered_instance(20, 14);
  const amr::DynamicInstance dyn = amr::dynamize(inst, 0.5, 0.5, 2);
  amr::SimConfig cfg = fast_config();
  SUBCASE("derived from the stage-1 fleet") {
    const amr::SimMetrics m = amr::run(dyn, cfg);
    CHECK(m.amr_cap ==
          static_cast<int>(std::ceil(m.stage1_amrs / (1.0 - dyn.delta))));
  }
  SUBCASE("fixed by configuration") {
    cfg.m_policy = amr::MPolicy::Fixed;
    cfg.fixed_m = 7;
    const amr::SimMetrics m = amr::run(dyn, cfg);
    CHECK(m.amr_cap == 7);
  }
}

TEST_CASE("a reachable mandatory arrival is always served") {
  amr::StaticInstance inst = support::wide_instance(10, 44);
  amr::DynamicInstance dyn = amr::dynamize(inst, 0.1, 1.0, 3);
  REQUIRE(dyn.events.size() == 1);
  REQUIRE(dyn.events[0].priority == amr::Priority::High);
  const amr::SimMetrics m = amr::run(dyn, fast_config());
  CHECK(m.tau == 1.0);
  CHECK(!m.tau_vacuous);
  CHECK(m.n_served_dynamic == 1);
  CHECK(m.n_rejected == 0);
}

TEST_CASE("replay is deterministic for fixed seeds") {
  amr::StaticInstance inst = support::clustered_instance(16, 27);
  const amr::DynamicInstance dyn = amr::dynamize(inst, 0.4, 0.5, 9);
  const amr::SimConfig cfg = fast_config();
  const amr::SimMetrics a = amr::run(dyn, cfg);
  const amr::SimMetrics b = amr::run(dyn, cfg);
  CHECK(a.cost.total() == doctest::Approx(b.cost.total()).epsilon(1e-12));
  CHECK(a.tau == b.tau);
  REQUIRE(a.timeline.size() == b.timeline.size());
  for (std::size_t i = 0; i < a.timeline.size(); ++i) {
    CHECK(a.timeline[i].req == b.timeline[i].req);
    CHECK(a.timeline[i].action == b.timeline[i].action);
    CHECK(a.timeline[i].route == b.timeline[i].route);
    CHECK(a.timeline[i].marginal_cost ==
          doctest::Approx(b.timeline[i].marginal_cost).epsilon(1e-12));
  }
  REQUIRE(a.final_solution.routes.size() == b.final_solution.routes.size());
  for (std::size_t k = 0; k < a.final_solution.routes.size(); ++k) {
    CHECK(a.final_solution.routes[k].stops ==
          b.final_solution.routes[k].stops);
  }
}

TEST_CASE("decision epochs never run backwards") {
  amr::StaticInstance inst = support::clustered_instance(20, 31);
  const amr::DynamicInstance dyn = amr::dynamize(inst, 0.5, 0.5, 8);
  const amr::SimMetrics m = amr::run(dyn, fast_config());
  double last = 0.0;
  for (const auto& rec : m.timeline) {
    CHECK(rec.t >= last);
    last = rec.t;
  }
}

TEST_CASE("final cost closes against the recorded marginal costs") {
  amr::StaticInstance inst = support::clustered_instance(18, 73);
  const amr::DynamicInstance dyn = amr::dynamize(inst, 0.4, 0.5, 21);
  const amr::SimMetrics m = amr::run(dyn, fast_config());
  double acc = m.stage1_cost;
  for (const auto& rec : m.timeline) acc += rec.marginal_cost;
  CHECK(m.cost.total() == doctest::Approx(acc).epsilon(1e-6));
}

TEST_CASE("single sweep cell agrees with a direct run") {
  amr::StaticInstance inst = support::clustered_instance(14, 11);
  amr::SimConfig cfg = fast_config();
  const auto rows =
      amr::sweep_safety_stock({inst}, {0.2}, {0.3}, 0.5, 17, cfg, 1);
  REQUIRE(rows.size() == 1);
  cfg.psi = 0.2;
  const amr::DynamicInstance dyn = amr::dynamize(inst, 0.3, 0.5, 17);
  const amr::SimMetrics direct = amr::run(dyn, cfg);
  CHECK(rows[0].tau == doctest::Approx(direct.tau));
  CHECK(rows[0].cost.total() == doctest::Approx(direct.cost.total()));
  CHECK(rows[0].psi == 0.2);
  CHECK(rows[0].delta == 0.3);
}

TEST_CASE("parallel sweep matches the sequential result") {
  amr::StaticInstance inst = support::clustered_instance(12, 51);
  const amr::SimConfig cfg = fast_config();
  const auto seq = amr::sweep_safety_stock({inst}, {0.0, 0.4}, {0.2, 0.5},
                                           0.5, 13, cfg, 1);
  const auto par = amr::sweep_safety_stock({inst}, {0.0, 0.4}, {0.2, 0.5},
                                           0.5, 13, cfg, 4);
  REQUIRE(seq.size() == par.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    CHECK(seq[i].tau == doctest::Approx(par[i].tau));
    CHECK(seq[i].cost.total() == doctest::Approx(par[i].cost.total()));
  }
}

TEST_CASE("sweep CSV carries the documented header and one row per cell") {
  amr::StaticInstance inst = support::clustered_instance(10, 64);
  const auto rows = amr::sweep_safety_stock({inst}, {0.0, 0.2}, {0.2},
                                            0.5, 5, fast_config(), 1);
  const std::string csv = amr::sweep_csv(rows);
  CHECK(csv.rfind("instance,delta,psi,tau,travel,delay,fixed,rejection,"
                  "total,mean_response_ms\n",
                  0) == 0);
  int lines = 0;
  for (char ch : csv) {
    if (ch == '\n') ++lines;
  }
  CHECK(lines == 1 + static_cast<int>(rows.size()));
}

TEST_CASE("polish arm never loses to the plain quick-response arm") {
  amr::StaticInstance inst = support::clustered_instance(14, 83);
  const amr::DynamicInstance dyn = amr::dynamize(inst, 0.4, 0.5, 6);
  const auto cmp = amr::compare_polish(dyn, fast_config(), 3);
  CHECK(cmp.runs == 3);
  CHECK(cmp.bre >= -1e-9);
  CHECK(cmp.obj_best_polished <= cmp.obj_best_eiadr + 1e-9);
  CHECK(cmp.obj_avg_polished <= cmp.obj_avg_eiadr + 1e-9);
}

TEST_CASE("a full safety stock forces one request per trip") {
  amr::StaticInstance inst = support::clustered_instance(8, 29);
  amr::SimConfig cfg = fast_config();
  cfg.psi = 1.0;
  cfg.ts_iterations = 0;
  const amr::DynamicInstance dyn = amr::dynamize(inst, 0.0, 0.5, 1);
  const amr::SimMetrics m = amr::run(dyn, cfg);
  for (const auto& r : m.prior_solution.routes) {
    int in_trip = 0;
    for (std::size_t p = 1; p < r.stops.size(); ++p) {
      if (r.stops[p] == 0) {
        in_trip = 0;
      } else {
        ++in_trip;
        CHECK(in_trip <= 1);
      }
    }
  }
}
