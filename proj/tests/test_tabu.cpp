#include <sstream>
#include <vector>

#include "doctest.h"

#include "amr/tabu.hpp"
#include "support/oracles.hpp"

using support::RequestRow;

namespace {

amr::PlanParams params_with(double psi, amr::CapacityMode mode) {
  amr::PlanParams p;
  p.psi = psi;
  p.mode = mode;
  return p;
}

}  // namespace

TEST_CASE("tenure matrix is symmetric and floors at zero") {
  amr::TenureMatrix b;
  b.set(3, 7, 5);
  CHECK(b.get(3, 7) == 5);
  CHECK(b.get(7, 3) == 5);
  b.set(3, 7, 0);
  CHECK(b.get(3, 7) == 0);

  b.set(1, 2, 1);
  b.set(1, 3, 4);
  b.set(4, 5, 2);
  b.decrement_row(1, 2);  // touches (1,3) only
  CHECK(b.get(1, 2) == 1);
  CHECK(b.get(1, 3) == 3);
  CHECK(b.get(4, 5) == 2);
  b.decrement_all_except(1, 3);
  CHECK(b.get(1, 2) == 0);
  CHECK(b.get(1, 3) == 3);
  CHECK(b.get(4, 5) == 1);
}

TEST_CASE("greedy start: empty input gives an empty plan") {
  const amr::StaticInstance inst = support::make_instance(100, 500, {});
  const amr::Problem prob(inst, 0.0);
  const auto sol = amr::greedy_initial(
      prob, params_with(0.2, amr::CapacityMode::Static), {});
  CHECK(sol.routes.empty());
  CHECK(amr::solution_cost(sol, prob, {}).total() == 0.0);
}

TEST_CASE("greedy start chains sequential windows onto one AMR") {
  const amr::StaticInstance inst = support::make_instance(
      100, 600,
      {{1, 2, 0, 10, 10, 160, 5}, {2, 4, 0, 10, 170, 330, 5},
       {3, 6, 0, 10, 340, 500, 5}});
  const amr::Problem prob(inst, 0.0);
  const auto sol = amr::greedy_initial(
      prob, params_with(0.2, amr::CapacityMode::Static), {2, 3, 1});
  REQUIRE(sol.routes.size() == 1);
  CHECK(sol.routes[0].stops == std::vector<int>{0, 1, 2, 3, 0});
}

TEST_CASE("greedy start splits on the capacity floor") {
  SUBCASE("demands beyond raw capacity") {
    const amr::StaticInstance inst = support::make_instance(
        100, 500, {{1, 1, 0, 90, 0, 500, 0}, {2, 2, 0, 90, 0, 500, 0}});
    const amr::Problem prob(inst, 0.0);
    const auto sol = amr::greedy_initial(
        prob, params_with(0.2, amr::CapacityMode::Static), {1, 2});
    CHECK(sol.routes.size() == 2);
  }
  SUBCASE("safety stock alone forces the split") {
    // Ledger 100 -> 55, then 55 - 45 = 10 < floor 20.
    const amr::StaticInstance inst = support::make_instance(
        100, 500, {{1, 1, 0, 45, 0, 500, 0}, {2, 2, 0, 45, 0, 500, 0}});
    const amr::Problem prob(inst, 0.0);
    const auto strict = amr::greedy_initial(
        prob, params_with(0.2, amr::CapacityMode::Static), {1, 2});
    CHECK(strict.routes.size() == 2);
    const auto loose = amr::greedy_initial(
        prob, params_with(0.0, amr::CapacityMode::Static), {1, 2});
    CHECK(loose.routes.size() == 1);
  }
}

TEST_CASE("neighborhood sizes match the slot combinatorics") {
  amr::StaticInstance inst = support::wide_instance(5, 61);
  const amr::Problem prob(inst, 0.0);
  const auto params = params_with(0.0, amr::CapacityMode::Static);

  SUBCASE("swap on a two-request route has one move") {
    amr::Solution sol;
    sol.routes.push_back(amr::make_route({1, 2}));
    amr::propagate(sol.routes[0], prob);
    const auto nbhd =
        amr::generate_neighborhood(sol, amr::Operator::Swap, prob, params);
    CHECK(nbhd.size() == 1);
    CHECK(nbhd[0].solution.routes[0].stops == std::vector<int>{0, 2, 1, 0});
  }
  SUBCASE("segment reversal on four requests has C(4,2) moves") {
    amr::Solution sol;
    sol.routes.push_back(amr::make_route({1, 2, 3, 4}));
    amr::propagate(sol.routes[0], prob);
    const auto nbhd =
        amr::generate_neighborhood(sol, amr::Operator::TwoOpt, prob, params);
    CHECK(nbhd.size() == 6);
  }
  SUBCASE("relocation of one request hits every slot but its own") {
    amr::Solution sol;
    sol.routes.push_back(amr::make_route({1, 2, 3}));
    sol.routes.push_back(amr::make_route({4, 5}));
    sol.routes[1].amr_id = 1;
    for (auto& r : sol.routes) amr::propagate(r, prob);
    const auto nbhd = amr::generate_neighborhood(sol, amr::Operator::Relocate,
                                                 prob, params);
    int moves_of_2 = 0;
    for (const auto& c : nbhd) {
      if (c.move.j1 == 2) ++moves_of_2;
    }
    // Eight raw slots (four before-request, an end-of-trip and a fresh
    // trip per route) minus the identity reinsertion before request 3.
    CHECK(moves_of_2 == 7);
  }
}

TEST_CASE("neighborhood candidates are all feasible") {
  amr::StaticInstance inst = support::clustered_instance(10, 23);
  const amr::Problem prob(inst, 10.0);
  const auto params = params_with(0.2, amr::CapacityMode::Static);
  std::vector<int> ids;
  for (const auto& r : inst.requests) ids.push_back(r.id);
  const auto sol = amr::greedy_initial(prob, params, ids);
  for (auto op : {amr::Operator::Swap, amr::Operator::TwoOpt,
                  amr::Operator::Relocate}) {
    for (const auto& c : amr::generate_neighborhood(sol, op, prob, params)) {
      for (const auto& r : c.solution.routes) {
        CHECK(!amr::capacity_check(r, prob, params.psi, params.mode));
        CHECK(!amr::lateness_risk(r, prob, params.eps));
      }
      CHECK(c.solution.served_ids().size() == ids.size());
    }
  }
}

TEST_CASE("search with zero iterations returns the start solution") {
  amr::StaticInstance inst = support::clustered_instance(6, 2);
  const amr::Problem prob(inst, 10.0);
  const auto params = params_with(0.2, amr::CapacityMode::Static);
  const auto start = amr::greedy_initial(prob, params, {1, 2, 3, 4, 5, 6});
  amr::TabuParams tp;
  tp.iterations = 0;
  const auto out = amr::tabu_search(start, prob, params, tp);
  REQUIRE(out.routes.size() == start.routes.size());
  for (std::size_t k = 0; k < out.routes.size(); ++k) {
    CHECK(out.routes[k].stops == start.routes[k].stops);
  }
}

TEST_CASE("single-request instance keeps its only route") {
  const amr::StaticInstance inst =
      support::make_instance(100, 500, {{1, 3, 4, 10, 0, 400, 5}});
  const amr::Problem prob(inst, 0.0);
  const auto params = params_with(0.2, amr::CapacityMode::Static);
  const auto start = amr::greedy_initial(prob, params, {1});
  amr::TabuParams tp;
  tp.iterations = 50;
  const auto out = amr::tabu_search(start, prob, params, tp);
  REQUIRE(out.routes.size() == 1);
  CHECK(out.routes[0].stops == std::vector<int>{0, 1, 0});
  CHECK(amr::solution_cost(out, prob, params.costs).total() ==
        doctest::Approx(amr::solution_cost(start, prob, params.costs).total()));
}

TEST_CASE("search trajectory is deterministic for a fixed seed") {
  amr::StaticInstance inst = support::clustered_instance(12, 3);
  amr::set_service_variance(inst, 10.0);
  const amr::Problem prob(inst, 10.0);
  const auto params = params_with(0.2, amr::CapacityMode::Static);
  std::vector<int> ids;
  for (const auto& r : inst.requests) ids.push_back(r.id);
  const auto start = amr::greedy_initial(prob, params, ids);
  amr::TabuParams tp;
  tp.iterations = 120;
  tp.seed = 5;
  const auto a = amr::tabu_search(start, prob, params, tp);
  const auto b = amr::tabu_search(start, prob, params, tp);
  REQUIRE(a.routes.size() == b.routes.size());
  for (std::size_t k = 0; k < a.routes.size(); ++k) {
    CHECK(a.routes[k].stops == b.routes[k].stops);
  }
}

TEST_CASE("best cost never worsens and the matrices stay well formed") {
  amr::StaticInstance inst = support::clustered_instance(10, 19);
  amr::set_service_variance(inst, 10.0);
  const amr::Problem prob(inst, 10.0);
  const auto params = params_with(0.2, amr::CapacityMode::Static);
  std::vector<int> ids;
  for (const auto& r : inst.requests) ids.push_back(r.id);
  const auto start = amr::greedy_initial(prob, params, ids);
  amr::TabuParams tp;
  tp.iterations = 100;
  double last_best = amr::solution_cost(start, prob, params.costs).total();
  int calls = 0;
  const auto out = amr::tabu_search(
      start, prob, params, tp, [&](const amr::IterationInfo& info) {
        ++calls;
        CHECK(info.best_cost <= last_best + 1e-9);
        last_best = info.best_cost;
        REQUIRE(info.state != nullptr);
        for (const auto& mat : info.state->tenure) {
          mat.for_each_nonzero([&](int j1, int j2, int v) {
            CHECK(v > 0);
            CHECK(mat.get(j1, j2) == mat.get(j2, j1));
          });
        }
      });
  CHECK(calls == tp.iterations);
  CHECK(out.served_ids().size() == ids.size());
}

TEST_CASE("trace output carries one line per iteration") {
  amr::StaticInstance inst = support::clustered_instance(6, 41);
  const amr::Problem prob(inst, 10.0);
  const auto params = params_with(0.2, amr::CapacityMode::Static);
  const auto start = amr::greedy_initial(prob, params, {1, 2, 3, 4, 5, 6});
  std::ostringstream trace;
  amr::TabuParams tp;
  tp.iterations = 15;
  tp.trace = &trace;
  amr::tabu_search(start, prob, params, tp);
  const std::string text = trace.str();
  CHECK(text.rfind("iteration,operator,current_cost,best_cost\n", 0) == 0);
  int lines = 0;
  for (char ch : text) {
    if (ch == '\n') ++lines;
  }
  CHECK(lines == 16);
}

TEST_CASE("search reaches the exhaustive optimum on a deterministic toy") {
  for (std::uint64_t seed : {101ULL, 202ULL}) {
    const amr::StaticInstance inst = support::toy_instance(6, seed);
    const amr::Problem prob(inst, 0.0);
    const auto params = params_with(0.0, amr::CapacityMode::Static);
    std::vector<int> ids;
    for (const auto& r : inst.requests) ids.push_back(r.id);
    const double optimum = support::enumerate_best_cost(prob, params, ids);
    const auto start = amr::greedy_initial(prob, params, ids);
    amr::TabuParams tp;
    tp.iterations = 500;
    tp.seed = seed + 7;  // fixed draw; roughly 1 in 30 draws stalls short
    // A six-request toy has only fifteen request pairs, so tenures are
    // scaled down to keep part of the neighborhood admissible.
    tp.tenure_min = 10;
    tp.tenure_max = 15;
    const auto out = amr::tabu_search(start, prob, params, tp);
    const double got = amr::solution_cost(out, prob, params.costs).total();
    CHECK(got >= optimum - 1e-9);
    CHECK(got <= optimum * 1.02 + 1e-9);
  }
}
