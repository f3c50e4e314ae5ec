#pragma once

#include <optional>
#include <string>
#include <vector>

#include "amr/routing.hpp"

namespace amr {

struct InsertionScheme {
  int route = -1;     // -1: open a new AMR
  int trip = 0;
  int pred_pos = -1;  // stop index of the predecessor
  int pred_id = 0;
  double marginal_cost = 0.0;
  double added_delay_penalty = 0.0;
  bool needs_new_amr = false;
  Solution after;  // insertion applied, overload-repaired, re-propagated
};

struct DecisionRecord {
  double t = 0.0;
  int req = 0;
  Priority priority = Priority::Low;
  std::string action;  // "insert" | "insert-new-amr" | "forced-insert" | "reject"
  int route = -1;
  int pred = -1;
  double marginal_cost = 0.0;
  double response_ms = 0.0;
};

std::string serialize_record(const DecisionRecord& rec);

// Insertion schemes admitted by the probabilistic probe: predecessor j is
// kept when P{A_j + S_j + T_j,req < h_req} > 1 - eps and the request
// arrived before j's planned departure. The open-new-AMR scheme is added
// while the fleet is below params.max_amrs.
std::vector<InsertionScheme> find_insertion_points(const Problem& prob,
                                                   int req_id,
                                                   const Solution& sol,
                                                   double now,
                                                   const PlanParams& params);

// Minimal-cost scheme; ties broken by (route, trip, predecessor position).
std::optional<InsertionScheme> assign_high_priority(
    std::vector<InsertionScheme> schemes);

// Acceptance rule at the AMR cap: accept iff the rejection loss strictly
// exceeds the added expected delay penalty of the best scheme.
bool decide_low_priority(const std::optional<InsertionScheme>& best,
                         const CostParams& costs);

// Full per-request quick-response step. Mutates `sol` and appends the
// request to `sol.rejected` on denial; HIGH requests are never rejected.
DecisionRecord insert_dynamic(const Problem& prob, Solution& sol, int req_id,
                              Priority priority, double now,
                              const PlanParams& params);

}  // namespace amr
