#include "amr/eiadr.hpp"

#include <algorithm>
#include <chrono>
#include <limits>

#include "json.hpp"

namespace amr {

namespace {

bool scheme_key_less(const InsertionScheme& a, const InsertionScheme& b) {
  // New-AMR schemes order after every in-route position.
  const int ra = a.route < 0 ? std::numeric_limits<int>::max() : a.route;
  const int rb = b.route < 0 ? std::numeric_limits<int>::max() : b.route;
  if (ra != rb) return ra < rb;
  if (a.trip != b.trip) return a.trip < b.trip;
  return a.pred_pos < b.pred_pos;
}

}  // namespace

std::string serialize_record(const DecisionRecord& rec) {
  nlohmann::json j;
  j["t"] = rec.t;
  j["req"] = rec.req;
  j["priority"] = rec.priority == Priority::High ? "HIGH" : "LOW";
  j["action"] = rec.action;
  j["route"] = rec.route;
  j["predecessor"] = rec.pred;
  j["marginal_cost"] = rec.marginal_cost;
  j["response_ms"] = rec.response_ms;
  return j.dump();
}

std::vector<InsertionScheme> find_insertion_points(const Problem& prob,
                                                   int req_id,
                                                   const Solution& sol,
                                                   double now,
                                                   const PlanParams& params) {
  const auto& req = prob.node(req_id);
  std::vector<InsertionScheme> schemes;

  for (std::size_t k = 0; k < sol.routes.size(); ++k) {
    const Route& route = sol.routes[k];
    for (std::size_t p = 0; p < route.stops.size(); ++p) {
      const int pred = route.stops[p];
      if (pred == 0) continue;  // the probe walks requests on the route
      if (now >= route.departure[p].mean) continue;  // already departed
      const GaussianTime reach = gauss_sum(
          gauss_sum(route.arrival[p], prob.service(pred)),
          prob.travel(pred, req_id));
      if (prob_before(reach, req.due) <= 1.0 - params.eps) continue;

      auto eval = marginal_insert_cost(sol, prob, params.costs, req_id,
                                       static_cast<int>(k),
                                       static_cast<int>(p));
      if (!eval.feasible) continue;
      InsertionScheme s;
      s.route = static_cast<int>(k);
      s.trip = trip_of_position(route, static_cast<int>(p));
      s.pred_pos = static_cast<int>(p);
      s.pred_id = pred;
      s.marginal_cost = eval.marginal_cost;
      s.added_delay_penalty = eval.added_delay_penalty;
      s.after = std::move(eval.after);
      schemes.push_back(std::move(s));
    }
  }

  if (sol.active_amrs() < params.max_amrs) {
    const GaussianTime reach =
        gauss_sum({now, 0.0}, prob.travel(0, req_id));
    if (prob_before(reach, req.due) > 1.0 - params.eps) {
      auto eval = marginal_insert_cost(sol, prob, params.costs, req_id, -1, 0,
                                       now);
      if (eval.feasible) {
        InsertionScheme s;
        s.route = -1;
        s.pred_id = 0;
        s.needs_new_amr = true;
        s.marginal_cost = eval.marginal_cost;
        s.added_delay_penalty = eval.added_delay_penalty;
        s.after = std::move(eval.after);
        schemes.push_back(std::move(s));
      }
    }
  }
  return schemes;
}

std::optional<InsertionScheme> assign_high_priority(
    std::vector<InsertionScheme> schemes) {
  if (schemes.empty()) return std::nullopt;
  auto best = schemes.begin();
  for (auto it = std::next(schemes.begin()); it != schemes.end(); ++it) {
    if (it->marginal_cost < best->marginal_cost ||
        (it->marginal_cost == best->marginal_cost &&
         scheme_key_less(*it, *best))) {
      best = it;
    }
  }
  return std::move(*best);
}

bool decide_low_priority(const std::optional<InsertionScheme>& best,
                         const CostParams& costs) {
  if (!best) return false;
  return costs.reject_loss > best->added_delay_penalty;
}

DecisionRecord insert_dynamic(const Problem& prob, Solution& sol, int req_id,
                              Priority priority, double now,
                              const PlanParams& params) {
  const auto t_start = std::chrono::steady_clock::now();
  DecisionRecord rec;
  rec.t = now;
  rec.req = req_id;
  rec.priority = priority;

  const double cost_before = solution_cost(sol, prob, params.costs).total();
  auto schemes = find_insertion_points(prob, req_id, sol, now, params);
  const bool at_cap = sol.active_amrs() >= params.max_amrs;
  auto best = assign_high_priority(std::move(schemes));

  auto apply = [&](const InsertionScheme& s) {
    sol = s.after;
    rec.route = s.route >= 0 ? s.route
                             : static_cast<int>(sol.routes.size()) - 1;
    rec.pred = s.pred_id;
    rec.action = s.needs_new_amr ? "insert-new-amr" : "insert";
  };
  auto reject = [&]() {
    sol.rejected.insert(req_id);
    rec.action = "reject";
    rec.route = -1;
  };

  if (!best) {
    if (priority == Priority::High) {
      // Mandatory request: cheapest structurally valid position over all
      // routes, window penalty accepted.
      std::optional<InsertionScheme> forced;
      auto consider = [&](int k, int p, int pred_id, const Route& route) {
        auto eval =
            marginal_insert_cost(sol, prob, params.costs, req_id, k, p);
        if (!eval.feasible) return;
        InsertionScheme s;
        s.route = k;
        s.trip = trip_of_position(route, p);
        s.pred_pos = p;
        s.pred_id = pred_id;
        s.marginal_cost = eval.marginal_cost;
        s.added_delay_penalty = eval.added_delay_penalty;
        s.after = std::move(eval.after);
        if (!forced || s.marginal_cost < forced->marginal_cost ||
            (s.marginal_cost == forced->marginal_cost &&
             scheme_key_less(s, *forced))) {
          forced = std::move(s);
        }
      };
      for (std::size_t k = 0; k < sol.routes.size(); ++k) {
        const Route& route = sol.routes[k];
        const int last = static_cast<int>(route.stops.size()) - 1;
        for (int p = 0; p < last; ++p) {
          if (now >= route.departure[static_cast<std::size_t>(p)].mean)
            continue;
          consider(static_cast<int>(k), p, route.stops[static_cast<std::size_t>(p)], route);
        }
        // A new trip after the final depot stays open for an idle AMR.
        consider(static_cast<int>(k), last, 0, route);
      }
      if (!forced && sol.routes.empty()) {
        auto eval =
            marginal_insert_cost(sol, prob, params.costs, req_id, -1, 0, now);
        if (eval.feasible) {
          InsertionScheme s;
          s.route = -1;
          s.needs_new_amr = true;
          s.marginal_cost = eval.marginal_cost;
          s.added_delay_penalty = eval.added_delay_penalty;
          s.after = std::move(eval.after);
          forced = std::move(s);
        }
      }
      if (forced) {
        apply(*forced);
        rec.action = "forced-insert";
      } else {
        // No structurally valid position exists (empty fleet at cap 0).
        reject();
      }
    } else {
      reject();
    }
  } else if (at_cap && priority == Priority::Low) {
    if (decide_low_priority(best, params.costs)) {
      apply(*best);
    } else {
      reject();
    }
  } else {
    apply(*best);
    if (!at_cap && rec.route >= 0 &&
        lateness_risk(sol.routes[static_cast<std::size_t>(rec.route)], prob,
                      params.eps)) {
      repair_timewindow(sol, rec.route, prob, params, now);
    }
  }

  rec.marginal_cost =
      solution_cost(sol, prob, params.costs).total() - cost_before;
  rec.response_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t_start)
                        .count();
  return rec;
}

}  // namespace amr
