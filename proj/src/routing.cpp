#include "amr/routing.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace amr {

namespace {
constexpr double kTol = 1e-9;
}

Problem::Problem(const StaticInstance& inst, double travel_var)
    : capacity_(inst.capacity),
      horizon_begin_(inst.horizon_begin),
      horizon_end_(inst.horizon_end),
      travel_var_(travel_var) {
  RequestSpec depot;
  depot.id = 0;
  depot.x = inst.depot_x;
  depot.y = inst.depot_y;
  depot.ready = inst.horizon_begin;
  depot.due = inst.horizon_end;
  nodes_.emplace(0, depot);
  for (const auto& r : inst.requests) nodes_.emplace(r.id, r);
}

void Problem::add_request(const RequestSpec& req) {
  nodes_[req.id] = req;
}

const RequestSpec& Problem::node(int id) const {
  const auto it = nodes_.find(id);
  if (it == nodes_.end()) {
    throw std::out_of_range("unknown node id " + std::to_string(id));
  }
  return it->second;
}

GaussianTime Problem::travel(int i, int j) const {
  if (i == j) return {0.0, 0.0};
  return {travel_mean(i, j), travel_var_};
}

double Problem::travel_mean(int i, int j) const {
  const auto& a = node(i);
  const auto& b = node(j);
  return std::hypot(a.x - b.x, a.y - b.y);
}

GaussianTime Problem::service(int id) const {
  if (id == 0) return {0.0, 0.0};
  const auto& n = node(id);
  return {n.service_mean, n.service_var};
}

double Problem::ready(int id) const {
  return id == 0 ? horizon_begin_ : node(id).ready;
}

double Problem::due(int id) const {
  return id == 0 ? horizon_end_ : node(id).due;
}

int Route::served_count() const {
  int n = 0;
  for (int s : stops) {
    if (s != 0) ++n;
  }
  return n;
}

Route make_route(std::vector<int> served_ids, double start_time) {
  Route r;
  r.start_time = start_time;
  r.stops.push_back(0);
  for (int id : served_ids) r.stops.push_back(id);
  r.stops.push_back(0);
  return r;
}

int Solution::active_amrs() const {
  int n = 0;
  for (const auto& r : routes) {
    if (!r.empty()) ++n;
  }
  return n;
}

std::vector<int> Solution::served_ids() const {
  std::vector<int> ids;
  for (const auto& r : routes) {
    for (int s : r.stops) {
      if (s != 0) ids.push_back(s);
    }
  }
  return ids;
}

void propagate(Route& route, const Problem& prob) {
  const std::size_t n = route.stops.size();
  route.arrival.assign(n, GaussianTime{});
  route.departure.assign(n, GaussianTime{});
  route.remaining_load.assign(n, prob.capacity());
  if (n == 0) return;

  route.arrival[0] = {route.start_time, 0.0};
  double load = prob.capacity();
  route.remaining_load[0] = load;
  for (std::size_t p = 0; p + 1 < n; ++p) {
    const int i = route.stops[p];
    const int j = route.stops[p + 1];
    const GaussianTime t = prob.travel(i, j);
    const GaussianTime ride =
        gauss_sum(gauss_sum(route.arrival[p], prob.service(i)), t);
    route.arrival[p + 1] = max_with_constant(ride, prob.ready(j));
    // Any slack is taken at i ("last-minute" hold), so A_j = D_i + T_ij.
    route.departure[p] = {route.arrival[p + 1].mean - t.mean,
                          std::max(0.0, route.arrival[p + 1].var - t.var)};
    if (j == 0) {
      load = prob.capacity();
    } else {
      load -= prob.node(j).demand;
      route.remaining_load[p + 1] = load + prob.node(j).demand;
      continue;
    }
    route.remaining_load[p + 1] = load;
  }
  route.departure[n - 1] = route.arrival[n - 1];
}

namespace {

// Number of served stops sharing the trip of position `pos`.
int trip_population(const Route& route, int pos) {
  int lo = pos;
  while (lo > 0 && route.stops[lo - 1] != 0) --lo;
  int hi = pos;
  const int n = static_cast<int>(route.stops.size());
  while (hi + 1 < n && route.stops[hi + 1] != 0) ++hi;
  return hi - lo + 1;
}

}  // namespace

std::optional<int> capacity_check(const Route& route, const Problem& prob,
                                  double psi, CapacityMode mode) {
  const double q_cap = prob.capacity();
  const double floor = mode == CapacityMode::Static ? q_cap * psi : 0.0;
  double load = q_cap;
  for (std::size_t p = 0; p < route.stops.size(); ++p) {
    const int id = route.stops[p];
    if (id == 0) {
      load = q_cap;
      continue;
    }
    const double after = load - prob.node(id).demand;
    if (after < -kTol) return static_cast<int>(p);
    if (after < floor - kTol) {
      if (mode == CapacityMode::Dynamic ||
          trip_population(route, static_cast<int>(p)) > 1) {
        return static_cast<int>(p);
      }
    }
    load = after;
  }
  return std::nullopt;
}

std::optional<int> lateness_risk(const Route& route, const Problem& prob,
                                 double eps) {
  for (std::size_t p = 1; p < route.stops.size(); ++p) {
    // Slack on the deadline keeps deterministic arrival-at-h feasible.
    if (prob_before(route.arrival[p], prob.due(route.stops[p]) + kTol) <=
        1.0 - eps) {
      return static_cast<int>(p);
    }
  }
  return std::nullopt;
}

double route_travel_mean(const Route& route, const Problem& prob) {
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < route.stops.size(); ++p) {
    total += prob.travel_mean(route.stops[p], route.stops[p + 1]);
  }
  return total;
}

double route_delay(const Route& route, const Problem& prob) {
  double total = 0.0;
  for (std::size_t p = 0; p < route.stops.size(); ++p) {
    const int id = route.stops[p];
    if (id == 0) continue;  // depot returns are not delay-penalized
    total += expected_lateness(route.arrival[p], prob.due(id));
  }
  return total;
}

CostBreakdown solution_cost(const Solution& sol, const Problem& prob,
                            const CostParams& costs) {
  CostBreakdown cb;
  for (const auto& r : sol.routes) {
    cb.travel += costs.travel_cost * route_travel_mean(r, prob);
    cb.delay += costs.delay_cost * route_delay(r, prob);
  }
  cb.fixed = costs.fixed_cost * sol.active_amrs();
  cb.rejection = costs.reject_loss * static_cast<double>(sol.rejected.size());
  return cb;
}

bool repair_overload(Route& route, const Problem& prob, double floor) {
  const double q_cap = prob.capacity();
  bool clean = true;
  bool changed = true;
  while (changed) {
    changed = false;
    clean = true;
    double load = q_cap;
    for (std::size_t p = 0; p < route.stops.size(); ++p) {
      const int id = route.stops[p];
      if (id == 0) {
        load = q_cap;
        continue;
      }
      const double q = prob.node(id).demand;
      const bool trip_start = route.stops[p - 1] == 0;
      if (load - q < std::max(floor, 0.0) - kTol) {
        if (trip_start) {
          // A fresh trip cannot do better; leave the stop in place.
          if (q > q_cap + kTol) clean = false;
          load = q_cap - q;
          continue;
        }
        route.stops.insert(route.stops.begin() + static_cast<long>(p), 0);
        changed = true;
        break;
      }
      load -= q;
    }
  }
  propagate(route, prob);
  return clean;
}

bool repair_timewindow(Solution& sol, int route_idx, const Problem& prob,
                       const PlanParams& params, double start_time) {
  Solution work = sol;
  int idx = route_idx;
  while (true) {
    Route& route = work.routes[static_cast<std::size_t>(idx)];
    propagate(route, prob);
    const auto fail = lateness_risk(route, prob, params.eps);
    if (!fail) break;
    const int s = *fail;
    // Splitting at the first served stop reproduces the same trip head.
    bool head_has_request = false;
    for (int p = 0; p < s; ++p) {
      if (route.stops[static_cast<std::size_t>(p)] != 0) {
        head_has_request = true;
        break;
      }
    }
    if (!head_has_request) return false;
    if (work.active_amrs() >= params.max_amrs) return false;

    Route tail;
    tail.amr_id = static_cast<int>(work.routes.size());
    tail.start_time = start_time;
    tail.stops.push_back(0);
    tail.stops.insert(tail.stops.end(),
                      route.stops.begin() + s, route.stops.end());
    route.stops.erase(route.stops.begin() + s, route.stops.end());
    if (route.stops.back() != 0) route.stops.push_back(0);
    while (route.stops.size() >= 2 && route.stops[route.stops.size() - 2] == 0)
      route.stops.pop_back();
    while (tail.stops.size() >= 2 && tail.stops[1] == 0)
      tail.stops.erase(tail.stops.begin() + 1);
    propagate(route, prob);
    propagate(tail, prob);
    work.routes.push_back(std::move(tail));
    idx = static_cast<int>(work.routes.size()) - 1;
  }
  sol = std::move(work);
  return true;
}

void normalize_solution(Solution& sol, const Problem& prob) {
  std::vector<Route> kept;
  for (auto& r : sol.routes) {
    std::vector<int> stops;
    stops.push_back(0);
    for (int s : r.stops) {
      if (s == 0 && stops.back() == 0) continue;
      stops.push_back(s);
    }
    if (stops.back() != 0) stops.push_back(0);
    if (stops.size() <= 2) continue;  // no served stops
    r.stops = std::move(stops);
    propagate(r, prob);
    kept.push_back(std::move(r));
  }
  sol.routes = std::move(kept);
  for (std::size_t k = 0; k < sol.routes.size(); ++k) {
    sol.routes[k].amr_id = static_cast<int>(k);
  }
}

int trip_of_position(const Route& route, int pos) {
  int depots = 0;
  for (int p = 0; p < pos; ++p) {
    if (route.stops[static_cast<std::size_t>(p)] == 0) ++depots;
  }
  return depots - 1 < 0 ? 0 : depots - 1;
}

InsertionEval marginal_insert_cost(const Solution& sol, const Problem& prob,
                                   const CostParams& costs, int req_id,
                                   int route_idx, int pred_pos,
                                   double new_route_start) {
  InsertionEval ev;
  ev.after = sol;
  const double before_total = solution_cost(sol, prob, costs).total();

  double before_delay = 0.0;
  double after_delay = 0.0;
  if (route_idx < 0) {
    Route fresh = make_route({req_id}, new_route_start);
    propagate(fresh, prob);
    if (capacity_check(fresh, prob, 0.0, CapacityMode::Dynamic)) {
      ev.feasible = false;
      return ev;
    }
    fresh.amr_id = static_cast<int>(ev.after.routes.size());
    after_delay = route_delay(fresh, prob);
    ev.after.routes.push_back(std::move(fresh));
  } else {
    Route& route = ev.after.routes[static_cast<std::size_t>(route_idx)];
    before_delay = route_delay(route, prob);
    route.stops.insert(route.stops.begin() + pred_pos + 1, req_id);
    if (route.stops.back() != 0) route.stops.push_back(0);  // new last trip
    if (!repair_overload(route, prob, 0.0)) {
      ev.feasible = false;
      return ev;
    }
    after_delay = route_delay(route, prob);
  }
  ev.feasible = true;
  ev.marginal_cost = solution_cost(ev.after, prob, costs).total() - before_total;
  ev.added_delay_penalty = costs.delay_cost * (after_delay - before_delay);
  return ev;
}

std::string serialize_solution(const Solution& sol, const CostBreakdown& cost) {
  nlohmann::json j;
  j["routes"] = nlohmann::json::array();
  for (const auto& r : sol.routes) {
    std::ostringstream os;
    for (std::size_t p = 0; p < r.stops.size(); ++p) {
      if (p) os << "-";
      os << r.stops[p];
    }
    j["routes"].push_back({{"amr", r.amr_id},
                           {"stops", r.stops},
                           {"display", os.str()},
                           {"start_time", r.start_time}});
  }
  j["rejected"] = std::vector<int>(sol.rejected.begin(), sol.rejected.end());
  j["cost"] = {{"travel", cost.travel},
               {"delay", cost.delay},
               {"fixed", cost.fixed},
               {"rejection", cost.rejection},
               {"total", cost.total()}};
  return j.dump(2);
}

}  // namespace amr
