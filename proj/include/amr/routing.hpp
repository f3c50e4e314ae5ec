#pragma once

#include <limits>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "amr/instance.hpp"
#include "amr/stochastic.hpp"

namespace amr {

struct CostParams {
  double reject_loss = 1000.0;  // xi0
  double travel_cost = 1.0;     // xi1
  double delay_cost = 100.0;    // xi2
  double fixed_cost = 3000.0;   // xi3
};

enum class CapacityMode { Static, Dynamic };

struct PlanParams {
  CostParams costs;
  double psi = 0.2;        // safety stock, Static mode only
  double eps = 0.05;       // on-time confidence threshold
  CapacityMode mode = CapacityMode::Static;
  int max_amrs = std::numeric_limits<int>::max();  // M
};

// Evaluation context: node lookup plus the global travel-time variance.
// Dynamic requests are added as they arrive.
class Problem {
 public:
  Problem() = default;
  Problem(const StaticInstance& inst, double travel_var);

  void add_request(const RequestSpec& req);
  bool has_node(int id) const { return nodes_.count(id) > 0; }
  const RequestSpec& node(int id) const;

  double capacity() const { return capacity_; }
  double horizon_begin() const { return horizon_begin_; }
  double horizon_end() const { return horizon_end_; }
  double travel_variance() const { return travel_var_; }

  GaussianTime travel(int i, int j) const;
  double travel_mean(int i, int j) const;
  GaussianTime service(int id) const;
  // Window of a stop; depot stops use the horizon.
  double ready(int id) const;
  double due(int id) const;

 private:
  std::unordered_map<int, RequestSpec> nodes_;  // id 0 = depot
  double capacity_ = 0.0;
  double horizon_begin_ = 0.0;
  double horizon_end_ = 0.0;
  double travel_var_ = 0.0;
};

// One AMR's multi-trip plan. Depot id 0 may appear mid-route as a trip
// separator. arrival/departure/remaining_load are filled by propagate().
struct Route {
  int amr_id = 0;
  std::vector<int> stops;  // first and last stop are the depot
  double start_time = 0.0;
  std::vector<GaussianTime> arrival;
  std::vector<GaussianTime> departure;
  std::vector<double> remaining_load;  // capacity on arrival at each stop

  int served_count() const;
  bool empty() const { return served_count() == 0; }
};

Route make_route(std::vector<int> served_ids, double start_time = 0.0);

struct CostBreakdown {
  double travel = 0.0;
  double delay = 0.0;
  double fixed = 0.0;
  double rejection = 0.0;
  double total() const { return travel + delay + fixed + rejection; }
};

struct Solution {
  std::vector<Route> routes;
  std::set<int> rejected;

  int active_amrs() const;  // routes with >= 1 served stop
  std::vector<int> served_ids() const;
};

// Forward time recursion A_j = max{A_i + S_i + T_ij, e_j} with last-minute
// departures: the hold happens at i, so D_i = A_j - T_ij.
void propagate(Route& route, const Problem& prob);

// First stop violating the remaining-capacity floor, if any. Static mode
// enforces u - q >= Q*psi (a stop alone on its trip is exempt from the psi
// floor, otherwise psi = 1 - q/Q would make lone requests unservable);
// Dynamic mode enforces u - q >= 0.
std::optional<int> capacity_check(const Route& route, const Problem& prob,
                                  double psi, CapacityMode mode);

// First stop whose on-time probability is <= 1 - eps, if any.
std::optional<int> lateness_risk(const Route& route, const Problem& prob,
                                 double eps);

double route_travel_mean(const Route& route, const Problem& prob);
double route_delay(const Route& route, const Problem& prob);

CostBreakdown solution_cost(const Solution& sol, const Problem& prob,
                            const CostParams& costs);

// Result of evaluating one insertion position: the candidate solution with
// the request inserted after `pred_pos` on route `k`, overload-repaired and
// re-propagated.
struct InsertionEval {
  bool feasible = false;
  double marginal_cost = 0.0;
  double added_delay_penalty = 0.0;  // xi2 * delta expected lateness
  Solution after;
};

// cost(sol + req at position, Repair-1 applied) - cost(sol). Signals an
// infeasible position when the dynamic capacity bound cannot be restored.
// route_idx < 0 evaluates the open-new-AMR position (a fresh 0-req-0 route
// departing the depot at new_route_start).
InsertionEval marginal_insert_cost(const Solution& sol, const Problem& prob,
                                   const CostParams& costs, int req_id,
                                   int route_idx, int pred_pos,
                                   double new_route_start = 0.0);

// Depot-insertion repair: while a stop violates the capacity floor and is
// not the first served stop of its trip, a depot visit is inserted before
// it (fresh trip, u = Q). Returns false when a violation remains.
bool repair_overload(Route& route, const Problem& prob, double floor);

// Route split repair: stops from the first risky stop onward move to a new
// AMR departing the depot. Returns false when the split cannot help (the
// violation is at the first served stop) or the AMR cap is reached.
bool repair_timewindow(Solution& sol, int route_idx, const Problem& prob,
                       const PlanParams& params, double start_time = 0.0);

// Normalizes depot separators (leading/trailing depot, no empty trips) and
// drops routes without served stops.
void normalize_solution(Solution& sol, const Problem& prob);

// Trip index (count of depot separators strictly before `pos`).
int trip_of_position(const Route& route, int pos);

std::string serialize_solution(const Solution& sol, const CostBreakdown& cost);

}  // namespace amr
