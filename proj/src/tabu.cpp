#include "amr/tabu.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace amr {

std::pair<int, int> TenureMatrix::canon(int j1, int j2) {
  return {std::min(j1, j2), std::max(j1, j2)};
}

int TenureMatrix::get(int j1, int j2) const {
  const auto it = entries_.find(canon(j1, j2));
  return it == entries_.end() ? 0 : it->second;
}

void TenureMatrix::set(int j1, int j2, int tenure) {
  if (tenure <= 0) {
    entries_.erase(canon(j1, j2));
  } else {
    entries_[canon(j1, j2)] = tenure;
  }
}

void TenureMatrix::decrement_row(int j1, int j2) {
  const auto skip = canon(j1, j2);
  for (auto it = entries_.begin(); it != entries_.end();) {
    const bool shares = it->first.first == j1 || it->first.second == j1;
    if (shares && it->first != skip && --it->second <= 0) {
      it = entries_.erase(it);
    } else {
      ++it;
    }
  }
}

void TenureMatrix::decrement_all() {
  for (auto it = entries_.begin(); it != entries_.end();) {
    if (--it->second <= 0) {
      it = entries_.erase(it);
    } else {
      ++it;
    }
  }
}

void TenureMatrix::decrement_all_except(int j1, int j2) {
  const auto skip = canon(j1, j2);
  for (auto it = entries_.begin(); it != entries_.end();) {
    if (it->first != skip && --it->second <= 0) {
      it = entries_.erase(it);
    } else {
      ++it;
    }
  }
}

namespace {

struct Position {
  int route = -1;
  int pos = -1;
};

std::map<int, Position> locate_requests(const Solution& sol) {
  std::map<int, Position> loc;
  for (std::size_t k = 0; k < sol.routes.size(); ++k) {
    const auto& stops = sol.routes[k].stops;
    for (std::size_t p = 0; p < stops.size(); ++p) {
      if (stops[p] != 0) {
        loc[stops[p]] = {static_cast<int>(k), static_cast<int>(p)};
      }
    }
  }
  return loc;
}

// Relocation target: before request j2, the slot at the end of a route's
// last trip, or a fresh trip opened after the route's final depot (both
// keyed by that route's last request for the tabu matrices).
struct RawMove {
  int j1 = 0;
  int j2 = 0;
  int end_route = -1;
  bool new_trip = false;
};

bool same_stop_layout(const Solution& a, const Solution& b) {
  auto layout = [](const Solution& s) {
    std::vector<std::vector<int>> routes;
    for (const auto& r : s.routes) {
      if (!r.empty()) routes.push_back(r.stops);
    }
    std::sort(routes.begin(), routes.end());
    return routes;
  };
  return layout(a) == layout(b);
}

std::optional<Solution> apply_move(const Solution& sol, Operator op,
                                   const RawMove& mv, const Problem& prob,
                                   const PlanParams& params) {
  auto loc = locate_requests(sol);
  const auto i1 = loc.find(mv.j1);
  if (i1 == loc.end()) return std::nullopt;

  Solution cand = sol;
  if (op == Operator::Swap) {
    const auto i2 = loc.find(mv.j2);
    if (i2 == loc.end()) return std::nullopt;
    std::swap(cand.routes[i1->second.route].stops[i1->second.pos],
              cand.routes[i2->second.route].stops[i2->second.pos]);
  } else if (op == Operator::TwoOpt) {
    const auto i2 = loc.find(mv.j2);
    if (i2 == loc.end()) return std::nullopt;
    const Position a = i1->second;
    const Position b = i2->second;
    if (a.route == b.route) {
      auto& stops = cand.routes[a.route].stops;
      const auto lo = std::min(a.pos, b.pos);
      const auto hi = std::max(a.pos, b.pos);
      std::reverse(stops.begin() + lo, stops.begin() + hi + 1);
    } else {
      auto& sa = cand.routes[a.route].stops;
      auto& sb = cand.routes[b.route].stops;
      std::vector<int> tail_a(sa.begin() + a.pos + 1, sa.end());
      std::vector<int> tail_b(sb.begin() + b.pos + 1, sb.end());
      sa.erase(sa.begin() + a.pos + 1, sa.end());
      sb.erase(sb.begin() + b.pos + 1, sb.end());
      sa.insert(sa.end(), tail_b.begin(), tail_b.end());
      sb.insert(sb.end(), tail_a.begin(), tail_a.end());
    }
  } else {
    auto& from = cand.routes[i1->second.route].stops;
    from.erase(from.begin() + i1->second.pos);
    if (mv.end_route >= 0) {
      auto& to = cand.routes[mv.end_route].stops;
      if (mv.new_trip) {
        to.push_back(mv.j1);
        to.push_back(0);
      } else {
        to.insert(to.end() - 1, mv.j1);
      }
    } else {
      const auto loc2 = locate_requests(cand);
      const auto i2 = loc2.find(mv.j2);
      if (i2 == loc2.end()) return std::nullopt;
      auto& to = cand.routes[i2->second.route].stops;
      to.insert(to.begin() + i2->second.pos, mv.j1);
    }
  }

  normalize_solution(cand, prob);
  if (same_stop_layout(cand, sol)) return std::nullopt;

  const double floor =
      params.mode == CapacityMode::Static ? params.psi * prob.capacity() : 0.0;
  for (auto& r : cand.routes) {
    if (!repair_overload(r, prob, floor)) return std::nullopt;
  }
  for (std::size_t k = 0; k < cand.routes.size(); ++k) {
    if (lateness_risk(cand.routes[k], prob, params.eps)) {
      if (!repair_timewindow(cand, static_cast<int>(k), prob, params)) {
        return std::nullopt;
      }
    }
  }
  for (const auto& r : cand.routes) {
    if (capacity_check(r, prob, params.psi, params.mode)) return std::nullopt;
    if (lateness_risk(r, prob, params.eps)) return std::nullopt;
  }
  if (cand.active_amrs() > params.max_amrs) return std::nullopt;
  return cand;
}

std::vector<RawMove> enumerate_moves(const Solution& sol, Operator op) {
  std::vector<int> ids;
  for (const auto& [id, p] : locate_requests(sol)) ids.push_back(id);
  std::vector<RawMove> moves;
  if (op == Operator::Relocate) {
    for (int j1 : ids) {
      for (int j2 : ids) {
        if (j1 != j2) moves.push_back({j1, j2, -1});
      }
      for (std::size_t k = 0; k < sol.routes.size(); ++k) {
        const auto& stops = sol.routes[k].stops;
        int last = 0;
        for (auto it = stops.rbegin(); it != stops.rend(); ++it) {
          if (*it != 0) {
            last = *it;
            break;
          }
        }
        if (last != 0 && last != j1) {
          moves.push_back({j1, last, static_cast<int>(k), false});
          moves.push_back({j1, last, static_cast<int>(k), true});
        }
      }
    }
  } else {
    for (std::size_t a = 0; a < ids.size(); ++a) {
      for (std::size_t b = a + 1; b < ids.size(); ++b) {
        moves.push_back({ids[a], ids[b], -1});
      }
    }
  }
  return moves;
}

}  // namespace

Solution greedy_initial(const Problem& prob, const PlanParams& params,
                        const std::vector<int>& request_ids) {
  std::vector<int> order = request_ids;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double ea = prob.node(a).ready;
    const double eb = prob.node(b).ready;
    if (ea != eb) return ea < eb;
    return a < b;
  });

  Solution sol;
  for (int id : order) {
    bool placed = false;
    for (auto& route : sol.routes) {
      Route trial = route;
      trial.stops.insert(trial.stops.end() - 1, id);
      propagate(trial, prob);
      if (capacity_check(trial, prob, params.psi, params.mode)) continue;
      if (lateness_risk(trial, prob, params.eps)) continue;
      route = std::move(trial);
      placed = true;
      break;
    }
    if (!placed) {
      Route fresh = make_route({id});
      fresh.amr_id = static_cast<int>(sol.routes.size());
      propagate(fresh, prob);
      sol.routes.push_back(std::move(fresh));
    }
  }
  return sol;
}

std::vector<Candidate> generate_neighborhood(
    const Solution& sol, Operator op, const Problem& prob,
    const PlanParams& params,
    const std::vector<std::pair<int, int>>* moves) {
  std::vector<RawMove> raw;
  if (moves) {
    for (const auto& [j1, j2] : *moves) raw.push_back({j1, j2, -1});
  } else {
    raw = enumerate_moves(sol, op);
  }
  std::vector<Candidate> out;
  for (const auto& mv : raw) {
    auto cand = apply_move(sol, op, mv, prob, params);
    if (!cand) continue;
    Candidate c;
    c.move = {op, mv.j1, mv.j2};
    c.cost = solution_cost(*cand, prob, params.costs).total();
    c.solution = std::move(*cand);
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    if (a.move.j1 != b.move.j1) return a.move.j1 < b.move.j1;
    return a.move.j2 < b.move.j2;
  });
  return out;
}

Solution tabu_search(const Solution& initial, const Problem& prob,
                     const PlanParams& params, const TabuParams& tparams,
                     const TabuMonitor& monitor) {
  Solution best = initial;
  Solution current = initial;
  double f_best = solution_cost(best, prob, params.costs).total();

  TabuState state;
  std::mt19937_64 rng(tparams.seed);
  std::uniform_int_distribution<int> tenure_dist(tparams.tenure_min,
                                                 tparams.tenure_max);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const std::size_t n_requests = current.served_ids().size();
  const bool sample = n_requests > tparams.full_enum_limit;
  const auto sample_count = static_cast<std::size_t>(
      std::ceil(static_cast<double>(n_requests * n_requests) / 4.0));

  if (tparams.trace) {
    *tparams.trace << "iteration,operator,current_cost,best_cost\n";
  }

  for (int ite = 1; ite <= tparams.iterations; ++ite) {
    if ((ite - 1) % 10 == 0) {
      const double total = state.weight[0] + state.weight[1] + state.weight[2];
      for (int i = 0; i < 3; ++i) state.prob[i] = state.weight[i] / total;
    }

    const double u = unit(rng);
    int op_idx = 0;
    double acc = state.prob[0];
    while (op_idx < 2 && u >= acc) acc += state.prob[++op_idx];
    const auto op = static_cast<Operator>(op_idx);

    std::vector<Candidate> nbhd;
    if (sample) {
      std::vector<int> ids = current.served_ids();
      std::sort(ids.begin(), ids.end());
      std::uniform_int_distribution<std::size_t> pick(0, ids.size() - 1);
      std::vector<std::pair<int, int>> sampled;
      sampled.reserve(sample_count);
      for (std::size_t s = 0; s < sample_count; ++s) {
        const int a = ids[pick(rng)];
        const int b = ids[pick(rng)];
        if (a != b) sampled.emplace_back(a, b);
      }
      nbhd = generate_neighborhood(current, op, prob, params, &sampled);
    } else {
      nbhd = generate_neighborhood(current, op, prob, params);
    }

    if (!nbhd.empty()) {
      auto& b_mat = state.tenure[static_cast<std::size_t>(op_idx)];
      const Candidate& top = nbhd.front();
      if (top.cost < f_best) {
        // Global improvement; a tabu move is revoked by aspiration.
        best = top.solution;
        f_best = top.cost;
        current = top.solution;
        state.weight[static_cast<std::size_t>(op_idx)] +=
            tparams.reward_improve;
        const int t = tenure_dist(rng);
        if (b_mat.get(top.move.j1, top.move.j2) != 0) {
          b_mat.set(top.move.j1, top.move.j2, 0);
        } else {
          b_mat.set(top.move.j1, top.move.j2, t);
        }
        b_mat.decrement_row(top.move.j1, top.move.j2);
      } else {
        const Candidate* pick_cand = nullptr;
        for (const auto& c : nbhd) {
          if (b_mat.get(c.move.j1, c.move.j2) == 0) {
            pick_cand = &c;
            break;
          }
        }
        if (pick_cand) {
          current = pick_cand->solution;
          state.weight[static_cast<std::size_t>(op_idx)] +=
              tparams.reward_accept;
          const int t = tenure_dist(rng);
          b_mat.decrement_all_except(pick_cand->move.j1, pick_cand->move.j2);
          b_mat.set(pick_cand->move.j1, pick_cand->move.j2, t);
        } else {
          // Every candidate is tabu and none aspires; the iteration still
          // elapses, so tenures age and the operator can resume later.
          b_mat.decrement_all();
        }
      }
    }

    const double f_current = solution_cost(current, prob, params.costs).total();
    if (tparams.trace) {
      *tparams.trace << ite << "," << op_idx << "," << f_current << ","
                     << f_best << "\n";
    }
    if (monitor) {
      IterationInfo info;
      info.iteration = ite;
      info.op = op;
      info.current_cost = f_current;
      info.best_cost = f_best;
      info.state = &state;
      monitor(info);
    }
  }
  return best;
}

}  // namespace amr
