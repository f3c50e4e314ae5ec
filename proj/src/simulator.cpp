#include "amr/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>
#include <thread>

namespace amr {

namespace {

PlanParams plan_params(const SimConfig& cfg, CapacityMode mode, int max_amrs) {
  PlanParams p;
  p.costs = cfg.costs;
  p.psi = cfg.psi;
  p.eps = cfg.eps;
  p.mode = mode;
  p.max_amrs = max_amrs;
  return p;
}

int amr_cap(const SimConfig& cfg, int stage1_amrs, double delta) {
  if (cfg.m_policy == MPolicy::Fixed) return cfg.fixed_m;
  const int m = std::max(stage1_amrs, 1);
  return static_cast<int>(std::ceil(static_cast<double>(m) / (1.0 - delta)));
}

}  // namespace

SimMetrics run(const DynamicInstance& inst, const SimConfig& cfg) {
  const auto wall_start = std::chrono::steady_clock::now();

  StaticInstance static_part = inst.static_part;
  set_service_variance(static_part, cfg.service_var);
  Problem prob(static_part, cfg.travel_var);

  std::vector<int> static_ids;
  for (const auto& r : static_part.requests) static_ids.push_back(r.id);

  // Stage 1: prior routes for the static requests.
  const PlanParams stage1 = plan_params(cfg, CapacityMode::Static,
                                        std::numeric_limits<int>::max());
  TabuParams tparams;
  tparams.iterations = cfg.ts_iterations;
  tparams.tenure_min = cfg.tenure_min;
  tparams.tenure_max = cfg.tenure_max;
  tparams.seed = cfg.seed_tabu;

  Solution sol = greedy_initial(prob, stage1, static_ids);
  if (!static_ids.empty() && cfg.ts_iterations > 0) {
    sol = tabu_search(sol, prob, stage1, tparams);
  }

  SimMetrics metrics;
  metrics.prior_solution = sol;
  metrics.stage1_cost = solution_cost(sol, prob, cfg.costs).total();
  metrics.stage1_amrs = sol.active_amrs();
  metrics.amr_cap = amr_cap(cfg, metrics.stage1_amrs, inst.delta);

  // Stage 2: quick-response insertion per arrival, in epoch order.
  const PlanParams stage2 =
      plan_params(cfg, CapacityMode::Dynamic, metrics.amr_cap);
  TabuParams polish_params = tparams;
  polish_params.seed = cfg.seed_sim;

  metrics.n_dynamic = static_cast<int>(inst.events.size());
  for (const auto& ev : inst.events) {
    RequestSpec req = ev.request;
    req.service_var = cfg.service_var;
    prob.add_request(req);
    DecisionRecord rec =
        insert_dynamic(prob, sol, req.id, ev.priority, ev.arrival, stage2);
    metrics.timeline.push_back(rec);
    if (cfg.polish == PolishMode::PerRequest) {
      sol = tabu_search(sol, prob, stage2, polish_params);
    }
  }
  if (cfg.polish == PolishMode::AfterAll && metrics.n_dynamic > 0) {
    sol = tabu_search(sol, prob, stage2, polish_params);
  }

  metrics.final_solution = sol;
  metrics.cost = solution_cost(sol, prob, cfg.costs);
  metrics.n_rejected = static_cast<int>(sol.rejected.size());
  metrics.n_served_dynamic = metrics.n_dynamic - metrics.n_rejected;
  if (metrics.n_dynamic == 0) {
    metrics.tau = 1.0;
    metrics.tau_vacuous = true;
  } else {
    metrics.tau = static_cast<double>(metrics.n_served_dynamic) /
                  static_cast<double>(metrics.n_dynamic);
  }
  double total_ms = 0.0;
  for (const auto& rec : metrics.timeline) {
    total_ms += rec.response_ms;
    metrics.max_response_ms = std::max(metrics.max_response_ms, rec.response_ms);
  }
  metrics.mean_response_ms =
      metrics.timeline.empty() ? 0.0
                               : total_ms / static_cast<double>(metrics.timeline.size());
  metrics.wall_seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - wall_start)
                             .count();
  return metrics;
}

std::vector<SweepRow> sweep_safety_stock(
    const std::vector<StaticInstance>& instances,
    const std::vector<double>& psi_grid, const std::vector<double>& delta_grid,
    double high_fraction, std::uint64_t seed_dynamize, const SimConfig& cfg,
    unsigned workers) {
  struct Cell {
    const StaticInstance* inst;
    double delta;
    double psi;
  };
  std::vector<Cell> cells;
  for (const auto& inst : instances) {
    for (double delta : delta_grid) {
      for (double psi : psi_grid) {
        cells.push_back({&inst, delta, psi});
      }
    }
  }
  std::vector<SweepRow> rows(cells.size());
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < cells.size(); i += stride) {
      const Cell& c = cells[i];
      const DynamicInstance dyn =
          dynamize(*c.inst, c.delta, high_fraction, seed_dynamize);
      SimConfig cell_cfg = cfg;
      cell_cfg.psi = c.psi;
      const SimMetrics m = run(dyn, cell_cfg);
      SweepRow row;
      row.instance = c.inst->name;
      row.delta = c.delta;
      row.psi = c.psi;
      row.tau = m.tau;
      row.cost = m.cost;
      row.mean_response_ms = m.mean_response_ms;
      rows[i] = row;
    }
  };
  if (workers <= 1 || cells.size() <= 1) {
    work(0, 1);
  } else {
    const unsigned n = std::min<unsigned>(workers, cells.size());
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < n; ++w) pool.emplace_back(work, w, n);
    for (auto& t : pool) t.join();
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "instance,delta,psi,tau,travel,delay,fixed,rejection,total,"
        "mean_response_ms\n";
  for (const auto& r : rows) {
    os << r.instance << "," << r.delta << "," << r.psi << "," << r.tau << ","
       << r.cost.travel << "," << r.cost.delay << "," << r.cost.fixed << ","
       << r.cost.rejection << "," << r.cost.total() << ","
       << r.mean_response_ms << "\n";
  }
  return os.str();
}

PolishComparison compare_polish(const DynamicInstance& inst,
                                const SimConfig& cfg, int runs) {
  PolishComparison cmp;
  cmp.runs = runs;
  double best_e = std::numeric_limits<double>::infinity();
  double best_p = std::numeric_limits<double>::infinity();
  double cpu_min_e = std::numeric_limits<double>::infinity();
  double cpu_min_p = std::numeric_limits<double>::infinity();

  for (int r = 0; r < runs; ++r) {
    SimConfig arm = cfg;
    arm.seed_tabu = cfg.seed_tabu + static_cast<std::uint64_t>(r);
    arm.seed_sim = cfg.seed_sim + static_cast<std::uint64_t>(r);

    arm.polish = PolishMode::None;
    const SimMetrics me = run(inst, arm);
    arm.polish = PolishMode::AfterAll;
    const SimMetrics mp = run(inst, arm);

    cmp.obj_avg_eiadr += me.cost.total();
    cmp.cpu_avg_eiadr += me.wall_seconds;
    cmp.obj_avg_polished += mp.cost.total();
    cmp.cpu_avg_polished += mp.wall_seconds;
    if (me.cost.total() < best_e) {
      best_e = me.cost.total();
      cmp.cpu_best_eiadr = me.wall_seconds;
    }
    if (mp.cost.total() < best_p) {
      best_p = mp.cost.total();
      cmp.cpu_best_polished = mp.wall_seconds;
    }
    cpu_min_e = std::min(cpu_min_e, me.wall_seconds);
    cpu_min_p = std::min(cpu_min_p, mp.wall_seconds);
  }
  cmp.obj_avg_eiadr /= runs;
  cmp.obj_avg_polished /= runs;
  cmp.cpu_avg_eiadr /= runs;
  cmp.cpu_avg_polished /= runs;
  cmp.obj_best_eiadr = best_e;
  cmp.obj_best_polished = best_p;
  cmp.cpu_min_eiadr = cpu_min_e;
  cmp.cpu_min_polished = cpu_min_p;
  cmp.bre = best_p > 0.0 ? (best_e - best_p) / best_p * 100.0 : 0.0;
  cmp.are = cmp.obj_avg_polished > 0.0
                ? (cmp.obj_avg_eiadr - cmp.obj_avg_polished) /
                      cmp.obj_avg_polished * 100.0
                : 0.0;
  return cmp;
}

std::string comparison_csv_header() {
  return "instance,obj_a_eiadr,cpu_a_eiadr,obj_b_eiadr,cpu_b_eiadr,"
         "cpu_min_eiadr,obj_a_polished,cpu_a_polished,obj_b_polished,"
         "cpu_b_polished,cpu_min_polished,bre,are\n";
}

std::string comparison_csv_row(const std::string& instance,
                               const PolishComparison& cmp) {
  std::ostringstream os;
  os << instance << "," << cmp.obj_avg_eiadr << "," << cmp.cpu_avg_eiadr << ","
     << cmp.obj_best_eiadr << "," << cmp.cpu_best_eiadr << ","
     << cmp.cpu_min_eiadr << "," << cmp.obj_avg_polished << ","
     << cmp.cpu_avg_polished << "," << cmp.obj_best_polished << ","
     << cmp.cpu_best_polished << "," << cmp.cpu_min_polished << ","
     << cmp.bre << "," << cmp.are << "\n";
  return os.str();
}

}  // namespace amr
