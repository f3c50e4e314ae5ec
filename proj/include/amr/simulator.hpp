#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amr/eiadr.hpp"
#include "amr/instance.hpp"
#include "amr/routing.hpp"
#include "amr/tabu.hpp"

namespace amr {

enum class MPolicy { Formula, Fixed };
enum class PolishMode { None, AfterAll, PerRequest };

struct SimConfig {
  CostParams costs;
  double psi = 0.2;
  double eps = 0.05;
  double travel_var = 10.0;
  double service_var = 10.0;
  MPolicy m_policy = MPolicy::Formula;  // M = ceil(m / (1 - delta))
  int fixed_m = 0;                      // used when m_policy == Fixed
  PolishMode polish = PolishMode::None;
  int ts_iterations = 500;
  int tenure_min = 40;
  int tenure_max = 50;
  std::uint64_t seed_tabu = 1;
  std::uint64_t seed_sim = 1;  // randomness of the polish searches
};

struct SimMetrics {
  CostBreakdown cost;
  double tau = 1.0;  // served dynamic / n_d; 1.0 (vacuous) when n_d == 0
  bool tau_vacuous = false;
  int n_dynamic = 0;
  int n_served_dynamic = 0;
  int n_rejected = 0;
  double mean_response_ms = 0.0;
  double max_response_ms = 0.0;
  double stage1_cost = 0.0;
  int stage1_amrs = 0;
  int amr_cap = 0;  // M
  double wall_seconds = 0.0;
  std::vector<DecisionRecord> timeline;
  Solution prior_solution;
  Solution final_solution;
};

// Two-stage pipeline: tabu-search prior plan over the static requests,
// then the per-arrival quick-response insertion, optionally polished by
// another tabu pass. Deterministic for fixed seeds.
SimMetrics run(const DynamicInstance& inst, const SimConfig& cfg);

struct SweepRow {
  std::string instance;
  double delta = 0.0;
  double psi = 0.0;
  double tau = 0.0;
  CostBreakdown cost;
  double mean_response_ms = 0.0;
};

// Cross-product run with shared seeds; independent cells may be spread
// over `workers` threads.
std::vector<SweepRow> sweep_safety_stock(
    const std::vector<StaticInstance>& instances,
    const std::vector<double>& psi_grid, const std::vector<double>& delta_grid,
    double high_fraction, std::uint64_t seed_dynamize, const SimConfig& cfg,
    unsigned workers = 1);

std::string sweep_csv(const std::vector<SweepRow>& rows);

struct PolishComparison {
  double obj_avg_eiadr = 0.0;   // Obj_A, plain quick-response arm
  double obj_best_eiadr = 0.0;  // Obj_B
  double cpu_avg_eiadr = 0.0;
  double cpu_best_eiadr = 0.0;      // time of the best-objective run
  double cpu_min_eiadr = 0.0;       // minimum time across runs
  double obj_avg_polished = 0.0;
  double obj_best_polished = 0.0;
  double cpu_avg_polished = 0.0;
  double cpu_best_polished = 0.0;
  double cpu_min_polished = 0.0;
  double bre = 0.0;  // (best_eiadr - best_polished) / best_polished * 100
  double are = 0.0;  // analogue on averages
  int runs = 0;
};

// Runs both arms `runs` times with tabu-seed offsets base+0..base+runs-1
// on the same dynamized instance.
PolishComparison compare_polish(const DynamicInstance& inst,
                                const SimConfig& cfg, int runs = 10);

std::string comparison_csv_row(const std::string& instance,
                               const PolishComparison& cmp);
std::string comparison_csv_header();

}  // namespace amr
