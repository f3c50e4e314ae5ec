#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <random>
#include <utility>
#include <vector>

#include "amr/routing.hpp"

namespace amr {

enum class Operator { Swap, TwoOpt, Relocate };

// Symmetric matrix of remaining tabu tenures, keyed by request-id pairs.
class TenureMatrix {
 public:
  int get(int j1, int j2) const;
  void set(int j1, int j2, int tenure);
  // Decrements nonzero entries sharing request j1 but not paired with j2.
  void decrement_row(int j1, int j2);
  // Decrements every nonzero entry except the one keyed (j1, j2).
  void decrement_all();
  void decrement_all_except(int j1, int j2);
  template <typename F>
  void for_each_nonzero(F&& f) const {
    for (const auto& [key, v] : entries_) {
      if (v > 0) f(key.first, key.second, v);
    }
  }

 private:
  static std::pair<int, int> canon(int j1, int j2);
  std::map<std::pair<int, int>, int> entries_;
};

struct TabuState {
  std::array<TenureMatrix, 3> tenure;        // B1..B3
  std::array<double, 3> weight = {1, 1, 1};  // rho
  std::array<double, 3> prob = {1.0 / 3, 1.0 / 3, 1.0 / 3};  // P_i
};

struct TabuParams {
  int iterations = 500;  // N
  int tenure_min = 40;   // L1
  int tenure_max = 50;   // L2
  double reward_improve = 2.0;  // delta1
  double reward_accept = 0.5;   // delta2
  std::uint64_t seed = 1;
  // Full move enumeration up to this many requests; larger instances
  // sample ceil(n^2/4) random moves per iteration.
  std::size_t full_enum_limit = 200;
  std::ostream* trace = nullptr;  // per-iteration CSV when set
};

struct Move {
  Operator op = Operator::Swap;
  int j1 = 0;
  int j2 = 0;
};

struct Candidate {
  Move move;
  Solution solution;
  double cost = 0.0;
};

struct IterationInfo {
  int iteration = 0;
  Operator op = Operator::Swap;
  double current_cost = 0.0;
  double best_cost = 0.0;
  const TabuState* state = nullptr;
};
using TabuMonitor = std::function<void(const IterationInfo&)>;

// Requests sorted by window lower bound; each appended to the end of the
// first sub-route that stays capacity- and window-feasible, else a new AMR.
Solution greedy_initial(const Problem& prob, const PlanParams& params,
                        const std::vector<int>& request_ids);

// One move applied then repaired (overload repair, then time-window
// repair); infeasible candidates are dropped. `moves` limits enumeration
// when non-null (sampling path).
std::vector<Candidate> generate_neighborhood(
    const Solution& sol, Operator op, const Problem& prob,
    const PlanParams& params, const std::vector<std::pair<int, int>>* moves = nullptr);

Solution tabu_search(const Solution& initial, const Problem& prob,
                     const PlanParams& params, const TabuParams& tparams,
                     const TabuMonitor& monitor = {});

}  // namespace amr
