#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "amr/eiadr.hpp"
#include "amr/instance.hpp"
#include "amr/routing.hpp"
#include "amr/simulator.hpp"
#include "amr/tabu.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string instance_path;
  std::string out_dir;
  double psi = 0.2;
  double eps = 0.05;
  double travel_var = 10.0;
  double service_var = 10.0;
  double xi0 = 1000.0, xi1 = 1.0, xi2 = 100.0, xi3 = 3000.0;
  int iters = 500;
  std::uint64_t seed_tabu = 1;
};

fs::path ensure_out_dir(const std::string& requested, const std::string& cmd) {
  fs::path dir;
  if (!requested.empty()) {
    dir = requested;
  } else {
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    const auto stamp =
        std::chrono::duration_cast<std::chrono::seconds>(now).count();
    dir = fs::path("runs") / (cmd + "-" + std::to_string(stamp));
  }
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

amr::SimConfig make_sim_config(const CommonOpts& o) {
  amr::SimConfig cfg;
  cfg.costs = {o.xi0, o.xi1, o.xi2, o.xi3};
  cfg.psi = o.psi;
  cfg.eps = o.eps;
  cfg.travel_var = o.travel_var;
  cfg.service_var = o.service_var;
  cfg.ts_iterations = o.iters;
  cfg.seed_tabu = o.seed_tabu;
  cfg.seed_sim = o.seed_tabu + 1000;
  return cfg;
}

json manifest_base(const std::string& cmd, const CommonOpts& o) {
  json m;
  m["command"] = cmd;
  m["instance"] = o.instance_path;
  m["psi"] = o.psi;
  m["eps"] = o.eps;
  m["travel_var"] = o.travel_var;
  m["service_var"] = o.service_var;
  m["costs"] = {{"xi0", o.xi0}, {"xi1", o.xi1}, {"xi2", o.xi2}, {"xi3", o.xi3}};
  m["iters"] = o.iters;
  m["seed"] = o.seed_tabu;
  return m;
}

// Table-style listing: one line per AMR, dynamic request ids marked "*".
std::string route_listing(const amr::Solution& sol,
                          const std::set<int>& dynamic_ids) {
  std::ostringstream os;
  for (const auto& r : sol.routes) {
    os << "AMR" << r.amr_id + 1 << "\t";
    for (std::size_t p = 0; p < r.stops.size(); ++p) {
      if (p) os << "-";
      os << r.stops[p];
      if (dynamic_ids.count(r.stops[p])) os << "*";
    }
    os << "\n";
  }
  if (!sol.rejected.empty()) {
    os << "rejected\t";
    bool first = true;
    for (int id : sol.rejected) {
      if (!first) os << ",";
      os << id << "*";
      first = false;
    }
    os << "\n";
  }
  return os.str();
}

json metrics_json(const amr::SimMetrics& m) {
  json j;
  j["cost"] = {{"travel", m.cost.travel},
               {"delay", m.cost.delay},
               {"fixed", m.cost.fixed},
               {"rejection", m.cost.rejection},
               {"total", m.cost.total()}};
  j["tau"] = m.tau;
  j["tau_vacuous"] = m.tau_vacuous;
  j["n_dynamic"] = m.n_dynamic;
  j["n_served_dynamic"] = m.n_served_dynamic;
  j["n_rejected"] = m.n_rejected;
  j["mean_response_ms"] = m.mean_response_ms;
  j["max_response_ms"] = m.max_response_ms;
  j["stage1_cost"] = m.stage1_cost;
  j["stage1_amrs"] = m.stage1_amrs;
  j["amr_cap"] = m.amr_cap;
  j["wall_seconds"] = m.wall_seconds;
  return j;
}

unsigned worker_count() {
  if (const char* env = std::getenv("AMR_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return 1;
}

int cmd_solve_static(const CommonOpts& o, bool trace) {
  if (!fs::exists(o.instance_path)) {
    std::cerr << "error: instance file not found: " << o.instance_path << "\n";
    return 2;
  }
  amr::StaticInstance inst = amr::load_solomon_file(o.instance_path);
  amr::set_service_variance(inst, o.service_var);
  amr::Problem prob(inst, o.travel_var);

  amr::PlanParams params;
  params.costs = {o.xi0, o.xi1, o.xi2, o.xi3};
  params.psi = o.psi;
  params.eps = o.eps;
  params.mode = amr::CapacityMode::Static;

  std::vector<int> ids;
  for (const auto& r : inst.requests) ids.push_back(r.id);

  const fs::path dir = ensure_out_dir(o.out_dir, "solve-static");
  amr::Solution sol = amr::greedy_initial(prob, params, ids);
  if (o.iters > 0 && !ids.empty()) {
    amr::TabuParams tp;
    tp.iterations = o.iters;
    tp.seed = o.seed_tabu;
    std::ofstream trace_file;
    if (trace) {
      trace_file.open(dir / "ts_trace.csv");
      tp.trace = &trace_file;
    }
    sol = amr::tabu_search(sol, prob, params, tp);
  }
  const auto cost = amr::solution_cost(sol, prob, params.costs);
  write_file(dir / "solution.json", amr::serialize_solution(sol, cost));
  json manifest = manifest_base("solve-static", o);
  manifest["outputs"] = {"solution.json"};
  write_file(dir / "manifest.json", manifest.dump(2));
  std::cout << "total_cost=" << cost.total() << " amrs=" << sol.active_amrs()
            << " out=" << dir.string() << "\n";
  return 0;
}

int cmd_simulate(const CommonOpts& o, double delta, double high_fraction,
                 std::uint64_t seed_dynamize, const std::string& record_path,
                 const std::string& polish, int fixed_m) {
  if (!fs::exists(o.instance_path)) {
    std::cerr << "error: instance file not found: " << o.instance_path << "\n";
    return 2;
  }
  amr::StaticInstance inst = amr::load_solomon_file(o.instance_path);

  amr::DynamicInstance dyn;
  if (!record_path.empty()) {
    if (!fs::exists(record_path)) {
      std::cerr << "error: dynamization record not found: " << record_path
                << "\n";
      return 2;
    }
    std::ifstream in(record_path);
    std::stringstream buf;
    buf << in.rdbuf();
    dyn = amr::apply_dynamization(inst, buf.str());
  } else {
    dyn = amr::dynamize(inst, delta, high_fraction, seed_dynamize);
  }

  amr::SimConfig cfg = make_sim_config(o);
  if (fixed_m > 0) {
    cfg.m_policy = amr::MPolicy::Fixed;
    cfg.fixed_m = fixed_m;
  }
  if (polish == "ts-after-all") cfg.polish = amr::PolishMode::AfterAll;
  if (polish == "ts-per-request") cfg.polish = amr::PolishMode::PerRequest;

  const fs::path dir = ensure_out_dir(o.out_dir, "simulate");
  const amr::SimMetrics metrics = amr::run(dyn, cfg);

  std::set<int> dynamic_ids;
  for (const auto& ev : dyn.events) dynamic_ids.insert(ev.request.id);

  json out = metrics_json(metrics);
  std::ofstream timeline(dir / "timeline.jsonl");
  for (const auto& rec : metrics.timeline) {
    timeline << amr::serialize_record(rec) << "\n";
  }
  std::ostringstream listing;
  listing << "prior routes (static requests)\n"
          << route_listing(metrics.prior_solution, {})
          << "\nfinal routes (dynamic requests marked *)\n"
          << route_listing(metrics.final_solution, dynamic_ids);
  write_file(dir / "routes.txt", listing.str());
  write_file(dir / "dynamization.json", amr::serialize_dynamization(dyn));

  if (cfg.polish != amr::PolishMode::None) {
    amr::SimConfig plain = cfg;
    plain.polish = amr::PolishMode::None;
    const amr::SimMetrics base = amr::run(dyn, plain);
    out["eiadr_only"] = metrics_json(base);
    const double bp = metrics.cost.total();
    out["bre"] = bp > 0.0 ? (base.cost.total() - bp) / bp * 100.0 : 0.0;
    out["are"] = out["bre"];
  }
  write_file(dir / "metrics.json", out.dump(2));

  json manifest = manifest_base("simulate", o);
  manifest["delta"] = dyn.delta;
  manifest["high_fraction"] = dyn.high_fraction;
  manifest["seed_dynamize"] = dyn.seed;
  manifest["polish"] = polish;
  manifest["fixed_m"] = fixed_m;
  manifest["outputs"] = {"metrics.json", "timeline.jsonl", "routes.txt",
                         "dynamization.json"};
  write_file(dir / "manifest.json", manifest.dump(2));
  std::cout << "tau=" << metrics.tau << " total_cost=" << metrics.cost.total()
            << " out=" << dir.string() << "\n";
  return 0;
}

int cmd_sweep(const CommonOpts& o, const std::string& instances_arg,
              std::vector<double> psi_grid, std::vector<double> delta_grid,
              double high_fraction, std::uint64_t seed_dynamize, int runs) {
  std::vector<amr::StaticInstance> instances;
  const fs::path root(instances_arg);
  if (fs::is_directory(root)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(root)) {
      if (e.is_regular_file() && e.path().extension() == ".txt") {
        files.push_back(e.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) instances.push_back(amr::load_solomon_file(f));
  } else if (fs::exists(root)) {
    instances.push_back(amr::load_solomon_file(root));
  } else {
    std::cerr << "error: instance path not found: " << instances_arg << "\n";
    return 2;
  }

  // Grids given as percentages are normalized to fractions.
  for (double& d : delta_grid) {
    if (d > 1.0) d /= 100.0;
  }

  const fs::path dir = ensure_out_dir(o.out_dir, "sweep");
  amr::SimConfig cfg = make_sim_config(o);
  for (auto& inst : instances) {
    amr::set_service_variance(inst, o.service_var);
  }
  if (instances.empty()) {
    std::cerr << "warning: no instances found under " << instances_arg << "\n";
  }
  const auto rows = amr::sweep_safety_stock(instances, psi_grid, delta_grid,
                                            high_fraction, seed_dynamize, cfg,
                                            worker_count());
  write_file(dir / "sweep.csv", amr::sweep_csv(rows));

  if (runs > 1) {
    std::ostringstream cmp_csv;
    cmp_csv << amr::comparison_csv_header();
    for (const auto& inst : instances) {
      for (double delta : delta_grid) {
        const auto dyn =
            amr::dynamize(inst, delta, high_fraction, seed_dynamize);
        const auto cmp = amr::compare_polish(dyn, cfg, runs);
        std::ostringstream label;
        label << inst.name << "_" << delta * 100 << "%";
        cmp_csv << amr::comparison_csv_row(label.str(), cmp);
      }
    }
    write_file(dir / "compare.csv", cmp_csv.str());
  }

  json manifest = manifest_base("sweep", o);
  manifest["instances"] = instances_arg;
  manifest["psi_grid"] = psi_grid;
  manifest["delta_grid"] = delta_grid;
  manifest["high_fraction"] = high_fraction;
  manifest["seed_dynamize"] = seed_dynamize;
  manifest["runs"] = runs;
  manifest["outputs"] =
      runs > 1 ? json::array({"sweep.csv", "compare.csv"})
               : json::array({"sweep.csv"});
  write_file(dir / "manifest.json", manifest.dump(2));
  std::cout << "rows=" << rows.size() << " out=" << dir.string() << "\n";
  return 0;
}

std::vector<double> parse_grid(const std::string& csv) {
  std::vector<double> values;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) values.push_back(std::stod(tok));
  }
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage AMR routing: tabu-search prior planning plus a "
               "quick-response insertion procedure for dynamic requests"};
  app.require_subcommand(1);

  CommonOpts o;
  auto add_common = [&](CLI::App* cmd, bool needs_instance,
                        bool scalar_psi = true) {
    if (needs_instance) {
      cmd->add_option("--instance", o.instance_path, "Solomon-format instance")
          ->required();
    }
    cmd->add_option("--out", o.out_dir, "output directory");
    if (scalar_psi) cmd->add_option("--psi", o.psi, "safety stock in [0,1]");
    cmd->add_option("--eps", o.eps, "on-time confidence threshold");
    cmd->add_option("--travel-var", o.travel_var, "travel time variance");
    cmd->add_option("--service-var", o.service_var, "service time variance");
    cmd->add_option("--xi0", o.xi0, "loss of denial of service");
    cmd->add_option("--xi1", o.xi1, "travel cost per unit time");
    cmd->add_option("--xi2", o.xi2, "delay penalty per unit time");
    cmd->add_option("--xi3", o.xi3, "fixed cost per AMR");
    cmd->add_option("--iters", o.iters, "tabu search iterations");
    cmd->add_option("--seed", o.seed_tabu, "tabu search seed");
  };

  auto* solve = app.add_subcommand("solve-static", "plan prior routes");
  bool trace = false;
  add_common(solve, true);
  solve->add_flag("--trace", trace, "write per-iteration trace CSV");

  auto* sim = app.add_subcommand("simulate", "replay dynamic arrivals");
  double delta = 0.1;
  double high_fraction = 0.5;
  std::uint64_t seed_dynamize = 7;
  std::string record_path;
  std::string polish = "none";
  int fixed_m = 0;
  add_common(sim, true);
  sim->add_option("--delta", delta, "dynamic degree in [0,1)");
  sim->add_option("--high-fraction", high_fraction, "HIGH share of dynamics");
  sim->add_option("--seed-dynamize", seed_dynamize, "dynamization seed");
  sim->add_option("--dynamization-record", record_path,
                  "replay a stored dynamization record");
  sim->add_option("--polish", polish, "none | ts-after-all | ts-per-request");
  sim->add_option("--fixed-m", fixed_m, "fixed AMR cap (default: formula)");

  auto* sweep = app.add_subcommand("sweep", "safety-stock / dynamics sweep");
  std::string instances_arg;
  std::string psi_csv = "0,0.2,0.4,0.6,0.8";
  std::string delta_csv = "10,30,50,70,90";
  int runs = 1;
  add_common(sweep, false, false);
  sweep->add_option("--instances", instances_arg,
                    "instance file or directory of .txt files")
      ->required();
  sweep->add_option("--psi", psi_csv, "comma list of safety stocks");
  sweep->add_option("--delta", delta_csv,
                    "comma list of dynamic degrees (fractions or percents)");
  sweep->add_option("--high-fraction", high_fraction, "HIGH share of dynamics");
  sweep->add_option("--seed-dynamize", seed_dynamize, "dynamization seed");
  sweep->add_option("--runs", runs, "runs per cell for the comparison table");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve_static(o, trace);
    if (sim->parsed()) {
      if (delta < 0.0 || delta >= 1.0) {
        std::cerr << "error: --delta must lie in [0, 1)\n";
        return 1;
      }
      return cmd_simulate(o, delta, high_fraction, seed_dynamize, record_path,
                          polish, fixed_m);
    }
    if (sweep->parsed()) {
      return cmd_sweep(o, instances_arg, parse_grid(psi_csv),
                       parse_grid(delta_csv), high_fraction, seed_dynamize,
                       runs);
    }
  } catch (const amr::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
