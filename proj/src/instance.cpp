#include "amr/instance.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace amr {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::string cleaned = line;
  std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
  std::istringstream is(cleaned);
  std::vector<std::string> tokens;
  std::string tok;
  while (is >> tok) tokens.push_back(tok);
  return tokens;
}

bool parse_number(const std::string& tok, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(tok, &pos);
    return pos == tok.size();
  } catch (const std::exception&) {
    return false;
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

StaticInstance parse_solomon(std::istream& in, const std::string& name) {
  StaticInstance inst;
  inst.name = name;

  std::string line;
  int lineno = 0;
  bool vehicle_header_seen = false;
  bool depot_seen = false;
  bool first_content_line = true;
  std::set<int> seen_ids;

  while (std::getline(in, line)) {
    ++lineno;
    const auto tokens = tokenize(line);
    if (tokens.empty()) continue;

    std::size_t numeric = 0;
    std::vector<double> values(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (parse_number(tokens[i], values[i])) ++numeric;
    }
    if (numeric == 0) {
      // Section header (VEHICLE, CUSTOMER, column captions) or, on the
      // very first line, the instance name.
      if (first_content_line && tokens.size() == 1 && inst.name.empty()) {
        inst.name = tokens[0];
      }
      first_content_line = false;
      continue;
    }
    first_content_line = false;
    if (numeric != tokens.size()) {
      throw ParseError("non-numeric field in data row", lineno);
    }

    if (tokens.size() == 2 && !vehicle_header_seen && !depot_seen) {
      inst.vehicle_count = static_cast<int>(values[0]);
      inst.capacity = values[1];
      vehicle_header_seen = true;
      continue;
    }
    if (tokens.size() != 7) {
      throw ParseError("malformed row: expected 7 fields, got " +
                           std::to_string(tokens.size()),
                       lineno);
    }

    const int id = static_cast<int>(values[0]);
    if (static_cast<double>(id) != values[0] || id < 0) {
      throw ParseError("node id must be a non-negative integer", lineno);
    }
    if (!seen_ids.insert(id).second) {
      throw ParseError("duplicate id " + std::to_string(id), lineno);
    }
    if (id == 0) {
      inst.depot_x = values[1];
      inst.depot_y = values[2];
      inst.horizon_begin = values[4];
      inst.horizon_end = values[5];
      depot_seen = true;
      continue;
    }
    RequestSpec req;
    req.id = id;
    req.x = values[1];
    req.y = values[2];
    req.demand = values[3];
    req.ready = values[4];
    req.due = values[5];
    req.service_mean = values[6];
    if (req.demand <= 0.0) {
      throw ParseError("request demand must be positive", lineno);
    }
    if (inst.capacity > 0.0 && req.demand > inst.capacity) {
      throw ParseError("request demand exceeds vehicle capacity", lineno);
    }
    if (req.ready > req.due) {
      throw ParseError("time window lower bound exceeds upper bound", lineno);
    }
    if (depot_seen &&
        (req.ready < inst.horizon_begin || req.due > inst.horizon_end)) {
      throw ParseError("time window outside depot horizon", lineno);
    }
    inst.requests.push_back(req);
  }
  return inst;
}

StaticInstance load_solomon_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open instance file: " + path.string());
  }
  return parse_solomon(in, path.stem().string());
}

std::string serialize_solomon(const StaticInstance& inst) {
  std::ostringstream os;
  os << (inst.name.empty() ? "INSTANCE" : inst.name) << "\n\n";
  os << "VEHICLE\nNUMBER CAPACITY\n";
  os << inst.vehicle_count << " " << fmt(inst.capacity) << "\n\n";
  os << "CUSTOMER\n";
  os << "CUST_NO XCOORD YCOORD DEMAND READY DUE SERVICE\n";
  os << "0 " << fmt(inst.depot_x) << " " << fmt(inst.depot_y) << " 0 "
     << fmt(inst.horizon_begin) << " " << fmt(inst.horizon_end) << " 0\n";
  for (const auto& r : inst.requests) {
    os << r.id << " " << fmt(r.x) << " " << fmt(r.y) << " " << fmt(r.demand)
       << " " << fmt(r.ready) << " " << fmt(r.due) << " "
       << fmt(r.service_mean) << "\n";
  }
  return os.str();
}

void set_service_variance(StaticInstance& inst, double var) {
  for (auto& r : inst.requests) r.service_var = var;
}

double mean_travel_time(const StaticInstance& inst, int i, int j) {
  auto coords = [&](int id) -> std::pair<double, double> {
    if (id == 0) return {inst.depot_x, inst.depot_y};
    for (const auto& r : inst.requests) {
      if (r.id == id) return {r.x, r.y};
    }
    throw std::out_of_range("unknown node id " + std::to_string(id));
  };
  const auto [xi, yi] = coords(i);
  const auto [xj, yj] = coords(j);
  return std::hypot(xi - xj, yi - yj);
}

DynamicInstance dynamize(const StaticInstance& inst, double delta,
                         double high_fraction, std::uint64_t seed) {
  if (delta < 0.0 || delta >= 1.0) {
    throw std::invalid_argument("delta must lie in [0, 1)");
  }
  if (high_fraction < 0.0 || high_fraction > 1.0) {
    throw std::invalid_argument("high_fraction must lie in [0, 1]");
  }

  const std::size_t n = inst.requests.size();
  const auto n_dynamic = static_cast<std::size_t>(delta * static_cast<double>(n));

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<bool> is_dynamic(n, false);
  for (std::size_t i = 0; i < n_dynamic; ++i) is_dynamic[order[i]] = true;
  const auto n_high = static_cast<std::size_t>(
      std::ceil(high_fraction * static_cast<double>(n_dynamic)));

  DynamicInstance dyn;
  dyn.delta = delta;
  dyn.high_fraction = high_fraction;
  dyn.seed = seed;
  dyn.static_part = inst;
  dyn.static_part.requests.clear();

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t rank = 0; rank < n_dynamic; ++rank) {
    const auto& req = inst.requests[order[rank]];
    DynamicEvent ev;
    ev.request = req;
    ev.priority = rank < n_high ? Priority::High : Priority::Low;
    const double t0 = mean_travel_time(inst, 0, req.id);
    const double ub = std::max(0.0, req.ready - t0);
    const double u = unit(rng);
    // a_i must be strictly positive; ub == 0 marks a request unreachable
    // on time from the depot, which gets a token early epoch.
    ev.arrival = ub > 0.0 ? std::max(u * ub, ub * 1e-12) : 1e-3;
    if (ev.arrival <= 0.0) ev.arrival = 1e-3;
    dyn.events.push_back(ev);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_dynamic[i]) dyn.static_part.requests.push_back(inst.requests[i]);
  }
  std::sort(dyn.events.begin(), dyn.events.end(),
            [](const DynamicEvent& a, const DynamicEvent& b) {
              if (a.arrival != b.arrival) return a.arrival < b.arrival;
              return a.request.id < b.request.id;
            });
  return dyn;
}

std::string serialize_dynamization(const DynamicInstance& dyn) {
  nlohmann::json j;
  j["delta"] = dyn.delta;
  j["seed"] = dyn.seed;
  j["high_fraction"] = dyn.high_fraction;
  j["events"] = nlohmann::json::array();
  for (const auto& ev : dyn.events) {
    j["events"].push_back(
        {{"id", ev.request.id},
         {"a", ev.arrival},
         {"priority", ev.priority == Priority::High ? "HIGH" : "LOW"}});
  }
  return j.dump(2);
}

DynamicInstance apply_dynamization(const StaticInstance& inst,
                                   const std::string& record_json) {
  const auto j = nlohmann::json::parse(record_json);
  DynamicInstance dyn;
  dyn.delta = j.at("delta").get<double>();
  dyn.seed = j.at("seed").get<std::uint64_t>();
  dyn.high_fraction = j.at("high_fraction").get<double>();
  dyn.static_part = inst;
  dyn.static_part.requests.clear();

  std::set<int> dynamic_ids;
  for (const auto& e : j.at("events")) {
    dynamic_ids.insert(e.at("id").get<int>());
  }
  for (const auto& r : inst.requests) {
    if (dynamic_ids.count(r.id)) continue;
    dyn.static_part.requests.push_back(r);
  }
  for (const auto& e : j.at("events")) {
    const int id = e.at("id").get<int>();
    const auto it =
        std::find_if(inst.requests.begin(), inst.requests.end(),
                     [&](const RequestSpec& r) { return r.id == id; });
    if (it == inst.requests.end()) {
      throw std::runtime_error("dynamization record references unknown id " +
                               std::to_string(id));
    }
    DynamicEvent ev;
    ev.request = *it;
    ev.arrival = e.at("a").get<double>();
    ev.priority = e.at("priority").get<std::string>() == "HIGH"
                      ? Priority::High
                      : Priority::Low;
    dyn.events.push_back(ev);
  }
  std::sort(dyn.events.begin(), dyn.events.end(),
            [](const DynamicEvent& a, const DynamicEvent& b) {
              if (a.arrival != b.arrival) return a.arrival < b.arrival;
              return a.request.id < b.request.id;
            });
  return dyn;
}

}  // namespace amr
