#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace amr {

struct RequestSpec {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  double demand = 0.0;
  double ready = 0.0;  // e_i
  double due = 0.0;    // h_i
  double service_mean = 0.0;
  double service_var = 0.0;
};

enum class Priority { High, Low };

struct StaticInstance {
  std::string name;
  double depot_x = 0.0;
  double depot_y = 0.0;
  double capacity = 0.0;  // Q
  int vehicle_count = 0;  // from the file header, informational
  double horizon_begin = 0.0;
  double horizon_end = 0.0;
  std::vector<RequestSpec> requests;
};

struct DynamicEvent {
  double arrival = 0.0;  // a_i > 0
  RequestSpec request;
  Priority priority = Priority::Low;
};

struct DynamicInstance {
  StaticInstance static_part;
  std::vector<DynamicEvent> events;  // sorted by (arrival, id)
  double delta = 0.0;
  double high_fraction = 0.5;
  std::uint64_t seed = 0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_ = 0;
};

// Solomon/Lackner text layout: a VEHICLE header with count and capacity,
// then customer rows (id, x, y, demand, ready, due, service). Row id 0 is
// the depot; its window is the planning horizon.
StaticInstance parse_solomon(std::istream& in, const std::string& name = "");
StaticInstance load_solomon_file(const std::filesystem::path& path);
std::string serialize_solomon(const StaticInstance& inst);

// Assigns the same service-time variance to every request.
void set_service_variance(StaticInstance& inst, double var);

// Euclidean mean travel time between node ids (0 = depot).
double mean_travel_time(const StaticInstance& inst, int i, int j);

// Splits requests into a static part and a timed, prioritized dynamic
// stream. floor(delta * n) requests become dynamic; ceil(high_fraction *
// n_d) of them HIGH. Arrival epochs are uniform on (0, e_i - t0_i] so a
// dynamic request stays reachable from the depot on arrival. Deterministic
// for a fixed seed.
DynamicInstance dynamize(const StaticInstance& inst, double delta,
                         double high_fraction, std::uint64_t seed);

// JSON sidecar {delta, seed, high_fraction, events:[{id, a, priority}]}
// so a dynamization is replayable byte-for-byte.
std::string serialize_dynamization(const DynamicInstance& dyn);
DynamicInstance apply_dynamization(const StaticInstance& inst,
                                   const std::string& record_json);

}  // namespace amr
