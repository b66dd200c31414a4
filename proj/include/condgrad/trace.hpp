#pragma once

#include "condgrad/core.hpp"

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace condgrad {

struct TraceRow {
  std::int64_t t = 0;
  double f = 0.0;
  double fw_gap = 0.0;
  /// f(x_t) - f(x*) when the optimum is known, else the FW gap (an upper
  /// bound for convex objectives).
  double primal_gap = 0.0;
  double step_size = 0.0;
  std::int64_t lmo_calls = 0;
  std::int64_t foo_calls = 0;
  std::int64_t sfo_calls = 0;
  std::int64_t active_set_size = 0;
  std::int64_t wall_time_ns = 0;

  bool operator==(const TraceRow&) const = default;
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct RunTrace {
  static constexpr const char* kHeader =
      "t,f,fw_gap,primal_gap,step_size,lmo_calls,foo_calls,sfo_calls,active_set_size,wall_time_ns";

  std::vector<TraceRow> rows;
  bool primal_gap_exact = false;

  bool empty() const { return rows.empty(); }
  const TraceRow& back() const { return rows.back(); }
  std::size_t size() const { return rows.size(); }

  void write_csv(std::ostream& os) const {
    os << kHeader << '\n';
    for (const auto& r : rows) {
      os << r.t << ',' << format_double(r.f) << ',' << format_double(r.fw_gap) << ','
         << format_double(r.primal_gap) << ',' << format_double(r.step_size) << ','
         << r.lmo_calls << ',' << r.foo_calls << ',' << r.sfo_calls << ','
         << r.active_set_size << ',' << r.wall_time_ns << '\n';
    }
  }

  std::string to_csv() const {
    std::ostringstream os;
    write_csv(os);
    return os.str();
  }

  static RunTrace read_csv(std::istream& is) {
    RunTrace trace;
    std::string line;
    if (!std::getline(is, line) || line != kHeader)
      throw std::runtime_error("trace: unexpected header");
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::istringstream fields(line);
      std::string cell;
      std::vector<std::string> cells;
      while (std::getline(fields, cell, ',')) cells.push_back(cell);
      if (cells.size() != 10) throw std::runtime_error("trace: expected 10 columns");
      TraceRow r;
      r.t = std::stoll(cells[0]);
      r.f = std::stod(cells[1]);
      r.fw_gap = std::stod(cells[2]);
      r.primal_gap = std::stod(cells[3]);
      r.step_size = std::stod(cells[4]);
      r.lmo_calls = std::stoll(cells[5]);
      r.foo_calls = std::stoll(cells[6]);
      r.sfo_calls = std::stoll(cells[7]);
      r.active_set_size = std::stoll(cells[8]);
      r.wall_time_ns = std::stoll(cells[9]);
      trace.rows.push_back(r);
    }
    return trace;
  }
};

/// Oracle counters owned by one run. Only calls made by the algorithm
/// itself are counted; trace monitoring evaluations are free.
struct Counters {
  std::int64_t lmo = 0;
  std::int64_t foo = 0;
  std::int64_t sfo = 0;
  std::int64_t cache_hits = 0;
  std::int64_t negative_calls = 0;
  std::int64_t fw_steps = 0;
  std::int64_t away_steps = 0;
  std::int64_t drop_steps = 0;
  std::int64_t pairwise_steps = 0;
  std::int64_t descent_steps = 0;
  std::int64_t inner_iterations = 0;
};

/// Result of any runner: the trace plus the final state.
struct RunResult {
  RunTrace trace;
  Point x;
  std::optional<ActiveSet> active;
  Counters counters;
  bool converged = false;
  /// Bytes spent storing the convex decomposition (0 for decomposition-free
  /// methods).
  std::size_t active_set_bytes = 0;
};

/// Appends trace rows; handles primal-gap reporting, record_every and the
/// optional wall clock.
class TraceRecorder {
 public:
  using Observer = std::function<void(std::int64_t, const Point&)>;

  TraceRecorder(const Objective& objective, std::int64_t record_every, bool record_time,
                Observer observer = {})
      : objective_(objective),
        record_every_(record_every < 1 ? 1 : record_every),
        record_time_(record_time),
        observer_(std::move(observer)),
        start_(std::chrono::steady_clock::now()) {
    trace_.primal_gap_exact = objective.optimum_value.has_value();
  }

  /// Records row t unless thinned out by record_every (force overrides).
  void record(std::int64_t t, const Point& x, double fw_gap, double step_size,
              const Counters& c, std::size_t active_size, bool force = false) {
    if (!force && t % record_every_ != 0) return;
    if (!trace_.rows.empty() && trace_.rows.back().t >= t) return;
    TraceRow r;
    r.t = t;
    r.f = objective_.value(x);
    r.fw_gap = fw_gap;
    r.primal_gap = objective_.optimum_value ? r.f - *objective_.optimum_value : fw_gap;
    r.step_size = step_size;
    r.lmo_calls = c.lmo;
    r.foo_calls = c.foo;
    r.sfo_calls = c.sfo;
    r.active_set_size = static_cast<std::int64_t>(active_size);
    if (record_time_)
      r.wall_time_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                           std::chrono::steady_clock::now() - start_)
                           .count();
    trace_.rows.push_back(r);
    if (observer_) observer_(t, x);
  }

  RunTrace take() { return std::move(trace_); }
  const RunTrace& trace() const { return trace_; }

 private:
  const Objective& objective_;
  std::int64_t record_every_;
  bool record_time_;
  Observer observer_;
  std::chrono::steady_clock::time_point start_;
  RunTrace trace_;
};

}  // namespace condgrad
