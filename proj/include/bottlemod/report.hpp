#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bottlemod/oracle.hpp"
#include "bottlemod/workflow.hpp"

// Analysis reports and plot series.
namespace bottlemod::report {

using nlohmann::json;

// Shortest decimal that reads back to the same double.
inline std::string number(double v) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline json optional_number(std::optional<double> v) {
  return v && std::isfinite(*v) ? json(*v) : json(nullptr);
}

// Slot name of a limiter; null for the finished marker.
inline json limiter_slot(const Process& proc, const Limiter& l) {
  if (l.kind == Limiter::Kind::data) return proc.data_requirements.at(static_cast<std::size_t>(l.index)).name;
  if (l.kind == Limiter::Kind::resource) return proc.resource_requirements.at(static_cast<std::size_t>(l.index)).name;
  return nullptr;
}

inline json to_json(const Workflow& wf, const WorkflowResult& r) {
  json procs = json::array();
  for (const auto& po : r.processes) {
    const Process& proc = wf.find(po.name)->process;
    json segs = json::array();
    for (const auto& s : po.result.bottlenecks) {
      json co = json::array();
      for (const auto& c : s.co_limiters) co.push_back(to_string(c));
      segs.push_back({{"t_a", s.t_a},
                      {"t_b", optional_number(s.t_b)},
                      {"limiter", to_string(s.limiter)},
                      {"slot", limiter_slot(proc, s.limiter)},
                      {"co_limiters", co}});
    }
    json stalls = json::array();
    for (const auto& s : po.result.stalls) stalls.push_back({{"t_a", s.t_a}, {"t_b", s.t_b}, {"level", s.level}});
    procs.push_back({{"name", po.name},
                     {"started", po.started},
                     {"start_time", po.started ? json(po.result.start_time) : json(nullptr)},
                     {"completion_time", optional_number(po.result.completion_time)},
                     {"target_progress", po.result.target},
                     {"bottlenecks", segs},
                     {"stalls", stalls}});
  }
  return {{"makespan", optional_number(r.makespan)},
          {"passes", r.passes},
          {"critical_path", critical_path(wf, r)},
          {"processes", procs}};
}

// Largest deviation of the oracle trajectories from the analytic progress,
// as a fraction of each process's target.
inline double max_deviation(const WorkflowResult& exact, const oracle::WorkflowResult& sim) {
  double worst = 0.0;
  for (const auto& po : exact.processes) {
    const auto it = sim.processes.find(po.name);
    if (it == sim.processes.end()) continue;
    const double scale = std::max(po.result.target, 1e-300);
    for (const auto& s : it->second.samples)
      worst = std::max(worst, std::abs(s.progress - po.result.progress.eval(s.t)) / scale);
  }
  return worst;
}

inline bool jumps(const PiecewiseFn& f, double t) {
  if (!(t > f.start())) return false;
  const double l = f.eval_left(t), r = f.eval(t);
  return std::abs(l - r) > abs_tol(l, r);
}

enum class Series { progress, usage, buffered };

inline std::optional<Series> parse_series(const std::string& s) {
  if (s == "progress") return Series::progress;
  if (s == "usage") return Series::usage;
  if (s == "buffered") return Series::buffered;
  return std::nullopt;
}

// Every breakpoint of the given functions inside [0, horizon] plus `samples`
// uniform points, sorted and unique.
inline std::vector<double> sample_times(const std::vector<const PiecewiseFn*>& fns, double horizon, int samples) {
  std::vector<double> ts;
  for (const auto* f : fns)
    for (double x : f->breakpoints())
      if (x >= 0.0 && x <= horizon) ts.push_back(x);
  for (int i = 0; i < samples; ++i) ts.push_back(samples == 1 ? 0.0 : horizon * i / (samples - 1));
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

inline double series_horizon(const WorkflowResult& r) {
  double h = 0.0;
  for (const auto& po : r.processes) {
    if (po.result.completion_time) h = std::max(h, *po.result.completion_time);
    for (double x : po.result.progress.breakpoints()) h = std::max(h, x);
  }
  return h > 0.0 ? 1.05 * h : 1.0;
}

// CSV rows `t,value,label` for one process. At a jump the left limit is
// emitted first so plotted curves keep their corners.
inline void write_series(std::ostream& out, const Workflow& wf, const ProcessOutcome& po, Series kind, int samples,
                         double horizon) {
  const Process& proc = wf.find(po.name)->process;
  out << "t,value,label\n";
  auto emit = [&](const PiecewiseFn& f, const std::string& label, const std::vector<double>& ts) {
    for (double t : ts) {
      if (jumps(f, t)) out << number(t) << ',' << number(f.eval_left(t)) << ',' << label << '\n';
      out << number(t) << ',' << number(f.eval(t)) << ',' << label << '\n';
    }
  };
  switch (kind) {
    case Series::progress: {
      const auto ts = sample_times({&po.result.progress, &po.result.data_progress}, horizon, samples);
      for (double t : ts) {
        const PiecewiseFn& p = po.result.progress;
        const BottleneckSegment* seg = po.result.segment_at(t);
        const std::string label = seg ? to_string(seg->limiter) : "idle";
        if (jumps(p, t)) out << number(t) << ',' << number(p.eval_left(t)) << ',' << label << '\n';
        out << number(t) << ',' << number(p.eval(t)) << ',' << label << '\n';
      }
      break;
    }
    case Series::usage: {
      if (!po.usage) break;
      for (std::size_t l = 0; l < po.usage->resources.size(); ++l) {
        const PiecewiseFn& demand = po.usage->resources[l].demand;
        const PiecewiseFn& input = po.context.resource_inputs[l];
        const auto ts = sample_times({&demand, &input}, horizon, samples);
        const std::string label = proc.resource_requirements[l].name;
        for (double t : ts) {
          const double i = input.eval(t);
          out << number(t) << ',' << number(i > 0.0 ? demand.eval(t) / i : 0.0) << ',' << label << '\n';
        }
      }
      break;
    }
    case Series::buffered: {
      if (!po.usage) break;
      for (std::size_t k = 0; k < po.usage->data.size(); ++k) {
        const PiecewiseFn& b = po.usage->data[k].buffered.fn;
        emit(b, proc.data_requirements[k].name, sample_times({&b}, horizon, samples));
      }
      break;
    }
  }
}

inline std::string sweep_csv(const std::vector<SweepPoint>& points) {
  std::string out = "value,makespan";
  if (!points.empty())
    for (const auto& [name, c] : points.front().completions) out += "," + name + "_completion";
  out += '\n';
  for (const auto& p : points) {
    out += number(p.value) + ',' + (p.makespan ? number(*p.makespan) : "");
    for (const auto& [name, c] : p.completions) out += ',' + (c ? number(*c) : "");
    out += '\n';
  }
  return out;
}

}  // namespace bottlemod::report
