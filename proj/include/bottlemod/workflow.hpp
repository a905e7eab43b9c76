#pragma once

#include <algorithm>
#include <functional>
#include <future>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "bottlemod/metrics.hpp"
#include "bottlemod/model.hpp"
#include "bottlemod/solver.hpp"

namespace bottlemod {

// A fraction of a shared pool. Without a fraction the holder gets whatever
// the fixed fractions of the pool leave over. On completion, a holder with
// beneficiaries hands its share to those of them still running.
struct PoolShare {
  std::string pool;
  std::optional<double> fraction;
  std::vector<std::string> release_to;
};

// An explicit input function or a pool share for one slot.
struct Binding {
  std::optional<PiecewiseFn> fn;
  std::optional<PoolShare> share;
};

struct Pool {
  std::string name;
  PiecewiseFn capacity;
};

struct DataEdge {
  std::string from;
  std::string output;
  std::string to;
  std::string slot;
};

struct Gate {
  std::string process;
  std::vector<std::string> after;
};

struct WorkflowProcess {
  Process process;
  double start_time = 0.0;
  std::map<std::string, Binding> bindings;  // by slot name
};

struct Workflow {
  std::vector<WorkflowProcess> processes;
  std::vector<Pool> pools;
  std::vector<DataEdge> edges;
  std::vector<Gate> gates;

  const WorkflowProcess* find(const std::string& name) const {
    for (const auto& p : processes)
      if (p.process.name == name) return &p;
    return nullptr;
  }
  WorkflowProcess* find(const std::string& name) {
    return const_cast<WorkflowProcess*>(static_cast<const Workflow*>(this)->find(name));
  }
  const Pool* find_pool(const std::string& name) const {
    for (const auto& p : pools)
      if (p.name == name) return &p;
    return nullptr;
  }
  // Predecessors via data edges and start gates, sorted and unique.
  std::vector<std::string> predecessors(const std::string& name) const {
    std::set<std::string> s;
    for (const auto& e : edges)
      if (e.to == name) s.insert(e.from);
    for (const auto& g : gates)
      if (g.process == name) s.insert(g.after.begin(), g.after.end());
    return {s.begin(), s.end()};
  }
  std::vector<std::string> gate_predecessors(const std::string& name) const {
    std::set<std::string> s;
    for (const auto& g : gates)
      if (g.process == name) s.insert(g.after.begin(), g.after.end());
    return {s.begin(), s.end()};
  }
};

namespace detail {

template <class T>
std::optional<std::size_t> index_of(const std::vector<T>& v, const std::string& name) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i].name == name) return i;
  return std::nullopt;
}

}  // namespace detail

// Fraction of `share`'s pool held by it, resolving the remainder share.
inline double effective_fraction(const Workflow& wf, const PoolShare& share) {
  if (share.fraction) return *share.fraction;
  double fixed = 0.0;
  int rest = 0;
  for (const auto& wp : wf.processes)
    for (const auto& [slot, b] : wp.bindings)
      if (b.share && b.share->pool == share.pool) {
        if (b.share->fraction) fixed += *b.share->fraction;
        else ++rest;
      }
  return rest == 0 ? 0.0 : std::max(0.0, 1.0 - fixed) / rest;
}

// Structural checks over the whole workflow.
inline std::vector<Violation> validate(const Workflow& wf) {
  std::vector<Violation> out;
  auto add = [&](Violation::Kind k, std::string where, std::string msg) {
    out.push_back({k, std::move(where), std::move(msg), std::nullopt});
  };
  std::set<std::string> names;
  for (const auto& wp : wf.processes) {
    const Process& p = wp.process;
    if (!names.insert(p.name).second) add(Violation::Kind::reference, p.name, "duplicate process name '" + p.name + "'");
    for (auto& v : validate(p)) out.push_back(std::move(v));
    std::set<std::string> slots;
    for (const auto& d : p.data_requirements)
      if (!slots.insert(d.name).second) add(Violation::Kind::reference, p.name, "duplicate slot name '" + d.name + "'");
    for (const auto& r : p.resource_requirements)
      if (!slots.insert(r.name).second) add(Violation::Kind::reference, p.name, "duplicate slot name '" + r.name + "'");
    if (!(wp.start_time >= 0.0) || !std::isfinite(wp.start_time))
      add(Violation::Kind::domain_start, p.name + ".start_time", "start_time must be finite and >= 0");

    for (const auto& [slot, b] : wp.bindings) {
      const std::string where = "bindings." + p.name + "." + slot;
      const bool is_data = detail::index_of(p.data_requirements, slot).has_value();
      const bool is_res = detail::index_of(p.resource_requirements, slot).has_value();
      if (!is_data && !is_res) {
        add(Violation::Kind::reference, where, "process '" + p.name + "' has no slot '" + slot + "'");
        continue;
      }
      if (b.fn.has_value() == b.share.has_value()) {
        add(Violation::Kind::binding, where, "a binding needs exactly one of a function or a pool share");
        continue;
      }
      if (b.share && is_data) add(Violation::Kind::binding, where, "data slots cannot draw from a pool");
      if (b.fn) {
        detail::check_start(out, where, *b.fn);
        if (is_data) detail::check_monotone(out, where, *b.fn);
        else if (auto w = negativity_witness(*b.fn))
          out.push_back({Violation::Kind::negative_resource_input, where, where + " is negative", *w});
      }
      if (b.share) {
        if (!wf.find_pool(b.share->pool))
          add(Violation::Kind::reference, where, "unknown pool '" + b.share->pool + "'");
        if (b.share->fraction && !(*b.share->fraction >= 0.0 && *b.share->fraction <= 1.0))
          add(Violation::Kind::binding, where, "fraction must lie in [0, 1]");
        for (const auto& ben : b.share->release_to) {
          const WorkflowProcess* bp = wf.find(ben);
          if (!bp) {
            add(Violation::Kind::reference, where, "unknown release_to process '" + ben + "'");
            continue;
          }
          bool holds = false;
          for (const auto& [s2, b2] : bp->bindings) holds |= b2.share && b2.share->pool == b.share->pool;
          if (!holds)
            add(Violation::Kind::binding, where,
                "release_to process '" + ben + "' holds no share of pool '" + b.share->pool + "'");
        }
      }
    }
    for (const auto& r : p.resource_requirements)
      if (!wp.bindings.count(r.name))
        add(Violation::Kind::binding, p.name + "." + r.name, "resource slot '" + r.name + "' is unbound");
    for (const auto& d : p.data_requirements) {
      int n = wp.bindings.count(d.name) ? 1 : 0;
      for (const auto& e : wf.edges) n += e.to == p.name && e.slot == d.name;
      if (n != 1)
        add(Violation::Kind::binding, p.name + "." + d.name,
            "data slot '" + d.name + "' must be bound exactly once (found " + std::to_string(n) + ")");
    }
  }
  for (const auto& e : wf.edges) {
    const std::string where = "edges." + e.from + "->" + e.to;
    const WorkflowProcess* from = wf.find(e.from);
    const WorkflowProcess* to = wf.find(e.to);
    if (!from) add(Violation::Kind::reference, where, "unknown process '" + e.from + "'");
    else if (!detail::index_of(from->process.outputs, e.output))
      add(Violation::Kind::reference, where, "process '" + e.from + "' has no output '" + e.output + "'");
    if (!to) add(Violation::Kind::reference, where, "unknown process '" + e.to + "'");
    else if (!detail::index_of(to->process.data_requirements, e.slot))
      add(Violation::Kind::reference, where, "process '" + e.to + "' has no data slot '" + e.slot + "'");
  }
  for (const auto& g : wf.gates) {
    if (!wf.find(g.process)) add(Violation::Kind::reference, "gates", "unknown process '" + g.process + "'");
    for (const auto& a : g.after)
      if (!wf.find(a)) add(Violation::Kind::reference, "gates." + g.process, "unknown process '" + a + "'");
  }
  for (const auto& pool : wf.pools) {
    detail::check_start(out, "pools." + pool.name, pool.capacity);
    if (auto w = negativity_witness(pool.capacity))
      out.push_back({Violation::Kind::negative_resource_input, "pools." + pool.name, "pool capacity is negative", *w});
    double fixed = 0.0;
    for (const auto& wp : wf.processes)
      for (const auto& [slot, b] : wp.bindings)
        if (b.share && b.share->pool == pool.name && b.share->fraction) fixed += *b.share->fraction;
    if (fixed > 1.0 + tolerance())
      add(Violation::Kind::pool_capacity, "pools." + pool.name,
          "fractions of pool '" + pool.name + "' sum to " + std::to_string(fixed) + " > 1");
  }
  return out;
}

// Topological order over data edges and start gates; among ready processes
// the lexicographically smallest name goes first.
inline std::vector<std::string> topo_order(const Workflow& wf) {
  std::map<std::string, std::set<std::string>> succ;
  std::map<std::string, int> indeg;
  for (const auto& wp : wf.processes) indeg[wp.process.name] = 0;
  auto link = [&](const std::string& a, const std::string& b) {
    if (!indeg.count(a) || !indeg.count(b)) return;
    if (succ[a].insert(b).second) ++indeg[b];
  };
  for (const auto& e : wf.edges) link(e.from, e.to);
  for (const auto& g : wf.gates)
    for (const auto& a : g.after) link(a, g.process);

  std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
  for (const auto& [n, d] : indeg)
    if (d == 0) ready.push(n);
  std::vector<std::string> order;
  while (!ready.empty()) {
    std::string n = ready.top();
    ready.pop();
    order.push_back(n);
    for (const auto& m : succ[n])
      if (--indeg[m] == 0) ready.push(m);
  }
  if (order.size() == indeg.size()) return order;

  // name one cycle among the remaining processes
  std::set<std::string> left;
  for (const auto& [n, d] : indeg)
    if (d > 0) left.insert(n);
  std::vector<std::string> path;
  std::map<std::string, std::size_t> pos;
  std::string n = *left.begin();
  while (!pos.count(n)) {
    pos[n] = path.size();
    path.push_back(n);
    for (const auto& m : succ[n])
      if (left.count(m)) {
        n = m;
        break;
      }
  }
  std::vector<std::string> cycle(path.begin() + static_cast<std::ptrdiff_t>(pos[n]), path.end());
  std::ostringstream msg;
  msg << "cyclic dependency: ";
  for (const auto& c : cycle) msg << c << " -> ";
  msg << cycle.front();
  throw CyclicDependency(msg.str(), cycle);
}

struct ProcessOutcome {
  std::string name;
  bool started = true;
  ProgressResult result;
  ExecutionContext context;                      // effective inputs used for solving
  std::vector<PiecewiseFn> allocated;            // pool-resolved allocation per resource slot
  std::vector<PiecewiseFn> reported;             // allocation with pool shares tightened to demand
  std::optional<UsageReport> usage;
};

struct WorkflowResult {
  std::vector<std::string> order;
  std::vector<ProcessOutcome> processes;  // in topological order
  std::optional<double> makespan;         // absent if some process never completes
  int passes = 0;

  const ProcessOutcome& at(const std::string& name) const {
    for (const auto& p : processes)
      if (p.name == name) return p;
    throw InvalidParameter("no process named '" + name + "' in the result");
  }
  std::optional<double> completion(const std::string& name) const { return at(name).result.completion_time; }
};

struct AnalyzeOptions {
  bool with_usage = true;
  bool verify_retrospective = false;  // re-solve holders on their actual demand
  int max_passes = 64;
  SolverOptions solver;
  std::optional<std::vector<std::string>> order;  // override the topological order
};

namespace detail {

template <class F>
auto in_process(const std::string& name, F&& f) -> decltype(f()) {
  const std::string pre = "in process '" + name + "': ";
  try {
    return f();
  } catch (const NoProgress& e) {
    throw NoProgress(pre + e.what());
  } catch (const NonTermination& e) {
    throw NonTermination(pre + e.what());
  } catch (const DomainError& e) {
    throw DomainError(pre + e.what());
  } catch (const NotMonotone& e) {
    throw NotMonotone(pre + e.what());
  } catch (const DivisionByZero& e) {
    throw DivisionByZero(pre + e.what());
  } catch (const NotPiecewiseConstant& e) {
    throw NotPiecewiseConstant(pre + e.what());
  } catch (const InvalidParameter& e) {
    throw InvalidParameter(pre + e.what());
  }
}

// Piecewise-constant factor that is `value` on [from, inf), with a change at
// each of `drops` where the value is re-split among fewer beneficiaries.
inline PiecewiseFn step_factor(double from, const std::vector<std::pair<double, double>>& levels) {
  std::vector<double> xs;
  std::vector<Polynomial> ps;
  if (from > 0.0) {
    xs.push_back(0.0);
    ps.push_back(Polynomial());
  }
  xs.push_back(from);
  ps.push_back(Polynomial::constant(levels.empty() ? 0.0 : levels.front().second));
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (!(levels[i].first > xs.back())) {
      ps.back() = Polynomial::constant(levels[i].second);
      continue;
    }
    xs.push_back(levels[i].first);
    ps.push_back(Polynomial::constant(levels[i].second));
  }
  return PiecewiseFn(std::move(xs), std::move(ps), Extension::continue_last);
}

}  // namespace detail

// Solve all processes in dependency order. Pool shares with release_to are
// resolved by repeating the pass until completion times stop changing.
inline WorkflowResult analyze(const Workflow& wf, const AnalyzeOptions& opts = {}) {
  WorkflowResult res;
  res.order = opts.order ? *opts.order : topo_order(wf);

  using Completions = std::map<std::string, double>;
  Completions prev;
  std::map<std::string, ProcessOutcome> outcomes;
  std::map<std::string, std::string> deferred;  // process -> NoProgress message

  // (holder, slot) pairs per pool
  struct Holder {
    std::string process;
    std::string slot;
    double fraction;
    std::vector<std::string> release_to;
  };
  std::map<std::string, std::vector<Holder>> holders;
  for (const auto& wp : wf.processes)
    for (const auto& [slot, b] : wp.bindings)
      if (b.share)
        holders[b.share->pool].push_back({wp.process.name, slot, effective_fraction(wf, *b.share), b.share->release_to});

  for (int pass = 1;; ++pass) {
    Completions cur;
    auto completion_of = [&](const std::string& n) -> double {
      if (auto it = cur.find(n); it != cur.end()) return it->second;
      if (outcomes.count(n)) return kInf;  // solved this pass without completing
      if (auto it = prev.find(n); it != prev.end()) return it->second;
      return kInf;
    };
    outcomes.clear();

    deferred.clear();
    for (const auto& name : res.order) {
      const WorkflowProcess& wp = *wf.find(name);
      const Process& proc = wp.process;
      bool awaits_release = false;  // a releasing holder is solved later in this pass
      ProcessOutcome po;
      po.name = name;
      ExecutionContext& ctx = po.context;
      ctx.start_time = wp.start_time;
      for (const auto& g : wf.gate_predecessors(name)) {
        auto it = cur.find(g);
        if (it == cur.end()) po.started = false;
        else ctx.start_time = std::max(ctx.start_time, it->second);
      }

      for (const auto& d : proc.data_requirements) {
        const DataEdge* edge = nullptr;
        for (const auto& e : wf.edges)
          if (e.to == name && e.slot == d.name) edge = &e;
        if (edge) {
          const ProcessOutcome& prod = outcomes.at(edge->from);
          const WorkflowProcess& pp = *wf.find(edge->from);
          const auto& out_fn = pp.process.outputs[*detail::index_of(pp.process.outputs, edge->output)].fn;
          ctx.data_inputs.push_back(
              detail::in_process(name, [&] { return compose(out_fn, prod.result.progress); }));
        } else {
          ctx.data_inputs.push_back(*wp.bindings.at(d.name).fn);
        }
      }

      for (const auto& r : proc.resource_requirements) {
        const Binding& b = wp.bindings.at(r.name);
        if (b.fn) {
          ctx.resource_inputs.push_back(*b.fn);
          continue;
        }
        const PoolShare& share = *b.share;
        const Pool& pool = *wf.find_pool(share.pool);
        PiecewiseFn factor = PiecewiseFn::constant(effective_fraction(wf, share));
        for (const auto& h : holders[share.pool]) {
          if (h.process == name) continue;
          if (std::find(h.release_to.begin(), h.release_to.end(), name) == h.release_to.end()) continue;
          if (!outcomes.count(h.process)) awaits_release = true;
          const double ch = completion_of(h.process);
          if (!std::isfinite(ch)) continue;
          // equal split among the beneficiaries still running
          std::vector<double> ends;
          for (const auto& ben : h.release_to) {
            const double cb = ben == name ? kInf : completion_of(ben);
            ends.push_back(cb);
          }
          std::sort(ends.begin(), ends.end());
          std::vector<std::pair<double, double>> levels;
          std::size_t active = static_cast<std::size_t>(
              std::count_if(ends.begin(), ends.end(), [&](double e) { return e > ch; }));
          levels.push_back({ch, h.fraction / static_cast<double>(std::max<std::size_t>(active, 1))});
          for (double e : ends)
            if (e > ch && std::isfinite(e)) {
              --active;
              levels.push_back({e, h.fraction / static_cast<double>(std::max<std::size_t>(active, 1))});
            }
          factor = add(factor, detail::step_factor(ch, levels));
        }
        ctx.resource_inputs.push_back(mul(pool.capacity, factor).simplified());
      }

      if (po.started) {
        try {
          po.result = detail::in_process(name, [&] { return solve(proc, ctx, opts.solver); });
          if (po.result.completion_time) cur[name] = *po.result.completion_time;
        } catch (const NoProgress& e) {
          // a share released later may still unblock it
          if (!awaits_release) throw;
          deferred.emplace(name, e.what());
          po.started = false;
        }
      }
      if (!po.started) {
        po.result.progress = PiecewiseFn::constant(0.0);
        po.result.data_progress = PiecewiseFn::constant(0.0);
        po.result.start_time = kInf;
        po.result.target = proc.target();
      }
      outcomes.emplace(name, std::move(po));
    }

    res.passes = pass;
    bool stable = cur.size() == prev.size();
    if (stable)
      for (const auto& [n, c] : cur) {
        auto it = prev.find(n);
        if (it == prev.end() || std::abs(it->second - c) > 1e-12 * std::max(1.0, std::abs(c))) stable = false;
      }
    prev = std::move(cur);
    if (stable && !deferred.empty()) throw NoProgress(deferred.begin()->second);
    if (stable) break;
    if (pass >= opts.max_passes)
      throw NonTermination("pool release did not settle after " + std::to_string(opts.max_passes) + " passes");
  }

  // allocations: a releasing holder gives its share up when it completes;
  // for reporting, pool shares are tightened to the actual demand
  for (const auto& name : res.order) {
    ProcessOutcome& po = outcomes.at(name);
    const WorkflowProcess& wp = *wf.find(name);
    const Process& proc = wp.process;
    for (std::size_t l = 0; l < proc.resource_requirements.size(); ++l) {
      const Binding& b = wp.bindings.at(proc.resource_requirements[l].name);
      PiecewiseFn alloc = po.context.resource_inputs[l];
      if (b.share && !b.share->release_to.empty() && po.result.completion_time)
        alloc = splice(alloc, *po.result.completion_time, PiecewiseFn::constant(0.0));
      po.allocated.push_back(alloc);
      if (b.share && po.started) po.reported.push_back(resource_demand(po.result, proc, po.context, l));
      else po.reported.push_back(alloc);
    }
    if (opts.with_usage && po.started) po.usage = usage_report(po.result, proc, po.context);
    if (opts.verify_retrospective && po.started && po.result.completion_time) {
      ExecutionContext tight = po.context;
      tight.resource_inputs = po.reported;
      auto again = solve(proc, tight, opts.solver);
      if (!again.completion_time ||
          std::abs(*again.completion_time - *po.result.completion_time) > 1e-6 * std::max(1.0, *again.completion_time))
        throw NonTermination("in process '" + name + "': tightening allocations to demand changed the progress");
    }
  }

  double makespan = 0.0;
  bool all = true;
  for (const auto& name : res.order) {
    res.processes.push_back(std::move(outcomes.at(name)));
    const auto& c = res.processes.back().result.completion_time;
    if (c) makespan = std::max(makespan, *c);
    else all = false;
  }
  if (all) res.makespan = makespan;
  return res;
}

// Summed allocations per pool minus capacity; the maximum over breakpoints
// (positive means the pool is overcommitted).
inline double pool_excess(const Workflow& wf, const WorkflowResult& r, const std::string& pool_name) {
  const Pool& pool = *wf.find_pool(pool_name);
  PiecewiseFn sum = PiecewiseFn::constant(0.0);
  for (const auto& po : r.processes) {
    const Process& proc = wf.find(po.name)->process;
    for (std::size_t l = 0; l < proc.resource_requirements.size(); ++l) {
      const Binding& b = wf.find(po.name)->bindings.at(proc.resource_requirements[l].name);
      if (b.share && b.share->pool == pool_name) sum = add(sum, po.allocated[l]);
    }
  }
  const PiecewiseFn diff = sub(sum, pool.capacity);
  double worst = -kInf;
  for (std::size_t i = 0; i < diff.size(); ++i) {
    worst = std::max(worst, diff.piece(i)(0.0) / std::max(1.0, std::abs(pool.capacity.eval(diff.breakpoint(i)))));
    if (std::isfinite(diff.piece_width(i)))
      worst = std::max(worst, diff.end_value(i) / std::max(1.0, std::abs(pool.capacity.eval(diff.breakpoint(i)))));
  }
  return worst;
}

// Set a scalar of the workflow addressed by a dot path:
//   bindings.<process>[.<slot>].fraction
//   processes.<process>.target_progress | processes.<process>.start_time
//   pools.<pool>.scale
inline void apply_parameter(Workflow& wf, const std::string& path, double value) {
  std::vector<std::string> parts;
  std::stringstream ss(path);
  for (std::string item; std::getline(ss, item, '.');) parts.push_back(item);
  auto unknown = [&]() { return UnknownParameter("unknown parameter '" + path + "'"); };
  if (parts.size() < 3) throw unknown();

  if (parts[0] == "bindings" && parts.back() == "fraction" && (parts.size() == 3 || parts.size() == 4)) {
    WorkflowProcess* wp = wf.find(parts[1]);
    if (!wp) throw unknown();
    Binding* target = nullptr;
    if (parts.size() == 4) {
      auto it = wp->bindings.find(parts[2]);
      if (it == wp->bindings.end() || !it->second.share) throw unknown();
      target = &it->second;
    } else {
      for (auto& [slot, b] : wp->bindings)
        if (b.share) {
          if (target) throw UnknownParameter("parameter '" + path + "' is ambiguous: name the slot");
          target = &b;
        }
      if (!target) throw unknown();
    }
    if (!(value >= 0.0 && value <= 1.0)) throw InvalidParameter("fraction must lie in [0, 1]");
    target->share->fraction = value;
    return;
  }
  if (parts[0] == "processes" && parts.size() == 3) {
    WorkflowProcess* wp = wf.find(parts[1]);
    if (!wp) throw unknown();
    if (parts[2] == "target_progress") {
      wp->process.target_progress = value;
      return;
    }
    if (parts[2] == "start_time") {
      wp->start_time = value;
      return;
    }
    throw unknown();
  }
  if (parts[0] == "pools" && parts.size() == 3 && parts[2] == "scale") {
    for (auto& p : wf.pools)
      if (p.name == parts[1]) {
        p.capacity = p.capacity.scaled(value);
        return;
      }
  }
  throw unknown();
}

struct SweepPoint {
  double value = 0.0;
  std::optional<double> makespan;
  std::vector<std::pair<std::string, std::optional<double>>> completions;  // in topological order
};

struct SweepOptions {
  bool parallel = false;
  unsigned threads = 0;  // 0: hardware concurrency
};

// Independent analyses of `wf` with `path` set to each value, in order.
inline std::vector<SweepPoint> sweep(const Workflow& wf, const std::string& path, const std::vector<double>& values,
                                     const SweepOptions& opts = {}) {
  {
    Workflow probe = wf;
    if (!values.empty()) apply_parameter(probe, path, values.front());
  }
  const auto order = topo_order(wf);
  AnalyzeOptions ao;
  ao.with_usage = false;
  ao.order = order;
  auto run = [&](double v) {
    Workflow w = wf;
    apply_parameter(w, path, v);
    auto r = analyze(w, ao);
    SweepPoint pt{v, r.makespan, {}};
    for (const auto& po : r.processes) pt.completions.push_back({po.name, po.result.completion_time});
    return pt;
  };
  std::vector<SweepPoint> out(values.size());
  if (!opts.parallel || values.size() < 2) {
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = run(values[i]);
    return out;
  }
  const unsigned n = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::future<void>> jobs;
  for (unsigned w = 0; w < n; ++w)
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < values.size(); i += n) out[i] = run(values[i]);
    }));
  for (auto& j : jobs) j.get();
  return out;
}

inline std::vector<double> linspace(double from, double to, int steps) {
  if (steps < 1) throw InvalidParameter("steps must be >= 1");
  std::vector<double> v;
  for (int i = 0; i < steps; ++i) v.push_back(steps == 1 ? from : from + (to - from) * i / (steps - 1));
  return v;
}

// Chain of processes that determines the makespan, first to last: from the
// last process to finish, step to the gate predecessor that released it or
// to the producer feeding its latest data-limited segment.
inline std::vector<std::string> critical_path(const Workflow& wf, const WorkflowResult& r) {
  std::vector<std::string> path;
  const ProcessOutcome* cur = nullptr;
  for (const auto& po : r.processes)
    if (po.result.completion_time && (!cur || *po.result.completion_time > *cur->result.completion_time)) cur = &po;
  std::set<std::string> seen;
  while (cur && seen.insert(cur->name).second) {
    path.push_back(cur->name);
    const WorkflowProcess& wp = *wf.find(cur->name);
    const ProcessOutcome* next = nullptr;
    // released by a gate
    for (const auto& g : wf.gate_predecessors(cur->name)) {
      const auto& c = r.at(g).result.completion_time;
      if (c && approx_equal(*c, cur->result.start_time) && cur->result.start_time > wp.start_time &&
          (!next || *c > *next->result.completion_time))
        next = &r.at(g);
    }
    if (!next) {
      for (auto it = cur->result.bottlenecks.rbegin(); it != cur->result.bottlenecks.rend() && !next; ++it) {
        if (it->limiter.kind != Limiter::Kind::data) continue;
        const std::string& slot = wp.process.data_requirements[static_cast<std::size_t>(it->limiter.index)].name;
        for (const auto& e : wf.edges)
          if (e.to == cur->name && e.slot == slot) next = &r.at(e.from);
      }
    }
    cur = next;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace bottlemod
