#pragma once

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bottlemod/workflow.hpp"

// Workflow documents (version 1). Functions are declared once under
// "functions" and referenced by name; a reference may also be an inline
// function object.
namespace bottlemod::io {

using nlohmann::json;

inline constexpr int kFormatVersion = 1;

namespace detail {

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
  throw SchemaError(where + ": " + what);
}

inline const json& member(const json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, "missing required key '" + key + "'");
  return *it;
}

inline void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok |= it.key() == a;
    if (!ok) fail(where, "unknown key '" + it.key() + "'");
  }
}

inline double number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(where, "expected a finite number");
  return d;
}

inline std::string text(const json& v, const std::string& where) {
  if (!v.is_string()) fail(where, "expected a string");
  return v.get<std::string>();
}

inline const json& array(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array");
  return v;
}

inline std::string at(const std::string& where, std::size_t i) { return where + "[" + std::to_string(i) + "]"; }

}  // namespace detail

inline PiecewiseFn fn_from_json(const json& j, const std::string& where = "function") {
  detail::only_keys(j, where, {"breakpoints", "pieces", "extension", "upper"});
  std::vector<double> xs;
  const json& bj = detail::array(detail::member(j, "breakpoints", where), where + ".breakpoints");
  for (std::size_t i = 0; i < bj.size(); ++i) xs.push_back(detail::number(bj[i], detail::at(where + ".breakpoints", i)));
  std::vector<Polynomial> ps;
  const json& pj = detail::array(detail::member(j, "pieces", where), where + ".pieces");
  for (std::size_t i = 0; i < pj.size(); ++i) {
    const std::string w = detail::at(where + ".pieces", i);
    std::vector<double> c;
    for (std::size_t k = 0; k < detail::array(pj[i], w).size(); ++k)
      c.push_back(detail::number(pj[i][k], detail::at(w, k)));
    if (c.empty()) detail::fail(w, "a piece needs at least one coefficient");
    ps.emplace_back(std::move(c));
  }
  Extension ext = Extension::hold;
  if (auto it = j.find("extension"); it != j.end()) {
    const std::string e = detail::text(*it, where + ".extension");
    if (e == "continue") ext = Extension::continue_last;
    else if (e != "hold") detail::fail(where + ".extension", "expected \"hold\" or \"continue\"");
  }
  double upper = kInf;
  if (auto it = j.find("upper"); it != j.end()) upper = detail::number(*it, where + ".upper");
  try {
    return PiecewiseFn(std::move(xs), std::move(ps), ext, upper);
  } catch (const InvalidParameter& e) {
    detail::fail(where, e.what());
  }
}

// Normalized form: one breakpoint per piece, last piece unbounded.
inline json fn_to_json(const PiecewiseFn& f) {
  json pieces = json::array();
  for (const auto& p : f.pieces()) pieces.push_back(p.coeffs());
  json j{{"breakpoints", f.breakpoints()}, {"pieces", pieces}, {"extension", "continue"}};
  if (std::isfinite(f.upper())) j["upper"] = f.upper();
  return j;
}

namespace detail {

inline bool identical(const PiecewiseFn& a, const PiecewiseFn& b) {
  if (a.breakpoints() != b.breakpoints() || a.size() != b.size()) return false;
  if (!(a.upper() == b.upper())) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.piece(i).coeffs() != b.piece(i).coeffs()) return false;
  return true;
}

struct FunctionTable {
  std::map<std::string, PiecewiseFn> named;

  PiecewiseFn resolve(const json& ref, const std::string& where) const {
    if (ref.is_object()) return fn_from_json(ref, where);
    const std::string name = text(ref, where);
    auto it = named.find(name);
    if (it == named.end()) fail(where, "unknown function '" + name + "'");
    return it->second;
  }
};

}  // namespace detail

inline Workflow load(const json& doc) {
  detail::only_keys(doc, "document", {"version", "functions", "processes", "pools", "bindings", "edges", "gates"});
  const json& version = detail::member(doc, "version", "document");
  if (!version.is_number_integer() || version.get<int>() != kFormatVersion)
    detail::fail("version", "unsupported version (expected " + std::to_string(kFormatVersion) + ")");

  detail::FunctionTable table;
  if (auto it = doc.find("functions"); it != doc.end()) {
    if (!it->is_object()) detail::fail("functions", "expected an object of named functions");
    for (auto f = it->begin(); f != it->end(); ++f) table.named.emplace(f.key(), fn_from_json(f.value(), "functions." + f.key()));
  }

  Workflow wf;
  const json& procs = detail::array(detail::member(doc, "processes", "document"), "processes");
  for (std::size_t i = 0; i < procs.size(); ++i) {
    const std::string w = detail::at("processes", i);
    const json& pj = procs[i];
    detail::only_keys(pj, w,
                      {"name", "target_progress", "start_time", "data_requirements", "resource_requirements", "outputs"});
    WorkflowProcess wp;
    wp.process.name = detail::text(detail::member(pj, "name", w), w + ".name");
    if (auto it = pj.find("target_progress"); it != pj.end() && !it->is_null())
      wp.process.target_progress = detail::number(*it, w + ".target_progress");
    if (auto it = pj.find("start_time"); it != pj.end()) wp.start_time = detail::number(*it, w + ".start_time");
    auto slots = [&](const char* key, auto& dest, bool required) {
      auto it = pj.find(key);
      if (it == pj.end()) {
        if (required) detail::fail(w, std::string("missing required key '") + key + "'");
        return;
      }
      const std::string wk = w + "." + key;
      for (std::size_t s = 0; s < detail::array(*it, wk).size(); ++s) {
        const std::string ws = detail::at(wk, s);
        detail::only_keys((*it)[s], ws, {"name", "fn"});
        dest.push_back({detail::text(detail::member((*it)[s], "name", ws), ws + ".name"),
                        table.resolve(detail::member((*it)[s], "fn", ws), ws + ".fn")});
      }
    };
    slots("data_requirements", wp.process.data_requirements, false);
    slots("resource_requirements", wp.process.resource_requirements, false);
    slots("outputs", wp.process.outputs, true);
    wf.processes.push_back(std::move(wp));
  }

  if (auto it = doc.find("pools"); it != doc.end())
    for (std::size_t i = 0; i < detail::array(*it, "pools").size(); ++i) {
      const std::string w = detail::at("pools", i);
      detail::only_keys((*it)[i], w, {"name", "capacity_fn"});
      wf.pools.push_back({detail::text(detail::member((*it)[i], "name", w), w + ".name"),
                          table.resolve(detail::member((*it)[i], "capacity_fn", w), w + ".capacity_fn")});
    }

  if (auto it = doc.find("bindings"); it != doc.end()) {
    if (!it->is_object()) detail::fail("bindings", "expected an object keyed by process name");
    for (auto p = it->begin(); p != it->end(); ++p) {
      const std::string wpn = "bindings." + p.key();
      WorkflowProcess* wp = wf.find(p.key());
      if (!wp) detail::fail(wpn, "unknown process '" + p.key() + "'");
      if (!p->is_object()) detail::fail(wpn, "expected an object keyed by slot name");
      for (auto s = p->begin(); s != p->end(); ++s) {
        const std::string w = wpn + "." + s.key();
        detail::only_keys(s.value(), w, {"fn", "pool", "fraction", "release_to"});
        Binding b;
        if (auto f = s->find("fn"); f != s->end()) b.fn = table.resolve(*f, w + ".fn");
        if (auto pool = s->find("pool"); pool != s->end()) {
          PoolShare share;
          share.pool = detail::text(*pool, w + ".pool");
          if (auto fr = s->find("fraction"); fr != s->end() && !(fr->is_string() && fr->get<std::string>() == "rest"))
            share.fraction = detail::number(*fr, w + ".fraction");
          if (auto rt = s->find("release_to"); rt != s->end() && !rt->is_null()) {
            if (rt->is_string()) share.release_to.push_back(rt->get<std::string>());
            else
              for (std::size_t k = 0; k < detail::array(*rt, w + ".release_to").size(); ++k)
                share.release_to.push_back(detail::text((*rt)[k], detail::at(w + ".release_to", k)));
          }
          b.share = share;
        } else if (s->contains("fraction") || s->contains("release_to")) {
          detail::fail(w, "'fraction' and 'release_to' need a 'pool'");
        }
        if (b.fn.has_value() == b.share.has_value()) detail::fail(w, "a binding needs exactly one of 'fn' or 'pool'");
        wp->bindings[s.key()] = std::move(b);
      }
    }
  }

  if (auto it = doc.find("edges"); it != doc.end())
    for (std::size_t i = 0; i < detail::array(*it, "edges").size(); ++i) {
      const std::string w = detail::at("edges", i);
      const json& e = (*it)[i];
      detail::only_keys(e, w, {"from", "output", "to", "slot"});
      wf.edges.push_back({detail::text(detail::member(e, "from", w), w + ".from"),
                          detail::text(detail::member(e, "output", w), w + ".output"),
                          detail::text(detail::member(e, "to", w), w + ".to"),
                          detail::text(detail::member(e, "slot", w), w + ".slot")});
    }

  if (auto it = doc.find("gates"); it != doc.end())
    for (std::size_t i = 0; i < detail::array(*it, "gates").size(); ++i) {
      const std::string w = detail::at("gates", i);
      const json& g = (*it)[i];
      detail::only_keys(g, w, {"process", "after"});
      Gate gate{detail::text(detail::member(g, "process", w), w + ".process"), {}};
      const json& after = detail::array(detail::member(g, "after", w), w + ".after");
      for (std::size_t k = 0; k < after.size(); ++k) gate.after.push_back(detail::text(after[k], detail::at(w + ".after", k)));
      wf.gates.push_back(std::move(gate));
    }
  return wf;
}

inline Workflow parse(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
  return load(doc);
}

inline Workflow load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

// Serialize with every function named after its first use; identical
// functions share one entry.
inline json save(const Workflow& wf) {
  json functions = json::object();
  std::vector<std::pair<std::string, PiecewiseFn>> seen;
  auto ref = [&](const PiecewiseFn& f, const std::string& name) -> std::string {
    for (const auto& [n, g] : seen)
      if (detail::identical(f, g)) return n;
    seen.emplace_back(name, f);
    functions[name] = fn_to_json(f);
    return name;
  };

  json procs = json::array();
  json bindings = json::object();
  for (const auto& wp : wf.processes) {
    const Process& p = wp.process;
    json pj{{"name", p.name}};
    if (p.target_progress) pj["target_progress"] = *p.target_progress;
    if (wp.start_time != 0.0) pj["start_time"] = wp.start_time;
    auto slots = [&](const auto& list, const char* kind) {
      json arr = json::array();
      for (const auto& s : list) arr.push_back({{"name", s.name}, {"fn", ref(s.fn, p.name + "." + kind + "." + s.name)}});
      return arr;
    };
    pj["data_requirements"] = slots(p.data_requirements, "data");
    pj["resource_requirements"] = slots(p.resource_requirements, "resource");
    pj["outputs"] = slots(p.outputs, "output");
    procs.push_back(std::move(pj));

    json pb = json::object();
    for (const auto& [slot, b] : wp.bindings) {
      if (b.fn) {
        pb[slot] = {{"fn", ref(*b.fn, p.name + ".input." + slot)}};
        continue;
      }
      json sj{{"pool", b.share->pool}};
      sj["fraction"] = b.share->fraction ? json(*b.share->fraction) : json("rest");
      if (b.share->release_to.size() == 1) sj["release_to"] = b.share->release_to.front();
      else if (!b.share->release_to.empty()) sj["release_to"] = b.share->release_to;
      pb[slot] = std::move(sj);
    }
    if (!pb.empty()) bindings[p.name] = std::move(pb);
  }

  json pools = json::array();
  for (const auto& pool : wf.pools)
    pools.push_back({{"name", pool.name}, {"capacity_fn", ref(pool.capacity, "pool." + pool.name)}});
  json edges = json::array();
  for (const auto& e : wf.edges) edges.push_back({{"from", e.from}, {"output", e.output}, {"to", e.to}, {"slot", e.slot}});
  json gates = json::array();
  for (const auto& g : wf.gates) gates.push_back({{"process", g.process}, {"after", g.after}});

  return {{"version", kFormatVersion}, {"functions", functions}, {"processes", procs}, {"pools", pools},
          {"bindings", bindings},      {"edges", edges},          {"gates", gates}};
}

}  // namespace bottlemod::io
