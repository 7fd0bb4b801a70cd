/*
 * Copyright 2026 The urbancfx Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Run configuration: one section per module in a TOML-compatible subset
// (sections, `key = value`, numbers, booleans, quoted strings, flat
// numeric arrays, `#` comments). Unknown sections and keys are rejected.

#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "urbancfx/explain.hpp"
#include "urbancfx/gabench.hpp"
#include "urbancfx/model.hpp"
#include "urbancfx/scenario.hpp"
#include "urbancfx/simulate.hpp"

namespace urbancfx {

struct RunConfig {
  GeneratorConfig generator;
  SamplerConfig sampler;
  TrainConfig train;
  ExplainConfig explain;
  CounterfactualConfig cfx;
  std::string cfx_target = "svf+5";
  int cfx_scenarios = 10;  // test-set configurations in pipeline runs
  GAConfig ga;
  std::string artifact_dir = "artifacts";
  std::uint64_t seed = 7;

  // Propagates the global seed to every seeded module.
  void apply_seed(std::uint64_t s) {
    seed = s;
    generator.seed = s;
    train.seed = s;
    ga.seed = s;
  }

  void validate() const {
    generator.validate();
    sampler.validate();
    train.validate();
    explain.validate();
    cfx.validate();
    ga.validate();
    TargetSpec::parse(cfx_target);
    if (cfx_scenarios < 1) throw ConfigError("cfx.scenarios must be >= 1");
    if (artifact_dir.empty()) throw ConfigError("paths.artifact_dir must not be empty");
  }
};

namespace config_detail {

inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, r.ptr);
  if (s.find_first_of(".eE") == std::string::npos && s.find("inf") == std::string::npos &&
      s.find("nan") == std::string::npos)
    s += ".0";
  return s;
}

// Drops a trailing `# comment` outside quotes and surrounding blanks.
inline std::string clean(const std::string& raw) {
  bool quoted = false;
  std::size_t end = raw.size();
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == '"') quoted = !quoted;
    if (raw[i] == '#' && !quoted) {
      end = i;
      break;
    }
  }
  std::string s = raw.substr(0, end);
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

inline long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

inline std::string parse_string(const std::string& key, const std::string& v) {
  if (v.size() < 2 || v.front() != '"' || v.back() != '"' || v.find('"', 1) != v.size() - 1)
    throw ConfigError(key + ": expected a quoted string, got '" + v + "'");
  return v.substr(1, v.size() - 2);
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') throw ConfigError(key + ": expected [a, b, ...]");
  std::vector<double> out;
  std::stringstream ss(v.substr(1, v.size() - 2));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = clean(item);
    if (item.empty()) continue;
    out.push_back(parse_double(key, item));
  }
  return out;
}

inline std::string format_list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
  return s + "]";
}

// Binds a config field to its text form in both directions.
struct Field {
  std::string section, key;
  std::function<void(const std::string&, const std::string&)> set;
  std::function<std::string()> get;
};

template <class T>
Field num(std::string sec, std::string key, T& ref) {
  return {sec, key,
          [&ref](const std::string& k, const std::string& v) {
            if constexpr (std::is_floating_point_v<T>) {
              ref = parse_double(k, v);
            } else {
              const auto n = parse_int(k, v);
              if constexpr (std::is_unsigned_v<T>)
                if (n < 0) throw ConfigError(k + ": must be non-negative");
              ref = static_cast<T>(n);
            }
          },
          [&ref] {
            if constexpr (std::is_floating_point_v<T>)
              return format_double(ref);
            else
              return std::to_string(ref);
          }};
}

inline Field flag(std::string sec, std::string key, bool& ref) {
  return {sec, key, [&ref](const std::string& k, const std::string& v) { ref = parse_bool(k, v); },
          [&ref] { return std::string(ref ? "true" : "false"); }};
}

inline Field text(std::string sec, std::string key, std::string& ref) {
  return {sec, key, [&ref](const std::string& k, const std::string& v) { ref = parse_string(k, v); },
          [&ref] { return "\"" + ref + "\""; }};
}

inline Field list(std::string sec, std::string key, std::vector<double>& ref) {
  return {sec, key, [&ref](const std::string& k, const std::string& v) { ref = parse_list(k, v); },
          [&ref] { return format_list(ref); }};
}

// Field table in serialization order.
inline std::vector<Field> fields(RunConfig& c) {
  auto& g = c.generator;
  auto& s = c.sampler;
  auto& t = c.train;
  auto& e = c.explain;
  auto& x = c.cfx;
  auto& a = c.ga;
  std::vector<Field> f = {
      num("generator", "count", g.count),
      num("generator", "block_size", g.block_size),
      list("generator", "street_widths", g.street_widths),
      list("generator", "coverage_ratios", g.coverage_ratios),
      list("generator", "green_ratios", g.green_ratios),
      list("generator", "far_targets", g.far_targets),
      num("generator", "far_tolerance", g.far_tolerance),
      list("generator", "orientations", g.orientations),
      num("generator", "parcels_min", g.parcels_min),
      num("generator", "parcels_max", g.parcels_max),
      num("generator", "wwr", g.wwr),
      num("sampler", "hemisphere_rays", s.hemisphere_rays),
      num("sampler", "grid_resolution", s.grid_resolution),
      num("sampler", "eval_height", s.eval_height),
      num("sampler", "window_height", s.window_height),
      flag("sampler", "cosine_weighted", s.cosine_weighted),
      num("train", "learning_rate", t.learning_rate),
      num("train", "max_depth", t.max_depth),
      num("train", "n_estimators", t.n_estimators),
      num("train", "subsample", t.subsample),
      num("train", "colsample", t.colsample),
      num("train", "split_ratio", t.split_ratio),
      {"train", "reg_lambda",
       [&t](const std::string& k, const std::string& v) {
         if (v == "\"auto\"")
           t.reg_lambda.reset();
         else
           t.reg_lambda = parse_double(k, v);
       },
       [&t] { return t.reg_lambda ? format_double(*t.reg_lambda) : std::string("\"auto\""); }},
      num("train", "min_child_weight", t.min_child_weight),
      num("train", "knn_k", t.knn_k),
      num("explain", "background", e.background),
      num("explain", "n_permutations", e.n_permutations),
      num("explain", "exact_limit", e.exact_limit),
      num("explain", "instances", e.instances),
      text("cfx", "target", c.cfx_target),
      num("cfx", "scenarios", c.cfx_scenarios),
      num("cfx", "k", x.k),
      num("cfx", "lambda", x.lambda),
      num("cfx", "svf_delta", x.svf_delta),
      flag("cfx", "allow_removal", x.allow_removal),
      num("cfx", "height_step", x.lattice.height_step),
      num("cfx", "distance_step", x.lattice.distance_step),
      num("cfx", "min_pool", x.lattice.min_pool),
      num("cfx", "max_changed", x.lattice.max_changed),
      num("cfx", "distance_radius", x.lattice.distance_radius),
      num("ga", "population", a.population),
      num("ga", "max_stagnation", a.max_stagnation),
      num("ga", "initial_boost", a.initial_boost),
      num("ga", "maintain_rate", a.maintain_rate),
      num("ga", "inbreeding", a.inbreeding),
      num("ga", "mutation_rate", a.mutation_rate),
      num("ga", "max_generations", a.max_generations),
      {"ga", "fitness_source",
       [&a](const std::string& k, const std::string& v) {
         a.fitness_source = fitness_source_from_string(parse_string(k, v));
       },
       [&a] { return "\"" + to_string(a.fitness_source) + "\""; }},
      text("paths", "artifact_dir", c.artifact_dir),
      {"seed", "value",
       [&c](const std::string& k, const std::string& v) {
         const auto n = parse_int(k, v);
         if (n < 0) throw ConfigError(k + ": must be non-negative");
         c.apply_seed(static_cast<std::uint64_t>(n));
       },
       [&c] { return std::to_string(c.seed); }},
  };
  return f;
}

}  // namespace config_detail

inline RunConfig parse_run_config(std::istream& in, const std::string& origin = "config") {
  RunConfig c;
  auto fields = config_detail::fields(c);
  std::map<std::pair<std::string, std::string>, const config_detail::Field*> index;
  std::set<std::string> sections;
  for (const auto& f : fields) {
    index[{f.section, f.key}] = &f;
    sections.insert(f.section);
  }
  // The INI reader drops empty sections, so headers are checked on the raw text.
  const std::string text(std::istreambuf_iterator<char>(in), {});
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    const auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos || line[b] != '[') continue;
    const auto e = line.find(']', b);
    if (e == std::string::npos) continue;
    const auto name = line.substr(b + 1, e - b - 1);
    if (!sections.count(name)) throw ConfigError(origin + ": unknown section [" + name + "]");
  }
  boost::property_tree::ptree pt;
  try {
    std::istringstream body(text);
    boost::property_tree::ini_parser::read_ini(body, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  // Seed first so that explicit per-module values are not overwritten.
  std::vector<std::pair<const config_detail::Field*, std::string>> assignments;
  for (const auto& [section, body] : pt) {
    if (body.empty() && !body.data().empty())
      throw ConfigError(origin + ": key '" + section + "' outside any section");
    if (!sections.count(section)) throw ConfigError(origin + ": unknown section [" + section + "]");
    for (const auto& [key, node] : body) {
      const auto it = index.find({section, key});
      if (it == index.end()) throw ConfigError(origin + ": unknown key '" + section + "." + key + "'");
      const auto* f = it->second;
      if (section == "seed")
        assignments.insert(assignments.begin(), {f, node.data()});
      else
        assignments.emplace_back(f, node.data());
    }
  }
  for (const auto& [f, raw] : assignments) f->set(f->section + "." + f->key, config_detail::clean(raw));
  c.validate();
  return c;
}

inline RunConfig parse_run_config(const std::string& text) {
  std::istringstream in(text);
  return parse_run_config(in);
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  return parse_run_config(in, path);
}

inline std::string serialize(const RunConfig& cfg) {
  RunConfig c = cfg;
  std::ostringstream out;
  std::string section;
  for (const auto& f : config_detail::fields(c)) {
    if (f.section != section) {
      out << (section.empty() ? "" : "\n") << '[' << f.section << "]\n";
      section = f.section;
    }
    out << f.key << " = " << f.get() << '\n';
  }
  return out.str();
}

// Hash of everything except [paths], so relocated runs share provenance.
inline std::string config_hash(const RunConfig& cfg) {
  RunConfig c = cfg;
  c.artifact_dir = "-";
  return hex64(fnv1a(serialize(c)));
}

}  // namespace urbancfx
