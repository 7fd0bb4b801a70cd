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

// urbancfx command-line driver: one subcommand per workflow phase, all
// communicating through CSV/JSON artifacts in one directory.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "urbancfx/urbancfx.hpp"

namespace fs = std::filesystem;
using namespace urbancfx;

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> artifact_dir;
  int threads = 1;
  bool force = false;
  std::optional<std::int64_t> scenario_id;
  std::optional<std::string> target;
  std::optional<int> k;
};

class Context {
 public:
  explicit Context(const Options& o) : opt_(o) {
    if (!o.config_path.empty()) cfg_ = load_run_config(o.config_path);
    if (o.seed) cfg_.apply_seed(*o.seed);
    if (o.k) cfg_.cfx.k = *o.k;
    if (o.target) cfg_.cfx_target = *o.target;
    if (o.threads < 1) throw ConfigError("--threads must be >= 1");
    cfg_.ga.threads = o.threads;
    if (const char* env = std::getenv("URBANCFX_ARTIFACT_DIR"); env && *env) cfg_.artifact_dir = env;
    if (o.artifact_dir) cfg_.artifact_dir = *o.artifact_dir;
    cfg_.validate();
    dir_ = cfg_.artifact_dir;
  }

  const RunConfig& cfg() const { return cfg_; }
  const Options& opt() const { return opt_; }
  int threads() const { return opt_.threads; }

  std::string header() const {
    return "# urbancfx " + std::string(kVersion) + " config=" + config_hash(cfg_) + " seed=" + std::to_string(cfg_.seed);
  }

  fs::path path(const std::string& rel) const { return dir_ / rel; }

  // Path of an upstream artifact; a missing one names its producer.
  std::string need(const std::string& rel, const std::string& producer) const {
    const auto p = path(rel);
    if (!fs::exists(p))
      throw IoError("missing artifact " + p.string() + "; run `urbancfx " + producer + "` first");
    return p.string();
  }

  void write(const std::string& rel, const std::string& content) const {
    const auto p = path(rel);
    if (fs::exists(p) && !opt_.force) throw IoError(p.string() + " exists; pass --force to overwrite");
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write " + p.string());
    out << content;
    if (!out) throw IoError("write failed for " + p.string());
  }

 private:
  Options opt_;
  RunConfig cfg_;
  fs::path dir_;
};

nlohmann::ordered_json provenance(const Context& ctx) {
  return {{"tool", "urbancfx " + std::string(kVersion)}, {"config_hash", config_hash(ctx.cfg())},
          {"seed", ctx.cfg().seed}};
}

// --- artifact loading --------------------------------------------------------

std::vector<std::pair<UrbanScenario, Scene>> load_scenes(const Context& ctx) {
  const auto scen = read_dataset(ctx.need("scenarios.csv", "generate"));
  std::ifstream in(ctx.need("scenes.jsonl", "generate"));
  std::map<std::int64_t, Scene> scenes;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (j.contains("provenance")) continue;
      scenes.emplace(j.at("id").get<std::int64_t>(), scene_from_json(j.at("scene")));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(std::string("scenes.jsonl: ") + e.what());
    }
  }
  std::vector<std::pair<UrbanScenario, Scene>> out;
  for (const auto& r : scen.rows) {
    const auto it = scenes.find(r.scenario.id);
    if (it == scenes.end()) throw IoError("scenes.jsonl lacks scenario " + std::to_string(r.scenario.id));
    out.emplace_back(r.scenario, it->second);
  }
  return out;
}

struct Splits {
  Dataset train, test;
};

Splits load_splits(const Context& ctx) {
  const auto data = read_dataset(ctx.need("dataset.csv", "simulate"));
  const auto t = csv::read(ctx.need("split.csv", "train"));
  std::map<std::int64_t, const DatasetRow*> by_id;
  for (const auto& r : data.rows) by_id[r.scenario.id] = &r;
  const auto ci = t.column("id"), cp = t.column("partition");
  Splits s;
  for (const auto& row : t.rows) {
    const auto id = static_cast<std::int64_t>(csv::parse_double(row[ci], "id"));
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw IoError("split.csv references unknown scenario " + std::to_string(id));
    (row[cp] == "train" ? s.train : s.test).rows.push_back(*it->second);
  }
  return s;
}

const UrbanScenario& find_scenario(const Splits& s, std::int64_t id) {
  for (const auto* d : {&s.test, &s.train})
    for (const auto& r : d->rows)
      if (r.scenario.id == id) return r.scenario;
  throw DomainError("scenario " + std::to_string(id) + " is not in the simulated dataset");
}

std::unique_ptr<Model> load_named_model(const Context& ctx, const std::string& name) {
  return load_model(ctx.need("models/" + name + ".json", "train"));
}

bool is_class_target(const std::string& t) { return !t.starts_with("svf"); }

TargetSpec resolve_target(const Context& ctx, const Model& model, std::span<const double> x) {
  const auto& t = ctx.cfg().cfx_target;
  if (t == "svf") return TargetSpec::svf_increase(ctx.cfg().cfx.svf_delta);
  return TargetSpec::parse(t, model.mode() == TaskMode::kMulticlass ? model.predict(x).label : 0);
}

std::string model_for_target(const Context& ctx) {
  return is_class_target(ctx.cfg().cfx_target) ? "gbdt_visibility" : "gbdt_svf";
}

std::string table_name(std::int64_t id) { return "cfx/config_" + std::to_string(id) + ".csv"; }

// --- subcommands -------------------------------------------------------------

void cmd_generate(const Context& ctx) {
  const auto blocks = generate_blocks(ctx.cfg().generator, ctx.threads());
  Dataset d;
  std::ostringstream scenes;
  scenes << nlohmann::ordered_json{{"provenance", provenance(ctx)}}.dump() << '\n';
  for (const auto& b : blocks) {
    d.rows.push_back({b.scenario, std::nullopt, std::nullopt, std::nullopt});
    scenes << nlohmann::ordered_json{{"id", b.scenario.id}, {"scene", scene_to_json(b.scene)}}.dump() << '\n';
  }
  ctx.write("scenarios.csv", dataset_to_csv(d, ctx.header()));
  ctx.write("scenes.jsonl", scenes.str());
  std::cout << "generated " << blocks.size() << " scenarios\n";
}

void cmd_simulate(const Context& ctx) {
  const auto pairs = load_scenes(ctx);
  const auto d = simulate_dataset(pairs, ctx.cfg().sampler, ctx.threads());
  ctx.write("dataset.csv", dataset_to_csv(d, ctx.header()));
  std::cout << "simulated " << d.size() << " scenarios (" << d.complete_rows().size() << " complete)\n";
}

void cmd_train(const Context& ctx) {
  const auto data = read_dataset(ctx.need("dataset.csv", "simulate")).complete_rows();
  const auto& tc = ctx.cfg().train;
  const auto idx = split_indices(data.size(), tc.split_ratio, tc.seed);
  std::ostringstream split;
  split << ctx.header() << "\nid,partition\n";
  for (auto i : idx.train) split << data.rows[i].scenario.id << ",train\n";
  for (auto i : idx.test) split << data.rows[i].scenario.id << ",test\n";
  const auto train = data.subset(idx.train);
  auto save = [&](const std::string& name, nlohmann::ordered_json j) {
    j["provenance"] = provenance(ctx);
    ctx.write("models/" + name + ".json", j.dump(1) + "\n");
  };
  save("gbdt_svf", train_gbdt(train, tc, TaskMode::kRegression).to_json());
  save("gbdt_visibility", train_gbdt(train, tc, TaskMode::kMulticlass).to_json());
  save("knn_svf", train_knn(train, tc, TaskMode::kRegression).to_json());
  save("knn_visibility", train_knn(train, tc, TaskMode::kMulticlass).to_json());
  ctx.write("split.csv", split.str());
  std::cout << "trained 4 models on " << idx.train.size() << " rows; " << idx.test.size() << " held out\n";
}

void cmd_evaluate(const Context& ctx) {
  const auto s = load_splits(ctx);
  std::vector<MetricsRow> rows;
  for (const auto& [name, task] : std::vector<std::pair<std::string, std::string>>{
           {"gbdt", "svf"}, {"knn", "svf"}, {"gbdt", "visibility"}, {"knn", "visibility"}}) {
    const auto m = load_named_model(ctx, name + "_" + task);
    rows.push_back({name, task, evaluate(*m, s.test)});
  }
  const auto text = metrics_to_csv(rows, ctx.header());
  ctx.write("metrics.csv", text);
  std::cout << text.substr(text.find('\n') + 1);
}

void cmd_explain(const Context& ctx) {
  const auto s = load_splits(ctx);
  const auto test = s.test.features();
  const auto pool = s.train.features();
  for (const std::string task : {"svf", "visibility"}) {
    const auto m = load_named_model(ctx, "gbdt_" + task);
    const auto attrs = explain_rows(*m, test, pool, ctx.cfg().explain, ctx.cfg().seed, ctx.threads());
    std::vector<std::int64_t> ids;
    for (std::size_t i = 0; i < attrs.size(); ++i) ids.push_back(s.test.rows[i].scenario.id);
    const auto summary = aggregate_importance(attrs);
    const auto& ec = ctx.cfg().explain;
    const std::string note = ctx.header() + " background=" + std::to_string(std::min(ec.background, pool.rows())) +
                             " background_seed=" + std::to_string(ctx.cfg().seed);
    ctx.write("shap_" + task + ".csv", attributions_to_csv(attrs, ids, note));
    ctx.write("beeswarm_" + task + ".csv", beeswarm_to_csv(summary, ctx.header()));
    ctx.write("circular_" + task + ".csv", circular_to_csv(summary, ctx.header()));
    const auto rank = summary.ranking();
    std::cout << task << " top features:";
    for (std::size_t i = 0; i < std::min<std::size_t>(5, rank.size()); ++i)
      std::cout << ' ' << summary.feature_names[rank[i]];
    std::cout << '\n';
  }
}

struct CfxOutcome {
  CounterfactualResult result;
  TargetSpec target;
  std::string table;
};

CfxOutcome run_cfx(const Context& ctx, const Model& m, const Dataset& pool, const UrbanScenario& s) {
  const auto x = s.features();
  const auto& c = ctx.cfg().cfx;
  const auto mask = ActionabilityMask::standard(c.allow_removal);
  const auto idx = build_candidate_index(pool, x, mask, c.lattice);
  CfxOutcome o{{}, resolve_target(ctx, m, x), {}};
  o.result = find_counterfactuals(m, x, o.target, idx, c);
  o.table = table_to_csv(strategy_diff_table(x, o.result.strategies, o.target, o.result.baseline),
                         ctx.header() + " scenario=" + std::to_string(s.id) + " target=" + o.target.str());
  return o;
}

// With --scenario-id: one table. Otherwise: the first cfx.scenarios test
// configurations for which all k strategies are found.
void cmd_cfx(const Context& ctx) {
  const auto s = load_splits(ctx);
  const auto m = load_named_model(ctx, model_for_target(ctx));
  if (ctx.opt().scenario_id) {
    const auto id = *ctx.opt().scenario_id;
    const auto o = run_cfx(ctx, *m, s.train, find_scenario(s, id));
    ctx.write(table_name(id), o.table);
    if (o.result.warning) std::cerr << "warning: " << *o.result.warning << '\n';
    std::cout << o.table.substr(o.table.find('\n') + 1);
    return;
  }
  std::ostringstream sel;
  sel << ctx.header() << "\nconfig_id,target,strategies,evaluations,baseline\n";
  int chosen = 0, tried = 0;
  for (const auto& row : s.test.rows) {
    if (chosen >= ctx.cfg().cfx_scenarios) break;
    ++tried;
    CfxOutcome o;
    try {
      o = run_cfx(ctx, *m, s.train, row.scenario);
    } catch (const DomainError&) {
      continue;
    }
    if (o.result.already_satisfied || o.result.strategies.size() < static_cast<std::size_t>(ctx.cfg().cfx.k)) continue;
    ctx.write(table_name(row.scenario.id), o.table);
    sel << row.scenario.id << ',' << o.target.str() << ',' << o.result.strategies.size() << ','
        << o.result.evaluations << ',' << csv::fixed(m->mode() == TaskMode::kRegression ? o.result.baseline.value
                                                                                         : o.result.baseline.label,
                                                     4)
        << '\n';
    ++chosen;
  }
  if (chosen == 0) throw DomainError("no test configuration admits " + std::to_string(ctx.cfg().cfx.k) + " strategies");
  ctx.write("cfx/selected.csv", sel.str());
  std::cout << "selected " << chosen << " configurations (" << tried << " examined)\n";
}

std::vector<std::int64_t> selected_ids(const Context& ctx) {
  const auto t = csv::read(ctx.need("cfx/selected.csv", "cfx"));
  std::vector<std::int64_t> ids;
  for (const auto& r : t.rows) ids.push_back(static_cast<std::int64_t>(csv::parse_double(r[t.column("config_id")])));
  return ids;
}

void cmd_ga(const Context& ctx) {
  const auto s = load_splits(ctx);
  const auto m = load_named_model(ctx, model_for_target(ctx));
  const auto ids = ctx.opt().scenario_id ? std::vector<std::int64_t>{*ctx.opt().scenario_id} : selected_ids(ctx);
  const auto scenes = load_scenes(ctx);
  std::ostringstream bench;
  bench << ctx.header() << '\n' << benchmark_header() << '\n';
  int faster = 0, fewer = 0;
  for (auto id : ids) {
    const auto& sc = find_scenario(s, id);
    std::optional<Scene> base;
    for (const auto& [u, scene] : scenes)
      if (u.id == id) base = scene;
    const auto target = resolve_target(ctx, *m, sc.features());
    const auto rep = benchmark(sc, target, *m, s.train, ctx.cfg().sampler, ctx.cfg().ga, ctx.cfg().cfx, base);
    bench << benchmark_rows_csv(rep);
    ctx.write("ga/history_" + std::to_string(id) + "_oracle.csv", history_to_csv(rep.ga_oracle, ctx.header()));
    ctx.write("ga/history_" + std::to_string(id) + "_surrogate.csv", history_to_csv(rep.ga_surrogate, ctx.header()));
    const auto* cf = rep.find("cfx");
    const auto* gs = rep.find("ga_surrogate");
    faster += rep.speedup() >= 10;
    fewer += cf && gs && cf->evals < gs->evals;
    std::cout << "scenario " << id << ": speedup " << csv::fixed(rep.speedup(), 1) << "x, oracle eval "
              << csv::fixed(rep.oracle_eval_ms, 2) << " ms, evals cfx " << (cf ? cf->evals : 0) << " vs ga_surrogate "
              << (gs ? gs->evals : 0) << '\n';
  }
  ctx.write(ctx.opt().scenario_id ? "ga/benchmark_" + std::to_string(ids.front()) + ".csv" : "benchmark.csv",
            bench.str());
  std::cout << "speedup >= 10x in " << faster << '/' << ids.size() << "; fewer evaluations in " << fewer << '/'
            << ids.size() << " (workers " << ctx.threads() << ")\n";
}

void cmd_validate(const Context& ctx) {
  const auto s = load_splits(ctx);
  const auto m = load_named_model(ctx, model_for_target(ctx));
  const auto scenes = load_scenes(ctx);
  ValidationConfig vc;
  vc.sampler = ctx.cfg().sampler;
  vc.threads = ctx.threads();
  std::vector<ValidationPair> pairs;
  for (auto id : selected_ids(ctx)) {
    const auto table = csv::read(ctx.need(table_name(id), "cfx"));
    const auto& sc = find_scenario(s, id);
    const auto x = sc.features();
    std::vector<std::vector<double>> points;
    for (const auto& deltas : parse_strategy_deltas(table)) {
      std::vector<double> z = x;
      for (auto [f, d] : deltas) z[f] = x[f] + d;
      points.push_back(std::move(z));
    }
    std::optional<Scene> base;
    for (const auto& [u, scene] : scenes)
      if (u.id == id) base = scene;
    const auto got = revalidate(id, sc, points, *m, vc, base);
    pairs.insert(pairs.end(), got.begin(), got.end());
  }
  const auto rep = build_report(std::move(pairs));
  ctx.write("validation.csv", validation_to_csv(rep, ctx.header()));
  ctx.write("validation_config.csv", config_rmse_to_csv(rep, ctx.header()));
  ctx.write("validation_summary.csv", summary_to_csv(rep, ctx.header()));
  for (const auto& sm : rep.summaries)
    std::cout << sm.metric << ": mean per-config RMSE " << csv::fixed(sm.rmse.mean, 3) << " (min "
              << csv::fixed(sm.rmse.min, 3) << ", max " << csv::fixed(sm.rmse.max, 3) << ") over " << sm.rmse.n
              << " configs; " << sm.infeasible << " infeasible strategies\n";
}

std::string svg_with_header(const Context& ctx, const std::string& svg) {
  const auto pos = svg.find('\n');
  return svg.substr(0, pos + 1) + "<!-- " + ctx.header().substr(2) + " -->\n" + svg.substr(pos + 1);
}

void cmd_report(const Context& ctx) {
  const auto metrics = csv::read(ctx.need("metrics.csv", "evaluate"));
  const auto bees = csv::read(ctx.need("beeswarm_svf.csv", "explain"));
  const auto circ = csv::read(ctx.need("circular_svf.csv", "explain"));
  const auto summary = csv::read(ctx.need("validation_summary.csv", "validate"));
  const auto per_config = csv::read(ctx.need("validation_config.csv", "validate"));
  const auto bench = csv::read(ctx.need("benchmark.csv", "ga"));
  std::vector<std::pair<std::string, csv::Table>> runs;
  const auto cm = bench.column("method"), ci = bench.column("scenario_id");
  for (const auto& r : bench.rows)
    if (r[cm] == "ga_oracle")
      runs.emplace_back("scenario " + r[ci], csv::read(ctx.need("ga/history_" + r[ci] + "_oracle.csv", "ga")));
  ctx.write("figures/beeswarm_svf.svg", svg_with_header(ctx, svg::beeswarm(bees)));
  ctx.write("figures/circular_svf.svg", svg_with_header(ctx, svg::circular(circ)));
  if (fs::exists(ctx.path("beeswarm_visibility.csv")) && fs::exists(ctx.path("circular_visibility.csv"))) {
    ctx.write("figures/beeswarm_visibility.svg",
              svg_with_header(ctx, svg::beeswarm(csv::read(ctx.path("beeswarm_visibility.csv").string()))));
    ctx.write("figures/circular_visibility.svg",
              svg_with_header(ctx, svg::circular(csv::read(ctx.path("circular_visibility.csv").string()))));
  }
  ctx.write("figures/rmse_boxplot.svg", svg_with_header(ctx, svg::rmse_boxplot(summary, &per_config)));
  ctx.write("figures/ga_convergence.svg", svg_with_header(ctx, svg::convergence(runs)));
  std::cout << csv::join(metrics.header) << '\n';
  for (const auto& r : metrics.rows) std::cout << csv::join(r) << '\n';
  std::cout << "figures written to " << ctx.path("figures").string() << '\n';
}

void cmd_pipeline(const Context& ctx) {
  cmd_generate(ctx);
  cmd_simulate(ctx);
  cmd_train(ctx);
  cmd_evaluate(ctx);
  cmd_explain(ctx);
  cmd_cfx(ctx);
  cmd_ga(ctx);
  cmd_validate(ctx);
  cmd_report(ctx);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"urbancfx: urban park surrogate modelling, explanation and counterfactual design"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config_path, "run configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "override the configured seed");
  app.add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--artifact-dir", o.artifact_dir, "artifact directory (else $URBANCFX_ARTIFACT_DIR, else config)");
  app.add_flag("--force", o.force, "overwrite existing artifacts");
  app.set_version_flag("--version", std::string(kVersion));

  const std::vector<std::pair<std::string, std::string>> cmds = {
      {"generate", "generate synthetic block scenarios"},
      {"simulate", "simulate SVF and park visibility for every scenario"},
      {"train", "split the dataset and train GBDT and KNN surrogates"},
      {"evaluate", "score the surrogates on the held-out split"},
      {"explain", "Shapley attributions of the GBDT surrogates"},
      {"cfx", "counterfactual design strategies"},
      {"ga", "benchmark counterfactual search against the genetic algorithm"},
      {"validate", "re-simulate counterfactual strategies"},
      {"report", "render SVG figures from CSV artifacts"},
      {"pipeline", "run every phase in order"}};
  std::map<std::string, CLI::App*> sub;
  for (const auto& [name, help] : cmds) sub[name] = app.add_subcommand(name, help);
  for (const std::string name : {"cfx", "ga"}) {
    sub[name]->add_option("--scenario-id", o.scenario_id, "single scenario instead of the selected set");
    sub[name]->add_option("--target", o.target, "svf+<delta>, svf or class+1");
  }
  sub["cfx"]->add_option("--k", o.k, "number of strategies")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const Context ctx(o);
    const std::map<std::string, void (*)(const Context&)> run = {
        {"generate", cmd_generate}, {"simulate", cmd_simulate}, {"train", cmd_train},
        {"evaluate", cmd_evaluate}, {"explain", cmd_explain},   {"cfx", cmd_cfx},
        {"ga", cmd_ga},             {"validate", cmd_validate}, {"report", cmd_report},
        {"pipeline", cmd_pipeline}};
    for (const auto& [name, s] : sub)
      if (s->parsed()) run.at(name)(ctx);
    return 0;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
