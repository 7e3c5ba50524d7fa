// ecmws: generate instances, train the embedding and policy networks, run
// and compare schedulers, and tabulate results.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ecmws/graph_embed.hpp"
#include "ecmws/orchestrator.hpp"
#include "ecmws/report.hpp"
#include "ecmws/workload.hpp"

namespace fs = std::filesystem;
using namespace ecmws;

namespace {

struct Common {
  std::string topology;
  std::vector<std::string> workflows;
  std::string config;
  std::uint64_t seed = 1;
  std::string out = "out";
};

struct Instance {
  std::string name;
  std::vector<Workflow> workflows;
  int tasks = 0;  // mean tasks per workflow
  double rho = 0.0;
};

fs::path out_dir(const Common& c) {
  fs::path dir = c.out;
  if (const char* env = std::getenv("ECMWS_OUT_DIR"); env != nullptr && *env != '\0') dir = env;
  fs::create_directories(dir);
  return dir;
}

Json config_file(const Common& c) {
  return c.config.empty() ? Json::object() : read_json_file(c.config);
}

EcmwsConfig load_config(const Common& c) {
  auto cfg = config_from_json(config_file(c));
  cfg.validate();
  return cfg;
}

Topology load_topology(const Common& c) {
  if (c.topology.empty()) throw std::runtime_error("--topology is required");
  return topology_from_json(read_json_file(c.topology));
}

bool is_instance_file(const fs::path& file) {
  const Json j = read_json_file(file.string());
  if (j.is_array()) return true;
  if (!j.is_object()) return false;
  if (j.contains("tasks")) return true;
  const auto it = j.find("workflows");
  return it != j.end() && it->is_array() && (it->empty() || it->front().is_object());
}

// Files as given; directories contribute the workflow files among their
// *.json entries, in name order.
std::vector<fs::path> expand(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(in)) {
        if (e.path().extension() == ".json" && is_instance_file(e.path())) {
          found.push_back(e.path());
        }
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.emplace_back(in);
    }
  }
  if (files.empty()) throw std::runtime_error("--workflows names no instance files");
  return files;
}

Instance load_instance(const fs::path& file) {
  const Json j = read_json_file(file.string());
  Instance inst;
  inst.name = file.stem().string();
  inst.workflows = workflows_from_json(j);
  std::size_t total = 0;
  for (const auto& wf : inst.workflows) total += wf.size();
  if (!inst.workflows.empty()) {
    inst.tasks = static_cast<int>(total / inst.workflows.size());
  }
  if (j.is_object() && j.contains("meta")) inst.rho = j["meta"].value("rho", 0.0);
  std::stable_sort(inst.workflows.begin(), inst.workflows.end(),
                   [](const Workflow& a, const Workflow& b) { return a.submit() < b.submit(); });
  return inst;
}

std::vector<Instance> load_instances(const Common& c) {
  std::vector<Instance> out;
  for (const auto& f : expand(c.workflows)) out.push_back(load_instance(f));
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

Json common_echo(const Common& c, const std::string& verb) {
  return {{"verb", verb},
          {"topology", c.topology},
          {"workflow_files", c.workflows},
          {"config_file", c.config},
          {"seed", c.seed}};
}

// A missing or unreadable checkpoint leaves ECMWS on its reserve allocator.
std::optional<PolicyBundle> load_bundle(const std::string& path, const Topology& topo) {
  if (path.empty()) {
    std::cerr << "warning: no --checkpoint given; ecmws runs in heuristic-only mode\n";
    return std::nullopt;
  }
  if (!fs::exists(path)) {
    std::cerr << "warning: checkpoint " << path
              << " not found; ecmws runs in heuristic-only mode\n";
    return std::nullopt;
  }
  return bundle_from_json(read_json_file(path), topo);
}

void add_common(CLI::App* sub, Common& c, bool needs_workflows) {
  sub->add_option("--topology", c.topology, "Topology JSON");
  auto* w = sub->add_option("--workflows", c.workflows, "Instance JSON files or directories");
  if (needs_workflows) w->required();
  sub->add_option("--config", c.config, "Algorithm configuration JSON");
  sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  sub->add_option("--out", c.out, "Output directory (ECMWS_OUT_DIR overrides)")
      ->capture_default_str();
}

// gen ---------------------------------------------------------------------

struct GenArgs {
  int dcs = 4;
  int clusters = 5;
  int count = 40;
  int tasks = 50;
  double rho = 0.2;
  std::string family = "layered";
  bool full_grid = false;
  int instances = 10;
};

Json instance_json(const std::vector<Workflow>& wfs, const GenSpec& g) {
  return {{"meta",
           {{"workflows", g.workflows},
            {"tasks", g.tasks},
            {"rho", g.rho},
            {"family", to_string(g.family)},
            {"seed", g.seed}}},
          {"workflows", to_json(wfs)["workflows"]}};
}

int cmd_gen(const Common& c, const GenArgs& a) {
  const fs::path dir = out_dir(c);
  const EcmwsConfig cfg = load_config(c);
  Topology topo;
  std::string topo_file = c.topology;
  if (!c.topology.empty() && fs::exists(c.topology)) {
    topo = load_topology(c);
  } else {
    topo = reference_topology(a.dcs, a.clusters, c.seed);
    topo_file = (dir / "topology.json").string();
    write_json_file(topo_file, to_json(topo));
  }

  GenSpec base;
  base.t_term = cfg.t_term;
  base.tau = cfg.tau;
  Json manifest = common_echo(c, "gen");
  manifest["topology"] = topo_file;
  manifest["config"] = to_json(cfg);

  if (a.full_grid) {
    GridSpec gs;
    gs.instances_per_cell = a.instances;
    gs.seed = c.seed;
    const auto cells = grid(gs);
    fs::create_directories(dir / "instances");
    std::vector<std::string> files;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      GenSpec g = base;
      g.workflows = cells[i].workflows;
      g.tasks = cells[i].tasks;
      g.rho = cells[i].rho;
      g.family = cells[i].family;
      g.seed = cells[i].seed;
      char name[32];
      std::snprintf(name, sizeof name, "inst_%04zu.json", i);
      files.emplace_back(std::string("instances/") + name);
      write_json_file((dir / files.back()).string(), instance_json(generate(g, topo), g));
    }
    std::ofstream csv(dir / "manifest.csv");
    write_manifest_csv(csv, cells, files);
    manifest["instances"] = cells.size();
    std::cout << "wrote " << cells.size() << " instances to " << (dir / "instances").string()
              << '\n';
  } else {
    GenSpec g = base;
    g.workflows = a.count;
    g.tasks = a.tasks;
    g.rho = a.rho;
    g.family = family_from_string(a.family);
    g.seed = c.seed;
    g.validate();
    write_json_file((dir / "workflows.json").string(), instance_json(generate(g, topo), g));
    manifest["gen"] = instance_json({}, g)["meta"];
    std::cout << "wrote " << g.workflows << " workflows to "
              << (dir / "workflows.json").string() << '\n';
  }
  write_json_file((dir / "gen_manifest.json").string(), manifest);
  return 0;
}

// train-embed ---------------------------------------------------------------

struct EmbedArgs {
  int epochs = 50;
  int batch = 16;
  double lr = 1e-3;
  int stride = 1;
};

int cmd_train_embed(const Common& c, EmbedArgs a) {
  const fs::path dir = out_dir(c);
  const Json cfg_json = config_file(c);
  const auto cfg = load_config(c);
  const auto topo = load_topology(c);
  if (cfg_json.contains("embed")) {
    const auto& e = cfg_json["embed"];
    a.epochs = e.value("epochs", a.epochs);
    a.batch = e.value("batch", a.batch);
    a.lr = e.value("lr", a.lr);
  }

  GraphCorpus corpus;
  for (const auto& inst : load_instances(c)) {
    auto part = collect_graphs(cfg, topo, inst.workflows, a.stride);
    std::move(part.task.begin(), part.task.end(), std::back_inserter(corpus.task));
    std::move(part.resource.begin(), part.resource.end(), std::back_inserter(corpus.resource));
  }
  std::cout << "corpus: " << corpus.task.size() << " task graphs, " << corpus.resource.size()
            << " resource graphs\n";

  EmbedModels models = EmbedModels::create(c.seed);
  AutoencoderOptions opt;
  opt.epochs = a.epochs;
  opt.batch = a.batch;
  opt.lr = a.lr;
  opt.seed = c.seed;

  Json summary = Json::object();
  std::ofstream hist(dir / "embed_history.csv");
  hist << "model,epoch,train_loss,val_loss\n";
  auto train = [&](const std::string& name, GraphAutoencoder& model, std::vector<Graph> graphs) {
    const auto split = split_corpus(std::move(graphs), c.seed);
    const auto h = train_autoencoder(model, split.train, split.validation, opt);
    for (std::size_t e = 0; e < h.train_loss.size(); ++e) {
      hist << name << ',' << e + 1 << ',' << h.train_loss[e] << ','
           << (e < h.val_loss.size() ? h.val_loss[e] : 0.0) << '\n';
    }
    const double test = split.test.empty() ? 0.0 : mean_loss(model, split.test);
    summary[name] = {{"train", split.train.size()},
                     {"validation", split.validation.size()},
                     {"test", split.test.size()},
                     {"final_train_loss", h.train_loss.empty() ? 0.0 : h.train_loss.back()},
                     {"test_loss", test}};
    std::cout << name << " autoencoder: test MSE " << test << '\n';
  };
  train("task", models.task, std::move(corpus.task));
  train("resource", models.resource, std::move(corpus.resource));

  write_json_file((dir / "embed.json").string(), to_json(models));
  Json manifest = common_echo(c, "train-embed");
  manifest["config"] = to_json(cfg);
  manifest["options"] = {{"epochs", a.epochs}, {"batch", a.batch}, {"lr", a.lr}, {"stride", a.stride}};
  manifest["losses"] = summary;
  write_json_file((dir / "embed_manifest.json").string(), manifest);
  return 0;
}

// train-policy ------------------------------------------------------------

struct PolicyArgs {
  std::string embed;
  int iterations = 100;
  int steps = 256;
  int epochs = 100;
  int minibatches = 4;
  double lr = 3e-4;
};

int cmd_train_policy(const Common& c, PolicyArgs a) {
  const fs::path dir = out_dir(c);
  const Json cfg_json = config_file(c);
  const auto cfg = load_config(c);
  const auto topo = load_topology(c);
  if (cfg_json.contains("rappo")) {
    const auto& r = cfg_json["rappo"];
    a.iterations = r.value("iterations", a.iterations);
    a.steps = r.value("steps", a.steps);
    a.epochs = r.value("epochs", a.epochs);
    a.minibatches = r.value("minibatches", a.minibatches);
    a.lr = r.value("lr", a.lr);
  }

  auto bundle = PolicyBundle::create(topo, cfg, c.seed);
  if (!a.embed.empty()) {
    bundle.models = embed_models_from_json(read_json_file(a.embed));
  } else {
    std::cerr << "warning: no --embed checkpoint; graph encoders stay at their initial weights\n";
  }

  std::vector<std::vector<Workflow>> pool;
  for (auto& inst : load_instances(c)) pool.push_back(std::move(inst.workflows));
  SchedulingEnv env(topo, cfg, pool, bundle.models, bundle.dim_price);

  RappoOptions opt;
  opt.iterations = a.iterations;
  opt.steps = a.steps;
  opt.epochs = a.epochs;
  opt.minibatches = a.minibatches;
  opt.lr = a.lr;
  opt.seed = c.seed;
  const auto log = rappo_train(env, bundle.net, opt, [](const IterationStats& s) {
    std::cout << "iter " << s.iteration << "  episode reward " << s.episode_reward
              << "  entropy " << s.entropy << '\n';
  });

  write_json_file((dir / "policy.json").string(), to_json(bundle));
  std::ofstream csv(dir / "training_log.csv");
  write_training_log(csv, log);
  Json manifest = common_echo(c, "train-policy");
  manifest["config"] = to_json(cfg);
  manifest["embed"] = a.embed;
  manifest["options"] = {{"iterations", a.iterations}, {"steps", a.steps}, {"epochs", a.epochs},
                         {"minibatches", a.minibatches}, {"lr", a.lr}};
  manifest["pool"] = pool.size();
  write_json_file((dir / "train_manifest.json").string(), manifest);
  return 0;
}

// run / compare -----------------------------------------------------------

struct RunArgs {
  std::string algo = "ecmws";
  std::optional<double> conf;
  std::string checkpoint;
};

int cmd_run(const Common& c, const RunArgs& a) {
  const fs::path dir = out_dir(c);
  auto cfg = load_config(c);
  if (a.conf) cfg.conf_thresh = *a.conf;
  cfg.validate();
  const auto topo = load_topology(c);
  const auto algo = algorithm_from_string(a.algo);
  const auto files = expand(c.workflows);
  if (files.size() != 1) throw std::runtime_error("run takes exactly one instance file");
  const auto inst = load_instance(files.front());

  std::optional<PolicyBundle> bundle;
  if (algo == Algorithm::kEcmws) bundle = load_bundle(a.checkpoint, topo);
  const auto r = run_algorithm(algo, cfg, topo, inst.workflows, bundle ? &*bundle : nullptr);

  std::ofstream csv(dir / ("assignments_" + a.algo + ".csv"));
  write_assignment_csv(csv, r.log);
  Json manifest = run_manifest(r, cfg, inst.workflows);
  manifest["inputs"] = common_echo(c, "run");
  manifest["checkpoint"] = bundle ? a.checkpoint : "";
  write_json_file((dir / ("run_" + a.algo + ".json")).string(), manifest);
  std::cout << a.algo << ": Z = " << r.z << ", deadline misses = " << deadline_misses(r.feasibility)
            << ", rejected = " << r.rejected.size() << ", runtime = " << r.runtime_seconds << " s\n";
  return 0;
}

void write_report(const fs::path& dir, const std::vector<ResultRow>& rows) {
  const auto rpd = compute_rpd(rows);
  const auto cells = summarize_cells(rpd);
  const auto algos = summarize_algorithms(rpd);
  std::ofstream r(dir / "rpd.csv");
  write_rpd_csv(r, rpd);
  std::ofstream cc(dir / "cells.csv");
  write_cells_csv(cc, cells);
  std::ostringstream text;
  write_report_text(text, algos, cells);
  write_text(dir / "report.txt", text.str());
  std::cout << text.str();
}

int cmd_compare(const Common& c, const RunArgs& a) {
  const fs::path dir = out_dir(c);
  auto cfg = load_config(c);
  if (a.conf) cfg.conf_thresh = *a.conf;
  cfg.validate();
  const auto topo = load_topology(c);
  const auto bundle = load_bundle(a.checkpoint, topo);

  std::vector<ResultRow> rows;
  for (const auto& inst : load_instances(c)) {
    for (auto algo : {Algorithm::kEcmws, Algorithm::kDara, Algorithm::kHeft, Algorithm::kGreedy}) {
      const auto r = run_algorithm(algo, cfg, topo, inst.workflows, bundle ? &*bundle : nullptr);
      rows.push_back({inst.name, static_cast<int>(inst.workflows.size()), inst.tasks, inst.rho,
                      to_string(algo), r.z, r.runtime_seconds, deadline_misses(r.feasibility)});
    }
  }
  std::ofstream csv(dir / "results.csv");
  write_results_csv(csv, rows);
  csv.close();
  Json manifest = common_echo(c, "compare");
  manifest["config"] = to_json(cfg);
  manifest["checkpoint"] = bundle ? a.checkpoint : "";
  write_json_file((dir / "compare_manifest.json").string(), manifest);
  write_report(dir, rows);
  return 0;
}

int cmd_report(const Common& c, std::string results) {
  const fs::path dir = out_dir(c);
  if (results.empty()) results = (dir / "results.csv").string();
  std::ifstream in(results);
  if (!in) throw std::runtime_error("cannot read " + results);
  write_report(dir, read_results_csv(in));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-cost-aware workflow scheduling across geo-distributed data centers"};
  app.require_subcommand(1);

  Common common;
  GenArgs gen_args;
  EmbedArgs embed_args;
  PolicyArgs policy_args;
  RunArgs run_args;
  std::string results;

  auto* gen = app.add_subcommand("gen", "Generate a topology and workflow instances");
  add_common(gen, common, false);
  gen->add_option("--dcs", gen_args.dcs, "Data centers in a generated topology")->capture_default_str();
  gen->add_option("--clusters", gen_args.clusters, "Clusters per data center")->capture_default_str();
  gen->add_option("--count", gen_args.count, "Workflows per instance")->capture_default_str();
  gen->add_option("--tasks", gen_args.tasks, "Tasks per workflow")->capture_default_str();
  gen->add_option("--rho", gen_args.rho, "Deadline slack factor")->capture_default_str();
  gen->add_option("--family", gen_args.family, "epigenomics | genome | montage | layered")
      ->capture_default_str();
  gen->add_flag("--grid", gen_args.full_grid, "Generate the full experiment grid");
  gen->add_option("--instances", gen_args.instances, "Instances per grid cell")->capture_default_str();

  auto* embed = app.add_subcommand("train-embed", "Train the task and resource graph autoencoders");
  add_common(embed, common, true);
  embed->add_option("--epochs", embed_args.epochs)->capture_default_str();
  embed->add_option("--batch", embed_args.batch)->capture_default_str();
  embed->add_option("--lr", embed_args.lr)->capture_default_str();
  embed->add_option("--stride", embed_args.stride, "Keep every stride-th decision")
      ->capture_default_str();

  auto* policy = app.add_subcommand("train-policy", "Train the allocation policy");
  add_common(policy, common, true);
  policy->add_option("--embed", policy_args.embed, "Embedding checkpoint from train-embed");
  policy->add_option("--iterations", policy_args.iterations)->capture_default_str();
  policy->add_option("--steps", policy_args.steps, "Transitions per iteration")->capture_default_str();
  policy->add_option("--epochs", policy_args.epochs, "Update epochs per iteration")->capture_default_str();
  policy->add_option("--minibatches", policy_args.minibatches)->capture_default_str();
  policy->add_option("--lr", policy_args.lr)->capture_default_str();

  auto* run = app.add_subcommand("run", "Schedule one instance with one algorithm");
  add_common(run, common, true);
  run->add_option("--algo", run_args.algo)
      ->check(CLI::IsMember({"ecmws", "dara", "heft", "greedy"}))
      ->capture_default_str();
  run->add_option("--conf", run_args.conf, "Confidence threshold")->check(CLI::Range(0.0, 1.0));
  run->add_option("--checkpoint", run_args.checkpoint, "Policy checkpoint from train-policy");

  auto* compare = app.add_subcommand("compare", "Run every algorithm on a set of instances");
  add_common(compare, common, true);
  compare->add_option("--conf", run_args.conf, "Confidence threshold")->check(CLI::Range(0.0, 1.0));
  compare->add_option("--checkpoint", run_args.checkpoint, "Policy checkpoint from train-policy");

  auto* report = app.add_subcommand("report", "Tabulate relative cost deviations");
  add_common(report, common, false);
  report->add_option("--results", results, "results.csv from compare (default: <out>/results.csv)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(common, gen_args);
    if (embed->parsed()) return cmd_train_embed(common, embed_args);
    if (policy->parsed()) return cmd_train_policy(common, policy_args);
    if (run->parsed()) return cmd_run(common, run_args);
    if (compare->parsed()) return cmd_compare(common, run_args);
    if (report->parsed()) return cmd_report(common, results);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
