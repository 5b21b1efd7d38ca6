#include "kgcoop/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <ostream>
#include <sstream>

#include "kgcoop/config.hpp"
#include "kgcoop/error.hpp"
#include "kgcoop/hashing.hpp"
#include "kgcoop/text_format.hpp"

namespace kgcoop {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kManifestMagic = "kgcoop-manifest\t1";
constexpr std::string_view kManifestSuffix = ".manifest";

fs::path manifest_for(const fs::path& file) {
  return fs::path(file.string() + std::string(kManifestSuffix));
}

void require_file(const fs::path& path, const char* what) {
  if (!fs::is_regular_file(path)) {
    throw ConfigError(std::string(what) + " not found: " + path.string());
  }
}

void require_dataset(const fs::path& dir) {
  for (std::string_view name : {kGraphFile, kPoolFile, kQueryFile}) {
    require_file(dir / name, "dataset file");
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

Manifest base_manifest(const std::string& command, const RunConfig& c) {
  Manifest m;
  m.command = command;
  m.seed = c.seed;
  m.config = config_echo(c);
  return m;
}

void add_dataset_inputs(Manifest& m, const fs::path& dir) {
  for (std::string_view name : {kGraphFile, kPoolFile, kQueryFile}) {
    m.inputs.emplace_back(std::string(name), dir / name);
  }
}

struct Options {
  std::string config;
  std::string out;
  std::string checkpoint;
  std::string baseline = "none";
  bool initial = false;
};

int cmd_generate(const Options& o, std::ostream& out) {
  const RunConfig c = load_run_config(o.config);
  const fs::path dir = o.out.empty() ? c.paths.dataset : fs::path(o.out);
  const Dataset d = generate(c.generate);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error("cannot create output directory " + dir.string());
  save_dataset(d, dir);

  Manifest m = base_manifest("generate", c);
  for (std::string_view name : {kGraphFile, kPoolFile, kQueryFile}) m.outputs.push_back(dir / name);
  m.extra.push_back("dataset_id\t" + d.id);
  m.extra.push_back("entities\t" + std::to_string(d.graph.entity_count()));
  m.extra.push_back("triples\t" + std::to_string(d.graph.triples().size()));
  m.extra.push_back("pool\t" + std::to_string(d.pool.size()));
  m.extra.push_back("queries\t" + std::to_string(d.queries.size()));
  const ReachabilityReport r = reachability_report(d.graph, d.queries, c.generate.horizon);
  for (const auto& [len, count] : r.histogram) {
    m.extra.push_back("shortest_path\t" + std::to_string(len) + '\t' + std::to_string(count));
  }
  m.extra.push_back("unreachable\t" + std::to_string(r.unreachable));
  m.extra.push_back("beyond_horizon\t" + std::to_string(r.beyond_horizon));
  write_manifest(m, dir / "manifest.txt");

  out << "wrote " << d.queries.size() << " queries, " << d.pool.size() << " pool triples to "
      << dir.string() << '\n';
  for (const auto& [len, count] : r.histogram) {
    out << "shortest path " << len << ": " << count << '\n';
  }
  if (r.unreachable) out << "unreachable: " << r.unreachable << '\n';
  return kExitOk;
}

int cmd_train_embeddings(const Options& o, std::ostream& out) {
  const RunConfig c = load_run_config(o.config);
  require_dataset(c.paths.dataset);
  const Dataset d = load_dataset(c.paths.dataset);
  const EmbeddingTrainResult r = train_embeddings(d.graph, c.embed);
  if (c.paths.embeddings.has_parent_path()) {
    fs::create_directories(c.paths.embeddings.parent_path());
  }
  save_embeddings(r.table, c.paths.embeddings);

  Manifest m = base_manifest("train-embeddings", c);
  add_dataset_inputs(m, c.paths.dataset);
  m.outputs.push_back(c.paths.embeddings);
  if (!r.epoch_loss.empty()) {
    m.extra.push_back("first_epoch_loss\t" + format_double(r.epoch_loss.front()));
    m.extra.push_back("last_epoch_loss\t" + format_double(r.epoch_loss.back()));
  }
  write_manifest(m, manifest_for(c.paths.embeddings));
  out << "trained " << c.embed.epochs << " epochs, d=" << c.embed.dimension << '\n';
  return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out) {
  const RunConfig c = load_run_config(o.config);
  require_dataset(c.paths.dataset);
  require_file(c.paths.embeddings, "embeddings");
  const Dataset d = load_dataset(c.paths.dataset);
  const EmbeddingTable table = load_embeddings(c.paths.embeddings);
  const TrainResult r = train(c.train, d, table);

  save_policies(r.policies, c.paths.policies);
  std::ostringstream csv;
  write_metrics_csv(csv, r.log);
  write_text(c.paths.metrics, csv.str());

  Manifest m = base_manifest("train", c);
  add_dataset_inputs(m, c.paths.dataset);
  m.inputs.emplace_back("embeddings", c.paths.embeddings);
  m.outputs.push_back(c.paths.policies);
  m.outputs.push_back(c.paths.metrics);
  write_manifest(m, manifest_for(c.paths.policies));

  out << "trained " << r.log.size() << " batches";
  if (!r.log.empty()) {
    out << ", final batch success rate " << format_double(r.log.back().success_rate);
  }
  out << '\n';
  return kExitOk;
}

struct EvalInputs {
  RunConfig config;
  Dataset dataset;
  EmbeddingTable table;
  Policies policies;
  fs::path checkpoint;
};

EvalInputs load_eval_inputs(const Options& o) {
  EvalInputs in;
  in.config = load_run_config(o.config);
  require_dataset(in.config.paths.dataset);
  require_file(in.config.paths.embeddings, "embeddings");
  in.dataset = load_dataset(in.config.paths.dataset);
  in.table = load_embeddings(in.config.paths.embeddings);
  if (o.initial) {
    in.policies = default_initial_policies(in.config.train, in.table);
  } else {
    in.checkpoint = o.checkpoint.empty() ? in.config.paths.policies : fs::path(o.checkpoint);
    require_file(in.checkpoint, "checkpoint");
    in.policies = load_policies(in.checkpoint);
  }
  return in;
}

int cmd_eval(const Options& o, std::ostream& out) {
  if (o.baseline != "none" && o.baseline != "reasoner-only") {
    throw ConfigError("--baseline must be 'none' or 'reasoner-only'");
  }
  EvalInputs in = load_eval_inputs(o);
  EvalConfig cfg = in.config.eval;
  if (o.baseline == "reasoner-only") cfg.extractor_enabled = false;
  const Metrics metrics = evaluate(in.policies, in.dataset, in.table, cfg);

  const fs::path csv_path = o.out.empty() ? in.config.paths.eval : fs::path(o.out);
  std::ostringstream csv;
  csv << kEvalHeader << '\n';
  write_metrics_row(csv, metrics);
  write_text(csv_path, csv.str());

  Manifest m = base_manifest("eval", in.config);
  add_dataset_inputs(m, in.config.paths.dataset);
  m.inputs.emplace_back("embeddings", in.config.paths.embeddings);
  if (!in.checkpoint.empty()) m.inputs.emplace_back("checkpoint", in.checkpoint);
  m.outputs.push_back(csv_path);
  m.extra.push_back("baseline\t" + o.baseline);
  m.extra.push_back(std::string("policies\t") + (o.initial ? "initial" : "checkpoint"));
  m.extra.push_back("extractor\t" + std::string(cfg.extractor_enabled ? "true" : "false"));
  write_manifest(m, manifest_for(csv_path));

  write_summary(out, metrics);
  out << kEvalHeader << '\n';
  write_metrics_row(out, metrics);
  return kExitOk;
}

int cmd_report(const Options& o, std::ostream& out) {
  EvalInputs in = load_eval_inputs(o);
  if (fs::is_regular_file(in.config.paths.metrics)) {
    std::ifstream csv(in.config.paths.metrics);
    std::string line, first, last;
    std::size_t rows = 0;
    std::getline(csv, line);
    while (std::getline(csv, line)) {
      if (line.empty()) continue;
      if (rows++ == 0) first = line;
      last = line;
    }
    out << "training log: " << rows << " batches\n";
    if (rows) out << "  first " << first << "\n  last  " << last << '\n';
  }
  EvalConfig coop = in.config.eval;
  coop.extractor_enabled = true;
  EvalConfig solo = coop;
  solo.extractor_enabled = false;
  const Metrics a = evaluate(in.policies, in.dataset, in.table, coop);
  const Metrics b = evaluate(in.policies, in.dataset, in.table, solo);
  out << "cooperative\n";
  write_summary(out, a);
  out << "reasoner-only\n";
  write_summary(out, b);
  write_delta(out, compare(a, b));
  return kExitOk;
}

}  // namespace

void write_manifest(const Manifest& m, const fs::path& path) {
  std::ostringstream s;
  s << kManifestMagic << '\n';
  s << "command\t" << m.command << '\n';
  s << "seed\t" << m.seed << '\n';
  for (const auto& [k, v] : m.config) s << "config\t" << k << '\t' << v << '\n';
  for (const auto& [label, p] : m.inputs) {
    s << "input\t" << label << '\t' << sha256_file(p) << '\n';
  }
  for (const fs::path& p : m.outputs) {
    s << "output\t" << p.filename().string() << '\t' << sha256_file(p) << '\n';
  }
  for (const std::string& line : m.extra) s << line << '\n';
  write_text(path, s.str());
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cooperative extractor/reasoner agents over incomplete knowledge graphs", "kgcoop"};
  app.require_subcommand(1);
  Options o;
  auto add = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", o.config, "Run configuration file")->required();
    return sub;
  };
  CLI::App* gen = add("generate", "Generate a synthetic dataset");
  gen->add_option("-o,--out", o.out, "Output directory (default: paths.dataset)");
  CLI::App* emb = add("train-embeddings", "Train entity/relation embeddings");
  CLI::App* trn = add("train", "Train both agents");
  CLI::App* evl = add("eval", "Evaluate a policy checkpoint");
  evl->add_option("--checkpoint", o.checkpoint, "Policy checkpoint (default: paths.policies)");
  evl->add_option("--baseline", o.baseline, "none or reasoner-only");
  evl->add_flag("--initial", o.initial, "Evaluate the untrained initial policies");
  evl->add_option("-o,--out", o.out, "Metrics CSV (default: paths.eval)");
  CLI::App* rep = add("report", "Compare cooperative and reasoner-only evaluation");
  rep->add_option("--checkpoint", o.checkpoint, "Policy checkpoint (default: paths.policies)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_generate(o, out);
    if (emb->parsed()) return cmd_train_embeddings(o, out);
    if (trn->parsed()) return cmd_train(o, out);
    if (evl->parsed()) return cmd_eval(o, out);
    if (rep->parsed()) return cmd_report(o, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace kgcoop
