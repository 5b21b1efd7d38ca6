#include "kgcoop/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <istream>

#include "kgcoop/error.hpp"
#include "kgcoop/random.hpp"
#include "kgcoop/text_format.hpp"

namespace kgcoop {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

bool parse_bool(std::string_view s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw Error("not a boolean: '" + std::string(s) + "'");
}

std::size_t parse_size(std::string_view s) { return static_cast<std::size_t>(parse_uint(s)); }

SelectMode parse_mode(std::string_view s) {
  if (s == "greedy") return SelectMode::greedy;
  if (s == "sample") return SelectMode::sample;
  throw Error("unknown eval mode '" + std::string(s) + "' (expected greedy or sample)");
}

struct Field {
  const char* key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;  // empty for paths
};

template <typename T>
Field size_field(const char* key, T RunConfig::*section, std::size_t T::*member) {
  return {key, [=](RunConfig& c, const std::string& v) { c.*section.*member = parse_size(v); },
          [=](const RunConfig& c) { return std::to_string(c.*section.*member); }};
}

template <typename T>
Field double_field(const char* key, T RunConfig::*section, double T::*member) {
  return {key, [=](RunConfig& c, const std::string& v) { c.*section.*member = parse_double(v); },
          [=](const RunConfig& c) { return format_double(c.*section.*member); }};
}

template <typename T>
Field bool_field(const char* key, T RunConfig::*section, bool T::*member) {
  return {key, [=](RunConfig& c, const std::string& v) { c.*section.*member = parse_bool(v); },
          [=](const RunConfig& c) { return std::string(c.*section.*member ? "true" : "false"); }};
}

Field path_field(const char* key, std::filesystem::path RunPaths::*member) {
  return {key, [=](RunConfig& c, const std::string& v) { c.paths.*member = v; }, nullptr};
}

const std::vector<Field>& fields() {
  using R = RunConfig;
  static const std::vector<Field> all = {
      {"run.seed", [](R& c, const std::string& v) { c.seed = parse_uint(v); },
       [](const R& c) { return std::to_string(c.seed); }},
      size_field("generate.entities", &R::generate, &GenSpec::entity_count),
      size_field("generate.relations", &R::generate, &GenSpec::relation_count),
      size_field("generate.branching", &R::generate, &GenSpec::branching),
      size_field("generate.path_length", &R::generate, &GenSpec::path_length),
      size_field("generate.queries", &R::generate, &GenSpec::query_count),
      double_field("generate.ablation", &R::generate, &GenSpec::ablation_ratio),
      double_field("generate.distractor", &R::generate, &GenSpec::distractor_ratio),
      size_field("generate.horizon", &R::generate, &GenSpec::horizon),
      size_field("embed.dimension", &R::embed, &EmbeddingConfig::dimension),
      size_field("embed.epochs", &R::embed, &EmbeddingConfig::epochs),
      double_field("embed.learning_rate", &R::embed, &EmbeddingConfig::learning_rate),
      size_field("embed.negatives", &R::embed, &EmbeddingConfig::negatives),
      double_field("embed.margin", &R::embed, &EmbeddingConfig::margin),
      size_field("train.episodes_per_batch", &R::train, &TrainConfig::episodes_per_batch),
      size_field("train.batches", &R::train, &TrainConfig::batches),
      double_field("train.reasoner_learning_rate", &R::train,
                   &TrainConfig::reasoner_learning_rate),
      double_field("train.extractor_learning_rate", &R::train,
                   &TrainConfig::extractor_learning_rate),
      double_field("train.entropy_weight", &R::train, &TrainConfig::entropy_weight),
      double_field("train.baseline_decay", &R::train, &TrainConfig::baseline_decay),
      {"train.scheme",
       [](R& c, const std::string& v) { c.train.scheme.variant = parse_reward_variant(v); },
       [](const R& c) { return std::string(reward_variant_name(c.train.scheme.variant)); }},
      {"train.hop_cost",
       [](R& c, const std::string& v) { c.train.scheme.hop_cost = parse_double(v); },
       [](const R& c) { return format_double(c.train.scheme.hop_cost); }},
      {"train.rejection_cost",
       [](R& c, const std::string& v) { c.train.scheme.rejection_cost = parse_double(v); },
       [](const R& c) { return format_double(c.train.scheme.rejection_cost); }},
      size_field("train.horizon", &R::train, &TrainConfig::horizon),
      size_field("train.drift_window", &R::train, &TrainConfig::drift_window),
      double_field("train.drift_bonus", &R::train, &TrainConfig::drift_bonus),
      {"train.optimizer",
       [](R& c, const std::string& v) { c.train.optimizer = parse_optimizer(v); },
       [](const R& c) { return std::string(optimizer_name(c.train.optimizer)); }},
      bool_field("train.extractor", &R::train, &TrainConfig::extractor_enabled),
      {"eval.mode", [](R& c, const std::string& v) { c.eval.mode = parse_mode(v); },
       [](const R& c) {
         return std::string(c.eval.mode == SelectMode::greedy ? "greedy" : "sample");
       }},
      size_field("eval.samples", &R::eval, &EvalConfig::num_samples),
      size_field("eval.horizon", &R::eval, &EvalConfig::horizon),
      size_field("eval.k", &R::eval, &EvalConfig::k),
      bool_field("eval.extractor", &R::eval, &EvalConfig::extractor_enabled),
      path_field("paths.dataset", &RunPaths::dataset),
      path_field("paths.embeddings", &RunPaths::embeddings),
      path_field("paths.policies", &RunPaths::policies),
      path_field("paths.metrics", &RunPaths::metrics),
      path_field("paths.eval", &RunPaths::eval),
  };
  return all;
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& in) {
  ConfigFile out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(number) + ": expected 'section.key = value'");
    }
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    if (key.find('.') == std::string::npos || key.front() == '.' || key.back() == '.') {
      throw ConfigError("line " + std::to_string(number) + ": key '" + key +
                        "' is not of the form section.key");
    }
    if (!out.entries_.emplace(key, std::make_pair(value, number)).second) {
      throw ConfigError("line " + std::to_string(number) + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse(in);
}

std::optional<std::string> ConfigFile::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second.first;
}

std::size_t ConfigFile::line_of(const std::string& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? 0 : it->second.second;
}

std::vector<std::string> ConfigFile::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) out.push_back(k);
  return out;
}

RunConfig run_config_from(const ConfigFile& file, const std::filesystem::path& base_dir) {
  const auto& all = fields();
  for (const std::string& key : file.keys()) {
    const bool known =
        std::any_of(all.begin(), all.end(), [&](const Field& f) { return key == f.key; });
    if (!known) {
      throw ConfigError("line " + std::to_string(file.line_of(key)) + ": unknown key '" + key +
                        "'");
    }
  }
  if (!file.get("run.seed")) throw ConfigError("run.seed is required");

  RunConfig c;
  for (const Field& f : all) {
    const auto value = file.get(f.key);
    if (!value) continue;
    try {
      f.set(c, *value);
    } catch (const Error& e) {
      throw ConfigError("line " + std::to_string(file.line_of(f.key)) + ": " + f.key + ": " +
                        e.what());
    }
  }
  for (auto* p : {&c.paths.dataset, &c.paths.embeddings, &c.paths.policies, &c.paths.metrics,
                  &c.paths.eval}) {
    if (p->is_relative()) *p = base_dir / *p;
  }
  c.generate.seed = derive_seed(c.seed, "generate");
  c.embed.seed = derive_seed(c.seed, "embed");
  c.train.seed = derive_seed(c.seed, "train");
  c.eval.seed = derive_seed(c.seed, "eval");
  try {
    c.generate.validate();
    c.train.validate();
    if (c.embed.dimension == 0) throw Error("embed.dimension must be positive");
    if (c.eval.k == 0) throw Error("eval.k must be at least 1");
    if (c.eval.num_samples == 0) throw Error("eval.samples must be positive");
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return run_config_from(ConfigFile::load(path), path.parent_path());
}

std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Field& f : fields()) {
    if (f.get) out.emplace_back(f.key, f.get(config));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace kgcoop
