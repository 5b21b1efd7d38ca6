#pragma once
// Run configuration: a line-oriented `section.key = value` file.
//
//   # comment
//   run.seed = 7
//   generate.path_length = 6
//   train.scheme = coop
//
// Relative paths are resolved against the directory of the config file.
// run.seed is mandatory; each component seed is derive_seed(run.seed, name)
// with names "generate", "embed", "train" and "eval".

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kgcoop/embed.hpp"
#include "kgcoop/eval.hpp"
#include "kgcoop/synthgen.hpp"
#include "kgcoop/train.hpp"

namespace kgcoop {

// Raw key/value pairs with the line each came from.
class ConfigFile {
 public:
  // Throws ConfigError on malformed lines or duplicate keys.
  static ConfigFile parse(std::istream& in);
  static ConfigFile load(const std::filesystem::path& path);

  std::optional<std::string> get(const std::string& key) const;
  std::size_t line_of(const std::string& key) const;
  std::vector<std::string> keys() const;

 private:
  std::map<std::string, std::pair<std::string, std::size_t>> entries_;
};

struct RunPaths {
  std::filesystem::path dataset = "dataset";
  std::filesystem::path embeddings = "embeddings.tsv";
  std::filesystem::path policies = "policies.tsv";
  std::filesystem::path metrics = "metrics.csv";
  std::filesystem::path eval = "eval.csv";
};

struct RunConfig {
  std::uint64_t seed = 0;
  GenSpec generate;
  EmbeddingConfig embed;
  TrainConfig train;
  EvalConfig eval;
  RunPaths paths;
};

// Unknown keys, unparsable values and invalid settings throw ConfigError
// naming the key and line.
RunConfig run_config_from(const ConfigFile& file, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

// Every effective setting as sorted (key, value) pairs, paths excluded.
std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& config);

}  // namespace kgcoop
