#pragma once
// kgcoop command line.
//
//   kgcoop generate          --config FILE [--out DIR]
//   kgcoop train-embeddings  --config FILE
//   kgcoop train             --config FILE
//   kgcoop eval              --config FILE [--checkpoint FILE] [--baseline reasoner-only]
//                            [--initial] [--out FILE]
//   kgcoop report            --config FILE [--checkpoint FILE]
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
// Every command that writes files also writes a manifest next to them.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace kgcoop {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Manifest text: magic line, command, seed, sorted config echo, then one
// "file <name> <sha256>" line per input/output and command-specific extras.
struct Manifest {
  std::string command;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::pair<std::string, std::filesystem::path>> inputs;
  std::vector<std::filesystem::path> outputs;
  std::vector<std::string> extra;  // pre-formatted TAB separated lines
};
void write_manifest(const Manifest& m, const std::filesystem::path& path);

}  // namespace kgcoop
