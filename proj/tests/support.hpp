#pragma once
// Shared fixtures for the unit and acceptance tests.

#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <unistd.h>

#include "kgcoop/dataset.hpp"
#include "kgcoop/random.hpp"

namespace kgcoop::testing {

// Removes itself on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("kgcoop-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline NamedTriple nt(std::string h, std::string r, std::string t) {
  return NamedTriple{std::move(h), std::move(r), std::move(t)};
}

// Five entities a..e:
//   base  a -r-> b -r-> c,  a -s-> d
//   pool  (b, q, e) genuine, (a, q, e) genuine, (d, s, c) distractor
//   query (a, q, {e})
inline Dataset five_entity_dataset() {
  const std::vector<NamedTriple> graph = {nt("a", "r", "b"), nt("b", "r", "c"),
                                          nt("a", "s", "d")};
  const std::vector<NamedPoolEntry> pool = {{nt("b", "q", "e"), true},
                                            {nt("a", "q", "e"), true},
                                            {nt("d", "s", "c"), false}};
  const std::vector<NamedQuery> queries = {{"a", "q", {"e"}}};
  return build_dataset(graph, pool, queries);
}

inline EntityId entity(const Dataset& d, std::string_view name) {
  return d.graph.find_entity(name).value();
}

inline RelationId relation(const Dataset& d, std::string_view name) {
  return d.graph.find_relation(name).value();
}

// Relative error with an absolute floor for coordinates near zero.
inline double relative_error(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Central differences of f at x, one coordinate at a time.
inline std::vector<double> finite_difference(const std::function<double(std::vector<double>&)>& f,
                                             std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f(x);
    x[i] = saved - h;
    const double down = f(x);
    x[i] = saved;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

}  // namespace kgcoop::testing
