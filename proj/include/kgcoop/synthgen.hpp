#pragma once
// Synthetic datasets with controlled incompleteness.
//
// Every query gets a fresh chain of path_length + 1 entities
// source -> m1 -> ... -> answer built from path relations, plus a direct
// edge (source, r_q, answer). The direct edge is ablated into the pool with
// probability ablation_ratio. Random background edges are only accepted when
// they keep every planted chain the shortest route between its endpoints, so
// an ablated query is exactly path_length hops away in the base graph.
// Distractor pool triples never create a new route of <= horizon hops to any
// query's answer.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "kgcoop/dataset.hpp"

namespace kgcoop {

struct GenSpec {
  std::size_t entity_count = 200;
  // Split into max(1, relation_count / 4) query relations ("q*") and path
  // relations ("p*"); needs at least 2.
  std::size_t relation_count = 12;
  // Random out-edges attempted per entity.
  std::size_t branching = 2;
  std::size_t path_length = 6;
  std::size_t query_count = 20;
  double ablation_ratio = 1.0;
  double distractor_ratio = 1.0;
  // Reasoner horizon the distractor constraint protects.
  std::size_t horizon = 3;
  std::uint64_t seed = 0;

  // Throws Error describing the first violated constraint.
  void validate() const;
};

Dataset generate(const GenSpec& spec);

struct ReachabilityReport {
  // Hops from each query's source to its nearest answer; nullopt = no path.
  std::vector<std::optional<std::size_t>> distances;
  std::map<std::size_t, std::size_t> histogram;
  std::size_t unreachable = 0;
  std::size_t beyond_horizon = 0;
  std::size_t horizon = 0;

  bool within_horizon(std::size_t query) const {
    return distances.at(query) && *distances[query] <= horizon;
  }
};

// Exact BFS distances over base and overlay edges (inverse edges included).
ReachabilityReport reachability_report(const GraphOverlay& graph, std::span<const Query> queries,
                                       std::size_t horizon);
ReachabilityReport reachability_report(const KnowledgeGraph& graph,
                                       std::span<const Query> queries, std::size_t horizon);

std::optional<std::size_t> shortest_path_length(const GraphOverlay& graph, const Query& query);

}  // namespace kgcoop
