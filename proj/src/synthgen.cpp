#include "kgcoop/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <tuple>

#include "kgcoop/error.hpp"
#include "kgcoop/random.hpp"

namespace kgcoop {

namespace {

constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max() / 4;

struct RawEdge {
  std::size_t head, relation, tail;
  auto operator<=>(const RawEdge&) const = default;
};

struct PlantedQuery {
  std::size_t source, answer, relation;
  bool ablated = false;
};

// Undirected reachability structure over integer entity ids; edges are
// traversable both ways because the stored graph is inverse-closed.
class WorkGraph {
 public:
  explicit WorkGraph(std::size_t n) : adj_(n) {}

  void connect(std::size_t u, std::size_t v) {
    adj_[u].push_back(v);
    if (u != v) adj_[v].push_back(u);
  }
  void disconnect(std::size_t u, std::size_t v) {
    auto drop = [](std::vector<std::size_t>& xs, std::size_t x) {
      xs.erase(std::find(xs.begin(), xs.end(), x));
    };
    drop(adj_[u], v);
    if (u != v) drop(adj_[v], u);
  }

  std::vector<std::size_t> distances_from(std::size_t source) const {
    std::vector<std::size_t> dist(adj_.size(), kInf);
    std::deque<std::size_t> frontier{source};
    dist[source] = 0;
    while (!frontier.empty()) {
      const std::size_t u = frontier.front();
      frontier.pop_front();
      for (std::size_t v : adj_[u]) {
        if (dist[v] == kInf) {
          dist[v] = dist[u] + 1;
          frontier.push_back(v);
        }
      }
    }
    return dist;
  }

 private:
  std::vector<std::vector<std::size_t>> adj_;
};

// Length of the best route through a new undirected edge u-v.
std::size_t via(const std::vector<std::size_t>& from_s, const std::vector<std::size_t>& from_a,
                std::size_t u, std::size_t v) {
  return std::min(from_s[u] + 1 + from_a[v], from_s[v] + 1 + from_a[u]);
}

std::string padded(char prefix, std::size_t i, std::size_t width) {
  std::string digits = std::to_string(i);
  return prefix + std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

}  // namespace

void GenSpec::validate() const {
  if (path_length < 1) throw Error("GenSpec: path_length must be >= 1");
  if (relation_count < 2) throw Error("GenSpec: relation_count must be >= 2");
  if (query_count < 1) throw Error("GenSpec: query_count must be >= 1");
  if (!(ablation_ratio >= 0.0 && ablation_ratio <= 1.0)) {
    throw Error("GenSpec: ablation_ratio must lie in [0, 1]");
  }
  if (!(distractor_ratio >= 0.0) || !std::isfinite(distractor_ratio)) {
    throw Error("GenSpec: distractor_ratio must be finite and >= 0");
  }
  const std::size_t needed = query_count * (path_length + 1);
  if (entity_count < needed) {
    throw Error("GenSpec: " + std::to_string(query_count) + " queries with path_length " +
                std::to_string(path_length) + " need " + std::to_string(needed) +
                " entities, only " + std::to_string(entity_count) + " available");
  }
}

Dataset generate(const GenSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  const std::size_t n = spec.entity_count;
  const std::size_t query_relations = std::max<std::size_t>(1, spec.relation_count / 4);
  const std::size_t path_relations = spec.relation_count - query_relations;
  // Relation index space: [0, path_relations) are p*, then q*.
  auto relation_name = [&](std::size_t r) {
    return r < path_relations ? "p" + std::to_string(r)
                              : "q" + std::to_string(r - path_relations);
  };
  const std::size_t width = std::to_string(n - 1).size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);

  std::vector<RawEdge> graph_edges;
  std::set<RawEdge> edge_set;
  WorkGraph work(n);
  auto add_graph_edge = [&](RawEdge e) {
    graph_edges.push_back(e);
    edge_set.insert(e);
  };

  std::vector<PlantedQuery> planted;
  std::vector<std::size_t> chain_entities;
  std::size_t next = 0;
  for (std::size_t q = 0; q < spec.query_count; ++q) {
    std::vector<std::size_t> chain(order.begin() + next,
                                   order.begin() + next + spec.path_length + 1);
    next += spec.path_length + 1;
    for (std::size_t j = 0; j + 1 < chain.size(); ++j) {
      const RawEdge e{chain[j], rng.index(path_relations), chain[j + 1]};
      add_graph_edge(e);
      work.connect(e.head, e.tail);
    }
    chain_entities.insert(chain_entities.end(), chain.begin(), chain.end());
    planted.push_back(
        PlantedQuery{chain.front(), chain.back(), path_relations + rng.index(query_relations)});
  }
  for (auto& q : planted) {
    q.ablated = rng.uniform() < spec.ablation_ratio;
    if (!q.ablated) add_graph_edge(RawEdge{q.source, q.relation, q.answer});
  }

  // Background edges, skipping any that would shorten a planted chain.
  auto chain_distances = [&] {
    std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> d;
    d.reserve(planted.size());
    for (const auto& q : planted) {
      d.emplace_back(work.distances_from(q.source), work.distances_from(q.answer));
    }
    return d;
  };
  auto dist = chain_distances();
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t b = 0; b < spec.branching; ++b) {
      if (n < 2) break;
      std::size_t v = rng.index(n - 1);
      if (v >= u) ++v;
      const RawEdge e{u, rng.index(path_relations), v};
      if (edge_set.contains(e)) continue;
      bool shortens = false;
      for (std::size_t q = 0; q < planted.size() && !shortens; ++q) {
        shortens = via(dist[q].first, dist[q].second, u, v) < spec.path_length;
      }
      if (shortens) continue;
      add_graph_edge(e);
      work.connect(u, v);
      dist = chain_distances();
    }
  }

  // Pool: genuine direct edges, then distractors.
  std::vector<RawEdge> genuine;
  std::vector<std::size_t> genuine_owner;
  for (std::size_t q = 0; q < planted.size(); ++q) {
    if (planted[q].ablated) {
      genuine.push_back(RawEdge{planted[q].source, planted[q].relation, planted[q].answer});
      genuine_owner.push_back(q);
    }
  }
  const auto distractor_target =
      static_cast<std::size_t>(std::llround(spec.distractor_ratio * genuine.size()));
  std::vector<RawEdge> distractors;
  std::set<RawEdge> pool_set(genuine.begin(), genuine.end());

  // Per-query distances over base + accepted distractors + other queries'
  // genuine triples.
  auto pool_distances = [&] {
    std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> d;
    for (std::size_t g = 0; g < genuine.size(); ++g) work.connect(genuine[g].head, genuine[g].tail);
    for (std::size_t q = 0; q < planted.size(); ++q) {
      const auto own = std::find(genuine_owner.begin(), genuine_owner.end(), q);
      if (own != genuine_owner.end()) {
        const auto& g = genuine[static_cast<std::size_t>(own - genuine_owner.begin())];
        work.disconnect(g.head, g.tail);
        d.emplace_back(work.distances_from(planted[q].source),
                       work.distances_from(planted[q].answer));
        work.connect(g.head, g.tail);
      } else {
        d.emplace_back(work.distances_from(planted[q].source),
                       work.distances_from(planted[q].answer));
      }
    }
    for (const auto& g : genuine) work.disconnect(g.head, g.tail);
    return d;
  };

  if (distractor_target > 0) {
    auto pdist = pool_distances();
    const std::size_t max_attempts = 1000 * distractor_target;
    for (std::size_t attempt = 0;
         attempt < max_attempts && distractors.size() < distractor_target; ++attempt) {
      const std::size_t head = rng.uniform() < 0.5
                                   ? planted[rng.index(planted.size())].source
                                   : chain_entities[rng.index(chain_entities.size())];
      std::size_t tail = rng.index(n - 1);
      if (tail >= head) ++tail;
      const RawEdge e{head, rng.index(spec.relation_count), tail};
      if (edge_set.contains(e) || pool_set.contains(e)) continue;
      bool shortcut = false;
      for (std::size_t q = 0; q < planted.size() && !shortcut; ++q) {
        const std::size_t before = pdist[q].first[planted[q].answer];
        const std::size_t after = via(pdist[q].first, pdist[q].second, head, tail);
        shortcut = after < before && after <= spec.horizon;
      }
      if (shortcut) continue;
      distractors.push_back(e);
      pool_set.insert(e);
      work.connect(head, tail);
      pdist = pool_distances();
    }
    if (distractors.size() < distractor_target) {
      throw Error("GenSpec: could only place " + std::to_string(distractors.size()) + " of " +
                  std::to_string(distractor_target) +
                  " distractors without creating shortcuts; lower distractor_ratio or raise "
                  "entity_count");
    }
  }

  std::vector<NamedTriple> named_graph;
  named_graph.reserve(graph_edges.size());
  auto name_edge = [&](const RawEdge& e) {
    return NamedTriple{padded('e', e.head, width), relation_name(e.relation),
                       padded('e', e.tail, width)};
  };
  for (const auto& e : graph_edges) named_graph.push_back(name_edge(e));
  std::vector<NamedPoolEntry> named_pool;
  for (const auto& e : genuine) named_pool.push_back({name_edge(e), true});
  for (const auto& e : distractors) named_pool.push_back({name_edge(e), false});
  std::vector<NamedQuery> named_queries;
  for (const auto& q : planted) {
    named_queries.push_back(NamedQuery{padded('e', q.source, width), relation_name(q.relation),
                                       {padded('e', q.answer, width)}});
  }
  return build_dataset(named_graph, named_pool, named_queries);
}

std::optional<std::size_t> shortest_path_length(const GraphOverlay& graph, const Query& query) {
  const std::size_t n = graph.base().entity_count();
  if (query.source.value >= n) throw Error("query source outside the graph");
  std::vector<std::size_t> dist(n, kInf);
  std::deque<EntityId> frontier{query.source};
  dist[query.source.value] = 0;
  while (!frontier.empty()) {
    const EntityId u = frontier.front();
    frontier.pop_front();
    if (query.is_answer(u)) return dist[u.value];
    for (const Edge& e : graph.neighbors(u)) {
      if (dist[e.target.value] == kInf) {
        dist[e.target.value] = dist[u.value] + 1;
        frontier.push_back(e.target);
      }
    }
  }
  return std::nullopt;
}

ReachabilityReport reachability_report(const GraphOverlay& graph, std::span<const Query> queries,
                                       std::size_t horizon) {
  ReachabilityReport report;
  report.horizon = horizon;
  report.distances.reserve(queries.size());
  for (const Query& q : queries) {
    const auto d = shortest_path_length(graph, q);
    report.distances.push_back(d);
    if (d) {
      ++report.histogram[*d];
    } else {
      ++report.unreachable;
    }
    if (!d || *d > horizon) ++report.beyond_horizon;
  }
  return report;
}

ReachabilityReport reachability_report(const KnowledgeGraph& graph,
                                       std::span<const Query> queries, std::size_t horizon) {
  return reachability_report(GraphOverlay(graph), queries, horizon);
}

}  // namespace kgcoop
