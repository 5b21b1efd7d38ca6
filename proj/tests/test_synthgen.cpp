#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <deque>
#include <limits>

#include "kgcoop/error.hpp"
#include "kgcoop/synthgen.hpp"
#include "support.hpp"

using namespace kgcoop;

namespace {

constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();

// Plain BFS over forward triples walked in both directions.
std::size_t oracle_distance(std::size_t n, const std::vector<Triple>& triples, EntityId from,
                            EntityId to) {
  std::vector<std::vector<std::uint32_t>> adj(n);
  for (const Triple& t : triples) {
    adj[t.head.value].push_back(t.tail.value);
    adj[t.tail.value].push_back(t.head.value);
  }
  std::vector<std::size_t> dist(n, kInf);
  std::deque<std::uint32_t> queue{from.value};
  dist[from.value] = 0;
  while (!queue.empty()) {
    const auto u = queue.front();
    queue.pop_front();
    for (auto v : adj[u]) {
      if (dist[v] == kInf) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist[to.value];
}

std::vector<Triple> base_triples(const Dataset& d) {
  return {d.graph.triples().begin(), d.graph.triples().end()};
}

GenSpec spec(std::size_t path_length, std::uint64_t seed) {
  GenSpec s;
  s.path_length = path_length;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("L=6 fully ablated: base shortest path is exactly 6") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const Dataset d = generate(spec(6, seed));
    REQUIRE(d.queries.size() == 20);
    for (const Query& q : d.queries) {
      CHECK(oracle_distance(d.graph.entity_count(), base_triples(d), q.source, q.answers[0]) ==
            6);
      CHECK_FALSE(d.graph.contains({q.source, q.relation, q.answers[0]}));
    }
  }
}

TEST_CASE("L=2 fully ablated: base shortest path is exactly 2") {
  const Dataset d = generate(spec(2, 42));
  for (const Query& q : d.queries) {
    CHECK(oracle_distance(d.graph.entity_count(), base_triples(d), q.source, q.answers[0]) == 2);
  }
}

TEST_CASE("no ablation and no distractors: empty pool, direct edges") {
  GenSpec s = spec(6, 9);
  s.ablation_ratio = 0.0;
  s.distractor_ratio = 0.0;
  const Dataset d = generate(s);
  CHECK(d.pool.empty());
  for (const Query& q : d.queries) CHECK(d.graph.contains({q.source, q.relation, q.answers[0]}));
  const ReachabilityReport r = reachability_report(d.graph, d.queries, 3);
  CHECK(r.histogram.size() == 1);
  CHECK(r.histogram.at(1) == d.queries.size());
}

TEST_CASE("pool composition") {
  GenSpec s = spec(4, 5);
  s.distractor_ratio = 1.5;
  const Dataset d = generate(s);
  std::size_t genuine = 0, distractor = 0;
  for (const PoolEntry& e : d.pool.entries()) (e.genuine ? genuine : distractor) += 1;
  CHECK(genuine == d.queries.size());
  CHECK(distractor == 30);
  for (const Query& q : d.queries) {
    bool found = false;
    for (const PoolEntry& e : d.pool.entries()) {
      found = found || (e.genuine && e.triple == Triple{q.source, q.relation, q.answers[0]});
    }
    CHECK(found);
  }
}

TEST_CASE("injection never hurts reachability; genuine triples make every query 1 hop") {
  for (std::uint64_t seed : {1, 7}) {
    const Dataset d = generate(spec(6, seed));
    std::vector<Triple> with_genuine = base_triples(d);
    for (const PoolEntry& e : d.pool.entries()) {
      if (e.genuine) with_genuine.push_back(e.triple);
    }
    for (const Query& q : d.queries) {
      const std::size_t before =
          oracle_distance(d.graph.entity_count(), base_triples(d), q.source, q.answers[0]);
      const std::size_t after =
          oracle_distance(d.graph.entity_count(), with_genuine, q.source, q.answers[0]);
      CHECK(after <= before);
      CHECK(after == 1);
    }
  }
}

TEST_CASE("distractors create no new route within the horizon") {
  // Other queries' genuine triples may already give a short route; only a
  // distractor-induced drop into the horizon counts.
  for (std::uint64_t seed : {1, 2, 3, 4}) {
    const Dataset d = generate(spec(6, seed));
    for (std::size_t qi = 0; qi < d.queries.size(); ++qi) {
      const Query& q = d.queries[qi];
      std::vector<Triple> without = base_triples(d);
      std::vector<Triple> with;
      for (const PoolEntry& e : d.pool.entries()) {
        const bool own = e.genuine && e.triple.head == q.source && e.triple.tail == q.answers[0];
        if (e.genuine && !own) without.push_back(e.triple);
        if (!e.genuine) with.push_back(e.triple);
      }
      with.insert(with.end(), without.begin(), without.end());
      const std::size_t n = d.graph.entity_count();
      const std::size_t before = oracle_distance(n, without, q.source, q.answers[0]);
      const std::size_t after = oracle_distance(n, with, q.source, q.answers[0]);
      CHECK((after == before || after > 3));
    }
  }
}

TEST_CASE("deterministic under seed") {
  const Dataset a = generate(spec(3, 77));
  const Dataset b = generate(spec(3, 77));
  const Dataset c = generate(spec(3, 78));
  CHECK(graph_text(a) == graph_text(b));
  CHECK(pool_text(a) == pool_text(b));
  CHECK(query_text(a) == query_text(b));
  CHECK(a.id == b.id);
  CHECK(a.id != c.id);
}

TEST_CASE("save and load round trip") {
  testing::TempDir dir("synthgen");
  const Dataset a = generate(spec(3, 1));
  save_dataset(a, dir.path());
  const Dataset b = load_dataset(dir.path());
  CHECK(a.id == b.id);
  CHECK(graph_text(a) == graph_text(b));
  CHECK(pool_text(a) == pool_text(b));
  CHECK(query_text(a) == query_text(b));
}

TEST_CASE("infeasible specs are rejected") {
  GenSpec s;
  s.entity_count = 50;  // 20 queries * 7 chain entities = 140 needed
  CHECK_THROWS_WITH_AS(generate(s), doctest::Contains("need 140 entities"), Error);
  s = GenSpec{};
  s.path_length = 0;
  CHECK_THROWS_AS(generate(s), Error);
  s = GenSpec{};
  s.ablation_ratio = 1.5;
  CHECK_THROWS_AS(generate(s), Error);
  s = GenSpec{};
  s.distractor_ratio = -1.0;
  CHECK_THROWS_AS(generate(s), Error);
  s = GenSpec{};
  s.relation_count = 1;
  CHECK_THROWS_AS(generate(s), Error);
}

TEST_CASE("reachability report") {
  SUBCASE("empty query list") {
    const Dataset d = testing::five_entity_dataset();
    const ReachabilityReport r = reachability_report(d.graph, {}, 3);
    CHECK(r.distances.empty());
    CHECK(r.histogram.empty());
    CHECK(r.unreachable == 0);
  }
  SUBCASE("direct edge") {
    const auto g = load_triples("a\tr\tb\n").graph;
    const Query q{*g.find_entity("a"), *g.find_relation("r"), {*g.find_entity("b")}};
    const std::vector<Query> qs{q};
    const ReachabilityReport r = reachability_report(g, qs, 3);
    CHECK(r.distances[0] == 1);
    CHECK(r.within_horizon(0));
  }
  SUBCASE("L=6 beyond horizon 3, matches oracle, unreachable counted") {
    const Dataset d = generate(spec(6, 3));
    const ReachabilityReport r = reachability_report(d.graph, d.queries, 3);
    CHECK(r.histogram.at(6) == d.queries.size());
    CHECK(r.beyond_horizon == d.queries.size());
    for (std::size_t i = 0; i < d.queries.size(); ++i) CHECK_FALSE(r.within_horizon(i));

    const Dataset five = testing::five_entity_dataset();
    const ReachabilityReport r5 = reachability_report(five.graph, five.queries, 3);
    CHECK(r5.unreachable == 1);
    CHECK_FALSE(r5.distances[0].has_value());
  }
  SUBCASE("overlay distances include injected triples") {
    const Dataset d = generate(spec(6, 3));
    GraphOverlay o(d.graph);
    o.add_triple(d.pool[0].triple);
    const Query& q = d.queries[0];
    REQUIRE(d.pool[0].triple.head == q.source);
    CHECK(shortest_path_length(o, q) == 1);
  }
}
