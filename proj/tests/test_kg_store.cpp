#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "kgcoop/error.hpp"
#include "kgcoop/kg_store.hpp"
#include "kgcoop/random.hpp"

using namespace kgcoop;

namespace {

bool has_edge(std::span<const Edge> edges, RelationId r, EntityId t) {
  return std::find(edges.begin(), edges.end(), Edge{r, t}) != edges.end();
}

bool has_edge(const std::vector<Edge>& edges, RelationId r, EntityId t) {
  return has_edge(std::span<const Edge>(edges), r, t);
}

KnowledgeGraph chain() { return load_triples("a\tr\tb\nb\tr\tc\n").graph; }

}  // namespace

TEST_CASE("single triple") {
  const KnowledgeGraph g = load_triples("a\tr\tb\n").graph;
  CHECK(g.entity_count() == 2);
  CHECK(g.relation_count() == 3);
  CHECK(g.edge_count() == 2);
  CHECK(g.relation_name(RelationId{0}) == "r");
  CHECK(g.relation_name(RelationId{1}) == "r^-1");
  CHECK(g.relation_name(RelationId{2}) == "SELF_LOOP");
  CHECK(g.is_self_loop(RelationId{2}));
  CHECK(g.inverse(RelationId{2}) == RelationId{2});
}

TEST_CASE("empty graph rejects neighbor queries") {
  const KnowledgeGraph g = load_triples("").graph;
  CHECK(g.entity_count() == 0);
  CHECK(g.edge_count() == 0);
  CHECK_THROWS_AS(g.neighbors(EntityId{0}), Error);
}

TEST_CASE("two fatherOf edges form a path") {
  const KnowledgeGraph g =
      load_triples("stanley\tfatherOf\tbarack_sr\nbarack_sr\tfatherOf\tobama\n").graph;
  CHECK(g.entity_count() == 3);
  const auto f = *g.find_relation("fatherOf");
  const auto s = *g.find_entity("stanley");
  const auto b = *g.find_entity("barack_sr");
  const auto o = *g.find_entity("obama");
  CHECK(has_edge(g.neighbors(s), f, b));
  CHECK(has_edge(g.neighbors(b), f, o));
  CHECK(has_edge(g.neighbors(o), g.inverse(f), b));
}

TEST_CASE("vocabulary is first-appearance order") {
  const KnowledgeGraph g = load_triples("x\tp\ty\nz\tq\tx\n").graph;
  CHECK(g.find_entity("x")->value == 0);
  CHECK(g.find_entity("y")->value == 1);
  CHECK(g.find_entity("z")->value == 2);
  CHECK(g.find_relation("q")->value == 2);
  CHECK(g.find_relation("q^-1")->value == 3);
  CHECK(*g.find_relation("SELF_LOOP") == g.self_loop());
  CHECK_FALSE(g.find_relation("nope"));
}

TEST_CASE("malformed lines report their line number") {
  try {
    load_triples("a\tr\tb\n# comment\n\nbad line\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
  CHECK_THROWS_AS(load_triples("a\tr\tb\textra\n"), ParseError);
  CHECK_THROWS_AS(load_triples("a\t\tb\n"), ParseError);
}

TEST_CASE("duplicates are counted and dropped") {
  const LoadResult r = load_triples("a\tr\tb\na\tr\tb\nb\tr\ta\n");
  CHECK(r.duplicates == 1);
  CHECK(r.graph.triples().size() == 2);
  CHECK(r.graph.edge_count() == 4);
}

TEST_CASE("reserved relation names are rejected") {
  CHECK_THROWS_AS(load_triples("a\tSELF_LOOP\tb\n"), Error);
  CHECK_THROWS_AS(load_triples("a\tr^-1\tb\n"), Error);
}

TEST_CASE("neighbors") {
  SUBCASE("entity without edges") {
    GraphBuilder b;
    b.intern_entity("lonely");
    const KnowledgeGraph g = std::move(b).build();
    CHECK(g.neighbors(EntityId{0}).empty());
  }
  SUBCASE("chain middle sees both directions") {
    const KnowledgeGraph g = chain();
    const auto r = *g.find_relation("r");
    const auto nb = g.neighbors(*g.find_entity("b"));
    REQUIRE(nb.size() == 2);
    CHECK(nb[0] == Edge{r, *g.find_entity("c")});
    CHECK(nb[1] == Edge{g.inverse(r), *g.find_entity("a")});
  }
  SUBCASE("invalid id") { CHECK_THROWS_AS(chain().neighbors(EntityId{99}), Error); }
}

TEST_CASE("inverse closure and sortedness on random graphs") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::ostringstream text;
    const std::size_t n = 2 + rng.index(10);
    const std::size_t m = rng.index(40);
    for (std::size_t i = 0; i < m; ++i) {
      text << 'e' << rng.index(n) << "\tr" << rng.index(3) << "\te" << rng.index(n) << '\n';
    }
    const KnowledgeGraph g = load_triples(text.str()).graph;
    std::size_t total = 0;
    for (std::uint32_t e = 0; e < g.entity_count(); ++e) {
      const auto nb = g.neighbors(EntityId{e});
      total += nb.size();
      CHECK(std::is_sorted(nb.begin(), nb.end()));
      CHECK(std::adjacent_find(nb.begin(), nb.end()) == nb.end());
      for (const Edge& edge : nb) {
        CHECK(has_edge(g.neighbors(edge.target), g.inverse(edge.relation), EntityId{e}));
        CHECK(g.inverse(g.inverse(edge.relation)) == edge.relation);
      }
    }
    CHECK(total == g.edge_count());
  }
}

TEST_CASE("load then write reproduces the triples") {
  const std::string text = "a\tr\tb\nb\ts\tc\nc\tr\ta\n";
  const KnowledgeGraph g = load_triples(text + "a\tr\tb\n").graph;
  std::ostringstream out;
  g.write_triples(out);
  CHECK(out.str() == text);
}

TEST_CASE("overlay add_triple") {
  const KnowledgeGraph g = load_triples("a\tr\tb\nc\tr\td\n").graph;
  const auto a = *g.find_entity("a"), b = *g.find_entity("b"), c = *g.find_entity("c");
  const auto r = *g.find_relation("r");

  SUBCASE("new triple is visible both ways") {
    GraphOverlay o(g);
    CHECK(o.add_triple({a, r, c}) == GraphOverlay::AddResult::added);
    CHECK(has_edge(o.neighbors(a), r, c));
    CHECK(has_edge(o.neighbors(c), g.inverse(r), a));
    CHECK(o.contains({c, g.inverse(r), a}));
    CHECK_FALSE(g.contains({a, r, c}));
  }
  SUBCASE("idempotent") {
    GraphOverlay o(g);
    o.add_triple({a, r, c});
    CHECK(o.add_triple({a, r, c}) == GraphOverlay::AddResult::already_present);
    CHECK(o.add_triple({c, g.inverse(r), a}) == GraphOverlay::AddResult::already_present);
    CHECK(o.size() == 1);
  }
  SUBCASE("base edge is redundant") {
    GraphOverlay o(g);
    const auto before = o.neighbors(a);
    CHECK(o.add_triple({a, r, b}) == GraphOverlay::AddResult::redundant);
    CHECK(o.size() == 0);
    CHECK(o.neighbors(a) == before);
  }
  SUBCASE("overlays are isolated") {
    GraphOverlay o1(g), o2(g);
    o1.add_triple({a, r, c});
    CHECK_FALSE(o2.contains({a, r, c}));
    CHECK(o2.neighbors(a).size() == 1);
  }
}

TEST_CASE("overlay merge keeps base order semantics") {
  Rng rng(5);
  const KnowledgeGraph g = load_triples("e0\tr0\te1\ne1\tr1\te2\ne2\tr0\te3\ne3\tr1\te0\n").graph;
  GraphOverlay o(g);
  std::set<Triple> added;
  for (int i = 0; i < 30; ++i) {
    const Triple t{EntityId{static_cast<std::uint32_t>(rng.index(4))},
                   RelationId{static_cast<std::uint32_t>(rng.index(4))},
                   EntityId{static_cast<std::uint32_t>(rng.index(4))}};
    o.add_triple(t);
    added.insert(t);
  }
  for (std::uint32_t e = 0; e < 4; ++e) {
    const auto nb = o.neighbors(EntityId{e});
    CHECK(std::is_sorted(nb.begin(), nb.end()));
    CHECK(std::adjacent_find(nb.begin(), nb.end()) == nb.end());
    for (const Edge& edge : g.neighbors(EntityId{e})) {
      CHECK(has_edge(nb, edge.relation, edge.target));
    }
    for (const Edge& edge : nb) {
      CHECK(has_edge(o.neighbors(edge.target), g.inverse(edge.relation), EntityId{e}));
    }
  }
  for (const Triple& t : added) CHECK(o.contains(t));
}
