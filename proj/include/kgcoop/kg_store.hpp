#pragma once
// Knowledge graph storage.
//
// Relation ids encode direction by parity: a relation name interned k-th gets
// forward id 2k and inverse id 2k+1. After the named relations, one extra id
// (2n) is reserved for SELF_LOOP, which is its own inverse. Every stored edge
// (h, r, t) has its mirror (t, r^-1, h) so walkers can move backwards.

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kgcoop {

struct EntityId {
  std::uint32_t value = 0;
  friend auto operator<=>(EntityId, EntityId) = default;
};

struct RelationId {
  std::uint32_t value = 0;
  bool is_inverse() const { return (value & 1U) != 0; }
  friend auto operator<=>(RelationId, RelationId) = default;
};

struct Triple {
  EntityId head;
  RelationId relation;
  EntityId tail;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

// Out-edge as seen from its source entity.
struct Edge {
  RelationId relation;
  EntityId target;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Bidirectional string <-> dense index map, first-appearance order.
class Vocabulary {
 public:
  std::uint32_t intern(std::string_view name);
  std::optional<std::uint32_t> find(std::string_view name) const;
  const std::string& name(std::uint32_t index) const { return names_.at(index); }
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

inline constexpr std::string_view kSelfLoopName = "SELF_LOOP";
inline constexpr std::string_view kInverseSuffix = "^-1";

class KnowledgeGraph;

// Accumulates names and forward triples; build() materializes inverse edges
// and the SELF_LOOP relation. Names may be interned without edges so that
// pool and query files share one vocabulary with the graph.
class GraphBuilder {
 public:
  EntityId intern_entity(std::string_view name);
  // Forward id of a named relation. SELF_LOOP and names ending in "^-1" are
  // reserved and rejected.
  RelationId intern_relation(std::string_view name);

  // Returns false when the triple was already added.
  bool add(const Triple& t);
  bool add(std::string_view head, std::string_view relation, std::string_view tail);

  std::size_t entity_count() const { return entities_.size(); }
  std::size_t relation_name_count() const { return relations_.size(); }

  KnowledgeGraph build() &&;

 private:
  Vocabulary entities_;
  Vocabulary relations_;
  std::vector<Triple> triples_;
  std::set<Triple> seen_;
};

// Immutable base graph. Safe to share across concurrent episodes.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  std::size_t entity_count() const { return entities_.size(); }
  // Forward + inverse + SELF_LOOP.
  std::size_t relation_count() const { return 2 * relations_.size() + 1; }
  std::size_t relation_name_count() const { return relations_.size(); }
  // Number of directed edges including inverses.
  std::size_t edge_count() const { return edge_count_; }

  RelationId self_loop() const {
    return RelationId{static_cast<std::uint32_t>(2 * relations_.size())};
  }
  bool is_self_loop(RelationId r) const { return r == self_loop(); }
  RelationId inverse(RelationId r) const;

  bool valid(EntityId e) const { return e.value < entities_.size(); }
  bool valid(RelationId r) const { return r.value < relation_count(); }
  bool valid(const Triple& t) const {
    return valid(t.head) && valid(t.relation) && valid(t.tail) && !is_self_loop(t.relation);
  }

  // Sorted by (relation, target); excludes the self-loop. Throws on invalid id.
  std::span<const Edge> neighbors(EntityId e) const;
  bool contains(const Triple& t) const;

  std::optional<EntityId> find_entity(std::string_view name) const;
  // Resolves forward names, "name^-1" and SELF_LOOP.
  std::optional<RelationId> find_relation(std::string_view name) const;
  const std::string& entity_name(EntityId e) const;
  std::string relation_name(RelationId r) const;
  // Name of the forward relation behind r (no inverse suffix).
  const std::string& base_relation_name(RelationId r) const;

  // Forward triples in load order, duplicates removed.
  std::span<const Triple> triples() const { return triples_; }

  // One "head TAB relation TAB tail" line per forward triple.
  void write_triples(std::ostream& out) const;

 private:
  friend class GraphBuilder;

  Vocabulary entities_;
  Vocabulary relations_;
  std::vector<std::vector<Edge>> adjacency_;
  std::vector<Triple> triples_;
  std::size_t edge_count_ = 0;
};

struct LoadResult {
  KnowledgeGraph graph;
  std::size_t duplicates = 0;
};

// Parses "head TAB relation TAB tail" lines. Blank lines and lines starting
// with '#' are skipped. Throws ParseError with the 1-based line number.
LoadResult load_triples(std::istream& in);
LoadResult load_triples(std::string_view text);

// Splits a line on TAB. Shared by the dataset file readers.
std::vector<std::string_view> split_tabs(std::string_view line);

// Per-episode copy-on-write view: base edges plus injected triples.
class GraphOverlay {
 public:
  enum class AddResult { added, already_present, redundant };

  explicit GraphOverlay(const KnowledgeGraph& base) : base_(&base) {}

  // Adds t and its inverse. redundant: t is already a base edge (nothing is
  // stored). already_present: t or its inverse was added before.
  AddResult add_triple(const Triple& t);

  // Base edges merged with overlay edges, sorted and deduplicated.
  std::vector<Edge> neighbors(EntityId e) const;
  bool contains(const Triple& t) const;

  // Triples added to the overlay (not counting redundant ones).
  std::size_t size() const { return added_.size(); }
  std::span<const Triple> added() const { return added_; }
  const KnowledgeGraph& base() const { return *base_; }

 private:
  const KnowledgeGraph* base_;
  std::vector<Triple> added_;
  std::map<std::uint32_t, std::vector<Edge>> edges_;
};

}  // namespace kgcoop
