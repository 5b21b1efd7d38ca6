#pragma once
// Dataset = base graph + query set + extraction pool, sharing one vocabulary.
//
// Files (UTF-8, TAB separated, '#' comments):
//   graph.tsv    head  relation  tail
//   pool.tsv     head  relation  tail  genuine|distractor
//   queries.tsv  source  relation  answer[,answer...]

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgcoop/kg_store.hpp"

namespace kgcoop {

struct Query {
  EntityId source;
  RelationId relation;
  std::vector<EntityId> answers;  // sorted, unique

  bool is_answer(EntityId e) const;
};

struct PoolEntry {
  Triple triple;  // forward form
  bool genuine = false;
};

// Candidate triples standing in for the text corpus, indexed by incidence.
class ExtractionPool {
 public:
  ExtractionPool() = default;
  ExtractionPool(std::vector<PoolEntry> entries, std::size_t entity_count);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const PoolEntry& operator[](std::size_t i) const { return entries_.at(i); }
  std::span<const PoolEntry> entries() const { return entries_; }

  // Indices of entries whose head or tail is e, ascending.
  std::span<const std::size_t> incident(EntityId e) const;

 private:
  std::vector<PoolEntry> entries_;
  std::vector<std::vector<std::size_t>> incident_;
};

struct Dataset {
  KnowledgeGraph graph;
  ExtractionPool pool;
  std::vector<Query> queries;
  // SHA-256 over the canonical graph, pool and query text.
  std::string id;
};

inline constexpr std::string_view kGraphFile = "graph.tsv";
inline constexpr std::string_view kPoolFile = "pool.tsv";
inline constexpr std::string_view kQueryFile = "queries.tsv";

// Name-level records, the form in which datasets are produced and parsed.
struct NamedTriple {
  std::string head, relation, tail;
};
struct NamedPoolEntry {
  NamedTriple triple;
  bool genuine = false;
};
struct NamedQuery {
  std::string source, relation;
  std::vector<std::string> answers;
};

// Vocabulary order: graph file, then pool, then queries (first appearance).
Dataset build_dataset(std::span<const NamedTriple> graph,
                      std::span<const NamedPoolEntry> pool,
                      std::span<const NamedQuery> queries);

std::vector<NamedTriple> parse_graph_file(std::istream& in);
std::vector<NamedPoolEntry> parse_pool_file(std::istream& in);
std::vector<NamedQuery> parse_query_file(std::istream& in);

void write_pool(std::ostream& out, const KnowledgeGraph& graph, const ExtractionPool& pool);
void write_queries(std::ostream& out, const KnowledgeGraph& graph,
                   std::span<const Query> queries);

std::string graph_text(const Dataset& d);
std::string pool_text(const Dataset& d);
std::string query_text(const Dataset& d);

void save_dataset(const Dataset& d, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

// Pool file alone, resolved against an existing dataset's vocabulary.
ExtractionPool load_pool(const std::filesystem::path& file, const KnowledgeGraph& graph);

}  // namespace kgcoop
