#include "kgcoop/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "kgcoop/error.hpp"
#include "kgcoop/hashing.hpp"

namespace kgcoop {

namespace {

// Calls fn(fields, line_no) for each non-comment, non-blank line.
template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    fn(split_tabs(line), line_no);
  }
}

std::vector<std::string> split_commas(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(',', start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  return in;
}

}  // namespace

bool Query::is_answer(EntityId e) const {
  return std::binary_search(answers.begin(), answers.end(), e);
}

ExtractionPool::ExtractionPool(std::vector<PoolEntry> entries, std::size_t entity_count)
    : entries_(std::move(entries)), incident_(entity_count) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const Triple& t = entries_[i].triple;
    if (t.head.value >= entity_count || t.tail.value >= entity_count) {
      throw Error("pool entry references an unknown entity");
    }
    incident_[t.head.value].push_back(i);
    if (t.tail != t.head) incident_[t.tail.value].push_back(i);
  }
}

std::span<const std::size_t> ExtractionPool::incident(EntityId e) const {
  if (e.value >= incident_.size()) return {};
  return incident_[e.value];
}

Dataset build_dataset(std::span<const NamedTriple> graph,
                      std::span<const NamedPoolEntry> pool,
                      std::span<const NamedQuery> queries) {
  GraphBuilder builder;
  for (const auto& t : graph) builder.add(t.head, t.relation, t.tail);

  std::vector<PoolEntry> entries;
  entries.reserve(pool.size());
  for (const auto& p : pool) {
    const EntityId h = builder.intern_entity(p.triple.head);
    const RelationId r = builder.intern_relation(p.triple.relation);
    const EntityId t = builder.intern_entity(p.triple.tail);
    entries.push_back(PoolEntry{Triple{h, r, t}, p.genuine});
  }

  std::vector<Query> resolved;
  resolved.reserve(queries.size());
  for (const auto& q : queries) {
    Query query;
    query.source = builder.intern_entity(q.source);
    query.relation = builder.intern_relation(q.relation);
    for (const auto& a : q.answers) query.answers.push_back(builder.intern_entity(a));
    std::sort(query.answers.begin(), query.answers.end());
    query.answers.erase(std::unique(query.answers.begin(), query.answers.end()),
                        query.answers.end());
    if (query.answers.empty()) throw Error("query without answers");
    resolved.push_back(std::move(query));
  }

  Dataset d;
  d.graph = std::move(builder).build();
  d.pool = ExtractionPool(std::move(entries), d.graph.entity_count());
  d.queries = std::move(resolved);
  d.id = sha256_hex(graph_text(d) + '\x1f' + pool_text(d) + '\x1f' + query_text(d));
  return d;
}

std::vector<NamedTriple> parse_graph_file(std::istream& in) {
  std::vector<NamedTriple> out;
  for_each_record(in, [&](const std::vector<std::string_view>& f, std::size_t line) {
    if (f.size() != 3) throw ParseError("graph line needs 3 fields", line);
    out.push_back({std::string(f[0]), std::string(f[1]), std::string(f[2])});
  });
  return out;
}

std::vector<NamedPoolEntry> parse_pool_file(std::istream& in) {
  std::vector<NamedPoolEntry> out;
  for_each_record(in, [&](const std::vector<std::string_view>& f, std::size_t line) {
    if (f.size() != 3 && f.size() != 4) throw ParseError("pool line needs 3 or 4 fields", line);
    bool genuine = false;
    if (f.size() == 4) {
      if (f[3] == "genuine") {
        genuine = true;
      } else if (f[3] != "distractor") {
        throw ParseError("pool label must be genuine or distractor", line);
      }
    }
    out.push_back({{std::string(f[0]), std::string(f[1]), std::string(f[2])}, genuine});
  });
  return out;
}

std::vector<NamedQuery> parse_query_file(std::istream& in) {
  std::vector<NamedQuery> out;
  for_each_record(in, [&](const std::vector<std::string_view>& f, std::size_t line) {
    if (f.size() != 3) throw ParseError("query line needs 3 fields", line);
    NamedQuery q{std::string(f[0]), std::string(f[1]), split_commas(f[2])};
    for (const auto& a : q.answers) {
      if (a.empty()) throw ParseError("empty answer name", line);
    }
    out.push_back(std::move(q));
  });
  return out;
}

void write_pool(std::ostream& out, const KnowledgeGraph& graph, const ExtractionPool& pool) {
  for (const PoolEntry& p : pool.entries()) {
    out << graph.entity_name(p.triple.head) << '\t' << graph.relation_name(p.triple.relation)
        << '\t' << graph.entity_name(p.triple.tail) << '\t'
        << (p.genuine ? "genuine" : "distractor") << '\n';
  }
}

void write_queries(std::ostream& out, const KnowledgeGraph& graph,
                   std::span<const Query> queries) {
  for (const Query& q : queries) {
    out << graph.entity_name(q.source) << '\t' << graph.relation_name(q.relation) << '\t';
    for (std::size_t i = 0; i < q.answers.size(); ++i) {
      if (i) out << ',';
      out << graph.entity_name(q.answers[i]);
    }
    out << '\n';
  }
}

std::string graph_text(const Dataset& d) {
  std::ostringstream out;
  d.graph.write_triples(out);
  return out.str();
}

std::string pool_text(const Dataset& d) {
  std::ostringstream out;
  write_pool(out, d.graph, d.pool);
  return out.str();
}

std::string query_text(const Dataset& d) {
  std::ostringstream out;
  write_queries(out, d.graph, d.queries);
  return out.str();
}

void save_dataset(const Dataset& d, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  auto write = [&](std::string_view name, const std::string& text) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed: " + path.string());
  };
  write(kGraphFile, graph_text(d));
  write(kPoolFile, pool_text(d));
  write(kQueryFile, query_text(d));
}

Dataset load_dataset(const std::filesystem::path& dir) {
  auto graph_in = open_input(dir / kGraphFile);
  auto pool_in = open_input(dir / kPoolFile);
  auto query_in = open_input(dir / kQueryFile);
  const auto graph = parse_graph_file(graph_in);
  const auto pool = parse_pool_file(pool_in);
  const auto queries = parse_query_file(query_in);
  return build_dataset(graph, pool, queries);
}

ExtractionPool load_pool(const std::filesystem::path& file, const KnowledgeGraph& graph) {
  auto in = open_input(file);
  std::vector<PoolEntry> entries;
  for (const auto& p : parse_pool_file(in)) {
    const auto h = graph.find_entity(p.triple.head);
    const auto r = graph.find_relation(p.triple.relation);
    const auto t = graph.find_entity(p.triple.tail);
    if (!h || !r || !t || graph.is_self_loop(*r)) {
      throw Error("pool triple outside the dataset vocabulary: " + p.triple.head + " " +
                  p.triple.relation + " " + p.triple.tail);
    }
    Triple triple{*h, *r, *t};
    if (r->is_inverse()) triple = Triple{*t, graph.inverse(*r), *h};
    entries.push_back(PoolEntry{triple, p.genuine});
  }
  return ExtractionPool(std::move(entries), graph.entity_count());
}

}  // namespace kgcoop
