#include "kgcoop/kg_store.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "kgcoop/error.hpp"

namespace kgcoop {

namespace {

Triple forward_form(const Triple& t) {
  if (!t.relation.is_inverse()) return t;
  return Triple{t.tail, RelationId{t.relation.value - 1}, t.head};
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::uint32_t Vocabulary::intern(std::string_view name) {
  if (auto it = index_.find(std::string(name)); it != index_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(names_.size());
  names_.emplace_back(name);
  index_.emplace(names_.back(), id);
  return id;
}

std::optional<std::uint32_t> Vocabulary::find(std::string_view name) const {
  if (auto it = index_.find(std::string(name)); it != index_.end()) return it->second;
  return std::nullopt;
}

EntityId GraphBuilder::intern_entity(std::string_view name) {
  if (name.empty()) throw Error("empty entity name");
  return EntityId{entities_.intern(name)};
}

RelationId GraphBuilder::intern_relation(std::string_view name) {
  if (name.empty()) throw Error("empty relation name");
  if (name == kSelfLoopName || ends_with(name, kInverseSuffix)) {
    throw Error("reserved relation name: " + std::string(name));
  }
  return RelationId{2 * relations_.intern(name)};
}

bool GraphBuilder::add(const Triple& t) {
  const Triple f = forward_form(t);
  if (f.head.value >= entities_.size() || f.tail.value >= entities_.size() ||
      f.relation.value / 2 >= relations_.size()) {
    throw Error("GraphBuilder::add: id outside the vocabulary");
  }
  if (!seen_.insert(f).second) return false;
  triples_.push_back(f);
  return true;
}

bool GraphBuilder::add(std::string_view head, std::string_view relation,
                       std::string_view tail) {
  const EntityId h = intern_entity(head);
  const RelationId r = intern_relation(relation);
  const EntityId t = intern_entity(tail);
  return add(Triple{h, r, t});
}

KnowledgeGraph GraphBuilder::build() && {
  KnowledgeGraph g;
  g.entities_ = std::move(entities_);
  g.relations_ = std::move(relations_);
  g.triples_ = std::move(triples_);
  g.adjacency_.assign(g.entities_.size(), {});
  for (const Triple& t : g.triples_) {
    g.adjacency_[t.head.value].push_back(Edge{t.relation, t.tail});
    g.adjacency_[t.tail.value].push_back(Edge{RelationId{t.relation.value + 1}, t.head});
  }
  for (auto& edges : g.adjacency_) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    g.edge_count_ += edges.size();
  }
  seen_.clear();
  return g;
}

RelationId KnowledgeGraph::inverse(RelationId r) const {
  if (!valid(r)) throw Error("invalid relation id " + std::to_string(r.value));
  if (is_self_loop(r)) return r;
  return RelationId{r.value ^ 1U};
}

std::span<const Edge> KnowledgeGraph::neighbors(EntityId e) const {
  if (!valid(e)) throw Error("invalid entity id " + std::to_string(e.value));
  return adjacency_[e.value];
}

bool KnowledgeGraph::contains(const Triple& t) const {
  if (!valid(t)) return false;
  const auto edges = neighbors(t.head);
  return std::binary_search(edges.begin(), edges.end(), Edge{t.relation, t.tail});
}

std::optional<EntityId> KnowledgeGraph::find_entity(std::string_view name) const {
  if (auto id = entities_.find(name)) return EntityId{*id};
  return std::nullopt;
}

std::optional<RelationId> KnowledgeGraph::find_relation(std::string_view name) const {
  if (name == kSelfLoopName) return self_loop();
  if (ends_with(name, kInverseSuffix)) {
    if (auto id = relations_.find(name.substr(0, name.size() - kInverseSuffix.size()))) {
      return RelationId{2 * *id + 1};
    }
    return std::nullopt;
  }
  if (auto id = relations_.find(name)) return RelationId{2 * *id};
  return std::nullopt;
}

const std::string& KnowledgeGraph::entity_name(EntityId e) const {
  if (!valid(e)) throw Error("invalid entity id " + std::to_string(e.value));
  return entities_.name(e.value);
}

std::string KnowledgeGraph::relation_name(RelationId r) const {
  if (!valid(r)) throw Error("invalid relation id " + std::to_string(r.value));
  if (is_self_loop(r)) return std::string(kSelfLoopName);
  std::string name = relations_.name(r.value / 2);
  if (r.is_inverse()) name += kInverseSuffix;
  return name;
}

const std::string& KnowledgeGraph::base_relation_name(RelationId r) const {
  if (!valid(r) || is_self_loop(r)) {
    throw Error("no named relation for id " + std::to_string(r.value));
  }
  return relations_.name(r.value / 2);
}

void KnowledgeGraph::write_triples(std::ostream& out) const {
  for (const Triple& t : triples_) {
    out << entity_name(t.head) << '\t' << relation_name(t.relation) << '\t'
        << entity_name(t.tail) << '\n';
  }
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

LoadResult load_triples(std::istream& in) {
  GraphBuilder builder;
  LoadResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 3) {
      throw ParseError("expected 3 tab-separated fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    try {
      if (!builder.add(fields[0], fields[1], fields[2])) ++result.duplicates;
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  result.graph = std::move(builder).build();
  return result;
}

LoadResult load_triples(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load_triples(in);
}

GraphOverlay::AddResult GraphOverlay::add_triple(const Triple& t) {
  if (!base_->valid(t)) throw Error("GraphOverlay::add_triple: invalid triple");
  if (base_->contains(t)) return AddResult::redundant;
  if (contains(t)) return AddResult::already_present;
  added_.push_back(t);
  auto insert_sorted = [](std::vector<Edge>& edges, Edge e) {
    edges.insert(std::lower_bound(edges.begin(), edges.end(), e), e);
  };
  insert_sorted(edges_[t.head.value], Edge{t.relation, t.tail});
  const Edge mirror{base_->inverse(t.relation), t.head};
  auto& tail_edges = edges_[t.tail.value];
  if (!std::binary_search(tail_edges.begin(), tail_edges.end(), mirror)) {
    insert_sorted(tail_edges, mirror);
  }
  return AddResult::added;
}

std::vector<Edge> GraphOverlay::neighbors(EntityId e) const {
  const auto base_edges = base_->neighbors(e);
  const auto it = edges_.find(e.value);
  if (it == edges_.end()) return {base_edges.begin(), base_edges.end()};
  std::vector<Edge> merged;
  merged.reserve(base_edges.size() + it->second.size());
  std::merge(base_edges.begin(), base_edges.end(), it->second.begin(), it->second.end(),
             std::back_inserter(merged));
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  return merged;
}

bool GraphOverlay::contains(const Triple& t) const {
  if (base_->contains(t)) return true;
  const auto it = edges_.find(t.head.value);
  if (it == edges_.end()) return false;
  return std::binary_search(it->second.begin(), it->second.end(), Edge{t.relation, t.tail});
}

}  // namespace kgcoop
