#include "kgcoop/embed.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "kgcoop/error.hpp"
#include "kgcoop/random.hpp"
#include "kgcoop/text_format.hpp"

namespace kgcoop {

namespace {

constexpr std::string_view kMagic = "kgcoop-embeddings";

void normalize(std::span<double> v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm > 0.0) {
    for (double& x : v) x /= norm;
  }
}

// h + r - t into out; returns its norm.
double residual(const EmbeddingTable& table, const Triple& t, std::vector<double>& out) {
  const auto h = table.entity(t.head);
  const auto r = table.relation_row(t.relation.value / 2);
  const auto tail = table.entity(t.tail);
  out.resize(h.size());
  double sq = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    out[i] = h[i] + r[i] - tail[i];
    sq += out[i] * out[i];
  }
  return std::sqrt(sq);
}

void require_forward(const Triple& t) {
  if (t.relation.is_inverse()) throw Error("translational loss expects forward triples");
}

}  // namespace

EmbeddingTable::EmbeddingTable(const KnowledgeGraph& graph, std::size_t dimension)
    : dim_(dimension) {
  if (dimension == 0) throw Error("embedding dimension must be positive");
  entity_names_.reserve(graph.entity_count());
  for (std::uint32_t i = 0; i < graph.entity_count(); ++i) {
    entity_names_.push_back(graph.entity_name(EntityId{i}));
  }
  for (std::uint32_t k = 0; k < graph.relation_name_count(); ++k) {
    relation_names_.push_back(graph.base_relation_name(RelationId{2 * k}));
  }
  self_loop_ = graph.self_loop().value;
  params_.assign((entity_names_.size() + relation_names_.size()) * dim_, 0.0);
  trained_.assign(relation_names_.size(), false);
}

std::span<const double> EmbeddingTable::entity(EntityId e) const {
  if (e.value >= entity_names_.size()) {
    throw Error("no embedding for entity id " + std::to_string(e.value));
  }
  return std::span<const double>(params_).subspan(e.value * dim_, dim_);
}

std::span<double> EmbeddingTable::entity(EntityId e) {
  if (e.value >= entity_names_.size()) {
    throw Error("no embedding for entity id " + std::to_string(e.value));
  }
  return std::span<double>(params_).subspan(e.value * dim_, dim_);
}

std::span<const double> EmbeddingTable::relation_row(std::size_t k) const {
  if (k >= relation_names_.size()) throw Error("no relation row " + std::to_string(k));
  return std::span<const double>(params_).subspan((entity_names_.size() + k) * dim_, dim_);
}

std::span<double> EmbeddingTable::relation_row(std::size_t k) {
  if (k >= relation_names_.size()) throw Error("no relation row " + std::to_string(k));
  return std::span<double>(params_).subspan((entity_names_.size() + k) * dim_, dim_);
}

std::size_t EmbeddingTable::trained_count() const {
  return static_cast<std::size_t>(std::count(trained_.begin(), trained_.end(), true));
}

std::vector<double> EmbeddingTable::relation(RelationId r) const {
  if (r.value == self_loop_) return std::vector<double>(dim_, 0.0);
  const std::size_t k = r.value / 2;
  if (k >= relation_names_.size()) {
    throw Error("no embedding for relation id " + std::to_string(r.value));
  }
  std::vector<double> v;
  if (trained_[k]) {
    const auto row = relation_row(k);
    v.assign(row.begin(), row.end());
  } else {
    v = zero_shot_mean();
  }
  if (r.is_inverse()) {
    for (double& x : v) x = -x;
  }
  return v;
}

std::vector<double> EmbeddingTable::zero_shot_mean() const {
  std::vector<double> mean(dim_, 0.0);
  std::size_t count = 0;
  for (std::size_t k = 0; k < relation_names_.size(); ++k) {
    if (!trained_[k]) continue;
    const auto row = relation_row(k);
    for (std::size_t i = 0; i < dim_; ++i) mean[i] += row[i];
    ++count;
  }
  if (count == 0) throw Error("zero-shot relation needs at least one trained relation");
  for (double& x : mean) x /= static_cast<double>(count);
  return mean;
}

std::span<const double> EmbeddingTable::zero_shot_relation(std::string_view name) {
  for (std::size_t k = 0; k < relation_names_.size(); ++k) {
    if (relation_names_[k] == name && trained_[k]) return relation_row(k);
  }
  if (auto it = zero_shot_.find(name); it != zero_shot_.end()) return it->second;
  auto [it, inserted] = zero_shot_.emplace(std::string(name), zero_shot_mean());
  return it->second;
}

void EmbeddingTable::check_matches(const KnowledgeGraph& graph) const {
  if (graph.entity_count() != entity_names_.size() ||
      graph.relation_name_count() != relation_names_.size()) {
    throw Error("embedding table does not match the graph vocabulary sizes");
  }
  for (std::uint32_t i = 0; i < entity_names_.size(); ++i) {
    if (graph.entity_name(EntityId{i}) != entity_names_[i]) {
      throw Error("embedding entity " + std::to_string(i) + " is '" + entity_names_[i] +
                  "', graph has '" + graph.entity_name(EntityId{i}) + "'");
    }
  }
  for (std::uint32_t k = 0; k < relation_names_.size(); ++k) {
    if (graph.base_relation_name(RelationId{2 * k}) != relation_names_[k]) {
      throw Error("embedding relation " + std::to_string(k) + " does not match the graph");
    }
  }
}

double translational_distance(const EmbeddingTable& table, const Triple& t) {
  require_forward(t);
  std::vector<double> r;
  return residual(table, t, r);
}

double translational_score(const EmbeddingTable& table, const Triple& t) {
  return -translational_distance(table, t);
}

double margin_ranking_loss(const EmbeddingTable& table, std::span<const TrainingPair> pairs,
                           double margin, std::vector<double>* gradient) {
  const std::size_t d = table.dimension();
  const std::size_t relation_base = table.entity_count() * d;
  if (gradient) gradient->assign(table.parameters().size(), 0.0);
  double loss = 0.0;
  std::vector<double> pos, neg;
  for (const auto& pair : pairs) {
    require_forward(pair.positive);
    require_forward(pair.negative);
    const double dp = residual(table, pair.positive, pos);
    const double dn = residual(table, pair.negative, neg);
    const double l = margin + dp - dn;
    if (l <= 0.0) continue;
    loss += l;
    if (!gradient) continue;
    auto& g = *gradient;
    auto accumulate = [&](const Triple& t, const std::vector<double>& res, double norm,
                          double sign) {
      if (norm == 0.0) return;
      for (std::size_t i = 0; i < d; ++i) {
        const double u = sign * res[i] / norm;
        g[t.head.value * d + i] += u;
        g[relation_base + (t.relation.value / 2) * d + i] += u;
        g[t.tail.value * d + i] -= u;
      }
    };
    accumulate(pair.positive, pos, dp, 1.0);
    accumulate(pair.negative, neg, dn, -1.0);
  }
  return loss;
}

EmbeddingTable initial_embeddings(const KnowledgeGraph& graph, std::size_t dimension,
                                  std::uint64_t seed) {
  EmbeddingTable table(graph, dimension);
  table.set_seed(seed);
  Rng rng(seed);
  const double bound = 6.0 / std::sqrt(static_cast<double>(dimension));
  for (double& x : table.parameters()) x = rng.uniform(-bound, bound);
  for (std::uint32_t i = 0; i < graph.entity_count(); ++i) normalize(table.entity(EntityId{i}));
  for (std::size_t k = 0; k < graph.relation_name_count(); ++k) normalize(table.relation_row(k));
  for (const Triple& t : graph.triples()) table.set_trained(t.relation.value / 2, true);
  return table;
}

EmbeddingTrainResult train_embeddings(const KnowledgeGraph& graph,
                                      const EmbeddingConfig& config) {
  if (config.dimension == 0) throw Error("embedding dimension must be positive");
  if (graph.entity_count() == 0 || graph.triples().empty()) {
    throw Error("cannot train embeddings on an empty graph");
  }
  if (!(config.learning_rate > 0.0)) throw Error("embedding learning rate must be positive");

  EmbeddingTrainResult result{initial_embeddings(graph, config.dimension, config.seed), {}};
  EmbeddingTable& table = result.table;
  // Separate stream so epochs=0 leaves the initialization stream untouched.
  Rng rng(config.seed ^ 0x5deece66dULL);

  const std::size_t n = graph.entity_count();
  std::vector<Triple> order(graph.triples().begin(), graph.triples().end());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::uint32_t i = 0; i < n; ++i) normalize(table.entity(EntityId{i}));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    double epoch_loss = 0.0;
    for (const Triple& pos : order) {
      for (std::size_t k = 0; k < config.negatives; ++k) {
        Triple neg = pos;
        for (int attempt = 0; attempt < 8; ++attempt) {
          neg = pos;
          const EntityId e{static_cast<std::uint32_t>(rng.index(n))};
          if (rng.uniform() < 0.5) {
            neg.head = e;
          } else {
            neg.tail = e;
          }
          if (!graph.contains(neg)) break;
        }
        if (graph.contains(neg)) continue;
        // Sparse SGD step on the five touched rows.
        std::vector<double> rp, rn;
        const double dp = residual(table, pos, rp);
        const double dn = residual(table, neg, rn);
        const double l = config.margin + dp - dn;
        if (l <= 0.0) continue;
        epoch_loss += l;
        const std::size_t d = config.dimension;
        auto step = [&](const Triple& t, const std::vector<double>& res, double norm,
                        double sign) {
          if (norm == 0.0) return;
          auto h = table.entity(t.head);
          auto r = table.relation_row(t.relation.value / 2);
          auto tail = table.entity(t.tail);
          for (std::size_t i = 0; i < d; ++i) {
            const double u = config.learning_rate * sign * res[i] / norm;
            h[i] -= u;
            r[i] -= u;
            tail[i] += u;
          }
        };
        step(pos, rp, dp, 1.0);
        step(neg, rn, dn, -1.0);
      }
    }
    result.epoch_loss.push_back(epoch_loss);
  }
  for (double x : table.parameters()) {
    if (!std::isfinite(x)) throw Error("embedding training diverged");
  }
  return result;
}

double similarity(const EmbeddingTable& table, EntityId a, EntityId b) {
  const auto va = table.entity(a);
  const auto vb = table.entity(b);
  double sq = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) sq += (va[i] - vb[i]) * (va[i] - vb[i]);
  return 1.0 / (1.0 + std::sqrt(sq));
}

void write_embeddings(std::ostream& out, const EmbeddingTable& table) {
  out << kMagic << "\t1\n"
      << "dimension\t" << table.dimension() << '\n'
      << "entities\t" << table.entity_count() << '\n'
      << "relations\t" << table.relation_name_count() << '\n'
      << "scorer\t" << table.scorer() << '\n'
      << "seed\t" << table.seed() << '\n';
  auto row = [&](std::span<const double> v) {
    for (double x : v) out << '\t' << format_double(x);
    out << '\n';
  };
  for (std::uint32_t i = 0; i < table.entity_count(); ++i) {
    out << "E\t" << table.entity_name(i);
    row(table.entity(EntityId{i}));
  }
  for (std::size_t k = 0; k < table.relation_name_count(); ++k) {
    out << "R\t" << table.relation_name(k) << '\t' << (table.trained(k) ? 1 : 0);
    row(table.relation_row(k));
  }
}

EmbeddingTable read_embeddings(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_fields = [&]() {
    if (!std::getline(in, line)) throw ParseError("unexpected end of embedding file", line_no);
    ++line_no;
    return split_tabs(line);
  };
  auto header = [&](std::string_view key) {
    auto f = next_fields();
    if (f.size() != 2 || f[0] != key) {
      throw ParseError("expected header '" + std::string(key) + "'", line_no);
    }
    return std::string(f[1]);
  };
  if (header(kMagic) != "1") throw ParseError("unsupported embedding file version", line_no);

  EmbeddingTable table;
  try {
    table.dim_ = parse_uint(header("dimension"));
    const std::size_t entities = parse_uint(header("entities"));
    const std::size_t relations = parse_uint(header("relations"));
    table.scorer_ = header("scorer");
    table.seed_ = parse_uint(header("seed"));
    if (table.dim_ == 0) throw Error("dimension must be positive");
    table.params_.reserve((entities + relations) * table.dim_);
    for (std::size_t i = 0; i < entities; ++i) {
      auto f = next_fields();
      if (f.size() != 2 + table.dim_ || f[0] != "E") throw Error("malformed entity row");
      table.entity_names_.emplace_back(f[1]);
      for (std::size_t j = 0; j < table.dim_; ++j) table.params_.push_back(parse_double(f[2 + j]));
    }
    for (std::size_t k = 0; k < relations; ++k) {
      auto f = next_fields();
      if (f.size() != 3 + table.dim_ || f[0] != "R") throw Error("malformed relation row");
      table.relation_names_.emplace_back(f[1]);
      table.trained_.push_back(f[2] == "1");
      for (std::size_t j = 0; j < table.dim_; ++j) table.params_.push_back(parse_double(f[3 + j]));
    }
    table.self_loop_ = static_cast<std::uint32_t>(2 * relations);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(e.what(), line_no);
  }
  return table;
}

void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_embeddings(out, table);
  if (!out) throw Error("write failed: " + path.string());
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  return read_embeddings(in);
}

}  // namespace kgcoop
