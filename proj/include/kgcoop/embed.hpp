#pragma once
// Translational entity/relation embeddings (h + r ~ t).
//
// Only forward relations own parameters. Under the translational model the
// inverse of r is -r and SELF_LOOP is the zero vector, so those are derived.
// A forward relation with no base-graph edges has no trained vector and falls
// back to the zero-shot vector: the mean of the trained relation vectors.
// Tables are frozen after training; injected triples reuse existing vectors.

#include <cstdint>
#include <iosfwd>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgcoop/kg_store.hpp"

namespace kgcoop {

inline constexpr std::string_view kTranslationalScorer = "translational";

struct EmbeddingConfig {
  std::size_t dimension = 16;
  std::size_t epochs = 100;
  double learning_rate = 0.01;
  std::size_t negatives = 4;
  double margin = 1.0;
  std::uint64_t seed = 0;
};

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  // Vectors left at zero, no relation marked trained.
  EmbeddingTable(const KnowledgeGraph& graph, std::size_t dimension);

  std::size_t dimension() const { return dim_; }
  std::size_t entity_count() const { return entity_names_.size(); }
  std::size_t relation_name_count() const { return relation_names_.size(); }
  const std::string& scorer() const { return scorer_; }
  std::uint64_t seed() const { return seed_; }
  void set_seed(std::uint64_t seed) { seed_ = seed; }

  std::span<const double> entity(EntityId e) const;
  std::span<double> entity(EntityId e);
  // Vector of any graph relation id: trained forward vector, its negation for
  // inverses, zero for SELF_LOOP, zero-shot mean for untrained relations.
  std::vector<double> relation(RelationId r) const;
  // Parameter row of forward relation name index k (relation id 2k).
  std::span<const double> relation_row(std::size_t k) const;
  std::span<double> relation_row(std::size_t k);

  bool trained(std::size_t k) const { return trained_.at(k); }
  void set_trained(std::size_t k, bool value) { trained_.at(k) = value; }
  std::size_t trained_count() const;

  // Mean of the trained forward relation vectors. Throws when there are none.
  std::vector<double> zero_shot_mean() const;
  // Vector for a relation name. A trained known name returns its own vector;
  // anything else gets the zero-shot mean, registered under the name so later
  // calls return the same vector.
  std::span<const double> zero_shot_relation(std::string_view name);

  // All parameters, entities first then relation rows.
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  const std::string& entity_name(std::size_t i) const { return entity_names_.at(i); }
  const std::string& relation_name(std::size_t k) const { return relation_names_.at(k); }

  // Throws if names or counts differ from the graph's vocabulary.
  void check_matches(const KnowledgeGraph& graph) const;

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;

 private:
  friend EmbeddingTable read_embeddings(std::istream& in);

  std::size_t dim_ = 0;
  std::string scorer_{kTranslationalScorer};
  std::uint64_t seed_ = 0;
  std::uint32_t self_loop_ = 0;
  std::vector<std::string> entity_names_;
  std::vector<std::string> relation_names_;
  std::vector<double> params_;
  std::vector<bool> trained_;
  std::map<std::string, std::vector<double>, std::less<>> zero_shot_;
};

// Positive triple paired with one corrupted copy.
struct TrainingPair {
  Triple positive;
  Triple negative;
};

// Distance ||h + r - t||_2 of a forward triple.
double translational_distance(const EmbeddingTable& table, const Triple& t);
// Higher is more plausible: the negated distance.
double translational_score(const EmbeddingTable& table, const Triple& t);

// Sum over pairs of max(0, margin + d(positive) - d(negative)). When gradient
// is non-null it receives d(loss)/d(parameters) (same layout as parameters()).
double margin_ranking_loss(const EmbeddingTable& table, std::span<const TrainingPair> pairs,
                           double margin, std::vector<double>* gradient);

// Seeded uniform(-6/sqrt(d), 6/sqrt(d)) start with unit-norm entities.
EmbeddingTable initial_embeddings(const KnowledgeGraph& graph, std::size_t dimension,
                                  std::uint64_t seed);

struct EmbeddingTrainResult {
  EmbeddingTable table;
  std::vector<double> epoch_loss;
};

// SGD on the margin ranking loss with head/tail corruption. Relations seen
// in base edges are marked trained.
EmbeddingTrainResult train_embeddings(const KnowledgeGraph& graph, const EmbeddingConfig& config);

// 1 / (1 + euclidean distance); symmetric, 1 on identical vectors.
double similarity(const EmbeddingTable& table, EntityId a, EntityId b);

void write_embeddings(std::ostream& out, const EmbeddingTable& table);
EmbeddingTable read_embeddings(std::istream& in);
void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);
EmbeddingTable load_embeddings(const std::filesystem::path& path);

}  // namespace kgcoop
